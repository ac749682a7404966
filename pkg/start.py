#!/usr/bin/env python3
"""
Command-line launcher: `python start.py <subcommand> --scenario PATH [flags]`.
"""
import sys

from src.main import main

if __name__ == "__main__":
    sys.exit(main())
