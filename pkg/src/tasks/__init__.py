"""
Thread-pool execution of independent solves.

Quadrature nodes, flatness grid points and CLI checks are independent; they
are fanned out here and always reduced in input order.
"""

from .pool import WorkerPool, TaskStatus, TaskResult, parallel_map

__all__ = ["WorkerPool", "TaskStatus", "TaskResult", "parallel_map"]
