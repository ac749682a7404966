import hashlib
import json
from typing import Dict, Iterable, Mapping, Optional

from .config import settings
from .exceptions import ScenarioError

TOLERANCE_CLASSES = ("exact", "smooth", "pl")


def canonical_json(value: object) -> str:
    """Sorted keys, no whitespace, floats via repr; stable across runs."""
    return json.dumps(value, sort_keys=True, separators=(",", ":"), default=str)


def inputs_digest(*parts: object) -> str:
    """sha256 of the canonical JSON of the check inputs."""
    return hashlib.sha256(canonical_json(list(parts)).encode("utf-8")).hexdigest()


def parse_tolerance_overrides(items: Optional[Iterable[str]]) -> Dict[str, float]:
    """`--tol NAME=VALUE` pairs into a dict; later pairs win."""
    overrides: Dict[str, float] = {}
    for item in items or []:
        name, sep, value = item.rpartition("=")
        name = name.strip()
        if not sep or not name:
            raise ScenarioError(f"--tol expects NAME=VALUE, got {item!r}")
        try:
            number = float(value)
        except ValueError as exc:
            raise ScenarioError(f"--tol {name}: {value!r} is not a number") from exc
        if number < 0:
            raise ScenarioError(f"--tol {name}: tolerances are non-negative")
        overrides[name] = number
    return overrides


def default_tolerance(kind: str) -> float:
    if kind not in TOLERANCE_CLASSES:
        raise ScenarioError(f"Unknown tolerance class {kind!r}")
    return float(getattr(settings, f"tol_{kind}"))


def resolve_tolerance(name: str, kind: str, *tables: Mapping[str, float]) -> float:
    """
    Most specific wins: exact check name, then the check family (text before
    '['), then the class. At equal specificity later tables win.
    """
    family = name.split("[", 1)[0]
    value = default_tolerance(kind)
    for key in (kind, family, name):
        for table in tables:
            if key in table:
                value = float(table[key])
    return value

