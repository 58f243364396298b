"""Error types and input validation helpers for CLI arguments and data files."""

import re
from typing import Dict, List, Optional, Sequence, Set, Tuple

import structlog

logger = structlog.get_logger(__name__)

LABEL_MIN = 0
LABEL_MAX = 8

_BRANCH_SPEC = re.compile(r"^(?P<branch>[A-Za-z][\w.\-]*)(?::(?P<folds>\d+(?:[,+]\d+)*))?$")
_SPEC_SEPARATOR = re.compile(r",(?=[A-Za-z])")


class EnsembleError(Exception):
    """Base class for toolkit errors that map to exit code 1."""
    pass


class ConfigurationError(EnsembleError):
    """Raised when a configuration or CLI value is invalid."""
    pass


class ParseError(EnsembleError):
    """Raised when a data file row cannot be parsed."""

    def __init__(self, path: str, line: int, column: Optional[int], value: str, reason: str):
        self.path = path
        self.line = line
        self.column = column
        self.value = value
        self.reason = reason
        where = f"{path}:{line}" if column is None else f"{path}:{line}:{column}"
        super().__init__(f"{where}: {reason} (value {value!r})")


class PoolValidationError(EnsembleError):
    """Raised when a loaded pool fails registry validation."""

    def __init__(self, violations: Sequence[object]):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations[:5])
        more = f" (+{len(self.violations) - 5} more)" if len(self.violations) > 5 else ""
        super().__init__(f"pool validation failed with {len(self.violations)} violation(s): {lines}{more}")


def parse_label(text: str) -> int:
    """Parse a class label string; raises ValueError outside 0..8."""
    text = text.strip()
    if not re.fullmatch(r"[+-]?\d+", text):
        raise ValueError(f"label must be an integer, got {text!r}")
    value = int(text)
    if value < LABEL_MIN or value > LABEL_MAX:
        raise ValueError(f"label {value} outside {LABEL_MIN}..{LABEL_MAX}")
    return value


def parse_class_set(text: str) -> Set[int]:
    """Parse class sets such as ``1-8``, ``0,7`` or ``1-3,6``."""
    classes: Set[int] = set()
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part[1:]:
            lo_text, hi_text = part.split("-", 1)
            lo, hi = parse_label(lo_text), parse_label(hi_text)
            if lo > hi:
                raise ValueError(f"empty class range {part!r}")
            classes.update(range(lo, hi + 1))
        else:
            classes.add(parse_label(part))
    return classes


def parse_int_list(text: str) -> List[int]:
    """Parse ``6,9,12`` into a list of integers."""
    try:
        values = [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise ValueError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise ValueError("expected at least one integer")
    return values


def parse_counts(text: str) -> Dict[int, int]:
    """Parse per-class counts.

    Accepts positional lists (``244,88,54``: class i gets the i-th value) or
    explicit pairs (``0=244,1=88``).
    """
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise ValueError("expected at least one count")
    counts: Dict[int, int] = {}
    for idx, part in enumerate(parts):
        if "=" in part:
            key_text, value_text = part.split("=", 1)
            label = parse_label(key_text)
        else:
            label, value_text = parse_label(str(idx)), part
        if label in counts:
            raise ValueError(f"class {label} given twice")
        try:
            counts[label] = int(value_text)
        except ValueError:
            raise ValueError(f"count for class {label} must be an integer, got {value_text!r}")
    return counts


def parse_branch_spec(text: str) -> Tuple[str, Optional[List[int]]]:
    """Parse ``branch`` or ``branch:0,1,4`` (``+`` also separates folds)."""
    match = _BRANCH_SPEC.match(text.strip())
    if not match:
        raise ValueError(f"invalid branch spec {text!r}; expected branch[:folds]")
    folds_text = match.group("folds")
    folds = [int(f) for f in re.split(r"[,+]", folds_text)] if folds_text else None
    if folds is not None and len(set(folds)) != len(folds):
        raise ValueError(f"duplicate fold in {text!r}")
    return match.group("branch"), folds


def parse_branch_specs(values: Sequence[str]) -> List[Tuple[str, Optional[List[int]]]]:
    """Parse one or more branch specs; each value may hold several comma-joined specs."""
    specs: List[Tuple[str, Optional[List[int]]]] = []
    for value in values:
        for chunk in _SPEC_SEPARATOR.split(value):
            if chunk.strip():
                specs.append(parse_branch_spec(chunk))
    return specs


def parse_role_overrides(values: Sequence[str]) -> Dict[str, str]:
    """Parse ``branch=role`` pairs for search role overrides."""
    overrides: Dict[str, str] = {}
    for value in values:
        if "=" not in value:
            raise ValueError(f"invalid role override {value!r}; expected branch=role")
        branch, role = (p.strip() for p in value.split("=", 1))
        if role not in ("gatekeeper", "specialist"):
            raise ValueError(f"unknown role {role!r} in {value!r}")
        overrides[branch] = role
    return overrides
