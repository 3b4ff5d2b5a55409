"""Hyperbolic geometry of the unit disc."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateInputError, DomainError

_DEGENERATE = 1e-15
_BELOW_ONE = math.nextafter(1.0, 0.0)


@dataclass(frozen=True)
class UnitDiscPoint:
    value: complex

    def __post_init__(self):
        v = complex(self.value)
        if not (abs(v) < 1.0):
            raise DomainError(f"{v} is not in the open unit disc")
        object.__setattr__(self, "value", v)

    def __complex__(self):
        return self.value


def _unwrap(z) -> complex:
    if isinstance(z, UnitDiscPoint):
        return z.value
    return UnitDiscPoint(z).value


def mobius(z, w) -> complex:
    """Disc automorphism sending ``w`` to 0, evaluated at ``z``."""
    z, w = _unwrap(z), _unwrap(w)
    den = 1.0 - w.conjugate() * z
    if abs(den) < _DEGENERATE:
        raise DegenerateInputError(f"mobius denominator vanishes for z={z}, w={w}")
    return (z - w) / den


def poincare_distance(z, w) -> float:
    """artanh of the Mobius pseudodistance ``|z - w| / |1 - conj(w) z|``."""
    m = abs(mobius(z, w))
    # rounding can push m onto 1 for points hugging the boundary
    return math.atanh(min(m, _BELOW_ONE))


def poincare_metric(p, X) -> float:
    p = _unwrap(p)
    return abs(complex(X)) / (1.0 - abs(p) ** 2)
