"""Kobayashi indicatrix of a domain with a finite universal set.

At a point ``p`` each member ``F_i`` contributes the complex covector
``L_i = grad F_i(p) / (1 - |F_i(p)|^2)`` and the indicatrix is the
intersection of the slabs ``|L_i(X)| < 1``. Its gauge is
``mu(X) = max_i |L_i(X)|``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import domain as dom
from .errors import DomainError, ModelError, NotASmoothFaceError

ACTIVE_TOL = 1e-9
DEDUP_TOL = 1e-9
BOUNDED_TOL = 1e-9


@dataclass(frozen=True)
class Functional:
    l: np.ndarray
    source_index: int

    def __call__(self, X):
        return complex(self.l @ np.asarray(X, dtype=complex))


@dataclass(frozen=True, eq=False)
class IndicatrixModel:
    base_point: np.ndarray
    functionals: tuple

    def __post_init__(self):
        if not self.functionals:
            raise ModelError("an indicatrix needs at least one functional")
        for f in self.functionals:
            if not np.any(f.l):
                raise ModelError(f"functional {f.source_index} is the zero covector")
        sv = np.linalg.svd(self.matrix, compute_uv=False)
        if sv[-1] <= BOUNDED_TOL:
            raise ModelError(
                f"functionals do not span C^2 (smallest singular value {sv[-1]:.3e}); "
                "the indicatrix is unbounded"
            )

    @property
    def matrix(self) -> np.ndarray:
        """k x 2 complex matrix whose rows are the covectors."""
        return np.array([f.l for f in self.functionals], dtype=complex)

    def __len__(self):
        return len(self.functionals)


@dataclass(frozen=True, eq=False)
class Face:
    base: np.ndarray
    active_index: int
    kernel_direction: np.ndarray


def from_covectors(covectors, base_point=(0, 0)) -> IndicatrixModel:
    """Model built directly from a list of covectors (no domain needed)."""
    fs = tuple(
        Functional(np.asarray(l, dtype=complex).reshape(2), i) for i, l in enumerate(covectors)
    )
    return IndicatrixModel(dom.as_point(base_point), fs)


def build_indicatrix(spec: dom.DomainSpec, p) -> IndicatrixModel:
    p = dom.as_point(p)
    if not dom.contains(spec, p):
        raise DomainError(f"point {p.tolist()} is not in the {spec.kind} domain")
    values = dom.member_values(spec, p)
    grads = dom.member_gradients(spec, p)
    scale = 1.0 - np.abs(values) ** 2
    fs = tuple(Functional(grads[i] / scale[i], i) for i in range(len(values)))
    return IndicatrixModel(p, fs)


def minkowski(ind: IndicatrixModel, X) -> float:
    return float(np.max(np.abs(ind.matrix @ np.asarray(X, dtype=complex))))


def boundary_point(ind: IndicatrixModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=complex)
    mu = minkowski(ind, X)
    if mu == 0:
        raise ModelError("cannot project the zero vector onto the boundary")
    return X / mu


def active_set(ind: IndicatrixModel, q, tol: float = ACTIVE_TOL) -> list[int]:
    vals = np.abs(ind.matrix @ np.asarray(q, dtype=complex))
    if abs(vals.max() - 1.0) > tol:
        raise ModelError(f"point is not on the boundary: mu = {vals.max():.12g}")
    return [int(i) for i in np.flatnonzero(vals >= 1.0 - tol)]


def kernel_direction(l) -> np.ndarray:
    """Unit vector spanning ``Ker(l)``, phase-fixed so the first nonzero entry is positive."""
    v = np.array([-l[1], l[0]], dtype=complex)
    v = v / np.linalg.norm(v)
    k = int(np.argmax(np.abs(v) > 1e-14))
    return v * (abs(v[k]) / v[k])


def face_at(ind: IndicatrixModel, q, tol: float = ACTIVE_TOL) -> Face:
    """The face ``q + Ker(L_i)`` through a point where exactly one ``|L_i| = 1``."""
    act = active_set(ind, q, tol)
    if len(act) != 1:
        raise NotASmoothFaceError(act)
    i = act[0]
    return Face(np.asarray(q, dtype=complex), i, kernel_direction(ind.functionals[i].l))


def face_safe_radius(ind: IndicatrixModel, face: Face) -> float:
    """Step along the face direction that keeps every inactive constraint slack.

    One hundredth of the inactive slack divided by the largest ``|L_i(v)|``.
    """
    vals = np.abs(ind.matrix @ face.base)
    inactive = np.delete(vals, face.active_index)
    slack = 1.0 - (inactive.max() if inactive.size else 0.0)
    growth = np.max(np.abs(ind.matrix @ face.kernel_direction))
    return 0.01 * slack / growth if growth > 0 else np.inf


def line_configuration(ind: IndicatrixModel, tol: float = DEDUP_TOL) -> list[np.ndarray]:
    """Distinct complex lines ``Ker(L_i)``, as unit spanning vectors."""
    lines: list[np.ndarray] = []
    for f in ind.functionals:
        u = kernel_direction(f.l)
        if all(abs(np.vdot(v, u)) <= 1.0 - tol for v in lines):
            lines.append(u)
    return lines


def to_record(ind: IndicatrixModel, tol: float = DEDUP_TOL) -> dict:
    lines = line_configuration(ind, tol)
    return {
        "base_point": [dom.complex_pair(c) for c in ind.base_point],
        "functionals": [
            {"source_index": f.source_index, "l": [dom.complex_pair(c) for c in f.l]}
            for f in ind.functionals
        ],
        "line_count": len(lines),
        "lines": [[dom.complex_pair(c) for c in v] for v in lines],
    }
