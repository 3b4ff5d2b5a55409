"""Holomorphy classification of maps between two-dimensional domains.

A map is sampled through its real Frechet derivative, obtained by central
differences in the coordinates ``(Re z1, Re z2, Im z1, Im z2)`` and split
into its Wirtinger blocks ``A = f_z`` and ``B = f_zbar``. Each point is
labelled holomorphic, antiholomorphic or mixed; over a connected grid the
labels must agree for the map to be declared (anti)holomorphic.

The map is assumed to be C^1; a black box cannot be checked for that.
"""

from __future__ import annotations

import enum
import itertools
from collections import deque
from dataclasses import dataclass, field
from collections.abc import Callable, Mapping, Sequence

import numpy as np

from . import expr as E
from .domain import DomainSpec, as_point, contains, complex_pair
from .errors import ConfigError, DomainError, GridError, StepTooLargeError
from .indicatrix import build_indicatrix, line_configuration
from .rlinear import Linearity, RLinearMap2, classify, from_real, to_real, unit_samples

DEFAULT_STEP = 1e-5
DEFAULT_TOL = 1e-4
MAX_HALVINGS = 3
ISOMETRY_TOL = 1e-6


class PointLabel(enum.Enum):
    HOLO = "Holo"
    ANTI = "Anti"
    MIXED = "Mixed"


class MapVerdictLabel(enum.Enum):
    HOLOMORPHIC = "Holomorphic"
    ANTIHOLOMORPHIC = "Antiholomorphic"
    MIXED = "Mixed"


_FROM_LINEARITY = {
    Linearity.CLINEAR: PointLabel.HOLO,
    Linearity.ANTI_CLINEAR: PointLabel.ANTI,
    Linearity.NEITHER: PointLabel.MIXED,
}


@dataclass(frozen=True, eq=False)
class SampledMap:
    func: Callable
    source: DomainSpec | None = None
    target: DomainSpec | None = None
    # tabulated maps carry their own stencil step and cannot be refined
    table_step: float | None = None

    def __call__(self, z) -> np.ndarray:
        out = np.asarray(self.func(as_point(z)), dtype=complex).reshape(-1)
        if out.shape != (2,) or not np.all(np.isfinite(out)):
            raise DomainError(f"map returned {out!r} at {z}")
        return out

    @property
    def tabulated(self) -> bool:
        return self.table_step is not None


def expression_map(components: Sequence[str], constants=None, source=None, target=None) -> SampledMap:
    """Map ``z -> (e1(z), e2(z))``; ``conj`` of variables is allowed here."""
    if len(components) != 2:
        raise ConfigError(f"a map of C^2 needs 2 component expressions, got {len(components)}")
    fs = [E.compile_expr(E.parse(src, constants)) for src in components]

    def func(z):
        return np.array([f(z[0], z[1]) for f in fs], dtype=complex)

    return SampledMap(func, source, target)


def _key(z, digits=12):
    x = to_real(z)
    return tuple(np.round(x, digits) + 0.0)


def tabulated_map(samples: Mapping, step: float, source=None, target=None) -> SampledMap:
    """Lookup table of point -> value; no interpolation, missing points raise."""
    table = {_key(as_point(p)): as_point(v) for p, v in samples}

    def func(z):
        try:
            return table[_key(z)]
        except KeyError:
            raise ConfigError(f"tabulated map has no sample at {z.tolist()}") from None

    return SampledMap(func, source, target, table_step=float(step))


def map_from_document(doc, source=None, target=None) -> SampledMap:
    kind = doc.get("kind", "expr")
    if kind == "expr":
        constants = {k: complex(*v) for k, v in doc.get("constants", {}).items()}
        return expression_map(doc.get("components", []), constants, source, target)
    if kind == "table":
        try:
            samples = [
                ([complex(*c) for c in s["point"]], [complex(*c) for c in s["value"]])
                for s in doc["samples"]
            ]
            step = float(doc["step"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad tabulated map document: {exc}") from exc
        return tabulated_map(samples, step, source, target)
    raise ConfigError(f"unknown map kind {kind!r}")


# ---------------------------------------------------------------------------
# derivatives

def _stencil(p, h):
    x = to_real(p)
    pts = []
    for k in range(4):
        e = np.zeros(4)
        e[k] = h
        pts.append((from_real(x + e), from_real(x - e)))
    return pts


def real_jacobian(F: SampledMap, p, h: float = DEFAULT_STEP, max_halvings: int = MAX_HALVINGS) -> RLinearMap2:
    """Central-difference real derivative of ``F`` at ``p`` as ``(A, B)`` blocks."""
    p = as_point(p)
    if F.tabulated:
        h, max_halvings = F.table_step, 0
    for _ in range(max_halvings + 1):
        stencil = _stencil(p, h)
        if F.source is None or all(contains(F.source, q) for pair in stencil for q in pair):
            break
        h /= 2
    else:
        raise StepTooLargeError(
            f"difference stencil at {p.tolist()} leaves the domain; use a step below {h:.3e}"
        )
    cols = [(to_real(F(qp)) - to_real(F(qm))) / (2 * h) for qp, qm in stencil]
    M = np.column_stack(cols)
    return wirtinger_split(M)


def wirtinger_split(M) -> RLinearMap2:
    """``A e_j = (T e_j - i T(i e_j)) / 2`` and ``B e_j = (T e_j + i T(i e_j)) / 2``."""
    M = np.asarray(M, dtype=float)
    A = np.zeros((2, 2), dtype=complex)
    B = np.zeros((2, 2), dtype=complex)
    for j in range(2):
        te = from_real(M[:, j])
        tie = from_real(M[:, 2 + j])
        A[:, j] = (te - 1j * tie) / 2
        B[:, j] = (te + 1j * tie) / 2
    return RLinearMap2(A, B)


def check_isometry_at(
    F: SampledMap,
    p,
    n_dirs: int = 64,
    h: float = DEFAULT_STEP,
    seed: int = 0,
    T: RLinearMap2 | None = None,
) -> float:
    """Worst relative defect of ``kappa_N(F(p); F'(p) X) = kappa_M(p; X)``.

    The Kobayashi metrics are evaluated through the Caratheodory metric,
    which coincides with them on the domains handled here.
    """
    if F.tabulated:
        raise ConfigError("isometry checks need off-grid evaluations; tabulated maps only classify")
    if F.source is None or F.target is None:
        raise ConfigError("isometry checks need both a source and a target domain")
    p = as_point(p)
    if not contains(F.source, p):
        raise DomainError(f"point {p.tolist()} is not in the source domain")
    q = F(p)
    if not contains(F.target, q):
        raise DomainError(f"F maps {p.tolist()} to {q.tolist()}, outside the target domain")
    if T is None:
        T = real_jacobian(F, p, h)
    src = build_indicatrix(F.source, p).matrix
    dst = build_indicatrix(F.target, q).matrix
    X = unit_samples(n_dirs, seed)
    mu1 = np.max(np.abs(X @ src.T), axis=1)
    TX = X @ T.A.T + np.conj(X) @ T.B.T
    mu2 = np.max(np.abs(TX @ dst.T), axis=1)
    return float(np.max(np.abs(mu2 - mu1) / mu1))


@dataclass
class PointClassification:
    p: np.ndarray
    jacobian: RLinearMap2
    wirtinger_z_norm: float
    wirtinger_zbar_norm: float
    label: PointLabel
    isometry_residual: float | None = None
    degenerate: bool = False

    def to_record(self) -> dict:
        return {
            "point": [complex_pair(c) for c in self.p],
            "label": self.label.value,
            "wirtinger_z_norm": self.wirtinger_z_norm,
            "wirtinger_zbar_norm": self.wirtinger_zbar_norm,
            "isometry_residual": self.isometry_residual,
            "degenerate": self.degenerate,
        }


def classify_point(
    F: SampledMap,
    p,
    h: float = DEFAULT_STEP,
    tol: float = DEFAULT_TOL,
    n_dirs: int = 64,
) -> PointClassification:
    p = as_point(p)
    T = real_jacobian(F, p, h)
    c = classify(T, tol)
    residual = None
    if F.source is not None and F.target is not None and not F.tabulated:
        residual = check_isometry_at(F, p, n_dirs=n_dirs, h=h, T=T)
    return PointClassification(
        p, T, c.norm_A, c.norm_B, _FROM_LINEARITY[c.label], residual, c.degenerate
    )


# ---------------------------------------------------------------------------
# grids and global verdict

@dataclass
class Grid:
    points: np.ndarray
    edges: list = field(default_factory=list)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=complex).reshape(-1, 2)
        self.edges = [(int(i), int(j)) for i, j in self.edges]
        n = len(self.points)
        for i, j in self.edges:
            if not (0 <= i < n and 0 <= j < n):
                raise GridError(f"edge ({i}, {j}) refers to a missing point")

    def is_connected(self) -> bool:
        n = len(self.points)
        if n == 0:
            return False
        adj = [[] for _ in range(n)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        seen = {0}
        todo = deque([0])
        while todo:
            for j in adj[todo.popleft()]:
                if j not in seen:
                    seen.add(j)
                    todo.append(j)
        return len(seen) == n


def make_grid(center=(0, 0), spacing: float = 0.05, n: int = 3) -> Grid:
    """``n^4`` lattice in the real coordinates around ``center`` with axis-neighbour edges."""
    c = to_real(as_point(center))
    offsets = (np.arange(n) - (n - 1) / 2) * spacing
    index = {}
    points = []
    for k, idx in enumerate(itertools.product(range(n), repeat=4)):
        index[idx] = k
        points.append(from_real(c + offsets[list(idx)]))
    edges = []
    for idx, k in index.items():
        for axis in range(4):
            nb = list(idx)
            nb[axis] += 1
            if nb[axis] < n:
                edges.append((k, index[tuple(nb)]))
    return Grid(np.array(points), edges)


def grid_from_document(doc) -> Grid:
    try:
        if "points" in doc:
            pts = [point_from_reals(p) for p in doc["points"]]
            return Grid(np.array(pts), doc.get("edges", []))
        return make_grid(point_from_reals(doc["center"]), float(doc["spacing"]), int(doc["n"]))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, GridError):
            raise
        raise GridError(f"bad grid document: {exc}") from exc


def point_from_reals(vals) -> np.ndarray:
    """``[Re z1, Im z1, Re z2, Im z2]`` or ``[[Re z1, Im z1], [Re z2, Im z2]]`` -> point of C^2."""
    vals = list(vals)
    if len(vals) == 2 and all(isinstance(v, (list, tuple)) for v in vals):
        vals = [x for pair in vals for x in pair]
    vals = [float(v) for v in vals]
    if len(vals) != 4:
        raise ConfigError(f"a point needs 4 real numbers, got {len(vals)}")
    return np.array([complex(vals[0], vals[1]), complex(vals[2], vals[3])])


@dataclass
class MapVerdict:
    label: MapVerdictLabel
    points: list
    change_edges: list
    worst_isometry_residual: float | None
    min_line_count: int | None
    contradiction: bool

    def to_record(self) -> dict:
        worst_z = max(pc.wirtinger_z_norm for pc in self.points)
        worst_zbar = max(pc.wirtinger_zbar_norm for pc in self.points)
        return {
            "verdict": self.label.value,
            "n_points": len(self.points),
            "label_counts": {
                lab.value: sum(pc.label is lab for pc in self.points) for lab in PointLabel
            },
            "change_edges": [list(e) for e in self.change_edges],
            "worst_isometry_residual": self.worst_isometry_residual,
            "max_wirtinger_z_norm": worst_z,
            "max_wirtinger_zbar_norm": worst_zbar,
            "min_line_count": self.min_line_count,
            "contradiction": self.contradiction,
            "points": [pc.to_record() for pc in self.points],
        }


def classify_map(
    F: SampledMap,
    grid: Grid,
    h: float = DEFAULT_STEP,
    tol: float = DEFAULT_TOL,
    isometry_tol: float = ISOMETRY_TOL,
) -> MapVerdict:
    """Global (anti)holomorphy verdict over a connected grid.

    ``contradiction`` is raised when the map is a numerical isometry
    between domains whose indicatrices carry at least three complex lines
    everywhere on the grid, and yet the verdict is ``Mixed``.
    """
    if len(grid.points) == 0:
        raise GridError("empty grid")
    if not grid.is_connected():
        raise GridError("grid is not connected under the declared adjacency")
    results = [classify_point(F, p, h, tol) for p in grid.points]
    labels = {pc.label for pc in results}
    if labels == {PointLabel.HOLO}:
        verdict = MapVerdictLabel.HOLOMORPHIC
    elif labels == {PointLabel.ANTI}:
        verdict = MapVerdictLabel.ANTIHOLOMORPHIC
    else:
        verdict = MapVerdictLabel.MIXED
    changes = [(i, j) for i, j in grid.edges if results[i].label is not results[j].label]
    residuals = [pc.isometry_residual for pc in results if pc.isometry_residual is not None]
    worst = max(residuals) if residuals else None
    min_lines = None
    contradiction = False
    if F.source is not None and F.target is not None and not F.tabulated:
        min_lines = min(
            min(
                len(line_configuration(build_indicatrix(F.source, pc.p))),
                len(line_configuration(build_indicatrix(F.target, F(pc.p)))),
            )
            for pc in results
        )
        contradiction = (
            verdict is MapVerdictLabel.MIXED
            and worst is not None
            and worst <= isometry_tol
            and min_lines >= 3
        )
    return MapVerdict(verdict, results, changes, worst, min_lines, contradiction)
