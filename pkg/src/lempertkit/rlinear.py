"""Real-linear maps of C and C^2 and their complex-linearity type.

An R-linear map of C^2 is stored in dual form ``T(X) = A X + B conj(X)``
with complex 2x2 blocks ``A`` (the complex-linear part) and ``B`` (the
conjugate-linear part). Its real 4x4 matrix uses the coordinate order
``(Re X1, Re X2, Im X1, Im X2)``, in which the complex structure is
``J = [[0, -I], [I, 0]]``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, HypothesisError
from .indicatrix import IndicatrixModel, line_configuration

J4 = np.block([[np.zeros((2, 2)), -np.eye(2)], [np.eye(2), np.zeros((2, 2))]])


class Linearity(enum.Enum):
    CLINEAR = "CLinear"
    ANTI_CLINEAR = "AntiCLinear"
    NEITHER = "Neither"


@dataclass(frozen=True)
class RLinearMap1:
    """``A(z) = a z + b conj(z)``."""

    a: complex
    b: complex

    def __call__(self, z):
        return self.a * z + self.b * np.conj(z)


def image_modulus_sq(m: RLinearMap1, theta, r: float = 1.0):
    """``|A(r e^{i theta})|^2 = r^2 (|a|^2 + |b|^2 + 2 Re(a conj(b) e^{2 i theta}))``."""
    a, b = complex(m.a), complex(m.b)
    cross = np.real(a * b.conjugate() * np.exp(2j * np.asarray(theta)))
    return r * r * (abs(a) ** 2 + abs(b) ** 2 + 2 * cross)


def circle_image_radii(m: RLinearMap1) -> tuple[float, float]:
    """Extreme moduli of the image of the unit circle.

    The image is an ellipse with semi-axes ``|a| + |b|`` and ``||a| - |b||``;
    it is a circle exactly when ``a = 0`` or ``b = 0``.
    """
    ra, rb = abs(complex(m.a)), abs(complex(m.b))
    return abs(ra - rb), ra + rb


def is_circle_image(m: RLinearMap1, tol: float = 1e-12) -> bool:
    lo, hi = circle_image_radii(m)
    return hi - lo <= tol * max(1.0, hi)


@dataclass(frozen=True, eq=False)
class RLinearMap2:
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=complex).reshape(2, 2)
        B = np.asarray(self.B, dtype=complex).reshape(2, 2)
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
            raise ConfigError("map blocks must be finite")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    def __call__(self, X):
        X = np.asarray(X, dtype=complex)
        return self.A @ X + self.B @ np.conj(X)

    @property
    def matrix(self) -> np.ndarray:
        Ar, Ai, Br, Bi = self.A.real, self.A.imag, self.B.real, self.B.imag
        return np.block([[Ar + Br, Bi - Ai], [Ai + Bi, Ar - Br]])

    @classmethod
    def from_matrix(cls, M) -> "RLinearMap2":
        M = np.asarray(M, dtype=float)
        P, Q, R, S = M[:2, :2], M[:2, 2:], M[2:, :2], M[2:, 2:]
        A = (P + S) / 2 + 1j * (R - Q) / 2
        B = (P - S) / 2 + 1j * (R + Q) / 2
        return cls(A, B)

    @classmethod
    def identity(cls) -> "RLinearMap2":
        return cls(np.eye(2), np.zeros((2, 2)))

    @classmethod
    def conjugation(cls) -> "RLinearMap2":
        return cls(np.zeros((2, 2)), np.eye(2))

    def compose(self, other: "RLinearMap2") -> "RLinearMap2":
        """``self o other``."""
        # A1 (A2 X + B2 Xb) + B1 conj(A2 X + B2 Xb)
        A = self.A @ other.A + self.B @ np.conj(other.B)
        B = self.A @ other.B + self.B @ np.conj(other.A)
        return RLinearMap2(A, B)


def to_real(X) -> np.ndarray:
    X = np.asarray(X, dtype=complex)
    return np.concatenate([X.real, X.imag])


def from_real(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x[:2] + 1j * x[2:]


@dataclass(frozen=True)
class Classification:
    label: Linearity
    norm_A: float
    norm_B: float
    commutator: float
    anticommutator: float
    degenerate: bool = False

    def to_record(self) -> dict:
        return {
            "label": self.label.value,
            "norm_A": self.norm_A,
            "norm_B": self.norm_B,
            "commutator": self.commutator,
            "anticommutator": self.anticommutator,
            "degenerate": self.degenerate,
        }


def classify(T: RLinearMap2, tol: float = 1e-8) -> Classification:
    """C-linear iff ``||B|| <= tol (1 + ||A||)``; anti iff ``||A|| <= tol (1 + ||B||)``.

    When both blocks are below tolerance the smaller one decides and the
    result is flagged ``degenerate``.
    """
    nA = float(np.linalg.norm(T.A))
    nB = float(np.linalg.norm(T.B))
    M = T.matrix
    comm = float(np.linalg.norm(M @ J4 - J4 @ M))
    anti = float(np.linalg.norm(M @ J4 + J4 @ M))
    holo = nB <= tol * (1 + nA)
    antiholo = nA <= tol * (1 + nB)
    if holo and antiholo:
        label = Linearity.CLINEAR if nB <= nA else Linearity.ANTI_CLINEAR
        return Classification(label, nA, nB, comm, anti, degenerate=True)
    if holo:
        label = Linearity.CLINEAR
    elif antiholo:
        label = Linearity.ANTI_CLINEAR
    else:
        label = Linearity.NEITHER
    return Classification(label, nA, nB, comm, anti)


def _proj_gap(u, w) -> float:
    """``1 - |<w,u>| / (|w||u|)``; zero when u lies in the complex line C w."""
    nu, nw = np.linalg.norm(u), np.linalg.norm(w)
    if nu == 0:
        return np.inf
    return 1.0 - abs(np.vdot(w, u)) / (nu * nw)


@dataclass
class LineMatch:
    permutation: list | None
    failed_source: int | None = None
    reason: str = ""

    @property
    def ok(self) -> bool:
        return self.permutation is not None


def maps_lines(T: RLinearMap2, src_lines, dst_lines, tol: float = 1e-8) -> LineMatch:
    """Find ``sigma`` with ``T(C v_j) = C w_sigma(j)`` for every source line.

    Both ``T(v)`` and ``T(i v)`` have to fall into the same target complex
    line; an R-linear map that is neither C- nor anti-C-linear generally
    tears a complex line into a totally real plane.
    """
    if len(src_lines) != len(dst_lines):
        raise ConfigError(f"{len(src_lines)} source lines vs {len(dst_lines)} target lines")
    used: set[int] = set()
    sigma = []
    for j, v in enumerate(src_lines):
        v = np.asarray(v, dtype=complex)
        tv, tiv = T(v), T(1j * v)
        match = None
        for k, w in enumerate(dst_lines):
            if k in used:
                continue
            if _proj_gap(tv, w) <= tol and _proj_gap(tiv, w) <= tol:
                match = k
                break
        if match is None:
            gaps = [max(_proj_gap(tv, w), _proj_gap(tiv, w)) for w in dst_lines]
            reason = (
                f"image of source line {j} is not contained in any unused target line "
                f"(smallest projective gap {min(gaps):.3e})"
            )
            return LineMatch(None, j, reason)
        used.add(match)
        sigma.append(match)
    return LineMatch(sigma)


def unit_samples(n: int, seed: int = 0) -> np.ndarray:
    """``n`` unit vectors of C^2 from a seeded complex Gaussian."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, 2)) + 1j * rng.standard_normal((n, 2))
    return X / np.linalg.norm(X, axis=1, keepdims=True)


@dataclass
class NormCheck:
    ok: bool
    worst_deviation: float


def preserves_norm(
    T: RLinearMap2,
    src: IndicatrixModel,
    dst: IndicatrixModel,
    n_samples: int = 2000,
    tol: float = 1e-8,
    seed: int = 0,
) -> NormCheck:
    if n_samples < 1:
        raise ConfigError("n_samples must be positive")
    X = unit_samples(n_samples, seed)
    mu1 = np.max(np.abs(X @ src.matrix.T), axis=1)
    TX = X @ T.A.T + np.conj(X) @ T.B.T
    mu2 = np.max(np.abs(TX @ dst.matrix.T), axis=1)
    dev = np.abs(mu2 - mu1) / mu1
    worst = float(dev.max())
    return NormCheck(worst <= tol, worst)


@dataclass
class LineRigidityVerdict:
    classification: Classification
    norm: NormCheck
    lines: LineMatch
    contradiction: bool
    src_line_count: int
    dst_line_count: int

    @property
    def hypotheses_hold(self) -> bool:
        return self.norm.ok and self.lines.ok

    def to_record(self) -> dict:
        return {
            "classification": self.classification.to_record(),
            "preserves_norm": self.norm.ok,
            "worst_norm_deviation": self.norm.worst_deviation,
            "maps_lines": self.lines.ok,
            "permutation": self.lines.permutation,
            "line_failure": self.lines.reason or None,
            "src_line_count": self.src_line_count,
            "dst_line_count": self.dst_line_count,
            "contradiction": self.contradiction,
        }


def line_rigidity_verdict(
    T: RLinearMap2,
    src: IndicatrixModel,
    dst: IndicatrixModel,
    n_samples: int = 2000,
    tol: float = 1e-8,
    seed: int = 0,
) -> LineRigidityVerdict:
    """Three-line rigidity test for a norm-preserving R-linear map.

    If ``T`` preserves the gauges and carries the (at least three) kernel
    lines of ``src`` onto those of ``dst``, it must be C-linear or
    anti-C-linear; a ``Neither`` result under those hypotheses is reported
    as a contradiction.
    """
    src_lines = line_configuration(src)
    dst_lines = line_configuration(dst)
    if len(src_lines) < 3 or len(dst_lines) < 3:
        raise HypothesisError(
            f"need at least 3 complex lines on each side, got {len(src_lines)} and {len(dst_lines)}"
        )
    norm = preserves_norm(T, src, dst, n_samples, tol, seed)
    if len(src_lines) == len(dst_lines):
        lines = maps_lines(T, src_lines, dst_lines, tol)
    else:
        lines = LineMatch(None, None, "line counts differ")
    cls = classify(T, tol)
    contradiction = norm.ok and lines.ok and cls.label is Linearity.NEITHER
    return LineRigidityVerdict(cls, norm, lines, contradiction, len(src_lines), len(dst_lines))


# name used by the command-line contract
lemma5_verdict = line_rigidity_verdict


# ---------------------------------------------------------------------------
# documents

def map_from_document(doc) -> RLinearMap2:
    try:
        A = [[complex(*e) for e in row] for row in doc["A"]]
        B = [[complex(*e) for e in row] for row in doc["B"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad linear-map document: {exc}") from exc
    return RLinearMap2(np.array(A), np.array(B))


def map_to_document(T: RLinearMap2) -> dict:
    def block(M):
        return [[[float(e.real), float(e.imag)] for e in row] for row in M]

    return {"A": block(T.A), "B": block(T.B)}
