"""Two-dimensional domains described by a finite Caratheodory universal set.

A domain is stored as two lists of expressions:

* ``members``: holomorphic maps into the unit disc whose Poincare
  distances realise the Caratheodory distance by a plain maximum;
* ``constraints``: membership tests ``|num(z)| < |den(z)|`` (``den``
  defaults to 1).

For ``D_{a,b}`` the third member is
``F3 = (a z1 + b z2 - z1 z2) / (conj(b) z1 + conj(a) z2 - 1)`` and the
membership constraint uses the same numerator and denominator, so that
``D_{a,b}`` is exactly ``{z in bidisc : |F3(z)| < 1}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from collections.abc import Callable, Mapping, Sequence

import numpy as np

from . import expr as E
from .disc_geometry import poincare_distance
from .errors import ConfigError, DomainError, ParameterError, PoleError

DAB_NUMERATOR = "a*z1+b*z2-z1*z2"
DAB_DENOMINATOR = "conj(b)*z1+conj(a)*z2-1"


def as_point(z) -> np.ndarray:
    p = np.asarray(z, dtype=complex).reshape(-1)
    if p.shape != (2,):
        raise ConfigError(f"expected a point of C^2, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ConfigError(f"non-finite coordinates in {p}")
    return p


@dataclass(frozen=True)
class Member:
    expr: E.Expr
    d1: E.Expr
    d2: E.Expr
    _f: Callable = field(init=False, repr=False, compare=False)
    _g1: Callable = field(init=False, repr=False, compare=False)
    _g2: Callable = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_f", E.compile_expr(self.expr))
        object.__setattr__(self, "_g1", E.compile_expr(self.d1))
        object.__setattr__(self, "_g2", E.compile_expr(self.d2))

    @classmethod
    def from_expr(cls, node: E.Expr) -> "Member":
        report = E.validate_holomorphic(node)
        if not report.ok:
            raise ConfigError(f"universal-set member is not holomorphic: {report.violations}")
        return cls(node, E.d_dz(node, 1), E.d_dz(node, 2))

    def value(self, z1, z2):
        return self._f(z1, z2)

    def gradient(self, z1, z2):
        return self._g1(z1, z2), self._g2(z1, z2)


@dataclass(frozen=True)
class Constraint:
    """The open condition ``|num| < |den|``; ``den is None`` means 1."""

    num: E.Expr
    den: E.Expr | None = None
    _num: Callable = field(init=False, repr=False, compare=False)
    _den: Callable | None = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_num", E.compile_expr(self.num))
        object.__setattr__(
            self, "_den", None if self.den is None else E.compile_expr(self.den)
        )

    def slack(self, z1, z2):
        """``|num|^2 - |den|^2``; negative strictly inside."""
        n = np.abs(self._num(z1, z2)) ** 2
        d = 1.0 if self._den is None else np.abs(self._den(z1, z2)) ** 2
        return n - d


@dataclass(frozen=True)
class UniversalSet:
    members: tuple

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, i):
        return self.members[i]


@dataclass(frozen=True)
class DomainSpec:
    kind: str
    universal_set: UniversalSet
    constraints: tuple
    a: complex | None = None
    b: complex | None = None
    constants: Mapping[str, complex] = field(default_factory=dict, compare=False)
    sources: dict = field(default_factory=dict, compare=False)

    @property
    def members(self):
        return self.universal_set.members

    def slack(self, z1, z2):
        """Worst membership slack, elementwise for array inputs."""
        return np.max([c.slack(z1, z2) for c in self.constraints], axis=0)


def _coordinate_constraints():
    return (Constraint(E.Var(1)), Constraint(E.Var(2)))


def make_bidisc() -> DomainSpec:
    members = (Member.from_expr(E.Var(1)), Member.from_expr(E.Var(2)))
    return DomainSpec("bidisc", UniversalSet(members), _coordinate_constraints())


def check_triangle(a: complex, b: complex) -> None:
    """Strict triangle inequalities for the side lengths ``|a|, |b|, 1``."""
    ra, rb = abs(a), abs(b)
    checks = [
        (ra < rb + 1, "|a| < |b| + 1"),
        (rb < ra + 1, "|b| < |a| + 1"),
        (ra + rb > 1, "1 < |a| + |b|"),
    ]
    for ok, text in checks:
        if not ok:
            raise ParameterError(
                f"(|a|, |b|, 1) = ({ra:g}, {rb:g}, 1) is not a triangle: {text} fails"
            )


def make_dab(a: complex, b: complex) -> DomainSpec:
    a, b = complex(a), complex(b)
    check_triangle(a, b)
    constants = {"a": a, "b": b}
    num = E.parse(DAB_NUMERATOR, constants)
    den = E.parse(DAB_DENOMINATOR, constants)
    f3 = E.Div(num, den)
    members = (
        Member.from_expr(E.Var(1)),
        Member.from_expr(E.Var(2)),
        Member.from_expr(f3),
    )
    constraints = _coordinate_constraints() + (Constraint(num, den),)
    return DomainSpec("dab", UniversalSet(members), constraints, a=a, b=b, constants=constants)


def make_custom(
    members: Sequence[str],
    membership: Sequence[str],
    constants: Mapping[str, complex] | None = None,
    reference=(0, 0),
) -> DomainSpec:
    """Domain ``{z : |m(z)| < 1 for every membership expression m}``.

    Minimality of the universal set is the caller's responsibility.
    """
    constants = {k: complex(v) for k, v in (constants or {}).items()}
    if not members:
        raise ConfigError("a universal set needs at least one member")
    mem = tuple(Member.from_expr(E.parse(src, constants)) for src in members)
    cons = []
    for src in membership:
        node = E.parse(src, constants)
        if not E.validate_holomorphic(node).ok:
            raise ConfigError(f"membership expression {src!r} is not holomorphic")
        cons.append(Constraint(node))
    if not cons:
        raise ConfigError("a custom domain needs at least one membership expression")
    spec = DomainSpec(
        "custom",
        UniversalSet(mem),
        tuple(cons),
        constants=constants,
        sources={"members": list(members), "membership": list(membership)},
    )
    ref = as_point(reference)
    if not contains(spec, ref):
        raise ConfigError(f"reference point {ref} is not in the custom domain")
    for i, m in enumerate(mem):
        if not abs(m.value(ref[0], ref[1])) < 1:
            raise ConfigError(f"member {i} does not map the reference point into the disc")
    object.__setattr__(spec, "sources", {**spec.sources, "reference": ref})
    return spec


def contains(spec: DomainSpec, z) -> bool:
    z = as_point(z)
    try:
        return all(c.slack(z[0], z[1]) < 0 for c in spec.constraints)
    except PoleError:
        return False


def _require(spec, z, label="point"):
    z = as_point(z)
    if not contains(spec, z):
        raise DomainError(f"{label} {z.tolist()} is not in the {spec.kind} domain")
    return z


def member_values(spec: DomainSpec, z) -> np.ndarray:
    return np.array([m.value(z[0], z[1]) for m in spec.members], dtype=complex)


def member_gradients(spec: DomainSpec, z) -> np.ndarray:
    """k x 2 matrix of complex gradients ``(dF_i/dz1, dF_i/dz2)`` at ``z``."""
    return np.array([m.gradient(z[0], z[1]) for m in spec.members], dtype=complex)


def caratheodory_distance(spec: DomainSpec, z, w) -> float:
    z = _require(spec, z, "z")
    w = _require(spec, w, "w")
    fz, fw = member_values(spec, z), member_values(spec, w)
    bad = np.flatnonzero((np.abs(fz) >= 1) | (np.abs(fw) >= 1))
    if bad.size:
        raise DomainError(f"universal-set member {int(bad[0])} leaves the unit disc")
    return max(poincare_distance(u, v) for u, v in zip(fz, fw))


def caratheodory_metric(spec: DomainSpec, p, X) -> float:
    p = _require(spec, p, "p")
    X = as_point(X)
    values = member_values(spec, p)
    grads = member_gradients(spec, p)
    return float(np.max(np.abs(grads @ X) / (1.0 - np.abs(values) ** 2)))


# ---------------------------------------------------------------------------
# config documents

def _complex(pair, what):
    try:
        re_, im = pair
        return complex(float(re_), float(im))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{what} must be a [re, im] pair, got {pair!r}") from exc


def complex_pair(z: complex) -> list:
    z = complex(z)
    return [z.real, z.imag]


def domain_from_document(doc: Mapping) -> DomainSpec:
    if not isinstance(doc, Mapping) or "kind" not in doc:
        raise ConfigError("domain document needs a 'kind' field")
    kind = doc["kind"]
    if kind == "bidisc":
        return make_bidisc()
    if kind == "dab":
        return make_dab(_complex(doc.get("a"), "a"), _complex(doc.get("b"), "b"))
    if kind == "custom":
        constants = {k: _complex(v, k) for k, v in doc.get("constants", {}).items()}
        reference = doc.get("reference")
        ref = (0, 0) if reference is None else [_complex(c, "reference") for c in reference]
        return make_custom(doc.get("members", []), doc.get("membership", []), constants, ref)
    raise ConfigError(f"unknown domain kind {kind!r}")


def domain_to_document(spec: DomainSpec) -> dict:
    if spec.kind == "bidisc":
        return {"kind": "bidisc"}
    if spec.kind == "dab":
        return {"kind": "dab", "a": complex_pair(spec.a), "b": complex_pair(spec.b)}
    return {
        "kind": "custom",
        "constants": {k: complex_pair(v) for k, v in spec.constants.items()},
        "members": spec.sources["members"],
        "membership": spec.sources["membership"],
    }
