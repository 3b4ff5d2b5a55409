"""Upper bounds for the Lempert function and the Kobayashi metric.

Both quantities are infima over analytic discs ``f: D -> M``. We search
over polynomial discs

    f(lam) = c0 + c1 lam + ... + cd lam^d,   c0 = z,

normalised so that the two preimages are ``0`` and ``t`` (Lempert function)
or so that ``f'(0) = X / alpha`` (Kobayashi metric). In both problems
feasibility is monotone in the scalar parameter ``s`` (``t`` or
``alpha``): if a disc ``f`` works for ``s`` then ``lam -> f(r lam)``
with ``r = s / s'`` works for any ``s' > s``. The outer loop therefore
shrinks the interval between the Caratheodory lower bound, which no disc
can beat, and the smallest parameter with a feasible disc found so far.
Degree-1 discs have no free coefficients and use plain bisection; higher
degrees step down from the incumbent with an adaptive step, warm-starting
each inner solve from the rescaled previous solution.
The inner loop looks for a feasible disc at fixed ``s`` by Nelder-Mead on
the free coefficients ``c2 .. cd`` with the penalty

    sum_m max(0, slack(f(lam_m)) + margin)^2

over roots of unity ``lam_m``. A candidate with zero penalty is only
accepted after a check at four times the sampling density and on a few
interior circles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .domain import DomainSpec, as_point, caratheodory_distance, caratheodory_metric, complex_pair
from .errors import ConfigError, DomainError

N_BOUNDARY = 64
N_CERTIFY = 4 * N_BOUNDARY
MARGIN = 1e-7
N_STARTS = 8
ATTEMPT_FACTOR = 40
CERT_RINGS = (0.25, 0.5, 0.75, 0.9)
LOWER_BOUND_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class AnalyticDisc:
    """Polynomial disc; row ``j`` of ``coefficients`` is ``c_j`` in C^2."""

    coefficients: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        if c.ndim != 2 or c.shape[1] != 2 or c.shape[0] < 1:
            raise ConfigError(f"disc coefficients must have shape (d+1, 2), got {c.shape}")
        object.__setattr__(self, "coefficients", c)

    @property
    def degree(self) -> int:
        return self.coefficients.shape[0] - 1

    @property
    def anchor(self) -> np.ndarray:
        return self.coefficients[0]

    def __call__(self, lam):
        """Horner evaluation; ``lam`` of shape S gives values of shape S + (2,)."""
        lam = np.asarray(lam, dtype=complex)[..., None]
        out = np.broadcast_to(self.coefficients[-1], lam.shape[:-1] + (2,)).astype(complex)
        for c in self.coefficients[-2::-1]:
            out = out * lam + c
        return out

    def padded(self, degree: int) -> "AnalyticDisc":
        extra = degree - self.degree
        if extra <= 0:
            return self
        return AnalyticDisc(np.vstack([self.coefficients, np.zeros((extra, 2), complex)]))

    def to_record(self) -> list:
        return [[complex_pair(x) for x in row] for row in self.coefficients]


def eval_disc(disc: AnalyticDisc, lam: complex) -> np.ndarray:
    if abs(lam) > 1:
        raise DomainError(f"|lambda| = {abs(lam):g} exceeds 1")
    return disc(lam)


def roots_of_unity(n: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(n) / n)


def _worst_slack(spec: DomainSpec, values: np.ndarray) -> float:
    return float(np.max(spec.slack(values[..., 0], values[..., 1])))


@dataclass
class Feasibility:
    ok: bool
    worst_slack: float


def disc_feasible(
    disc: AnalyticDisc,
    spec: DomainSpec,
    n_boundary: int = N_BOUNDARY,
    margin: float = MARGIN,
    rings=(),
) -> Feasibility:
    """Every membership slack at the ``n_boundary``-th roots of unity is ``<= -margin``.

    ``rings`` adds interior circles ``|lam| = r`` sampled at the same density.
    """
    if n_boundary < 8:
        raise ConfigError("n_boundary must be at least 8")
    lam = roots_of_unity(n_boundary)
    if rings:
        lam = np.concatenate([lam] + [r * lam for r in rings])
    with np.errstate(all="ignore"):
        worst = _worst_slack(spec, disc(lam))
    if not np.isfinite(worst):
        return Feasibility(False, math.inf)
    return Feasibility(worst <= -margin, worst)


# ---------------------------------------------------------------------------
# search machinery

class _BudgetExhausted(Exception):
    pass


class _Found(Exception):
    def __init__(self, x):
        self.x = x


class _Problem:
    """Polynomial discs with ``c0`` fixed and ``c1`` tied to a scalar parameter."""

    def __init__(self, spec, anchor, degree, budget, margin, n_boundary):
        self.spec = spec
        self.anchor = anchor
        self.degree = degree
        self.budget = budget
        self.used = 0
        self.best = None  # (parameter, free coefficients) of the best feasible disc
        self.margin = margin
        self.lam = roots_of_unity(n_boundary)
        self.lam_cert = roots_of_unity(4 * n_boundary)
        self.lam_rings = np.concatenate([r * self.lam for r in CERT_RINGS])
        # lam^j for j = 0..degree on each sample set
        self._pow = np.power.outer(self.lam, np.arange(degree + 1))
        self._pow_cert = np.power.outer(self.lam_cert, np.arange(degree + 1))
        self._pow_rings = np.power.outer(self.lam_rings, np.arange(degree + 1))

    # subclasses supply c1 from the parameter and the free coefficients
    def first_coefficient(self, s, free):
        raise NotImplementedError

    def coefficients(self, s, x):
        free = np.asarray(x, dtype=float).reshape(2, self.degree - 1, 2)
        free = free[0] + 1j * free[1]  # (degree - 1, 2)
        c1 = self.first_coefficient(s, free)
        return np.vstack([self.anchor[None, :], c1[None, :], free])

    def encode(self, coeffs):
        free = coeffs[2:]
        return np.concatenate([free.real.ravel(), free.imag.ravel()])

    @property
    def n_free(self):
        return 4 * (self.degree - 1)

    def _penalty(self, coeffs, powers):
        vals = powers @ coeffs
        with np.errstate(all="ignore"):
            slack = self.spec.slack(vals[:, 0], vals[:, 1])
        excess = np.maximum(slack + self.margin, 0.0)
        p = float(np.dot(excess, excess))
        return p if np.isfinite(p) else 1e300

    def penalty(self, s, x):
        if self.used >= self.budget:
            raise _BudgetExhausted
        self.used += 1
        coeffs = self.coefficients(s, x)
        p = self._penalty(coeffs, self._pow)
        if p > 0:
            return p
        p = self._penalty(coeffs, self._pow_cert) + self._penalty(coeffs, self._pow_rings)
        if p == 0:
            raise _Found(np.array(x, dtype=float))
        return p

    def rescale(self, x, s_from, s_to):
        """Free coefficients of ``lam -> f(r lam)``, ``r = s_from / s_to``."""
        r = s_from / s_to
        free = x.reshape(2, self.degree - 1, 2)
        j = np.arange(2, self.degree + 1)[None, :, None]
        return (free * r**j).ravel()

    def solve_at(self, s, starts, budget, rng, fill=True):
        """Search for zero penalty at parameter ``s``; returns free coefficients or None."""
        if self.n_free == 0:
            try:
                self.penalty(s, np.zeros(0))
            except _Found as hit:
                return hit.x
            return None
        stop = min(self.budget, self.used + budget)
        starts = list(starts)
        while fill and len(starts) < N_STARTS:
            scale = 0.3 * rng.random()
            starts.append(scale * rng.standard_normal(self.n_free))
        per_start = max((stop - self.used) // len(starts), 2 * (self.n_free + 1))
        for x0 in starts:
            if self.used >= stop:
                break
            maxfev = min(per_start, stop - self.used)
            step = 0.05 + 0.1 * np.abs(x0)
            simplex = np.vstack([x0, x0 + np.diag(step)])
            try:
                minimize(
                    lambda x: self.penalty(s, x),
                    x0,
                    method="Nelder-Mead",
                    options={
                        "maxfev": maxfev,
                        "initial_simplex": simplex,
                        "xatol": 1e-12,
                        "fatol": 0.0,
                        "adaptive": True,
                    },
                )
            except _Found as hit:
                return hit.x
        return None


class _LempertProblem(_Problem):
    def __init__(self, spec, z, w, degree, budget, margin, n_boundary):
        super().__init__(spec, z, degree, budget, margin, n_boundary)
        self.w = w

    def first_coefficient(self, t, free):
        j = np.arange(2, self.degree + 1)
        rest = (t**j)[:, None] * free if free.size else np.zeros((0, 2))
        return (self.w - self.anchor - rest.sum(axis=0)) / t


class _MetricProblem(_Problem):
    def __init__(self, spec, p, X, degree, budget, margin, n_boundary):
        super().__init__(spec, p, degree, budget, margin, n_boundary)
        self.X = X

    def first_coefficient(self, alpha, free):
        return self.X / alpha


@dataclass
class SearchResult:
    value: float
    lower_bound: float
    parameter: float | None
    witness: AnalyticDisc | None
    degree: int
    budget_used: int
    worst_boundary_slack: float | None
    values_by_degree: dict = field(default_factory=dict)
    message: str = ""

    @property
    def feasible(self) -> bool:
        return self.witness is not None

    @property
    def gap(self) -> float:
        return self.value - self.lower_bound

    @property
    def lower_bound_violated(self) -> bool:
        return self.value < self.lower_bound - LOWER_BOUND_TOL


def _bisect(problem, s_lo, s_hi, x_hi, objective, value_tol, budget, rng, s_max):
    """Shrink ``[s_lo, s_hi]``; ``s_lo`` is presumed infeasible, ``s_hi`` feasible if ``x_hi``."""
    stop = min(problem.budget, problem.used + budget)
    n_free = problem.n_free
    # bracket search when no feasible disc is known yet
    if x_hi is None:
        for frac in (0.01, 0.03, 0.1, 0.3, 0.6, 0.9, 0.99):
            if problem.used >= stop:
                break
            s = s_lo + frac * (s_max - s_lo)
            share = max((stop - problem.used) // 4, 1)
            x = problem.solve_at(s, [np.zeros(n_free)], share, rng)
            if x is not None:
                s_hi, x_hi = s, x
                problem.best = (s_hi, x_hi)
                break
            s_lo = s
        if x_hi is None:
            return s_hi, None
    if n_free == 0:
        # nothing to optimise: plain bisection with one evaluation per step
        while objective(s_hi) - objective(s_lo) > value_tol and problem.used < stop:
            s = 0.5 * (s_lo + s_hi)
            x = problem.solve_at(s, [], 1, rng)
            if x is None:
                s_lo = s
            else:
                s_hi, x_hi = s, x
                problem.best = (s_hi, x_hi)
        return s_hi, x_hi
    # continuation: step below the best feasible parameter, growing the step
    # after a success and halving it after a failure
    cap = ATTEMPT_FACTOR * (n_free + 1)
    step = 0.25 * (s_hi - s_lo)
    while problem.used < stop and objective(s_hi) - objective(s_lo) > value_tol:
        s = max(s_hi - step, s_lo)
        if s <= s_lo:
            s = 0.5 * (s_lo + s_hi)
        warm = [problem.rescale(x_hi, s_hi, s), x_hi.copy()]
        x = problem.solve_at(s, warm, min(cap, stop - problem.used), rng, fill=False)
        if x is None:
            step *= 0.5
            if objective(s_hi) - objective(s_hi - step) <= value_tol:
                break
        else:
            s_hi, x_hi = s, x
            problem.best = (s_hi, x_hi)
            step *= 1.5
    return s_hi, x_hi


def _ladder(make_problem, s_lo, s_max, objective, degree, budget, seed, value_tol, warm=None):
    """Run degrees 1..degree, each warm-started from the previous witness."""
    rng = np.random.default_rng(seed)
    used = 0
    s_best, coeffs_best, deg_best = None, None, None
    first = 1
    values = {}
    if warm is not None and warm.witness is not None:
        if warm.witness.degree > degree:
            raise ConfigError("warm start has a higher degree than requested")
        s_best, coeffs_best, deg_best = warm.parameter, warm.witness.coefficients, warm.witness.degree
        values.update(warm.values_by_degree)
        first = deg_best + 1 if deg_best < degree else degree
    for d in range(first, degree + 1):
        remaining = budget - used
        if remaining <= 0:
            break
        share = min(remaining, 200) if d == 1 else remaining // (degree - d + 1)
        problem = make_problem(d, share)
        x_hi = None
        s_hi = s_max
        if coeffs_best is not None:
            padded = np.vstack([coeffs_best, np.zeros((d + 1 - len(coeffs_best), 2), complex)])
            x_hi = problem.encode(padded)
            s_hi = s_best
            problem.best = (s_hi, x_hi)
        try:
            _bisect(problem, s_lo, s_hi, x_hi, objective, value_tol, share, rng, s_max)
        except _BudgetExhausted:
            pass
        used += problem.used
        if problem.best is not None:
            s_hi, x_hi = problem.best
            coeffs = problem.coefficients(s_hi, x_hi)
            if s_best is None or s_hi <= s_best:
                s_best, coeffs_best, deg_best = s_hi, coeffs, d
        values[d] = objective(s_best) if s_best is not None else math.inf
    return s_best, coeffs_best, deg_best, used, values


def lempert_upper(
    spec: DomainSpec,
    z,
    w,
    degree: int = 4,
    budget: int = 20000,
    seed: int = 0,
    margin: float = MARGIN,
    n_boundary: int = N_BOUNDARY,
    value_tol: float = 1e-9,
    warm_start: SearchResult | None = None,
) -> SearchResult:
    """Best ``artanh(t)`` over feasible polynomial discs with ``f(0) = z``, ``f(t) = w``.

    Returns ``value = inf`` (and no witness) when no feasible disc is found
    within the evaluation budget.
    """
    z, w = as_point(z), as_point(w)
    c = caratheodory_distance(spec, z, w)
    if np.allclose(z, w, rtol=0, atol=0):
        raise ConfigError("the Lempert function needs two distinct points")
    if degree < 1:
        raise ConfigError("degree must be at least 1")

    if warm_start is not None and warm_start.witness is not None:
        f = warm_start.witness
        if not (np.allclose(f.anchor, z) and np.allclose(f(warm_start.parameter), w)):
            raise ConfigError("warm start disc does not pass through z and w")

    def make(d, share):
        return _LempertProblem(spec, z, w, d, share, margin, n_boundary)

    t_lo = math.tanh(c)
    t_max = 1.0 - 1e-12
    s, coeffs, deg, used, values = _ladder(
        make, t_lo, t_max, math.atanh, degree, budget, seed, value_tol, warm_start
    )
    return _finish(spec, c, s, coeffs, deg, used, values, math.atanh, n_boundary, margin)


def kobayashi_metric_upper(
    spec: DomainSpec,
    p,
    X,
    degree: int = 4,
    budget: int = 20000,
    seed: int = 0,
    margin: float = MARGIN,
    n_boundary: int = N_BOUNDARY,
    value_tol: float = 1e-9,
    warm_start: SearchResult | None = None,
) -> SearchResult:
    """Best ``alpha`` over feasible polynomial discs with ``f(0) = p``, ``f'(0) = X / alpha``."""
    p, X = as_point(p), as_point(X)
    gamma = caratheodory_metric(spec, p, X)
    if not np.any(X):
        raise ConfigError("the tangent vector must be nonzero")
    if degree < 1:
        raise ConfigError("degree must be at least 1")

    if warm_start is not None and warm_start.witness is not None:
        f = warm_start.witness
        c1 = f.coefficients[1] if f.degree >= 1 else np.zeros(2)
        if not (np.allclose(f.anchor, p) and np.allclose(c1 * warm_start.parameter, X)):
            raise ConfigError("warm start disc does not match (p, X)")

    def make(d, share):
        return _MetricProblem(spec, p, X, d, share, margin, n_boundary)

    a_max = _linear_disc_alpha(spec, p, X, gamma, margin, n_boundary)
    s, coeffs, deg, used, values = _ladder(
        make, gamma, a_max, lambda a: a, degree, budget, seed, value_tol, warm_start
    )
    return _finish(spec, gamma, s, coeffs, deg, used, values, lambda a: a, n_boundary, margin)


def _linear_disc_alpha(spec, p, X, gamma, margin, n_boundary):
    """Some ``alpha`` for which the straight disc ``p + lam X / alpha`` fits."""
    alpha = 2 * gamma
    for _ in range(60):
        disc = AnalyticDisc(np.vstack([p, X / alpha]))
        if disc_feasible(disc, spec, n_boundary, margin).ok:
            return alpha
        alpha *= 2
    raise DomainError(f"no straight disc through {p.tolist()} fits; is p interior?")


def _finish(spec, lower, s, coeffs, deg, used, values, objective, n_boundary, margin):
    if s is None:
        return SearchResult(
            math.inf, lower, None, None, 0, used, None, values,
            "no feasible disc found within the evaluation budget",
        )
    disc = AnalyticDisc(coeffs)
    cert = disc_feasible(disc, spec, 4 * n_boundary, margin, rings=CERT_RINGS)
    result = SearchResult(objective(s), lower, s, disc, deg, used, cert.worst_slack, values)
    if not cert.ok:
        result.message = "witness failed certification"
    if result.lower_bound_violated:
        result.message = "upper bound below the Caratheodory lower bound"
    return result


@dataclass
class GapReport:
    c: float
    l_upper: float
    result: SearchResult
    degree: int
    budget: int

    @property
    def gap(self) -> float:
        return self.l_upper - self.c

    def to_record(self) -> dict:
        r = self.result
        return {
            "c": self.c,
            "l_upper": None if math.isinf(self.l_upper) else self.l_upper,
            "gap": None if math.isinf(self.l_upper) else self.gap,
            "feasible": r.feasible,
            "degree": self.degree,
            "witness_degree": r.degree,
            "budget": self.budget,
            "budget_used": r.budget_used,
            "t": r.parameter,
            "witness_coefficients": r.witness.to_record() if r.witness is not None else None,
            "worst_boundary_slack": r.worst_boundary_slack,
            "values_by_degree": {str(k): (None if math.isinf(v) else v) for k, v in r.values_by_degree.items()},
            "message": r.message,
        }


def lempert_gap(spec, z, w, degree: int = 4, budget: int = 20000, seed: int = 0, **kw) -> GapReport:
    res = lempert_upper(spec, z, w, degree, budget, seed, **kw)
    return GapReport(res.lower_bound, res.value, res, degree, budget)
