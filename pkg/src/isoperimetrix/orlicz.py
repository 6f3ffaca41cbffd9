"""Orlicz functions, Luxemburg norms, weak norms, adjoints and conjugates.

An :class:`OrliczFunction` is an increasing bijection N of [0, ∞) with
N(0) = 0.  Its adjoint is N^∧(t) = 1/N⁻¹(1/t); the indicator of a set of
mass a has Luxemburg norm N^∧(a).  Monotonicity hypotheses are never
assumed: :func:`check_predicates` tests them on a grid and reports a
witness when they fail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import optimize

from .errors import NotFinite, NotYoung, PredicateFails, SpecError, BadGrid
from .measures import Measure1D, read_grid_csv
from .numerics import GridFunction, gauss_legendre, invert_increasing, log_grid

PREDICATE_TOL = 1e-9
PREDICATE_GRID = (1e-8, 1e8)
PREDICATE_PER_DECADE = 64


def _arr(t) -> np.ndarray:
    return np.asarray(t, dtype=float)


@dataclass(frozen=True, eq=False)
class OrliczFunction:
    """N with its inverse; ``samples`` holds exact (t, N(t)) pairs when known."""

    tag: str
    func: Callable[[np.ndarray], np.ndarray]
    inv: Callable[[np.ndarray], np.ndarray]
    samples: tuple[np.ndarray, np.ndarray] | None = None
    report: object | None = field(default=None, repr=False)

    def __call__(self, t):
        return self.func(_arr(t))

    def inverse(self, y):
        return self.inv(_arr(y))

    def wedge(self, t):
        """N^∧(t) = 1/N⁻¹(1/t)."""
        t = _arr(t)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            out = 1.0 / self.inv(1.0 / t)
        return np.where(t <= 0, 0.0, np.where(np.isinf(t), np.inf, out))

    def wedge_inverse(self, y):
        """(N^∧)⁻¹(y) = 1/N(1/y)."""
        y = _arr(y)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            out = 1.0 / self.func(1.0 / y)
        return np.where(y <= 0, 0.0, np.where(np.isinf(y), np.inf, out))

    def __repr__(self) -> str:
        return f"OrliczFunction({self.tag})"


def power(p: float) -> OrliczFunction:
    if not p > 0:
        raise SpecError("power:p needs p > 0")
    return OrliczFunction(f"power:{p:g}", lambda t: _arr(t) ** p, lambda y: _arr(y) ** (1.0 / p))


def _ulog1pu(u):
    return u * np.log1p(u)


def phi(q: float) -> OrliczFunction:
    """φ_q(t) = t^q·log(1 + t^q)."""
    if not q > 0:
        raise SpecError("phi:q needs q > 0")

    def func(t):
        u = _arr(t) ** q
        return u * np.log1p(u)

    def inv(y):
        return invert_increasing(_ulog1pu, _arr(y)) ** (1.0 / q)

    return OrliczFunction(f"phi:{q:g}", func, inv)


def from_wedge(
    wedge: Callable[[np.ndarray], np.ndarray],
    wedge_inv: Callable[[np.ndarray], np.ndarray],
    tag: str,
    wedge_samples: tuple[np.ndarray, np.ndarray] | None = None,
) -> OrliczFunction:
    """The Orlicz function whose adjoint is ``wedge``."""

    def func(y):
        y = _arr(y)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            out = 1.0 / wedge_inv(1.0 / y)
        return np.where(y <= 0, 0.0, out)

    def inv(z):
        z = _arr(z)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            out = 1.0 / wedge(1.0 / z)
        return np.where(z <= 0, 0.0, out)

    samples = None
    if wedge_samples is not None:
        s, w = (np.asarray(a, dtype=float) for a in wedge_samples)
        ok = (s > 0) & (w > 0) & np.isfinite(s) & np.isfinite(w)
        x, y = 1.0 / w[ok], 1.0 / s[ok]
        order = np.argsort(x)
        samples = (x[order], y[order])
    return OrliczFunction(tag, func, inv, samples)


def adjoint(N: OrliczFunction) -> OrliczFunction:
    samples = None
    if N.samples is not None:
        t, v = N.samples
        ok = (t > 0) & (v > 0)
        x, y = 1.0 / v[ok], 1.0 / t[ok]
        order = np.argsort(x)
        samples = (x[order], y[order])
    return OrliczFunction(f"adjoint({N.tag})", N.wedge, N.wedge_inverse, samples)


def grid_orlicz(t, values, tag: str = "grid") -> OrliczFunction:
    """Piecewise-linear N through the given knots, linear beyond the last one."""
    t = np.asarray(t, dtype=float)
    v = np.asarray(values, dtype=float)
    if t[0] > 0:
        t, v = np.concatenate(([0.0], t)), np.concatenate(([0.0], v))
    if t[0] != 0 or v[0] != 0:
        raise BadGrid("an Orlicz grid must start at (0, 0)")
    if not (np.all(np.diff(t) > 0) and np.all(np.diff(v) > 0)):
        raise BadGrid("Orlicz grid must be strictly increasing in both columns")
    slope = (v[-1] - v[-2]) / (t[-1] - t[-2])

    def func(s):
        s = _arr(s)
        return np.where(s > t[-1], v[-1] + slope * (s - t[-1]), np.interp(s, t, v))

    def inv(y):
        y = _arr(y)
        return np.where(y > v[-1], t[-1] + (y - v[-1]) / slope, np.interp(y, v, t))

    return OrliczFunction(tag, func, inv, (t[1:], v[1:]))


def parse_orlicz(text: str) -> OrliczFunction:
    """Parse ``power:p | phi:q | grid:file``."""
    kind, _, rest = text.strip().partition(":")
    if kind == "grid":
        t, v = read_grid_csv(rest, header=("t", "N"))
        return grid_orlicz(t, v, tag=f"grid:{rest}")
    try:
        val = float(rest)
    except ValueError as exc:
        raise SpecError(f"bad Orlicz spec {text!r}") from exc
    if kind == "power":
        return power(val)
    if kind == "phi":
        return phi(val)
    raise SpecError(f"unknown Orlicz kind {kind!r}")


# --- predicates ---------------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    status: str  # holds | fails | unchecked
    witness: float | None = None

    def __str__(self) -> str:
        if self.status == "fails":
            return f"fails_at({self.witness:.6g})"
        return self.status

    @property
    def holds(self) -> bool:
        return self.status == "holds"


UNCHECKED = Verdict("unchecked")


@dataclass(frozen=True, eq=False)
class PredicateReport:
    is_young: Verdict
    ratio_nondecreasing: Verdict
    power_nonincreasing: Verdict
    checked_grid: np.ndarray = field(repr=False)
    q: float | None = None
    alpha: float | None = None

    def as_dict(self) -> dict:
        return {
            "is_young": str(self.is_young),
            "ratio_nondecreasing": str(self.ratio_nondecreasing),
            "power_nonincreasing": str(self.power_nonincreasing),
            "q": self.q,
            "alpha": self.alpha,
            "grid": [float(self.checked_grid[0]), float(self.checked_grid[-1]), int(self.checked_grid.size)],
        }


def _first_failure(bad: np.ndarray, where: np.ndarray) -> Verdict:
    if np.any(bad):
        return Verdict("fails", float(where[int(np.argmax(bad))]))
    return Verdict("holds")


def young_verdict(t: np.ndarray, v: np.ndarray, tol: float = PREDICATE_TOL) -> Verdict:
    if np.any(~np.isfinite(v)) or np.any(np.diff(v) <= 0):
        bad = np.concatenate(([False], ~(np.diff(v) > 0)))
        return _first_failure(bad | ~np.isfinite(v), t)
    slopes = np.concatenate(([v[0] / t[0]], np.diff(v) / np.diff(t)))
    bad = slopes[1:] < slopes[:-1] * (1 - tol)
    return _first_failure(np.concatenate(([False], bad)), t)


def nondecreasing_verdict(t: np.ndarray, r: np.ndarray, tol: float = PREDICATE_TOL) -> Verdict:
    bad = r[1:] < r[:-1] * (1 - tol)
    return _first_failure(np.concatenate(([False], bad)), t)


def nonincreasing_verdict(t: np.ndarray, r: np.ndarray, tol: float = PREDICATE_TOL) -> Verdict:
    bad = r[1:] > r[:-1] * (1 + tol)
    return _first_failure(np.concatenate(([False], bad)), t)


def _predicate_samples(N: OrliczFunction, grid) -> tuple[np.ndarray, np.ndarray]:
    if grid is not None:
        t = np.asarray(grid, dtype=float)
        return t, np.asarray(N(t), dtype=float)
    if N.samples is not None:
        t, v = N.samples
        keep = (t >= PREDICATE_GRID[0]) & (t <= PREDICATE_GRID[1])
        if np.count_nonzero(keep) >= 16:
            return t[keep], v[keep]
    t = log_grid(*PREDICATE_GRID, PREDICATE_PER_DECADE)
    return t, np.asarray(N(t), dtype=float)


def check_predicates(
    N: OrliczFunction,
    q: float | None = None,
    alpha: float | None = None,
    grid=None,
    tol: float = PREDICATE_TOL,
) -> PredicateReport:
    """Grid test of convexity, of N^{1/q}/t nondecreasing and of N(t^α)/t nonincreasing."""
    t, v = _predicate_samples(N, grid)
    young = young_verdict(t, v, tol)
    ratio = UNCHECKED
    if q is not None:
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = nondecreasing_verdict(t, v ** (1.0 / q) / t, tol)
    pw = UNCHECKED
    if alpha is not None:
        tg = log_grid(*PREDICATE_GRID, PREDICATE_PER_DECADE)
        pw = nonincreasing_verdict(tg, np.asarray(N(tg ** alpha)) / tg, tol)
    return PredicateReport(young, ratio, pw, t, q, alpha)


def truncate_at_zero(N: OrliczFunction, q: float) -> OrliczFunction:
    """Replace N below N⁻¹(2) by the power 2(t/N⁻¹(2))^q, keeping N^∧ on [0, 1/2]."""
    if q < 1:
        raise PredicateFails("truncation exponent must be >= 1")
    rep = check_predicates(N, q=q)
    if not rep.ratio_nondecreasing.holds:
        raise PredicateFails(f"N^(1/q)/t is not nondecreasing: {rep.ratio_nondecreasing}")
    c = float(N.inverse(2.0))

    def func(t):
        t = _arr(t)
        return np.where(t <= c, 2.0 * (t / c) ** q, N(np.maximum(t, c)))

    def inv(y):
        y = _arr(y)
        return np.where(y <= 2.0, c * (np.maximum(y, 0) / 2.0) ** (1.0 / q), N.inverse(np.maximum(y, 2.0)))

    return OrliczFunction(f"truncated({N.tag},{q:g})", func, inv)


# --- Luxemburg norms on measures -------------------------------------------------


def luxemburg_norm(values, weights, N: OrliczFunction) -> float:
    """inf{v > 0 : Σ w·N(|f|/v) ≤ 1} for a discrete distribution."""
    a = np.abs(np.asarray(values, dtype=float))
    w = np.asarray(weights, dtype=float)
    keep = (w > 0) & (a > 0)
    a, w = a[keep], w[keep]
    if a.size == 0:
        return 0.0
    if not np.all(np.isfinite(a)):
        raise NotFinite("function takes infinite values on a set of positive mass")

    def excess(logv: float) -> float:
        with np.errstate(over="ignore", divide="ignore"):
            return float(np.dot(w, N(a / math.exp(logv)))) - 1.0

    n1 = float(N.inverse(1.0))
    hi = math.log(a.max() / n1)
    steps = 0
    while excess(hi) > 0:
        hi += math.log(2.0)
        steps += 1
        if steps > 2000:
            raise NotFinite("no admissible v below the overflow guard")
    lo = hi
    while excess(lo) <= 0:
        lo -= math.log(2.0)
        if lo < hi - 2000:
            return 0.0
    root = optimize.brentq(excess, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500)
    return math.exp(root)


def simple_function_norm(values, masses, N: OrliczFunction) -> float:
    return luxemburg_norm(values, masses, N)


def simple_function_weak_norm(values, masses, N: OrliczFunction) -> float:
    a = np.abs(np.asarray(values, dtype=float))
    w = np.asarray(masses, dtype=float)
    best = 0.0
    for level in np.unique(a[a > 0]):
        best = max(best, float(N.wedge(w[a >= level].sum())) * level)
    return best


def quantile_rule(m: Measure1D, u_breaks=(), order: int = 12, panels: int = 64):
    """Composite Gauss–Legendre rule in the quantile variable u ∈ (0, 1).

    Panels are uniform in the bulk and geometric toward both ends so that
    functions growing like a power of |x| in the tails are integrated
    accurately.  Returns abscissas x = Q(u) and weights summing to ≈ 1.
    """
    tails = np.geomspace(1e-16, 0.05, 60)
    nodes = np.concatenate((tails, np.linspace(0.05, 0.95, panels + 1), 1.0 - tails[::-1][:-8]))
    extra = [u for u in u_breaks if 1e-16 < u < 1 - 1e-14]
    nodes = np.unique(np.concatenate((nodes, extra)))
    x, w = gauss_legendre(order)
    a, b = nodes[:-1], nodes[1:]
    half = 0.5 * (b - a)
    u = (0.5 * (a + b))[:, None] + half[:, None] * x[None, :]
    wts = half[:, None] * w[None, :]
    u, wts = u.reshape(-1), wts.reshape(-1)
    return m.quantile(u), wts


def _breaks_for(f: GridFunction, m: Measure1D) -> list[float]:
    xl, xr, anchor, fa, slope = f.segments()
    pts = list(f.knots)
    with np.errstate(divide="ignore", invalid="ignore"):
        cross = anchor - fa / slope
    ok = (slope != 0) & (cross > xl) & (cross < xr)
    pts.extend(cross[ok])
    return [float(m.cdf(np.array(p))) for p in pts]


def expectation(f: GridFunction, m: Measure1D) -> float:
    xs, w = quantile_rule(m, _breaks_for(f, m))
    return float(np.dot(w, f(xs)) / w.sum())


def orlicz_norm(f: GridFunction, m: Measure1D, N: OrliczFunction) -> float:
    """Luxemburg norm of f in L_N(μ)."""
    xs, w = quantile_rule(m, _breaks_for(f, m))
    return luxemburg_norm(f(xs), w, N)


def _sublevel_masses(f: GridFunction, m: Measure1D, c) -> np.ndarray:
    """μ{f ≤ c} for an array of levels c, exact for piecewise-linear f."""
    c = np.atleast_1d(np.asarray(c, dtype=float))[None, :]
    xl, xr, anchor, fa, slope = (a[:, None] for a in f.segments())
    with np.errstate(divide="ignore", invalid="ignore"):
        cut = anchor + (c - fa) / slope
    inc = slope > 0
    dec = slope < 0
    flat = slope == 0
    left = np.where(dec, np.maximum(xl, cut), xl)
    right = np.where(inc, np.minimum(xr, cut), xr)
    valid = np.where(flat, fa <= c, right > left)
    left = np.where(valid, left, 0.0)
    right = np.where(valid, right, 0.0)
    masses = np.asarray(m.cdf(right), dtype=float) - np.asarray(m.cdf(left), dtype=float)
    return np.clip(np.sum(np.where(valid, masses, 0.0), axis=0), 0.0, 1.0)


def _sublevel_mass(f: GridFunction, m: Measure1D, c: float) -> float:
    """μ{f ≤ c}, exact for piecewise-linear f."""
    return float(_sublevel_masses(f, m, c)[0])


def level_masses(f: GridFunction, m: Measure1D, s) -> np.ndarray:
    """μ{|f| ≥ s} for an array of levels s > 0."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    neg = GridFunction(f.knots, -f.values, f.extrapolation)
    upper = _sublevel_masses(neg, m, -s)  # f ≥ s
    lower = _sublevel_masses(f, m, -s)  # f ≤ −s
    return np.minimum(upper + lower, 1.0)


def level_mass(f: GridFunction, m: Measure1D, s: float) -> float:
    """μ{|f| ≥ s} for s > 0."""
    return float(level_masses(f, m, s)[0])


def median_of(f: GridFunction, m: Measure1D) -> float:
    """A median of f under μ: μ{f ≤ c} ≥ 1/2 and μ{f ≥ c} ≥ 1/2."""
    lo, hi = float(f.values.min()), float(f.values.max())
    if f.extrapolation == "linear-tail":
        span = max(hi - lo, 1.0)
        while _sublevel_mass(f, m, lo) > 0.5:
            lo -= span
            span *= 2
        span = max(hi - lo, 1.0)
        while _sublevel_mass(f, m, hi) < 0.5:
            hi += span
            span *= 2
    if lo == hi:
        return lo
    g = lambda c: _sublevel_mass(f, m, c) - 0.5
    if g(lo) >= 0:
        return lo
    return float(optimize.brentq(g, lo, hi, xtol=1e-14, rtol=1e-15))


def weak_orlicz_norm(f: GridFunction, m: Measure1D, N: OrliczFunction) -> float:
    """sup_{s>0} N^∧(μ{|f| ≥ s})·s over a level grid, refined near the best level."""
    top = f.sup_abs()
    if top == 0:
        return 0.0
    if math.isinf(top):
        top = max(float(np.max(np.abs(f.values))), 1.0)
        while level_mass(f, m, top) > 1e-18:
            top *= 2
    levels = np.unique(np.concatenate((log_grid(top * 1e-12, top, 64), np.abs(f.values[f.values != 0]))))
    vals = np.asarray(N.wedge(level_masses(f, m, levels)), dtype=float) * levels
    i = int(np.argmax(vals))
    best = float(vals[i])
    lo, hi = levels[max(i - 1, 0)], levels[min(i + 1, levels.size - 1)]
    if hi > lo:
        res = optimize.minimize_scalar(
            lambda s: -float(N.wedge(level_mass(f, m, s))) * s, bounds=(lo, hi), method="bounded",
            options={"xatol": 1e-13 * hi},
        )
        best = max(best, -float(res.fun))
    return best


# --- duality and conjugates -------------------------------------------------------


def dual_norm_indicator(m: Measure1D | None, A_mass: float, N: OrliczFunction) -> float:
    """‖χ_A‖ in the dual norm: μ(A)·N⁻¹(1/μ(A)).  Needs N Young."""
    if not 0 < A_mass <= 1:
        raise ValueError("A_mass must lie in (0, 1]")
    rep = check_predicates(N)
    if not rep.is_young.holds:
        raise NotYoung(f"N is not convex: {rep.is_young}")
    return A_mass * float(N.inverse(1.0 / A_mass))


@dataclass(frozen=True)
class DualityCheck:
    lower: float
    formula: float
    upper: float

    @property
    def relative_gap(self) -> float:
        return (self.upper - self.lower) / self.formula


def mazya_duality_check(m: Measure1D, a: float, N: OrliczFunction, cells: int = 48, seed: int = 0) -> DualityCheck:
    """Sandwich the indicator dual norm between a discretized maximization and Jensen's bound.

    The space is cut into ``cells`` quantile cells, A being the first
    ⌈a·cells⌉-weighted ones, and  ∫χ_A g dμ  is maximized over cellwise
    constant g ≥ 0 with ∫N(g)dμ ≤ 1.  After rescaling the maximizer to unit
    Luxemburg norm the value is a certified lower bound.  Jensen applied to
    the same normalized g gives  a·N⁻¹(∫N(g)dμ / a), an upper bound.
    """
    k_in = max(1, int(round(cells * a)))
    u_edges = np.concatenate((np.linspace(0.0, a, k_in + 1), np.linspace(a, 1.0, cells - k_in + 1)[1:]))
    cdf_edges = m.cdf(m.quantile(u_edges[1:-1]))
    w = np.diff(np.concatenate(([0.0], cdf_edges, [1.0])))
    in_a = np.arange(cells) < k_in
    a = float(w[in_a].sum())
    formula = dual_norm_indicator(m, a, N)
    rng = np.random.default_rng(seed)
    g0 = rng.uniform(0.2, 1.0, cells)
    g0 /= luxemburg_norm(g0, w, N)

    cons = {"type": "ineq", "fun": lambda g: 1.0 - float(np.dot(w, N(np.abs(g))))}
    res = optimize.minimize(
        lambda g: -float(np.dot(w[in_a], g[in_a])),
        g0,
        method="SLSQP",
        bounds=[(0.0, None)] * cells,
        constraints=[cons],
        options={"ftol": 1e-15, "maxiter": 500},
    )
    g = np.abs(res.x)
    norm = luxemburg_norm(g, w, N)
    g = g / norm
    lower = float(np.dot(w[in_a], g[in_a]))
    n_mass = float(np.dot(w, N(g)))
    upper = a * float(N.inverse(n_mass / a))
    return DualityCheck(lower, formula, upper)


def legendre(N: OrliczFunction, s: float) -> float:
    """N*(s) = sup_{t>0}(st − N(t)); returns math.inf when the supremum diverges."""
    if s < 0:
        raise ValueError("legendre needs s >= 0")
    if s == 0:
        return 0.0
    t = log_grid(1e-12, 1e12, 64)
    h = s * t - np.asarray(N(t), dtype=float)
    top = 1e12
    while int(np.argmax(h)) == h.size - 1:
        if top >= 1e300:
            return math.inf
        t = np.geomspace(top, top * 1e6, 64)
        top *= 1e6
        h = s * t - np.asarray(N(t), dtype=float)
        if not np.all(np.isfinite(h)):
            return math.inf
    i = int(np.argmax(h))
    best = max(0.0, float(h[i]))
    lo, hi = math.log(t[max(i - 1, 0)]), math.log(t[min(i + 1, t.size - 1)])
    res = optimize.minimize_scalar(
        lambda lt: -(s * math.exp(lt) - float(N(math.exp(lt)))), bounds=(lo, hi), method="bounded",
        options={"xatol": 1e-14},
    )
    return max(best, -float(res.fun))
