"""q-capacities of one-dimensional measures.

Cap_q(a, b) is the least L_q(μ) norm of |Φ′| over Φ: ℝ → [0, 1] with
μ{Φ = 1} ≥ a and μ{Φ = 0} ≥ 1 − b.  On the line, with h(u) = ρ(Q(u)) and
p = q/(q − 1), a monotone transition across the quantile range (u₀, u₁)
costs at least (∫_{u₀}^{u₁} h^{−p} du)^{−1/p}, with equality for the
Euler–Lagrange profile.  The functions below evaluate that formula for
half-line and two-tail configurations, lift capacity bounds from q₀ to q,
and cross-check everything against a discretized minimization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DegenerateExponents, DivergentIntegral, NotMonotone, PredicateFails, QOutOfRange
from .measures import Measure1D
from .numerics import CumulativeIntegral, QuadratureConfig, inf_scan, integrate, log_grid
from .orlicz import OrliczFunction, check_predicates, truncate_at_zero
from .profiles import Profile, profile_of


def conjugate(q: float) -> float:
    """q* = q/(q − 1), with 1* = ∞."""
    if q < 1:
        raise QOutOfRange("exponent must be >= 1")
    return math.inf if q == 1 else q / (q - 1.0)


@dataclass(frozen=True, eq=False)
class CapacityBound:
    """A function L on (0, 1/2] with L(t) ≤ Cap_q(t, 1/2)."""

    q: float
    L: Callable[[np.ndarray], np.ndarray]
    kind: str = "lower-bound"  # exact-config | lower-bound | oracle
    name: str = ""
    diagnostics: dict = field(default_factory=dict)

    def __call__(self, t):
        return np.asarray(self.L(np.asarray(t, dtype=float)), dtype=float)

    def table(self, n: int = 256, lo: float = 1e-6) -> tuple[np.ndarray, np.ndarray]:
        t = np.geomspace(lo, 0.5, n)
        return t, self(t)


# --- closed-form capacities ------------------------------------------------------


def _energy_integral(m: Measure1D, u0: float, u1: float, p: float, cfg: QuadratureConfig | None = None) -> float:
    """∫_{u0}^{u1} h(u)^{−p} du with h = ρ∘Q."""

    def g(u: float) -> float:
        h = float(m.rho_at_quantile(np.array(u)))
        return math.inf if h <= 0 else h ** (-p)

    # dyadic pieces toward both ends keep QUADPACK away from false divergence
    # verdicts when h^{−p} spans many decades
    near0 = u0 * 2.0 ** np.arange(1, 64)
    near1 = 1.0 - (1.0 - u1) * 2.0 ** np.arange(1, 64)
    cuts = np.concatenate((near0, [0.25, 0.5, 0.75], near1))
    edges = np.unique(np.concatenate(([u0, u1], cuts[(cuts > u0) & (cuts < u1)])))
    return sum(integrate(g, lo, hi, cfg) for lo, hi in zip(edges[:-1], edges[1:]))


def interval_capacity(m: Measure1D, a: float, b: float, q: float, cfg: QuadratureConfig | None = None,
                      with_flag: bool = False):
    """Minimal ‖Φ′‖_{L_q(μ)} over Φ with Φ(a) = 1 and Φ(b) = 0.

    Equals (∫_a^b ρ^{−1/(q−1)} dx)^{−(q−1)/q}.  A divergent integral means
    capacity 0; with ``with_flag`` the pair (value, "divergent"|"ok") is returned.
    """
    if not q > 1:
        raise QOutOfRange("interval_capacity needs q > 1")
    if not a < b:
        raise ValueError("interval_capacity needs a < b")
    p = conjugate(q)
    u0, u1 = (float(v) for v in m.cdf(np.array([a, b])))
    flag = "ok"
    try:
        energy = _energy_integral(m, u0, u1, p, cfg)
        value = energy ** (-1.0 / p) if energy > 0 else math.inf
    except DivergentIntegral:
        value, flag = 0.0, "divergent"
    return (value, flag) if with_flag else value


def _config_capacities(m: Measure1D, q: float, t: float, cfg=None) -> dict[str, float]:
    p = conjugate(q)

    def side(u0, u1):
        try:
            return _energy_integral(m, u0, u1, p, cfg)
        except DivergentIntegral:
            return math.inf

    e_left = side(t, 0.5)
    e_right = side(0.5, 1.0 - t)
    two_l, two_r = side(t / 2, 0.25), side(0.75, 1.0 - t / 2)
    out = {
        "left": e_left ** (-1.0 / p),
        "right": e_right ** (-1.0 / p),
        # both transitions are paid: energies add before the 1/q power
        "two-tail": (two_l ** (-(q - 1.0)) + two_r ** (-(q - 1.0))) ** (1.0 / q),
    }
    return out


def capq(m: Measure1D, q: float, t: float, profile: Profile | None = None, cfg=None) -> float:
    """Cap_q(t, 1/2), realized by the cheapest of the half-line and two-tail configurations.

    For q = 1 this is the closed-interval infimum of Ĩ over [t, 1/2].
    """
    if not 0 < t <= 0.5:
        raise ValueError("t must lie in (0, 1/2]")
    if q < 1:
        raise QOutOfRange("q must be >= 1")
    if q == 1:
        p = profile or profile_of(m)
        if t == 0.5:
            return float(p.tilde(np.array(0.5)))
        _, v = inf_scan(lambda s: p.tilde(s), (t, 0.5), 256, vectorized=True)
        return float(min(v, p.tilde(np.array(t)), p.tilde(np.array(0.5))))
    if t == 0.5:
        return math.inf
    return float(min(_config_capacities(m, q, t, cfg).values()))


class _EnergyTables:
    """Tail tables  s ↦ ∫_s^{1/2} h^{−p}  for both sides of the median."""

    def __init__(self, m: Measure1D, p: float, lo: float = 1e-14):
        nodes = np.unique(np.concatenate((log_grid(lo, 0.25, 16), 0.5 - np.geomspace(1e-13, 0.25, 80))))

        def left(u):
            with np.errstate(divide="ignore"):
                return m.rho_at_quantile(u) ** (-p)

        def right(v):
            with np.errstate(divide="ignore"):
                return m.rho_at_quantile(1.0 - v) ** (-p)

        self.left = CumulativeIntegral(left, nodes, order=16)
        self.right = self.left if m.is_even else CumulativeIntegral(right, nodes, order=16)


def capq_curve(m: Measure1D, q: float, t, tables: _EnergyTables | None = None) -> np.ndarray:
    """Vectorized Cap_q(t, 1/2) for q > 1 from tabulated energies."""
    if not q > 1:
        raise QOutOfRange("capq_curve needs q > 1")
    p = conjugate(q)
    tab = tables or _EnergyTables(m, p)
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        left = tab.left(t) ** (-1.0 / p)
        right = tab.right(t) ** (-1.0 / p)
        quarter_l = tab.left(np.array(0.25))
        quarter_r = tab.right(np.array(0.25))
        two = ((tab.left(t / 2) - quarter_l) ** (-(q - 1)) + (tab.right(t / 2) - quarter_r) ** (-(q - 1))) ** (1.0 / q)
    out = np.minimum(np.minimum(left, right), np.where(t < 0.5, two, np.inf))
    return np.where(np.isnan(out), 0.0, out)


def capacity_bound_of(m: Measure1D, q: float) -> CapacityBound:
    if q == 1:
        prof = profile_of(m)
        fn = np.vectorize(lambda s: capq(m, 1.0, float(s), prof), otypes=[float])
        return CapacityBound(1.0, fn, "exact-config", m.name)
    tab = _EnergyTables(m, conjugate(q))
    return CapacityBound(q, lambda s: capq_curve(m, q, s, tab), "exact-config", m.name)


# --- Cap₁ and profiles ----------------------------------------------------------


def cap1_profile_bridge(J, grid=None) -> CapacityBound:
    """A nondecreasing lower bound J ≤ Ĩ on [0, 1/2] is also a lower bound for Cap₁(·, 1/2).

    The same object read backwards certifies Ĩ ≥ L from a Cap₁ bound L,
    see :func:`profile_bound_from_cap1`.
    """
    t = log_grid(1e-8, 0.5, 64) if grid is None else np.asarray(grid, dtype=float)
    v = np.asarray(J(t), dtype=float)
    bad = v[1:] < v[:-1] * (1 - 1e-9) - 1e-300
    if np.any(bad):
        raise NotMonotone(f"J decreases near t = {t[1 + int(np.argmax(bad))]:.6g}")
    name = getattr(J, "name", "J")
    return CapacityBound(1.0, lambda s: np.asarray(J(s), dtype=float), "lower-bound", name)


def profile_bound_from_cap1(bound: CapacityBound) -> Callable[[np.ndarray], np.ndarray]:
    if bound.q != 1:
        raise QOutOfRange("only Cap₁ bounds translate into profile bounds")
    return bound.L


# --- lifting between exponents ------------------------------------------------------


def gamma_constant(p: float, p0: float) -> float:
    """γ_{p,p₀} = (p₀/p − 1)^{1/p₀} / (1 − p/p₀)^{1/p}; equal to 1 when p₀ = ∞."""
    if math.isinf(p0):
        return 1.0
    if p >= p0:
        raise DegenerateExponents("γ needs p < p₀")
    return (p0 / p - 1.0) ** (1.0 / p0) / (1.0 - p / p0) ** (1.0 / p)


def lift(bound: CapacityBound, q: float, cfg: QuadratureConfig | None = None) -> CapacityBound:
    """Pass a Cap_{q₀}(·, 1/2) lower bound to a Cap_q(·, 1/2) lower bound, q ≥ q₀.

    L_q(a) = γ⁻¹·(∫_a^{1/2} (s − a)^{−p/p₀} L_{q₀}(s)^{−p} ds)^{−1/p}.
    """
    q0 = bound.q
    if q < q0:
        raise QOutOfRange("lift needs q >= q0")
    if q == q0:
        return bound
    p, p0 = conjugate(q), conjugate(q0)
    gamma = gamma_constant(p, p0)
    L = bound.L
    diag = {"gamma": gamma, "from_q": q0}

    if math.isinf(p0):
        nodes = np.unique(np.concatenate((log_grid(1e-14, 0.25, 16), 0.5 - np.geomspace(1e-13, 0.25, 80))))

        def integrand(s):
            with np.errstate(divide="ignore"):
                return np.asarray(L(s), dtype=float) ** (-p)

        table = CumulativeIntegral(integrand, nodes, order=16)

        def Lq(a):
            a = np.asarray(a, dtype=float)
            with np.errstate(divide="ignore", over="ignore"):
                val = table(np.clip(a, nodes[0], 0.5)) ** (-1.0 / p) / gamma
            return np.where(np.isfinite(val) | (a >= 0.5), val, 0.0)

        return CapacityBound(q, Lq, "lower-bound", f"lift({bound.name},{q:g})", diag)

    def one(a: float) -> float:
        if a >= 0.5:
            return math.inf
        try:
            val = integrate(lambda s: float(L(np.array(s))) ** (-p), a, 0.5, cfg, alg_weight=(-p / p0, 0.0))
        except DivergentIntegral:
            return 0.0
        return val ** (-1.0 / p) / gamma

    return CapacityBound(q, np.vectorize(one, otypes=[float]), "lower-bound", f"lift({bound.name},{q:g})", diag)


# --- smoothing the (s − t) singularity --------------------------------------------------


def delta_constant(p: float, p0: float, alpha: float) -> float:
    """Explicit δ with lhs ≤ δ·rhs: δ^p = max(2^{p/p₀}, 2^{p/α}/(2^{1−p/p₀} − 1)).

    For p₀ = ∞ both weights coincide and δ = 1 exactly.
    """
    if p >= p0:
        raise DegenerateExponents("δ diverges when p = p₀")
    if math.isinf(p0):
        return 1.0
    r = 0.0 if math.isinf(p0) else p / p0
    return max(2.0 ** r, 2.0 ** (p / alpha) / (2.0 ** (1.0 - r) - 1.0)) ** (1.0 / p)


@dataclass(frozen=True)
class SmoothingResult:
    lhs: float
    rhs: float
    delta: float

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs

    @property
    def holds(self) -> bool:
        return self.lhs <= self.delta * self.rhs * (1 + 1e-9)


def singularity_smooth(N: OrliczFunction, q: float, q0: float, alpha: float, t: float,
                       cfg: QuadratureConfig | None = None) -> SmoothingResult:
    """Compare the (s − t)^{−p/p₀}- and s^{−p/p₀}-weighted tail integrals of N^∧(s)^{−p}.

    N is first truncated at q₀ below N⁻¹(2), which leaves N^∧ unchanged on
    [0, 1/2] and makes both integrals converge at infinity.  Returns the
    1/p-th powers of both sides and the explicit δ.
    """
    if q < q0:
        raise QOutOfRange("need q >= q0")
    p, p0 = conjugate(q), conjugate(q0)
    if p == p0:
        raise DegenerateExponents("p = p₀: the smoothing constant is infinite")
    rep = check_predicates(N, q=alpha)
    if not rep.ratio_nondecreasing.holds:
        raise PredicateFails(f"N^(1/α)/t is not nondecreasing: {rep.ratio_nondecreasing}")
    N0 = truncate_at_zero(N, q0)
    r = 0.0 if math.isinf(p0) else p / p0
    w = lambda s: float(N0.wedge(np.array(s))) ** (-p)
    pts = [0.5]
    head_l = integrate(w, t, 2 * t, cfg, alg_weight=(-r, 0.0))
    tail_l = integrate(lambda s: (s - t) ** (-r) * w(s), 2 * t, math.inf, cfg)
    head_r = integrate(lambda s: s ** (-r) * w(s), t, 2 * t, cfg, points=pts)
    tail_r = integrate(lambda s: s ** (-r) * w(s), 2 * t, math.inf, cfg)
    lhs = (head_l + tail_l) ** (1.0 / p)
    rhs = (head_r + tail_r) ** (1.0 / p)
    return SmoothingResult(lhs, rhs, delta_constant(p, p0, alpha))


# --- discretized oracle ------------------------------------------------------------


@dataclass(frozen=True)
class OracleResult:
    value: float
    configuration: str
    monotone_value: float

    @property
    def non_monotone_gain(self) -> float:
        """Relative improvement of the best non-monotone competitor over monotone ones."""
        return max(0.0, 1.0 - self.value / self.monotone_value) if self.monotone_value > 0 else 0.0


def _transition_weights(m: Measure1D, q: float, n: int) -> np.ndarray:
    """Per-cell weights: a_k = (n·Δx_k^q)^{1/(q−1)} for q > 1, and n·Δx_k for q = 1."""
    x = m.quantile(np.linspace(0.0, 1.0, n + 1))
    dx = np.diff(x)
    with np.errstate(over="ignore", invalid="ignore"):
        if q == 1:
            a = n * dx
        else:
            a = (n * dx ** q) ** (1.0 / (q - 1.0))
    # a linear piece on an unbounded cell leaves [0, 1]: such cells cannot carry a transition
    return np.where(np.isfinite(dx), a, -np.inf)


def cap_oracle_detail(m: Measure1D, q: float, t: float, grid_size: int = 2048) -> OracleResult:
    """Discrete minimization of ∫|Φ′|^q dμ over piecewise-linear Φ on a quantile grid.

    Φ is linear on each of ``grid_size`` equal-mass cells.  A transition
    spread over a set T of cells has minimal energy (Σ_T a_k)^{−(q−1)}
    (Hölder, equality for the Euler–Lagrange slopes); for q = 1 the
    total-variation cost is 1/max_T a_k.  Plateau positions are swept
    exhaustively for the monotone shapes 1→0 and 0→1 and for the
    non-monotone shapes 1-0-1 and 0-1-0, so the result is the exact
    minimum of the discrete problem.
    """
    if grid_size < 64:
        raise ValueError("grid_size must be >= 64")
    if not 0 < t < 0.5:
        raise ValueError("t must lie in (0, 1/2)")
    n = grid_size
    a = _transition_weights(m, q, n)
    k1 = int(math.ceil(t * n - 1e-9))  # cells needed at level 1
    k0 = int(math.ceil(0.5 * n - 1e-9))  # cells needed at level 0
    usable = np.isfinite(a) & (a > 0)
    finite = np.where(usable, a, 0.0)
    blocked = np.concatenate(([0], np.cumsum(~usable & ~(a == 0))))

    def to_cost(score):
        with np.errstate(divide="ignore"):
            c = np.where(score > 0, score ** (-(q - 1.0)) if q > 1 else 1.0 / np.where(score > 0, score, 1.0), np.inf)
        return np.where(score > 0, c, np.inf)

    if q == 1:
        def costs_from(lo: int) -> np.ndarray:
            """Cost of transitions on cells [lo, hi) for hi = lo+1 .. n, indexed by hi."""
            out = np.full(n + 1, np.inf)
            run = np.maximum.accumulate(np.where(usable[lo:], finite[lo:], 0.0))
            ok = (blocked[lo + 1:] - blocked[lo]) == 0
            out[lo + 1:] = np.where(ok, to_cost(run), np.inf)
            return out

        def costs_to(hi: int) -> np.ndarray:
            """Cost of transitions on cells [lo, hi) for lo = 0 .. hi−1, indexed by lo."""
            out = np.full(n + 1, np.inf)
            seg = np.where(usable[:hi], finite[:hi], 0.0)
            run = np.maximum.accumulate(seg[::-1])[::-1]
            ok = (blocked[hi] - blocked[:hi]) == 0
            out[:hi] = np.where(ok, to_cost(run), np.inf)
            return out
    else:
        prefix = np.concatenate(([0.0], np.cumsum(finite)))

        def costs_from(lo: int) -> np.ndarray:
            out = np.full(n + 1, np.inf)
            ok = (blocked[lo + 1:] - blocked[lo]) == 0
            out[lo + 1:] = np.where(ok, to_cost(prefix[lo + 1:] - prefix[lo]), np.inf)
            return out

        def costs_to(hi: int) -> np.ndarray:
            out = np.full(n + 1, np.inf)
            ok = (blocked[hi] - blocked[:hi]) == 0
            out[:hi] = np.where(ok, to_cost(prefix[hi] - prefix[:hi]), np.inf)
            return out

    def sweep(ka: int, kb: int) -> float:
        """Plateau A split as i cells on the left and ka − i on the right, plateau B of kb cells between.

        Left transition occupies [i, z), right one [z + kb, n − j); a side
        without A cells must have B flush against the boundary.
        """
        best = math.inf
        for i in range(0, ka + 1):
            j = ka - i
            z = np.arange(i, n - j - kb + 1)
            if z.size == 0:
                continue
            left = costs_from(i)[z] if i > 0 else np.where(z == 0, 0.0, np.inf)
            right = costs_to(n - j)[z + kb] if j > 0 else np.where(z + kb == n, 0.0, np.inf)
            tot = left + right
            best = min(best, float(np.min(tot)))
        return best

    mono = min(float(costs_from(k1)[n - k0]), float(costs_from(k0)[n - k1]))
    best, where = mono, "monotone"
    e = sweep(k1, k0)
    if e < best * (1 - 1e-12):
        best, where = e, "1-0-1"
    e = sweep(k0, k1)
    if e < best * (1 - 1e-12):
        best, where = e, "0-1-0"
    value = best if q == 1 else best ** (1.0 / q)
    mono_value = mono if q == 1 else mono ** (1.0 / q)
    return OracleResult(float(value), where, float(mono_value))


def cap_oracle(m: Measure1D, q: float, t: float, grid_size: int = 2048) -> float:
    return cap_oracle_detail(m, q, t, grid_size).value
