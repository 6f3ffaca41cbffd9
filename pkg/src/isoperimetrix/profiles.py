"""Isoperimetric profiles of one-dimensional measures.

For a continuous measure the half-lines (−∞, Q(t)] and [Q(1−t), ∞) are
competitors of mass t, which gives J(t) = min(ρ(Q(t)), ρ(Q(1−t))).  For
log-concave measures this is the true profile; otherwise it is only an
upper bound and is flagged as such.  The module also carries the Gaussian
profile, the comparator I₀, the hierarchy constants D_Che and D_Gau, and
the inverse map from an even concave profile back to a measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

from .errors import NotConcave, NotSymmetric, NotVanishing
from .measures import Measure1D, finalize
from .numerics import CumulativeIntegral, inf_scan, invert_increasing, log_grid

EXACT = "exact"
HALF_LINE_UPPER = "half-line upper bound"
UNION_UPPER = "union-of-intervals upper bound"

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True, eq=False)
class Profile:
    """A function J on [0, 1] with its symmetrization Ĩ(t) = min(J(t), J(1−t))."""

    J: Callable[[np.ndarray], np.ndarray]
    name: str
    provenance: str = "analytic"  # measure-derived | analytic | user-supplied
    flag: str = EXACT
    measure: Measure1D | None = None
    mirror: Callable[[np.ndarray], np.ndarray] | None = None

    def __call__(self, t):
        return np.asarray(self.J(np.asarray(t, dtype=float)), dtype=float)

    def reflected(self, t):
        """J(1 − t); uses ``mirror`` when given, which avoids rounding 1 − t for tiny t."""
        t = np.asarray(t, dtype=float)
        if self.mirror is not None:
            return np.asarray(self.mirror(t), dtype=float)
        return self(1.0 - t)

    def tilde(self, t):
        t = np.asarray(t, dtype=float)
        return np.minimum(self(t), self.reflected(t))

    def scaled(self, c: float) -> "Profile":
        J = self.J
        mirror = None if self.mirror is None else (lambda t, f=self.mirror: c * np.asarray(f(t)))
        return Profile(lambda t: c * np.asarray(J(t)), f"{c:g}*{self.name}", self.provenance, self.flag, None, mirror)


def _half_line(m: Measure1D):
    def J(t):
        t = np.asarray(t, dtype=float)
        inside = (t >= 0) & (t <= 1)
        tc = np.clip(t, 0.0, 1.0)
        if m.is_even:
            # ρ(Q(t)) = ρ(Q(1−t)); evaluating at the smaller mass avoids rounding 1 − t
            out = m.rho_at_quantile(np.minimum(tc, 1.0 - tc))
        else:
            out = np.minimum(m.rho_at_quantile(tc), m.rho_at_quantile(1.0 - tc))
        return np.where(inside, out, 0.0)

    # the half-line value is symmetric in t ↔ 1 − t by construction
    return J, J


def union_refinement(m: Measure1D, cells: int = 256, max_intervals: int = 3) -> tuple[np.ndarray, np.ndarray]:
    """Cheapest boundary of unions of ≤ ``max_intervals`` intervals with quantile-grid endpoints.

    Sets are unions of cells of the uniform grid in u = F(x).  Cutting at
    the node u_i costs ρ(Q(u_i)), except at u = 0 and u = 1 which are not
    boundary points.  A left-to-right dynamic program over (inside, cuts
    used, mass in cells) gives, for every mass k/n, the minimal boundary
    measure.  Returns (masses, costs).
    """
    n = cells
    u = np.linspace(0.0, 1.0, n + 1)
    cost = np.asarray(m.rho_at_quantile(u), dtype=float)
    cost[0] = cost[-1] = 0.0
    max_cuts = 2 * max_intervals
    inf = np.inf
    # dp[inside, cuts, mass]
    dp = np.full((2, max_cuts + 1, n + 1), inf)
    dp[0, 0, 0] = 0.0
    dp[1, 0, 0] = 0.0  # starting inside at u = 0 is free
    for i in range(n + 1):
        # optional toggle at node i
        new = dp.copy()
        c = cost[i]
        new[1, 1:, :] = np.minimum(new[1, 1:, :], dp[0, :-1, :] + c)
        new[0, 1:, :] = np.minimum(new[0, 1:, :], dp[1, :-1, :] + c)
        dp = new
        if i == n:
            break
        # advance across cell i
        moved = np.full_like(dp, inf)
        moved[0] = dp[0]
        moved[1, :, 1:] = dp[1, :, :-1]
        dp = moved
    best = dp.min(axis=(0, 1))
    return u, best


def profile_of(m: Measure1D, refine: bool = False, cells: int = 256) -> Profile:
    """Half-line profile of m; ``refine`` adds unions of up to three intervals."""
    flag = EXACT if m.log_concave_certificate.verified else HALF_LINE_UPPER
    J, mirror = _half_line(m)
    if not refine:
        return Profile(J, m.name, "measure-derived", flag, m, mirror)
    masses, costs = union_refinement(m, cells)

    def refined(t):
        t = np.asarray(t, dtype=float)
        return np.minimum(J(t), np.interp(t, masses, costs))

    return Profile(refined, m.name, "measure-derived", UNION_UPPER, m)


def gaussian_profile() -> Profile:
    def J(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(over="ignore", invalid="ignore"):
            out = _INV_SQRT_2PI * np.exp(-0.5 * special.ndtri(np.clip(t, 0, 1)) ** 2)
        return np.where((t > 0) & (t < 1), out, 0.0)

    return Profile(J, "gaussian", "analytic", mirror=J)


def i0(t):
    """I₀(t) = t·log^{1/2}(1 + 1/t) for t > 0, and 0 at t = 0."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = t * np.sqrt(np.log1p(1.0 / t))
    return np.where(t > 0, out, 0.0)


def comparator_I0() -> Profile:
    J = lambda t: i0(np.minimum(t, 1.0 - np.asarray(t)))
    return Profile(J, "I0", "analytic", mirror=J)


def exponential_profile() -> Profile:
    J = lambda t: np.clip(np.minimum(t, 1.0 - np.asarray(t)), 0.0, 0.5)
    return Profile(J, "exponential", "analytic", mirror=J)


def comparability_bounds(f, g, interval: tuple[float, float], per_decade: int = 64) -> tuple[float, float]:
    """Range [c₁, c₂] of f/g over a log grid on ``interval``."""
    t = log_grid(interval[0], interval[1], per_decade)
    r = np.asarray(f(t), dtype=float) / np.asarray(g(t), dtype=float)
    return float(r.min()), float(r.max())


@dataclass(frozen=True)
class ScanResult:
    value: float
    argmin: float
    at_floor: bool

    @property
    def diagnostic(self) -> str:
        return "infimum reached at scan floor; true value may be smaller" if self.at_floor else "interior minimum"


def _scan(fn, floor: float = 1e-8) -> ScanResult:
    x, v = inf_scan(fn, (0.0, 0.5), vectorized=True, floor=floor)
    return ScanResult(max(v, 0.0), x, x <= floor * 1.0001)


def cheeger_scan(p: Profile) -> ScanResult:
    return _scan(lambda t: p.tilde(t) / t)


def cheeger_constant(p: Profile) -> float:
    """D_Che = inf over (0, 1/2] of Ĩ(t)/t."""
    return cheeger_scan(p).value


def gaussian_scan(p: Profile) -> ScanResult:
    g = gaussian_profile()
    return _scan(lambda t: p.tilde(t) / g(t))


def gaussian_constant(p: Profile) -> float:
    """D_Gau = inf over (0, 1) of J/I_γ; symmetry of I_γ reduces this to Ĩ/I_γ on (0, 1/2]."""
    return gaussian_scan(p).value


# --- profile to measure -------------------------------------------------------

CONCAVITY_SLACK = 1e-9


def check_bobkov_input(J: Profile, n: int = 4001) -> None:
    """Raise unless J is symmetric, concave, positive inside and zero at {0, 1}."""
    t = np.linspace(0.0, 1.0, n)
    v = J(t)
    scale = float(np.max(np.abs(v))) or 1.0
    if abs(float(J(np.array(0.0)))) > 1e-12 * scale or abs(float(J(np.array(1.0)))) > 1e-12 * scale:
        raise NotVanishing("profile must vanish at 0 and 1")
    if np.any(v[1:-1] <= 0):
        raise NotVanishing("profile must be positive on (0, 1)")
    asym = np.abs(v - v[::-1])
    if np.max(asym) > 1e-9 * scale:
        raise NotSymmetric(f"J(t) != J(1−t) near t = {t[int(np.argmax(asym))]:.6g}")
    second = v[:-2] - 2 * v[1:-1] + v[2:]
    if np.max(second) > CONCAVITY_SLACK * scale:
        raise NotConcave(f"J is not concave near t = {t[1 + int(np.argmax(second))]:.6g}")


def measure_from_profile(J: Profile, name: str | None = None) -> Measure1D:
    """The even log-concave measure whose half-line profile is J.

    Points are parametrized by their mass t: x(t) = −∫_t^{1/2} ds/J(s) for
    t ≤ 1/2 and x(1−t) = −x(t).  The density at x(t) is J(t).  The tail
    integral is tabulated in log t down to t = 1e−300.
    """
    check_bobkov_input(J)
    lo, hi = math.log(1e-300), math.log(0.5)
    nodes = np.concatenate((np.arange(lo, math.log(0.25), 0.25), np.linspace(math.log(0.25), hi, 33)))
    table = CumulativeIntegral(lambda u: np.exp(u) / J(np.exp(u)), np.unique(nodes), order=20)

    def x_of_mass(t):
        # position of the point with left mass t ≤ 1/2
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            lt = np.log(t)
        out = -table(np.clip(lt, lo, hi))
        return np.where(t <= 0, -np.inf, np.where(lt < lo, -np.inf, out))

    x_floor = float(-table(np.array(lo)))

    def quantile(u):
        u = np.asarray(u, dtype=float)
        left = x_of_mass(np.minimum(u, 0.5))
        right = -x_of_mass(np.minimum(1.0 - u, 0.5))
        return np.where(u <= 0.5, left, right)

    def left_mass(x):
        # inverse of x_of_mass on x ≤ 0
        x = np.asarray(x, dtype=float)
        y = np.exp(np.clip(x, x_floor, 0.0))
        t = invert_increasing(lambda s: np.exp(x_of_mass(s)), y, lo=1e-300, hi=0.5, iterations=80)
        # two Newton steps polish the bisection; dx/dt = 1/J
        for _ in range(2):
            step = (x_of_mass(t) - x) * J(t)
            t = np.clip(t - step, 1e-300, 0.5)
        return np.where(x < x_floor, 0.0, t)

    def cdf(x):
        x = np.asarray(x, dtype=float)
        neg = left_mass(-np.abs(x))
        return np.where(x <= 0, neg, 1.0 - neg)

    def psi(x):
        # J is symmetric, so the smaller tail mass suffices and keeps full precision
        with np.errstate(divide="ignore"):
            return -np.log(J(left_mass(-np.abs(np.asarray(x, dtype=float)))))

    m = Measure1D(name or f"bobkov({J.name})", (-math.inf, math.inf), psi, cdf, quantile)
    return finalize(m)


def profile_table(p: Profile, n: int = 1024, lo: float = 1e-8) -> tuple[np.ndarray, np.ndarray]:
    """``n`` samples of J, log-spaced on [lo, 1/2] and mirrored onto [1/2, 1 − lo].

    The midpoint 1/2 is included only when ``n`` is odd.
    """
    half = np.geomspace(lo, 0.5, n // 2 + 1)
    mid = half[-1:] if n % 2 else half[:0]
    t = np.concatenate((half[:-1], mid, 1.0 - half[-2::-1]))
    return t, p(t)
