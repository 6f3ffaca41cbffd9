"""Machinery behind dimension-free tensorization of a concave profile J.

From J one builds the control rate D (how far J/I₀ is from nondecreasing),
the envelopes g, J₀, J₁, the adjoint N^∧(t) = (∫_t^∞ ds/J₁(s)²)^{−1/2} and
the Beckner weight T with N^∧(t) = t^{1/2}·T(log(1 + 1/t)).  Monotonicity
facts about these objects are certified on grids, with "essentially
monotone" turned into a number: the worst ratio in the forbidden direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DivergentIntegral, InfiniteControlRate
from .measures import Measure1D
from .numerics import CumulativeIntegral, GridFunction, essential_constant, log_grid
from .orlicz import quantile_rule
from .profiles import Profile, check_bobkov_input, i0, profile_of

CONTROL_CAP = 1e6
GRID_LO = 1e-12
GRID_PER_DECADE = 256
TABLE_LO = 1e-14
FACT_HI = 1e3
STRICT_SLACK = 1e-9


def _grid(lo: float = GRID_LO, per_decade: int = GRID_PER_DECADE) -> np.ndarray:
    return log_grid(lo, 0.5, per_decade)


def control_rate(J: Profile, grid: np.ndarray | None = None) -> float:
    """sup over grid pairs t ≤ s ≤ 1/2 of [J(t)/I₀(t)] / [J(s)/I₀(s)]; +∞ beyond 1e6."""
    t = _grid() if grid is None else np.asarray(grid, dtype=float)
    r = J.tilde(t) / i0(t)
    if np.any(~np.isfinite(r)) or np.any(r <= 0):
        return math.inf
    D = essential_constant(r, "nondecreasing")
    return math.inf if D > CONTROL_CAP else D


def limsup_ratio(J: Profile, lo: float = GRID_LO, window: int = 2) -> float:
    """Largest J/I₀ over the lowest ``window`` decades; finite when the limsup form holds."""
    t = log_grid(lo, lo * 10 ** window, 64)
    return float(np.max(J.tilde(t) / i0(t)))


@dataclass(frozen=True)
class Certificate:
    name: str
    function: str
    direction: str
    constant: float
    strict: bool

    @property
    def passes(self) -> bool:
        if self.strict:
            return self.constant <= 1.0 + STRICT_SLACK
        return math.isfinite(self.constant)

    def as_dict(self) -> dict:
        return {"name": self.name, "function": self.function, "direction": self.direction,
                "essential_constant": self.constant, "strict": self.strict, "passes": self.passes}


@dataclass(frozen=True, eq=False)
class TensorMachinery:
    J: Profile
    D: float
    g: Callable[[np.ndarray], np.ndarray]
    J0: Callable[[np.ndarray], np.ndarray]
    J1: Callable[[np.ndarray], np.ndarray]
    N_wedge: Callable[[np.ndarray], np.ndarray]
    T: Callable[[np.ndarray], np.ndarray]
    x_max: float
    facts: tuple[Certificate, ...] = field(default=())

    def as_dict(self, n: int = 128) -> dict:
        t = np.geomspace(GRID_LO, 0.5, n)
        x = np.geomspace(math.log(3.0), self.x_max, n)
        return {
            "profile": self.J.name,
            "control_rate": self.D,
            "t": t.tolist(),
            "g": np.asarray(self.g(t)).tolist(),
            "J0": np.asarray(self.J0(t)).tolist(),
            "J1": np.asarray(self.J1(t)).tolist(),
            "N_wedge": np.asarray(self.N_wedge(t)).tolist(),
            "x": x.tolist(),
            "T": np.asarray(self.T(x)).tolist(),
            "certificates": [c.as_dict() for c in self.facts],
        }


def _envelopes(J: Profile, grid: np.ndarray):
    r_nodes = J.tilde(grid) / i0(grid)
    G = np.minimum.accumulate(r_nodes[::-1])[::-1]  # min over nodes in [t_i, 1/2]
    half = float(J(np.array(0.5)))

    def g(t):
        t = np.asarray(t, dtype=float)
        tc = np.clip(t, grid[0], 0.5)
        k = np.clip(np.searchsorted(grid, tc, side="left"), 0, grid.size - 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            own = J.tilde(np.clip(t, 1e-300, 0.5)) / i0(np.clip(t, 1e-300, 0.5))
        return np.minimum(own, G[k])

    def J1(t):
        t = np.asarray(t, dtype=float)
        return np.where(t <= 0.5, J.tilde(np.clip(t, 0.0, 0.5)), 2.0 * half * t)

    def J0(t):
        t = np.asarray(t, dtype=float)
        low = g(t) * i0(np.clip(t, 0.0, 0.5))
        return np.where(t <= 0.5, low, 2.0 * half * t)

    return g, J0, J1, half


def _adjoint_from(J1, half: float):
    # ∫_{1/2}^∞ ds/(2J(1/2)s)² = 1/(2J(1/2)²)
    nodes = np.unique(np.concatenate((log_grid(TABLE_LO, 0.5, 32), 0.5 - np.geomspace(1e-12, 0.25, 48))))
    table = CumulativeIntegral(lambda s: 1.0 / np.asarray(J1(s), dtype=float) ** 2, nodes, order=20,
                               tail=1.0 / (2.0 * half * half))
    k_lo = math.log(float(table(nodes[1])) / float(table(nodes[0]))) / math.log(nodes[1] / nodes[0])

    def integral(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            mid = table(np.clip(t, TABLE_LO, 0.5))
            below = float(table(np.array(TABLE_LO))) * (np.maximum(t, 1e-300) / TABLE_LO) ** k_lo
            above = 1.0 / (4.0 * half * half * np.maximum(t, 0.5))
        return np.where(t < TABLE_LO, below, np.where(t > 0.5, above, mid))

    def wedge(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            out = integral(t) ** -0.5
        return np.where(t <= 0, 0.0, out)

    return wedge, integral


def _facts(J0, J1, T, x_max: float) -> tuple[Certificate, ...]:
    t = log_grid(GRID_LO, FACT_HI, 64)
    s = np.sqrt(t)
    i = i0(t)
    j0, j1 = J0(t), J1(t)
    x = log_grid(math.log(3.0), x_max, 256)
    Tx = T(x)
    return (
        Certificate("fact1", "J0/sqrt(t)", "nondecreasing", essential_constant(j0 / s, "nondecreasing"), True),
        Certificate("fact1", "J1/sqrt(t)", "nondecreasing", essential_constant(j1 / s, "nondecreasing"), False),
        Certificate("fact2", "J1/t", "nonincreasing", essential_constant(j1 / t, "nonincreasing"), True),
        Certificate("fact2", "J0/t", "nonincreasing", essential_constant(j0 / t, "nonincreasing"), False),
        Certificate("fact3", "J0/I0", "nondecreasing", essential_constant(j0 / i, "nondecreasing"), True),
        Certificate("fact3", "J1/I0", "nondecreasing", essential_constant(j1 / i, "nondecreasing"), False),
        Certificate("T", "T", "nondecreasing", essential_constant(Tx, "nondecreasing"), True),
        Certificate("T", "T^2/x", "nonincreasing", essential_constant(Tx ** 2 / x, "nonincreasing"), False),
    )


def build_machinery(J: Profile, grid: np.ndarray | None = None) -> TensorMachinery:
    """Envelopes, adjoint, Beckner weight and certificates for a concave symmetric profile."""
    check_bobkov_input(J)
    grid = _grid() if grid is None else np.asarray(grid, dtype=float)
    D = control_rate(J, grid)
    if math.isinf(D):
        raise InfiniteControlRate(f"J/I0 grows by more than {CONTROL_CAP:g} as t decreases")
    g, J0, J1, half = _envelopes(J, grid)
    wedge, _ = _adjoint_from(J1, half)
    x_max = math.log1p(1.0 / GRID_LO)

    def T(x):
        x = np.asarray(x, dtype=float)
        t = 1.0 / np.expm1(x)
        return wedge(t) / np.sqrt(t)

    return TensorMachinery(J, D, g, J0, J1, wedge, T, x_max, _facts(J0, J1, T, x_max))


def envelope_violations(mach: TensorMachinery, n: int = 1024, slack: float = 1e-9) -> dict:
    """Counts of grid points breaking J₀ ≤ J₁ ≤ D·J₀ on (0, 1/2]."""
    t = np.geomspace(GRID_LO, 0.5, n)
    j0, j1 = mach.J0(t), mach.J1(t)
    return {
        "lower": int(np.count_nonzero(j0 > j1 * (1 + slack))),
        "upper": int(np.count_nonzero(j1 > mach.D * j0 * (1 + slack))),
    }


def last_thing_check(mach: TensorMachinery, n: int = 2048) -> tuple[float, float]:
    """inf and sup over t ∈ (0, 1] of (∫_t^∞ J₁(t)²/(J₁(s)²t) ds)^{1/2} = J₁(t)/(√t·N^∧(t))."""
    t = np.geomspace(GRID_LO, 1.0, n)
    with np.errstate(divide="ignore", invalid="ignore"):
        R = mach.J1(t) / (np.sqrt(t) * mach.N_wedge(t))
    if not np.all(np.isfinite(R)):
        raise DivergentIntegral("the comparison integral is not finite on the grid")
    return float(R.min()), float(R.max())


def beckner_functional(f: GridFunction, m: Measure1D, T: Callable, x_max: float = 27.6, count: int = 64) -> float:
    """sup over p ∈ (1, 2) of (∫f² − (∫|f|^p)^{2/p})^{1/2}·T(1/(2 − p)), x = 1/(2 − p) log-spaced."""
    xs, w = quantile_rule(m, [float(m.cdf(np.array(k))) for k in f.knots])
    w = w / w.sum()
    a = np.abs(f(xs))
    second = float(np.dot(w, a * a))
    best = 0.0
    for x in np.geomspace(1.0 + 1e-3, x_max, count):
        p = 2.0 - 1.0 / x
        gap = second - float(np.dot(w, a ** p)) ** (2.0 / p)
        if gap <= 1e-12 * second:  # rounding level; the square root would amplify it
            gap = 0.0
        best = max(best, math.sqrt(max(gap, 0.0)) * float(T(np.array(x))))
    return best


def beckner_d1_upper(mach: TensorMachinery, m: Measure1D, count: int = 12) -> dict:
    """Least ‖f′‖₂ / Beckner functional over ramps; an upper bound for the Beckner constant."""
    best = (math.inf, "none")
    for a in np.geomspace(1e-4, 0.45, count):
        for b in (0.5, 0.75, 0.95):
            if b <= a:
                continue
            xa, xb = (float(v) for v in m.quantile(np.array([a, b])))
            if not xb > xa:
                continue
            f = GridFunction(np.array([xa, xb]), np.array([0.0, 1.0]))
            grad = math.sqrt((b - a)) / (xb - xa)
            val = beckner_functional(f, m, mach.T, mach.x_max)
            if val > 0 and grad / val < best[0]:
                best = (grad / val, f"ramp({a:.3g},{b:g})")
    return {"upper": best[0], "witness": best[1]}


def coordinate_halfspace_upper(m: Measure1D, k: int, t: float) -> float:
    """I_ν(t), which bounds the profile of ν^{⊗k} from above for every k ≥ 1."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return float(profile_of(m)(np.array(t)))
