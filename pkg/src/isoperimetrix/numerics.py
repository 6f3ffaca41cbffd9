"""Deterministic numerical kernel.

Adaptive quadrature (QUADPACK through scipy), monotone inversion, grid
functions, tabulated tail integrals and infimum scans on logarithmic grids.
Everything here is pure; nothing keeps module-level mutable state.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate as _spi
from scipy import optimize as _spo

from .errors import (
    BadGrid,
    DivergentIntegral,
    EmptyInterval,
    NonConvergent,
    NotBracketed,
)

RealFunction = Callable[[float], float]

OVERFLOW_GUARD = 1e300
SCAN_FLOOR = 1e-8
SCAN_PER_DECADE = 512


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_subdivisions: int = 200
    tail_cutoff_mass: float = 1e-12

    def __post_init__(self) -> None:
        for name in ("rel_tol", "abs_tol", "tail_cutoff_mass"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_subdivisions < 16:
            raise ValueError("max_subdivisions must be at least 16")

    def replace(self, **changes) -> "QuadratureConfig":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


DEFAULT_CONFIG = QuadratureConfig()


def _cfg(cfg: QuadratureConfig | None) -> QuadratureConfig:
    return DEFAULT_CONFIG if cfg is None else cfg


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Piecewise-linear function on strictly increasing knots.

    ``extrapolation="none"`` holds the end values constant outside the knots;
    ``"linear-tail"`` continues the first and last segments linearly.
    """

    knots: np.ndarray
    values: np.ndarray
    extrapolation: str = "none"

    def __post_init__(self) -> None:
        k = np.array(self.knots, dtype=float)
        v = np.array(self.values, dtype=float)
        if k.ndim != 1 or k.shape != v.shape or k.size < 2:
            raise BadGrid("knots and values must be 1-D arrays of equal length >= 2")
        if not np.all(np.diff(k) > 0):
            raise BadGrid("knots must be strictly increasing")
        if not (np.all(np.isfinite(k)) and np.all(np.isfinite(v))):
            raise BadGrid("knots and values must be finite")
        if self.extrapolation not in ("none", "linear-tail"):
            raise BadGrid(f"unknown extrapolation {self.extrapolation!r}")
        k.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "knots", k)
        object.__setattr__(self, "values", v)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        y = np.interp(x, self.knots, self.values)
        if self.extrapolation == "linear-tail":
            k, v = self.knots, self.values
            sl = (v[1] - v[0]) / (k[1] - k[0])
            sr = (v[-1] - v[-2]) / (k[-1] - k[-2])
            y = np.where(x < k[0], v[0] + sl * (x - k[0]), y)
            y = np.where(x > k[-1], v[-1] + sr * (x - k[-1]), y)
        return y

    def shifted(self, c: float) -> "GridFunction":
        return GridFunction(self.knots, self.values - c, self.extrapolation)

    def segments(self):
        """Linear pieces as arrays (x_left, x_right, anchor, f(anchor), slope), tails included."""
        k, v = self.knots, self.values
        slopes = np.diff(v) / np.diff(k)
        if self.extrapolation == "linear-tail":
            sl, sr = slopes[0], slopes[-1]
        else:
            sl = sr = 0.0
        xl = np.concatenate(([-np.inf], k))
        xr = np.concatenate((k, [np.inf]))
        # anchor each piece at a finite abscissa
        anchor = np.concatenate(([k[0]], k))
        f_anchor = np.concatenate(([v[0]], v))
        slope = np.concatenate(([sl], slopes, [sr]))
        return xl, xr, anchor, f_anchor, slope

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        xl, xr, _, _, slope = self.segments()
        idx = np.searchsorted(self.knots, x, side="right")
        return slope[idx]

    def sup_abs(self) -> float:
        if self.extrapolation == "linear-tail":
            xl, xr, _, _, slope = self.segments()
            if slope[0] != 0 or slope[-1] != 0:
                return math.inf
        return float(np.max(np.abs(self.values)))


def integrate(
    f: RealFunction,
    a: float,
    b: float,
    cfg: QuadratureConfig | None = None,
    *,
    envelope: RealFunction | None = None,
    points: Sequence[float] | None = None,
    alg_weight: tuple[float, float] | None = None,
) -> float:
    """Adaptive quadrature of ``f`` over (a, b); ``b`` may be +inf.

    With ``envelope`` given and ``b = inf``, the range is cut where the
    envelope drops below ``cfg.tail_cutoff_mass``.  ``alg_weight=(α, β)``
    multiplies the integrand by (x−a)^α (b−x)^β and lets QUADPACK treat the
    algebraic endpoint singularities exactly.
    """
    cfg = _cfg(cfg)
    if a == b:
        return 0.0
    if b < a:
        return -integrate(f, b, a, cfg, envelope=envelope, points=points)
    if math.isinf(b) and envelope is not None:
        span = max(1.0, abs(a))
        cut = a + span
        while envelope(cut) > cfg.tail_cutoff_mass:
            span *= 2.0
            cut = a + span
            if span > OVERFLOW_GUARD:
                raise DivergentIntegral("envelope never falls below the cutoff")
        b = cut
    kwargs = dict(
        epsabs=cfg.abs_tol,
        epsrel=cfg.rel_tol,
        limit=cfg.max_subdivisions,
        full_output=1,
    )
    if alg_weight is not None:
        if math.isinf(a) or math.isinf(b):
            raise ValueError("algebraic weight needs a finite interval")
        out = _spi.quad(f, a, b, weight="alg", wvar=alg_weight, **kwargs)
    elif points is not None and not (math.isinf(a) or math.isinf(b)):
        pts = [p for p in points if a < p < b]
        out = _spi.quad(f, a, b, points=pts or None, **kwargs)
    else:
        out = _spi.quad(f, a, b, **kwargs)
    value, abserr, info = out[0], out[1], out[2]
    ier = 0 if len(out) == 3 else 1
    if not np.isfinite(value) or abs(value) > OVERFLOW_GUARD:
        raise DivergentIntegral(f"integral over ({a}, {b}) is not finite")
    if ier:
        msg = out[3] if len(out) > 3 else ""
        if "divergent" in str(msg).lower():
            raise DivergentIntegral(str(msg))
        # roundoff-limited results are kept when the error estimate is still small
        if abserr > 1e-6 * max(1.0, abs(value)):
            raise NonConvergent(f"quadrature error {abserr:.3e} on ({a}, {b}): {msg}")
    return float(value)


def invert_monotone(
    f: RealFunction,
    y: float,
    bracket: tuple[float, float],
    abs_tol: float = 1e-12,
) -> float:
    """Solve f(x) = y for continuous strictly monotone f on ``bracket``."""
    lo, hi = float(bracket[0]), float(bracket[1])
    glo, ghi = f(lo) - y, f(hi) - y
    if glo == 0:
        return lo
    if ghi == 0:
        return hi
    if np.sign(glo) == np.sign(ghi):
        raise NotBracketed(f"y={y} is outside f([{lo}, {hi}])")
    x = _spo.brentq(lambda s: f(s) - y, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    # brentq stops on the abscissa; steep f may still miss by a few ulps of y
    if abs(f(x) - y) > abs_tol * (1 + abs(y)) * 1e6:
        raise NonConvergent(f"inversion residual too large at y={y}")
    return float(x)


def invert_increasing(
    f: Callable[[np.ndarray], np.ndarray],
    y,
    lo: float = 1e-300,
    hi: float = 1e300,
    iterations: int = 110,
) -> np.ndarray:
    """Vectorized inverse of an increasing map of (0, inf) onto itself.

    Bisection on log x, which reaches double precision for any positive
    target in roughly 100 halvings.  y = 0 maps to 0 and y = inf to inf.
    """
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    flat_y = y.reshape(-1)
    flat = out.reshape(-1)
    zero = flat_y <= 0
    inf = ~np.isfinite(flat_y)
    work = ~(zero | inf)
    flat[zero] = 0.0
    flat[inf] = np.inf
    if np.any(work):
        target = flat_y[work]
        a = np.full(target.shape, math.log(lo))
        b = np.full(target.shape, math.log(hi))
        for _ in range(iterations):
            m = 0.5 * (a + b)
            with np.errstate(over="ignore", invalid="ignore"):
                fm = f(np.exp(m))
            below = fm < target
            a = np.where(below, m, a)
            b = np.where(below, b, m)
        flat[work] = np.exp(0.5 * (a + b))
    return out


def log_grid(lo: float, hi: float, per_decade: int = SCAN_PER_DECADE) -> np.ndarray:
    if not (0 < lo < hi):
        raise EmptyInterval(f"log grid needs 0 < lo < hi, got ({lo}, {hi})")
    n = max(int(math.ceil(per_decade * math.log10(hi / lo))) + 1, 16)
    g = np.geomspace(lo, hi, n)
    g[0], g[-1] = lo, hi
    return g


def scan_grid(interval: tuple[float, float], per_decade: int = SCAN_PER_DECADE, floor: float = SCAN_FLOOR) -> np.ndarray:
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi:
        raise EmptyInterval(f"empty interval ({lo}, {hi})")
    if lo <= 0:
        if hi <= floor:
            return np.linspace(lo, hi, 1024)[1:]
        g = log_grid(floor, hi, per_decade)
        if lo < 0:
            g = np.concatenate((np.linspace(lo, 0.0, 512, endpoint=False), g))
        return g
    return log_grid(lo, hi, per_decade)


def inf_scan(
    f,
    interval: tuple[float, float],
    log_grid_size: int = SCAN_PER_DECADE,
    *,
    vectorized: bool = False,
    refine: bool = True,
    floor: float = SCAN_FLOOR,
) -> tuple[float, float]:
    """Grid infimum of ``f`` followed by a bounded Brent refinement.

    The grid is log-spaced with ``log_grid_size`` points per decade; an
    interval starting at 0 is scanned from ``floor``.  Returns (argmin, min).
    """
    grid = scan_grid(interval, log_grid_size, floor)
    if vectorized:
        vals = np.asarray(f(grid), dtype=float)
    else:
        vals = np.array([f(float(t)) for t in grid], dtype=float)
    vals = np.where(np.isnan(vals), np.inf, vals)
    i = int(np.argmin(vals))
    best_x, best_v = float(grid[i]), float(vals[i])
    if refine and np.isfinite(best_v):
        lo = grid[max(i - 1, 0)]
        hi = grid[min(i + 1, grid.size - 1)]
        if hi > lo:
            g = (lambda s: float(np.asarray(f(np.array([s])))[0])) if vectorized else (lambda s: float(f(s)))
            res = _spo.minimize_scalar(g, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12 * max(1.0, abs(hi))})
            if res.success and res.fun < best_v:
                best_x, best_v = float(res.x), float(res.fun)
    return best_x, best_v


def sup_scan(f, interval, log_grid_size: int = SCAN_PER_DECADE, **kw) -> tuple[float, float]:
    if kw.get("vectorized"):
        x, v = inf_scan(lambda t: -np.asarray(f(t)), interval, log_grid_size, **kw)
    else:
        x, v = inf_scan(lambda t: -f(t), interval, log_grid_size, **kw)
    return x, -v


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    # read-only after creation, so sharing between threads is harmless
    if order not in _GL_CACHE:
        x, w = leggauss(order)
        x.setflags(write=False)
        w.setflags(write=False)
        _GL_CACHE[order] = (x, w)
    return _GL_CACHE[order]


def panel_rule(nodes: np.ndarray, order: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss–Legendre abscissas and weights on consecutive panels."""
    x, w = gauss_legendre(order)
    a, b = nodes[:-1], nodes[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    pts = mid[:, None] + half[:, None] * x[None, :]
    wts = half[:, None] * w[None, :]
    return pts.reshape(-1), wts.reshape(-1)


def panel_nodes(lo: float, hi: float, per_decade: int = 32, extra: Sequence[float] = ()) -> np.ndarray:
    nodes = log_grid(lo, hi, per_decade)
    ex = [e for e in extra if lo < e < hi]
    if ex:
        nodes = np.unique(np.concatenate((nodes, ex)))
    return nodes


class CumulativeIntegral:
    """Tabulated map s ↦ ∫_s^{hi} g(u) du + tail for s in [nodes[0], nodes[-1]].

    Panel integrals use fixed Gauss–Legendre rules, so evaluation at an
    arbitrary s costs one partial-panel rule and is as accurate as the table.
    ``g`` must accept numpy arrays.
    """

    def __init__(self, g, nodes: np.ndarray, order: int = 20, tail: float = 0.0):
        nodes = np.asarray(nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2 or not np.all(np.diff(nodes) > 0):
            raise BadGrid("panel nodes must be strictly increasing")
        self.g = g
        self.nodes = nodes
        self.order = order
        pts, wts = panel_rule(nodes, order)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            vals = np.asarray(g(pts), dtype=float)
        panels = (vals * wts).reshape(nodes.size - 1, order).sum(axis=1)
        above = np.empty(nodes.size)
        above[-1] = tail
        above[:-1] = tail + np.cumsum(panels[::-1])[::-1]
        self.panels = panels
        self.above = above
        self.tail = tail

    @property
    def lo(self) -> float:
        return float(self.nodes[0])

    @property
    def hi(self) -> float:
        return float(self.nodes[-1])

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        flat = s.reshape(-1)
        k = np.clip(np.searchsorted(self.nodes, flat, side="right") - 1, 0, self.nodes.size - 2)
        right = self.nodes[k + 1]
        x, w = gauss_legendre(self.order)
        half = 0.5 * (right - flat)
        mid = 0.5 * (right + flat)
        pts = mid[:, None] + half[:, None] * x[None, :]
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            vals = np.asarray(self.g(pts.reshape(-1)), dtype=float).reshape(pts.shape)
        partial = (vals * w[None, :]).sum(axis=1) * half
        out = self.above[k + 1] + np.where(half > 0, partial, 0.0)
        out = np.where((flat < self.nodes[0]) | (flat > self.nodes[-1]), np.nan, out)
        return out.reshape(s.shape)


def local_exponent(g, s1: float, s2: float) -> float:
    """Exponent β with g(s) ≈ C s^β fitted through two points."""
    g1, g2 = float(np.asarray(g(np.array([s1])))[0]), float(np.asarray(g(np.array([s2])))[0])
    if g1 <= 0 or g2 <= 0 or not (np.isfinite(g1) and np.isfinite(g2)):
        return math.nan
    return math.log(g2 / g1) / math.log(s2 / s1)


def essential_constant(values: np.ndarray, direction: str) -> float:
    """Worst ratio against the requested monotonicity along an ordered sample.

    For ``"nondecreasing"`` this is sup_{i<j} h_i / h_j (1 means monotone);
    for ``"nonincreasing"`` it is sup_{i<j} h_j / h_i.
    """
    h = np.asarray(values, dtype=float)
    if direction == "nondecreasing":
        tail_min = np.minimum.accumulate(h[::-1])[::-1]
        return float(np.max(h / tail_min))
    if direction == "nonincreasing":
        tail_max = np.maximum.accumulate(h[::-1])[::-1]
        return float(np.max(tail_max / h))
    raise ValueError(direction)
