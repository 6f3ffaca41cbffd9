"""One-dimensional probability measures dμ = e^{−ψ} dx.

Each measure carries its CDF, quantile, an evenness flag and a numerical
log-concavity certificate (finite-difference convexity of ψ).  Built-in
families have closed-form CDFs; grid-specified potentials are interpolated
log-linearly, which keeps every CDF and quantile in closed form as well.
"""

from __future__ import annotations

import csv
import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import special

from .errors import BadGrid, NonNormalizable, SpecError

CONCAVITY_TOL = 1e-6
EVEN_TOL = 1e-9


@dataclass(frozen=True)
class Certificate:
    status: str  # verified | violated | unchecked
    witness: float | None = None

    def __str__(self) -> str:
        if self.status == "violated":
            return f"violated_at({self.witness:.6g})"
        return self.status

    @property
    def verified(self) -> bool:
        return self.status == "verified"


UNCHECKED = Certificate("unchecked")


@dataclass(frozen=True)
class MeasureSpec:
    kind: str
    params: tuple[float, ...] = ()
    path: str | None = None

    def __str__(self) -> str:
        if self.path is not None:
            return f"{self.kind}:{self.path}"
        if self.params:
            return f"{self.kind}:" + ",".join(repr(float(p)) for p in self.params)
        return self.kind


_ARITY = {"gaussian": 0, "exponential": 0, "exp_alpha": 1, "uniform": 2, "cusp": 1}


def parse_measure_spec(text: str) -> MeasureSpec:
    """Parse ``gaussian | exponential | exp_alpha:α | uniform:a,b | cusp:α |
    potential-grid:file | density-grid:file``."""
    if not isinstance(text, str) or not text.strip():
        raise SpecError("empty measure spec")
    kind, _, rest = text.strip().partition(":")
    kind = kind.strip()
    if kind in ("potential-grid", "density-grid"):
        if not rest:
            raise SpecError(f"{kind} needs a file path")
        return MeasureSpec(kind, (), rest)
    if kind not in _ARITY:
        raise SpecError(f"unknown measure kind {kind!r}")
    params: tuple[float, ...] = ()
    if rest:
        try:
            params = tuple(float(p) for p in rest.split(","))
        except ValueError as exc:
            raise SpecError(f"bad parameters in {text!r}") from exc
    if len(params) != _ARITY[kind]:
        raise SpecError(f"{kind} takes {_ARITY[kind]} parameter(s), got {len(params)}")
    if kind in ("exp_alpha", "cusp") and not params[0] > 0:
        raise SpecError(f"{kind} needs alpha > 0")
    if kind == "uniform" and not params[0] < params[1]:
        raise SpecError("uniform:a,b needs a < b")
    return MeasureSpec(kind, params)


@dataclass(frozen=True, eq=False)
class Measure1D:
    name: str
    support: tuple[float, float]
    psi: Callable[[np.ndarray], np.ndarray]
    cdf: Callable[[np.ndarray], np.ndarray]
    quantile: Callable[[np.ndarray], np.ndarray]
    is_even: bool = False
    log_concave_certificate: Certificate = UNCHECKED
    rho_q: Callable[[np.ndarray], np.ndarray] | None = None
    singular_points: tuple[float, ...] = ()

    def log_density(self, x):
        return self.psi(np.asarray(x, dtype=float))

    def density(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.support
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            rho = np.exp(-self.psi(x))
        inside = (x >= lo) & (x <= hi)
        return np.where(inside & np.isfinite(rho), rho, 0.0)

    def rho_at_quantile(self, u):
        """ρ(Q(u)) for u in [0, 1]; the boundary cost of the half-line of mass u."""
        u = np.asarray(u, dtype=float)
        if self.rho_q is not None:
            return self.rho_q(u)
        return self.density(self.quantile(u))

    def mass(self, a: float, b: float) -> float:
        return mass(self, a, b)

    def median(self) -> float:
        return median(self)


def mass(m: Measure1D, a: float, b: float) -> float:
    if a > b:
        raise ValueError("mass(a, b) needs a <= b")
    value = float(m.cdf(np.array(b))) - float(m.cdf(np.array(a)))
    return min(max(value, 0.0), 1.0)


def median(m: Measure1D) -> float:
    return float(m.quantile(np.array(0.5)))


# --- checks -----------------------------------------------------------------


def _sample_points(m: Measure1D, n: int = 2001) -> tuple[np.ndarray, float]:
    lo = float(m.quantile(np.array(1e-6)))
    hi = float(m.quantile(np.array(1 - 1e-6)))
    xs = np.linspace(lo, hi, n)
    extra = [median(m), *m.singular_points]
    xs = np.unique(np.concatenate((xs, [e for e in extra if lo <= e <= hi])))
    h = (hi - lo) / (n - 1) / 2
    return xs, h


def certify_log_concave(m: Measure1D, tol: float = CONCAVITY_TOL) -> Certificate:
    """Finite-difference test ψ'' ≥ −tol on a sampled grid; reports the worst point."""
    xs, h = _sample_points(m)
    lo, hi = m.support
    keep = (xs - h >= lo) & (xs + h <= hi)
    xs = xs[keep]
    with np.errstate(invalid="ignore", over="ignore"):
        second = (m.psi(xs + h) - 2.0 * m.psi(xs) + m.psi(xs - h)) / (h * h)
    second = np.where(np.isnan(second), -np.inf, second)
    i = int(np.argmin(second))
    if second[i] >= -tol:
        return Certificate("verified")
    return Certificate("violated", float(xs[i]))


def check_even(m: Measure1D) -> bool:
    lo, hi = m.support
    if not (lo == -hi):
        return False
    xs, _ = _sample_points(m)
    a, b = m.density(xs), m.density(-xs)
    return bool(np.all(np.abs(a - b) <= EVEN_TOL * np.maximum(np.abs(a), np.abs(b)) + 1e-300))


def finalize(m: Measure1D, certify: bool = True) -> Measure1D:
    even = check_even(m)
    cert = certify_log_concave(m) if certify else UNCHECKED
    return dataclasses.replace(m, is_even=even, log_concave_certificate=cert)


# --- built-in families --------------------------------------------------------

_LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)


def gaussian() -> Measure1D:
    def psi(x):
        return 0.5 * np.asarray(x, dtype=float) ** 2 + _LOG_SQRT_2PI

    def rho_q(u):
        u = np.asarray(u, dtype=float)
        with np.errstate(over="ignore", invalid="ignore"):
            out = np.exp(-0.5 * special.ndtri(u) ** 2 - _LOG_SQRT_2PI)
        return np.where((u > 0) & (u < 1), out, 0.0)

    return Measure1D(
        "gaussian", (-math.inf, math.inf), psi, special.ndtr, special.ndtri, rho_q=rho_q
    )


def exponential() -> Measure1D:
    def psi(x):
        return np.abs(np.asarray(x, dtype=float)) + math.log(2.0)

    def cdf(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(over="ignore"):
            return np.where(x <= 0, 0.5 * np.exp(np.minimum(x, 0)), 1 - 0.5 * np.exp(-np.maximum(x, 0)))

    def quantile(u):
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(u <= 0.5, np.log(2 * u), -np.log(2 * (1 - u)))

    def rho_q(u):
        u = np.asarray(u, dtype=float)
        return np.clip(np.minimum(u, 1 - u), 0.0, 0.5)

    return Measure1D("exponential", (-math.inf, math.inf), psi, cdf, quantile, rho_q=rho_q)


def exp_alpha(alpha: float) -> Measure1D:
    a = 1.0 / alpha
    log_z = math.log(alpha) - math.log(2.0) - special.gammaln(a)

    def psi(x):
        return np.abs(np.asarray(x, dtype=float)) ** alpha - log_z

    def cdf(x):
        x = np.asarray(x, dtype=float)
        upper = 0.5 * special.gammaincc(a, np.abs(x) ** alpha)
        return np.where(x < 0, upper, 1 - upper)

    def quantile(u):
        u = np.asarray(u, dtype=float)
        tail = np.minimum(u, 1 - u)
        with np.errstate(invalid="ignore"):
            r = special.gammainccinv(a, np.clip(2 * tail, 0.0, 1.0)) ** (1.0 / alpha)
        return np.where(u < 0.5, -r, r)

    return Measure1D(f"exp_alpha:{alpha:g}", (-math.inf, math.inf), psi, cdf, quantile)


def uniform(lo: float, hi: float) -> Measure1D:
    width = hi - lo

    def psi(x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= lo) & (x <= hi), math.log(width), np.inf)

    def cdf(x):
        return np.clip((np.asarray(x, dtype=float) - lo) / width, 0.0, 1.0)

    def quantile(u):
        return lo + np.asarray(u, dtype=float) * width

    return Measure1D(f"uniform:{lo:g},{hi:g}", (lo, hi), psi, cdf, quantile)


def cusp(alpha: float) -> Measure1D:
    """Density (1+α)/2·|x|^α on [−1, 1]; vanishes at the median for α > 0."""
    c = math.log((1 + alpha) / 2)

    def psi(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            v = -c - alpha * np.log(np.abs(x))
        return np.where(np.abs(x) <= 1, v, np.inf)

    def cdf(x):
        x = np.clip(np.asarray(x, dtype=float), -1.0, 1.0)
        return 0.5 + 0.5 * np.sign(x) * np.abs(x) ** (1 + alpha)

    def quantile(u):
        s = 2 * np.asarray(u, dtype=float) - 1
        return np.sign(s) * np.abs(s) ** (1.0 / (1 + alpha))

    return Measure1D(f"cusp:{alpha:g}", (-1.0, 1.0), psi, cdf, quantile, singular_points=(0.0,))


def loglinear(x: np.ndarray, psi_values: np.ndarray, name: str = "grid") -> Measure1D:
    """Measure with ψ linear between knots and exponential tails from the end slopes."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(psi_values, dtype=float)
    if x.ndim != 1 or x.shape != v.shape or x.size < 2:
        raise BadGrid("grid needs matching 1-D x and potential arrays")
    if not np.all(np.diff(x) > 0):
        raise BadGrid("grid x must be strictly increasing")
    if not np.all(np.isfinite(v)):
        raise BadGrid("grid potential must be finite")
    v = v - v.min()
    h = np.diff(x)
    k = np.diff(v) / h
    s_left, s_right = k[0], k[-1]
    if not (s_left < 0 and s_right > 0):
        raise NonNormalizable("log-linear tails do not decay on both sides")
    kh = k * h
    # ∫_0^h e^{-k s} ds, stable near k = 0
    with np.errstate(divide="ignore", invalid="ignore"):
        seg_factor = np.where(np.abs(kh) > 1e-12, -np.expm1(-kh) / kh, 1.0 - kh / 2)
    seg = np.exp(-v[:-1]) * h * seg_factor
    left = math.exp(-v[0]) / (-s_left)
    right = math.exp(-v[-1]) / s_right
    z = left + seg.sum() + right
    if not np.isfinite(z) or z <= 0:
        raise NonNormalizable("grid density does not normalize")
    cum = np.concatenate(([left], left + np.cumsum(seg))) / z
    log_z = math.log(z)

    def psi(t):
        t = np.asarray(t, dtype=float)
        out = np.interp(t, x, v)
        out = np.where(t < x[0], v[0] + s_left * (t - x[0]), out)
        out = np.where(t > x[-1], v[-1] + s_right * (t - x[-1]), out)
        return out + log_z

    def cdf(t):
        t = np.asarray(t, dtype=float)
        i = np.clip(np.searchsorted(x, t, side="right") - 1, 0, x.size - 2)
        d = t - x[i]
        kk = k[i]
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            part = np.where(np.abs(kk * d) > 1e-12, -np.expm1(-kk * d) / kk, d * (1 - kk * d / 2))
            inner = cum[i] + np.exp(-v[i]) * part / z
            lower = (left / z) * np.exp(np.minimum(-s_left * (t - x[0]), 0))
            upper = 1 - (right / z) * np.exp(-s_right * np.maximum(t - x[-1], 0))
        out = np.where(t < x[0], lower, np.where(t > x[-1], upper, inner))
        return np.clip(out, 0.0, 1.0)

    def quantile(u):
        u = np.asarray(u, dtype=float)
        i = np.clip(np.searchsorted(cum, u, side="right") - 1, 0, x.size - 2)
        mloc = (u - cum[i]) * z
        kk = k[i]
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            arg = mloc * kk * np.exp(v[i])
            d = np.where(np.abs(arg) > 1e-12, -np.log1p(-arg) / kk, mloc * np.exp(v[i]) * (1 + arg / 2))
            lower = x[0] + np.log(u * z / left) / (-s_left)
            upper = x[-1] - np.log((1 - u) * z / right) / s_right
        return np.where(u < cum[0], lower, np.where(u > cum[-1], upper, x[i] + d))

    return Measure1D(name, (-math.inf, math.inf), psi, cdf, quantile)


def read_grid_csv(path: str | Path, header: tuple[str, str] = ("x", "value")) -> tuple[np.ndarray, np.ndarray]:
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise BadGrid(f"cannot read grid file {path}: {exc}") from exc
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows or tuple(c.strip() for c in rows[0]) != header:
        raise BadGrid(f"grid file {path} must start with header {','.join(header)}")
    try:
        data = np.array([[float(c) for c in r] for r in rows[1:]], dtype=float)
    except ValueError as exc:
        raise BadGrid(f"non-numeric entry in {path}") from exc
    if data.ndim != 2 or data.shape[1] != 2 or data.shape[0] < 8:
        raise BadGrid(f"grid file {path} needs at least 8 rows of two columns")
    if not np.all(np.diff(data[:, 0]) > 0):
        raise BadGrid(f"first column of {path} must be strictly increasing")
    return data[:, 0], data[:, 1]


def build(spec: MeasureSpec | str) -> Measure1D:
    """Build and certify a measure from a spec or its string form."""
    if isinstance(spec, str):
        spec = parse_measure_spec(spec)
    kind, p = spec.kind, spec.params
    if kind == "gaussian":
        m = gaussian()
    elif kind == "exponential":
        m = exponential()
    elif kind == "exp_alpha":
        m = exp_alpha(p[0])
    elif kind == "uniform":
        m = uniform(p[0], p[1])
    elif kind == "cusp":
        m = cusp(p[0])
    elif kind == "potential-grid":
        xs, vals = read_grid_csv(spec.path)
        m = loglinear(xs, vals, name=str(spec))
    elif kind == "density-grid":
        xs, vals = read_grid_csv(spec.path)
        if np.any(vals <= 0):
            raise BadGrid("density grid values must be positive")
        m = loglinear(xs, -np.log(vals), name=str(spec))
    else:  # pragma: no cover - parse_measure_spec guards this
        raise SpecError(kind)
    return finalize(m)


def normalization_error(m: Measure1D) -> float:
    """|∫ρ − 1| by quadrature split at quartiles and singular points."""
    from .numerics import integrate

    lo, hi = m.support
    cuts = sorted({float(m.quantile(np.array(u))) for u in (0.25, 0.5, 0.75)} | set(m.singular_points))
    edges = [lo, *[c for c in cuts if lo < c < hi], hi]
    f = lambda s: float(m.density(np.array(s)))
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if math.isinf(a):
            total += integrate(lambda s: f(-s), -b, math.inf)
        else:
            total += integrate(f, a, b)
    return abs(total - 1.0)
