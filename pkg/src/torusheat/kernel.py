"""Periodic heat kernel on the torus T^n = R^n / Z^n and on the waveguide T^n x R^m.

The kernel is

    phi_t(x) = (4 pi t)^(-n/2) sum_{k in Z^n} exp(-|x + k|^2 / (4t))          (Gaussian sum)
             = sum_{l in Z^n} exp(-4 pi^2 |l|^2 t) cos(2 pi l.x)               (Fourier sum)

with period-1 characters on the fundamental cube Q_n = [-1/2, 1/2)^n.  Both
sums factor over coordinates, so every evaluation is done axis by axis and
multiplied; the truncation of each axis sum is certified by a geometric tail
bound.  Reported error bounds cover truncation only, not floating-point
rounding of the retained terms.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import (
    InvalidDelta,
    InvalidWindow,
    NonPositiveTime,
    ToleranceTooTight,
)

__all__ = [
    "Representation",
    "KernelConfig",
    "KernelValue",
    "TorusPoint",
    "WaveguidePoint",
    "reduce_mod1",
    "check_time",
    "kernel_values",
    "eval_gaussian",
    "eval_fourier",
    "evaluate",
    "eval_waveguide",
    "lower_bound",
    "upper_bound",
    "waveguide_bounds",
    "split",
    "tail_mass",
    "ladder_1d",
]

DEFAULT_TOL = 1e-12
DEFAULT_SWITCH_T = 1.0 / (2.0 * math.pi)

# Per-axis truncation caps; beyond these the other representation is the right tool.
MAX_GAUSS_TERMS = 100_000
MAX_FOURIER_TERMS = 100_000

_FOUR_PI_SQ = 4.0 * math.pi**2


# --------------------------------------------------------------------------- points


def reduce_mod1(x) -> np.ndarray:
    """Reduce coordinates modulo 1 into [-1/2, 1/2).

    Values already in range are returned untouched, so the map is idempotent
    bit for bit.  +1/2 maps to -1/2.
    """
    x = np.array(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("coordinates must be finite")
    bad = (x < -0.5) | (x >= 0.5)
    if np.any(bad):
        r = x[bad] - np.floor(x[bad])  # in [0, 1]
        x[bad] = np.where(r >= 0.5, r - 1.0, r)
    return x


@dataclass(frozen=True)
class TorusPoint:
    """A point of T^n in canonical coordinates on [-1/2, 1/2)^n."""

    coords: tuple[float, ...]

    def __init__(self, coords):
        if np.isscalar(coords):
            coords = (coords,)
        red = reduce_mod1(list(coords))
        if red.ndim != 1 or red.size == 0:
            raise ValueError("a torus point needs at least one coordinate")
        object.__setattr__(self, "coords", tuple(float(c) for c in red))

    @property
    def n(self) -> int:
        return len(self.coords)

    def array(self) -> np.ndarray:
        return np.array(self.coords)

    def norm(self) -> float:
        return math.hypot(*self.coords)


@dataclass(frozen=True)
class WaveguidePoint:
    """A point of T^n x R^m."""

    torus_part: TorusPoint
    euclidean_part: tuple[float, ...]

    def __init__(self, torus_part, euclidean_part):
        if not isinstance(torus_part, TorusPoint):
            torus_part = TorusPoint(torus_part)
        if np.isscalar(euclidean_part):
            euclidean_part = (euclidean_part,)
        y = tuple(float(c) for c in euclidean_part)
        if not all(math.isfinite(c) for c in y):
            raise ValueError("euclidean coordinates must be finite")
        object.__setattr__(self, "torus_part", torus_part)
        object.__setattr__(self, "euclidean_part", y)

    @property
    def n(self) -> int:
        return self.torus_part.n

    @property
    def m(self) -> int:
        return len(self.euclidean_part)

    def norm(self) -> float:
        return math.hypot(*self.torus_part.coords, *self.euclidean_part)


def check_time(t, *, below_half: bool = False) -> float:
    """Validate a diffusion time; convergence experiments also need t < 1/2."""
    t = float(t)
    if not (t > 0.0) or not math.isfinite(t):
        raise NonPositiveTime(f"time must be positive and finite, got {t!r}")
    if below_half and not t < 0.5:
        raise NonPositiveTime(f"time must lie in (0, 1/2) here, got {t!r}")
    return t


# --------------------------------------------------------------------------- config


class Representation(str, enum.Enum):
    AUTO = "auto"
    GAUSSIAN = "gaussian"
    FOURIER = "fourier"


@dataclass(frozen=True)
class KernelConfig:
    tol: float = DEFAULT_TOL
    switch_t: float = DEFAULT_SWITCH_T
    representation: Representation = Representation.AUTO

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not self.switch_t > 0:
            raise ValueError("switch_t must be positive")
        object.__setattr__(self, "representation", Representation(self.representation))

    def choose(self, t: float) -> Representation:
        if self.representation is not Representation.AUTO:
            return self.representation
        # the tie goes to the Fourier side
        return Representation.GAUSSIAN if t < self.switch_t else Representation.FOURIER


@dataclass(frozen=True)
class KernelValue:
    value: float
    error_bound: float
    representation: Representation = field(default=Representation.AUTO, compare=False)


# --------------------------------------------------------------------------- axis sums


@lru_cache(maxsize=4096)
def _gauss_radius(t: float, tol: float) -> tuple[int, float]:
    """Smallest K with a certified tail of the 1-D Gaussian sum below tol.

    For x in [-1/2, 1/2) and |k| > K we have |x + k| >= |k| - 1/2, and successive
    terms shrink by at least exp(-(K+1)/(2t)), so one side of the tail is at most
    exp(-(K+1/2)^2/(4t)) / (1 - exp(-(K+1)/(2t))).
    """
    log_pref = math.log(2.0) - 0.5 * math.log(4.0 * math.pi * t)
    log_tol = math.log(tol)

    def log_tail(K):
        return log_pref - (K + 0.5) ** 2 / (4.0 * t) - math.log(-math.expm1(-(K + 1) / (2.0 * t)))

    K = max(0, int(math.sqrt(4.0 * t * max(0.0, log_pref - log_tol))) - 2)
    while K > 0 and log_tail(K - 1) <= log_tol:
        K -= 1
    while log_tail(K) > log_tol:
        K += 1
        if K > MAX_GAUSS_TERMS:
            raise ToleranceTooTight(
                f"Gaussian sum needs more than {MAX_GAUSS_TERMS} terms at t={t}; use the Fourier form"
            )
    return K, math.exp(log_tail(K))


@lru_cache(maxsize=4096)
def _fourier_radius(t: float, tol: float) -> tuple[int, float]:
    """Smallest L with 2 sum_{l>L} exp(-4 pi^2 l^2 t) certified below tol."""
    a = _FOUR_PI_SQ * t
    log_tol = math.log(tol)

    def log_tail(L):
        return math.log(2.0) - a * (L + 1) ** 2 - math.log(-math.expm1(-a * (2 * L + 3)))

    L = max(0, int(math.sqrt(max(0.0, math.log(2.0) - log_tol) / a)) - 2)
    while L > 0 and log_tail(L - 1) <= log_tol:
        L -= 1
    while log_tail(L) > log_tol:
        L += 1
        if L > MAX_FOURIER_TERMS:
            raise ToleranceTooTight(
                f"Fourier sum needs more than {MAX_FOURIER_TERMS} terms at t={t}; use the Gaussian form"
            )
    return L, math.exp(log_tail(L))


def _cos2pi(x: np.ndarray, l: np.ndarray) -> np.ndarray:
    """cos(2 pi l x) for every pair, with l*x reduced mod 1 without rounding loss."""
    hi = np.round(x * 2.0**26) / 2.0**26  # exact split, hi*l exact for l < 2**27
    lo = x - hi
    a = np.multiply.outer(hi, l)
    a -= np.round(a)
    a += np.multiply.outer(lo, l)
    return np.cos(2.0 * math.pi * a)


def _gauss_axis(x: np.ndarray, t: float, tol: float) -> tuple[np.ndarray, float]:
    K, tail = _gauss_radius(t, tol)
    k = np.arange(-K, K + 1, dtype=float)
    terms = np.exp(-np.add.outer(x, k) ** 2 / (4.0 * t))
    return terms.sum(axis=-1) / math.sqrt(4.0 * math.pi * t), tail


def _fourier_axis(x: np.ndarray, t: float, tol: float) -> tuple[np.ndarray, float]:
    L, tail = _fourier_radius(t, tol)
    if L == 0:
        return np.ones_like(x), tail
    l = np.arange(1, L + 1)
    w = np.exp(-_FOUR_PI_SQ * t * l.astype(float) ** 2)
    # ascending magnitude order keeps the rounding of the small terms
    terms = (_cos2pi(x, l) * w)[..., ::-1]
    return 1.0 + 2.0 * terms.sum(axis=-1), tail


def _product_error(factors: np.ndarray, e: float) -> np.ndarray:
    """Bound on |prod(S_i + eps_i) - prod(S_i)| given |eps_i| <= e, per point.

    Telescoped so no cancellation happens when e is tiny.
    """
    a = np.abs(factors)
    n = a.shape[-1]
    total = np.zeros(a.shape[:-1])
    for i in range(n):
        term = np.full(a.shape[:-1], e)
        for j in range(n):
            if j < i:
                term = term * (a[..., j] + e)
            elif j > i:
                term = term * a[..., j]
        total += term
    return total


def kernel_values(
    points,
    t: float,
    tol: float = DEFAULT_TOL,
    representation: Representation | str = Representation.AUTO,
    switch_t: float = DEFAULT_SWITCH_T,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised phi_t at an array of points.

    ``points`` has shape ``(..., n)``; coordinates are reduced mod 1 first.
    Returns ``(values, error_bounds)`` with the leading shape of ``points``;
    every error bound is at most ``tol``.
    """
    t = check_time(t)
    if not tol > 0:
        raise ValueError("tol must be positive")
    pts = reduce_mod1(points)
    if pts.ndim == 0:
        pts = pts.reshape(1)
    n = pts.shape[-1]
    rep = KernelConfig(tol, switch_t, representation).choose(t)

    # a-priori bound on each axis factor: phi_t(0) <= 1 + sqrt(pi/t)
    big = 1.0 + math.sqrt(math.pi / t) + tol
    axis_tol = tol / (n * big ** (n - 1))
    axis = _gauss_axis if rep is Representation.GAUSSIAN else _fourier_axis
    factors = np.empty(pts.shape)
    tail = 0.0
    for i in range(n):
        factors[..., i], tail = axis(pts[..., i], t, axis_tol)
    values = np.prod(factors, axis=-1)
    errors = np.minimum(_product_error(factors, tail), tol)
    return values, errors


# --------------------------------------------------------------------------- scalar API


def _as_point(x) -> TorusPoint:
    return x if isinstance(x, TorusPoint) else TorusPoint(x)


def _single(x, t, tol, rep) -> KernelValue:
    x = _as_point(x)
    vals, errs = kernel_values(np.array([x.coords]), t, tol, rep)
    return KernelValue(float(vals[0]), float(errs[0]), Representation(rep))


def eval_gaussian(x, t: float, tol: float = DEFAULT_TOL) -> KernelValue:
    """phi_t(x) from the wrapped-Gaussian sum, certified to ``tol``."""
    return _single(x, t, tol, Representation.GAUSSIAN)


def eval_fourier(x, t: float, tol: float = DEFAULT_TOL) -> KernelValue:
    """phi_t(x) from the cosine series, certified to ``tol``."""
    return _single(x, t, tol, Representation.FOURIER)


def evaluate(x, t: float, cfg: KernelConfig | None = None) -> KernelValue:
    """phi_t(x) with the representation picked by ``cfg`` (Gaussian for small t)."""
    cfg = cfg or KernelConfig()
    t = check_time(t)
    return _single(x, t, cfg.tol, cfg.choose(t))


def eval_waveguide(z: WaveguidePoint, t: float, cfg: KernelConfig | None = None) -> KernelValue:
    """Waveguide kernel: torus kernel times the Euclidean heat kernel on R^m."""
    t = check_time(t)
    torus = evaluate(z.torus_part, t, cfg)
    y2 = sum(c * c for c in z.euclidean_part)
    g = (4.0 * math.pi * t) ** (-z.m / 2.0) * math.exp(-y2 / (4.0 * t))
    return KernelValue(torus.value * g, torus.error_bound * g, torus.representation)


# --------------------------------------------------------------------------- bounds


def lower_bound(x, t: float) -> float:
    x = _as_point(x)
    t = check_time(t)
    r2 = sum(c * c for c in x.coords)
    return (4.0 * math.pi * t) ** (-x.n / 2.0) * math.exp(-r2 / (4.0 * t))


def upper_bound(x, t: float) -> float:
    x = _as_point(x)
    t = check_time(t)
    r2 = sum(c * c for c in x.coords)
    return 2.0**x.n * (1.0 + math.sqrt(math.pi / t)) ** x.n * math.exp(-r2 / (4.0 * t))


def waveguide_bounds(z: WaveguidePoint, t: float) -> tuple[float, float]:
    t = check_time(t)
    n, m = z.n, z.m
    e = math.exp(-(z.norm() ** 2) / (4.0 * t))
    lo = (4.0 * math.pi * t) ** (-(n + m) / 2.0) * e
    hi = 2.0**n * (1.0 + math.sqrt(math.pi / t)) ** n * (4.0 * math.pi * t) ** (-m / 2.0) * e
    return lo, hi


def ladder_1d(x: float, t: float, tol: float = DEFAULT_TOL) -> tuple[float, float, float, float, float]:
    """The five-term chain for n = 1, in increasing order when it holds:

    (4 pi t)^(-1/2) g,  phi_t(0) g,  phi_t(x),  2 phi_t(0) g,  2 (1 + sqrt(pi/t)) g
    with g = exp(-x^2 / (4t)).
    """
    x = float(reduce_mod1(x))
    t = check_time(t)
    g = math.exp(-x * x / (4.0 * t))
    phi0 = evaluate(0.0, t, KernelConfig(tol)).value
    phix = evaluate(x, t, KernelConfig(tol)).value
    return (
        (4.0 * math.pi * t) ** -0.5 * g,
        phi0 * g,
        phix,
        2.0 * phi0 * g,
        2.0 * (1.0 + math.sqrt(math.pi / t)) * g,
    )


# --------------------------------------------------------------------------- decomposition


def split_radius(n: int, R: float) -> float:
    return math.sqrt(2.0 * n * R)


def split(x, t: float, R: float, cfg: KernelConfig | None = None) -> tuple[float, float]:
    """(near, far) parts of phi_t(x), cut at |x| = sqrt(2 n R)."""
    x = _as_point(x)
    t = check_time(t)
    if not (0.0 < t < R < 0.5):
        raise InvalidWindow(f"need 0 < t < R < 1/2, got t={t}, R={R}")
    v = evaluate(x, t, cfg).value
    if x.norm() <= split_radius(x.n, R):
        return v, 0.0
    return 0.0, v


# --------------------------------------------------------------------------- mass


def _phi1(s: float, t: float) -> float:
    return float(kernel_values(np.array([[s]]), t, 1e-15)[0][0])


def _axis_mass(a: float, b: float, t: float, rtol: float) -> float:
    """Integral of the 1-D kernel over [a, b] within [-1/2, 1/2]."""
    if b <= a:
        return 0.0
    pts = [0.0] if a < 0.0 < b else None
    val, _ = integrate.quad(_phi1, a, b, args=(t,), epsabs=0.0, epsrel=rtol, limit=200, points=pts)
    return val


def _outside_mass(rho: float, t: float, n: int, rtol: float, cache: dict) -> float:
    key = (rho, n)
    if key in cache:
        return cache[key]
    if rho <= 0.0:
        out = _axis_mass(-0.5, 0.5, t, rtol) ** n
    elif n == 1:
        out = 2.0 * _axis_mass(rho, 0.5, t, rtol) if rho < 0.5 else 0.0
    else:
        cut = min(rho, 0.5)

        def inner(s):
            r = math.sqrt(max(rho * rho - s * s, 0.0))
            return _phi1(s, t) * _outside_mass(r, t, n - 1, rtol, cache)

        near, _ = integrate.quad(inner, 0.0, cut, epsabs=0.0, epsrel=rtol, limit=200)
        far = _axis_mass(cut, 0.5, t, rtol) * _outside_mass(0.0, t, n - 1, rtol, cache)
        out = 2.0 * (near + far)
    cache[key] = out
    return out


def tail_mass(delta: float, t: float, tol: float = 1e-10, n: int = 1) -> float:
    """Mass of phi_t over {x in Q_n : |x| >= delta}.

    ``delta = 0`` gives the total mass (one).  The integral is computed by
    nested adaptive Gauss-Kronrod quadrature in relative mode, so tiny tails
    keep their relative accuracy.
    """
    t = check_time(t)
    if not (0.0 <= delta < math.sqrt(n) / 2.0):
        raise InvalidDelta(f"delta must lie in [0, sqrt(n)/2), got {delta}")
    rtol = min(max(tol, 1e-13), 1e-8)
    return _outside_mass(float(delta), t, n, rtol, {})
