"""Weight classes D_p^T and D_p^WG, companion weights, and an example catalog.

A weight v is in D_p^T (for a given t0) when

    int_{Q_n} (v^{-1/p}(x) phi_{t0}(x))^{p'} dx < inf,

and in D_p^WG when

    int_{Q_n x R^m} (v^{-1/p}(x, y) exp(-|y|^2 / (4 t0)))^{p'} dx dy < inf.

Divergence is never inferred from quadrature alone.  A NonMember verdict
always rests on the declared local behaviour at a singularity (power
counting) or on the declared growth class in the euclidean directions.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy import integrate

from .errors import DivergentIntegral, InvalidExponent, NonPositiveWeight
from .grid import read_csv
from .kernel import check_time, kernel_values, reduce_mod1

__all__ = [
    "Status",
    "Verdict",
    "ConjugateExponent",
    "Singularity",
    "GrowthKind",
    "Growth",
    "WeightSpec",
    "parse_weight",
    "check_Dp_T",
    "check_Dp_WG",
    "Companion",
    "companion_weight_T",
    "companion_weight_WG",
    "CatalogCase",
    "CatalogEntry",
    "catalog",
    "run_catalog",
    "remark_function",
    "showcase_pair",
]

MAX_LEVELS = 60


# --------------------------------------------------------------------------- small types


class Status(str, enum.Enum):
    MEMBER = "Member"
    NONMEMBER = "NonMember"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Verdict:
    status: Status
    estimate: float
    tail_bound: float
    levels: int
    note: str = field(default="", compare=False)


@dataclass(frozen=True)
class ConjugateExponent:
    p: float
    p_prime: float

    @classmethod
    def of(cls, p: float) -> "ConjugateExponent":
        p = float(p)
        if not (p >= 1.0) or math.isnan(p) or math.isinf(p):
            raise InvalidExponent(f"p must be a finite number >= 1, got {p}")
        if p == 1.0:
            return cls(1.0, math.inf)
        return cls(p, p / (p - 1.0))

    @property
    def ratio(self) -> float:
        """p'/p, the exponent applied to 1/v inside the membership integral."""
        return 1.0 / (self.p - 1.0)


@dataclass(frozen=True)
class Singularity:
    """Declared local behaviour v ~ |x - x0|^beta (ln(e/|x - x0|))^gamma near x0."""

    point: tuple[float, ...]
    beta: float
    gamma: float = 0.0


class GrowthKind(str, enum.Enum):
    BOUNDED = "bounded"
    POLYNOMIAL = "polynomial"
    GAUSSIAN = "gaussian"
    SUPEREXPONENTIAL = "superexponential"
    UNDECLARED = "undeclared"


@dataclass(frozen=True)
class Growth:
    """Behaviour of v for large |y|, up to bounded factors.

    polynomial: (1 + |y|)^rate; gaussian: exp(rate |y|^2);
    superexponential: exp(rate |y|^power) with power > 2.
    """

    kind: GrowthKind = GrowthKind.BOUNDED
    rate: float = 0.0
    power: float = 3.0

    def log_model(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.kind is GrowthKind.POLYNOMIAL:
            return self.rate * np.log1p(r)
        if self.kind is GrowthKind.GAUSSIAN:
            return self.rate * r**2
        if self.kind is GrowthKind.SUPEREXPONENTIAL:
            return self.rate * r**self.power
        return np.zeros_like(r)


@dataclass(frozen=True)
class WeightSpec:
    name: str
    evaluator: Callable[[np.ndarray], np.ndarray]
    n: int = 1
    m: int = 0
    singularities: tuple[Singularity, ...] = ()
    growth: Growth = Growth()

    def __call__(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        if pts.shape[-1] != self.n + self.m:
            raise ValueError(f"{self.name}: expected points with {self.n + self.m} coordinates")
        return np.asarray(self.evaluator(pts), dtype=float)


def _torus_norm(pts: np.ndarray, n: int) -> np.ndarray:
    return np.linalg.norm(reduce_mod1(pts[..., :n]), axis=-1)


def _y2(pts: np.ndarray, n: int) -> np.ndarray:
    return np.sum(pts[..., n:] ** 2, axis=-1)


def _make_const(c: float, n: int, m: int) -> WeightSpec:
    if not c > 0:
        raise NonPositiveWeight("constant weight must be positive")
    return WeightSpec(f"const:{c:g}", lambda p: np.full(p.shape[:-1], c), n, m)


def _make_powx(beta: float, gamma: float, n: int, m: int) -> WeightSpec:
    def ev(p):
        r = _torus_norm(p, n)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = r**beta
            if gamma:
                out = out * (1.0 - np.log(r)) ** gamma
        if gamma:
            # the power wins over the logarithm at the singular point
            out = np.where(r == 0, 0.0 if beta > 0 or (beta == 0 and gamma < 0) else np.inf, out)
        return out

    name = f"powx:{beta:g}" if not gamma else f"powxlog:{beta:g},{gamma:g}"
    sing = (Singularity((0.0,) * n, beta, gamma),)
    return WeightSpec(name, ev, n, m, sing)


def _make_gaussy(a: float, n: int, m: int) -> WeightSpec:
    return WeightSpec(f"gaussy:{a:g}", lambda p: np.exp(a * _y2(p, n)), n, m, (), Growth(GrowthKind.GAUSSIAN, a))


def _make_cubey(a: float, n: int, m: int) -> WeightSpec:
    return WeightSpec(
        f"cubey:{a:g}",
        lambda p: np.exp(a * _y2(p, n) ** 1.5),
        n,
        m,
        (),
        Growth(GrowthKind.SUPEREXPONENTIAL, a, 3.0),
    )


def _make_file(path: str) -> WeightSpec:
    f = read_csv(path)
    g = f.grid
    if np.any(f.values <= 0):
        raise NonPositiveWeight(f"{path}: weight samples must be strictly positive")
    vals = f.values

    def ev(p):
        idx = []
        for i in range(g.ndim):
            c = p[..., i]
            if i < g.dim_torus:
                j = np.floor((reduce_mod1(c) + 0.5) * g.N + 0.5).astype(int) % g.N
            else:
                j = np.clip(np.floor((c + g.Y) / (2 * g.Y) * g.N + 0.5).astype(int), 0, g.N - 1)
            idx.append(j)
        return vals[tuple(idx)]

    return WeightSpec(f"file:{path}", ev, g.dim_torus, g.dim_euclid, (), Growth(GrowthKind.UNDECLARED))


def parse_weight(text: str, n: int = 1, m: int = 0) -> WeightSpec:
    """Parse ``const:c``, ``powx:b``, ``powxlog:b,g``, ``gaussy:a``, ``cubey:a`` or ``file:path``."""
    kind, _, arg = text.strip().partition(":")
    if kind == "file":
        return _make_file(arg)
    try:
        nums = [float(s) for s in arg.split(",")] if arg else []
        if kind == "const":
            return _make_const(nums[0] if nums else 1.0, n, m)
        if kind == "powx":
            return _make_powx(nums[0], 0.0, n, m)
        if kind == "powxlog":
            return _make_powx(nums[0], nums[1], n, m)
        if kind in ("gaussy", "cubey"):
            if m < 1:
                raise ValueError(f"{kind} needs at least one euclidean dimension")
            return (_make_gaussy if kind == "gaussy" else _make_cubey)(nums[0], n, m)
    except NonPositiveWeight:
        raise
    except (IndexError, ValueError) as exc:
        raise ValueError(f"bad weight spec {text!r}: {exc}") from exc
    raise ValueError(f"unknown weight kind {kind!r} in {text!r}")


# --------------------------------------------------------------------------- power counting


def _local_exponents(s: Singularity, ratio: float) -> tuple[float, float]:
    """Exponents (s, sigma) of the integrand |x|^-s (ln e/|x|)^-sigma near the singularity."""
    return s.beta * ratio, s.gamma * ratio


def _diverges(s_exp: float, sigma: float, n: int) -> bool:
    return s_exp > n or (s_exp == n and sigma <= 1.0)


def _inner_share(s_exp: float, sigma: float, n: int, b: float) -> float:
    """int_0^{b/2} g / int_{b/2}^{b} g for the radial profile g = r^(n-1-s) (ln e/r)^-sigma."""

    def upto(c):  # int_0^c g dr, substituting r = exp(-u)
        u0 = math.log(1.0 / c)
        k = n - s_exp
        if k == 0:
            return (1.0 + u0) ** (1.0 - sigma) / (sigma - 1.0)
        val, _ = integrate.quad(lambda u: math.exp(-k * (u - u0)) * (1.0 + u) ** -sigma, u0, math.inf)
        return val * math.exp(-k * u0)

    inner = upto(b / 2.0)
    return inner / (upto(b) - inner)


# --------------------------------------------------------------------------- shell quadrature


def _box_midpoints(n: int, lo: np.ndarray, w: float, k: int) -> np.ndarray:
    """Midpoints of a k^n subdivision of each box [lo_i, lo_i + w]^n; returns (boxes*k^n, n)."""
    c = (np.arange(k) + 0.5) * (w / k)
    sub = np.stack(np.meshgrid(*([c] * n), indexing="ij"), axis=-1).reshape(-1, n)
    return (lo[:, None, :] + sub[None, :, :]).reshape(-1, n)


def _shell_boxes(n: int, b: float) -> np.ndarray:
    """Lower corners of the 4^n - 2^n boxes of side b/2 tiling [-b, b]^n minus [-b/2, b/2]^n."""
    idx = np.stack(np.meshgrid(*([np.arange(-2, 2)] * n), indexing="ij"), axis=-1).reshape(-1, n)
    keep = ~np.all((idx == -1) | (idx == 0), axis=1)
    return idx[keep] * (b / 2.0)


def _shell_integral(F, n: int, center: np.ndarray, b: float, rtol: float, scale: float) -> float:
    w = b / 2.0
    lo = _shell_boxes(n, b)
    cell = w**n
    kmax = 1024 if n == 1 else 64
    k = 2 if n > 1 else 4
    prev = None
    while True:
        pts = _box_midpoints(n, lo, w, k)
        mid = float(np.sum(F(center + pts))) * cell / k**n
        if prev is not None:
            rich = (4.0 * mid - prev) / 3.0
            if abs(mid - prev) <= rtol * max(abs(rich), scale) or k >= kmax:
                return rich
        prev = mid
        k *= 2


class _ShellResult(NamedTuple):
    estimate: float
    tail: float
    levels: int
    converged: bool
    shells: tuple


def _integrate_shells(F, n: int, center, rtol: float, model: tuple[float, float], extra_levels: int = 0):
    """Integrate F over the unit cube centred at ``center`` by dyadic cubic shells.

    The part inside the innermost shell is estimated from the declared radial
    model, so convergence is judged on sum + remainder.
    """
    center = np.asarray(center, dtype=float)
    s_exp, sigma = model
    shells = []
    total = 0.0
    rem = math.inf
    stop_at = None
    expected = 2.0 ** (s_exp - n)
    for j in range(MAX_LEVELS + extra_levels):
        b = 0.5 * 2.0**-j
        I = _shell_integral(F, n, center, b, 0.1 * rtol, abs(total))
        shells.append(I)
        total += I
        rem = I * _inner_share(s_exp, sigma, n, b) if I > 0 else 0.0
        if stop_at is None and j >= 2:
            ratio = I / shells[-2] if shells[-2] > 0 else 0.0
            consistent = ratio <= 1.25 * expected + 0.05
            if consistent and rem <= rtol * (total + rem):
                stop_at = j + extra_levels
        if stop_at is not None and j >= stop_at:
            return _ShellResult(total + rem, rem, j + 1, True, tuple(shells))
        if stop_at is None and j + 1 >= MAX_LEVELS:
            break
    return _ShellResult(total + rem, rem, len(shells), False, tuple(shells))


# --------------------------------------------------------------------------- D_p^T


def _singular_model(v: WeightSpec, ratio: float) -> tuple[np.ndarray, tuple[float, float]]:
    if len(v.singularities) > 1:
        raise ValueError("at most one declared torus singularity is supported")
    if v.singularities:
        s = v.singularities[0]
        return np.asarray(s.point[: v.n], dtype=float), _local_exponents(s, ratio)
    return np.zeros(v.n), (0.0, 0.0)


def _sup_samples(G, n: int, center: np.ndarray) -> tuple[float, float]:
    """Max of G on a uniform grid and on dyadic shells near ``center`` at two resolutions."""
    out = []
    for N in ((2048, 4096) if n == 1 else (128, 256)):
        ax = -0.5 + (np.arange(N) + 0.5) / N
        pts = np.stack(np.meshgrid(*([ax] * n), indexing="ij"), axis=-1).reshape(-1, n)
        best = float(np.max(G(center + pts)))
        for j in range(MAX_LEVELS):
            b = 0.5 * 2.0**-j
            best = max(best, float(np.max(G(center + _box_midpoints(n, _shell_boxes(n, b), b / 2, 4)))))
        out.append(best)
    return out[0], out[1]


def check_Dp_T(v: WeightSpec, p: float, t0: float, tol: float = 1e-8, extra_levels: int = 0) -> Verdict:
    """Decide v in D_p^T at time t0.

    ``tol`` is relative to the value of the integral.  For p = 1 the test is
    essential boundedness of phi_{t0} / v.
    """
    cp = ConjugateExponent.of(p)
    t0 = check_time(t0)
    if v.m:
        raise ValueError("check_Dp_T needs a weight on the torus (m = 0)")
    n = v.n

    if cp.p == 1.0:
        for s in v.singularities:
            if s.beta > 0 or (s.beta == 0 and s.gamma < 0):
                return Verdict(Status.NONMEMBER, math.inf, math.inf, 0, "1/v unbounded at a declared singularity")

        def G(x):
            return kernel_values(x, t0, 1e-12)[0] / v(x)

        center = np.asarray(v.singularities[0].point if v.singularities else np.zeros(n), dtype=float)
        coarse, fine = _sup_samples(G, n, center)
        if math.isfinite(fine) and abs(fine - coarse) <= 1e-3 * fine:
            return Verdict(Status.MEMBER, fine, abs(fine - coarse), 2, "sampled supremum")
        return Verdict(Status.INCONCLUSIVE, fine, abs(fine - coarse), 2, "sampled supremum not settled")

    center, model = _singular_model(v, cp.ratio)
    if v.singularities and _diverges(*model, n):
        return Verdict(
            Status.NONMEMBER, math.inf, math.inf, 0, f"power counting: exponent {model[0]:g} at dimension {n}"
        )
    q = cp.p_prime

    def F(x):
        return kernel_values(x, t0, 1e-13)[0] ** q * v(x) ** (-cp.ratio)

    res = _integrate_shells(F, n, center, tol, model, extra_levels)
    if res.converged:
        return Verdict(Status.MEMBER, res.estimate, res.tail, res.levels)
    if v.singularities:
        return Verdict(Status.MEMBER, res.estimate, res.tail, res.levels, "innermost part from declared local model")
    return Verdict(Status.INCONCLUSIVE, res.estimate, res.tail, res.levels, "shell sums did not settle")


# --------------------------------------------------------------------------- D_p^WG


def _growth_rate(v: WeightSpec, cp: ConjugateExponent, t0: float) -> tuple[bool | None, str]:
    """Does the euclidean tail converge?  None when the class is undeclared."""
    g = v.growth
    if g.kind is GrowthKind.UNDECLARED:
        return None, "undeclared growth"
    if g.kind is GrowthKind.GAUSSIAN:
        kappa = 1.0 / (4.0 * t0) + g.rate / cp.p  # integrand ~ exp(-p' kappa |y|^2)
        return kappa > 0, f"gaussian class: decay rate p'({1 / (4 * t0):g} + {g.rate:g}/p) = {cp.p_prime * kappa:g}"
    if g.kind is GrowthKind.SUPEREXPONENTIAL:
        return g.rate > 0, f"superexponential class with rate {g.rate:g}"
    return True, f"{g.kind.value} class"


def _log_model_integrand(v: WeightSpec, cp: ConjugateExponent, t0: float, r):
    """log of the radial profile of (v^{-1/p} e^{-|y|^2/4t0})^{p'} implied by the growth class."""
    r = np.asarray(r, dtype=float)
    return -cp.p_prime * r**2 / (4.0 * t0) - cp.ratio * v.growth.log_model(r)


def _box_quadrature(F, n: int, m: int, Y: float, rtol: float) -> float:
    """Midpoint rule on Q_n x [-Y, Y]^m, doubled until it settles (integrands are smooth)."""
    kx, ky = 16, max(64, int(16 * Y))
    prev = None
    while True:
        ax = -0.5 + (np.arange(kx) + 0.5) / kx
        ay = -Y + (np.arange(ky) + 0.5) * (2 * Y / ky)
        mesh = np.meshgrid(*([ax] * n + [ay] * m), indexing="ij")
        pts = np.stack(mesh, axis=-1).reshape(-1, n + m)
        val = float(np.sum(F(pts))) * (1.0 / kx) ** n * (2 * Y / ky) ** m
        if prev is not None and abs(val - prev) <= rtol * abs(val):
            return val
        if kx**n * ky**m > 4_000_000:
            return val
        prev = val
        kx, ky = kx * 2, ky * 2


def _tail_beyond(v: WeightSpec, cp: ConjugateExponent, t0: float, F, Y: float) -> float:
    """Model-based bound on the integral over |y|_inf > Y.

    The class profile is scaled by the worst ratio integrand/profile seen on the
    face |y|_inf = Y, then integrated radially over |y| > Y.
    """
    n, m = v.n, v.m
    k = 32
    ax = -0.5 + (np.arange(k) + 0.5) / k
    face = np.linspace(-Y, Y, 2 * k + 1)
    cols = [ax] * n + [face] * (m - 1) + [np.array([Y, -Y])]
    pts = np.stack(np.meshgrid(*cols, indexing="ij"), axis=-1).reshape(-1, n + m)
    r = np.linalg.norm(pts[:, n:], axis=-1)
    with np.errstate(divide="ignore", over="ignore"):
        ratio = np.max(F(pts) / np.exp(_log_model_integrand(v, cp, t0, r)))
    if not np.isfinite(ratio):
        return math.inf
    sphere = 2.0 * math.pi ** (m / 2.0) / math.gamma(m / 2.0)
    peak = float(_log_model_integrand(v, cp, t0, Y))

    def radial(s):
        return s ** (m - 1) * math.exp(float(_log_model_integrand(v, cp, t0, s)) - peak)

    val, _ = integrate.quad(radial, Y, math.inf, limit=200)
    return float(ratio) * sphere * val * math.exp(peak)


def check_Dp_WG(v: WeightSpec, p: float, t0: float, tol: float = 1e-8, Ymax: float = 64.0) -> Verdict:
    """Decide v in D_p^WG at time t0, integrating over Q_n x [-Y, Y]^m with Y doubling up to Ymax."""
    cp = ConjugateExponent.of(p)
    t0 = check_time(t0)
    if v.m < 1:
        raise ValueError("check_Dp_WG needs at least one euclidean dimension")
    n, m = v.n, v.m
    ok, why = _growth_rate(v, cp, t0)

    if cp.p == 1.0:
        g = v.growth
        bounded = None
        if g.kind is GrowthKind.GAUSSIAN:
            bounded = g.rate + 1.0 / (4.0 * t0) >= 0
        elif g.kind is GrowthKind.SUPEREXPONENTIAL:
            bounded = g.rate > 0
        elif g.kind in (GrowthKind.BOUNDED, GrowthKind.POLYNOMIAL):
            bounded = True
        for s in v.singularities:
            if s.beta > 0 or (s.beta == 0 and s.gamma < 0):
                bounded = False
        if bounded is False:
            return Verdict(Status.NONMEMBER, math.inf, math.inf, 0, "growth class makes exp(-|y|^2/4t0)/v unbounded")
        vals = []
        # beyond Ysafe both factors leave the floating-point range; the class covers it
        ysafe = min(Ymax, math.sqrt(4.0 * t0 * 600.0))
        for k in (64, 128):
            ax = -0.5 + (np.arange(k) + 0.5) / k
            ay = np.linspace(-ysafe, ysafe, 16 * k + 1)
            pts = np.stack(np.meshgrid(*([ax] * n + [ay] * m), indexing="ij"), axis=-1).reshape(-1, n + m)
            with np.errstate(over="ignore"):
                vals.append(float(np.max(np.exp(-_y2(pts, n) / (4.0 * t0)) / v(pts))))
        if bounded and math.isfinite(vals[1]) and abs(vals[1] - vals[0]) <= 1e-3 * vals[1]:
            return Verdict(Status.MEMBER, vals[1], abs(vals[1] - vals[0]), 2, "sampled supremum")
        return Verdict(Status.INCONCLUSIVE, vals[1], math.inf, 2, "sampled supremum not certified")

    if ok is False:
        return Verdict(Status.NONMEMBER, math.inf, math.inf, 0, why)
    if v.singularities:
        for s in v.singularities:
            if _diverges(*_local_exponents(s, cp.ratio), n):
                return Verdict(Status.NONMEMBER, math.inf, math.inf, 0, "power counting at a torus singularity")
        return Verdict(Status.INCONCLUSIVE, math.nan, math.inf, 0, "torus singularities are not integrated here")

    q = cp.p_prime

    def F(z):
        with np.errstate(over="ignore", divide="ignore"):
            return np.exp(-q * _y2(z, n) / (4.0 * t0)) * v(z) ** (-cp.ratio)

    Y = min(1.0, Ymax)
    prev = None
    levels = 0
    while True:
        levels += 1
        est = _box_quadrature(F, n, m, Y, 0.1 * tol)
        if ok:
            tail = _tail_beyond(v, cp, t0, F, Y)
            if tail <= tol * est:
                return Verdict(Status.MEMBER, est + tail, tail, levels, why)
        elif prev is not None and abs(est - prev) <= tol * abs(est):
            return Verdict(Status.MEMBER, est, abs(est - prev), levels, "box increments settled")
        if Y >= Ymax:
            tail = _tail_beyond(v, cp, t0, F, Y) if ok else math.inf
            return Verdict(Status.INCONCLUSIVE, est, tail, levels, f"not settled at Y = {Y:g}")
        prev = est
        Y = min(2.0 * Y, Ymax)


# --------------------------------------------------------------------------- companion weights


class Companion(NamedTuple):
    g: float
    u: float
    levels: int


def _norm_power(integral: float, cp: ConjugateExponent) -> float:
    # ||.||_{p'}^p = (int |.|^{p'})^{p/p'}
    return integral ** (cp.p / cp.p_prime)


def companion_weight_T(v: WeightSpec, p: float, t: float, x, tol: float = 1e-8) -> Companion:
    """g^t(x) = ||phi_t(x - .) v^{-1/p}||_{p'}^p and u(x) = min(1, 1/g^t(x))."""
    cp = ConjugateExponent.of(p)
    if cp.p == 1.0:
        raise InvalidExponent("companion weights need p > 1")
    t = check_time(t)
    if v.m:
        raise ValueError("companion_weight_T needs a torus weight")
    x = reduce_mod1(np.atleast_1d(np.asarray(x, dtype=float)))
    center, model = _singular_model(v, cp.ratio)
    if v.singularities and _diverges(*model, v.n):
        raise DivergentIntegral(f"{v.name}: v^(-p'/p) is not integrable near its singularity")
    if not v.singularities:
        center = x
    q = cp.p_prime

    def F(y):
        return kernel_values(x - y, t, 1e-13)[0] ** q * v(y) ** (-cp.ratio)

    res = _integrate_shells(F, v.n, center, tol, model)
    if not (res.converged or v.singularities) or not math.isfinite(res.estimate):
        raise DivergentIntegral(f"{v.name}: shell sums for g^t did not settle")
    g = _norm_power(res.estimate, cp)
    return Companion(g, min(1.0, 1.0 / g), res.levels)


def companion_weight_WG(v: WeightSpec, p: float, t: float, z, tol: float = 1e-8, Ymax: float = 64.0) -> Companion:
    """h^t(z) = ||phi^WG_t(z - .) v^{-1/p}||_{p'}^p and u(z) = min(1, exp(-|z|^2)/h^t(z))."""
    cp = ConjugateExponent.of(p)
    if cp.p == 1.0:
        raise InvalidExponent("companion weights need p > 1")
    t = check_time(t)
    n, m = v.n, v.m
    if m < 1:
        raise ValueError("companion_weight_WG needs a waveguide weight")
    if v.singularities:
        raise ValueError("companion_weight_WG supports weights without torus singularities")
    ok, why = _growth_rate(v, cp, t)
    if ok is False:
        raise DivergentIntegral(f"{v.name}: {why} does not decay at t = {t}")
    z = np.asarray(z, dtype=float).reshape(-1)
    x0, y0 = reduce_mod1(z[:n]), z[n:]
    q = cp.p_prime

    def F(w):
        k = kernel_values(x0 - w[..., :n], t, 1e-13)[0]
        dy2 = np.sum((y0 - w[..., n:]) ** 2, axis=-1)
        gauss = (4.0 * math.pi * t) ** (-m / 2.0) * np.exp(-dy2 / (4.0 * t))
        with np.errstate(over="ignore", divide="ignore"):
            return (k * gauss) ** q * v(w) ** (-cp.ratio)

    def shifted(w):
        w = w.copy()
        w[..., n:] += y0
        return F(w)

    W = max(1.0, 8.0 * math.sqrt(t))
    prev = None
    levels = 0
    while True:
        levels += 1
        est = _box_quadrature(shifted, n, m, W, 0.1 * tol)
        if prev is not None and abs(est - prev) <= tol * abs(est):
            break
        if W >= Ymax:
            raise DivergentIntegral(f"{v.name}: h^t did not settle within |y| <= {Ymax}")
        prev = est
        W = min(2.0 * W, Ymax)
    h = _norm_power(est, cp)
    damp = math.exp(-float(np.sum(np.concatenate([x0, y0]) ** 2)))
    return Companion(h, min(1.0, damp / h), levels)


# --------------------------------------------------------------------------- catalog


@dataclass(frozen=True)
class CatalogCase:
    space: str  # "T" or "WG"
    p: float
    t0: float
    expected: Status


@dataclass(frozen=True)
class CatalogEntry:
    spec: str
    n: int
    m: int
    cases: tuple[CatalogCase, ...]
    reason: str

    def weight(self) -> WeightSpec:
        return parse_weight(self.spec, self.n, self.m)


def _threshold_status(beta: float, p: float, n: int, gamma: float = 0.0) -> Status:
    """Analytic power-counting classification for |x|^beta (ln e/|x|)^gamma."""
    if p == 1.0:
        return Status.NONMEMBER if beta > 0 or (beta == 0 and gamma < 0) else Status.MEMBER
    r = 1.0 / (p - 1.0)
    return Status.NONMEMBER if _diverges(beta * r, gamma * r, n) else Status.MEMBER


def _gauss_status(a: float, p: float, t0: float) -> Status:
    if p == 1.0:
        return Status.MEMBER if a + 1.0 / (4.0 * t0) >= 0 else Status.NONMEMBER
    return Status.MEMBER if 1.0 / (4.0 * t0) + a / p > 0 else Status.NONMEMBER


def catalog() -> list[CatalogEntry]:
    """Example weights with their classification from power counting or tail analysis."""
    M, NM = Status.MEMBER, Status.NONMEMBER
    t0 = 0.05
    out = [
        CatalogEntry(
            "const:1",
            1,
            0,
            tuple(CatalogCase("T", p, t0, M) for p in (1.0, 1.5, 2.0, 3.0)),
            "phi_t0 is bounded on Q_n",
        ),
        CatalogEntry(
            "const:1", 1, 1, tuple(CatalogCase("WG", p, t0, M) for p in (1.0, 2.0, 3.0)), "gaussian decay in y"
        ),
        CatalogEntry("const:2", 2, 0, (CatalogCase("T", 2.0, t0, M),), "phi_t0 is bounded on Q_2"),
    ]
    for n, p, betas in ((1, 2.0, (-1.0, 0.5, 0.75, 1.0, 2.0)), (1, 3.0, (1.5, 2.0, 2.5)), (2, 2.0, (1.5, 2.0))):
        for b in betas:
            out.append(
                CatalogEntry(
                    f"powx:{b:g}",
                    n,
                    0,
                    (CatalogCase("T", p, t0, _threshold_status(b, p, n)),),
                    f"|x|^-{b:g}p'/p against dimension {n}",
                )
            )
    for b in (-1.0, 0.5):
        out.append(CatalogEntry(f"powx:{b:g}", 1, 0, (CatalogCase("T", 1.0, t0, _threshold_status(b, 1.0, 1)),), "1/v bounded?"))
    for b, g in ((1.0, 2.0), (1.0, 1.0), (1.0, 0.5)):
        out.append(
            CatalogEntry(
                f"powxlog:{b:g},{g:g}",
                1,
                0,
                (CatalogCase("T", 2.0, t0, _threshold_status(b, 2.0, 1, g)),),
                "borderline power with logarithmic correction",
            )
        )
    for a in (1.0, -5.0, -10.0, -15.0):
        out.append(
            CatalogEntry(
                f"gaussy:{a:g}",
                1,
                1,
                (CatalogCase("WG", 2.0, t0, _gauss_status(a, 2.0, t0)),),
                "gaussian tail: member iff 1/(4 t0) + a/p > 0",
            )
        )
    out.append(CatalogEntry("gaussy:-5", 1, 1, (CatalogCase("WG", 1.0, t0, _gauss_status(-5.0, 1.0, t0)),), "sup form"))
    out.append(
        CatalogEntry(
            "cubey:-1",
            1,
            1,
            tuple(CatalogCase("WG", p, t, NM) for p in (1.0, 2.0) for t in (0.01, 0.05, 0.25)),
            "v^(-1/p) = exp(|y|^3/p) beats every gaussian",
        )
    )
    out.append(CatalogEntry("cubey:1", 1, 1, (CatalogCase("WG", 2.0, t0, M),), "superexponential decay of 1/v"))
    return out


def run_catalog(entries: Sequence[CatalogEntry] | None = None, tol: float = 1e-8):
    """Yield (entry, case, verdict) for every catalog case."""
    for e in entries if entries is not None else catalog():
        v = e.weight()
        for c in e.cases:
            check = check_Dp_T if c.space == "T" else check_Dp_WG
            yield e, c, check(v, c.p, c.t0, tol)


# --------------------------------------------------------------------------- test data


def remark_function(pts) -> np.ndarray:
    """|x|^-n (ln e/|x|)^-2 on |x| < 1/4, zero elsewhere; integrable but with a non-integrable maximal function."""
    pts = np.asarray(pts, dtype=float)
    n = pts.shape[-1]
    r = np.linalg.norm(reduce_mod1(pts), axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.where(r < 0.25, r**-n * (1.0 - np.log(r)) ** -2.0, 0.0)
    return np.where(r == 0, np.inf, v)


def showcase_pair():
    """(v, p, f) with v = |x| outside D_2^T and f in L^2_v but phi_t * f(0) = +inf on T^1.

    f(x) = |x|^-1 (ln e/|x|)^-0.6 near 0: int f^2 |x| converges, int f does not.
    """

    def f(pts):
        r = np.abs(reduce_mod1(np.asarray(pts, dtype=float)[..., 0]))
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            v = np.where(r < 0.25, (1.0 / r) * (1.0 - np.log(r)) ** -0.6, 0.0)
        return np.where(r == 0, np.inf, v)

    return parse_weight("powx:1"), 2.0, f
