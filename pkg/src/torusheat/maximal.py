"""Discrete maximal operators on torus and waveguide grids.

Ball averages use every node whose offset from the centre satisfies
|offset|^2 <= r^2.  Offsets are visited in a fixed order (by squared length,
then lexicographically), so the running sum for radius r_{i+1} extends the
one for r_i and every operator is a single sweep over the stencil.  The naive
oracle walks the same order node by node and agrees bit for bit.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EmptyBall, InvalidWindow, NotTorusGrid, SupportTooCloseToBoundary
from .grid import Grid, GridFunction, evolve, evolve_torus, support_margin
from .kernel import WaveguidePoint

__all__ = [
    "RadiiSet",
    "TimeSet",
    "ball_average",
    "local_max_op",
    "torus_max_op",
    "waveguide_max_op",
    "heat_max_op",
    "naive_max_op",
    "domination_constant",
    "DominationReport",
    "check_domination",
    "annulus_index",
    "BallK",
    "ball_index_set",
]


# --------------------------------------------------------------------------- supremum sets


@dataclass(frozen=True)
class RadiiSet:
    radii: tuple[float, ...]
    R: float

    def __post_init__(self):
        r = tuple(float(x) for x in self.radii)
        object.__setattr__(self, "radii", r)
        if not r:
            raise ValueError("radii set is empty")
        if not 0 < self.R <= 0.5:
            raise ValueError(f"radius cap must lie in (0, 1/2], got {self.R}")
        if r[0] <= 0 or any(b <= a for a, b in zip(r, r[1:])):
            raise ValueError("radii must be positive and strictly increasing")
        if r[-1] > self.R:
            raise ValueError(f"largest radius {r[-1]} exceeds the cap {self.R}")

    @classmethod
    def default(cls, grid: Grid, R: float) -> "RadiiSet":
        """{h/2 + j h} clipped to (0, R], plus R itself."""
        h = grid.h
        if R < h / 2:
            raise EmptyBall(f"cap {R} is below half a grid step ({h / 2})")
        count = int(math.floor((R - h / 2) / h)) + 1
        radii = [h / 2 + j * h for j in range(count)]
        radii = [r for r in radii if r < R] + [R]
        return cls(tuple(radii), R)


@dataclass(frozen=True)
class TimeSet:
    times: tuple[float, ...]

    def __post_init__(self):
        t = tuple(float(x) for x in self.times)
        object.__setattr__(self, "times", t)
        if len(t) < 2:
            raise ValueError("need at least two times (J >= 1)")
        if any(b >= a for a, b in zip(t, t[1:])):
            raise ValueError("times must be strictly decreasing")
        if not (t[-1] > 0 and t[0] < 0.5):
            raise InvalidWindow("times must lie in (0, 1/2)")

    @property
    def R(self) -> float:
        return self.times[0]

    @classmethod
    def geometric(cls, R: float, J: int = 40) -> "TimeSet":
        if not 0 < R < 0.5:
            raise InvalidWindow(f"need 0 < R < 1/2, got {R}")
        return cls(tuple(R * 2.0**-j for j in range(J + 1)))


# --------------------------------------------------------------------------- stencil


def _stencil(grid: Grid, rmax: float) -> tuple[np.ndarray, np.ndarray]:
    """Integer offsets inside the closed ball of radius rmax, in traversal order."""
    h = np.array(grid.spacing)
    reach = [int(math.floor(rmax / hi + 1e-9)) for hi in h]
    axes = [np.arange(-k, k + 1) for k in reach]
    off = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, grid.ndim)
    d2 = ((off * h) ** 2).sum(axis=1)
    keep = d2 <= rmax * rmax
    off, d2 = off[keep], d2[keep]
    order = np.lexsort(tuple(off[:, i] for i in reversed(range(grid.ndim))) + (d2,))
    return off[order], d2[order]


def _check_radius(grid: Grid, r: float):
    if not r >= grid.h / 2:
        raise EmptyBall(f"radius {r} is below half a grid step ({grid.h / 2}); the ball may be empty")


def _torus_reach_ok(grid: Grid, rmax: float):
    # wrapping a torus axis more than once would count nodes twice
    if grid.dim_torus and rmax > 0.5 + 1e-12:
        raise InvalidWindow(f"radius {rmax} exceeds 1/2 on a torus axis")


def ball_average(f: GridFunction, center: Sequence[int], r: float) -> float:
    """Mean of |f| over the nodes within distance r of ``center``.

    Torus axes wrap; nodes beyond the euclidean box count as zeros.
    """
    g = f.grid
    _check_radius(g, r)
    _torus_reach_ok(g, r)
    off, _ = _stencil(g, r)
    a = np.abs(f.values)
    c = tuple(int(i) for i in center)
    total = 0.0
    for o in off:
        v = _lookup(a, g, c, o)
        total += v
    return total / len(off)


def _lookup(a: np.ndarray, g: Grid, c, o) -> float:
    idx = []
    for i in range(g.ndim):
        j = c[i] + int(o[i])
        if i < g.dim_torus:
            j %= g.N
        elif not 0 <= j < g.N:
            return 0.0
        idx.append(j)
    return float(a[tuple(idx)])


def _padded(a: np.ndarray, g: Grid, off: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    reach = np.abs(off).max(axis=0) if len(off) else np.zeros(g.ndim, int)
    pad = [(int(k), int(k)) for k in reach]
    out = a
    if g.dim_torus:
        out = np.pad(out, pad[: g.dim_torus] + [(0, 0)] * g.dim_euclid, mode="wrap")
    if g.dim_euclid:
        out = np.pad(out, [(0, 0)] * g.dim_torus + pad[g.dim_torus:], mode="constant")
    return out, reach


def local_max_op(f: GridFunction, radii: RadiiSet) -> GridFunction:
    """sup over the radii set of the ball average of |f|, at every node."""
    g = f.grid
    _check_radius(g, radii.radii[0])
    _torus_reach_ok(g, radii.radii[-1])
    off, d2 = _stencil(g, radii.radii[-1])
    ap, reach = _padded(np.abs(f.values), g, off)
    r2 = [r * r for r in radii.radii]
    acc = np.zeros(g.shape)
    out = np.zeros(g.shape)
    ri = 0
    for s in range(len(off)):
        while d2[s] > r2[ri]:
            np.maximum(out, acc / s, out=out)
            ri += 1
        sl = tuple(slice(int(reach[i] + off[s, i]), int(reach[i] + off[s, i]) + g.N) for i in range(g.ndim))
        acc += ap[sl]
    np.maximum(out, acc / len(off), out=out)
    return GridFunction(g, out)


def naive_max_op(f: GridFunction, radii: RadiiSet) -> GridFunction:
    """Node-by-node reference for :func:`local_max_op`; same summation order."""
    g = f.grid
    _check_radius(g, radii.radii[0])
    _torus_reach_ok(g, radii.radii[-1])
    off, d2 = _stencil(g, radii.radii[-1])
    off = off.tolist()
    d2 = d2.tolist()
    a = np.abs(f.values)
    r2 = [r * r for r in radii.radii]
    out = np.zeros(g.shape)
    for c in itertools.product(range(g.N), repeat=g.ndim):
        best = 0.0
        total = 0.0
        ri = 0
        for s, o in enumerate(off):
            while d2[s] > r2[ri]:
                best = max(best, total / s)
                ri += 1
            total += _lookup(a, g, c, o)
        best = max(best, total / len(off))
        out[c] = best
    return GridFunction(g, out)


def torus_max_op(f: GridFunction, radii: RadiiSet | None = None, naive: bool = False) -> GridFunction:
    """M^T: local maximal operator with cap 1/2 on the periodic extension."""
    if not f.grid.is_torus():
        raise NotTorusGrid("torus_max_op needs a pure torus grid")
    radii = radii or RadiiSet.default(f.grid, 0.5)
    return (naive_max_op if naive else local_max_op)(f, radii)


def waveguide_max_op(f: GridFunction, radii: RadiiSet, naive: bool = False) -> GridFunction:
    """M^WG: periodic on torus axes, plain (zero) extension on euclidean axes."""
    g = f.grid
    if g.dim_euclid == 0:
        raise ValueError("waveguide_max_op needs at least one euclidean axis")
    mu = support_margin(f)
    if mu < radii.radii[-1]:
        raise SupportTooCloseToBoundary(
            f"support margin {mu:.4g} is below the radius cap {radii.radii[-1]:.4g}; enlarge Y"
        )
    return (naive_max_op if naive else local_max_op)(f, radii)


def heat_max_op(f: GridFunction, times: TimeSet) -> GridFunction:
    """sup over the time set of |phi_t * f| (torus or waveguide grid)."""
    out = np.zeros(f.grid.shape)
    for t in times.times:
        np.maximum(out, np.abs(evolve(f, t).values), out=out)
    return GridFunction(f.grid, out)


# --------------------------------------------------------------------------- domination


def domination_constant(n: int, R: float, J: int = 40) -> float:
    """C'_n = C_n ((2n)^(n/2) + sum_j C_{n,j}) with C_n = 2^n (sqrt R + sqrt pi)^n."""
    cn = 2.0**n * (math.sqrt(R) + math.sqrt(math.pi)) ** n
    tail = sum((2.0 * n * 2.0 ** (j + 1)) ** (n / 2.0) * math.exp(-(n / 2.0) * 2.0**j) for j in range(J + 1))
    return cn * ((2.0 * n) ** (n / 2.0) + tail)


@dataclass(frozen=True)
class DominationReport:
    constant: float
    heat_max: GridFunction
    torus_max: GridFunction
    smoothed: GridFunction
    slack: GridFunction
    discretization: float

    @property
    def min_slack(self) -> float:
        return float(self.slack.values.min())

    @property
    def ok(self) -> bool:
        return self.min_slack >= -self.discretization


def _domination_terms(f: GridFunction, R: float, J: int):
    hs = heat_max_op(f, TimeSet.geometric(R, J))
    mt = torus_max_op(f)
    pr = evolve_torus(f, R)
    return hs, mt, pr


def check_domination(f: GridFunction, R: float = 1.0 / 16, J: int = 40) -> DominationReport:
    """Slack of C'_n M^T f + phi_R * f - H*_R f at every node.

    The discretization estimate is the largest change of H*_R f at shared
    nodes when the grid is coarsened by a factor two.
    """
    g = f.grid
    if not g.is_torus():
        raise NotTorusGrid("the domination check is implemented on torus grids")
    if np.any(f.values < 0):
        raise ValueError("the domination check needs nonnegative data")
    if not 0 < R < 1.0 / (8 * g.dim_torus):
        raise InvalidWindow(f"need 0 < R < 1/(8n) = {1 / (8 * g.dim_torus)}, got {R}")
    c = domination_constant(g.dim_torus, R, J)
    hs, mt, pr = _domination_terms(f, R, J)
    slack = c * mt.values + pr.values - hs.values
    disc = 0.0
    if g.N % 2 == 0 and g.N >= 4:
        coarse_grid = Grid(g.dim_torus, 0, g.N // 2)
        sub = (slice(None, None, 2),) * g.ndim
        fc = GridFunction(coarse_grid, f.values[sub])
        hc = heat_max_op(fc, TimeSet.geometric(R, J))
        disc = float(np.abs(hc.values - hs.values[sub]).max())
    return DominationReport(c, hs, mt, pr, GridFunction(g, slack), disc)


# --------------------------------------------------------------------------- annuli


def annulus_index(z) -> int:
    """k with z in A_k: A_0 = {|z| < 1/2}, A_k = {k - 1/2 <= |z| < k + 1/2}."""
    r = z.norm() if isinstance(z, WaveguidePoint) else float(np.linalg.norm(np.atleast_1d(z)))
    if r < 0.5:
        return 0
    return int(math.floor(r + 0.5))


@dataclass(frozen=True)
class BallK:
    """The open ball B_k = {|z| < k + 3/2}, which contains A_k."""

    k: int

    @property
    def radius(self) -> float:
        return self.k + 1.5

    def contains(self, z) -> bool:
        r = z.norm() if isinstance(z, WaveguidePoint) else float(np.linalg.norm(np.atleast_1d(z)))
        return r < self.radius


def ball_index_set(k: int) -> BallK:
    if k < 0:
        raise ValueError("annulus index must be nonnegative")
    return BallK(int(k))
