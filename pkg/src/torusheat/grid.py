"""Uniform grids on Q_n (optionally times a truncated box [-Y, Y)^m), sampled
functions, weighted norms and spectral heat evolution."""
from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from .errors import (
    GridMismatch,
    InvalidExponent,
    NonPositiveWeight,
    NotTorusGrid,
    SupportTooCloseToBoundary,
)
from .kernel import check_time, kernel_values, reduce_mod1

__all__ = [
    "Grid",
    "GridFunction",
    "WeightedNorm",
    "WaveguideEvolution",
    "weighted_norm",
    "evolve_torus",
    "evolve_waveguide",
    "periodic_extension_index",
    "convolve_quadrature",
    "aliasing_bound",
    "write_csv",
    "read_csv",
]

IMAG_RESIDUE = 1e-12
CSV_HEADER = "# dim_torus,dim_euclid,N,Y"


@dataclass(frozen=True)
class Grid:
    dim_torus: int
    dim_euclid: int = 0
    N: int = 64
    Y: float = 0.0

    def __post_init__(self):
        if self.dim_torus < 0 or self.dim_euclid < 0 or self.dim_torus + self.dim_euclid == 0:
            raise ValueError("grid needs at least one axis")
        if self.N < 2:
            raise ValueError("need at least two points per axis")
        if self.dim_euclid and not self.Y > 0:
            raise ValueError("euclidean half-width Y must be positive")
        if not self.dim_euclid:
            object.__setattr__(self, "Y", 0.0)

    @property
    def ndim(self) -> int:
        return self.dim_torus + self.dim_euclid

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.ndim

    @property
    def spacing(self) -> tuple[float, ...]:
        return (1.0 / self.N,) * self.dim_torus + (2.0 * self.Y / self.N,) * self.dim_euclid

    @property
    def h(self) -> float:
        return min(self.spacing)

    @property
    def cell(self) -> float:
        return math.prod(self.spacing)

    def axis(self, i: int) -> np.ndarray:
        j = np.arange(self.N)
        if i < self.dim_torus:
            return -0.5 + j / self.N
        return -self.Y + j * (2.0 * self.Y / self.N)

    def points(self) -> np.ndarray:
        """Node coordinates, shape ``grid.shape + (ndim,)``."""
        mesh = np.meshgrid(*(self.axis(i) for i in range(self.ndim)), indexing="ij")
        return np.stack(mesh, axis=-1)

    def is_torus(self) -> bool:
        return self.dim_euclid == 0


class GridFunction:
    """Samples of a real function on a :class:`Grid`; immutable."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: Grid, values):
        vals = np.array(values, dtype=float)
        if vals.size != math.prod(grid.shape):
            raise GridMismatch(f"expected {math.prod(grid.shape)} samples, got {vals.size}")
        vals = vals.reshape(grid.shape)
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid function values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", vals)

    def __setattr__(self, name, value):
        raise AttributeError("GridFunction is immutable")

    def __repr__(self):
        return f"GridFunction({self.grid!r}, max|f|={np.abs(self.values).max():.3g})"

    @classmethod
    def sample(cls, grid: Grid, fn: Callable[[np.ndarray], np.ndarray], singularities: Sequence = ()):
        """Evaluate ``fn`` on the nodes.

        ``fn`` takes an array of shape ``(..., ndim)``.  A node sitting on a declared
        singular point is evaluated half a cell away along the first axis instead.
        """
        pts = grid.points()
        if singularities:
            pts = pts.copy()
            for s in singularities:
                s = np.asarray(s, dtype=float).reshape(-1)
                target = np.concatenate([reduce_mod1(s[: grid.dim_torus]), s[grid.dim_torus:]])
                hit = np.all(np.isclose(pts, target, rtol=0, atol=1e-12 * max(1.0, grid.Y)), axis=-1)
                pts[hit, 0] += 0.5 * grid.spacing[0]
        return cls(grid, fn(pts))

    def __add__(self, other):
        _same_grid(self, other)
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other):
        _same_grid(self, other)
        return GridFunction(self.grid, self.values - other.values)

    def __mul__(self, c):
        return GridFunction(self.grid, self.values * float(c))

    __rmul__ = __mul__

    def abs(self):
        return GridFunction(self.grid, np.abs(self.values))

    def mean(self) -> float:
        return float(self.values.mean())

    def sup(self) -> float:
        return float(np.abs(self.values).max())


def _same_grid(*fs: GridFunction):
    g = fs[0].grid
    for f in fs[1:]:
        if f.grid != g:
            raise GridMismatch(f"grids differ: {g} vs {f.grid}")


# --------------------------------------------------------------------------- norms


@dataclass(frozen=True)
class WeightedNorm:
    p: float
    value: float


def weighted_norm(f: GridFunction, v: GridFunction, p: float) -> WeightedNorm:
    """Riemann-sum approximation of (int |f|^p v)^(1/p)."""
    _same_grid(f, v)
    p = float(p)
    if not (p >= 1.0 and math.isfinite(p)):
        raise InvalidExponent(f"p must be a finite number >= 1, got {p}")
    if np.any(v.values <= 0):
        raise NonPositiveWeight("weight must be strictly positive at every sample")
    s = np.sum(np.abs(f.values) ** p * v.values) * f.grid.cell
    return WeightedNorm(p, float(s ** (1.0 / p)))


# --------------------------------------------------------------------------- evolution


def _frequencies(grid: Grid) -> list[np.ndarray]:
    """Angular-free frequencies per axis: cycles per unit length."""
    out = []
    for i in range(grid.ndim):
        k = np.fft.fftfreq(grid.N, d=1.0 / grid.N)  # integers folded to [-N/2, N/2)
        if i >= grid.dim_torus:
            k = k / (2.0 * grid.Y)
        out.append(k)
    return out


def _heat_multiplier(grid: Grid, t: float) -> np.ndarray:
    mult = np.ones(grid.shape)
    for i, k in enumerate(_frequencies(grid)):
        shape = [1] * grid.ndim
        shape[i] = grid.N
        mult = mult * np.exp(-4.0 * math.pi**2 * t * k**2).reshape(shape)
    return mult


def _spectral(f: GridFunction, t: float) -> np.ndarray:
    coef = np.fft.fftn(f.values)
    out = np.fft.ifftn(coef * _heat_multiplier(f.grid, t))
    residue = float(np.abs(out.imag).max())
    if residue > IMAG_RESIDUE * max(1.0, f.sup()):
        raise ArithmeticError(f"imaginary residue {residue:.3e} after inverse transform")
    return out.real


def evolve_torus(f: GridFunction, t: float) -> GridFunction:
    """Heat semigroup on a torus grid via the multiplier exp(-4 pi^2 |l|^2 t)."""
    if not f.grid.is_torus():
        raise NotTorusGrid("evolve_torus needs a pure torus grid (dim_euclid = 0)")
    t = check_time(t)
    return GridFunction(f.grid, _spectral(f, t))


class WaveguideEvolution(NamedTuple):
    function: GridFunction
    periodization_error: float


def support_margin(f: GridFunction, threshold: float = 0.0) -> float:
    """Distance from {|f| > threshold} to the seam of the euclidean box (inf for torus grids)."""
    g = f.grid
    if g.is_torus():
        return math.inf
    nz = np.nonzero(np.abs(f.values) > threshold)
    if nz[0].size == 0:
        return math.inf
    margin = math.inf
    for i in range(g.dim_torus, g.ndim):
        y = g.axis(i)[nz[i]]
        margin = min(margin, float(np.min(np.minimum(y + g.Y, g.Y - y))))
    return margin


def evolve_waveguide(f: GridFunction, t: float, support_tol: float = 0.0) -> WaveguideEvolution:
    """Heat semigroup on T^n x R^m, treating the euclidean box as periodic.

    Needs the support of f at least 4 sqrt(t) away from the box seam; the
    returned error bounds the periodization effect in the sup norm.  With
    ``support_tol > 0`` samples with |f| <= support_tol * max|f| do not count
    as support; both evolutions of that remainder are bounded by its sup, so
    twice that sup is added to the error.
    """
    g = f.grid
    if g.dim_euclid == 0:
        raise ValueError("evolve_waveguide needs at least one euclidean axis")
    t = check_time(t)
    sup = f.sup()
    cut = support_tol * sup
    mu = support_margin(f, cut)
    if mu < 4.0 * math.sqrt(t):
        raise SupportTooCloseToBoundary(
            f"support margin {mu:.4g} is below 4*sqrt(t) = {4 * math.sqrt(t):.4g}; enlarge Y"
        )
    out = GridFunction(g, _spectral(f, t))
    err = 0.0 if math.isinf(mu) else sup * g.dim_euclid * math.erfc(mu / (2.0 * math.sqrt(t)))
    if cut > 0:
        small = np.abs(f.values) <= cut
        if small.any():
            err += 2.0 * float(np.abs(f.values[small]).max())
    return WaveguideEvolution(out, err)


def evolve(f: GridFunction, t: float) -> GridFunction:
    """Dispatch on the grid type; drops the periodization error."""
    if f.grid.is_torus():
        return evolve_torus(f, t)
    return evolve_waveguide(f, t).function


def aliasing_bound(f: GridFunction, t: float) -> float:
    """Sup-norm gap between spectral evolution and the node-sampled kernel convolution.

    The sampled kernel aliases every frequency outside [-N/2, N/2)^n onto the box.
    """
    g = f.grid
    a = 4.0 * math.pi**2 * t
    L = max(g.N, int(math.sqrt(40.0 / a)) + g.N)
    l = np.arange(-L, L + 1)
    w = np.exp(-a * l.astype(float) ** 2)
    box = (l >= -(g.N // 2)) & (l < g.N - g.N // 2)
    inbox = w[box].sum()
    outside = np.sort(w[~box]).sum()
    total = inbox + outside
    n = g.dim_torus
    # total^n - inbox^n, telescoped to avoid cancellation
    gap = sum(inbox**i * outside * total ** (n - 1 - i) for i in range(n))
    return f.sup() * gap


def convolve_quadrature(f: GridFunction, t: float, tol: float = 1e-12) -> tuple[GridFunction, float]:
    """Direct node-sum convolution sum_y phi_t(x - y) f(y) h^n on a torus grid.

    Returns the result and the error bound inherited from the kernel evaluations.
    O(N^(2n)); meant as an oracle for small grids.
    """
    g = f.grid
    if not g.is_torus():
        raise NotTorusGrid("quadrature convolution is implemented for torus grids")
    t = check_time(t)
    pts = g.points().reshape(-1, g.ndim)
    diff = pts[:, None, :] - pts[None, :, :]
    k, kerr = kernel_values(diff.reshape(-1, g.ndim), t, tol)
    k = k.reshape(len(pts), len(pts))
    fv = f.values.reshape(-1)
    out = (k @ fv) * g.cell
    err = float(kerr.max()) * float(np.abs(fv).sum()) * g.cell
    # rounding in the length-N^n dot products
    err += 4.0 * len(fv) * np.finfo(float).eps * float(np.max(k @ np.abs(fv))) * g.cell
    return GridFunction(g, out.reshape(g.shape)), err


# --------------------------------------------------------------------------- indexing


def periodic_extension_index(x, grid: Grid) -> tuple[int, ...]:
    """Index of the node nearest to x after reduction mod 1 (torus axes only)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.size != grid.dim_torus:
        raise ValueError(f"expected {grid.dim_torus} torus coordinates, got {x.size}")
    r = reduce_mod1(x)
    j = np.floor((r + 0.5) * grid.N + 0.5).astype(int) % grid.N
    return tuple(int(i) for i in j)


# --------------------------------------------------------------------------- CSV


def _fmt(v: float) -> str:
    return "%.17g" % v


def write_csv(f: GridFunction, dest=None, header: Iterable[str] = ()) -> str:
    """Serialize to the GridFunction CSV format; returns the text and writes it if ``dest`` is given.

    Extra ``header`` lines are emitted first as ``# ...`` comments.
    """
    g = f.grid
    buf = io.StringIO()
    for line in header:
        buf.write(f"# {line}\n")
    buf.write(CSV_HEADER + "\n")
    buf.write(f"# {g.dim_torus},{g.dim_euclid},{g.N},{_fmt(g.Y)}\n")
    pts = g.points().reshape(-1, g.ndim)
    vals = f.values.reshape(-1)
    for i in range(vals.size):
        coords = ",".join(_fmt(c) for c in pts[i])
        buf.write(f"{i},{coords},{_fmt(vals[i])}\n")
    text = buf.getvalue()
    if dest is not None:
        if hasattr(dest, "write"):
            dest.write(text)
        else:
            with open(dest, "w", newline="") as fh:
                fh.write(text)
    return text


def read_csv(src) -> GridFunction:
    """Parse the GridFunction CSV format from a path, file object or text."""
    if hasattr(src, "read"):
        text = src.read()
    elif isinstance(src, (str, os.PathLike)) and os.path.exists(src):
        with open(src) as fh:
            text = fh.read()
    else:
        text = str(src)
    lines = text.splitlines()
    meta = None
    rows = []
    for i, line in enumerate(lines):
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            if s == CSV_HEADER and i + 1 < len(lines):
                meta = lines[i + 1].lstrip("#").strip().split(",")
            continue
        rows.append(s.split(","))
    if meta is None:
        raise ValueError("missing '# dim_torus,dim_euclid,N,Y' header")
    n, m, N, Y = int(meta[0]), int(meta[1]), int(meta[2]), float(meta[3])
    grid = Grid(n, m, N, Y)
    size = math.prod(grid.shape)
    if len(rows) != size:
        raise GridMismatch(f"expected {size} rows, found {len(rows)}")
    vals = np.empty(size)
    for r in rows:
        idx = int(r[0])
        if len(r) != grid.ndim + 2:
            raise ValueError(f"row {idx} has {len(r)} fields, expected {grid.ndim + 2}")
        vals[idx] = float(r[-1])
    return GridFunction(grid, vals)
