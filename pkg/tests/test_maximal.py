import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from torusheat.errors import EmptyBall, InvalidWindow, SupportTooCloseToBoundary
from torusheat.grid import Grid, GridFunction, evolve_torus, periodic_extension_index
from torusheat.kernel import WaveguidePoint
from torusheat.maximal import (
    RadiiSet,
    TimeSet,
    annulus_index,
    ball_average,
    ball_index_set,
    check_domination,
    domination_constant,
    heat_max_op,
    local_max_op,
    naive_max_op,
    torus_max_op,
    waveguide_max_op,
)
from torusheat.weights import remark_function


def rand(grid, seed, positive=False):
    rng = np.random.default_rng(seed)
    v = rng.random(grid.shape) if positive else rng.standard_normal(grid.shape)
    return GridFunction(grid, v)


def brute_ball_average(f, center, r):
    """Scan every node, every periodic image and the zero extension past the euclidean box.

    Independent of the stencil code.
    """
    g = f.grid
    h = np.array(g.spacing)
    c = np.array([g.axis(i)[center[i]] for i in range(g.ndim)])
    total, count = 0.0, 0
    ranges = [range(-g.N, 2 * g.N)] * g.ndim
    for idx in itertools.product(*ranges):
        j = np.array(idx)
        x = np.array([g.axis(i)[0] for i in range(g.ndim)]) + j * h
        if np.sum((x - c) ** 2) > r * r * (1 + 1e-12):
            continue
        count += 1
        tor, euc = j[: g.dim_torus] % g.N, j[g.dim_torus :]
        if np.all((euc >= 0) & (euc < g.N)):
            total += abs(f.values[tuple(tor) + tuple(euc)])
    return total / count


# --------------------------------------------------------------------------- sets


def test_default_radii():
    g = Grid(1, 0, 16)
    rs = RadiiSet.default(g, 0.5)
    assert rs.radii[0] == 1 / 32 and rs.radii[-1] == 0.5
    assert all(b > a for a, b in zip(rs.radii, rs.radii[1:]))


def test_radii_validation():
    with pytest.raises(ValueError):
        RadiiSet((0.2, 0.1), 0.5)
    with pytest.raises(ValueError):
        RadiiSet((0.1, 0.6), 0.6)
    with pytest.raises(ValueError):
        RadiiSet((), 0.5)


def test_time_set():
    ts = TimeSet.geometric(0.1, 40)
    assert len(ts.times) == 41 and ts.times[0] == 0.1 and ts.times[-1] == 0.1 * 2.0**-40
    with pytest.raises(InvalidWindow):
        TimeSet.geometric(0.5)
    with pytest.raises(ValueError):
        TimeSet((0.1,))


# --------------------------------------------------------------------------- ball averages


@pytest.mark.parametrize("r", [1 / 32, 0.1, 0.25, 0.5])
def test_constant_average(r):
    g = Grid(2, 0, 16)
    f = GridFunction(g, np.full(g.shape, -2.5))
    assert ball_average(f, (3, 7), r) == pytest.approx(2.5)


def test_ball_inside_support():
    g = Grid(1, 0, 256)
    f = GridFunction.sample(g, lambda p: (np.abs(p[..., 0]) <= 0.2).astype(float))
    c = periodic_extension_index(0.0, g)
    for r in (0.05, 0.1, 0.2):
        assert ball_average(f, c, r) == pytest.approx(1.0, abs=2 / (256 * r))


@pytest.mark.parametrize("grid", [Grid(1, 0, 16), Grid(2, 0, 8), Grid(1, 1, 8, 1.0)])
@pytest.mark.parametrize("r", [0.07, 0.2, 0.45])
def test_ball_average_matches_brute_force(grid, r):
    f = rand(grid, 3)
    for center in [(0,) * grid.ndim, (grid.N - 1,) * grid.ndim, (grid.N // 2,) * grid.ndim]:
        assert ball_average(f, center, r) == pytest.approx(brute_ball_average(f, center, r), rel=1e-13)


def test_tiny_ball_rejected():
    f = GridFunction(Grid(1, 0, 8), np.ones(8))
    with pytest.raises(EmptyBall):
        ball_average(f, (0,), 0.01)


# --------------------------------------------------------------------------- operators


@pytest.mark.parametrize("grid", [Grid(1, 0, 64), Grid(2, 0, 16)])
def test_fast_equals_naive(grid):
    f = rand(grid, 11)
    rs = RadiiSet.default(grid, 0.5)
    assert np.array_equal(local_max_op(f, rs).values, naive_max_op(f, rs).values)


def test_constant_in_constant_out():
    g = Grid(1, 0, 64)
    f = GridFunction(g, np.full(64, -3.0))
    assert np.allclose(torus_max_op(f).values, 3.0, rtol=1e-15)
    assert np.allclose(heat_max_op(GridFunction(g, np.ones(64)), TimeSet.geometric(0.1)).values, 1.0, atol=1e-13)


def test_sup_dominates_each_radius():
    g = Grid(1, 0, 32)
    f = rand(g, 5)
    rs = RadiiSet.default(g, 0.5)
    m = local_max_op(f, rs)
    for r in rs.radii[::3]:
        for i in range(0, 32, 7):
            assert m.values[i] >= ball_average(f, (i,), r)


def test_torus_max_periodicity():
    g = Grid(1, 0, 64)
    f = rand(g, 8)
    m = torus_max_op(f)
    node = g.axis(0)[10]
    for k in (-2, 1, 3):
        assert m.values[periodic_extension_index(node + k, g)] == m.values[10]


def test_seam_symmetry():
    # a bump centred on node 10 is seen symmetrically from both sides, including across the seam
    N = 200
    g = Grid(1, 0, N)
    vals = np.zeros(N)
    vals[6:15] = 1.0
    f = GridFunction(g, vals)
    rs = RadiiSet.default(g, 0.25)
    m = torus_max_op(f, rs)
    for k in (3, 12, 25, 40):
        assert m.values[(10 - k) % N] == m.values[10 + k]
    assert np.array_equal(m.values, naive_max_op(f, rs).values)


def test_waveguide_operator():
    g = Grid(1, 1, 32, 2.0)
    y = g.points()[..., 1]
    f = GridFunction(g, np.where(np.abs(y) < 1.0, 2.0, 0.0))
    rs = RadiiSet.default(g, 0.25)
    m = waveguide_max_op(f, rs)
    assert np.array_equal(m.values, waveguide_max_op(f, rs, naive=True).values)
    inside = np.abs(y) < 0.5
    assert np.allclose(m.values[inside], 2.0)
    with pytest.raises(SupportTooCloseToBoundary):
        waveguide_max_op(GridFunction(g, np.ones(g.shape)), rs)


def test_waveguide_tensor_symmetry():
    # with equal spacings, swapping the torus and euclidean roles commutes with the operator
    g = Grid(1, 1, 32, 0.5)
    pts = g.points()
    vals = np.exp(-(pts[..., 0] ** 2 + pts[..., 1] ** 2) / 0.005)
    vals[:, :6] = 0
    vals[:, -6:] = 0
    vals[:6, :] = 0
    vals[-6:, :] = 0
    f = GridFunction(g, vals)
    m = waveguide_max_op(f, RadiiSet.default(g, 0.15))
    # equal as sets of averages; the traversal order differs, so allow rounding
    assert np.allclose(m.values, m.values.T, rtol=1e-13, atol=1e-300)


@given(st.integers(0, 2**31), st.floats(-3, 3))
@settings(max_examples=20, deadline=None)
def test_sublinear_and_homogeneous(seed, c):
    g = Grid(1, 0, 32)
    f, h = rand(g, seed), rand(g, seed + 1)
    rs = RadiiSet.default(g, 0.5)
    ts = TimeSet.geometric(0.1, 12)
    for op in (lambda u: local_max_op(u, rs), lambda u: heat_max_op(u, ts)):
        assert np.all(op(f + h).values <= op(f).values + op(h).values + 1e-12)
        assert np.allclose(op(c * f).values, abs(c) * op(f).values, rtol=1e-12, atol=1e-14)


@given(st.integers(0, 2**31))
@settings(max_examples=20, deadline=None)
def test_monotone(seed):
    g = Grid(1, 0, 32)
    f = rand(g, seed)
    bigger = GridFunction(g, np.abs(f.values) + np.random.default_rng(seed).random(32))
    rs = RadiiSet.default(g, 0.5)
    assert np.all(local_max_op(f, rs).values <= local_max_op(bigger, rs).values)
    ts = TimeSet.geometric(0.05, 10)
    pos = GridFunction(g, np.abs(f.values))
    assert np.all(heat_max_op(pos, ts).values <= heat_max_op(bigger, ts).values + 1e-13)


def test_refining_sets_never_decreases():
    g = Grid(1, 0, 64)
    f = rand(g, 2)
    coarse = RadiiSet(RadiiSet.default(g, 0.5).radii[:-1:4] + (0.5,), 0.5)
    assert np.all(local_max_op(f, RadiiSet.default(g, 0.5)).values >= local_max_op(f, coarse).values)
    assert np.all(heat_max_op(f, TimeSet.geometric(0.1, 20)).values >= heat_max_op(f, TimeSet.geometric(0.1, 5)).values)


def test_heat_max_dominates_largest_time():
    g = Grid(1, 0, 64)
    f = rand(g, 4, positive=True)
    assert np.all(heat_max_op(f, TimeSet.geometric(0.1)).values >= evolve_torus(f, 0.1).values)


def test_single_mode_heat_max():
    # 1 + cos/2 >= 0: the supremum sits at the smallest time and approaches f
    g = Grid(1, 0, 64)
    x = g.axis(0)
    f = GridFunction(g, 1 + np.cos(2 * math.pi * x) / 2)
    ts = TimeSet.geometric(0.1, 30)
    hm = heat_max_op(f, ts)
    tmin = ts.times[-1]
    peak = 1 + math.exp(-4 * math.pi**2 * tmin) * np.cos(2 * math.pi * x) / 2
    expected = np.maximum(peak, 1 + math.exp(-4 * math.pi**2 * ts.times[0]) * np.cos(2 * math.pi * x) / 2)
    assert np.allclose(hm.values, expected, atol=1e-13)


# --------------------------------------------------------------------------- domination


def test_domination_constant_value():
    # C_1 = 2 (sqrt R + sqrt pi); (2n)^{n/2} = sqrt 2 for n = 1
    R = 1 / 16
    c = domination_constant(1, R)
    tail = sum(math.sqrt(2 * 2 ** (j + 1)) * math.exp(-(2**j) / 2) for j in range(41))
    assert c == pytest.approx(2 * (0.25 + math.sqrt(math.pi)) * (math.sqrt(2) + tail))


@pytest.mark.parametrize("seed", range(3))
def test_domination_holds(seed):
    g = Grid(1, 0, 128)
    rep = check_domination(rand(g, seed, positive=True), 1 / 16)
    assert rep.ok and rep.min_slack >= 0


def test_domination_requires_small_window():
    with pytest.raises(InvalidWindow):
        check_domination(GridFunction(Grid(1, 0, 16), np.ones(16)), 0.2)


# --------------------------------------------------------------------------- divergence witness


def test_remark_function_probe_grows():
    probe = []
    for k in (8, 10, 12):
        g = Grid(1, 0, 2**k)
        f = GridFunction.sample(g, remark_function, singularities=[(0.0,)])
        probe.append(torus_max_op(f).values[periodic_extension_index(0.0, g)])
    assert probe[0] < probe[1] < probe[2]


# --------------------------------------------------------------------------- annuli


@pytest.mark.parametrize(
    "r,k", [(0.0, 0), (0.3, 0), (0.4999, 0), (0.5, 1), (1.0, 1), (1.4999, 1), (1.5, 2), (7.2, 7)]
)
def test_annulus_index(r, k):
    assert annulus_index(WaveguidePoint(0.0, r)) == k


@given(st.floats(-0.5, 0.49), st.floats(-50, 50))
def test_point_lies_in_its_ball(x, y):
    z = WaveguidePoint(x, y)
    assert ball_index_set(annulus_index(z)).contains(z)


def test_ball_is_open():
    b = ball_index_set(1)
    assert b.radius == 2.5
    assert not b.contains(WaveguidePoint(0.0, 2.5))
    with pytest.raises(ValueError):
        ball_index_set(-1)
