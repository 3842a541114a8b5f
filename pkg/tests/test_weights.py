import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import L2_SQUARED_AT_0P1
from torusheat.errors import DivergentIntegral, InvalidExponent, NonPositiveWeight
from torusheat.grid import Grid, GridFunction, evolve_torus, weighted_norm, write_csv
from torusheat.weights import (
    ConjugateExponent,
    GrowthKind,
    Status,
    catalog,
    check_Dp_T,
    check_Dp_WG,
    companion_weight_T,
    companion_weight_WG,
    parse_weight,
    run_catalog,
    showcase_pair,
)

M, NM, INC = Status.MEMBER, Status.NONMEMBER, Status.INCONCLUSIVE


# --------------------------------------------------------------------------- exponents and parsing


@given(st.floats(1.0001, 1e6))
def test_conjugate_identity(p):
    c = ConjugateExponent.of(p)
    assert 1 / c.p + 1 / c.p_prime == pytest.approx(1.0, rel=1e-12)
    assert c.ratio == pytest.approx(c.p_prime / c.p, rel=1e-12)


def test_conjugate_of_one_and_bad_values():
    assert ConjugateExponent.of(1).p_prime == math.inf
    for bad in (0.5, float("nan"), float("inf"), -2):
        with pytest.raises(InvalidExponent):
            ConjugateExponent.of(bad)


@pytest.mark.parametrize(
    "text,n,m",
    [("const:2", 1, 0), ("powx:0.5", 2, 0), ("powxlog:1,2", 1, 0), ("gaussy:-1", 1, 1), ("cubey:1", 1, 2)],
)
def test_parse_weight_kinds(text, n, m):
    v = parse_weight(text, n, m)
    pts = np.random.default_rng(0).uniform(-0.5, 0.5, (7, n + m))
    vals = v(pts)
    assert vals.shape == (7,) and np.all(vals > 0)


@pytest.mark.parametrize("bad", ["nope:1", "powx:", "powxlog:1", "gaussy:1", "powx:abc"])
def test_parse_weight_errors(bad):
    with pytest.raises(ValueError):
        parse_weight(bad)


def test_const_must_be_positive():
    with pytest.raises(NonPositiveWeight):
        parse_weight("const:0")


def test_weight_rejects_wrong_width():
    with pytest.raises(ValueError):
        parse_weight("const:1", 2)(np.zeros((3, 1)))


def test_powx_is_periodic():
    v = parse_weight("powx:1.5")
    x = np.array([[0.2], [1.2], [-0.8]])
    assert np.allclose(v(x), 0.2**1.5)


@pytest.mark.parametrize(
    "spec,at_zero",
    [("powx:0.5", 0.0), ("powx:-1", math.inf), ("powxlog:1,2", 0.0), ("powxlog:-1,2", math.inf), ("powxlog:0,-1", 0.0)],
)
def test_singular_point_value(spec, at_zero):
    vals = parse_weight(spec)(np.array([[0.0], [5e-324], [0.1]]))
    assert vals[0] == at_zero and not np.isnan(vals).any()


def test_singular_test_functions_near_zero():
    from torusheat.weights import remark_function

    _, _, f = showcase_pair()
    pts = np.array([[0.0], [1e-300], [2.2e-309]])
    assert np.all(np.isinf(f(pts)) | (f(pts) > 1e290))
    assert not np.isnan(remark_function(pts)).any()


def test_file_weight(tmp_path):
    g = Grid(1, 0, 8)
    f = GridFunction(g, np.arange(1, 9, dtype=float))
    path = tmp_path / "w.csv"
    write_csv(f, path)
    v = parse_weight(f"file:{path}")
    assert v.growth.kind is GrowthKind.UNDECLARED
    assert v(np.array([[g.axis(0)[3]], [g.axis(0)[3] + 1.0]])).tolist() == [4.0, 4.0]
    write_csv(GridFunction(g, np.zeros(8)), path)
    with pytest.raises(NonPositiveWeight):
        parse_weight(f"file:{path}")


# --------------------------------------------------------------------------- D_p^T


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 4.0])
def test_constant_weight_is_member(p):
    v = check_Dp_T(parse_weight("const:1"), p, 0.05)
    assert v.status is M
    if p == 2.0:
        # int phi_t0^2 = phi_{2 t0}(0)
        assert v.estimate == pytest.approx(sum(math.exp(-8 * math.pi**2 * l * l * 0.05) for l in range(-20, 21)), rel=1e-8)


def test_threshold_examples():
    assert check_Dp_T(parse_weight("powx:1"), 2.0, 0.05).status is NM
    assert check_Dp_T(parse_weight("powx:0.5"), 2.0, 0.05).status is M
    assert check_Dp_T(parse_weight("powx:2", 2), 2.0, 0.05).status is NM
    assert check_Dp_T(parse_weight("powx:1.5", 2), 2.0, 0.05).status is M


def test_member_estimate_matches_closed_form():
    # v = |x|^0.5, p = 2: int phi_t0^2 / |x|^0.5 is finite; cross-check with a fine quadrature
    from scipy import integrate

    from torusheat.kernel import kernel_values

    t0 = 0.05
    ref, _ = integrate.quad(lambda x: 2 * kernel_values(np.array([[x]]), t0)[0][0] ** 2 / math.sqrt(x), 0, 0.5, limit=200)
    v = check_Dp_T(parse_weight("powx:0.5"), 2.0, t0)
    assert v.estimate == pytest.approx(ref, rel=1e-7)


@pytest.mark.parametrize("spec", ["const:1", "powx:0.5", "powx:-1", "powxlog:1,2"])
@pytest.mark.parametrize("t0", [0.2, 0.05, 0.01])
def test_membership_persists_for_smaller_times(spec, t0):
    v = parse_weight(spec)
    if check_Dp_T(v, 2.0, t0).status is M:
        for s in (t0 / 2, t0 / 4):
            assert check_Dp_T(v, 2.0, s).status is M


@pytest.mark.parametrize("spec", ["const:1", "powx:0.5", "powx:-1"])
def test_stable_under_extra_level(spec):
    v = parse_weight(spec)
    a = check_Dp_T(v, 2.0, 0.05, tol=1e-8)
    b = check_Dp_T(v, 2.0, 0.05, tol=1e-8, extra_levels=1)
    assert a.status is b.status is M
    assert abs(a.estimate - b.estimate) <= 10 * 1e-8 * a.estimate


def test_p_one_uses_supremum():
    assert check_Dp_T(parse_weight("powx:0.5"), 1.0, 0.05).status is NM
    v = check_Dp_T(parse_weight("powx:-1"), 1.0, 0.05)
    assert v.status is M


def test_wg_weight_rejected_by_torus_check():
    with pytest.raises(ValueError):
        check_Dp_T(parse_weight("gaussy:1", 1, 1), 2.0, 0.05)


# --------------------------------------------------------------------------- D_p^WG


@pytest.mark.parametrize(
    "a,p,expected",
    [(1.0, 2.0, M), (-5.0, 2.0, M), (-9.0, 2.0, M), (-11.0, 2.0, NM), (-3.0, 3.0, M), (-16.0, 3.0, NM)],
)
def test_gaussian_class(a, p, expected):
    # member iff 1/(4 t0) + a/p > 0; t0 = 0.05 puts the threshold at a = -5p
    assert check_Dp_WG(parse_weight(f"gaussy:{a}", 1, 1), p, 0.05).status is expected


def test_gaussian_class_boundary_is_nonmember():
    assert check_Dp_WG(parse_weight("gaussy:-10", 1, 1), 2.0, 0.05).status is NM


def test_gaussian_estimate_closed_form():
    # integrand exp(-2 k y^2) with k = 1/(4 t0) + a/2 integrates to sqrt(pi / (2k))
    a, t0 = -1.0, 0.05
    k = 1 / (4 * t0) + a / 2
    v = check_Dp_WG(parse_weight(f"gaussy:{a}", 1, 1), 2.0, t0)
    assert v.status is M
    assert v.estimate == pytest.approx(math.sqrt(math.pi / (2 * k)), rel=1e-7)


@pytest.mark.parametrize("t0", [0.01, 0.05, 0.25])
def test_superexponential_growth_is_never_member(t0):
    assert check_Dp_WG(parse_weight("cubey:-1", 1, 1), 2.0, t0).status is NM


def test_constant_wg_two_euclidean_axes():
    v = check_Dp_WG(parse_weight("const:1", 1, 2), 2.0, 0.05)
    assert v.status is M
    assert v.estimate == pytest.approx(math.pi / (2 / (4 * 0.05)), rel=1e-6)


def test_wg_with_torus_singularity_is_not_guessed():
    v = parse_weight("powx:0.5", 1, 1)
    assert check_Dp_WG(v, 2.0, 0.05).status is INC
    assert check_Dp_WG(parse_weight("powx:1", 1, 1), 2.0, 0.05).status is NM


# --------------------------------------------------------------------------- catalog


def test_catalog_all_match():
    rows = list(run_catalog())
    assert len(rows) == sum(len(e.cases) for e in catalog())
    bad = [(e.spec, c, v) for e, c, v in rows if v.status is not c.expected]
    assert not bad


def test_catalog_covers_both_sides_of_threshold():
    statuses = {(e.spec, c.expected) for e in catalog() for c in e.cases}
    assert ("powx:0.5", M) in statuses and ("powx:1", NM) in statuses
    assert any(s.startswith("gaussy") and st_ is NM for s, st_ in statuses)
    assert any(s.startswith("cubey") and st_ is NM for s, st_ in statuses)


# --------------------------------------------------------------------------- companion weights


def test_companion_constant_weight_is_l2_norm():
    v = parse_weight("const:1")
    gs = [companion_weight_T(v, 2.0, 0.1, x).g for x in (0.0, 0.17, -0.4)]
    assert gs == pytest.approx([L2_SQUARED_AT_0P1] * 3, rel=1e-8)


def test_companion_is_periodic():
    v = parse_weight("powx:0.5")
    a = companion_weight_T(v, 2.0, 0.1, 0.2)
    b = companion_weight_T(v, 2.0, 0.1, 1.2)
    assert a.g == pytest.approx(b.g, rel=1e-10)
    assert a.u == min(1.0, 1 / a.g)


def test_companion_divergent():
    with pytest.raises(DivergentIntegral):
        companion_weight_T(parse_weight("powx:1"), 2.0, 0.1, 0.0)
    with pytest.raises(InvalidExponent):
        companion_weight_T(parse_weight("const:1"), 1.0, 0.1, 0.0)


def test_companion_waveguide_oracle():
    # separable: int phi_t^2 dx * int G_t^2 dy = theta(2t) / sqrt(8 pi t)
    c = companion_weight_WG(parse_weight("const:1", 1, 1), 2.0, 0.1, [0.3, 0.0])
    assert c.g == pytest.approx(L2_SQUARED_AT_0P1 / math.sqrt(8 * math.pi * 0.1), rel=1e-8)


@pytest.mark.parametrize("z", [[0.0, 0.0], [0.2, 1.5], [-0.4, -3.0]])
def test_companion_waveguide_damping(z):
    c = companion_weight_WG(parse_weight("const:1", 1, 1), 2.0, 0.1, z)
    assert c.u <= math.exp(-(z[0] ** 2 + z[1] ** 2)) / c.g + 1e-15
    assert c.u <= 1.0


def test_companion_waveguide_divergent_class():
    with pytest.raises(DivergentIntegral):
        companion_weight_WG(parse_weight("gaussy:-20", 1, 1), 2.0, 0.05, [0.0, 0.0])


# --------------------------------------------------------------------------- consequences


def test_member_weight_gives_finite_convergent_evolution():
    g = Grid(1, 0, 256)
    v = parse_weight("powx:0.5")
    vs = GridFunction.sample(g, v, [(0.0,)])
    f = GridFunction.sample(g, lambda p: np.abs(p[..., 0]) ** -0.2, [(0.0,)])
    errs = [weighted_norm(evolve_torus(f, t) - f, vs, 2.0).value for t in (1e-2, 1e-3, 1e-4)]
    assert all(np.isfinite(errs)) and errs[0] > errs[1] > errs[2]


@settings(max_examples=10, deadline=None)
@given(st.floats(-0.45, 0.45))
def test_showcase_pair(x):
    v, p, f = showcase_pair()
    assert v.name == "powx:1" and p == 2.0
    assert check_Dp_T(v, p, 0.05).status is NM
    val = f(np.array([[x]]))[0]
    assert val >= 0 and (val > 0) == (abs(x) < 0.25)
