import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from opdkit.dynamics import evolve_opd
from opdkit.hs import PAULI, is_density, min_eigenvalue
from opdkit.opd import reconstruct, reduced_state
from opdkit.positivity import (
    TwoMapRates,
    VerdictKind,
    asymptotic_violation,
    classify,
    ellipsoid_ball_containment,
    ellipsoid_geometry,
    evolved_violation,
    example_i,
    example_ii,
    fibonacci_sphere,
    in_initial_domain,
    opd_from_v,
    sample_domain,
    secular_max,
    sphere_oracle_max,
    state_from_v,
    time_grid,
)

X, Y, Z, I2 = PAULI["X"], PAULI["Y"], PAULI["Z"], np.eye(2)
unit = st.floats(0, 2)
rates_st = st.lists(st.floats(0, 2), min_size=3, max_size=3)


def g_example_ii(v, gt):
    x = np.exp(-2 * gt)
    lam = np.array([x * x, x, x])
    lam_t = np.array([x, x, 1.0])
    return float(np.sum((lam - lam_t * np.asarray(v)) ** 2))


def test_state_from_v():
    np.testing.assert_allclose(state_from_v([1, 1, 1]), I2 / 2)
    np.testing.assert_allclose(state_from_v([1, 1, 2]), (I2 + Z) / 2)
    np.testing.assert_allclose(state_from_v([2, 1, 1]), (I2 + X) / 2)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-1, 3), min_size=3, max_size=3))
def test_opd_from_v_reconstructs_state(v):
    o = opd_from_v(v)
    np.testing.assert_allclose(reduced_state(o), state_from_v(v), atol=1e-14)
    np.testing.assert_allclose(reconstruct(o).matrix, state_from_v(v), atol=1e-14)
    assert in_initial_domain(v) == is_density(state_from_v(v), 1e-12) or abs(
        np.sum((np.array(v) - 1) ** 2) - 1
    ) < 1e-9


@pytest.mark.parametrize(
    "v,inside", [((1, 1, 1), True), ((1, 1, 2), True), ((0.2, 1, 1), True), ((-0.1, 1, 1), False)]
)
def test_initial_domain(v, inside):
    assert in_initial_domain(v) is inside


def test_example_rates():
    assert example_i(2.0) == TwoMapRates((0, 2, 2), (0, 1, 1))
    assert example_ii(1.0) == TwoMapRates((0, 1, 1), (0, 0, 1))


@pytest.mark.parametrize("gt", [0.0, 0.01, 0.3, 1.0, 4.0])
def test_example_ii_closed_form(gt):
    rates = example_ii()
    x = np.exp(-2 * gt)
    assert evolved_violation([1, 1, 1], rates, gt) == pytest.approx((1 - x) ** 2 * (1 + x * x), abs=1e-14)
    assert evolved_violation([1, 1, 1], rates, gt) <= 1
    assert evolved_violation([0.5, 1.7, 1.5], rates, gt) == pytest.approx(g_example_ii([0.5, 1.7, 1.5], gt))


def test_asymptotic_violation():
    assert asymptotic_violation([1, 1, 1.5], example_ii()) == pytest.approx(2.25)
    assert asymptotic_violation([1, 1, 1], example_ii()) == pytest.approx(1.0)
    assert asymptotic_violation([1, 1, 1], example_i()) == 0.0
    assert evolved_violation([1, 1, 1.5], example_ii(), 60.0) == pytest.approx(2.25, abs=1e-12)


def test_violation_broadcasting():
    v = np.ones((4, 5, 3))
    t = np.linspace(0, 1, 7)
    assert evolved_violation(v, example_i(), t).shape == (4, 5, 7)
    assert isinstance(evolved_violation([1, 1, 1], example_i(), 0.5), float)
    with pytest.raises(ValueError):
        evolved_violation([1, 1, 1], example_i(), -1.0)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-1, 3), min_size=3, max_size=3), rates_st, rates_st, st.floats(0, 5))
def test_violation_agrees_with_spectrum(v, g, h, t):
    rates = TwoMapRates(g, h)
    val = evolved_violation(v, rates, t)
    assume(abs(val - 1) > 1e-9)
    _, mn = evolve_opd(opd_from_v(v), rates.family(), t)
    assert (val <= 1) == (mn >= 0)


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
@given(
    st.lists(unit, min_size=3, max_size=3),
    st.lists(unit, min_size=3, max_size=3),
    st.floats(0, 1),
    rates_st,
    rates_st,
    st.floats(0, 5),
)
def test_evolved_domain_is_convex(v, w, s, g, h, t):
    # {v : g(t) <= 1} is a ball in v, so segments between members stay inside
    rates = TwoMapRates(g, h)
    gv, gw = evolved_violation(v, rates, t), evolved_violation(w, rates, t)
    assume(gv <= 1 and gw <= 1)
    mid = s * np.array(v) + (1 - s) * np.array(w)
    assert evolved_violation(mid, rates, t) <= 1 + 1e-12


def test_classify_examples():
    eternal = classify([1, 1, 1.5], example_ii())
    assert eternal.kind is VerdictKind.ETERNALLY_NEGATIVE
    assert eternal.asymptotic_g == pytest.approx(2.25)
    assert 0 < eternal.first_exit_time < np.inf and eternal.reentry_time is None
    marginal = classify([1, 1, 1], example_ii())
    assert marginal.kind is VerdictKind.MARGINAL
    assert marginal.asymptotic_g == pytest.approx(1.0)
    assert classify([1, 1, 1], example_i()).kind is VerdictKind.ALWAYS_POSITIVE


def test_exit_time_against_root_finder():
    exit_time = classify([1, 1, 1.5], example_ii()).first_exit_time
    oracle = brentq(lambda s: g_example_ii([1, 1, 1.5], s) - 1, 1e-6, 10, xtol=1e-14)
    assert exit_time == pytest.approx(oracle, abs=1e-8)
    assert g_example_ii([1, 1, 1.5], 0.5 * oracle) < 1 < g_example_ii([1, 1, 1.5], 2 * oracle)


def test_exit_time_scales_with_gamma():
    t1 = classify([1, 1, 1.5], example_ii(1.0)).first_exit_time
    t3 = classify([1, 1, 1.5], example_ii(3.0)).first_exit_time
    assert t3 == pytest.approx(t1 / 3, rel=1e-7)


def test_transient_excursion():
    # starts inside, leaves, then returns as both maps relax
    rates = TwoMapRates((1.0, 1.0, 1.0), (0.05, 0.05, 0.05))
    v = np.array([1.0, 1.0, 1.9])
    verdict = classify(v, rates)
    assert evolved_violation(v, rates, 0.0) <= 1
    assert verdict.kind is VerdictKind.TRANSIENTLY_NEGATIVE
    assert 0 < verdict.first_exit_time < verdict.reentry_time
    mid = 0.5 * (verdict.first_exit_time + verdict.reentry_time)
    assert evolved_violation(v, rates, mid) > 1
    for t in (verdict.first_exit_time, verdict.reentry_time):
        assert evolved_violation(v, rates, t) == pytest.approx(1, abs=1e-7)


def test_time_grid():
    grid = time_grid(example_i(), horizon=5.0, n=50)
    assert grid[0] == 0 and grid[-1] == pytest.approx(5.0) and len(grid) == 51
    with pytest.raises(ValueError):
        time_grid(example_i(), horizon=-1)


def test_fibonacci_sphere():
    pts = fibonacci_sphere(1000)
    np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 1, atol=1e-14)
    assert np.abs(pts.mean(axis=0)).max() < 1e-2


def dense_sphere_max(a, c, n=2_000_000):
    w = fibonacci_sphere(n)
    return float(np.max(np.sum((np.asarray(c) - np.asarray(a) * w) ** 2, axis=1)))


@settings(max_examples=20, deadline=None)
@given(
    st.lists(st.floats(0.05, 1), min_size=3, max_size=3),
    st.lists(st.floats(-1, 1), min_size=3, max_size=3),
)
def test_secular_solver_against_lattice(a, c):
    value, w, _ = secular_max(a, c)
    assert np.linalg.norm(w) == pytest.approx(1, abs=1e-9)
    lattice = dense_sphere_max(a, c, 400_000)
    # the lattice is a lower bound that is tight up to its resolution
    assert value >= lattice - 1e-12
    assert value - lattice <= 1e-4


@pytest.mark.parametrize(
    "a,c",
    [((1, 1, 1), (0, 0, 0)), ((2, 1, 1), (0, 1, 0)), ((1, 0.5, 0.5), (0, 0.2, 0.1)), ((0.5, 0.5, 0.3), (0, 0, 0.3))],
)
def test_secular_hard_cases(a, c):
    value, w, _ = secular_max(a, c)
    assert np.linalg.norm(w) == pytest.approx(1, abs=1e-9)
    assert value == pytest.approx(dense_sphere_max(a, c), abs=1e-5)
    assert value >= dense_sphere_max(a, c) - 1e-12


def test_containment_at_time_zero_is_tight():
    c = ellipsoid_ball_containment(example_i(), 0.0)
    assert c.contained and c.max_distance_sq == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("gt,contained", [(0.1, False), (0.5, True), (2.0, True)])
def test_example_i_containment(gt, contained):
    c = ellipsoid_ball_containment(example_i(), gt)
    assert c.contained is contained
    oracle, _ = sphere_oracle_max(example_i(), gt, 1_000_000)
    assert c.max_distance_sq == pytest.approx(oracle, abs=1e-5)
    # the witness is an initial state whose image realizes the maximum
    assert in_initial_domain(c.witness) or np.sum((c.witness - 1) ** 2) == pytest.approx(1)
    assert evolved_violation(c.witness, example_i(), gt) == pytest.approx(c.max_distance_sq, abs=1e-9)


def test_example_i_early_value():
    # frozen from a 1.6e7-point Fibonacci lattice (1.13168833)
    assert ellipsoid_ball_containment(example_i(), 0.1).max_distance_sq == pytest.approx(1.1316883, abs=1e-7)


@pytest.mark.parametrize("gt", [0.1, 0.5, 2.0])
def test_example_ii_never_contained(gt):
    assert not ellipsoid_ball_containment(example_ii(), gt).contained


def test_example_i_geometry_decays():
    t = np.linspace(0, 10, 200)
    geo = ellipsoid_geometry(example_i(), t)
    for key in ("ellipsoid_center", "ellipsoid_semi_axes", "ball_center"):
        norms = np.linalg.norm(geo[key], axis=-1)
        assert np.all(np.diff(norms) <= 0)
        assert norms[-1] < 1e-4
    assert geo["ball_radius"] == 1.0


def test_example_ii_lambda_tilde_three_is_constant():
    rates = example_ii()
    np.testing.assert_array_equal(rates.lam_tilde(time_grid(rates))[:, 2], 1.0)


def test_sample_domain_example_i():
    cloud = sample_domain(example_i(), 0.5, 21)
    assert len(cloud.g) == 21**3
    assert cloud.in_evolved.any() and (~cloud.in_evolved).any()
    ball = sample_domain(example_i(), 0.5, 21, ball_only=True)
    assert ball.in_initial.all()
    # at gamma t = 0.5 the whole image of the initial ball is already inside
    assert ball.in_evolved.all()
    early = sample_domain(example_i(), 0.1, 21, ball_only=True)
    assert early.in_evolved.any() and (~early.in_evolved).any()


def test_sample_domain_example_ii_late():
    cloud = sample_domain(example_ii(), 30.0, 11)
    upper = cloud.v[:, 2] > 1
    assert upper.any()
    assert not cloud.in_evolved[upper].any()
    assert set(cloud.verdict[upper]) == {VerdictKind.ETERNALLY_NEGATIVE.value}
    row = next(cloud.rows())
    assert set(row) == {"v1", "v2", "v3", "t", "g", "in_initial_domain", "in_evolved_domain", "verdict"}


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.filter_too_much, HealthCheck.too_slow])
@given(
    st.lists(st.floats(-1, 1), min_size=3, max_size=3),
    st.sampled_from(["I", "II", "random"]),
    st.integers(0, 2**32 - 1),
)
def test_shrinking_toward_centre_never_becomes_eternal(dv, preset, seed):
    # g_inf is convex in v, so the property holds whenever the centre itself
    # is not eternally negative
    rng = np.random.default_rng(seed)
    if preset == "random":
        rates = TwoMapRates(rng.uniform(0, 2, 3) * rng.integers(0, 2, 3), rng.uniform(0, 2, 3) * rng.integers(0, 2, 3))
    else:
        rates = {"I": example_i, "II": example_ii}[preset]()
    assume(asymptotic_violation([1, 1, 1], rates) <= 1)
    v = 1 + np.array(dv)
    assume(in_initial_domain(v))
    assume(classify(v, rates, grid=60).kind is VerdictKind.ALWAYS_POSITIVE)
    for s in (0.25, 0.5, 0.75):
        assert classify(1 + s * (v - 1), rates, grid=60).kind is not VerdictKind.ETERNALLY_NEGATIVE


def test_ray_property_needs_a_non_eternal_centre():
    # phi relaxes fully, phi~ is the identity: the centre is eternally negative
    rates = TwoMapRates((1, 1, 1), (0, 0, 0))
    v = np.array([0.5, 0.5, 0.5])
    assert classify(v, rates).kind is VerdictKind.ALWAYS_POSITIVE
    assert classify(1 + 0.5 * (v - 1), rates).kind is VerdictKind.ETERNALLY_NEGATIVE
