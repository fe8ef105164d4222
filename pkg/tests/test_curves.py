"""Curves: lengths, 1D energies, geodesics, admissibility and
phase-separating points."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dgmm.curves import (
    Curve,
    TraceProfile,
    admissibility_gamma,
    alpha_K,
    constant_curve,
    curve_energy_I_eps,
    curve_length_LW,
    difference_bound_check,
    geodesic_distance,
    lipschitz_constant_estimate,
    midpoint_bound_check,
    phase_separating_point,
    segment_curve,
)
from dgmm.errors import (
    HypothesisViolated,
    InputError,
    MidpointMismatch,
    NonWellTails,
    NotAdmissible,
)
from dgmm.verify import make_admissible_trace


def straight_well_curve(W, n=401):
    return segment_curve(W.wells.B, W.wells.A, n=n)


def test_curve_validation():
    with pytest.raises(InputError):
        Curve(params=np.array([0.0, 0.0]), values=np.zeros((2, 2, 2)))
    with pytest.raises(InputError):
        Curve(params=np.array([0.0, 1.0]), values=np.zeros((3, 2, 2)))


def test_curve_interpolation_is_constant_beyond_the_ends(w0):
    c = straight_well_curve(w0, n=11)
    assert np.allclose(c.at(np.array([-5.0])), w0.wells.B)
    assert np.allclose(c.at(np.array([5.0])), w0.wells.A)


def test_straight_segment_length_for_the_reference_potential(w0):
    # int_{-1}^{1} 2 sqrt(W0) along t*A: exact value 2|a|^2 = 2
    c = straight_well_curve(w0, n=2001)
    assert curve_length_LW(c, w0) == pytest.approx(2.0, abs=2e-3)


@given(st.integers(2, 30), st.integers(0, 1000))
@settings(max_examples=30, deadline=None)
def test_length_is_invariant_under_reparametrization(n_extra, seed):
    W = make_w0_cached()
    c = straight_well_curve(W, n=101)
    rng = np.random.default_rng(seed)
    # strictly increasing refinement of the parameter grid
    extra = np.sort(rng.uniform(-1.0, 1.0, size=n_extra))
    params = np.union1d(c.params, extra)
    c2 = c.resampled(params)
    assert curve_length_LW(c2, W) == pytest.approx(curve_length_LW(c, W),
                                                   rel=1e-9)


_W0_CACHE = {}


def make_w0_cached():
    if "w0" not in _W0_CACHE:
        from dgmm.potentials import make_w0
        _W0_CACHE["w0"] = make_w0()
    return _W0_CACHE["w0"]


def test_reversed_curve_preserves_length(w0):
    c = straight_well_curve(w0, n=101)
    assert curve_length_LW(c.reversed(), w0) == pytest.approx(
        curve_length_LW(c, w0))


def test_energy_requires_well_tails(w0):
    c = segment_curve(np.zeros((2, 2)), w0.wells.A, n=51)
    with pytest.raises(NonWellTails):
        curve_energy_I_eps(c, w0, eps=0.1)
    with pytest.raises(InputError):
        curve_energy_I_eps(straight_well_curve(w0), w0, eps=0.0)


def test_energy_lower_bounds_length(w0, rng):
    # I_eps(phi) >= L_W(phi) by the arithmetic-geometric inequality
    c = straight_well_curve(w0, n=401)
    for eps in (0.5, 0.1, 0.02):
        assert curve_energy_I_eps(c, w0, eps) >= curve_length_LW(c, w0) - 1e-9


def test_geodesic_distance_between_the_wells(w0):
    res = geodesic_distance(w0, w0.wells.A, w0.wells.B, n_points=201,
                            refine=True)
    assert res.distance == pytest.approx(2.0, abs=0.02)
    assert res.diagnostics["refinement_gap"] < 0.01


def test_geodesic_of_coincident_points_is_zero(w0):
    res = geodesic_distance(w0, w0.wells.A, w0.wells.A)
    assert res.distance == 0.0


def test_geodesic_scales_like_the_square_root_of_the_potential(w0):
    from dgmm.potentials import make_scaled
    W2 = make_scaled(1.44)
    d1 = geodesic_distance(w0, w0.wells.A, w0.wells.B).distance
    d2 = geodesic_distance(W2, W2.wells.A, W2.wells.B).distance
    assert d2 == pytest.approx(1.2 * d1, rel=1e-3)


def test_lipschitz_estimate_for_the_reference(w0):
    # sup over B_R of 2 sqrt(W0) = 2 sqrt(R^2 + |a|^2): the point farthest
    # from both wells sits orthogonal to them on the sphere of radius R
    R = 2.0
    exact = 2.0 * np.sqrt(R**2 + 1.0)
    est = lipschitz_constant_estimate(w0, R, n_samples=40_000)
    assert est <= exact + 1e-9
    assert est >= exact - 0.05
    with pytest.raises(InputError):
        lipschitz_constant_estimate(w0, 0.0)


def test_admissibility_gamma_positive_for_a_short_curve(w0):
    c = straight_well_curve(w0, n=401)
    g = admissibility_gamma(w0.wells.A, w0.wells.B, w0, c, d=2.0)
    assert 0.0 < g <= 1.0


def test_admissibility_gamma_rejects_long_curves(w0):
    # a detoured curve at three times the distance violates the bound
    vals = straight_well_curve(w0, n=401).values * 5.0
    long_curve = Curve(params=np.linspace(-1, 1, 401), values=vals)
    long_curve.values[0] = w0.wells.B
    long_curve.values[-1] = w0.wells.A
    with pytest.raises(HypothesisViolated):
        admissibility_gamma(w0.wells.A, w0.wells.B, w0, long_curve, d=2.0)


def test_alpha_K_gate(w0):
    a = alpha_K(w0.wells, w0, K=3.0, d=2.0)
    assert 0.0 < a <= w0.wells.separation / 8.0
    with pytest.raises(HypothesisViolated):
        alpha_K(w0.wells, w0, K=6.0, d=2.0)


def test_phase_separating_point_tracks_the_shift(w0):
    x2 = np.linspace(-0.5, 0.5, 801)
    alpha = alpha_K(w0.wells, w0, K=4.0, d=2.0)
    for shift in (0.0, 0.05, -0.08):
        tr = make_admissible_trace(w0, x2, width=0.04, shift=shift)
        s = phase_separating_point(tr.zeta(), alpha, w0.wells.B, w0.wells.A)
        assert s == pytest.approx(shift, abs=0.02)


def test_phase_separating_point_requires_both_balls(w0):
    c = constant_curve(w0.wells.A, n=11)
    with pytest.raises(NotAdmissible):
        phase_separating_point(c, 0.1, w0.wells.B, w0.wells.A)


def test_difference_bound_for_matching_midpoints(w0):
    x2 = np.linspace(-0.5, 0.5, 801)
    phi = make_admissible_trace(w0, x2, width=0.04).zeta()
    psi = make_admissible_trace(w0, x2, width=0.07).zeta()
    alpha = alpha_K(w0.wells, w0, K=4.0, d=2.0)
    rep = difference_bound_check(phi, psi, alpha, w0,
                                 w0.wells.B, w0.wells.A)
    assert rep["C_alpha_empirical"] < 10.0
    psi_off = make_admissible_trace(w0, x2, width=0.07, shift=0.1).zeta()
    with pytest.raises(MidpointMismatch):
        difference_bound_check(phi, psi_off, alpha, w0,
                               w0.wells.B, w0.wells.A)


def test_trace_profile_shape_checks():
    x2 = np.linspace(-0.5, 0.5, 11)
    with pytest.raises(InputError):
        TraceProfile(x2=x2, u=np.zeros((11, 2)), d1u=np.zeros((11, 2)),
                     d2u=np.zeros((10, 2)))


def test_trace_derivative_consistency(w0):
    x2 = np.linspace(-0.5, 0.5, 2001)
    tr = make_admissible_trace(w0, x2, width=0.05)
    # u is the trapezoid antiderivative of d2u, so the discrete derivative
    # matches to second order
    assert tr.derivative_consistency() < 5e-3


def test_midpoint_bound_check_gates_and_output(w0):
    x2 = np.linspace(-0.5, 0.5, 1025)
    phi = make_admissible_trace(w0, x2, width=0.04, shift=0.01)
    psi = make_admissible_trace(w0, x2, width=0.04, shift=-0.01)
    rep = midpoint_bound_check(phi, psi, h=0.4, eps=0.04, K=5.0, W=w0)
    assert rep["distance"] == pytest.approx(0.02, abs=5e-3)
    assert rep["ratio"] > 0.0
    with pytest.raises(HypothesisViolated):
        midpoint_bound_check(phi, psi, h=0.4, eps=0.04, K=1.0, W=w0)
