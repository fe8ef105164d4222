"""Gluing constructions: cutoff ramps, balanced index selection, trace
slicing, horizontal modification, the three interpolants, and the
periodic recovery assembly."""

import numpy as np
import pytest

from dgmm.cell2d import (
    cell_from_field,
    default_cell_grid,
    embedded_profile_init,
    energy_E_eps,
    rescale_to_strip,
)
from dgmm.errors import (
    BetaOutOfRange,
    BudgetExceeded,
    HypothesisViolated,
    InputError,
    InvalidBounds,
    MidpointMismatch,
    MidpointTooFar,
)
from dgmm.glue import (
    CutoffProfile,
    build_combined_interpolant,
    build_same_midpoint_interpolant,
    build_translation_interpolant,
    construct_periodic_recovery,
    modify_horizontal,
    select_balanced_index,
    select_trace_slice,
    shift_trace,
)
from dgmm.verify import make_admissible_trace


@pytest.fixture(scope="module")
def strip(w0):
    """An x1-independent cell field rescaled to its natural layer width."""
    x1, x2 = default_cell_grid(64)
    u0 = embedded_profile_init(w0, x1, x2, half_len=2.0)
    cell = cell_from_field(u0, w0)
    eps = 0.25 / cell.scale_L
    z0 = rescale_to_strip(cell, eps, n_grid=(128, 256))
    return cell, eps, z0


# ---------------------------------------------------------------------------
# cutoff ramps


def test_cutoff_values_and_flat_zones():
    ramp = CutoffProfile(center=0.3, width=0.2, lo=-1.0, hi=2.0)
    x = np.linspace(-1.0, 1.5, 10_001)
    y = ramp(x)
    assert np.all(y >= -1.0 - 1e-12) and np.all(y <= 2.0 + 1e-12)
    assert np.all(y[x <= 0.2] == -1.0)
    assert np.all(y[x >= 0.4] == 2.0)
    assert ramp(np.array([0.3]))[0] == pytest.approx(0.5, abs=1e-12)


def test_cutoff_derivative_bounds_hold_on_a_dense_sample():
    ramp = CutoffProfile(center=0.0, width=0.37, lo=0.0, hi=1.4)
    x = np.linspace(-0.3, 0.3, 10_001)
    assert np.max(np.abs(ramp.d1(x))) <= ramp.d1_bound * (1 + 1e-12)
    assert np.max(np.abs(ramp.d2(x))) <= ramp.d2_bound * (1 + 1e-12)
    # the bounds are attained up to sampling resolution
    assert np.max(np.abs(ramp.d1(x))) >= ramp.d1_bound * 0.999
    assert np.max(np.abs(ramp.d2(x))) >= ramp.d2_bound * 0.99


def test_cutoff_constants():
    assert CutoffProfile.D1_CONST == pytest.approx(15.0 / 8.0)
    assert CutoffProfile.D2_CONST == pytest.approx(10.0 / np.sqrt(3.0))
    with pytest.raises(InputError):
        CutoffProfile(center=0.0, width=0.0)


def test_cutoff_derivatives_match_finite_differences():
    ramp = CutoffProfile(center=0.1, width=0.5, lo=0.0, hi=2.0)
    x = np.linspace(-0.12, 0.32, 501)
    h = 1e-6
    fd1 = (ramp(x + h) - ramp(x - h)) / (2 * h)
    assert np.max(np.abs(fd1 - ramp.d1(x))) < 1e-5
    fd2 = (ramp(x + h) - 2 * ramp(x) + ramp(x - h)) / h**2
    assert np.max(np.abs(fd2 - ramp.d2(x))) < 1e-2


# ---------------------------------------------------------------------------
# balanced index selection


def test_balanced_index_uniform_sequences_pick_the_first():
    n = 10
    a = np.full(n, 0.1)
    assert select_balanced_index(a, a, a, 1.0, 1.0, 1.0, tau=1.5) == 1


def test_balanced_index_skips_heavy_prefixes():
    a = np.array([1.0, 0.0, 0.0, 0.0])
    b = np.array([0.0, 1.0, 0.0, 0.0])
    c = np.zeros(4)
    # thresholds: a_k <= 1.5/4, b_k <= 2*1.5/0.5/4 = 1.5 -> index 2 passes
    assert select_balanced_index(a, b, c, 1.0, 1.0, 1.0, tau=1.5) == 2


def test_balanced_index_randomized_against_brute_force(rng):
    for _ in range(200):
        n = rng.integers(1, 30)
        a = rng.uniform(0, 1, n)
        b = rng.uniform(0, 1, n)
        c = rng.uniform(0, 1, n)
        Ca, Cb, Cc = a.sum(), b.sum(), c.sum()
        tau = rng.uniform(1.05, 1.95)
        k = select_balanced_index(a, b, c, Ca, Cb, Cc, tau)
        ta = tau * Ca / n
        tb = 2 * tau * Cb / ((tau - 1) * n)
        tc = 2 * tau * Cc / ((tau - 1) * n)
        ok = (a <= ta + 1e-12) & (b <= tb + 1e-12) & (c <= tc + 1e-12)
        assert ok[k - 1]
        assert not ok[: k - 1].any()


def test_balanced_index_invalid_inputs():
    a = np.array([0.5, 0.5])
    with pytest.raises(InvalidBounds):
        select_balanced_index(a, a, a, 1.0, 1.0, 1.0, tau=1.0)
    with pytest.raises(InvalidBounds):
        select_balanced_index(a, a, a, 0.5, 1.0, 1.0, tau=1.5)
    with pytest.raises(InvalidBounds):
        select_balanced_index(-a, a, a, 1.0, 1.0, 1.0, tau=1.5)
    with pytest.raises(InvalidBounds):
        select_balanced_index(a, a[:1], a, 1.0, 1.0, 1.0, tau=1.5)


# ---------------------------------------------------------------------------
# trace slicing and horizontal modification


def test_select_trace_slice_on_a_translation_invariant_field(strip, w0):
    cell, eps, z0 = strip
    sel = select_trace_slice(z0, w0, eps, delta=0.1875, tau=1.5,
                             side="right", K_ref=cell.energy)
    assert 0.5 - 2 * 0.1875 <= sel.s_value <= 0.5 - 0.1875
    # every column of an x1-independent field carries the full energy
    assert sel.trace_energy == pytest.approx(cell.energy, rel=0.05)
    assert sel.trace_energy < 1.5 * cell.energy


def test_select_trace_slice_input_gates(strip, w0):
    cell, eps, z0 = strip
    with pytest.raises(InputError):
        select_trace_slice(z0, w0, eps, 0.3, 1.5, "right", cell.energy)
    with pytest.raises(InputError):
        select_trace_slice(z0, w0, eps, 0.1875, 2.5, "right", cell.energy)
    with pytest.raises(InputError):
        select_trace_slice(z0, w0, eps, 0.1875, 1.5, "up", cell.energy)
    with pytest.raises(BudgetExceeded):
        select_trace_slice(z0, w0, eps, 0.1875, 1.5, "right",
                           K_ref=cell.energy * 1e-3)


def test_modify_horizontal_extends_and_preserves_the_interior(strip, w0):
    cell, eps, z0 = strip
    delta = 0.1875
    w, rep = modify_horizontal(z0, w0, eps, delta, 1.5, cell.energy)
    assert not w.periodic_x1
    assert w.x1[0] == pytest.approx(-0.5 - delta)
    assert w.x1[-1] == pytest.approx(0.5 + delta)
    # bit-identical interior
    interior_in = (z0.x1 >= -0.5 + 2 * delta) & (z0.x1 <= 0.5 - 2 * delta)
    sel = np.isin(np.round(w.x1 / z0.h1), np.round(z0.x1[interior_in] / z0.h1))
    assert np.array_equal(w.values[sel], z0.values[interior_in])
    # the outer extensions are constant in x1 (pure trace columns)
    m_ext = int(round(delta / z0.h1))
    tail = w.values[-m_ext:]
    assert np.max(np.abs(tail - tail[0])) == 0.0
    # the reported band spans 3*delta and the field carries the full cell
    # energy per unit width
    assert rep["band_energy_right"] == pytest.approx(
        3.0 * cell.energy * delta, rel=0.1)


# ---------------------------------------------------------------------------
# interpolants


@pytest.fixture(scope="module")
def traces(w0):
    x2 = np.linspace(-0.5, 0.5, 513)
    phi = make_admissible_trace(w0, x2, width=0.04)
    psi = make_admissible_trace(w0, x2, width=0.07)
    return x2, phi, psi


def test_translation_interpolant_at_zero_shift_is_constant(traces, w0):
    _, phi, _ = traces
    f = build_translation_interpolant(phi, 0.0, halfwidth=0.25, eps=0.05)
    assert np.max(np.abs(f.values - f.values[:1])) == 0.0
    assert np.max(np.abs(f.values[0] - phi.u)) < 1e-12


def test_translation_interpolant_is_flat_near_both_ends(traces, w0):
    _, phi, _ = traces
    f = build_translation_interpolant(phi, 0.1, halfwidth=0.25, eps=0.05,
                                      flat_fraction=0.5)
    # flat zones cover a quarter-width at each end
    left = f.x1 <= -0.25 * 0.75
    right = f.x1 >= 0.25 * 0.75
    assert np.max(np.abs(f.values[left] - f.values[0])) < 1e-13
    assert np.max(np.abs(f.values[right] - f.values[-1])) < 1e-13
    # the right end carries the shifted trace
    shifted = shift_trace(phi, 0.1)
    assert np.max(np.abs(f.values[-1] - shifted.u)) < 1e-12


def test_translation_energy_grows_from_the_baseline(traces, w0):
    _, phi, _ = traces
    eps = 0.05
    base = energy_E_eps(build_translation_interpolant(phi, 0.0, 0.25, eps),
                        w0, eps).total
    excesses = []
    for beta in (0.02, 0.04, 0.08):
        E = energy_E_eps(build_translation_interpolant(phi, beta, 0.25, eps),
                         w0, eps).total
        excesses.append(E - base)
    assert all(e > 0 for e in excesses)
    # quadratic scaling in the shift amplitude
    slope = np.polyfit(np.log([0.02, 0.04, 0.08]), np.log(excesses), 1)[0]
    assert slope == pytest.approx(2.0, abs=0.2)


def test_translation_interpolant_gates(traces):
    _, phi, _ = traces
    with pytest.raises(BetaOutOfRange):
        build_translation_interpolant(phi, 1.0, 0.25, 0.05)
    with pytest.raises(InputError):
        build_translation_interpolant(phi, 0.1, 0.02, 0.05)
    with pytest.raises(InputError):
        build_translation_interpolant(phi, 0.1, 0.25, 0.05, flat_fraction=1.5)


def test_same_midpoint_interpolant_connects_the_traces(traces, w0):
    _, phi, psi = traces
    f = build_same_midpoint_interpolant(phi, psi, halfwidth=0.25, eps=0.05,
                                        h=0.45, K=5.0, W=w0)
    assert np.array_equal(f.values[0], phi.u)
    assert np.array_equal(f.values[-1], psi.u)


def test_same_midpoint_with_identical_traces_is_constant(traces, w0):
    _, phi, _ = traces
    f = build_same_midpoint_interpolant(phi, phi, halfwidth=0.25, eps=0.05,
                                        h=0.45, K=5.0, W=w0)
    assert np.max(np.abs(f.values - f.values[:1])) < 1e-15


def test_same_midpoint_gates(traces, w0):
    x2, phi, psi = traces
    # a small shift keeps the tails clamped inside the grid but moves the
    # phase-separating point beyond the matching tolerance
    off = make_admissible_trace(w0, x2, width=0.05, shift=0.02)
    with pytest.raises(MidpointMismatch):
        build_same_midpoint_interpolant(phi, off, 0.25, 0.05, 0.45, 5.0, w0)
    with pytest.raises(HypothesisViolated):
        build_same_midpoint_interpolant(phi, psi, 0.25, 0.05, 0.45, 1.0, w0)
    short = make_admissible_trace(w0, np.linspace(-0.5, 0.5, 257), width=0.07)
    with pytest.raises(InputError):
        build_same_midpoint_interpolant(phi, short, 0.25, 0.05, 0.45, 5.0, w0)
    # tails must sit at the wells within h
    with pytest.raises(HypothesisViolated):
        build_same_midpoint_interpolant(phi, psi, 0.25, 0.05, 0.02, 5.0, w0)


def test_combined_interpolant_is_continuous_at_the_junction(w0):
    x2 = np.linspace(-0.5, 0.5, 513)
    phi = make_admissible_trace(w0, x2, width=0.04, shift=0.004)
    psi = make_admissible_trace(w0, x2, width=0.05, shift=-0.004)
    f = build_combined_interpolant(phi, psi, halfwidth=0.25, eps=0.05,
                                   h=0.45, h_tilde=1.0, K=5.0, W=w0)
    # the junction column appears once; neighbours on both sides sit in the
    # flat zones of their halves, so the jump of the values is zero
    n_half = (f.x1.size + 1) // 2
    jump = np.max(np.abs(np.diff(f.values[n_half - 2: n_half + 1], axis=0)))
    assert jump < 1e-12
    # ends: phi on the left, psi + constant on the right
    assert np.max(np.abs(f.values[0] - phi.u)) < 1e-12
    dev = f.values[-1] - psi.u
    assert np.max(np.abs(dev - dev.mean(axis=0))) < 1e-10


def test_combined_interpolant_gates(w0):
    x2 = np.linspace(-0.5, 0.5, 513)
    phi = make_admissible_trace(w0, x2, width=0.04, shift=0.004)
    psi = make_admissible_trace(w0, x2, width=0.05, shift=-0.004)
    with pytest.raises(MidpointTooFar):
        build_combined_interpolant(phi, psi, 0.25, 0.05, 0.45,
                                   h_tilde=1e-6, K=5.0, W=w0)
    with pytest.raises(InputError):
        build_combined_interpolant(phi, psi, 0.09, 0.05, 0.45,
                                   h_tilde=1.0, K=5.0, W=w0)
    with pytest.raises(HypothesisViolated):
        build_combined_interpolant(phi, psi, 0.25, 0.05, 0.45,
                                   h_tilde=1.0, K=1.0, W=w0)


def test_combined_interpolant_randomized_postconditions(w0, rng):
    x2 = np.linspace(-0.5, 0.5, 513)
    for _ in range(20):
        w1, w2 = rng.uniform(0.03, 0.08, size=2)
        s1, s2 = rng.uniform(-0.01, 0.01, size=2)
        phi = make_admissible_trace(w0, x2, width=w1, shift=s1)
        psi = make_admissible_trace(w0, x2, width=w2, shift=s2)
        f = build_combined_interpolant(phi, psi, halfwidth=0.25, eps=0.05,
                                       h=0.45, h_tilde=1.0, K=5.0, W=w0)
        assert np.max(np.abs(np.diff(f.values, axis=0))) < 0.05
        assert np.max(np.abs(f.values[0] - phi.u)) < 1e-8
        dev = f.values[-1] - psi.u
        assert np.max(np.abs(dev - dev.mean(axis=0))) < 1e-8


# ---------------------------------------------------------------------------
# periodic recovery


def test_recovery_doubles_the_cell_energy(strip, w0):
    cell, eps, z0 = strip
    h = eps * cell.scale_L / 2.0
    z, rep = construct_periodic_recovery(z0, w0, eps, delta=0.1875, tau=1.5,
                                         h=h, K_ref=cell.energy)
    assert z.x1[0] == pytest.approx(-1.0)
    assert z.x1[-1] == pytest.approx(1.0)
    assert rep["seam_residual"] <= 1e-10
    assert rep["wrap_mismatch"] <= 1e-8
    # an x1-independent field glues onto itself with no overhead
    assert rep["energy"] == pytest.approx(2.0 * cell.energy, rel=1e-6)
    assert abs(rep["overhead"]) < 1e-5


def test_recovery_errors_carry_their_stage(strip, w0):
    cell, eps, z0 = strip
    h = eps * cell.scale_L / 2.0
    with pytest.raises(BudgetExceeded, match=r"\[horizontal modification\]"):
        construct_periodic_recovery(z0, w0, eps, delta=0.1875, tau=1.5,
                                    h=h, K_ref=cell.energy * 1e-3)
