import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chirpeit import (
    AU,
    ControlFieldSpec,
    FloquetEngine,
    FloquetSpectrum,
    FrequencyGrid,
    MediumParams,
    NumericalError,
    ProbePulseSpec,
    SinusoidalChirp,
    ValidationError,
    build_coupling_matrix,
    build_propagation_matrix,
    convergence_report,
    derive_kappa2,
    incoming_spectrum,
    mixing_angle,
    nprime_eigensystem,
    reconstruct_time,
    solve_coherence,
    susceptibility,
)
from chirpeit.diagnostics import count_peaks
from chirpeit.floquet import PropagationInfo
from oracles import absorbing_envelope, coupling_entry, two_level_chi

MEDIUM = MediumParams(2e-13, 1.0, 0.1, 1e-9, 1e-14)
DELTA = 2e-9
FIG2_CONTROL = ControlFieldSpec(1e-8, SinusoidalChirp(5.0, DELTA))
UNCHIRPED = ControlFieldSpec(1e-8, SinusoidalChirp(0.0, DELTA))


# coupling matrix ----------------------------------------------------------

def test_no_control_gives_diagonal():
    a = build_coupling_matrix(3e-10, MEDIUM, ControlFieldSpec(0.0, SinusoidalChirp(5.0, DELTA)), 4).entries
    s = np.arange(-4, 5)
    np.testing.assert_array_equal(a, np.diag(3e-10 + s * DELTA + 1j * 1e-9))


def test_unchirped_diagonal_is_standard_eit():
    w = 2.5e-10
    a = build_coupling_matrix(w, MEDIUM, UNCHIRPED, 3).entries
    s = np.arange(-3, 4)
    ref = (w + s * DELTA + 1j * 1e-9) - 1e-16 / (w + s * DELTA + 1j * 1e-14)
    np.testing.assert_allclose(a, np.diag(ref), rtol=1e-14, atol=0)


@pytest.mark.parametrize("w", [0.0, 3.1e-11, -7.3e-10])
def test_entries_match_term_by_term_sum(w):
    a = build_coupling_matrix(w, MEDIUM, FIG2_CONTROL, 15).entries
    scale = np.max(np.abs(a))
    for s in (-15, -7, 0, 3, 15):
        for t in (-15, -2, 0, 1, 9, 15):
            ref = coupling_entry(w, s, t, MEDIUM, 1e-8, 5.0, DELTA)
            assert abs(a[s + 15, t + 15] - ref) <= 1e-12 * scale


@pytest.mark.xfail(strict=True, reason="Raman-resonant column: |A| beyond 12 rungs is ~1.4e3 x 1e-4 Omega^2/Delta at w=0")
def test_far_off_diagonal_entries_small_at_line_center():
    a = build_coupling_matrix(0.0, MEDIUM, FIG2_CONTROL, 15).entries
    far = np.abs(np.subtract.outer(np.arange(31), np.arange(31))) > 12
    assert np.max(np.abs(a[far])) < 1e-4 * 1e-16 / DELTA


def test_ladder_covariance():
    # moving the reduced frequency by one rung relabels the ladder
    w = 1.7e-10
    a0 = build_coupling_matrix(w, MEDIUM, FIG2_CONTROL, 20).entries
    a1 = build_coupling_matrix(w + DELTA, MEDIUM, FIG2_CONTROL, 20).entries
    inner = slice(5, 35)
    shifted = slice(6, 36)
    np.testing.assert_allclose(a1[inner, inner], a0[shifted, shifted], rtol=0, atol=1e-12 * np.max(np.abs(a0)))


# coherence ----------------------------------------------------------------

def test_coherence_linear_response():
    a = build_coupling_matrix(0.0, MEDIUM, FIG2_CONTROL, 10)
    np.testing.assert_array_equal(solve_coherence(np.zeros(21), a), np.zeros(21))
    bare = build_coupling_matrix(4e-10, MEDIUM, ControlFieldSpec(0.0, SinusoidalChirp(0.0, DELTA)), 3)
    omega = np.zeros(7, complex)
    omega[3] = 1e-10
    sigma = solve_coherence(omega, bare)
    assert sigma[3] == pytest.approx(-1e-10 / (4e-10 + 1j * 1e-9), rel=1e-14)
    assert np.count_nonzero(sigma) == 1


def test_eit_suppression():
    omega = np.zeros(41, complex)
    omega[20] = 1e-10
    dressed = solve_coherence(omega, build_coupling_matrix(0.0, MEDIUM, FIG2_CONTROL, 20))
    bare = solve_coherence(omega, build_coupling_matrix(0.0, MEDIUM, ControlFieldSpec(0.0, SinusoidalChirp(5.0, DELTA)), 20))
    # coherence at the resonant (driven) rung; other rungs carry Raman-scattered
    # coherence of a single-rung input, which is not the dark vector
    assert abs(bare[20]) / abs(dressed[20]) >= 1e2


def test_two_photon_pole_detected():
    medium = MediumParams(2e-13, 1.0, 0.1, 1e-9, 0.0)
    with pytest.raises(NumericalError, match="two-photon pole"):
        build_coupling_matrix(0.0, medium, FIG2_CONTROL, 10)


# propagation matrix -------------------------------------------------------

def test_bare_propagation_matrix_is_diagonal():
    w = -3e-10
    a = build_coupling_matrix(w, MEDIUM, ControlFieldSpec(0.0, SinusoidalChirp(0.0, DELTA)), 3)
    p = build_propagation_matrix(a, derive_kappa2(MEDIUM))
    s = np.arange(-3, 4)
    ref = s * DELTA - derive_kappa2(MEDIUM) / (w + s * DELTA + 1j * 1e-9)
    np.testing.assert_allclose(p.n, np.diag(ref), rtol=1e-14, atol=1e-30)


def test_fig2_passive_and_well_conditioned(fig2):
    eng = fig2.engine
    assert np.min(eng.eigenvalues.imag) >= -1e-15
    assert not eng.use_expm.any()
    assert np.max(eng.cond_u) < 1e8
    assert np.max(eng.residual) < 1e-8


def test_dark_mode_matches_adiabatic_ladder(fig2):
    # the least-absorbed mode is the k = 0 Bessel vector of the adiabatic
    # coupling matrix, with wavenumber w / v_g up to non-adiabatic terms of
    # relative size (g Delta / Omega_2)^2 cos^2(theta) ~ 8e-4
    th = fig2.theta
    nprime = nprime_eigensystem(5.0 * th.sin2, DELTA, 20)
    u0 = nprime.eigenvectors[:, 20]
    u0 = u0 / np.linalg.norm(u0)
    eng = fig2.engine
    for w in (1.953125e-11, 5.078125e-11, -1.015625e-10):
        i = int(np.argmin(np.abs(eng.grid.base_freqs - w)))
        lam = eng.grid.base_freqs[i] + eng.eigenvalues[i]
        k = int(np.argmin(lam.imag))
        v = eng.u[i][:, k] / np.linalg.norm(eng.u[i][:, k])
        assert abs(np.vdot(u0, v)) > 1 - 1e-4
        expected = eng.grid.base_freqs[i] / th.cos2
        assert abs(lam[k].real - expected) <= 2 * (5.0 * DELTA / 1e-8) ** 2 * th.cos2 * abs(expected)


# propagation --------------------------------------------------------------

SMALL = FrequencyGrid(DELTA, 128, 3)
NARROW = ProbePulseSpec(1e-10, 8e9)


def test_unchirped_reduces_to_susceptibility():
    eng = FloquetEngine(MEDIUM, UNCHIRPED, SMALL)
    inc = incoming_spectrum(NARROW, SMALL)
    z = 2e10
    out = eng.propagate(inc, z)
    f = SMALL.physical_freqs
    chi = two_level_chi(f, MEDIUM, 1e-8)
    ref = inc.amplitudes * np.exp(1j * z / AU.c * (f + MEDIUM.omega1 * chi / 2))
    assert np.max(np.abs(out.amplitudes - ref)) <= 1e-10 * np.max(np.abs(inc.amplitudes))


def test_z_zero_is_identity(fig2):
    out = fig2.engine.propagate(fig2.incoming, 0.0)
    np.testing.assert_array_equal(out.amplitudes, fig2.incoming.amplitudes)


def test_linearity(fig2, rng):
    a = fig2.incoming
    b = FloquetSpectrum(fig2.grid, rng.normal(size=a.amplitudes.shape) * 1e-3)
    k1, k2 = 0.7 - 0.2j, -1.3
    eng = fig2.engine
    z = 2e10
    lhs = eng.propagate(a * k1 + b * k2, z).amplitudes
    rhs = k1 * eng.propagate(a, z).amplitudes + k2 * eng.propagate(b, z).amplitudes
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(np.abs(lhs))


def test_eig_and_expm_paths_agree():
    grid = FrequencyGrid(DELTA, 128, 15)
    eng = FloquetEngine(MEDIUM, FIG2_CONTROL, grid)
    inc = incoming_spectrum(NARROW, grid)
    info = PropagationInfo(0.0)
    a = eng.propagate(inc, 2e10, method="eig")
    b = eng.propagate(inc, 2e10, method="expm", info=info)
    assert info.expm_columns == grid.n_omega
    assert np.max(np.abs(a.amplitudes - b.amplitudes)) <= 1e-6 * np.max(np.abs(a.amplitudes))


def test_power_non_increasing(fig2):
    at = fig2.engine.propagator(fig2.incoming)
    powers = [at(z).power() for z in np.linspace(0, 4e10, 9)]
    for p0, p1 in zip(powers, powers[1:]):
        assert p1 <= p0 * (1 + 1e-9)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.0, 5e10), st.floats(0.0, 6.0))
def test_passivity_random_input(seed, z, g):
    grid = FrequencyGrid(DELTA, 4, 12)
    control = ControlFieldSpec(1e-8, SinusoidalChirp(g, DELTA))
    eng = FloquetEngine(MEDIUM, control, grid)
    r = np.random.default_rng(seed)
    spec = FloquetSpectrum(grid, r.normal(size=(4, 25)) + 1j * r.normal(size=(4, 25)))
    p0 = spec.power()
    p1 = eng.propagate(spec, z).power()
    p2 = eng.propagate(spec, z + 1e9).power()
    assert p1 <= p0 * (1 + 1e-9)
    assert p2 <= p1 * (1 + 1e-9)


def test_grid_mismatch_rejected(fig2):
    with pytest.raises(ValidationError):
        fig2.engine.propagate(incoming_spectrum(NARROW, SMALL), 1e9)
    with pytest.raises(ValidationError):
        FloquetEngine(MEDIUM, FIG2_CONTROL, FrequencyGrid(1e-9, 64, 10))


def test_unchirped_delay_and_absorption():
    grid = FrequencyGrid(DELTA, 512, 4)
    eng = FloquetEngine(MEDIUM, UNCHIRPED, grid)
    th = mixing_angle(derive_kappa2(MEDIUM), 1e-8)
    out = eng.propagate(incoming_spectrum(NARROW, grid), 2e10)
    big_t = 2e10 / th.v_g
    t = big_t + np.linspace(-3, 3, 601) * 8e9
    got = np.abs(reconstruct_time(out, t)) / 1e-10
    ref = absorbing_envelope(2e10, t, 8e9, derive_kappa2(MEDIUM), 1e-9, 1e-8, AU.c, th.v_g)
    assert np.max(np.abs(got - ref)) < 0.02
    assert abs(t[np.argmax(got)] - big_t) < 0.03 * 8e9


@pytest.mark.xfail(strict=True, reason="quadratic window absorption costs ~5.3% of the peak at z=2e10")
def test_unchirped_loss_below_two_percent():
    grid = FrequencyGrid(DELTA, 512, 4)
    eng = FloquetEngine(MEDIUM, UNCHIRPED, grid)
    out = eng.propagate(incoming_spectrum(NARROW, grid), 2e10)
    th = mixing_angle(derive_kappa2(MEDIUM), 1e-8)
    t = 2e10 / th.v_g + np.linspace(-1, 1, 401) * 8e9
    assert 1 - np.max(np.abs(reconstruct_time(out, t))) / 1e-10 < 0.02


# time domain --------------------------------------------------------------

def test_round_trip_time_envelope(fig4):
    p = fig4.probe
    t = np.linspace(-3 * p.tau, 3 * p.tau, 301)
    got = reconstruct_time(fig4.incoming, t)
    np.testing.assert_allclose(got, p.field(t), rtol=0, atol=1e-6 * abs(p.omega10))


@pytest.mark.parametrize("z", [5e9, 1e10])
def test_matched_pulse_keeps_shape(fig4, z):
    p = fig4.probe
    big_t = z / fig4.theta.v_g
    t = big_t + np.linspace(-3, 3, 401) * p.tau
    got = np.abs(reconstruct_time(fig4.engine.propagate(fig4.incoming, z), t))
    ref = np.abs(p.field(t - big_t))
    assert np.max(np.abs(got - ref)) <= 0.03 * abs(p.omega10)


def test_matched_pulse_against_absorbing_envelope(fig4):
    p = fig4.probe
    z = 2e10
    big_t = z / fig4.theta.v_g
    t = big_t + np.linspace(-3, 3, 401) * p.tau
    got = np.abs(reconstruct_time(fig4.engine.propagate(fig4.incoming, z), t)) / abs(p.omega10)
    ref = absorbing_envelope(z, t, p.tau, fig4.kappa2, 1e-9, 1e-8, AU.c, fig4.theta.v_g)
    assert np.max(np.abs(got - ref)) < 0.02


@pytest.mark.xfail(strict=True, reason="same ~5.5% window absorption as the unchirped pulse at z=2e10")
def test_matched_pulse_keeps_shape_at_fig4_length(fig4):
    p = fig4.probe
    big_t = 2e10 / fig4.theta.v_g
    t = big_t + np.linspace(-3, 3, 401) * p.tau
    got = np.abs(reconstruct_time(fig4.engine.propagate(fig4.incoming, 2e10), t))
    assert np.max(np.abs(got - np.abs(p.field(t - big_t)))) <= 0.03 * abs(p.omega10)


def test_snapshot_front_multipeak_deep_single(fig2):
    at = fig2.engine.propagator(fig2.incoming)
    zs = np.linspace(0, 2e10, 201)
    early = np.abs([reconstruct_time(at(z), [2e10])[0] for z in zs])
    late = np.abs([reconstruct_time(at(z), [1e11])[0] for z in zs])
    assert count_peaks(early) >= 3
    assert count_peaks(late) == 1


# susceptibility -----------------------------------------------------------

def test_susceptibility_examples():
    clean = MediumParams(2e-13, 1.0, 0.1, 1e-9, 0.0)
    assert susceptibility(0.0, clean, 1e-8) == 0.0
    pref = 2e-13 * 4 * math.pi
    assert susceptibility(0.0, MEDIUM, 0.0) == pytest.approx(-pref / (1j * 1e-9), rel=1e-14)
    w = np.linspace(-3e-8, 3e-8, 1001)
    np.testing.assert_allclose(susceptibility(w, MEDIUM, 1e-8), two_level_chi(w, MEDIUM, 1e-8), rtol=1e-12)


def test_autler_townes_maxima():
    w = np.linspace(-2e-8, 2e-8, 40001)
    im = susceptibility(w, MEDIUM, 1e-8).imag
    left = w[w < 0][np.argmax(im[w < 0])]
    right = w[w > 0][np.argmax(im[w > 0])]
    assert left == pytest.approx(-1e-8, rel=0.02)
    assert right == pytest.approx(1e-8, rel=0.02)
    assert im[np.argmin(np.abs(w))] < 1e-3 * im.max()


def test_susceptibility_pole():
    lossless = MediumParams(2e-13, 1.0, 0.1, 0.0, 0.0)
    with pytest.raises(NumericalError, match="pole"):
        susceptibility(1e-8, lossless, 1e-8)


# truncation ---------------------------------------------------------------

def _incoming(pulse):
    return lambda g: incoming_spectrum(pulse, g)


def test_convergence_unchirped_is_exact():
    rows = convergence_report(MEDIUM, UNCHIRPED, _incoming(NARROW), 2e10, (2, 4), base_grid=SMALL)
    assert rows[0].max_rel_diff == 0.0 and rows[0].passed


def test_convergence_fig2(fig2):
    rows = convergence_report(fig2.medium, fig2.control, _incoming(fig2.probe), 2e10, (15, 20), base_grid=fig2.grid)
    assert rows[0].max_rel_diff < 1e-4 and rows[0].passed


def test_under_truncation_reported(fig2):
    rows = convergence_report(fig2.medium, fig2.control, _incoming(fig2.probe), 2e10, (5, 20), base_grid=fig2.grid)
    assert rows[0].max_rel_diff > 1e-2 and not rows[0].passed


def test_base_band_convergence(fig4):
    t = np.linspace(-6 * 8e9, 2e10 / fig4.theta.v_g + 6 * 8e9, 512)
    rows = convergence_report(fig4.medium, fig4.control, _incoming(fig4.probe), 2e10, (), n_omegas=(256, 512),
                              base_grid=FrequencyGrid(DELTA, 256, 20), t=t)
    assert rows[0].kind == "n_omega" and rows[0].passed
