import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp

from peres_lab import schro1d
from peres_lab.potentials import PiecewisePotential, SampledPotential, Segment
from peres_lab.schro1d import (IllConditionedError, WaveProfile1D, beta_decay_rate,
                               composite_noncommutativity, fit_log_linear, separation_scan,
                               solve_scattering_1d, wave_profile_1d)


def barrier(V=2.0, a=1.0, V2=0.0, V3=0.0):
    return PiecewisePotential([Segment(0.0, a, V, V2, V3)])


def barrier_t(V, E, a):
    # rectangular barrier from [0, a], incident from the left
    p = math.sqrt(E)
    K = cmath.sqrt(V - E + 0j)
    den = cmath.cosh(K * a) + 1j * (K * K - p * p) / (2 * p * K) * cmath.sinh(K * a)
    return cmath.exp(-1j * p * a) / den


def test_free_potential_exact():
    amp = solve_scattering_1d(PiecewisePotential(), 1.3)
    assert abs(amp.r) < 1e-15 and abs(amp.t - 1) < 1e-15
    assert amp.c_beta_left == 0 and amp.c_beta_right == 0


@pytest.mark.parametrize("V,E,a", [(2.0, 1.0, 1.0), (2.0, 3.0, 1.0), (-1.5, 0.4, 2.0), (5.0, 0.2, 0.7)])
def test_complex_barrier_closed_form(V, E, a):
    amp = solve_scattering_1d(barrier(V, a), E)
    exact = barrier_t(V, E, a)
    assert abs(amp.t - exact) / abs(exact) < 1e-10
    assert abs(amp.c_beta_left) < 1e-14 and abs(amp.c_beta_right) < 1e-14


def _ode_oracle(pot, E, x_lo, x_hi, psi_right):
    """Integrate the coupled equations right-to-left with scipy from the outgoing state."""
    def rhs(x, y):
        va, vb = pot.at(np.array([x]))
        va, vb = va[0], vb[0]
        a, da, b, db = y
        return [da, (va - E) * a + 1j * np.conj(vb) * b, db, (va + E) * b + 1j * vb * a]
    return solve_ivp(rhs, (x_hi, x_lo), psi_right, method="DOP853", rtol=1e-12, atol=1e-14,
                     max_step=0.01).y[:, -1]


def test_quaternionic_barrier_against_ivp_oracle():
    pot = barrier(1.0, 1.0, 0.5, 0.2)
    E = 1.2
    p = math.sqrt(E)
    amp = solve_scattering_1d(pot, E)
    # state just right of the support from the solver's amplitudes
    y1 = np.array([amp.t * cmath.exp(1j * p), 1j * p * amp.t * cmath.exp(1j * p),
                   amp.c_beta_right * math.exp(-p), -p * amp.c_beta_right * math.exp(-p)])
    a, da, b, db = _ode_oracle(pot, E, 0.0, 1.0, y1)
    # left side must be incoming + reflected + growing beta
    assert abs(a - (1 + amp.r)) < 1e-9
    assert abs(da - 1j * p * (1 - amp.r)) < 1e-9
    assert abs(b - amp.c_beta_left) < 1e-9
    assert abs(db - p * amp.c_beta_left) < 1e-9


segments = st.lists(st.tuples(st.floats(0.2, 1.5), st.floats(-3, 3), st.floats(-2, 2),
                              st.floats(-2, 2)), min_size=1, max_size=4)


def _build(spec):
    x, segs = 0.0, []
    for w, va, v2, v3 in spec:
        segs.append(Segment(x, x + w, va, v2, v3))
        x += w
    return PiecewisePotential(segs)


@settings(max_examples=40, deadline=None)
@given(segments, st.floats(0.1, 5.0))
def test_flux_conserved(spec, E):
    amp = solve_scattering_1d(_build(spec), E)
    assert amp.flux_residual < 1e-10


@settings(max_examples=20, deadline=None)
@given(segments, st.floats(0.1, 5.0))
def test_complex_potential_has_no_beta(spec, E):
    spec = [(w, va, 0.0, 0.0) for w, va, _, _ in spec]
    amp = solve_scattering_1d(_build(spec), E)
    assert abs(amp.c_beta_left) < 1e-14 and abs(amp.c_beta_right) < 1e-14


def test_beta_coefficients_nonzero_for_quaternionic():
    amp = solve_scattering_1d(barrier(0.0, 1.0, 0.5), 1.0)
    assert abs(amp.c_beta_right) > 1e-3 and abs(amp.c_beta_left) > 1e-3


def test_energy_must_be_positive():
    with pytest.raises(ValueError):
        solve_scattering_1d(barrier(), 0.0)


def test_ill_conditioning_is_reported(monkeypatch):
    monkeypatch.setattr(schro1d, "COND_LIMIT", 0.5)
    with pytest.raises(IllConditionedError) as err:
        solve_scattering_1d(barrier(0.0, 1.0, 0.5), 1.0)
    assert err.value.condition > 0.5


def test_profile_matches_asymptotic_forms():
    pot = barrier(0.3, 1.0, 0.5, -0.2)
    E = 0.8
    p = math.sqrt(E)
    grid = np.linspace(-3.0, 5.0, 161)
    prof = wave_profile_1d(pot, E, grid)
    amp = prof.amplitudes
    left, right = grid <= 0, grid >= 1
    xl, xr = grid[left], grid[right]
    assert np.abs(prof.psi_alpha[left] - (np.exp(1j * p * xl) + amp.r * np.exp(-1j * p * xl))).max() < 1e-10
    assert np.abs(prof.psi_beta[left] - amp.c_beta_left * np.exp(p * xl)).max() < 1e-10
    assert np.abs(prof.psi_alpha[right] - amp.t * np.exp(1j * p * xr)).max() < 1e-10
    assert np.abs(prof.psi_beta[right] - amp.c_beta_right * np.exp(-p * xr)).max() < 1e-10


def test_profile_satisfies_equations():
    pot = barrier(0.0, 1.0, 0.5)
    prof = wave_profile_1d(pot, 1.0, np.linspace(-2, 3, 2001))
    assert prof.ode_residual(pot) < 1e-4


def test_profile_grid_must_cover_support():
    with pytest.raises(ValueError):
        wave_profile_1d(barrier(), 1.0, np.linspace(0.5, 3, 10))


@pytest.mark.parametrize("E", [1.0, 4.0])
def test_decay_constant_equals_sqrt_energy(E):
    pot = barrier(0.0, 1.0, 0.5)
    prof = wave_profile_1d(pot, E, np.linspace(0.0, 5.0, 501))
    fit = beta_decay_rate(prof, (2.0, 5.0))
    assert abs(fit.kappa_fit - math.sqrt(E)) / math.sqrt(E) < 1e-3
    assert fit.is_exponential()


def test_decay_on_left_side():
    pot = barrier(0.0, 1.0, 0.5)
    prof = wave_profile_1d(pot, 1.0, np.linspace(-5.0, 1.0, 601))
    fit = beta_decay_rate(prof, (-5.0, -2.0))
    assert fit.kappa_fit == pytest.approx(1.0, rel=1e-6)


def test_power_law_is_not_exponential():
    x = np.linspace(2.0, 5.0, 100)
    amp = solve_scattering_1d(PiecewisePotential(), 1.0)
    zero = np.zeros_like(x, dtype=complex)
    prof = WaveProfile1D(x, zero, (x ** -2).astype(complex), zero, zero, (0.0, 1.0), amp)
    fit = beta_decay_rate(prof, (2.0, 5.0))
    assert not fit.is_exponential()


def test_window_overlap_rejected():
    prof = wave_profile_1d(barrier(0, 1, 0.5), 1.0, np.linspace(0, 5, 51))
    with pytest.raises(ValueError):
        beta_decay_rate(prof, (0.5, 3.0))


def test_window_without_signal_rejected():
    prof = wave_profile_1d(barrier(1.0), 1.0, np.linspace(0, 5, 51))
    with pytest.raises(ValueError):
        beta_decay_rate(prof, (2.0, 5.0))


def test_smooth_potential_fourth_order():
    x = np.linspace(-6.0, 6.0, 151)
    pot = SampledPotential.from_functions(x, lambda t: 0.8 * np.exp(-t * t),
                                          lambda t: 0.4 * np.exp(-t * t))
    ts = [solve_scattering_1d(pot, 1.0, step=h).t for h in (0.08, 0.04, 0.02)]
    ratio = abs(ts[0] - ts[1]) / abs(ts[1] - ts[2])
    assert 12.0 < ratio < 20.0


def test_smooth_potential_flux():
    x = np.linspace(-6.0, 6.0, 301)
    pot = SampledPotential.from_functions(x, lambda t: np.exp(-t * t), lambda t: 0.5 * np.exp(-t * t),
                                          lambda t: 0.3 * t * np.exp(-t * t))
    assert solve_scattering_1d(pot, 0.7).flux_residual < 1e-10


def test_identical_composites_commute():
    A = barrier(0.0, 1.0, 0.5)
    res = composite_noncommutativity(A, A, 1.5, 1.0)
    assert res.delta == 0.0


@pytest.mark.parametrize("d", [0.0, 0.7, 2.0, 5.0])
def test_complex_composites_commute(d):
    A = barrier(1.0, 1.0)
    B = PiecewisePotential([Segment(0.0, 0.6, -0.8)])
    assert composite_noncommutativity(A, B, d, 1.0).delta < 1e-12


def test_quaternionic_composites_do_not_commute_nearby():
    A, B = barrier(0.0, 1.0, 0.5), barrier(0.0, 1.0, 0.0, 0.5)
    assert composite_noncommutativity(A, B, 0.0, 1.0).delta > 1e-3


def test_noncommutativity_decays_like_closed_channel():
    A, B = barrier(0.0, 1.0, 0.5), barrier(0.0, 1.0, 0.0, 0.5)
    E = 1.0
    ds = np.linspace(0.0, 8.0, 81)
    fit = fit_log_linear(ds, separation_scan(A, B, ds, E))
    assert fit.kappa_fit == pytest.approx(math.sqrt(E), rel=0.1)


def test_negative_gap_rejected():
    with pytest.raises(ValueError):
        composite_noncommutativity(barrier(), barrier(), -0.1, 1.0)


def test_profile_csv(tmp_path):
    prof = wave_profile_1d(barrier(0, 1, 0.5), 1.0, np.linspace(0, 2, 5))
    path = tmp_path / "p.csv"
    prof.write_csv(path)
    lines = path.read_bytes().split(b"\n")
    assert lines[0] == b"x,re_psi_alpha,im_psi_alpha,re_psi_beta,im_psi_beta"
    assert len([l for l in lines if l]) == 6


def test_potential_json_round_trip(tmp_path):
    pot = barrier(0.2, 1.0, 0.5, -0.1)
    again = PiecewisePotential.from_json(pot.to_json())
    assert again.to_json() == pot.to_json()


def test_overlapping_segments_rejected():
    with pytest.raises(ValueError):
        PiecewisePotential([Segment(0, 1, 1.0), Segment(0.5, 2, 1.0)])
