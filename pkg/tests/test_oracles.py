import numpy as np
import pytest
from scipy.special import erf

from twinbeam.conditional import conditional_state, outcome_probability
from twinbeam.fock import TruncationConfig, TwinBeamParams, moments
from twinbeam.oracles import (binned_squeezing, binned_squeezing_scale,
                              click_mixture_moments, click_probability,
                              conditional_photon_number, conditional_squeezing,
                              energy_average, homodyne_matrix_element, homodyne_stats,
                              onoff_fano, onoff_s_wigner_origin, onoff_wigner_origin)
from twinbeam.povm import binned_homodyne_povm, homodyne_povm, onoff_povm
from twinbeam.quadrature import gaussian_line

GRID_N = (0.1, 1.0, 5.0, 20.0)
GRID_ETA = (0.4, 0.5, 0.7, 1.0)


def test_click_probability_examples():
    assert click_probability(0.0, 0.7) == 0.0
    assert click_probability(2.0, 1.0) == pytest.approx(0.5, rel=1e-15)
    assert click_probability(1e9, 1.0) == pytest.approx(1.0, abs=1e-8)


def test_click_probability_matches_engine():
    trunc = TruncationConfig.for_twin_beam(5.0, 1e-13)
    twb = TwinBeamParams.from_mean_photons(5.0)
    for eta in GRID_ETA:
        _, pi1 = onoff_povm(eta, trunc)
        assert outcome_probability(twb, pi1) == \
            pytest.approx(click_probability(5.0, eta), abs=1e-12)


def test_fano_reference_point():
    assert onoff_fano(1.0, 1.0) == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize("n_total", GRID_N)
@pytest.mark.parametrize("eta", GRID_ETA)
def test_fano_equals_geometric_moment_oracle(n_total, eta):
    mean, var = click_mixture_moments(n_total, eta)
    assert onoff_fano(n_total, eta) == pytest.approx(var / mean, rel=1e-12)


def test_fano_ideal_detection_is_half_n():
    for n in (0.5, 1.0, 2.0, 2.2, 7.0):
        assert onoff_fano(n, 1.0) == pytest.approx(n / 2.0, rel=1e-12)


def test_fano_efficiency_slope_matches_moment_oracle():
    # dF/d(1-eta) at eta -> 1 equals +N(2-N)/(N+2)^2 (checked against the
    # geometric-moment route; the opposite-signed rough quote does not)
    for n in (0.5, 1.0, 3.0, 5.0):
        h = 1e-6
        mean1, var1 = click_mixture_moments(n, 1.0 - h)
        slope = (var1 / mean1 - n / 2.0) / h
        assert slope == pytest.approx(n * (2.0 - n) / (n + 2.0) ** 2, rel=1e-4)


def test_wigner_origin_examples():
    assert onoff_wigner_origin(1.0, 1.0) == pytest.approx(-1.0 / np.pi, rel=1e-15)
    # N -> 0 limit approaches the single-photon value -2/pi
    assert onoff_wigner_origin(1e-9, 0.8) == pytest.approx(-2.0 / np.pi, rel=1e-8)


def test_s_wigner_reduces_to_plain_wigner():
    for n in GRID_N:
        for eta in GRID_ETA:
            assert onoff_s_wigner_origin(n, eta, 0.0) == \
                pytest.approx(onoff_wigner_origin(n, eta), rel=1e-14)


def test_s_wigner_reference_value():
    # N=1, eta=1, s=-1/2: -2(1/2)(3)/(pi (5/2)(5 - 1/2)) = -3/(11.25 pi)
    assert onoff_s_wigner_origin(1.0, 1.0, -0.5) == \
        pytest.approx(-3.0 / (11.25 * np.pi), rel=1e-14)


def test_s_wigner_against_geometric_series():
    # independent route: 2/(pi(1-s)) sum_k p_k ((1+s)/(s-1))^k
    for (n, eta, s) in [(1.0, 1.0, -0.5), (5.0, 0.7, -0.3), (0.1, 0.4, -0.9),
                        (20.0, 0.8, -0.99)]:
        lam2 = n / (n + 2.0)
        k = np.arange(1, 4000)
        p = (1 - lam2) * (lam2 ** k - (lam2 * (1 - eta)) ** k) / click_probability(n, eta)
        t = (1.0 + s) / (s - 1.0)
        series = 2.0 / (np.pi * (1.0 - s)) * float(p @ (t ** k))
        assert onoff_s_wigner_origin(n, eta, s) == pytest.approx(series, rel=1e-12)


def test_s_wigner_negative_on_admissible_range():
    ss = np.linspace(-0.99, -1e-4, 60)
    for n in GRID_N:
        for eta in GRID_ETA:
            vals = [onoff_s_wigner_origin(n, eta, float(s)) for s in ss]
            assert max(vals) < 0.0


def test_s_wigner_vanishes_at_singular_limit():
    v = onoff_s_wigner_origin(1.0, 1.0, -0.999999)
    assert -1e-5 < v < 0.0
    with pytest.raises(ValueError):
        onoff_s_wigner_origin(1.0, 1.0, -1.0)


# ---------------------------------------------------------------------------
# homodyne statistics


def test_homodyne_stats_vacuum():
    stats = homodyne_stats(0.0, 1.0)
    assert stats.sigma_lambda_sq == pytest.approx(0.25, rel=1e-15)
    assert stats.delta_eta_sq == 0.0


def test_homodyne_stats_reference_values():
    stats = homodyne_stats(20.0, 0.7, 0.25)
    assert stats.sigma_lambda_sq == pytest.approx(21.0 / 4.0, rel=1e-15)
    assert stats.delta_eta_sq == pytest.approx(3.0 / 28.0, rel=1e-14)
    assert stats.delta_total_sq == pytest.approx(21.0 / 4.0 + 3.0 / 28.0, rel=1e-14)


def test_density_normalization():
    stats = homodyne_stats(5.0, 0.7, 0.3)
    xs, ws = gaussian_line(0.0, stats.delta_total_sq, 80)
    dens = stats.density(xs)
    gauss = np.exp(-xs ** 2 / (2 * stats.delta_total_sq)) / \
        np.sqrt(2 * np.pi * stats.delta_total_sq)
    assert float(ws @ (dens / gauss)) == pytest.approx(1.0, abs=1e-12)


def test_binned_density_small_bin_limit():
    # delta small enough to be negligible, large enough that the erf
    # difference keeps ~12 significant digits
    stats = homodyne_stats(5.0, 0.7, 1e-4)
    for x in (0.0, 1.0, 3.0):
        assert stats.density_binned(x) == pytest.approx(float(stats.density(x)), rel=1e-7)


def test_binned_density_expansion_agrees_at_small_delta():
    stats = homodyne_stats(20.0, 0.7, 0.25)
    for x in (0.0, 2.0, 5.0):
        exact = float(stats.density_binned(x))
        approx = float(stats.density_binned_expansion(x))
        assert abs(exact - approx) < 5e-8  # O(delta^4) remainder
    # the remainder scales like delta^4
    fine = homodyne_stats(20.0, 0.7, 0.125)
    assert abs(float(fine.density_binned(2.0)) -
               float(fine.density_binned_expansion(2.0))) < 5e-9


def test_binned_density_matches_binned_povm_probability():
    n_total, eta, delta = 20.0, 0.7, 0.25
    trunc = TruncationConfig.for_twin_beam(n_total, 1e-12, extra=40)
    twb = TwinBeamParams.from_mean_photons(n_total)
    stats = homodyne_stats(n_total, eta, delta)
    for x in (0.0, 2.0):
        el = binned_homodyne_povm(x, eta, delta, trunc)
        assert outcome_probability(twb, el) == \
            pytest.approx(float(stats.density_binned(x)), rel=1e-8)


# ---------------------------------------------------------------------------
# conditional squeezing


def test_conditional_squeezing_ideal_point():
    rep = conditional_squeezing(1.0, 1.0, 1.0)
    assert rep.alpha_eta == pytest.approx(np.sqrt(3.0) / 2.0, rel=1e-14)
    assert rep.zeta_eta == pytest.approx(np.arctanh(1.0 / 3.0), rel=1e-14)
    assert rep.n_th == 0.0
    assert rep.var_x * rep.var_y == pytest.approx(1.0 / 16.0, rel=1e-14)


def test_conditional_squeezing_boundary_efficiency():
    for n in (1.0, 5.0, 20.0):
        rep = conditional_squeezing(0.7, n, 0.5)
        assert rep.var_x == 0.25
        assert not rep.is_squeezed


def test_conditional_squeezing_reference_value():
    rep = conditional_squeezing(0.0, 20.0, 0.7)
    assert rep.var_x == pytest.approx(7.0 / 60.0, rel=1e-14)
    assert rep.is_squeezed


@pytest.mark.parametrize("n_total", GRID_N)
@pytest.mark.parametrize("eta", GRID_ETA)
def test_squeezing_threshold_is_half_efficiency(n_total, eta):
    rep = conditional_squeezing(0.6, n_total, eta)
    assert rep.is_squeezed == (eta > 0.5)
    assert rep.var_x * rep.var_y >= 1.0 / 16.0 - 1e-15


@pytest.mark.parametrize("n_total,eta,x", [(1.0, 0.8, 0.6), (5.0, 0.7, 0.0),
                                           (1.0, 0.4, 2.0), (20.0, 0.7, 0.6)])
def test_squeezing_report_matches_engine_variances(n_total, eta, x):
    extra = 120 if n_total >= 20 else 60
    trunc = TruncationConfig.for_twin_beam(n_total, 1e-12, extra=extra)
    twb = TwinBeamParams.from_mean_photons(n_total)
    res = conditional_state(twb, homodyne_povm(x, eta, trunc))
    m = moments(res.state)
    rep = conditional_squeezing(x, n_total, eta)
    assert m.quad_variance(0.0) == pytest.approx(rep.var_x, abs=1e-8)
    assert m.quad_variance(np.pi / 2) == pytest.approx(rep.var_y, abs=1e-8)
    assert (m.a_mean.real, m.a_mean.imag) == \
        (pytest.approx(rep.alpha_eta, abs=1e-8), pytest.approx(0.0, abs=1e-10))
    assert m.mean_photon == pytest.approx(
        rep.alpha_eta ** 2 + rep.n_th * np.cosh(2 * rep.zeta_eta)
        + np.sinh(rep.zeta_eta) ** 2, abs=1e-7)


# ---------------------------------------------------------------------------
# binned squeezing / figure values


def test_binned_squeezing_figure_values():
    rep = binned_squeezing(0.0, 20.0, 0.7, 0.25)
    assert rep.x_delta == pytest.approx(5.168765907047376, abs=1e-12)
    assert rep.q_delta == pytest.approx(0.9744617436897934, abs=1e-12)
    assert rep.g == pytest.approx(0.39477101697586137, abs=1e-14)


def test_binned_squeezing_no_squeezing_reports():
    rep = binned_squeezing(0.0, 5.0, 0.4, 0.25)
    assert rep.x_delta == 0.0 and rep.q_delta == 0.0 and rep.g == 0.0
    assert not rep.is_squeezed
    rep0 = binned_squeezing(0.0, 0.0, 0.8, 0.25)
    assert rep0.q_delta == 0.0


def test_binned_squeezing_threshold_behavior():
    n, eta, delta = 20.0, 0.7, 0.25
    xd = binned_squeezing(0.0, n, eta, delta).x_delta
    assert binned_squeezing(0.95 * xd, n, eta, delta).is_squeezed
    assert not binned_squeezing(1.05 * xd, n, eta, delta).is_squeezed


def test_q_delta_matches_density_quadrature():
    # integrating the exact binned density over |x| < x_delta reproduces the
    # closed form up to the O(delta^2) difference between the two
    n, eta, delta = 20.0, 0.7, 0.25
    rep = binned_squeezing(0.0, n, eta, delta)
    stats = homodyne_stats(n, eta, delta)
    from twinbeam.quadrature import legendre_line
    xs, ws = legendre_line(-rep.x_delta, rep.x_delta, 400)
    quad = float(ws @ stats.density_binned(xs))
    assert abs(quad - rep.q_delta) < 2e-4
    assert quad == pytest.approx(0.97439016140887, abs=1e-9)


def test_g_monotonicity():
    etas = np.linspace(0.51, 1.0, 20)
    ns = np.linspace(0.1, 30.0, 20)
    for n in ns:
        vals = [binned_squeezing_scale(float(n), float(e)) for e in etas]
        assert np.all(np.diff(vals) > 0)
    for e in etas:
        vals = [binned_squeezing_scale(float(n), float(e)) for n in ns]
        assert np.all(np.diff(vals) < 0)


def test_exact_binned_variance_is_outcome_independent():
    # documented discrepancy: the exact bin-averaged conditional state adds an
    # outcome-independent variance slope^2 delta^2/12 (law of total variance),
    # while binned_squeezing carries the x^2-weighted second-order form that
    # the squeezing thresholds and figure values are built from
    n, eta, delta = 20.0, 0.7, 0.25
    trunc = TruncationConfig.for_twin_beam(n, 1e-12, extra=120)
    twb = TwinBeamParams.from_mean_photons(n)
    slope_sq = eta ** 2 * n * (n + 2.0) / (1.0 + eta * n) ** 2
    base = conditional_squeezing(0.0, n, eta).var_x
    mixture_var = base + slope_sq * delta ** 2 / 12.0
    measured = []
    for x in (0.0, 2.0, 5.0):
        res = conditional_state(twb, binned_homodyne_povm(x, eta, delta, trunc))
        v = moments(res.state).quad_variance(0.0)
        measured.append(v)
        assert v == pytest.approx(mixture_var, abs=2e-5)
        assert v < 0.25  # exact binned conditioning stays squeezed at eta > 1/2
    assert max(measured) - min(measured) < 3e-5
    # the x^2-weighted form coincides with neither value except near x = 1
    printed = binned_squeezing(5.0, n, eta, delta).var_x_delta
    assert printed - mixture_var > 0.09


# ---------------------------------------------------------------------------
# matrix elements


def test_matrix_element_vacuum_limit():
    assert homodyne_matrix_element(0, 0, 0.0, 0.0, 1.0) == pytest.approx(1.0, rel=1e-14)
    assert homodyne_matrix_element(0, 1, 0.0, 1.0, 1.0) == 0.0  # odd parity at x = 0


def test_matrix_element_reduces_to_pure_state_at_ideal_efficiency():
    n_total, x = 1.0, 0.6
    lam2 = n_total / (n_total + 2.0)
    trunc = TruncationConfig(64)
    twb = TwinBeamParams.from_mean_photons(n_total)
    res = conditional_state(twb, homodyne_povm(x, 1.0, trunc))
    for n in range(6):
        for m in range(6):
            assert homodyne_matrix_element(n, m, x, n_total, 1.0) == \
                pytest.approx(res.state.matrix[n, m].real, abs=1e-10)


@pytest.mark.parametrize("eta", (0.8, 0.4))
def test_matrix_elements_match_engine_at_finite_efficiency(eta):
    # figure-2 style grids
    n_total, x = 1.0, 0.6
    trunc = TruncationConfig.for_twin_beam(n_total, 1e-13, extra=40)
    twb = TwinBeamParams.from_mean_photons(n_total)
    res = conditional_state(twb, homodyne_povm(x, eta, trunc))
    for n in range(7):
        for m in range(7):
            assert homodyne_matrix_element(n, m, x, n_total, eta) == \
                pytest.approx(res.state.matrix[n, m].real, abs=1e-8)


def test_matrix_element_symmetry_and_partial_trace():
    # the Hermite contraction accumulates roundoff with n+m; the closed form
    # is meant for the low-lying block, checked here against the engine
    n_total, eta, x = 5.0, 0.7, 1.2
    vals = np.array([[homodyne_matrix_element(n, m, x, n_total, eta)
                      for m in range(16)] for n in range(16)])
    assert np.abs(vals - vals.T).max() < 1e-12
    trunc = TruncationConfig.for_twin_beam(n_total, 1e-13, extra=60)
    twb = TwinBeamParams.from_mean_photons(n_total)
    res = conditional_state(twb, homodyne_povm(x, eta, trunc))
    engine_partial = float(np.trace(res.state.matrix[:16, :16]).real)
    assert np.trace(vals) == pytest.approx(engine_partial, abs=1e-9)
    assert res.state.trace().real == pytest.approx(1.0, abs=1e-10)


# ---------------------------------------------------------------------------
# conditional energy


def test_conditional_photon_number_values():
    assert conditional_photon_number(0.0, 1.0) == pytest.approx(0.125, rel=1e-15)
    assert conditional_photon_number(0.0, 0.0) == 0.0
    assert energy_average(7.0) == 3.5


def test_energy_average_gaussian_identity():
    # integrating N_x against the ideal outcome density reproduces N/2 exactly
    for n_total in (1.0, 5.0, 20.0):
        var = 0.25 * (1.0 + n_total)
        xs, ws = gaussian_line(0.0, var, 40)
        avg = float(ws @ np.array([conditional_photon_number(float(x), n_total)
                                   for x in xs]))
        assert avg == pytest.approx(energy_average(n_total), rel=1e-12)
