import numpy as np
import pytest

from twinbeam.fock import (FockOperator, TruncationConfig, coherent_state,
                           displaced_thermal, fidelity, moments, number_state,
                           squeezed_state, thermal_state)
from twinbeam.teleport import (ChannelParams, GainChannel, effective_K,
                               evolve_twb_loss, nonlocality_bound, teleport_coherent,
                               teleport_state, teleport_via_conditioning)


def trace_distance(a: FockOperator, b: FockOperator) -> float:
    return float(np.abs(np.linalg.eigvalsh(a.matrix - b.matrix)).sum() / 2.0)


def test_channel_params_validation():
    with pytest.raises(ValueError):
        ChannelParams(N=-1.0)
    with pytest.raises(ValueError):
        ChannelParams(N=1.0, eta=0.0)
    with pytest.raises(ValueError):
        ChannelParams(N=1.0, gamma_t=-0.1)


def test_k0_properties():
    assert ChannelParams(N=0.0).k0 == 1.0
    for n in (0.1, 1.0, 5.0, 50.0):
        k0 = ChannelParams(N=n).k0
        assert 0.0 < k0 <= 1.0
    assert ChannelParams(N=1e6).k0 == pytest.approx(1.0 / 2e6, rel=1e-3)


def test_effective_k_examples():
    assert effective_K(ChannelParams(N=0.0)) == pytest.approx(1.0, rel=1e-15)
    assert effective_K(ChannelParams(N=1e9)) == pytest.approx(0.0, abs=1e-8)
    # finite-efficiency example: K0 + (1 - eta)/eta at gamma_t = 0
    assert effective_K(ChannelParams(N=1.0, eta=0.5)) == \
        pytest.approx((2.0 - np.sqrt(3.0)) + 1.0, rel=1e-14)


def test_effective_k_exceeds_k0_unless_ideal():
    base = ChannelParams(N=2.0)
    assert effective_K(base) == pytest.approx(base.k0, rel=1e-15)
    for p in (ChannelParams(N=2.0, gamma_t=0.1), ChannelParams(N=2.0, eta=0.9),
              ChannelParams(N=2.0, gamma_t=0.1, M=0.5, eta=0.8)):
        assert effective_K(p) > p.k0


def test_evolved_variances_identity_at_zero_exposure():
    p = ChannelParams(N=1.5)
    ev = evolve_twb_loss(p)
    assert ev.sigma_plus_sq == pytest.approx(p.twb.sigma_plus_sq, rel=1e-15)
    assert ev.sigma_minus_sq == pytest.approx(p.twb.sigma_minus_sq, rel=1e-15)


def test_evolved_variances_consistent_with_k():
    for p in (ChannelParams(N=1.0, gamma_t=0.2, M=0.4, eta=0.7),
              ChannelParams(N=3.0, gamma_t=0.05, M=0.0, eta=1.0)):
        ev = evolve_twb_loss(p)
        assert 4.0 * ev.sigma_minus_sq + p.d_eta_sq == \
            pytest.approx(effective_K(p), rel=1e-14)


def test_evolved_variances_against_kernel_quadrature():
    # independent route: mean-square of t e^{Gt/2} after adding noise of
    # variance D^2, integrated numerically over the Gaussian kernels
    from scipy.integrate import quad
    p = ChannelParams(N=1.0, gamma_t=0.1, M=0.5)
    s2 = p.twb.sigma_minus_sq
    g = np.exp(p.gamma_t)
    d2 = (1.0 - np.exp(-p.gamma_t)) * (2.0 * p.M + 1.0) / 4.0

    def second_moment():
        # Var[sqrt(g) (t + xi)] with t ~ N(0, s2), xi ~ N(0, d2)
        inner = quad(lambda t: t * t * np.exp(-t * t / (2 * (s2 + d2))), -12, 12,
                     epsabs=1e-14)[0]
        norm = quad(lambda t: np.exp(-t * t / (2 * (s2 + d2))), -12, 12,
                    epsabs=1e-14)[0]
        return g * inner / norm

    ev = evolve_twb_loss(p)
    assert ev.sigma_minus_sq == pytest.approx(second_moment(), rel=1e-10)


def test_evolved_minus_variance_crosses_vacuum_level():
    base = ChannelParams(N=10.0)
    assert base.twb.sigma_minus_sq < 0.25
    exposures = np.linspace(0.0, 3.0, 40)
    vals = [evolve_twb_loss(ChannelParams(N=10.0, gamma_t=float(t), M=0.2)).sigma_minus_sq
            for t in exposures]
    assert np.all(np.diff(vals) > 0)
    assert vals[-1] > 0.25
    # rescaled frame heads to the vacuum-level variance for M = 0 and large N
    big = evolve_twb_loss(ChannelParams(N=100.0, gamma_t=8.0, M=0.0))
    assert big.sigma_minus_sq * np.exp(-8.0) == pytest.approx(0.25, abs=0.02)


# ---------------------------------------------------------------------------
# the Gaussian-noise channel route


def test_teleport_state_zero_noise_is_identity():
    st = coherent_state(0.7, TruncationConfig(32))
    out = teleport_state(st, 0.0)
    assert np.abs(out.matrix - st.matrix).max() == 0.0


def test_teleport_coherent_closed_form_cross_check():
    trunc = TruncationConfig(64)
    z, k = 0.8 + 0.3j, 0.45
    quad_route = teleport_state(coherent_state(z, trunc), k, trunc)
    closed = teleport_coherent(z, k, trunc)
    assert trace_distance(quad_route, closed) < 1e-8


def test_teleport_fock_energy_gain():
    trunc = TruncationConfig(48)
    out = teleport_state(number_state(1, trunc), 0.5, trunc)
    assert moments(out).mean_photon == pytest.approx(1.5, abs=1e-6)


@pytest.mark.parametrize("z", [0.0, 1.0, 1.4 + 1.4j])
def test_coherent_fidelity_formula(z):
    trunc = TruncationConfig(96)
    k = 0.6
    out = teleport_state(coherent_state(z, trunc), k, trunc)
    f = fidelity(out, coherent_state(z, trunc))
    assert f == pytest.approx(1.0 / (1.0 + k), abs=1e-6)


def test_energy_bookkeeping():
    trunc = TruncationConfig(72)
    for st, k in ((coherent_state(1.0, trunc), 0.3),
                  (thermal_state(0.8, trunc), 0.7),
                  (squeezed_state(0.2, 0.3, trunc), 0.5)):
        n_in = moments(st).mean_photon
        out = teleport_state(st, k, trunc)
        assert moments(out).mean_photon == pytest.approx(n_in + k, abs=1e-6)


def test_fidelity_monotonic_in_each_parameter():
    from twinbeam.teleport import coherent_fidelity
    base = dict(N=2.0, gamma_t=0.1, M=0.3, eta=0.9)
    f0 = coherent_fidelity(ChannelParams(**base))
    assert coherent_fidelity(ChannelParams(**{**base, "N": 3.0})) > f0
    assert coherent_fidelity(ChannelParams(**{**base, "gamma_t": 0.2})) < f0
    assert coherent_fidelity(ChannelParams(**{**base, "M": 0.6})) < f0
    assert coherent_fidelity(ChannelParams(**{**base, "eta": 0.8})) < f0


def test_nonlocality_bound_matches_k_threshold():
    grid = [ChannelParams(N=n, gamma_t=g, M=m, eta=e)
            for n in (0.1, 1.0, 5.0) for g in (0.0, 0.3) for m in (0.0, 0.5)
            for e in (1.0, 0.7)]
    for p in grid:
        check = nonlocality_bound(p)
        k = effective_K(p)
        # the printed-bound algebra: K0 < e^{-Gt}[1 - D_eta^2 - (2M+1)(e^{Gt}-1)]
        rhs = np.exp(-p.gamma_t) * (1.0 - p.d_eta_sq
                                    - (2.0 * p.M + 1.0) * (np.exp(p.gamma_t) - 1.0))
        assert check.satisfied == (k < 1.0) == (p.k0 < rhs)
        assert check.max_k == 1.0


def test_classical_boundary_exact():
    p = ChannelParams(N=0.0)
    assert effective_K(p) == 1.0
    assert 1.0 / (1.0 + effective_K(p)) == 0.5
    assert not nonlocality_bound(p).satisfied


# ---------------------------------------------------------------------------
# the channel realization of the propagation noise


def test_gain_channel_is_trace_preserving_and_matches_moments():
    d = 48
    chan = GainChannel(0.2, 0.4, d)
    st = coherent_state(0.5 + 0.3j, TruncationConfig(d))
    out = chan.forward(st.matrix)
    assert np.trace(out).real == pytest.approx(1.0, abs=1e-10)
    g = np.exp(0.2)
    m = moments(FockOperator(out))
    assert m.a_mean == pytest.approx(np.sqrt(g) * (0.5 + 0.3j), abs=1e-8)
    assert m.quad_variance(0.0) == pytest.approx(
        g / 4.0 + (g - 1.0) * (2 * 0.4 + 1.0) / 4.0, abs=1e-8)


def test_gain_channel_adjoint_is_unital_and_dual():
    d = 40
    chan = GainChannel(0.15, 0.3, d)
    assert np.abs(chan.adjoint(np.eye(d, dtype=complex))[:24, :24]
                  - np.eye(24)).max() < 1e-10
    rng = np.random.default_rng(5)
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    rho /= np.trace(rho).real
    rho[16:, :] = 0.0
    rho[:, 16:] = 0.0  # keep support low so truncation cannot bite
    x = np.zeros((d, d), dtype=complex)
    x[:20, :20] = rng.normal(size=(20, 20))
    x = 0.5 * (x + x.conj().T)
    lhs = np.trace(chan.forward(rho) @ x)
    rhs = np.trace(rho @ chan.adjoint(x))
    assert lhs == pytest.approx(rhs, abs=1e-10)


def test_gain_channel_displacement_covariance():
    # E(D(b) rho D(b)^dag) = D(sqrt(g) b) E(rho) D(sqrt(g) b)^dag
    from twinbeam.fock import displacement_operator
    d = 56
    trunc = TruncationConfig(d)
    chan = GainChannel(0.2, 0.0, d)
    st = thermal_state(0.4, trunc)
    b = 0.4 - 0.2j
    db = displacement_operator(b, trunc).matrix
    lhs = chan.forward(db @ st.matrix @ db.conj().T)
    dgb = displacement_operator(np.sqrt(np.exp(0.2)) * b, trunc).matrix
    rhs = dgb @ chan.forward(st.matrix) @ dgb.conj().T
    assert np.abs(lhs[:32, :32] - rhs[:32, :32]).max() < 1e-8


# ---------------------------------------------------------------------------
# full conditional pipeline vs the channel


def _inputs(trunc):
    return {
        "vacuum": number_state(0, trunc),
        "fock1": number_state(1, trunc),
        "coherent": coherent_state(1.0, trunc),
        "squeezed": squeezed_state(0.0, 0.3, trunc),
    }


def test_pipeline_vacuum_input_yields_thermal_k0():
    trunc = TruncationConfig(40)
    params = ChannelParams(N=1.0)
    out = teleport_via_conditioning(number_state(0, trunc), params, trunc)
    k0 = params.k0
    assert moments(out).mean_photon == pytest.approx(k0, abs=1e-7)
    assert trace_distance(out, thermal_state(k0, trunc)) < 1e-7


def test_pipeline_coherent_fidelity():
    trunc = TruncationConfig(48)
    params = ChannelParams(N=1.0)
    out = teleport_via_conditioning(coherent_state(1.0, trunc), params, trunc)
    f = fidelity(out, coherent_state(1.0, trunc))
    assert f == pytest.approx(1.0 / (1.0 + params.k0), abs=1e-6)


def test_pipeline_fock_wigner_origin_rises_with_noise():
    from twinbeam.phasespace import wigner_origin
    trunc = TruncationConfig(48)
    vals = []
    for n in (5.0, 1.0, 0.3):  # decreasing N means growing K0
        out = teleport_via_conditioning(number_state(1, trunc),
                                        ChannelParams(N=n), trunc)
        vals.append(wigner_origin(out))
    assert vals[0] < vals[1] < vals[2]
    assert vals[0] > -2.0 / np.pi


@pytest.mark.parametrize("name", ["vacuum", "fock1", "coherent", "squeezed"])
def test_pipeline_matches_channel_ideal(name):
    trunc = TruncationConfig(44)
    params = ChannelParams(N=1.0)
    st = _inputs(trunc)[name]
    piped = teleport_via_conditioning(st, params, trunc)
    chan = teleport_state(st, effective_K(params), trunc)
    assert trace_distance(piped, chan) < 1e-6


@pytest.mark.parametrize("name", ["fock1", "coherent"])
def test_pipeline_matches_channel_noisy(name):
    trunc = TruncationConfig(52)
    params = ChannelParams(N=1.0, gamma_t=0.2, M=0.4, eta=0.7)
    st = _inputs(trunc)[name]
    piped = teleport_via_conditioning(st, params, trunc)
    chan = teleport_state(st, effective_K(params), trunc)
    assert trace_distance(piped, chan) < 1e-6
