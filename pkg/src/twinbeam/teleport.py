"""Continuous-variable teleportation as a conditional measurement.

Two routes to the same output state:

* the equivalent Gaussian-noise channel with K background photons,
  K = K0 e^{Gt} + (2M+1)(e^{Gt} - 1) + (1-eta)/eta,  K0 = 1 + N - sqrt(N(N+2));
* the explicit pipeline: double-quadrature measurement on the twin beam
  against the input as reference state, displacement feedback, and the
  average over outcomes.

Propagation noise enters through the evolved twin-beam variances
sigma_pm^2 -> e^{Gt}(sigma_pm^2 + D^2), D^2 = (1 - e^{-Gt})(2M+1)/4, which
the pipeline realizes exactly as a per-mode phase-insensitive gain channel
(quantum-limited amplifier of gain G(M+1) - M composed with a beamsplitter
of transmissivity G/[G(M+1) - M]).  The channel is back-propagated onto the
POVM through its adjoint so the conditioning itself always runs on the pure
twin beam in Schmidt form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fock import (FockOperator, TruncationConfig, TwinBeamParams,
                   _log_factorial, displaced_thermal, moments,
                   raising_exponential)
from .povm import heterodyne_noise, heterodyne_reference
from .quadrature import ConvergenceError, compensated_plane, gaussian_displacement_average


@dataclass(frozen=True)
class ChannelParams:
    """Teleportation resources and imperfections: twin-beam photons N, loss
    exposure Gamma*t, background thermal photons M, measurement efficiency eta."""

    N: float
    gamma_t: float = 0.0
    M: float = 0.0
    eta: float = 1.0

    def __post_init__(self):
        if self.N < 0 or self.gamma_t < 0 or self.M < 0:
            raise ValueError("N, gamma_t, M must be >= 0")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError(f"eta must be in (0, 1], got {self.eta}")

    @property
    def k0(self) -> float:
        """Background photons of the ideal channel: 1 + N - sqrt(N(N+2)), in (0, 1]."""
        return 1.0 + self.N - np.sqrt(self.N * (self.N + 2.0))

    @property
    def d_eta_sq(self) -> float:
        return heterodyne_noise(self.eta)

    @property
    def twb(self) -> TwinBeamParams:
        return TwinBeamParams.from_mean_photons(self.N)


def effective_K(params: ChannelParams) -> float:
    """K = K0 e^{Gt} + (2M+1)(e^{Gt} - 1) + (1-eta)/eta; equals K0 iff Gt=0, eta=1."""
    g = np.exp(params.gamma_t)
    return float(params.k0 * g + (2.0 * params.M + 1.0) * (g - 1.0) + params.d_eta_sq)


@dataclass(frozen=True)
class EvolvedTwb:
    """Twin-beam variances after propagation exposure."""

    sigma_plus_sq: float
    sigma_minus_sq: float


def evolve_twb_loss(params: ChannelParams) -> EvolvedTwb:
    """sigma_pm^2 -> e^{Gt}(sigma_pm^2 + D^2) with D^2 = (1 - e^{-Gt})(2M+1)/4.

    Consistent with effective_K: K = 4 sigma_minus^2(evolved) + (1-eta)/eta.
    """
    twb = params.twb
    g = np.exp(params.gamma_t)
    d2 = (1.0 - np.exp(-params.gamma_t)) * (2.0 * params.M + 1.0) / 4.0
    return EvolvedTwb(sigma_plus_sq=float(g * (twb.sigma_plus_sq + d2)),
                      sigma_minus_sq=float(g * (twb.sigma_minus_sq + d2)))


# ---------------------------------------------------------------------------
# Gaussian-noise channel route


def teleport_state(state: FockOperator, k: float,
                   trunc: TruncationConfig | None = None,
                   tol: float = 1e-9) -> FockOperator:
    """Output of the Gaussian displacement channel with k background photons."""
    return gaussian_displacement_average(state, k, trunc, tol=tol)


def teleport_coherent(z: complex, k: float, trunc: TruncationConfig) -> FockOperator:
    """Closed-form shortcut for coherent input: a displaced thermal state."""
    return displaced_thermal(z, k, trunc)


def coherent_fidelity(params: ChannelParams) -> float:
    """<z|sigma|z> = 1/(1 + K), independent of the coherent amplitude."""
    return 1.0 / (1.0 + effective_K(params))


@dataclass(frozen=True)
class BoundCheck:
    """Whether teleportation beats the classical fidelity boundary F = 1/2."""

    satisfied: bool
    k: float
    max_k: float = 1.0


def nonlocality_bound(params: ChannelParams) -> BoundCheck:
    """F > 1/2 iff K < 1, i.e. iff
    K0 < e^{-Gt} [1 - (1-eta)/eta - (2M+1)(e^{Gt} - 1)]."""
    k = effective_K(params)
    return BoundCheck(satisfied=bool(k < 1.0), k=k)


# ---------------------------------------------------------------------------
# explicit conditional pipeline


def _loss_kraus(transmissivity: float, dim: int, cutoff: float = 1e-18) -> list[np.ndarray]:
    """Beamsplitter-with-vacuum damping operators A_k, sum A_k^dag A_k = 1."""
    t = transmissivity
    lf = _log_factorial(dim)
    ops = []
    for k in range(dim):
        n = np.arange(k, dim)
        vals = np.exp(0.5 * (lf[n] - lf[k] - lf[n - k])) * t ** ((n - k) / 2.0) \
            * (1.0 - t) ** (k / 2.0)
        if vals.max() < cutoff and k > 2:
            break
        a = np.zeros((dim, dim), dtype=complex)
        a[n - k, n] = vals
        ops.append(a)
    return ops


def _amp_kraus(gain: float, dim: int, cutoff: float = 1e-18) -> list[np.ndarray]:
    """Quantum-limited amplifier operators B_k for gain = cosh^2 s."""
    s = np.arccosh(np.sqrt(gain))
    th, ch = np.tanh(s), np.cosh(s)
    lf = _log_factorial(dim)
    ops = []
    for k in range(dim):
        n = np.arange(0, dim - k)
        vals = th ** k * np.exp(0.5 * (lf[n + k] - lf[k] - lf[n])) / ch ** (n + 1.0)
        if vals.max() < cutoff and k > 2:
            break
        b = np.zeros((dim, dim), dtype=complex)
        b[n + k, n] = vals
        ops.append(b)
    return ops


class GainChannel:
    """Per-mode realization of the evolved-variance map: amplifier after loss.

    forward() maps states through the propagation noise; adjoint() pulls POVM
    elements backwards (unital, completeness-preserving).  Displacements
    commute through with amplitude scaling sqrt(gain) = e^{Gt/2}.
    """

    def __init__(self, gamma_t: float, m_thermal: float, dim: int):
        self.gain = float(np.exp(gamma_t))
        if self.gain == 1.0:
            self._loss, self._amp = [], []
            return
        g2 = self.gain * (m_thermal + 1.0) - m_thermal
        t1 = self.gain / g2
        self._loss = _loss_kraus(t1, dim) if t1 < 1.0 else []
        self._amp = _amp_kraus(g2, dim)

    @property
    def identity(self) -> bool:
        return self.gain == 1.0

    def forward(self, rho: np.ndarray) -> np.ndarray:
        if self.identity:
            return rho
        if self._loss:
            rho = sum(k @ rho @ k.conj().T for k in self._loss)
        return sum(k @ rho @ k.conj().T for k in self._amp)

    def adjoint(self, x: np.ndarray) -> np.ndarray:
        if self.identity:
            return x
        x = sum(k.conj().T @ x @ k for k in self._amp)
        if self._loss:
            x = sum(k.conj().T @ x @ k for k in self._loss)
        return x


def _schmidt_filter(beta: complex, lam: float, dim: int) -> np.ndarray:
    """D(-beta) lam^{a^dag a} D(beta) in exact normal-ordered form.

    Equals e^{-(1-lam)|beta|^2} e^{-(1-lam) beta a^dag} lam^{a^dag a}
    e^{-(1-lam) conj(beta) a}; every factor is an exact truncation, so the
    filter never aliases amplitude off the basis boundary.
    """
    c = 1.0 - lam
    e_up = raising_exponential(-c * beta, dim)
    lam_n = lam ** np.arange(dim)
    return np.exp(-c * abs(beta) ** 2) * ((e_up * lam_n[None, :]) @ e_up.conj().T)


def teleport_via_conditioning(state: FockOperator, params: ChannelParams,
                              trunc: TruncationConfig | None = None,
                              tol: float = 1e-8,
                              node_schedule=(20, 28, 38, 50),
                              coverage_tol: float = 1e-6) -> FockOperator:
    """Full pipeline: measure, feed the outcome forward, average.

    Per outcome alpha the unnormalized post-feedback state collapses to
    (1-lam^2)/pi * T(conj(alpha)) S_ref T(conj(alpha)) with the Schmidt
    filter T; detector inefficiency smears the reference once, propagation
    noise is pulled onto the reference through the channel adjoint and
    re-applied to the averaged output (displacement scaling e^{-Gt/2} on the
    way in, channel forward on the way out).  The compensating displacement
    uses the conjugated outcome label; that is the wiring for which the
    average reproduces the Gaussian-noise channel.
    """
    dim = state.dim if trunc is None else trunc.dim
    twb = params.twb
    lam = twb.lam
    chan = GainChannel(params.gamma_t, params.M, dim)
    scale = 1.0 / np.sqrt(chan.gain)            # e^{-Gt/2}

    ref = heterodyne_reference(state, params.eta,
                               TruncationConfig(dim, 1e-12)).matrix
    ref = chan.adjoint(ref)
    # conditioning transposes the element, which undoes the reference
    # transposition inside it: the filter sandwiches ref^T^T = smeared input
    ref_t = ref.T.copy()

    # outcome spread per coordinate: twin-beam marginal + reference + smearing,
    # with a quarter of slack; generous widths only cost a few extra nodes
    m = moments(state)
    var_ref = max(m.quad_variance(0.0), m.quad_variance(np.pi / 2.0))
    var_out = (0.25 * (2.0 + params.N) + 0.5 * params.d_eta_sq + var_ref) / scale ** 2
    center = -np.conj(m.a_mean) / scale

    prev = None
    for n_nodes in node_schedule:
        alphas, weights = compensated_plane(center, var_out, n_nodes)
        out = np.zeros((dim, dim), dtype=complex)
        for al, wt in zip(alphas, weights):
            filt = _schmidt_filter(scale * np.conj(al), lam, dim)
            out += wt * (filt @ ref_t @ filt)
        out *= (1.0 - lam ** 2) / np.pi
        out = chan.forward(out)
        if prev is not None and np.abs(out - prev).max() < tol:
            break
        prev = out
    else:
        raise ConvergenceError(
            f"outcome average did not settle below {tol} at {node_schedule[-1]}^2 nodes")

    coverage = float(np.trace(out).real)
    if abs(coverage - 1.0) > coverage_tol:
        raise ConvergenceError(
            f"outcome grid covers probability {coverage:.8f}; widen the grid or basis")
    out = 0.5 * (out + out.conj().T) / coverage
    return FockOperator(out)
