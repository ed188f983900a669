"""Closed-form results for conditional twin-beam measurements.

Every scalar here is directly evaluable and serves as ground truth for the
truncated-Fock numerics (and vice versa).  N is the mean total photon number
of the twin beam, eta the detector efficiency, x a homodyne outcome, delta a
bin width.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erf, eval_hermite

from .fock import _log_factorial


# ---------------------------------------------------------------------------
# on/off detection


def click_probability(n_total: float, eta: float) -> float:
    """P(click) = eta N / (2 + eta N)."""
    if n_total < 0 or not 0.0 < eta <= 1.0:
        raise ValueError("need n_total >= 0 and eta in (0, 1]")
    return eta * n_total / (2.0 + eta * n_total)


def click_mixture_moments(n_total: float, eta: float) -> tuple[float, float]:
    """(mean, variance) of the photon number of the click-conditioned mixture.

    Independent route: the mixture weights are proportional to
    lam^(2k) [1 - (1-eta)^k] for k >= 1, so the moments are differences of
    geometric series in x = lam^2 and y = lam^2 (1-eta).
    """
    if n_total <= 0:
        raise ValueError("click conditioning needs n_total > 0")
    x = n_total / (n_total + 2.0)
    y = x * (1.0 - eta)

    def s0(z): return z / (1.0 - z)
    def s1(z): return z / (1.0 - z) ** 2
    def s2(z): return z * (1.0 + z) / (1.0 - z) ** 3

    norm = s0(x) - s0(y)
    m1 = (s1(x) - s1(y)) / norm
    m2 = (s2(x) - s2(y)) / norm
    return m1, m2 - m1 * m1


def onoff_fano(n_total: float, eta: float) -> float:
    """Fano factor of the click-conditioned state,
    (1/2)(2+N)[1 + 2/(2+N eta) - 4(2+N)/(4+N(4+N eta))]; equals N/2 at eta=1."""
    if n_total <= 0:
        raise ValueError("no click statistics at n_total = 0")
    n = n_total
    return 0.5 * (2.0 + n) * (1.0 + 2.0 / (2.0 + n * eta)
                              - 4.0 * (2.0 + n) / (4.0 + n * (4.0 + n * eta)))


def onoff_wigner_origin(n_total: float, eta: float) -> float:
    """W(0) = -(2/pi) (2+eta N) / [(N+1)(2(1+N) - eta N)]; negative for all N>0, eta>0."""
    n = n_total
    return -(2.0 / np.pi) * (2.0 + eta * n) / ((n + 1.0) * (2.0 * (1.0 + n) - eta * n))


def onoff_s_wigner_origin(n_total: float, eta: float, s: float) -> float:
    """Ordering-smoothed value at the origin,
    -2(1+s)(2+eta N) / {pi (1+N-s)[2(1+N-s) - eta N(1+s)]}, for s in (-1, 0]."""
    if not -1.0 < s <= 0.0:
        raise ValueError(f"s must be in (-1, 0], got {s}")
    n = n_total
    return -2.0 * (1.0 + s) * (2.0 + eta * n) / (
        np.pi * (1.0 + n - s) * (2.0 * (1.0 + n - s) - eta * n * (1.0 + s)))


# ---------------------------------------------------------------------------
# homodyne detection


@dataclass(frozen=True)
class HomodyneStats:
    """Outcome-distribution widths and densities for homodyne detection on the twin beam."""

    n_total: float
    eta: float
    delta: float
    sigma_lambda_sq: float      # (1+N)/4, ideal detection
    delta_eta_sq: float         # (1-eta)/(4 eta), detection smearing
    delta_total_sq: float       # sum of the two

    def density(self, x) -> np.ndarray:
        """Unbinned outcome density: centered Gaussian of variance delta_total_sq."""
        v = self.delta_total_sq
        return np.exp(-np.asarray(x) ** 2 / (2.0 * v)) / np.sqrt(2.0 * np.pi * v)

    def density_binned(self, x) -> np.ndarray:
        """Exact bin-averaged density via the error function."""
        if self.delta == 0:
            return self.density(x)
        x = np.asarray(x, dtype=float)
        s = np.sqrt(2.0 * self.delta_total_sq)
        return (erf((x + 0.5 * self.delta) / s)
                - erf((x - 0.5 * self.delta) / s)) / (2.0 * self.delta)

    def density_binned_expansion(self, x) -> np.ndarray:
        """Second-order bin-width expansion G(x)[1 + (x^2 - V) delta^2 / (24 V^2)]."""
        x = np.asarray(x, dtype=float)
        v = self.delta_total_sq
        return self.density(x) * (1.0 + (x * x - v) * self.delta ** 2 / (24.0 * v * v))


def homodyne_stats(n_total: float, eta: float, delta: float = 0.0) -> HomodyneStats:
    if n_total < 0 or not 0.0 < eta <= 1.0 or delta < 0:
        raise ValueError("need n_total >= 0, eta in (0, 1], delta >= 0")
    s_lam = 0.25 * (1.0 + n_total)
    d_eta = (1.0 - eta) / (4.0 * eta)
    return HomodyneStats(n_total, eta, delta, s_lam, d_eta, s_lam + d_eta)


@dataclass(frozen=True)
class SqueezingReport:
    """Gaussian decomposition of the homodyne-conditioned state: displaced squeezed thermal."""

    alpha_eta: float
    zeta_eta: float
    n_th: float
    var_x: float
    var_y: float

    @property
    def is_squeezed(self) -> bool:
        return self.var_x < 0.25


def conditional_squeezing(x: float, n_total: float, eta: float) -> SqueezingReport:
    """Parameters of the conditional state D(alpha) S(zeta) nu_th S^dag D^dag.

    var_x = [1 + N(1-eta)] / [4(1 + eta N)] and var_y = (1+N)/4, so the state
    is squeezed exactly when eta > 1/2 (for N > 0), independent of x.
    """
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"eta must be in (0, 1], got {eta}")
    n = n_total
    alpha = eta * np.sqrt(n * (n + 2.0)) / (1.0 + eta * n) * x
    zeta = 0.25 * np.log((1.0 + n) * (1.0 + eta * n) / (1.0 + n * (1.0 - eta)))
    n_th = 0.5 * (np.sqrt((1.0 + n) * (1.0 + n * (1.0 - eta)) / (1.0 + eta * n)) - 1.0)
    var_x = (1.0 + n * (1.0 - eta)) / (4.0 * (1.0 + eta * n))
    var_y = 0.25 * (1.0 + n)
    return SqueezingReport(alpha_eta=float(alpha), zeta_eta=float(zeta),
                           n_th=float(max(n_th, 0.0)), var_x=float(var_x),
                           var_y=float(var_y))


def homodyne_matrix_element(n: int, m: int, x: float, n_total: float, eta: float) -> float:
    """Fock matrix element <n|rho_x|m> of the homodyne-conditioned state.

    Normalization factor sqrt(1 + eta N); the Hermite sum runs over the
    contraction index k <= min(n, m).  Real and symmetric in (n, m) for real
    outcomes.  Intended for n, m up to ~60 (log-scaled combinatorics).
    """
    if n < 0 or m < 0:
        raise ValueError("n, m must be >= 0")
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"eta must be in (0, 1], got {eta}")
    lam2 = n_total / (n_total + 2.0)
    lf = _log_factorial(n + m + 2)
    log_pref = (0.5 * (n + m) * np.log(lam2) if lam2 > 0 else (0.0 if n + m == 0 else -np.inf)) \
        - 0.5 * (lf[n] + lf[m] + (n + m) * np.log(2.0))
    pref = (1.0 - lam2) * np.sqrt(1.0 + eta * n_total) * np.exp(log_pref)
    pref *= np.exp(-4.0 * x * x * eta * eta * lam2 / (1.0 - lam2 * (1.0 - 2.0 * eta)))
    total = 0.0
    for k in range(min(n, m) + 1):
        log_c = (k * np.log(2.0) + lf[k] + lf[m] - lf[k] - lf[m - k]
                 + lf[n] - lf[k] - lf[n - k])
        total += np.exp(log_c) * eta ** (0.5 * (m + n) - k) \
            * eval_hermite(m + n - 2 * k, np.sqrt(2.0 * eta) * x)
    return float(pref * total)


# ---------------------------------------------------------------------------
# binned homodyne: squeezing thresholds and success probability


@dataclass(frozen=True)
class BinnedSqueezingReport:
    """Second-order bin-width corrections to the conditional squeezing."""

    var_x_delta: float
    x_delta: float
    q_delta: float
    g: float

    @property
    def is_squeezed(self) -> bool:
        return self.var_x_delta < 0.25


def binned_squeezing_scale(n_total: float, eta: float) -> float:
    """g = sqrt(6(2 eta - 1)/(eta (N+2))): the larger g, the less a finite bin
    width suppresses the squeezing probability.  Zero for eta <= 1/2."""
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"eta must be in (0, 1], got {eta}")
    if eta <= 0.5:
        return 0.0
    return float(np.sqrt(6.0 * (2.0 * eta - 1.0) / (eta * (n_total + 2.0))))


def binned_squeezing(x: float, n_total: float, eta: float, delta: float
                     ) -> BinnedSqueezingReport:
    """Bin-width-corrected variance, the squeezing threshold x_delta, and the
    overall squeezing probability Q_delta = Erf[g/delta].

    var_x(delta) = var_x + x^2 (delta^2/12) eta^2 N(N+2)/(1+eta N)^2, below
    the vacuum level 1/4 only for eta > 1/2 and |x| < x_delta.  For
    eta <= 1/2 there is no squeezing at any outcome and the report carries
    zeros; Q_delta = 0 at N = 0.
    """
    if delta <= 0:
        raise ValueError(f"delta must be > 0, got {delta}")
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"eta must be in (0, 1], got {eta}")
    n = n_total
    base = conditional_squeezing(x, n, eta)
    slope_sq = eta ** 2 * n * (n + 2.0) / (1.0 + eta * n) ** 2
    var = base.var_x + x * x * delta ** 2 / 12.0 * slope_sq
    if eta <= 0.5:
        return BinnedSqueezingReport(var_x_delta=float(var), x_delta=0.0,
                                     q_delta=0.0, g=0.0)
    x_d = np.sqrt(3.0 * (1.0 + eta * n) * (2.0 * eta - 1.0) / (eta ** 2 * (n + 2.0))) / delta
    g = binned_squeezing_scale(n, eta)
    q = 0.0 if n == 0 else float(erf(g / delta))
    return BinnedSqueezingReport(var_x_delta=float(var), x_delta=float(x_d),
                                 q_delta=q, g=float(g))


# ---------------------------------------------------------------------------
# conditional energy


def conditional_photon_number(x: float, n_total: float) -> float:
    """Mean photons of the ideally-conditioned state,
    N_x = x^2 N(N+2)/(1+N)^2 + N^2/(4(1+N))."""
    n = n_total
    return x * x * n * (n + 2.0) / (1.0 + n) ** 2 + 0.25 * n * n / (1.0 + n)


def energy_average(n_total: float) -> float:
    """Outcome-averaged conditional energy: exactly half the twin-beam photons."""
    return 0.5 * n_total
