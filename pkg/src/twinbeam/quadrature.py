"""Gauss quadrature helpers shared by the measurement and channel code."""

from __future__ import annotations

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_hermite

from .fock import FockOperator, TruncationConfig, displacement_normal_ordered


class ConvergenceError(RuntimeError):
    """Raised when adaptive node doubling fails to settle below tolerance."""


def hermite_nodes(n: int):
    """Gauss-Hermite nodes/weights; scipy's rule stays finite at large n where
    numpy's overflows internally."""
    return roots_hermite(n)


def gaussian_line(center: float, variance: float, n: int):
    """Nodes/weights for ∫ f(t) N(t; center, variance) dt via Gauss-Hermite."""
    u, w = hermite_nodes(n)
    return center + np.sqrt(2.0 * variance) * u, w / np.sqrt(np.pi)


def legendre_line(a: float, b: float, n: int):
    """Nodes/weights for ∫_a^b f(t) dt."""
    u, w = leggauss(n)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return mid + half * u, half * w


def gaussian_plane(center: complex, variance: float, n: int):
    """Nodes/weights integrating f against an isotropic complex Gaussian density.

    Returns flat arrays (gammas, weights) such that
    Σ w_k f(γ_k) ≈ ∫ d²γ N2(γ; center, variance per coordinate) f(γ).
    The Gaussian stays inside the quadrature measure, so integrand values far
    out in the plane enter with exponentially small weights (safe against
    truncation artifacts in displaced operators).
    """
    u, w = hermite_nodes(n)
    s = np.sqrt(2.0 * variance)
    g = center + s * (u[:, None] + 1j * u[None, :])
    ww = (w[:, None] * w[None, :]) / np.pi
    return g.ravel(), ww.ravel()


def compensated_plane(center: complex, variance: float, n: int):
    """Nodes/weights for a plain ∫ d²γ f(γ) where f has a Gaussian envelope
    of roughly the given per-coordinate variance around center.

    The envelope is only an accuracy hint; weights carry the e^{+u²}
    compensation, so f itself must decay at least as fast as assumed.
    """
    u, w = hermite_nodes(n)
    with np.errstate(divide="ignore"):
        lw = np.log(w)                   # underflowed weights drop out below
    s = np.sqrt(2.0 * variance)
    g = center + s * (u[:, None] + 1j * u[None, :])
    ww = np.exp(lw[:, None] + lw[None, :] + u[:, None] ** 2 + u[None, :] ** 2) * s * s
    return g.ravel(), ww.ravel()


def gaussian_displacement_average(state: FockOperator, n_noise: float,
                                  trunc: TruncationConfig | None = None,
                                  tol: float = 1e-9,
                                  node_schedule=(12, 18, 26, 36, 48)) -> FockOperator:
    """Average of D(γ) ρ D(γ)† over a complex Gaussian with ⟨|γ|²⟩ = n_noise.

    This is the Gaussian displacement (additive-noise) channel with n_noise
    background photons.  Node count is doubled until entries move < tol.
    """
    if n_noise < 0:
        raise ValueError("n_noise must be >= 0")
    if n_noise == 0:
        return FockOperator(state.matrix.copy())
    dim = state.dim if trunc is None else trunc.dim
    rho = state.matrix
    prev = None
    for n in node_schedule:
        gs, ws = gaussian_plane(0.0, n_noise / 2.0, n)
        out = np.zeros((dim, dim), dtype=complex)
        for g, wt in zip(gs, ws):
            dm = displacement_normal_ordered(g, dim)
            out += wt * (dm @ rho @ dm.conj().T)
        if prev is not None and np.abs(out - prev).max() < tol:
            return FockOperator(0.5 * (out + out.conj().T))
        prev = out
    raise ConvergenceError(
        f"displacement average did not settle below {tol} at {node_schedule[-1]}^2 nodes"
    )
