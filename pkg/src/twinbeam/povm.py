"""Detector models as positive operators on the measured twin-beam mode.

Four families: on/off (Geiger-like) detection, ideal and Gaussian-smeared
homodyne detection, finite-resolution (binned) homodyne detection, and
heterodyne / double-homodyne detection against a reference state.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .fock import (FockOperator, TruncationConfig,
                   displacement_normal_ordered)
from .quadrature import (ConvergenceError, gaussian_displacement_average,
                         gaussian_line, legendre_line)


@dataclass(frozen=True)
class PovmElement:
    """One measurement outcome: a positive operator with its label and detector metadata.

    eta is the detector efficiency, delta the bin width (0 for unbinned).
    Heterodyne elements keep the original reference state around so the
    phase-space module can evaluate their Wigner function in closed form.
    """

    operator: FockOperator
    outcome: int | float | complex
    eta: float
    delta: float = 0.0
    kind: str = "generic"
    reference: FockOperator | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.operator.dim

    def to_json(self) -> str:
        out = {"kind": self.kind, "eta": self.eta, "delta": self.delta,
               "operator": json.loads(self.operator.to_json())}
        oc = self.outcome
        out["outcome"] = [oc.real, oc.imag] if isinstance(oc, complex) else oc
        return json.dumps(out)


def smearing_variance(eta: float) -> float:
    """Quadrature noise variance (1-eta)/(4 eta) added by an inefficient homodyne."""
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"eta must be in (0, 1], got {eta}")
    return (1.0 - eta) / (4.0 * eta)


def heterodyne_noise(eta: float) -> float:
    """Background photons (1-eta)/eta added by an inefficient double-quadrature measurement."""
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"eta must be in (0, 1], got {eta}")
    return (1.0 - eta) / eta


# ---------------------------------------------------------------------------
# on/off detection


def onoff_povm(eta: float, trunc: TruncationConfig) -> tuple[PovmElement, PovmElement]:
    """The no-click/click pair: Pi_0 = diag((1-eta)^k), Pi_1 = 1 - Pi_0."""
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"eta must be in (0, 1], got {eta}")
    k = np.arange(trunc.dim)
    pi0 = np.diag((1.0 - eta) ** k).astype(complex)
    pi1 = np.eye(trunc.dim, dtype=complex) - pi0
    return (PovmElement(FockOperator(pi0), 0, eta, kind="onoff0"),
            PovmElement(FockOperator(pi1), 1, eta, kind="onoff1"))


# ---------------------------------------------------------------------------
# homodyne detection


def quadrature_wavefunction(x, dim: int) -> np.ndarray:
    """<n|x> for the quadrature eigenstate of (b + b^dag)/2.

    Evaluated by the normalized three-term recurrence with the Gaussian
    factor carried inside, so it stays finite for large n where the raw
    Hermite polynomials overflow.  Accepts scalar or array x; the Fock index
    is the last axis of the result.
    """
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape + (dim,))
    out[..., 0] = (2.0 / np.pi) ** 0.25 * np.exp(-x * x)
    if dim > 1:
        out[..., 1] = 2.0 * x * out[..., 0]
    for n in range(1, dim - 1):
        out[..., n + 1] = (2.0 * x * out[..., n] / np.sqrt(n + 1.0)
                           - np.sqrt(n / (n + 1.0)) * out[..., n - 1])
    return out


def homodyne_projector(x: float, trunc: TruncationConfig) -> PovmElement:
    """Rank-1 quadrature projector |x><x| (delta-normalized)."""
    phi = quadrature_wavefunction(float(x), trunc.dim)
    return PovmElement(FockOperator(np.outer(phi, phi).astype(complex)),
                       float(x), 1.0, kind="homodyne")


def _product_frame_nodes(x: float, var: float, dim: int):
    """Quadrature nodes for ∫ dt N(x-t; var) phi_n(t) phi_m(t).

    The kernel Gaussian and the wavefunctions' own Gaussian combine into one
    of precision 1/var + 4; Gauss-Hermite in that frame integrates the
    remaining polynomial content exactly at dim + 1 nodes.  Weights carry the
    frame compensation in log form and multiply the literal (bounded)
    integrand, so nothing overflows at any outcome or basis size.
    """
    from .quadrature import hermite_nodes

    precision = 1.0 / var + 4.0
    v_eff = 1.0 / precision
    x_eff = x / (var * precision)
    u, w = hermite_nodes(dim + 2)
    ts = x_eff + np.sqrt(2.0 * v_eff) * u
    with np.errstate(divide="ignore"):
        comp = np.exp(np.log(w) + u * u) * np.sqrt(2.0 * v_eff)
    return ts, comp


def homodyne_povm(x: float, eta: float, trunc: TruncationConfig) -> PovmElement:
    """Inefficient homodyne outcome: Gaussian convolution of the ideal projectors.

    The kernel variance is (1-eta)/(4 eta); at eta = 1 this returns the bare
    projector.  Evaluated in the product-Gaussian frame, where the node count
    dim + 2 makes the quadrature exact.
    """
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"eta must be in (0, 1], got {eta}")
    if eta == 1.0:
        return homodyne_projector(x, trunc)
    var = smearing_variance(eta)
    ts, comp = _product_frame_nodes(x, var, trunc.dim)
    kern = comp * np.exp(-(x - ts) ** 2 / (2.0 * var)) / np.sqrt(2.0 * np.pi * var)
    phis = quadrature_wavefunction(ts, trunc.dim)
    op = np.einsum("t,tn,tm->nm", kern, phis, phis)
    return PovmElement(FockOperator(op.astype(complex)), float(x), eta, kind="homodyne")


def binned_homodyne_povm(x: float, eta: float, delta: float, trunc: TruncationConfig,
                         tol: float = 1e-10, node_schedule=(8, 16, 32, 64)) -> PovmElement:
    """Finite-resolution outcome: bin average (1/delta) ∫ over [x-delta/2, x+delta/2].

    Gauss-Legendre nodes inside the bin, doubled until entries settle < tol.
    """
    if delta <= 0:
        raise ValueError(f"delta must be > 0, got {delta}")
    prev = None
    for n in node_schedule:
        ts, ws = legendre_line(x - 0.5 * delta, x + 0.5 * delta, n)
        if eta == 1.0:
            phis = quadrature_wavefunction(ts, trunc.dim)
            op = np.einsum("t,tn,tm->nm", ws / delta, phis, phis).astype(complex)
        else:
            op = np.zeros((trunc.dim, trunc.dim), dtype=complex)
            for t, w in zip(ts, ws):
                op += (w / delta) * homodyne_povm(float(t), eta, trunc).operator.matrix
        if prev is not None and np.abs(op - prev).max() < tol:
            return PovmElement(FockOperator(op), float(x), eta, delta=delta,
                               kind="binned-homodyne")
        prev = op
    raise ConvergenceError(f"bin average did not settle below {tol}")


def homodyne_diagonals(xs: np.ndarray, eta: float, dim: int) -> np.ndarray:
    """Diagonal entries <p|Pi_x|p> for many outcomes at once, shape (len(xs), dim).

    Enough for outcome probabilities and conditional photon-number averages
    on the twin beam, which only touch the diagonal; avoids building the full
    matrices at the large dims needed for energetic outcomes.  Same exact
    product-Gaussian evaluation as :func:`homodyne_povm`.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    if eta == 1.0:
        phi = quadrature_wavefunction(xs, dim)
        return phi * phi
    var = smearing_variance(eta)
    out = np.empty((xs.size, dim))
    for i, x in enumerate(xs):
        ts, comp = _product_frame_nodes(float(x), var, dim)
        kern = comp * np.exp(-(x - ts) ** 2 / (2.0 * var)) / np.sqrt(2.0 * np.pi * var)
        phis = quadrature_wavefunction(ts, dim)
        out[i] = np.einsum("t,tn->n", kern, phis * phis)
    return out


def default_homodyne_halfwidth(n_total: float, eta: float) -> float:
    """Outcome grid half-range 6 sqrt(sigma_lam^2 + Delta_eta^2); covers > 1 - 1e-8 mass."""
    return 6.0 * np.sqrt(0.25 * (1.0 + n_total) + smearing_variance(eta))


# ---------------------------------------------------------------------------
# heterodyne / double homodyne


def heterodyne_reference(reference: FockOperator, eta: float,
                         trunc: TruncationConfig | None = None) -> FockOperator:
    """Fock-transposed reference, Gaussian-smeared when eta < 1.

    The inefficient POVM family is D(alpha) applied to this one fixed
    operator, so the smearing is computed once per reference.
    """
    t = reference.transpose()
    if eta == 1.0:
        return t
    return gaussian_displacement_average(t, heterodyne_noise(eta), trunc)


def heterodyne_povm(alpha: complex, reference: FockOperator, eta: float,
                    trunc: TruncationConfig,
                    smeared_reference: FockOperator | None = None) -> PovmElement:
    """(1/pi) D(alpha) T D(alpha)^dag with T the (smeared) Fock transpose of the reference.

    The family integrates to the identity over d^2 alpha.  Pass
    ``smeared_reference`` (from :func:`heterodyne_reference`) when sweeping
    alpha to avoid recomputing the smearing.
    """
    from .fock import state_diagnostics

    diag = state_diagnostics(reference)
    if diag["hermiticity"] > 1e-10 or diag["min_eigenvalue"] < -1e-8 \
            or abs(diag["trace"] - 1.0) > 1e-6:
        raise ValueError("heterodyne reference must be a valid state")
    t = smeared_reference if smeared_reference is not None \
        else heterodyne_reference(reference, eta, trunc)
    dm = displacement_normal_ordered(alpha, trunc.dim)
    op = (dm @ t.matrix @ dm.conj().T) / np.pi
    return PovmElement(FockOperator(op), complex(alpha), eta, kind="heterodyne",
                       reference=reference)
