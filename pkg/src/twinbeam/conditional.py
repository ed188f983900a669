"""Projection-postulate engine: outcome statistics and conditional states.

A measurement on mode b of the twin beam reduces mode a.  In the Schmidt
(Fock-diagonal) form of the state the two-mode object never has to be built:
with weights lam^n,

    P_x            = (1 - lam^2) sum_q lam^(2q) <q|Pi_x|q>
    rho_x[p, q]    = (1 - lam^2) lam^(p+q) <q|Pi_x|p> / P_x

i.e. rho_x is lam^(a^dag a) Pi_x^T lam^(a^dag a), renormalized, with the
transpose taken in the Fock basis (the transpose is invisible for detectors
whose elements are real-symmetric, like on/off and homodyne, but matters for
heterodyne).  Cost is O(d^2) per outcome.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .fock import FockOperator, TwinBeamParams
from .povm import PovmElement

PROBABILITY_FLOOR = 1e-12


class OutcomeProbabilityError(ValueError):
    """Raised when an outcome is too unlikely to condition on without amplifying noise."""


class CoverageError(ValueError):
    """Raised when an outcome family misses a non-negligible part of outcome space."""


@dataclass(frozen=True)
class ConditionalResult:
    """Probability (or density), the reduced state, and the state after feedback."""

    probability: float
    state: FockOperator
    post_state: FockOperator


def _schmidt(twb: TwinBeamParams, dim: int) -> np.ndarray:
    if twb.marginal_tail(dim) > 1e-8:
        warnings.warn(
            f"twin-beam marginal leaks {twb.marginal_tail(dim):.2e} past dim {dim}; "
            "increase the truncation", stacklevel=3)
    return twb.schmidt_weights(dim)


def outcome_probability(twb: TwinBeamParams, povm: PovmElement) -> float:
    """Probability (discrete outcome) or density (continuous outcome) of the outcome."""
    lam_n = _schmidt(twb, povm.dim)
    diag = np.diag(povm.operator.matrix).real
    p = (1.0 - twb.lam ** 2) * float(lam_n ** 2 @ diag)
    return max(p, 0.0)


def conditional_state(twb: TwinBeamParams, povm: PovmElement,
                      probability_floor: float = PROBABILITY_FLOOR) -> ConditionalResult:
    """Reduced state of the unmeasured beam given the outcome.

    Rejects outcomes with probability below the floor: dividing by a
    near-zero trace only amplifies truncation noise.
    """
    lam_n = _schmidt(twb, povm.dim)
    p = outcome_probability(twb, povm)
    if p < probability_floor:
        raise OutcomeProbabilityError(
            f"outcome probability {p:.3e} below floor {probability_floor:.1e}")
    raw = (1.0 - twb.lam ** 2) * (lam_n[:, None] * povm.operator.matrix.T * lam_n[None, :])
    rho = raw / p
    rho = 0.5 * (rho + rho.conj().T)
    state = FockOperator(rho)
    return ConditionalResult(probability=p, state=state, post_state=state)


def conditional_with_feedback(twb: TwinBeamParams, povm: PovmElement,
                              feedback: FockOperator | Callable[[object], FockOperator],
                              probability_floor: float = PROBABILITY_FLOOR
                              ) -> ConditionalResult:
    """Conditional state followed by an outcome-dependent unitary correction."""
    u = feedback(povm.outcome) if callable(feedback) else feedback
    if u.dim != povm.dim:
        raise ValueError(f"feedback dim {u.dim} != povm dim {povm.dim}")
    _assert_unitary_low_block(u)
    base = conditional_state(twb, povm, probability_floor)
    post = u.matrix @ base.state.matrix @ u.matrix.conj().T
    return ConditionalResult(probability=base.probability, state=base.state,
                             post_state=FockOperator(post))


def _assert_unitary_low_block(u: FockOperator, frac: float = 0.66, tol: float = 1e-6) -> None:
    # truncation makes U^dag U deviate near the top rows; check the low block
    d = max(2, int(u.dim * frac))
    g = (u.matrix.conj().T @ u.matrix)[:d, :d]
    dev = float(np.abs(g - np.eye(d)).max())
    if dev > tol:
        raise ValueError(f"feedback is not unitary on the low subspace (deviation {dev:.2e})")


def average_conditional_energy(twb: TwinBeamParams,
                               family: Sequence[PovmElement] | np.ndarray,
                               weights: Sequence[float] | None = None,
                               coverage_tol: float = 1e-6) -> float:
    """Mean photon number of the conditional states, averaged over outcomes.

    ``family`` is either a sequence of PovmElements or an array of element
    diagonals with shape (n_outcomes, dim); ``weights`` are quadrature
    weights for continuous families (ones for discrete).  Only diagonals
    enter: sum_x w_x P_x N_x = (1-lam^2) sum_p p lam^(2p) [sum_x w_x Pi_x]_pp.
    Completeness of the family forces the result to N/2 at any efficiency.
    """
    if isinstance(family, np.ndarray):
        diags = np.asarray(family, dtype=float)
    else:
        diags = np.stack([np.diag(el.operator.matrix).real for el in family])
    n_out, dim = diags.shape
    w = np.ones(n_out) if weights is None else np.asarray(weights, dtype=float)
    lam2n = _schmidt(twb, dim) ** 2
    summed = w @ diags                      # sum_x w_x diag(Pi_x)
    coverage = (1.0 - twb.lam ** 2) * float(lam2n @ summed)
    if abs(coverage - 1.0) > coverage_tol:
        raise CoverageError(
            f"outcome family covers probability {coverage:.8f}; "
            f"deficit {1.0 - coverage:.2e} exceeds {coverage_tol:.1e}")
    n = np.arange(dim)
    return (1.0 - twb.lam ** 2) * float((lam2n * n) @ summed)
