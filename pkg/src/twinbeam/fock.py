"""Truncated Fock-space operator algebra.

Single-mode states, unitaries and moments on the truncated basis
|0>, ..., |d-1>, plus the twin-beam parameter bundle that the rest of the
package conditions on.  Conventions used throughout:

    x = (a + a^dag)/2,  y = i(a^dag - a)/2      (vacuum variance 1/4)
    D(g) = exp(g a^dag - conj(g) a)
    S(z) = exp((conj(z) a^2 - z a^dag^2)/2)     (real z > 0 squeezes x)

Everything is immutable after construction; all operations are pure.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

HBAR_FREE = None  # quadratures are dimensionless; no hbar enters anywhere


class TruncationError(ValueError):
    """Raised when a construction leaks more tail mass than the configured tolerance."""


@dataclass(frozen=True)
class TruncationConfig:
    """Basis size and the tail mass a constructor is allowed to leak past it."""

    dim: int
    tail_tolerance: float = 1e-10

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError(f"dim must be >= 2, got {self.dim}")
        if not 0 < self.tail_tolerance < 1:
            raise ValueError("tail_tolerance must be in (0, 1)")

    @classmethod
    def for_twin_beam(cls, n_total: float, tail_tolerance: float = 1e-10,
                      extra: int = 0) -> "TruncationConfig":
        """Smallest basis whose twin-beam thermal marginal leaks less than the tolerance.

        The marginal photon distribution is geometric with ratio
        lam^2 = N/(N+2), so the mass beyond dimension d is lam^(2d).
        `extra` adds headroom for subsequent displacements/squeezing.
        """
        lam2 = n_total / (n_total + 2.0)
        if lam2 <= 0.0:
            dim = 16
        else:
            dim = int(np.ceil(np.log(tail_tolerance) / np.log(lam2))) + 1
        return cls(dim=max(dim, 16) + extra, tail_tolerance=tail_tolerance)


@dataclass(frozen=True, eq=False)
class FockOperator:
    """A complex square matrix on the truncated Fock basis.

    Represents states, POVM elements and unitaries alike; which invariants
    apply is up to the constructor (see ``assert_state``).  The matrix is
    never mutated after construction.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"matrix must be square, got shape {m.shape}")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dag(self) -> "FockOperator":
        return FockOperator(self.matrix.conj().T)

    def transpose(self) -> "FockOperator":
        """Fock-basis transposition (no conjugation)."""
        return FockOperator(self.matrix.T)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def __matmul__(self, other: "FockOperator") -> "FockOperator":
        return FockOperator(self.matrix @ other.matrix)

    def expect(self, observable: np.ndarray) -> complex:
        return complex(np.trace(self.matrix @ observable))

    def to_json(self) -> str:
        rows = [[[float(v.real), float(v.imag)] for v in row] for row in self.matrix]
        return json.dumps({"dim": self.dim, "rows": rows})

    @classmethod
    def from_json(cls, text: str) -> "FockOperator":
        data = json.loads(text)
        m = np.array([[complex(re, im) for re, im in row] for row in data["rows"]])
        if m.shape != (data["dim"], data["dim"]):
            raise ValueError("row data inconsistent with declared dim")
        return cls(m)


# ---------------------------------------------------------------------------
# ladder operators


@lru_cache(maxsize=64)
def annihilation(dim: int) -> np.ndarray:
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)
    a.flags.writeable = False
    return a


def creation(dim: int) -> np.ndarray:
    return annihilation(dim).conj().T


@lru_cache(maxsize=64)
def number_operator(dim: int) -> np.ndarray:
    n = np.diag(np.arange(dim, dtype=float)).astype(complex)
    n.flags.writeable = False
    return n


@lru_cache(maxsize=64)
def parity_vector(dim: int) -> np.ndarray:
    p = (-1.0) ** np.arange(dim)
    p.flags.writeable = False
    return p


@lru_cache(maxsize=256)
def _log_factorial(dim: int) -> np.ndarray:
    lf = np.concatenate([[0.0], np.cumsum(np.log(np.arange(1, dim, dtype=float)))])
    lf.flags.writeable = False
    return lf


# ---------------------------------------------------------------------------
# unitaries


def displacement_operator(gamma: complex, trunc: TruncationConfig) -> FockOperator:
    """D(gamma) as the matrix exponential of the truncated generator (exactly unitary)."""
    d = trunc.dim
    a = annihilation(d)
    return FockOperator(expm(gamma * a.conj().T - np.conj(gamma) * a))


def squeeze_operator(zeta: complex, trunc: TruncationConfig) -> FockOperator:
    """S(zeta); for real zeta > 0 the x quadrature variance becomes e^{-2 zeta}/4."""
    d = trunc.dim
    a = annihilation(d)
    a2 = a @ a
    return FockOperator(expm(0.5 * (np.conj(zeta) * a2 - zeta * a2.conj().T)))


def raising_exponential(z: complex, dim: int) -> np.ndarray:
    """exp(z a^dag) on the truncated space.

    a^dag is nilpotent after truncation, so the series terminates and the
    result is the exact truncation of the infinite-dimensional operator:
    no boundary aliasing, at the price of not being unitary.
    """
    lf = _log_factorial(dim)
    out = np.zeros((dim, dim), dtype=complex)
    if z == 0:
        np.fill_diagonal(out, 1.0)
        return out
    lz = np.log(complex(z))
    for n in range(dim):
        m = np.arange(n, dim)
        k = m - n
        out[m, n] = np.exp(k * lz + 0.5 * (lf[m] - lf[n]) - lf[k])
    return out


def displacement_normal_ordered(gamma: complex, dim: int) -> np.ndarray:
    """The exact Fock matrix elements of D(gamma), not unitarized by truncation.

    <n+k|D(g)|n> = sqrt(n!/(n+k)!) g^k e^{-|g|^2/2} L_n^{(k)}(|g|^2), evaluated
    by the upward Laguerre recurrence per diagonal (stable; the triangular
    normal-ordered product cancels catastrophically at moderate |g|).
    Preferred inside Gaussian-weighted quadratures: amplitude pushed past the
    truncation boundary is lost instead of reflected back into low levels.
    """
    if gamma == 0:
        return np.eye(dim, dtype=complex)
    x = abs(gamma) ** 2
    absg = abs(gamma)
    lf = _log_factorial(dim)
    lag = _laguerre_table(x, dim)                   # lag[n, k] = L_n^(k)(x)
    rows, cols = np.indices((dim, dim))
    k = np.abs(rows - cols)
    n_small = np.minimum(rows, cols)
    log_mag = k * np.log(absg) + 0.5 * (lf[n_small] - lf[n_small + k]) - 0.5 * x
    unit = np.where(rows >= cols, (gamma / absg) ** k, (-np.conj(gamma) / absg) ** k)
    return lag[n_small, k] * np.exp(log_mag) * unit


def _laguerre_table(x: float, dim: int) -> np.ndarray:
    """L_n^(k)(x) for all n, k < dim by the upward three-term recurrence in n."""
    ks = np.arange(dim, dtype=float)
    table = np.empty((dim, dim))
    table[0] = 1.0
    if dim > 1:
        table[1] = 1.0 + ks - x
    for n in range(1, dim - 1):
        table[n + 1] = ((2.0 * n + ks + 1.0 - x) * table[n]
                        - (n + ks) * table[n - 1]) / (n + 1.0)
    return table


# ---------------------------------------------------------------------------
# states


def _check_tail(tail: float, trunc: TruncationConfig, what: str) -> None:
    if tail > trunc.tail_tolerance:
        raise TruncationError(
            f"{what}: tail mass {tail:.3e} exceeds tolerance {trunc.tail_tolerance:.1e} "
            f"at dim {trunc.dim}"
        )


def number_state(n: int, trunc: TruncationConfig) -> FockOperator:
    """Projector |n><n|."""
    if not 0 <= n < trunc.dim:
        raise ValueError(f"n={n} outside truncated basis of dim {trunc.dim}")
    m = np.zeros((trunc.dim, trunc.dim), dtype=complex)
    m[n, n] = 1.0
    return FockOperator(m)


def coherent_amplitudes(z: complex, dim: int) -> np.ndarray:
    n = np.arange(dim)
    lf = _log_factorial(dim)
    if z == 0:
        c = np.zeros(dim, dtype=complex)
        c[0] = 1.0
        return c
    return np.exp(n * np.log(complex(z)) - 0.5 * lf - 0.5 * abs(z) ** 2)


def coherent_state(z: complex, trunc: TruncationConfig) -> FockOperator:
    c = coherent_amplitudes(z, trunc.dim)
    tail = 1.0 - float(np.vdot(c, c).real)
    _check_tail(tail, trunc, f"coherent_state(z={z})")
    return FockOperator(np.outer(c, c.conj()))


def thermal_state(n_mean: float, trunc: TruncationConfig) -> FockOperator:
    if n_mean < 0:
        raise ValueError("n_mean must be >= 0")
    if n_mean == 0:
        return number_state(0, trunc)
    r = n_mean / (1.0 + n_mean)
    p = (1.0 - r) * r ** np.arange(trunc.dim)
    _check_tail(r ** trunc.dim, trunc, f"thermal_state(n_mean={n_mean})")
    return FockOperator(np.diag(p).astype(complex))


def squeezed_state(alpha: complex, zeta: complex, trunc: TruncationConfig) -> FockOperator:
    """Pure displaced squeezed vacuum D(alpha) S(zeta) |0>."""
    vac = np.zeros(trunc.dim, dtype=complex)
    vac[0] = 1.0
    psi = squeeze_operator(zeta, trunc).matrix @ vac
    psi = displacement_operator(alpha, trunc).matrix @ psi
    tail = 1.0 - float(np.vdot(psi, psi).real)
    _check_tail(max(tail, 0.0), trunc, f"squeezed_state(alpha={alpha}, zeta={zeta})")
    return FockOperator(np.outer(psi, psi.conj()))


def displaced_thermal(alpha: complex, n_mean: float, trunc: TruncationConfig) -> FockOperator:
    """D(alpha) nu_th D(alpha)^dag: the output of a Gaussian noise channel on |alpha>."""
    nu = thermal_state(n_mean, trunc).matrix
    dm = displacement_operator(alpha, trunc).matrix
    return FockOperator(dm @ nu @ dm.conj().T)


# ---------------------------------------------------------------------------
# validity checks and moments


def state_diagnostics(op: FockOperator) -> dict:
    m = op.matrix
    herm = float(np.abs(m - m.conj().T).max())
    eigs = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    return {"trace": float(np.trace(m).real), "hermiticity": herm,
            "min_eigenvalue": float(eigs.min())}


def assert_state(op: FockOperator, tail_tolerance: float = 1e-10) -> None:
    d = state_diagnostics(op)
    if d["hermiticity"] > 1e-12:
        raise ValueError(f"not Hermitian: deviation {d['hermiticity']:.2e}")
    if d["min_eigenvalue"] < -1e-10:
        raise ValueError(f"not positive: min eigenvalue {d['min_eigenvalue']:.2e}")
    if not (1.0 - tail_tolerance - 1e-12 <= d["trace"] <= 1.0 + 1e-12):
        raise ValueError(f"trace {d['trace']} outside [1 - {tail_tolerance}, 1]")


@dataclass(frozen=True)
class Moments:
    """First and second moments of a single-mode state."""

    mean_photon: float
    photon_variance: float
    a_mean: complex
    a2_mean: complex

    @property
    def fano(self) -> float:
        """Photon-number variance over mean; the vacuum limit is taken as 1
        (the coherent-state level), avoiding 0/0."""
        if self.mean_photon < 1e-12:
            return 1.0
        return self.photon_variance / self.mean_photon

    def quad_variance(self, phase: float = 0.0) -> float:
        """Variance of x_theta = (a e^{-i theta} + a^dag e^{i theta})/2."""
        mean = (self.a_mean * np.exp(-1j * phase)).real
        sq = 0.25 * (2.0 * (self.a2_mean * np.exp(-2j * phase)).real
                     + 1.0 + 2.0 * self.mean_photon)
        return float(sq - mean * mean)


def moments(state: FockOperator) -> Moments:
    m = state.matrix
    tr = float(np.trace(m).real)
    if abs(tr - 1.0) > 1e-10:
        warnings.warn(f"state trace {tr:.12f} != 1; rescaling for moments", stacklevel=2)
        m = m / tr
    d = state.dim
    a = annihilation(d)
    n_diag = np.arange(d)
    pops = np.diag(m).real
    n_mean = float(pops @ n_diag)
    n2_mean = float(pops @ n_diag ** 2)
    return Moments(
        mean_photon=n_mean,
        photon_variance=n2_mean - n_mean ** 2,
        a_mean=complex(np.trace(a @ m)),
        a2_mean=complex(np.trace(a @ a @ m)),
    )


def fidelity(state: FockOperator, pure_state: FockOperator) -> float:
    """Overlap <psi|rho|psi>; the second argument must be (numerically) pure."""
    p = pure_state.matrix
    purity = float(np.trace(p @ p).real)
    if abs(purity - 1.0) > 1e-6:
        raise ValueError(f"second argument is not pure (purity {purity:.8f})")
    return float(np.trace(state.matrix @ p).real)


# ---------------------------------------------------------------------------
# twin-beam parameters


@dataclass(frozen=True)
class TwinBeamParams:
    """The two-mode squeezed vacuum, parameterized by lam and N = 2 lam^2/(1-lam^2).

    N is the mean *total* photon number (N/2 per beam).  The optional
    (kappa, tau) pair records the parametric map lam = tanh(|kappa| tau) of
    the amplifier that produced the state; it plays no computational role.
    """

    lam: float
    n_total: float
    kappa: float | None = None
    tau: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.lam < 1.0:
            raise ValueError(f"lam must be in [0, 1), got {self.lam}")
        expected = 2.0 * self.lam ** 2 / (1.0 - self.lam ** 2)
        if abs(expected - self.n_total) > 1e-12 * max(1.0, abs(self.n_total)):
            raise ValueError(
                f"lam={self.lam} and n_total={self.n_total} inconsistent "
                f"(expected n_total={expected})"
            )

    @classmethod
    def from_mean_photons(cls, n_total: float) -> "TwinBeamParams":
        if n_total < 0:
            raise ValueError("n_total must be >= 0")
        return cls(lam=float(np.sqrt(n_total / (n_total + 2.0))), n_total=float(n_total))

    @classmethod
    def from_lambda(cls, lam: float) -> "TwinBeamParams":
        return cls(lam=float(lam), n_total=2.0 * lam ** 2 / (1.0 - lam ** 2))

    @classmethod
    def from_nopa(cls, kappa: float, tau: float) -> "TwinBeamParams":
        lam = float(np.tanh(abs(kappa) * tau))
        return cls(lam=lam, n_total=2.0 * lam ** 2 / (1.0 - lam ** 2),
                   kappa=float(kappa), tau=float(tau))

    @property
    def sigma_plus_sq(self) -> float:
        n = self.n_total
        return 0.25 * (1.0 + n + np.sqrt(n * (n + 2.0)))

    @property
    def sigma_minus_sq(self) -> float:
        n = self.n_total
        return 0.25 * (1.0 + n - np.sqrt(n * (n + 2.0)))

    def marginal_tail(self, dim: int) -> float:
        """Photon mass of the per-beam thermal marginal beyond the truncated basis."""
        return float(self.lam ** (2 * dim))

    def schmidt_weights(self, dim: int) -> np.ndarray:
        """lam^n for n < dim."""
        return self.lam ** np.arange(dim)


def twb_marginal(params: TwinBeamParams, trunc: TruncationConfig) -> FockOperator:
    """Per-beam reduced state: thermal with N/2 photons."""
    return thermal_state(params.n_total / 2.0, trunc)


def twb_entanglement(params: TwinBeamParams) -> float:
    """Excess von Neumann entropy (1/2)(S_a + S_b - S), in nats.

    Equals the thermal entropy of the N/2-photon marginal:
    log(1 + N/2) + (N/2) log(1 + 2/N); zero at N = 0.
    """
    n = params.n_total
    if n == 0:
        return 0.0
    half = 0.5 * n
    return float(np.log1p(half) + half * np.log1p(2.0 / n))


def von_neumann_entropy(state: FockOperator) -> float:
    """-Tr[rho log rho] from the eigenvalue spectrum, in nats."""
    eigs = np.linalg.eigvalsh(0.5 * (state.matrix + state.matrix.conj().T)).real
    eigs = eigs[eigs > 1e-300]
    return float(-(eigs * np.log(eigs)).sum())
