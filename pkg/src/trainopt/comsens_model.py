"""Linear-algebra substrate for joint communication/sensing training design.

A base station with n_t transmit antennas trains a MIMO channel whose
vectorized gain has covariance R ((n_t n_r) x (n_t n_r)); the received
training block sees noise with covariance M ((B n_r) x (B n_r)). For a
training matrix P (B x n_t, one column per antenna) the channel MSE is

  MSE(P) = tr[(R^-1 + (P (x) I)^H M^-1 (P (x) I))^-1]

computed here through the matrix-inversion-lemma form
tr(R) - tr(R Pt^H (M + Pt R Pt^H)^-1 Pt R) with Pt = P (x) I, so only the
positive-definite matrix M + Pt R Pt^H is ever factorized.

The auxiliary-variable route used by the cyclic designer rewrites the MSE
as F(V, P) = tr(V^H Q V) over the block matrix

  Q = [[R,      R Pt^H         ],
       [Pt R,   M + Pt R Pt^H  ]]

whose minimizer over V (top block pinned to the identity) is
V2 = -(M + Pt R Pt^H)^-1 Pt R, and then F(V*, P) = MSE(P).

Correlations use the plain (non-conjugated) transpose throughout,
A^T J_lag B, matching the constraint form the designer enforces; the
conjugate-transpose variant is deliberately not offered.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError

from .errors import DomainError, SingularMatrixError

logger = logging.getLogger(__name__)

# Phase/magnitude parameters of the exponential covariance models used by
# the reference simulation setup: transmit side of R, receive side of R
# (shared by M), transmit side of M.
DEFAULT_CORR_RT = 0.91 * np.exp(-1j * 0.83 * np.pi)
DEFAULT_CORR_RR = 0.60 * np.exp(-1j * 0.42 * np.pi)
DEFAULT_CORR_MT = 0.80 * np.exp(-1j * 0.53 * np.pi)

_HERMITIAN_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ComsensProblem:
    """Dimensions, covariances, and loop controls for one design problem.

    B         training length per antenna (symbols)
    n_t, n_r  transmit / receive antenna counts
    R         channel covariance, (n_t n_r) square, Hermitian PD, trace 1
    M         noise covariance, (B n_r) square, Hermitian PD, trace 1
    p         per-column power bound for both sequences
    k         correlation-zone lag count, 0 <= k < B
    eps_corr  tolerance on in-zone correlation magnitudes
    eta       outer-loop stop threshold on |MSE change|
    mu        inner cycle cap
    """

    B: int
    n_t: int
    n_r: int
    R: np.ndarray
    M: np.ndarray
    p: float
    k: int
    eps_corr: float = 1e-5
    eta: float = 1e-6
    mu: int = 20

    def __post_init__(self):
        if self.B < 1 or self.n_t < 1 or self.n_r < 1:
            raise DomainError("B, n_t, n_r must be positive")
        if not 0 <= self.k < self.B:
            raise DomainError(f"correlation zone k must satisfy 0 <= k < B, got {self.k}")
        if self.p <= 0:
            raise DomainError("power bound p must be positive")
        _check_covariance(self.R, self.n_t * self.n_r, "R")
        _check_covariance(self.M, self.B * self.n_r, "M")
        object.__setattr__(self, "r_eig_max", float(np.linalg.eigvalsh(self.R)[-1]))

    r_eig_max: float = field(init=False, repr=False, default=0.0)


def _check_covariance(C: np.ndarray, dim: int, name: str):
    if C.shape != (dim, dim):
        raise DomainError(f"{name} must be {dim}x{dim}, got {C.shape}")
    if np.max(np.abs(C - C.conj().T)) > _HERMITIAN_TOL * max(1.0, np.max(np.abs(C))):
        raise DomainError(f"{name} must be Hermitian within {_HERMITIAN_TOL}")
    if abs(np.trace(C).real - 1.0) > _HERMITIAN_TOL * dim:
        raise DomainError(f"{name} must have unit trace")
    min_eig = float(np.linalg.eigvalsh(C)[0])
    if min_eig <= 0:
        raise DomainError(f"{name} must be positive definite (min eig {min_eig:.3e})")


@dataclass(frozen=True, eq=False)
class TrainingPair:
    """Downlink sequence X (B x n_t) and uplink sequence Y (B x n_r)."""

    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        if self.X.ndim != 2 or self.Y.ndim != 2 or self.X.shape[0] != self.Y.shape[0]:
            raise DomainError("X and Y must be 2-D with a shared training length B")


@dataclass(frozen=True, eq=False)
class AuxMatrix:
    """Auxiliary variable of the MSE rewrite, ((B + n_t) n_r) x (n_t n_r).

    v1 is the top (n_t n_r)-square block, v2 the bottom (B n_r)-tall block.
    """

    V: np.ndarray
    top_rows: int

    @property
    def v1(self) -> np.ndarray:
        return self.V[:self.top_rows]

    @property
    def v2(self) -> np.ndarray:
        return self.V[self.top_rows:]

    @cached_property
    def gram_eig_max(self) -> float:
        """Largest eigenvalue of v2 v2^H (cached; V is immutable)."""
        v2 = self.v2
        return float(np.linalg.eigvalsh(v2 @ v2.conj().T)[-1])


def exp_covariance(dim: int, corr: complex) -> np.ndarray:
    """Exponential covariance: entry (k, l) = corr^(l-k) for k <= l,
    conjugate-symmetric below. Hermitian PSD for |corr| < 1."""
    if abs(corr) >= 1.0:
        raise DomainError(f"|corr| must be < 1, got |{corr}| = {abs(corr)}")
    if dim < 1:
        raise DomainError("dim must be positive")
    idx = np.arange(dim)
    lag = idx[None, :] - idx[:, None]
    upper = np.power(np.full_like(lag, corr, dtype=complex), np.maximum(lag, 0))
    lower = np.power(np.full_like(lag, np.conj(corr), dtype=complex), np.maximum(-lag, 0))
    return np.where(lag >= 0, upper, lower)


@dataclass(frozen=True)
class ComsensSettings:
    """Inputs to build_problem; correlation coefficients default to the
    reference simulation values."""

    B: int = 8
    n_t: int = 4
    n_r: int = 4
    k: int = 4
    corr_rt: complex = field(default=DEFAULT_CORR_RT)
    corr_rr: complex = field(default=DEFAULT_CORR_RR)
    corr_mt: complex = field(default=DEFAULT_CORR_MT)
    eps_corr: float = 1e-5
    eta: float = 1e-6
    mu: int = 20


def build_problem(settings: ComsensSettings) -> ComsensProblem:
    """Kronecker-model problem: R = R_T^T (x) R_R, M = M_T^T (x) M_R with
    M_R = R_R, both trace-normalized; per-column power p = gamma / n_t with
    total training energy gamma = B n_t, hence p = B."""
    R_T = exp_covariance(settings.n_t, settings.corr_rt)
    R_R = exp_covariance(settings.n_r, settings.corr_rr)
    M_T = exp_covariance(settings.B, settings.corr_mt)
    M_R = R_R
    R = np.kron(R_T.T, R_R)
    M = np.kron(M_T.T, M_R)
    R = R / np.trace(R).real
    M = M / np.trace(M).real
    return ComsensProblem(B=settings.B, n_t=settings.n_t, n_r=settings.n_r,
                          R=R, M=M, p=float(settings.B), k=settings.k,
                          eps_corr=settings.eps_corr, eta=settings.eta,
                          mu=settings.mu)


def shift_matrix(B: int, lag: int) -> np.ndarray:
    """J_lag with ones on the lag-th subdiagonal; J_0 = I, J_-m = J_m^T."""
    if abs(lag) >= B:
        raise DomainError(f"|lag| must be < B = {B}, got {lag}")
    return np.eye(B, k=-lag)


def _p_tilde(P: np.ndarray, n_r: int) -> np.ndarray:
    return np.kron(P, np.eye(n_r))


def _inner_factor(P: np.ndarray, prob: ComsensProblem):
    """Cholesky factor of M + Pt R Pt^H, with its condition logged."""
    Pt = _p_tilde(P, prob.n_r)
    S = prob.M + Pt @ prob.R @ Pt.conj().T
    try:
        factor = cho_factor(S, check_finite=False)
    except LinAlgError as exc:
        raise SingularMatrixError(f"M + Pt R Pt^H is numerically indefinite: {exc}") from exc
    if logger.isEnabledFor(logging.DEBUG):
        eigs = np.linalg.eigvalsh(S)
        logger.debug("inner matrix condition %.3e", eigs[-1] / eigs[0])
    return factor, Pt


def channel_mse(P: np.ndarray, prob: ComsensProblem) -> float:
    """tr[(R^-1 + Pt^H M^-1 Pt)^-1] via the inversion-lemma form; never
    inverts R explicitly."""
    if P.shape != (prob.B, prob.n_t):
        raise DomainError(f"P must be {prob.B}x{prob.n_t}, got {P.shape}")
    factor, Pt = _inner_factor(P, prob)
    RPh = prob.R @ Pt.conj().T
    return float((np.trace(prob.R) - np.trace(RPh @ cho_solve(factor, RPh.conj().T, check_finite=False))).real)


def aux_objective(V: AuxMatrix, P: np.ndarray, prob: ComsensProblem) -> float:
    """F(V, P) = tr(V^H Q V) with Q assembled from (R, M, P (x) I)."""
    dim = prob.n_t * prob.n_r
    if V.V.shape != ((prob.B + prob.n_t) * prob.n_r, dim):
        raise DomainError(f"V has wrong shape {V.V.shape}")
    Pt = _p_tilde(P, prob.n_r)
    RPh = prob.R @ Pt.conj().T
    Q = np.block([[prob.R, RPh], [RPh.conj().T, prob.M + Pt @ RPh]])
    return float(np.trace(V.V.conj().T @ Q @ V.V).real)


def optimal_aux(P: np.ndarray, prob: ComsensProblem) -> AuxMatrix:
    """Minimizer of F over V: top block identity, bottom block
    -(M + Pt R Pt^H)^-1 Pt R."""
    factor, Pt = _inner_factor(P, prob)
    dim = prob.n_t * prob.n_r
    v2 = -cho_solve(factor, Pt @ prob.R, check_finite=False)
    return AuxMatrix(V=np.vstack([np.eye(dim, dtype=complex), v2]), top_rows=dim)


def correlation(A: np.ndarray, B2: np.ndarray, lag: int) -> np.ndarray:
    """Plain-transpose correlation A^T J_lag B2 at one lag."""
    if A.ndim != 2 or B2.ndim != 2 or A.shape[0] != B2.shape[0]:
        raise DomainError("correlation requires matrices with equal row counts")
    B = A.shape[0]
    if abs(lag) >= B:
        raise DomainError(f"|lag| must be < B = {B}, got {lag}")
    if lag >= 0:
        return A[lag:].T @ B2[:B - lag] if lag else A.T @ B2
    m = -lag
    return A[:B - m].T @ B2[m:]


def correlation_db(A: np.ndarray, B2: np.ndarray, lag: int) -> np.ndarray:
    """Entry magnitudes of the lag correlation in dB (floored at -3000 dB)."""
    mag = np.abs(correlation(A, B2, lag))
    return 20.0 * np.log10(np.maximum(mag, 1e-150))


def save_matrix_text(path, M: np.ndarray):
    """Write the documented plain-text format: header 'rows cols complex',
    then row-major 're im' pairs, one matrix row per line."""
    M = np.asarray(M, dtype=complex)
    lines = [f"{M.shape[0]} {M.shape[1]} complex"]
    for row in M:
        parts = []
        for z in row:
            parts.append(format(z.real, ".17g"))
            parts.append(format(z.imag, ".17g"))
        lines.append(" ".join(parts))
    Path(path).write_text("\n".join(lines) + "\n")


def load_matrix_text(path) -> np.ndarray:
    """Read a matrix written by save_matrix_text."""
    lines = Path(path).read_text().strip().split("\n")
    header = lines[0].split()
    if len(header) != 3 or header[2] != "complex":
        raise DomainError(f"bad matrix header {lines[0]!r}")
    rows, cols = int(header[0]), int(header[1])
    if len(lines) != rows + 1:
        raise DomainError(f"expected {rows} matrix rows, found {len(lines) - 1}")
    out = np.empty((rows, cols), dtype=complex)
    for i, line in enumerate(lines[1:]):
        vals = [float(v) for v in line.split()]
        if len(vals) != 2 * cols:
            raise DomainError(f"row {i} has {len(vals)} values, expected {2 * cols}")
        out[i] = np.array(vals[0::2]) + 1j * np.array(vals[1::2])
    return out


def training_energy(pair: TrainingPair) -> float:
    """Total training energy ||X||_F^2 + ||Y||_F^2 (the SNR diagnostic)."""
    return float(np.linalg.norm(pair.X) ** 2 + np.linalg.norm(pair.Y) ** 2)
