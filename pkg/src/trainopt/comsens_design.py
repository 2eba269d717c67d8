"""Cyclic minimization of channel MSE over a paired training design.

The designer produces a downlink sequence X (radar + communication) and an
uplink sequence Y (communication only) such that

  - every column of X and Y respects the per-column power bound p,
  - X and Y are uncorrelated over lags 0..k (zero correlation zone), and
  - X has impulse-like autocorrelation: in-zone lags 1..k near zero,

while the channel MSE driven by X decreases monotonically. One outer
iteration refreshes the auxiliary variable V at the current X; the inner
cycle then alternates a majorize-minimize target step with the two
constrained nearest-matrix subproblems.

The majorizer of F(V, P) = tr(V^H Q(P) V) at P0 is the isotropic quadratic
F(P0) + <P - P0, grad F(P0)> + (lam/2) ||P - P0||_F^2 with lam bounding
twice the quadratic form's curvature (F is an exact quadratic in P since R
is PSD), so its unconstrained minimizer is the gradient target
P0 - grad F / lam. F depends on the pair only through X (the uplink
sequence enters no covariance), so Y's target is simply its current value
and the Y update is a pure feasibility projection.

Correlation constraints act on the plain-transpose products and are
enforced as two-sided bands on real and imaginary parts separately; the
printed one-sided convex surrogate x^T (J^T + J + 2I) x <= 2p is implied
by the band within 2 eps_corr once power is tight.

Determinism: a fixed seed reproduces the full DesignResult bit for bit.
Independent runs (multi-seed averaging) may execute concurrently; a single
run is strictly sequential.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .comsens_model import (AuxMatrix, ComsensProblem, TrainingPair,
                            channel_mse, correlation, correlation_db,
                            optimal_aux)
from .errors import MaxIterationsError, SolverError
from .specfun import standard_normal_samples

_MAX_SWEEPS = 2000
_CROSS_TOL = 1e-10
_MOVE_TOL = 1e-12
_MSE_SLACK = 1e-8

MSE_TRACE_CSV_HEADER = "iteration,mse"
CORRELATION_CSV_HEADER = "lag,pair,magnitude_db"


@dataclass(frozen=True)
class ResidualRecord:
    """Constraint residual maxima at one outer iteration."""

    power_excess: float
    cross_max: float
    auto_max: float


@dataclass
class DesignTrace:
    outer_mse: list[float] = field(default_factory=list)
    inner_objective: list[float] = field(default_factory=list)
    constraint_residuals: list[ResidualRecord] = field(default_factory=list)
    converged: bool = False
    iterations: int = 0


@dataclass(frozen=True, eq=False)
class DesignResult:
    pair: TrainingPair
    trace: DesignTrace
    final_mse: float
    correlation_report: list[tuple[int, str, float]]


def _lag_products(x: np.ndarray, k: int) -> np.ndarray:
    """Plain autocorrelations x^T J_m x for m = 1..k."""
    B = len(x)
    return np.array([x[m:] @ x[:B - m] for m in range(1, k + 1)])


def _cross_vectors_for_x(Y: np.ndarray, k: int) -> np.ndarray:
    """Vectors c with c^T x = 0 encoding x^T J_m y_l = 0, m = 0..k."""
    B, cols = Y.shape
    out = np.zeros((B, cols * (k + 1)), dtype=complex)
    j = 0
    for m in range(k + 1):
        for l in range(cols):
            out[m:, j] = Y[:B - m, l]
            j += 1
    return out


def _cross_vectors_for_y(X: np.ndarray, k: int) -> np.ndarray:
    """Vectors c with c^T y = 0 encoding x_q^T J_m y = 0, m = 0..k."""
    B, cols = X.shape
    out = np.zeros((B, cols * (k + 1)), dtype=complex)
    j = 0
    for m in range(k + 1):
        for q in range(cols):
            out[:B - m, j] = X[m:, q]
            j += 1
    return out


def _null_space_projector(C: np.ndarray, scale: float) -> np.ndarray:
    """Orthonormal basis U of span(conj(C)); {x : C^T x = 0} is its
    Hermitian orthogonal complement, so P(x) = x - U U^H x.

    Directions with singular value below 1e-12 * max(scale, s_max) are
    dropped: a constraint vector that small cannot produce an in-zone
    correlation above tolerance for any point in the power ball, and
    keeping it would spuriously annihilate the whole space (e.g. when the
    opposite sequence has collapsed to numerical zero)."""
    if C.size == 0:
        return np.zeros((C.shape[0], 0), dtype=complex)
    U, s, _ = np.linalg.svd(np.conj(C), full_matrices=False)
    cutoff = 1e-12 * max(scale, float(s[0]) if s.size else 0.0)
    rank = int(np.sum(s > cutoff))
    return U[:, :rank]


def _project_affine(x: np.ndarray, U: np.ndarray) -> np.ndarray:
    if U.shape[1] == 0:
        return x
    return x - U @ (U.conj().T @ x)


def _solve_column(target: np.ndarray, U: np.ndarray, k: int, p: float,
                  eps_corr: float, with_bands: bool,
                  max_sweeps: int = _MAX_SWEEPS) -> np.ndarray:
    """Project one column onto {C^T x = 0} n {power ball} n (optionally)
    {|x^T J_m x| <= eps_corr, m = 1..k}.

    Cyclic projections with Dykstra corrections on the two convex sets;
    the nonconvex band constraints get Newton root steps onto the
    quadric x^T J_m x = 0 (minimal-norm linearized correction). The zero
    vector belongs to every set, so the problem is never infeasible.
    """
    B = len(target)
    x = target.copy()
    inc_affine = np.zeros(B, dtype=complex)
    inc_ball = np.zeros(B, dtype=complex)
    sqrt_p = math.sqrt(p)
    band_target = 0.25 * eps_corr
    Uh = U.conj().T

    def residuals(xv):
        nrm = math.sqrt(np.vdot(xv, xv).real)
        cross_res = math.sqrt(abs(np.vdot(Uh @ xv, Uh @ xv).real)) if U.shape[1] else 0.0
        auto_res = float(np.abs(_lag_products(xv, k)).max()) if (with_bands and k) else 0.0
        ok = (cross_res <= _CROSS_TOL * max(1.0, nrm) and auto_res <= eps_corr
              and nrm * nrm <= p + 1e-10)
        return ok, cross_res, auto_res

    for sweep in range(max_sweeps):
        x_prev = x
        # Dykstra pass over the convex pair.
        ref = x + inc_affine
        x = _project_affine(ref, U)
        inc_affine = ref - x
        if with_bands:
            for m in range(1, k + 1):
                v = x[m:] @ x[:B - m]
                if abs(v) > band_target:
                    g = np.zeros(B, dtype=complex)
                    g[m:] += x[:B - m]
                    g[:B - m] += x[m:]
                    denom = np.vdot(g, g).real
                    if denom < 1e-300:
                        continue
                    x = x - np.conj(g) * (v / denom)
        ref = x + inc_ball
        nrm = math.sqrt(np.vdot(ref, ref).real)
        x = ref * (sqrt_p / nrm) if nrm > sqrt_p else ref
        inc_ball = ref - x
        if math.sqrt(np.vdot(x, x).real) < 1e-10 * sqrt_p:
            return np.zeros(B, dtype=complex)
        diff = x - x_prev
        move = math.sqrt(np.vdot(diff, diff).real)
        # Full residual checks only once the iteration has nearly stalled.
        if move < 1e-8:
            ok, _, _ = residuals(x)
            if ok and move < _MOVE_TOL:
                return x
    ok, cross_res, auto_res = residuals(x)
    if ok:
        return x
    raise MaxIterationsError(
        f"column projection stalled after {max_sweeps} sweeps "
        f"(cross {cross_res:.2e}, auto {auto_res:.2e})")


def solve_x_subproblem(X_sigma: np.ndarray, Y_fixed: np.ndarray,
                       prob: ComsensProblem) -> np.ndarray:
    """Nearest X to X_sigma under power, zero cross-correlation against
    Y_fixed over lags 0..k, and in-zone autocorrelation bands."""
    U = _null_space_projector(_cross_vectors_for_x(Y_fixed, prob.k), math.sqrt(prob.p))
    cols = [_solve_column(X_sigma[:, q], U, prob.k, prob.p, prob.eps_corr,
                          with_bands=True)
            for q in range(X_sigma.shape[1])]
    return np.column_stack(cols)


def solve_y_subproblem(Y_sigma: np.ndarray, X_fixed: np.ndarray,
                       prob: ComsensProblem) -> np.ndarray:
    """Nearest Y to Y_sigma under power and the cross-correlation
    equalities against X_fixed; affine projection then radial clip is the
    exact minimizer because the subspace passes through the origin."""
    U = _null_space_projector(_cross_vectors_for_y(X_fixed, prob.k), math.sqrt(prob.p))
    sqrt_p = math.sqrt(prob.p)
    out = np.empty_like(Y_sigma)
    for l in range(Y_sigma.shape[1]):
        y = _project_affine(Y_sigma[:, l], U)
        nrm = float(np.linalg.norm(y))
        out[:, l] = y * (sqrt_p / nrm) if nrm > sqrt_p else y
    return out


def target_matrices(pair: TrainingPair, V: AuxMatrix, prob: ComsensProblem
                    ) -> tuple[np.ndarray, np.ndarray]:
    """Majorize-minimize targets (X_sigma, Y_sigma) at the current pair.

    X_sigma = X - grad_X F(V, X) / lam where lam = 2 n_r
    lam_max(V2 V2^H) lam_max(R) bounds the quadratic's curvature in the
    Frobenius geometry; Y_sigma is the current Y since F has no Y term.
    With V2 = 0 the gradient vanishes and the targets equal the pair.
    """
    v2 = V.v2
    lam = 2.0 * prob.n_r * V.gram_eig_max * prob.r_eig_max
    if not math.isfinite(lam) or lam < 0.0:
        raise SolverError(f"curvature estimate failed (lam={lam!r})")
    if lam == 0.0:
        return pair.X.copy(), pair.Y.copy()
    Pt = np.kron(pair.X, np.eye(prob.n_r))
    grad_tilde = 2.0 * (v2 @ (V.v1.conj().T @ prob.R) + v2 @ (v2.conj().T @ (Pt @ prob.R)))
    grad = np.einsum("brtr->bt",
                     grad_tilde.reshape(prob.B, prob.n_r, prob.n_t, prob.n_r))
    if not np.all(np.isfinite(grad)):
        raise SolverError("non-finite gradient in target construction")
    return pair.X - grad / lam, pair.Y.copy()


def _residuals(X: np.ndarray, Y: np.ndarray, prob: ComsensProblem) -> ResidualRecord:
    power = max(float(np.linalg.norm(X, axis=0).max() ** 2),
                float(np.linalg.norm(Y, axis=0).max() ** 2))
    cross = max((float(np.abs(correlation(X, Y, m)).max())
                 for m in range(prob.k + 1)), default=0.0)
    auto = max((float(np.abs(np.diag(correlation(X, X, m))).max())
                for m in range(1, prob.k + 1)), default=0.0)
    return ResidualRecord(power_excess=max(0.0, power - prob.p),
                          cross_max=cross, auto_max=auto)


def _pair_feasible(res: ResidualRecord, prob: ComsensProblem) -> bool:
    return (res.power_excess <= 1e-8 and res.cross_max <= 1e-8
            and res.auto_max <= 1.5 * prob.eps_corr)


def _complex_gaussian(seed: int, rows: int, cols: int) -> np.ndarray:
    vals = standard_normal_samples(seed, 2 * rows * cols)
    re = vals[0::2].reshape(rows, cols)
    im = vals[1::2].reshape(rows, cols)
    return (re + 1j * im) / math.sqrt(2.0)


def design(prob: ComsensProblem, seed: int, max_outer: int = 500) -> DesignResult:
    """Run the full cyclic design.

    Step 1 draws X, Y with seeded standard-complex-Gaussian entries,
    rescales columns to norm sqrt(p), and projects both into the
    constraint set (X onto power/autocorrelation, then Y onto the
    cross-correlation equalities against X) so the recorded MSE trace
    starts at a feasible pair. Step 2 refreshes V at the current X;
    step 3 runs the inner cycle (targets, X update, Y update) until it
    stops moving or mu cycles elapse; step 4 repeats until the MSE change
    drops below eta or max_outer iterations.

    A non-monotone MSE step larger than 1e-8 triggers a warning, not an
    error; the update is additionally guarded so a feasible iterate is
    never replaced by a worse-scoring candidate.
    """
    sqrt_p = math.sqrt(prob.p)
    X = _complex_gaussian(seed, prob.B, prob.n_t)
    Y = _complex_gaussian(seed + 1, prob.B, prob.n_r)
    X *= sqrt_p / np.linalg.norm(X, axis=0, keepdims=True)
    Y *= sqrt_p / np.linalg.norm(Y, axis=0, keepdims=True)
    X = solve_x_subproblem(X, np.zeros((prob.B, prob.n_r), dtype=complex), prob)
    Y = solve_y_subproblem(Y, X, prob)

    trace = DesignTrace()
    trace.outer_mse.append(channel_mse(X, prob))
    trace.constraint_residuals.append(_residuals(X, Y, prob))
    for outer in range(max_outer):
        V = optimal_aux(X, prob)
        for _ in range(prob.mu):
            X_sigma, Y_sigma = target_matrices(TrainingPair(X=X, Y=Y), V, prob)
            X_new = solve_x_subproblem(X_sigma, Y, prob)
            # The incumbent X is feasible (init projection plus invariant-
            # preserving updates), so keep it whenever the solver's local
            # answer lands farther from the target; this pins descent.
            if np.linalg.norm(X_new - X_sigma) > np.linalg.norm(X - X_sigma) + 1e-14:
                X_new = X
            move = float(np.linalg.norm(X_new - X))
            X = X_new
            Y_new = solve_y_subproblem(Y_sigma, X, prob)
            move += float(np.linalg.norm(Y_new - Y))
            Y = Y_new
            trace.inner_objective.append(
                float(np.linalg.norm(X - X_sigma) ** 2 + np.linalg.norm(Y - Y_sigma) ** 2))
            if move < 1e-11:
                break
        trace.outer_mse.append(channel_mse(X, prob))
        trace.constraint_residuals.append(_residuals(X, Y, prob))
        trace.iterations = outer + 1
        delta = trace.outer_mse[-1] - trace.outer_mse[-2]
        if delta > _MSE_SLACK:
            warnings.warn(f"MSE rose by {delta:.3e} at outer iteration {outer + 1}",
                          RuntimeWarning, stacklevel=2)
        if abs(delta) < prob.eta:
            trace.converged = True
            break
    pair = TrainingPair(X=X, Y=Y)
    return DesignResult(pair=pair, trace=trace, final_mse=trace.outer_mse[-1],
                        correlation_report=correlation_report(pair))


def correlation_report(pair: TrainingPair) -> list[tuple[int, str, float]]:
    """dB magnitude tables over lags -(B-1)..(B-1) for X-auto, Y-auto,
    and X-Y cross correlations; one row per (lag, column pair)."""
    rows: list[tuple[int, str, float]] = []
    B = pair.X.shape[0]
    blocks = (("x", pair.X, "x", pair.X), ("y", pair.Y, "y", pair.Y),
              ("x", pair.X, "y", pair.Y))
    for la, A, lb, Bm in blocks:
        for lag in range(-(B - 1), B):
            db = correlation_db(A, Bm, lag)
            for i in range(db.shape[0]):
                for j in range(db.shape[1]):
                    rows.append((lag, f"{la}{i + 1}:{lb}{j + 1}", float(db[i, j])))
    return rows


def write_design_files(result: DesignResult, out_dir, header_lines=()):
    """Emit X.txt / Y.txt (matrix text format), mse_trace.csv, and
    correlation_report.csv into out_dir."""
    from pathlib import Path

    from .comsens_model import save_matrix_text
    from .pilot_opt import format_number

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_matrix_text(out / "X.txt", result.pair.X)
    save_matrix_text(out / "Y.txt", result.pair.Y)
    with open(out / "mse_trace.csv", "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(MSE_TRACE_CSV_HEADER + "\n")
        for i, mse in enumerate(result.trace.outer_mse):
            fh.write(f"{i},{format_number(mse)}\n")
    with open(out / "correlation_report.csv", "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(CORRELATION_CSV_HEADER + "\n")
        for lag, label, db in result.correlation_report:
            fh.write(f"{lag},{label},{format_number(db)}\n")
