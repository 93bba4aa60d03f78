"""Convex relaxation route: lifted SDP, randomization, schedule extraction.

The relaxation
    min  sum_q tr(W_q)
    s.t. sum_q h_kq^H W_q h_kq >= 1   for every user k,
         W_q PSD
is solved by a two-block ADMM: one block performs the closed-form
linearly-constrained least-squares update (a K x K Cholesky solve whose
factor is computed once), the other projects each W_q onto the PSD cone.
Candidate rank-one beamformers are then sampled from CN(0, W_q*) and
scaled to feasibility; the cheapest of L trials is reported.

In the homogeneous scenario the relaxation is symmetric across channels
and collapses to a single M x M block; its solution is replicated as the
per-channel sampling covariance, and the reported relaxation value is the
trace of that one block (which equals the optimum of the full problem).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .channel import HOMOGENEOUS, ChannelSet
from .errors import ConvergenceError, DegenerateInput, InvalidInput
from .linalg import _psd_project_stack
from .rng import stream

# Eigenvalues of W* below this fraction of the top one are treated as zero
# when forming the sampling square-root factor.
_EIG_CLIP_REL = 1e-12


@dataclass
class SdrSolution:
    """Optimal lifted blocks plus solver diagnostics.

    W_star has shape (Q, M, M); value is the relaxation optimum (the
    lower bound on the achievable transmit power). Residuals are the
    relative ADMM residuals at termination.
    """

    W_star: np.ndarray = field(repr=False)
    value: float
    primal_residual: float
    dual_residual: float
    iterations: int
    reduced: bool = False


@dataclass
class RandomizationResult:
    """Best feasible rank-one solution found by randomized sampling."""

    best_W: np.ndarray = field(repr=False)
    best_power: float
    trial_powers: np.ndarray = field(repr=False)
    best_index: int
    # Diagnostic only: best-trial power with channels that serve no user
    # zeroed out. Never used as the reported upper bound.
    best_power_pruned: float = float("nan")


@dataclass
class Schedule:
    """Per-user channel assignment (0-based) and achieved QoS margin."""

    assign: np.ndarray
    margin: np.ndarray


def _block_gram(H):
    """Gram matrix of the per-user constraint functionals.

    G[k, j] = sum_q |h_kq^H h_jq|^2 for stacked channels H of shape
    (Qb, K, M). PSD because it is a Gram matrix of rank-one operators.
    """
    Qb, K, _ = H.shape
    G = np.zeros((K, K))
    for q in range(Qb):
        S = H[q].conj() @ H[q].T  # S[k, j] = h_kq^H h_jq
        G += (S * S.conj()).real
    return G


def _apply_constraints(H, W):
    """A(W)[k] = sum_q h_kq^H W_q h_kq for H (Qb,K,M), W (Qb,M,M)."""
    out = np.zeros(H.shape[1])
    for q in range(H.shape[0]):
        Y = H[q].conj() @ W[q]  # (K, M)
        out += np.einsum("km,km->k", Y, H[q]).real
    return out


def _adjoint(H, nu):
    """Sum_k nu_k h_kq h_kq^H per block, for a real multiplier vector nu."""
    Qb, _, M = H.shape
    out = np.empty((Qb, M, M), dtype=np.complex128)
    for q in range(Qb):
        out[q] = (H[q] * nu[:, None]).T @ H[q].conj()
    return out


def _solve_blocks(H, rhs, tol, max_iter):
    """ADMM core: min sum_q tr(W_q) s.t. A(W) >= rhs, W_q PSD.

    H: (Qb, K, M) stacked channels, rhs: (K,) nonnegative targets.
    Returns (W (Qb,M,M) PSD, value, primal_rel, dual_rel, iterations).
    Raises ConvergenceError when max_iter is exhausted.
    """
    Qb, K, M = H.shape
    rhs = np.asarray(rhs, dtype=float)
    n2 = np.sum((H * H.conj()).real, axis=2).sum(axis=0)  # ||h_k||^2 summed over q
    if np.any((n2 <= 0) & (rhs > 0)):
        raise DegenerateInput("a user with a positive target has all-zero channels")

    G = _block_gram(H)
    cho = cho_factor(G + np.eye(K), lower=True)

    # Feasible diagonal start: W_q = c I with c = max_k rhs_k / ||h_k||^2.
    with np.errstate(divide="ignore", invalid="ignore"):
        c0 = np.max(np.where(rhs > 0, rhs / np.where(n2 > 0, n2, 1.0), 0.0))
    Z = np.zeros((Qb, M, M), dtype=np.complex128)
    idx = np.arange(M)
    Z[:, idx, idx] = c0
    t = _apply_constraints(H, Z) - rhs
    U = np.zeros_like(Z)
    u = np.zeros(K)

    rho = 1.0
    alpha = 1.6  # over-relaxation
    pri_rel = dua_rel = np.inf

    for it in range(1, max_iter + 1):
        V = Z - U
        v = t - u
        W0 = V.copy()
        W0[:, idx, idx] -= 1.0 / rho  # gradient of the trace objective
        nu = cho_solve(cho, rho * (rhs + v - _apply_constraints(H, W0)))
        W = W0 + _adjoint(H, nu) / rho
        s = v - nu / rho

        Wr = alpha * W + (1.0 - alpha) * Z
        sr = alpha * s + (1.0 - alpha) * t
        Z_new = _psd_project_stack(Wr + U)
        t_new = np.maximum(sr + u, 0.0)
        U += Wr - Z_new
        u += sr - t_new

        r_norm = np.sqrt(np.linalg.norm(W - Z_new) ** 2 + np.linalg.norm(s - t_new) ** 2)
        d_norm = rho * np.sqrt(
            np.linalg.norm(Z_new - Z) ** 2 + np.linalg.norm(t_new - t) ** 2
        )
        Z, t = Z_new, t_new

        pri_scale = max(
            np.sqrt(np.linalg.norm(W) ** 2 + np.linalg.norm(s) ** 2),
            np.sqrt(np.linalg.norm(Z) ** 2 + np.linalg.norm(t) ** 2),
            1e-12,
        )
        dua_scale = max(
            rho * np.sqrt(np.linalg.norm(U) ** 2 + np.linalg.norm(u) ** 2), 1e-12
        )
        pri_rel = r_norm / pri_scale
        dua_rel = d_norm / dua_scale
        if pri_rel <= tol and dua_rel <= tol:
            value = float(np.trace(Z, axis1=1, axis2=2).sum().real)
            return Z, value, pri_rel, dua_rel, it

        # Residual balancing keeps the two rates comparable; the Cholesky
        # factor does not depend on rho, so rescaling is cheap.
        if it % 25 == 0:
            if pri_rel > 10.0 * dua_rel and rho < 1e6:
                rho *= 2.0
                U *= 0.5
                u *= 0.5
            elif dua_rel > 10.0 * pri_rel and rho > 1e-6:
                rho *= 0.5
                U *= 2.0
                u *= 2.0

    raise ConvergenceError(
        f"ADMM did not reach tol={tol:g} within {max_iter} iterations "
        f"(primal {pri_rel:.3e}, dual {dua_rel:.3e})",
        primal_residual=pri_rel,
        dual_residual=dua_rel,
        iterations=max_iter,
    )


def sdr_solve(cs: ChannelSet, tol=1e-7, max_iter=50000, reduce_homogeneous=None):
    """Solve the lifted relaxation for a channel instance.

    For homogeneous instances the symmetric single-block reduction is
    solved and replicated across channels (pass reduce_homogeneous=False
    to force the full per-channel formulation; the optimal value is the
    same either way).
    """
    if not (0.0 < tol <= 1e-3):
        raise InvalidInput(f"tol must lie in (0, 1e-3], got {tol:g}")
    if reduce_homogeneous is None:
        reduce_homogeneous = cs.scenario == HOMOGENEOUS
    if reduce_homogeneous and cs.scenario != HOMOGENEOUS:
        raise InvalidInput("homogeneous reduction requested for a general instance")

    ones = np.ones(cs.K)
    if reduce_homogeneous:
        H = cs.h[:, 0, :][None]  # (1, K, M)
        W1, value, pri, dua, iters = _solve_blocks(H, ones, tol, max_iter)
        W_star = np.repeat(W1, cs.Q, axis=0)
        return SdrSolution(W_star=W_star, value=value, primal_residual=pri,
                           dual_residual=dua, iterations=iters, reduced=True)

    H = np.ascontiguousarray(cs.h.transpose(1, 0, 2))  # (Q, K, M)
    W, value, pri, dua, iters = _solve_blocks(H, ones, tol, max_iter)
    return SdrSolution(W_star=W, value=value, primal_residual=pri,
                       dual_residual=dua, iterations=iters, reduced=False)


def power_scale(c):
    """Uniform power making scaled candidates feasible: 1 / min_k max_q c_kq.

    c is the K x Q matrix of per-user, per-channel candidate gains
    |h_kq^H x_q|^2; the bottleneck user ends up exactly tight.
    """
    c = np.asarray(c, dtype=float)
    if c.ndim != 2:
        raise InvalidInput(f"expected a K x Q gain matrix, got shape {c.shape}")
    if np.any(c < 0) or not np.all(np.isfinite(c)):
        raise InvalidInput("gains must be finite and nonnegative")
    row_best = c.max(axis=1)
    if np.any(row_best <= 0.0):
        raise DegenerateInput("a user has zero gain on every channel")
    return float(1.0 / row_best.min())


def randomize(sol: SdrSolution, cs: ChannelSet, L=1000, seed=0):
    """Sample L candidate beamformer tuples from CN(0, W_q*) and keep the best.

    Candidate q of trial l is U_q S_q^(1/2) v_ql with the Gaussian draws
    v_ql independent across both channels and trials (eigenvalues of W_q*
    below 1e-12 of the top one are zeroed before the square root). Trial
    cost is the scaled total power
    p(l) = (sum_q ||x_q||^2) / (min_k max_q |h_kq^H x_q|^2); ties are
    broken by the lowest trial index. Deterministic given ``seed``.
    """
    if L < 1:
        raise InvalidInput(f"L must be >= 1, got {L}")
    W_star = np.asarray(sol.W_star)
    Q, M, _ = W_star.shape
    if (Q, M) != (cs.Q, cs.M):
        raise InvalidInput("solution and channel set dimensions disagree")

    vals, vecs = np.linalg.eigh(W_star)  # ascending, per block
    top = vals[:, -1]
    if np.all(top <= 0.0):
        raise DegenerateInput("all lifted blocks are zero")
    vals = np.where(vals < _EIG_CLIP_REL * np.maximum(top, 0.0)[:, None], 0.0, vals)
    F = vecs * np.sqrt(vals)[:, None, :]  # (Q, M, M), F F^H = W*

    rng = stream(seed, 0)
    V = rng.standard_normal((Q, M, L)) + 1j * rng.standard_normal((Q, M, L))
    V *= np.sqrt(0.5)
    X = F @ V  # (Q, M, L) candidates

    gains = np.empty((Q, cs.K, L))
    for q in range(Q):
        g = cs.h[:, q, :].conj() @ X[q]  # (K, L)
        gains[q] = (g * g.conj()).real
    total = np.sum((X * X.conj()).real, axis=(0, 1))  # (L,)

    bottleneck = gains.max(axis=0).min(axis=0)  # (L,)
    usable = bottleneck > 0.0
    if not usable.any():
        raise DegenerateInput("every trial leaves some user with zero gain")
    powers = np.full(L, np.inf)
    powers[usable] = total[usable] / bottleneck[usable]

    best = int(np.argmin(powers))
    scale = np.sqrt(1.0 / bottleneck[best])
    best_W = scale * X[:, :, best].T  # (M, Q)

    # Channels that serve no user under the best candidate contribute to
    # the reported power anyway; log the pruned value for diagnostics.
    assign = gains[:, :, best].argmax(axis=0)  # (K,)
    used = np.zeros(Q, dtype=bool)
    used[assign] = True
    pruned = float(
        np.sum((X[used, :, best] * X[used, :, best].conj()).real) / bottleneck[best]
    )

    return RandomizationResult(
        best_W=best_W,
        best_power=float(powers[best]),
        trial_powers=powers,
        best_index=best,
        best_power_pruned=pruned,
    )


def extract_schedule(W, cs: ChannelSet) -> Schedule:
    """Assign each user to its best channel under beamformer matrix W.

    assign[k] = argmax_q |h_kq^H w_q|^2 (ties -> lowest channel index),
    margin[k] the attained value.
    """
    W = np.asarray(W, dtype=np.complex128)
    if W.shape != (cs.M, cs.Q):
        raise InvalidInput(f"W has shape {W.shape}, expected {(cs.M, cs.Q)}")
    g = np.einsum("kqm,mq->kq", cs.h.conj(), W)
    gains = (g * g.conj()).real
    assign = gains.argmax(axis=1)
    margin = gains[np.arange(cs.K), assign]
    return Schedule(assign=assign, margin=margin)


def ratio_bound(cs: ChannelSet) -> float:
    """Worst-case upper bound on best_power / relaxation value.

    5*Q*K for general instances, 5*K^(1/Q) for homogeneous ones.
    """
    if cs.scenario == HOMOGENEOUS:
        return 5.0 * cs.K ** (1.0 / cs.Q)
    return 5.0 * cs.Q * cs.K
