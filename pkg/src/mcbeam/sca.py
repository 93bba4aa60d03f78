"""Convex restriction route: iterative linearization with a dual inner solver.

The nonsmooth problem
    min ||W||_F^2   s.t.  max_q |h_kq^H w_q|^2 >= 1  for every user k
is attacked by linearizing each best-channel constraint at the current
iterate with the averaged subgradient over the active channels, and
solving the resulting strongly-convex QP through its nonnegative-orthant
dual with an accelerated projection iteration (the compiled kernel in
``_core``). Every accepted iterate stays feasible and the cost sequence
is nonincreasing by construction.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import _core
from .channel import ChannelSet
from .errors import DegenerateInput, InvalidInput, InvalidState
from .linalg import lambda_max
from .rng import stream

# Relative band treated as "tied for the maximum" when collecting active
# channels; exact float equality essentially never fires.
TIE_TOL = 1e-9

# Tolerance used by lambda_max; the step length is shrunk by (1 + 2*tol)
# so that mu never exceeds 2 / lambda_1 even though the power-iteration
# estimate approaches lambda_1 from below.
_LAMBDA_TOL = 1e-6


@dataclass
class Linearization:
    """Supporting linearization of every user's constraint at one iterate.

    G[k] is the M x Q subgradient (nonzero only on the active channels
    I_k), offset[k] = f_k - <G_k, W> - 1, and active is the K x Q
    boolean mask of I_k.
    """

    G: np.ndarray = field(repr=False)
    offset: np.ndarray
    active: np.ndarray = field(repr=False)
    margins: np.ndarray


@dataclass
class QpInstance:
    """Vectorized subproblem  min ||x||^2  s.t.  Re(A x) + a >= 0.

    Row k of A is conj(vec(G_k)) under column-major stacking of W, so
    Re(A vec(W))_k equals the real matrix inner product <G_k, W>. B is
    the real dual Hessian Re(A A^H) and mu the safe dual step length.
    """

    A: np.ndarray = field(repr=False)
    a: np.ndarray
    B: np.ndarray = field(repr=False)
    mu: float


@dataclass
class SolveReport:
    """Outcome of one solver run.

    cost_trace[n] is ||W||_F^2 after outer iteration n (entry 0 is the
    start); trace holds (outer_iter, cost, min_margin, step_norm) rows
    for optional CSV emission.
    """

    final_W: np.ndarray = field(repr=False)
    power: float
    cost_trace: list
    outer_iters: int
    inner_iters_per_outer: int
    converged: bool
    seed: int
    wall_time: float
    trace: list = field(repr=False, default_factory=list)


def channel_gains(W, cs: ChannelSet):
    """K x Q matrix of |h_kq^H w_q|^2."""
    g = np.einsum("kqm,mq->kq", cs.h.conj(), W)
    return (g * g.conj()).real


def user_margin(W, cs: ChannelSet, k, tie_tol=TIE_TOL):
    """Best-channel QoS margin of user k and the set of active channels.

    Returns (max_q |h_kq^H w_q|^2, indices q whose gain is within a
    relative tie_tol of the maximum).
    """
    gains = channel_gains(np.asarray(W, dtype=np.complex128), cs)[k]
    f = float(gains.max())
    active = np.flatnonzero(gains >= f * (1.0 - tie_tol))
    return f, active


def margin_subgradient(W, cs: ChannelSet, k, tie_tol=TIE_TOL):
    """Averaged subgradient of user k's best-channel margin at W.

    Column q is (2/|I_k|) (h_kq^H w_q) h_kq for active q, zero elsewhere;
    averaging over ties keeps each active channel equally attractive.
    """
    W = np.asarray(W, dtype=np.complex128)
    _, active = user_margin(W, cs, k, tie_tol)
    G = np.zeros((cs.M, cs.Q), dtype=np.complex128)
    coef = 2.0 / len(active)
    for q in active:
        h = cs.h[k, q]
        G[:, q] = coef * np.vdot(h, W[:, q]) * h
    return G


def linearize(W, cs: ChannelSet, tie_tol=TIE_TOL) -> Linearization:
    """Linearization of every user's constraint at W (vectorized)."""
    W = np.asarray(W, dtype=np.complex128)
    amp = np.einsum("kqm,mq->kq", cs.h.conj(), W)  # h_kq^H w_q
    gains = (amp * amp.conj()).real
    f = gains.max(axis=1)
    active = gains >= f[:, None] * (1.0 - tie_tol)
    counts = active.sum(axis=1)

    coef = np.where(active, (2.0 / counts)[:, None] * amp, 0.0)  # (K, Q)
    G = coef[:, None, :] * cs.h.transpose(0, 2, 1)  # (K, M, Q)
    # <G_k, W> = (2/|I_k|) * sum of active gains.
    ip = (np.where(active, gains, 0.0).sum(axis=1)) * (2.0 / counts)
    offset = f - ip - 1.0
    return Linearization(G=G, offset=offset, active=active, margins=f)


def build_qp(W_n, cs: ChannelSet, tie_tol=TIE_TOL) -> QpInstance:
    """Vectorize the linearized subproblem at a feasible iterate W_n.

    W_n itself satisfies every row with slack f_k(W_n) - 1, which is why
    a feasible W_n is required (InvalidState otherwise).
    """
    W_n = np.asarray(W_n, dtype=np.complex128)
    lin = linearize(W_n, cs, tie_tol)
    if lin.margins.min() < 1.0 - 1e-9:
        raise InvalidState(
            f"iterate is infeasible: min margin {lin.margins.min():.12g} < 1"
        )
    K = cs.K
    # Column-major stacking of the M x Q subgradient.
    A = lin.G.conj().transpose(0, 2, 1).reshape(K, cs.M * cs.Q)
    B = (A @ A.conj().T).real
    lam = lambda_max(B, tol=_LAMBDA_TOL)
    if lam <= 0.0:
        raise DegenerateInput("all subgradients vanished; iterate cannot be feasible")
    mu = 2.0 / (lam * (1.0 + 2.0 * _LAMBDA_TOL))
    return QpInstance(A=A, a=lin.offset.astype(float), B=B, mu=mu)


def dfgp_solve(qp: QpInstance, inner_iters=400, grad_tol=1e-9):
    """Run the accelerated dual projection and recover the primal point.

    Returns (x, z) with x = A^H z / 2; z >= 0 is the final dual iterate
    after at most ``inner_iters`` steps (earlier if the projected
    gradient norm falls below grad_tol).
    """
    if inner_iters < 1:
        raise InvalidInput(f"inner_iters must be >= 1, got {inner_iters}")
    B = np.ascontiguousarray(qp.B, dtype=np.float64)
    a = np.ascontiguousarray(qp.a, dtype=np.float64)
    z, _ = _core.dfgp(B, a, float(qp.mu), int(inner_iters), float(grad_tol))
    x = 0.5 * (qp.A.conj().T @ z)
    return x, z


def make_feasible_start(cs: ChannelSet, seed=0):
    """Random feasible beamformer matrix with min-margin exactly one.

    Draws i.i.d. standard complex Gaussian entries and divides by the
    square root of the smallest user margin. The zero-margin draw has
    probability zero; if it occurs the next Philox sub-stream is used.
    """
    for attempt in range(64):
        rng = stream(seed, attempt)
        W = rng.standard_normal((cs.M, cs.Q)) + 1j * rng.standard_normal((cs.M, cs.Q))
        W *= np.sqrt(0.5)
        worst = channel_gains(W, cs).max(axis=1).min()
        if worst > 0.0:
            return W / np.sqrt(worst)
    raise DegenerateInput("could not draw a usable start (are the channels zero?)")


def sca_solve(cs: ChannelSet, W0=None, seed=0, inner_iters=400, max_outer=200,
              step_tol=None, tie_tol=TIE_TOL, grad_tol=1e-9) -> SolveReport:
    """Minimize total power by successive linearized subproblems.

    Starting from W0 (or a random feasible start drawn with ``seed``),
    each outer iteration solves the linearized QP via its dual, maps the
    dual point back to a beamformer matrix, and rescales it up whenever
    finite inner-iteration error left the smallest margin below one, so
    every accepted iterate is feasible. A step is only accepted if it
    does not increase the cost; otherwise the run stops at the incumbent
    (a numerical fixed point). Stops when the Frobenius step falls below
    step_tol (default 1e-4 * sqrt(M*Q)) or after max_outer iterations.
    """
    t0 = time.perf_counter()
    if step_tol is None:
        step_tol = 1e-4 * np.sqrt(cs.M * cs.Q)

    if W0 is None:
        W = make_feasible_start(cs, seed)
    else:
        W = np.asarray(W0, dtype=np.complex128).copy()
        if W.shape != (cs.M, cs.Q):
            raise InvalidInput(f"W0 has shape {W.shape}, expected {(cs.M, cs.Q)}")
        worst = channel_gains(W, cs).max(axis=1).min()
        if worst < 1.0 - 1e-9:
            raise InvalidInput(f"W0 is infeasible: min margin {worst:.12g} < 1")
        if worst < 1.0:
            W = W / np.sqrt(worst)

    cost = float(np.linalg.norm(W) ** 2)
    min_margin = float(channel_gains(W, cs).max(axis=1).min())
    cost_trace = [cost]
    rows = [(0, cost, min_margin, 0.0)]
    converged = False
    outer = 0

    for n in range(1, max_outer + 1):
        qp = build_qp(W, cs, tie_tol)
        x, _ = dfgp_solve(qp, inner_iters, grad_tol)
        W_new = x.reshape(cs.Q, cs.M).T.copy()  # undo column-major stacking

        # Finite inner budgets can leave the linearized constraints (and
        # hence the true ones) violated at the 1e-6 level; rescaling up
        # restores feasibility exactly and preserves descent to first order.
        worst = channel_gains(W_new, cs).max(axis=1).min()
        if worst <= 0.0:
            break  # inner solver returned a degenerate point; keep incumbent
        if worst < 1.0:
            W_new = W_new / np.sqrt(worst)

        new_cost = float(np.linalg.norm(W_new) ** 2)
        if new_cost > cost * (1.0 + 1e-12):
            # The subproblem can no longer descend: numerical fixed point.
            converged = True
            break
        step = float(np.linalg.norm(W_new - W))
        W = W_new
        cost = new_cost
        outer = n
        min_margin = float(channel_gains(W, cs).max(axis=1).min())
        cost_trace.append(cost)
        rows.append((n, cost, min_margin, step))
        if step <= step_tol:
            converged = True
            break

    return SolveReport(
        final_W=W,
        power=cost,
        cost_trace=cost_trace,
        outer_iters=outer,
        inner_iters_per_outer=inner_iters,
        converged=converged,
        seed=seed,
        wall_time=time.perf_counter() - t0,
        trace=rows,
    )


def write_trace(report: SolveReport, path):
    """Write the per-iteration trace as CSV: outer_iter,cost,min_margin,step_norm."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("outer_iter,cost,min_margin,step_norm\n")
        for n, cost, margin, step in report.trace:
            fh.write(f"{n},{cost:.12g},{margin:.12g},{step:.12g}\n")
