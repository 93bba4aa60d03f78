"""Reference scheduling schemes for power comparisons.

Both baselines fix the user-to-channel assignment up front and then solve
the per-channel single-group multicast problems by the classic
relaxation-plus-randomization recipe (lifted SDP, Gaussian candidates,
feasibility scaling), so the comparison against the joint solver isolates
the value of optimizing the schedule.
"""

from dataclasses import dataclass, field

import numpy as np

from .channel import GENERAL, ChannelSet
from .rng import derive_seed, stream
from .sca import channel_gains
from .sdr import Schedule, randomize, sdr_solve

ONE_GROUP = "onegroup"
EQUIPARTITION = "equipartition"


@dataclass
class BaselineResult:
    """Baseline outcome. ``schedule`` records the scheme's own assignment
    (not an argmax extraction); margins are measured on the assigned
    channel."""

    scheme: str
    power: float
    schedule: Schedule
    per_channel_power: np.ndarray
    W: np.ndarray = field(repr=False, default=None)


def _single_channel_set(cs, q, users=None):
    h = cs.h[:, q: q + 1, :] if users is None else cs.h[users, q: q + 1, :]
    K = h.shape[0]
    return ChannelSet(M=cs.M, K=K, Q=1, scenario=GENERAL, h=h, seed=cs.seed)


def _single_group(sub: ChannelSet, L, seed, tol, max_iter):
    """Single-group multicast beamformer: relaxation + randomization.

    Returns (power, w) with every user's |h_k^H w|^2 >= 1.
    """
    sol = sdr_solve(sub, tol=tol, max_iter=max_iter)
    rr = randomize(sol, sub, L=L, seed=seed)
    return rr.best_power, rr.best_W[:, 0]


def one_group(cs: ChannelSet, seed=0, L=1000, tol=1e-7, max_iter=50000):
    """All users multicast on the single cheapest channel.

    Solves the one-channel problem on every channel with the same
    candidate stream (identical subproblems therefore cost the same) and
    keeps the channel with the lowest power; ties go to the lowest index.
    """
    powers = np.empty(cs.Q)
    beams = []
    for q in range(cs.Q):
        powers[q], w = _single_group(_single_channel_set(cs, q), L, seed, tol, max_iter)
        beams.append(w)
    best = int(np.argmin(powers))

    W = np.zeros((cs.M, cs.Q), dtype=np.complex128)
    W[:, best] = beams[best]
    per_channel = np.zeros(cs.Q)
    per_channel[best] = powers[best]
    assign = np.full(cs.K, best)
    margin = channel_gains(W, cs)[:, best]
    return BaselineResult(
        scheme=ONE_GROUP,
        power=float(powers[best]),
        schedule=Schedule(assign=assign, margin=margin),
        per_channel_power=per_channel,
        W=W,
    )


def equipartition(cs: ChannelSet, seed=0, L=1000, tol=1e-7, max_iter=50000):
    """Uniformly random groups of (near-)equal size, group g on channel g.

    A random permutation of the users is cut into Q groups of size
    ceil(K/Q) or floor(K/Q) (larger groups first); each group's
    single-channel problem is solved independently. Deterministic given
    ``seed``; an empty group (K < Q) costs nothing.
    """
    rng = stream(seed, 0)
    perm = rng.permutation(cs.K)
    base, extra = divmod(cs.K, cs.Q)
    sizes = [base + 1 if g < extra else base for g in range(cs.Q)]

    W = np.zeros((cs.M, cs.Q), dtype=np.complex128)
    per_channel = np.zeros(cs.Q)
    assign = np.empty(cs.K, dtype=int)
    start = 0
    for g in range(cs.Q):
        group = np.sort(perm[start: start + sizes[g]])
        start += sizes[g]
        assign[group] = g
        if len(group) == 0:
            continue
        sub = _single_channel_set(cs, g, users=group)
        per_channel[g], W[:, g] = _single_group(
            sub, L, derive_seed(seed, g + 1), tol, max_iter
        )

    gains = channel_gains(W, cs)
    margin = gains[np.arange(cs.K), assign]
    return BaselineResult(
        scheme=EQUIPARTITION,
        power=float(per_channel.sum()),
        schedule=Schedule(assign=assign, margin=margin),
        per_channel_power=per_channel,
        W=W,
    )
