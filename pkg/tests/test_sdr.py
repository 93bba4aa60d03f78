import numpy as np
import pytest
from scipy import stats

from mcbeam.channel import ChannelSet
from mcbeam.errors import DegenerateInput, InvalidInput
from mcbeam.sdr import (
    _solve_blocks,
    extract_schedule,
    power_scale,
    randomize,
    ratio_bound,
    sdr_solve,
)

from conftest import make_channels, rand_complex, rand_psd


def one_user_set(h, Q=1):
    M = h.shape[0]
    hh = np.broadcast_to(h, (1, Q, M)).copy() if Q > 1 else h.reshape(1, 1, M)
    return ChannelSet(M=M, K=1, Q=Q, scenario="general", h=hh, seed=0)


# ---------------------------------------------------------------- sdr_solve


def test_single_user_single_channel_closed_form(rng):
    h = rand_complex(rng, 4)
    sol = sdr_solve(one_user_set(h), tol=1e-9)
    expect = 1.0 / np.linalg.norm(h) ** 2
    assert sol.value == pytest.approx(expect, rel=1e-6)
    W_expect = np.outer(h, h.conj()) / np.linalg.norm(h) ** 4
    assert np.linalg.norm(sol.W_star[0] - W_expect) <= 1e-5 * np.linalg.norm(W_expect)


def test_single_user_two_channels_picks_stronger(rng):
    h = np.stack([rand_complex(rng, 3), 2.0 * rand_complex(rng, 3)])
    cs = ChannelSet(M=3, K=1, Q=2, scenario="general", h=h[None], seed=0)
    sol = sdr_solve(cs, tol=1e-9)
    norms = np.linalg.norm(h, axis=1) ** 2
    expect = 1.0 / norms.max()
    assert sol.value == pytest.approx(expect, rel=1e-6)
    # grid-search oracle over convex splits of the single constraint
    t = np.linspace(0.0, 1.0, 1001)
    grid = t / norms[0] + (1.0 - t) / norms[1]
    assert grid.min() == pytest.approx(expect, rel=1e-6)


def test_homogeneous_reduction_matches_general_path(rng):
    for seed in range(5):
        cs = make_channels(6, 8, 2, scenario="homogeneous", seed=seed)
        red = sdr_solve(cs)
        gen = sdr_solve(cs, reduce_homogeneous=False)
        assert red.reduced and not gen.reduced
        assert red.value == pytest.approx(gen.value, rel=1e-5)


def test_solution_invariants(rng):
    cs = make_channels(5, 7, 2, scenario="general", seed=4)
    sol = sdr_solve(cs)
    assert sol.value >= 0
    for q in range(2):
        vals = np.linalg.eigvalsh(sol.W_star[q])
        assert vals.min() >= -1e-8
    slack = np.zeros(7)
    for q in range(2):
        Y = cs.h[:, q, :].conj() @ sol.W_star[q]
        slack += np.einsum("km,km->k", Y, cs.h[:, q, :]).real
    assert slack.min() >= 1.0 - 1e-6
    assert max(sol.primal_residual, sol.dual_residual) <= 1e-7


def test_tolerance_validation():
    cs = make_channels(3, 2, 1, seed=0)
    with pytest.raises(InvalidInput):
        sdr_solve(cs, tol=1e-2)
    with pytest.raises(InvalidInput):
        sdr_solve(cs, reduce_homogeneous=True)  # general instance


def test_b_elimination_equivalence(rng):
    # Fixing per-user scheduling weights b on the simplex and solving the
    # per-channel problems can never beat the aggregated formulation, and
    # the aggregate optimum is attained at a (discretized) waterfilled
    # split of its own solution; together the two directions pin the
    # fixed-b minimum to the aggregate value within 1e-4.
    M, K, Q = 2, 2, 2
    cs = make_channels(M, K, Q, scenario="general", seed=12)
    joint = sdr_solve(cs, tol=1e-9)

    H = [cs.h[:, q, :] for q in range(Q)]

    def fixed_b_value(b, tol=1e-7):
        # b: (K, Q) rows on the simplex
        total = 0.0
        for q in range(Q):
            if b[:, q].max() > 0.0:
                _, v, *_ = _solve_blocks(H[q][None], b[:, q], tol, 50000)
                total += v
        return total

    # waterfilled split of the aggregate optimum, snapped to a 1e-4 lattice
    A = np.zeros((K, Q))
    for q in range(Q):
        Y = H[q].conj() @ joint.W_star[q]
        A[:, q] = np.einsum("km,km->k", Y, H[q]).real
    b_hat = A / A.sum(axis=1, keepdims=True)
    b_disc = np.round(b_hat / 1e-4) * 1e-4
    b_disc[:, -1] = 1.0 - b_disc[:, :-1].sum(axis=1)
    assert fixed_b_value(b_disc, tol=1e-8) == pytest.approx(
        joint.value, rel=1e-4, abs=1e-4
    )

    # brute-force grid with shrinking boxes: never below the aggregate
    # value anywhere, and converging toward it from above
    t_best = np.full(K, 0.5)
    width = 0.5
    best = np.inf
    for _ in range(5):
        lo = np.clip(t_best - width, 0.0, 1.0)
        hi = np.clip(t_best + width, 0.0, 1.0)
        axes = [np.linspace(lo[k], hi[k], 6) for k in range(K)]
        for t0 in axes[0]:
            for t1 in axes[1]:
                t = np.array([t0, t1])
                v = fixed_b_value(np.column_stack([t, 1.0 - t]))
                assert v >= joint.value - 1e-4 * max(1.0, joint.value)
                if v < best:
                    best, t_best = v, t
        width /= 2.0
    assert best <= joint.value + 5e-3


# ---------------------------------------------------------------- power_scale


def test_power_scale_examples():
    assert power_scale([[0.5, 2.0], [1.0, 0.25]]) == pytest.approx(1.0)
    assert power_scale([[1.0]]) == pytest.approx(1.0)


def test_power_scale_brute_force(rng):
    c = rng.uniform(0.1, 3.0, size=(5, 3))
    p = power_scale(c)
    # exhaustive row scan: p covers every user, (1 - eps) p misses one
    assert all((p * c[k]).max() >= 1.0 - 1e-12 for k in range(5))
    shaved = (1.0 - 1e-9) * p
    assert any((shaved * c[k]).max() < 1.0 for k in range(5))


def test_power_scale_degenerate_row():
    with pytest.raises(DegenerateInput):
        power_scale([[0.0, 0.0], [1.0, 2.0]])
    with pytest.raises(InvalidInput):
        power_scale([[np.inf, 1.0]])


# ---------------------------------------------------------------- randomize


def test_randomize_rank_one_exact(rng):
    h = rand_complex(rng, 5)
    cs = one_user_set(h)
    sol = sdr_solve(cs, tol=1e-9)
    rr = randomize(sol, cs, L=1, seed=3)
    assert rr.best_power == pytest.approx(1.0 / np.linalg.norm(h) ** 2, rel=1e-9)
    assert rr.best_index == 0 and rr.trial_powers.shape == (1,)


def test_randomize_deterministic():
    cs = make_channels(4, 5, 2, scenario="general", seed=8)
    sol = sdr_solve(cs)
    a = randomize(sol, cs, L=64, seed=17)
    b = randomize(sol, cs, L=64, seed=17)
    assert np.array_equal(a.trial_powers, b.trial_powers)
    assert a.best_index == b.best_index


def test_randomize_consistent_with_power_scale(rng):
    # trial powers must equal the standalone scaling rule applied per trial
    cs = make_channels(4, 3, 2, scenario="general", seed=9)
    sol = sdr_solve(cs)
    rr = randomize(sol, cs, L=8, seed=5)
    vals, vecs = np.linalg.eigh(sol.W_star)
    vals = np.where(vals < 1e-12 * vals[:, -1:], 0.0, vals)
    F = vecs * np.sqrt(vals)[:, None, :]
    from mcbeam.rng import stream

    g = stream(5, 0)
    V = (g.standard_normal((2, 4, 8)) + 1j * g.standard_normal((2, 4, 8))) * np.sqrt(0.5)
    X = F @ V
    for l in range(8):
        c = np.zeros((3, 2))
        for q in range(2):
            c[:, q] = np.abs(cs.h[:, q, :].conj() @ X[q, :, l]) ** 2
        expected = power_scale(c) * sum(np.linalg.norm(X[q, :, l]) ** 2 for q in range(2))
        assert rr.trial_powers[l] == pytest.approx(expected, rel=1e-12)


def test_randomize_sandwich_and_feasibility():
    # lower bound <= best randomized power, best_W feasible, on many instances
    for seed in range(60):
        cs = make_channels(4, 3, 2, scenario="general", seed=100 + seed)
        sol = sdr_solve(cs)
        rr = randomize(sol, cs, L=50, seed=seed)
        assert rr.best_power >= sol.value - 1e-6
        margins = extract_schedule(rr.best_W, cs).margin
        assert margins.min() >= 1.0 - 1e-9
        assert rr.best_power == pytest.approx(np.linalg.norm(rr.best_W) ** 2, rel=1e-9)
        assert rr.best_power_pruned <= rr.best_power + 1e-12


def test_randomize_rejects_zero_solution():
    cs = make_channels(3, 2, 1, seed=0)
    sol = sdr_solve(cs)
    sol.W_star = np.zeros_like(sol.W_star)
    with pytest.raises(DegenerateInput):
        randomize(sol, cs, L=4, seed=0)
    with pytest.raises(InvalidInput):
        randomize(sdr_solve(cs), cs, L=0, seed=0)


def test_randomize_best_is_min_of_trials():
    cs = make_channels(4, 4, 2, scenario="general", seed=11)
    rr = randomize(sdr_solve(cs), cs, L=40, seed=2)
    assert rr.best_power == rr.trial_powers.min()
    assert rr.best_index == int(np.argmin(rr.trial_powers))


def test_sdr_solve_convergence_error_carries_residuals():
    from mcbeam.errors import ConvergenceError

    cs = make_channels(4, 6, 2, scenario="general", seed=13)
    with pytest.raises(ConvergenceError) as err:
        sdr_solve(cs, tol=1e-9, max_iter=3)
    assert err.value.iterations == 3
    assert err.value.primal_residual > 0 or err.value.dual_residual > 0


def test_gain_is_exponential(rng):
    # |h^H xi|^2 with xi ~ CN(0, W) is exponential with mean h^H W h
    h = rand_complex(rng, 6)
    W = rand_psd(rng, 6, rank=4)
    vals, vecs = np.linalg.eigh(W)
    F = vecs * np.sqrt(np.clip(vals, 0, None))
    v = rand_complex(rng, 6, 100_000)
    xi = F @ v
    g = np.abs(h.conj() @ xi) ** 2
    mean = np.real(h.conj() @ W @ h)
    assert stats.kstest(g / mean, "expon").pvalue >= 0.01


# ------------------------------------------------------- schedule and bound


def test_extract_schedule_single_channel():
    cs = make_channels(4, 6, 1, seed=2)
    W = rand_complex(np.random.default_rng(0), 4, 1)
    sched = extract_schedule(W, cs)
    assert np.all(sched.assign == 0)


def test_extract_schedule_argmax_and_scale_invariance(rng):
    cs = make_channels(4, 5, 3, scenario="general", seed=3)
    W = rand_complex(rng, 4, 3)
    sched = extract_schedule(W, cs)
    gains = np.abs(np.einsum("kqm,mq->kq", cs.h.conj(), W)) ** 2
    assert np.array_equal(sched.assign, gains.argmax(axis=1))
    assert np.allclose(sched.margin, gains.max(axis=1))
    scaled = extract_schedule(2.5 * W, cs)
    assert np.array_equal(scaled.assign, sched.assign)


def test_extract_schedule_tie_breaks_low_index():
    h = np.ones((1, 2, 1), dtype=complex)
    cs = ChannelSet(M=1, K=1, Q=2, scenario="homogeneous", h=h, seed=0)
    sched = extract_schedule(np.array([[1.0 + 0j, 1.0 + 0j]]), cs)
    assert sched.assign[0] == 0


def test_ratio_bound_values():
    hom = make_channels(4, 10, 2, scenario="homogeneous", seed=0)
    assert ratio_bound(hom) == pytest.approx(15.81, abs=0.005)
    hom2 = make_channels(4, 30, 3, scenario="homogeneous", seed=0)
    assert ratio_bound(hom2) == pytest.approx(15.54, abs=0.005)
    gen = make_channels(4, 30, 3, scenario="general", seed=0)
    assert ratio_bound(gen) == pytest.approx(450.0)
