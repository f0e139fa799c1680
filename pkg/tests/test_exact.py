import itertools
import math
import zlib
from fractions import Fraction

import numpy as np
import pytest

from copgambler.errors import BudgetExceeded, DegenerateConditional, NonIIDSweeps
from copgambler.exact import (
    Mode,
    enumerate_sweeps,
    expected_capture_time,
    policy_sweep_aggregate,
    sampled,
    sweep_evasion_prob,
    sweep_stats,
    variant_count,
)
from copgambler.gambler import from_weights, point_mass, uniform
from copgambler.graph import generate, leaves, spanning_tree
from copgambler.oracle import turn_level_capture_time
from copgambler.sweep import (
    BACKWARD,
    DIRECTIONS,
    DEFAULT_C,
    StrategyConfig,
    augment_walk,
    dfs_closed_walk,
    orient,
    wait_set_size,
)

from conftest import small_graphs

STAR_WALK = [0, 1, 1, 0, 2, 0, 3, 3, 0]


def brute_force_evasion(walk, p):
    """Sum the probability of every gambler sequence that never meets the cop."""
    total = 0.0
    for seq in itertools.product(range(len(p)), repeat=len(walk)):
        if all(g != c for g, c in zip(seq, walk)):
            total += math.prod(p[g] for g in seq)
    return total


def test_evasion_forced_capture():
    assert sweep_evasion_prob([0], uniform(1)) == 0.0


def test_evasion_p2():
    assert sweep_evasion_prob([0, 1, 0], uniform(2)) == 0.125


def test_evasion_star_walk_matches_enumeration():
    brute = brute_force_evasion(STAR_WALK, [0.25] * 4)
    assert brute == pytest.approx(0.75**9, rel=1e-12)
    assert sweep_evasion_prob(STAR_WALK, uniform(4)) == pytest.approx(brute, rel=1e-12)
    assert 0.75**9 == pytest.approx(0.075085, abs=1e-6)


def test_evasion_nonuniform_matches_enumeration():
    p = [0.1, 0.2, 0.3, 0.4]
    walk = [0, 1, 0, 2, 2, 0, 3]
    assert sweep_evasion_prob(walk, from_weights(p)) == pytest.approx(
        brute_force_evasion(walk, p), rel=1e-12
    )


def test_sweep_stats_trivial():
    s = sweep_stats([0], uniform(1))
    assert (s.evasion_prob, s.expected_capture_turn_given_capture) == (0.0, 1.0)
    s = sweep_stats([0, 1], point_mass(2, 1))
    assert (s.evasion_prob, s.capture_mass, s.expected_capture_turn_given_capture) == (0.0, 1.0, 2.0)


def test_sweep_stats_p2():
    expected = (Fraction(1, 2) + 2 * Fraction(1, 4) + 3 * Fraction(1, 8)) / Fraction(7, 8)
    assert expected == Fraction(11, 7)
    s = sweep_stats([0, 1, 0], uniform(2))
    assert s.evasion_prob == 0.125
    assert s.expected_capture_turn_given_capture == pytest.approx(11 / 7, rel=1e-14)
    assert s.length == 3


def test_sweep_stats_degenerate():
    # vertex 1 carries all mass but the walk never reaches it
    with pytest.raises(DegenerateConditional):
        sweep_stats([0, 2, 0], from_weights([0, 1, 0]))


def test_sweep_stats_invariants(rng):
    for _ in range(50):
        n = int(rng.integers(1, 9))
        walk = list(rng.integers(0, n, size=int(rng.integers(1, 30))))
        walk += list(range(n))
        d = from_weights(rng.dirichlet(np.ones(n)))
        s = sweep_stats(walk, d)
        assert abs(s.evasion_prob + s.capture_mass - 1) <= 1e-12
        assert 1 <= s.expected_capture_turn_given_capture <= s.length


def test_direction_invariance_is_exact(rng):
    for name, g in small_graphs().items():
        t = spanning_tree(g, 0)
        base = dfs_closed_walk(t)
        d = from_weights(rng.dirichlet(np.ones(g.n)))
        u = set(rng.choice(g.n, size=wait_set_size(g.n, DEFAULT_C), replace=False).tolist())
        fwd = augment_walk(base, u, leaves(t))
        assert sweep_evasion_prob(fwd, d) == sweep_evasion_prob(orient(fwd, BACKWARD), d)


def test_adding_a_visit_lowers_evasion(rng):
    d = from_weights(rng.dirichlet(np.ones(5)))
    walk = [0, 1, 2, 3, 4]
    q = sweep_evasion_prob(walk, d)
    for v in range(5):
        assert sweep_evasion_prob(walk + [v], d) < q


def test_aggregate_single_vertex():
    s = policy_sweep_aggregate(generate("path", 1), StrategyConfig(), uniform(1))
    assert s.q_bar == 0.0 and s.e_turn_given_capture == 1.0


def test_aggregate_p2():
    s = policy_sweep_aggregate(generate("path", 2), StrategyConfig(), uniform(2))
    assert s.q_bar == 0.0625
    assert s.e_len_given_evade == 4.0


def star4_variants():
    """All four wait sets of size three on S_4, each in both directions."""
    t = spanning_tree(generate("star", 4), 0)
    base = dfs_closed_walk(t)
    out = []
    for u in itertools.combinations(range(4), 3):
        fwd = augment_walk(base, set(u), leaves(t))
        out += [orient(fwd, d) for d in DIRECTIONS]
    return out


def test_aggregate_star4_matches_enumeration():
    d = from_weights([0.1, 0.2, 0.3, 0.4])
    variants = star4_variants()
    assert len(variants) == variant_count(4, DEFAULT_C) == 8
    q = [sweep_evasion_prob(w, d) for w in variants]
    stats = [sweep_stats(w, d) for w in variants]
    q_bar = sum(q) / 8
    e_len = sum(qi * len(w) for qi, w in zip(q, variants)) / sum(q)
    e_turn = sum(s.capture_mass * s.expected_capture_turn_given_capture for s in stats) / sum(
        s.capture_mass for s in stats
    )
    agg = policy_sweep_aggregate(generate("star", 4), StrategyConfig(), d)
    assert agg.q_bar == pytest.approx(q_bar, rel=1e-13)
    assert agg.e_len_given_evade == pytest.approx(e_len, rel=1e-13)
    assert agg.e_turn_given_capture == pytest.approx(e_turn, rel=1e-13)
    assert agg.variants == 8 and agg.mode == "enumerated"


def test_enumeration_merges_equivalent_wait_sets():
    # on a path only the far endpoint is a leaf: two distinct walks per direction
    ens = enumerate_sweeps(generate("path", 8), StrategyConfig())
    assert ens.weights.sum() == pytest.approx(1.0, abs=1e-15)
    assert len(ens) == 4 and ens.draws == variant_count(8, DEFAULT_C) == 56


def test_budget_exceeded():
    with pytest.raises(BudgetExceeded):
        policy_sweep_aggregate(generate("star", 30), StrategyConfig(), uniform(30))
    with pytest.raises(BudgetExceeded):
        enumerate_sweeps(generate("star", 6), StrategyConfig(), budget=10)


def test_sampled_mode_is_seeded_and_consistent():
    g = generate("random_tree", 8, seed=5)
    d = from_weights(np.random.default_rng(6).dirichlet(np.ones(8)))
    cfg = StrategyConfig()
    exact = policy_sweep_aggregate(g, cfg, d)
    samp = policy_sweep_aggregate(g, cfg, d, sampled(10**5, seed=3))
    assert samp == policy_sweep_aggregate(g, cfg, d, sampled(10**5, seed=3))
    assert samp.q_bar_stderr > 0
    assert abs(samp.q_bar - exact.q_bar) <= 4 * samp.q_bar_stderr


def test_auto_mode_falls_back_to_sampling():
    g = generate("star", 30)
    s = policy_sweep_aggregate(g, StrategyConfig(), uniform(30), Mode("auto", k=500, seed=1))
    assert s.mode == "sampled" and s.variants == 500


def test_capture_time_trivial_cases():
    cfg = StrategyConfig()
    assert expected_capture_time(generate("path", 1), cfg, uniform(1)).value == 1.0
    assert expected_capture_time(generate("path", 2), cfg, uniform(2)).value == pytest.approx(2.0, abs=1e-12)


def test_capture_time_decomposition(rng):
    g = generate("random_tree", 7, seed=3)
    d = from_weights(rng.dirichlet(np.ones(7)))
    r = expected_capture_time(g, StrategyConfig(), d)
    assert r.value == r.e_failed_turns + r.e_success_turns
    s = r.stats
    assert r.e_failed_turns == pytest.approx(s.q_bar / (1 - s.q_bar) * s.e_len_given_evade, rel=1e-12)


def test_uniform_gambler_is_captured_in_n_turns_on_average():
    # every turn catches a uniform gambler with probability 1/n wherever the cop is
    for name, g in small_graphs().items():
        r = expected_capture_time(g, StrategyConfig(), uniform(g.n))
        assert r.value == pytest.approx(g.n, rel=1e-12), name


@pytest.mark.parametrize("name", list(small_graphs()))
def test_capture_time_matches_turn_level_oracle(name):
    g = small_graphs()[name]
    rng = np.random.default_rng(zlib.crc32(name.encode()))
    for d in [uniform(g.n)] + [from_weights(rng.dirichlet(np.ones(g.n))) for _ in range(3)]:
        for c in (DEFAULT_C, 0.0, 0.5):
            cfg = StrategyConfig(c=c)
            exact = expected_capture_time(g, cfg, d).value
            oracle = turn_level_capture_time(g, cfg, d)
            assert oracle.truncated_mass <= 1e-12
            assert exact == pytest.approx(oracle.value, rel=1e-9)


def test_frozen_direction_matches_oracle(rng):
    g = generate("random_tree", 6, seed=9)
    d = from_weights(rng.dirichlet(np.ones(6)))
    cfg = StrategyConfig(resample_direction_each_sweep=False)
    assert expected_capture_time(g, cfg, d).value == pytest.approx(
        turn_level_capture_time(g, cfg, d).value, rel=1e-9
    )


def test_frozen_wait_set_is_rejected():
    with pytest.raises(NonIIDSweeps):
        expected_capture_time(generate("star", 4), StrategyConfig(resample_U_each_sweep=False), uniform(4))


def test_log_space_agrees_with_products():
    # n = 65 switches to log-space survival
    g = generate("star", 65)
    d = from_weights(np.random.default_rng(1).dirichlet(np.ones(65)))
    cfg = StrategyConfig()
    s = policy_sweep_aggregate(g, cfg, d, sampled(200, seed=2))
    from copgambler.exact import sample_sweeps

    ens = sample_sweeps(g, cfg, 200, seed=2)
    direct = np.prod((1 - d.p) ** ens.counts, axis=1)
    assert s.q_bar == pytest.approx(float(ens.weights @ direct), rel=1e-12)


def test_uniform_cap_per_walk(rng):
    for name, g in small_graphs().items():
        n = g.n
        ens = enumerate_sweeps(g, StrategyConfig())
        q = ens.evasion(uniform(n).p)
        k = wait_set_size(n, DEFAULT_C)
        assert np.all(q <= (1 - 1 / n) ** (n + k) + 1e-15), name
