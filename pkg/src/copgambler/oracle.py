"""Turn-by-turn absorbing-chain summation of the expected capture time.

Independent of the sweep-level formula in :mod:`copgambler.exact`: the state
is (sweep variant, position in the sweep) and surviving mass is pushed one
turn at a time until the residual falls below ``tail``.  It also covers
frozen wait sets and frozen coins, which the closed formula cannot.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import NonTermination
from .gambler import GamblerDistribution
from .graph import Graph, leaves, spanning_tree
from .sweep import DIRECTIONS, StrategyConfig, augment_walk, dfs_closed_walk, orient, wait_set_size


@dataclass(frozen=True)
class OracleResult:
    value: float
    truncated_mass: float
    turns: int


def turn_level_capture_time(
    g: Graph,
    cfg: StrategyConfig,
    d: GamblerDistribution,
    tail: float = 1e-12,
    max_turns: int = 10**7,
) -> OracleResult:
    t = spanning_tree(g, cfg.root)
    base = dfs_closed_walk(t)
    leaf_set = leaves(t)
    subsets = list(itertools.combinations(range(g.n), wait_set_size(g.n, cfg.c)))
    walks = []
    for u in subsets:
        fwd = augment_walk(base, frozenset(u), leaf_set, t.root)
        for direction in DIRECTIONS:
            walks.append(orient(fwd, direction).visits)
    n_var = len(walks)
    n_dir = len(DIRECTIONS)
    lengths = np.array([len(w) for w in walks])
    width = int(lengths.max())
    p_ext = np.append(d.p, 0.0)
    visit_p = np.zeros((n_var, width))
    for i, w in enumerate(walks):
        visit_p[i, : len(w)] = p_ext[list(w)]

    # mass[v, j]: probability the game is alive and about to play turn j of variant v
    mass = np.zeros((n_var, width))
    mass[:, 0] = 1.0 / n_var
    value = 0.0
    turn = 0
    ends = lengths - 1
    rows = np.arange(n_var)
    while True:
        turn += 1
        caught = mass * visit_p
        value += turn * caught.sum()
        alive = mass - caught
        finishing = alive[rows, ends].copy()
        alive[rows, ends] = 0.0
        nxt = np.zeros_like(mass)
        nxt[:, 1:] = alive[:, :-1]
        nxt[:, 0] = _restart(finishing, cfg, n_dir)
        mass = nxt
        remaining = mass.sum()
        if remaining <= tail:
            return OracleResult(value, float(remaining), turn)
        if turn >= max_turns:
            raise NonTermination(f"residual mass {remaining:g} after {turn} turns")


def _restart(finishing: np.ndarray, cfg: StrategyConfig, n_dir: int) -> np.ndarray:
    """Distribute mass that completed a sweep over the next sweep's variants."""
    if cfg.resample_U_each_sweep and cfg.resample_direction_each_sweep:
        return np.full_like(finishing, finishing.sum() / finishing.size)
    by_set = finishing.reshape(-1, n_dir)
    if cfg.resample_U_each_sweep:
        # keep the coin, redraw the wait set
        per_dir = by_set.sum(axis=0) / by_set.shape[0]
        return np.tile(per_dir, by_set.shape[0])
    if cfg.resample_direction_each_sweep:
        per_set = by_set.sum(axis=1, keepdims=True) / n_dir
        return np.repeat(per_set, n_dir, axis=1).ravel()
    return finishing
