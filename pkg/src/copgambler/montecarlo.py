"""Seeded Monte Carlo simulation of the full game.

Every random number used by trial ``i`` is a hash of ``(seed, i, sweep,
stream, index)``, so a trial's outcome does not depend on how trials are
batched or spread over worker processes.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidParameter, NonTermination
from .gambler import GamblerDistribution, sample_vertex, sample_vertices
from .graph import Graph, leaves, spanning_tree
from .sweep import StrategyConfig, build_sweep, dfs_closed_walk, fisher_yates_prefix, wait_set_size

SAFETY_HORIZON = 10**9
BATCH = 1 << 15

_U64 = np.uint64
_GOLDEN = _U64(0x9E3779B97F4A7C15)
_M1 = _U64(0xBF58476D1CE4E5B9)
_M2 = _U64(0x94D049BB133111EB)

_STREAM_WAIT_SET = 0
_STREAM_COIN = 1
_STREAM_GAMBLER = 2


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _U64(30))) * _M1
    z = (z ^ (z >> _U64(27))) * _M2
    return z ^ (z >> _U64(31))


def _absorb(h: np.ndarray, x) -> np.ndarray:
    return _mix(h + (np.asarray(x, dtype=_U64) + _U64(1)) * _GOLDEN)


def counter_uniforms(seed: int, trials: np.ndarray, sweeps: np.ndarray, stream: int, width: int) -> np.ndarray:
    """Uniforms in [0, 1) of shape ``(len(trials), width)``.

    Entry ``[r, j]`` depends only on ``(seed, trials[r], sweeps[r], stream, j)``.
    """
    h = _mix(np.full(trials.shape, seed & 0xFFFFFFFFFFFFFFFF, dtype=_U64))
    h = _absorb(h, trials.astype(_U64))
    h = _absorb(h, sweeps.astype(_U64))
    h = _absorb(h, np.full(trials.shape, stream, dtype=_U64))
    z = _absorb(h[:, None], np.arange(width, dtype=_U64)[None, :])
    return (z >> _U64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


@dataclass
class CaptureEstimate:
    mean: float
    stderr: float
    trials: int
    seed: int
    min: int
    max: int
    turns: Optional[np.ndarray] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "stderr": self.stderr,
            "trials": self.trials,
            "seed": self.seed,
            "min": self.min,
            "max": self.max,
        }


def simulate_capture(
    g: Graph,
    cfg: StrategyConfig,
    d: GamblerDistribution,
    rng: np.random.Generator,
    horizon: int = SAFETY_HORIZON,
) -> int:
    """Play one game turn by turn; return the 1-based capture turn.

    Turn 1 is the cop's initial placement at the root.
    """
    t = spanning_tree(g, cfg.root)
    frozen_u = frozen_dir = None
    turn = 0
    while True:
        sweep = build_sweep(t, cfg, rng, wait_set=frozen_u, direction=frozen_dir)
        if not cfg.resample_U_each_sweep:
            frozen_u = sweep.wait_set
        if not cfg.resample_direction_each_sweep:
            frozen_dir = sweep.direction
        for v in sweep.visits:
            turn += 1
            if sample_vertex(d, rng) == v:
                return turn
            if turn >= horizon:
                raise NonTermination(f"no capture within {horizon} turns")


class _Plan:
    """Precomputed tree data for the batched simulator."""

    def __init__(self, g: Graph, cfg: StrategyConfig):
        t = spanning_tree(g, cfg.root)
        self.n = g.n
        self.cfg = cfg
        self.base = np.asarray(dfs_closed_walk(t), dtype=np.int64)
        leaf_mask = np.zeros(g.n, dtype=bool)
        leaf_mask[sorted(leaves(t))] = True
        self.leaf_pos = leaf_mask[self.base]
        self.k = wait_set_size(g.n, cfg.c)
        self.width = self.base.size + int(leaf_mask.sum())

    def walks(self, seed: int, trials: np.ndarray, sweeps: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Padded walk matrix (pad value -1) and lengths for one sweep per trial."""
        batch = trials.size
        u_sweeps = sweeps if self.cfg.resample_U_each_sweep else np.zeros_like(sweeps)
        d_sweeps = sweeps if self.cfg.resample_direction_each_sweep else np.zeros_like(sweeps)
        in_u = np.zeros((batch, self.n), dtype=bool)
        if self.k:
            draws = counter_uniforms(seed, trials, u_sweeps, _STREAM_WAIT_SET, self.k)
            chosen = fisher_yates_prefix(draws, self.n)
            np.put_along_axis(in_u, chosen, True, axis=1)
        backward = counter_uniforms(seed, trials, d_sweeps, _STREAM_COIN, 1)[:, 0] >= 0.5

        mult = 1 + (in_u[:, self.base] & self.leaf_pos[None, :])
        lengths = mult.sum(axis=1)
        offsets = np.cumsum(mult, axis=1) - mult
        fwd = np.full((batch, self.width), -1, dtype=np.int64)
        rows = np.repeat(np.arange(batch), self.base.size).reshape(batch, -1)
        base = np.broadcast_to(self.base, (batch, self.base.size))
        fwd[rows, offsets] = base
        dup = mult == 2
        fwd[rows[dup], offsets[dup] + 1] = base[dup]

        col = np.arange(self.width)[None, :]
        src = np.where(backward[:, None], lengths[:, None] - 1 - col, col)
        valid = col < lengths[:, None]
        out = np.take_along_axis(fwd, np.clip(src, 0, self.width - 1), axis=1)
        out[~valid] = -1
        return out, lengths


def capture_turns(
    g: Graph,
    cfg: StrategyConfig,
    d: GamblerDistribution,
    seed: int,
    trial_ids: np.ndarray,
    horizon: int = SAFETY_HORIZON,
    plan: Optional[_Plan] = None,
) -> np.ndarray:
    """Capture turn of each listed trial, simulated as a batch."""
    plan = plan or _Plan(g, cfg)
    trial_ids = np.asarray(trial_ids, dtype=np.int64)
    result = np.zeros(trial_ids.size, dtype=np.int64)
    active = np.arange(trial_ids.size)
    elapsed = np.zeros(trial_ids.size, dtype=np.int64)
    sweep = 0
    while active.size:
        ids = trial_ids[active]
        sweeps = np.full(active.size, sweep, dtype=np.int64)
        walk, lengths = plan.walks(seed, ids, sweeps)
        u = counter_uniforms(seed, ids, sweeps, _STREAM_GAMBLER, plan.width)
        hit = (sample_vertices(d, u) == walk) & (walk >= 0)
        caught = hit.any(axis=1)
        first = hit.argmax(axis=1)
        done = active[caught]
        result[done] = elapsed[done] + first[caught] + 1
        elapsed[active] += lengths
        active = active[~caught]
        sweep += 1
        if active.size and elapsed[active].min() >= horizon:
            raise NonTermination(f"{active.size} trials uncaptured after {horizon} turns")
    return result


def _chunk_moments(args) -> tuple[int, float, float, int, int, Optional[np.ndarray]]:
    g, cfg, d, seed, lo, hi, keep = args
    turns = capture_turns(g, cfg, d, seed, np.arange(lo, hi))
    x = turns.astype(np.float64)
    mean = float(x.mean())
    m2 = float(((x - mean) ** 2).sum())
    return hi - lo, mean, m2, int(turns.min()), int(turns.max()), turns if keep else None


def estimate_expected_capture(
    g: Graph,
    cfg: StrategyConfig,
    d: GamblerDistribution,
    trials: int,
    seed: int = 0,
    workers: int = 1,
    keep_turns: bool = False,
    batch: int = BATCH,
) -> CaptureEstimate:
    """Mean capture time over ``trials`` independent games.

    Trials are cut into fixed batches, reduced in batch order with the
    parallel Welford update, so the result is identical for any ``workers``.
    """
    if trials < 1:
        raise InvalidParameter("trials must be >= 1")
    jobs = [(g, cfg, d, seed, lo, min(lo + batch, trials), keep_turns) for lo in range(0, trials, batch)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_chunk_moments, jobs))
    else:
        parts = [_chunk_moments(job) for job in jobs]

    count, mean, m2 = 0, 0.0, 0.0
    lo_turn, hi_turn = math.inf, -math.inf
    for cnt, mu, sq, mn, mx, _ in parts:
        delta = mu - mean
        total = count + cnt
        mean += delta * cnt / total
        m2 += sq + delta * delta * count * cnt / total
        count = total
        lo_turn, hi_turn = min(lo_turn, mn), max(hi_turn, mx)
    var = m2 / (count - 1) if count > 1 else 0.0
    turns = np.concatenate([part[5] for part in parts]) if keep_turns else None
    return CaptureEstimate(mean, math.sqrt(var / count), count, seed, int(lo_turn), int(hi_turn), turns)
