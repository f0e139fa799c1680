"""Exact sweep statistics and expected capture time.

A sweep is survived with probability ``prod_t (1 - p[v_t])``.  When the wait
set and the coin are redrawn every sweep, sweeps are i.i.d. and the expected
capture time splits into the turns spent in failed sweeps plus the capture
turn inside the successful one.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .errors import BudgetExceeded, DegenerateConditional, DegenerateEvasion, NonIIDSweeps
from .gambler import GamblerDistribution
from .graph import Graph, SpanningTree, leaves, spanning_tree
from .sweep import (
    BACKWARD,
    DIRECTIONS,
    FORWARD,
    StrategyConfig,
    SweepWalk,
    augment_walk,
    dfs_closed_walk,
    fisher_yates_prefix,
    orient,
    wait_set_size,
)

DEFAULT_BUDGET = 10**6
LOG_SPACE_ABOVE_N = 64
_CHUNK = 4096


@dataclass(frozen=True)
class Mode:
    """How the strategy's randomness (wait set, coin) is averaged out.

    ``enumerated`` visits every (wait set, direction) pair; ``sampled`` draws
    ``k`` pairs from ``seed``; ``auto`` enumerates when the budget allows.
    """

    kind: str = "enumerated"
    k: int = 100_000
    seed: int = 0
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.kind not in ("enumerated", "sampled", "auto"):
            raise ValueError(f"unknown mode {self.kind!r}")
        if self.k < 1:
            raise ValueError("k must be positive")


ENUMERATED = Mode("enumerated")


def sampled(k: int, seed: int = 0) -> Mode:
    return Mode("sampled", k=k, seed=seed)


@dataclass(frozen=True)
class SweepStats:
    evasion_prob: float
    length: int
    capture_mass: float
    expected_capture_turn_given_capture: float


@dataclass(frozen=True)
class PolicyStats:
    q_bar: float
    e_len_given_evade: Optional[float]
    e_turn_given_capture: float
    mode: str
    variants: int
    seed: Optional[int] = None
    q_bar_stderr: float = 0.0
    # sum_w pi_w q_w L_w; stays finite when q_bar == 0
    evade_len_mass: float = 0.0


@dataclass(frozen=True)
class ExactCaptureTime:
    value: float
    e_failed_turns: float
    e_success_turns: float
    stats: Optional[PolicyStats] = field(default=None, compare=False)

    def to_dict(self) -> dict:
        out = asdict(self)
        return out


@dataclass
class SweepEnsemble:
    """Weighted family of sweep walks, padded into one matrix.

    ``walks`` pads short rows with ``n``, which callers map to probability 0.
    """

    n: int
    walks: np.ndarray
    lengths: np.ndarray
    counts: np.ndarray
    weights: np.ndarray
    mode: str
    seed: Optional[int] = None
    draws: int = 0

    def __len__(self) -> int:
        return self.lengths.size

    def evasion(self, p: np.ndarray) -> np.ndarray:
        """Per-walk evasion probability; depends only on visit counts."""
        return _evasion_from_counts(self.counts, np.asarray(p, dtype=np.float64))

    def capture_moments(self, p: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Per walk: evasion, total first-capture mass and ``sum_t t*P(first capture at t)``."""
        p = np.asarray(p, dtype=np.float64)
        q = self.evasion(p)
        mass = np.empty(len(self))
        turn = np.empty(len(self))
        p_ext = np.append(p, 0.0)
        log_space = self.n > LOG_SPACE_ABOVE_N
        for lo in range(0, len(self), _CHUNK):
            hi = min(lo + _CHUNK, len(self))
            pv = p_ext[self.walks[lo:hi]]
            if log_space:
                with np.errstate(divide="ignore"):
                    logs = np.log1p(-pv)
                surv = np.exp(np.cumsum(logs, axis=1))
            else:
                surv = np.cumprod(1.0 - pv, axis=1)
            before = np.ones_like(surv)
            before[:, 1:] = surv[:, :-1]
            first = before * pv
            t = np.arange(1, pv.shape[1] + 1)
            mass[lo:hi] = first.sum(axis=1)
            turn[lo:hi] = first @ t
        return q, mass, turn


def _evasion_from_counts(counts: np.ndarray, p: np.ndarray) -> np.ndarray:
    n = p.size
    if n > LOG_SPACE_ABOVE_N:
        with np.errstate(divide="ignore", invalid="ignore"):
            logs = np.log1p(-p)
            terms = np.where(counts > 0, counts * logs, 0.0)
        return np.exp(terms.sum(axis=-1))
    return np.prod((1.0 - p) ** counts, axis=-1)


def sweep_evasion_prob(w: SweepWalk | list[int], d: GamblerDistribution) -> float:
    visits = w.visits if isinstance(w, SweepWalk) else tuple(w)
    if not visits:
        raise ValueError("walk must be non-empty")
    counts = np.bincount(np.asarray(visits, dtype=np.int64), minlength=d.n)
    return float(_evasion_from_counts(counts, d.p))


def sweep_stats(w: SweepWalk | list[int], d: GamblerDistribution) -> SweepStats:
    visits = w.visits if isinstance(w, SweepWalk) else tuple(w)
    ens = _ensemble_from_walks([list(visits)], [1.0], d.n, "single")
    q, mass, turn = ens.capture_moments(d.p)
    q_w, mass_w = float(q[0]), float(mass[0])
    if mass_w <= 0.0:
        raise DegenerateConditional("capture is impossible during this sweep")
    return SweepStats(q_w, len(visits), mass_w, float(turn[0]) / mass_w)


def _ensemble_from_walks(walks, weights, n, mode, seed=None, draws=0) -> SweepEnsemble:
    lengths = np.array([len(w) for w in walks], dtype=np.int64)
    mat = np.full((len(walks), int(lengths.max())), n, dtype=np.int32)
    counts = np.zeros((len(walks), n), dtype=np.int64)
    for i, w in enumerate(walks):
        mat[i, : len(w)] = w
        counts[i] = np.bincount(np.asarray(w, dtype=np.int64), minlength=n)
    return SweepEnsemble(
        n, mat, lengths, counts, np.asarray(weights, dtype=np.float64), mode, seed, draws
    )


def variant_count(n: int, c: float) -> int:
    return 2 * math.comb(n, wait_set_size(n, c))


def enumerate_sweeps(
    g: Graph | SpanningTree,
    cfg: StrategyConfig,
    budget: int = DEFAULT_BUDGET,
    directions: tuple[str, ...] = DIRECTIONS,
) -> SweepEnsemble:
    """Every (wait set, direction) pair with its probability.

    Wait sets only matter through their intersection with the leaves, so
    pairs that yield the same walk are merged with summed weight.
    """
    t = g if isinstance(g, SpanningTree) else spanning_tree(g, cfg.root)
    n = t.n
    k = wait_set_size(n, cfg.c)
    total = math.comb(n, k)
    if total * len(directions) > budget:
        raise BudgetExceeded(
            f"{total * len(directions)} sweep variants exceed the budget of {budget}; "
            "use sampled mode"
        )
    leaf_list = sorted(leaves(t))
    others = n - len(leaf_list)
    base = dfs_closed_walk(t)
    walks, weights = [], []
    for s in range(max(0, k - others), min(k, len(leaf_list)) + 1):
        mult = math.comb(others, k - s)
        for chosen in itertools.combinations(leaf_list, s):
            fwd = augment_walk(base, frozenset(chosen), leaf_list, t.root)
            for direction in directions:
                walks.append(orient(fwd, direction).visits)
                weights.append(mult / (total * len(directions)))
    return _ensemble_from_walks(walks, weights, n, "enumerated", draws=total * len(directions))


def sample_sweeps(
    g: Graph | SpanningTree,
    cfg: StrategyConfig,
    k: int,
    seed: int = 0,
    directions: tuple[str, ...] = DIRECTIONS,
) -> SweepEnsemble:
    """``k`` i.i.d. (wait set, direction) draws; repeated walks are merged."""
    t = g if isinstance(g, SpanningTree) else spanning_tree(g, cfg.root)
    n = t.n
    rng = np.random.default_rng(seed)
    size = wait_set_size(n, cfg.c)
    leaf_arr = np.zeros(n, dtype=bool)
    leaf_arr[sorted(leaves(t))] = True
    if size:
        chosen = fisher_yates_prefix(rng.random((k, size)), n)
    else:
        chosen = np.zeros((k, 0), dtype=np.int64)
    coins = rng.random(k) < 0.5
    base = dfs_closed_walk(t)
    tally: dict[tuple, int] = {}
    for row, coin in zip(chosen, coins):
        extra = tuple(sorted(int(v) for v in row if leaf_arr[v]))
        direction = directions[0] if len(directions) == 1 else (BACKWARD if coin else FORWARD)
        key = (extra, direction)
        tally[key] = tally.get(key, 0) + 1
    walks, weights = [], []
    for (extra, direction), cnt in sorted(tally.items()):
        fwd = augment_walk(base, frozenset(extra), frozenset(extra), t.root)
        walks.append(orient(fwd, direction).visits)
        weights.append(cnt / k)
    return _ensemble_from_walks(walks, weights, n, "sampled", seed=seed, draws=k)


def sweep_ensemble(
    g: Graph | SpanningTree,
    cfg: StrategyConfig,
    mode: Mode = ENUMERATED,
    directions: tuple[str, ...] = DIRECTIONS,
) -> SweepEnsemble:
    t = g if isinstance(g, SpanningTree) else spanning_tree(g, cfg.root)
    if mode.kind == "sampled":
        return sample_sweeps(t, cfg, mode.k, mode.seed, directions)
    if mode.kind == "auto" and variant_count(t.n, cfg.c) // 2 * len(directions) > mode.budget:
        return sample_sweeps(t, cfg, mode.k, mode.seed, directions)
    return enumerate_sweeps(t, cfg, mode.budget, directions)


def aggregate(ens: SweepEnsemble, p: np.ndarray) -> PolicyStats:
    q, mass, turn = ens.capture_moments(p)
    w = ens.weights
    q_bar = float(w @ q)
    evade_len = float(w @ (q * ens.lengths))
    capture = float(w @ mass)
    if capture <= 0.0:
        raise DegenerateEvasion("no sweep can capture the gambler")
    stderr = 0.0
    if ens.mode == "sampled" and ens.draws > 1:
        var = float(w @ (q - q_bar) ** 2) * ens.draws / (ens.draws - 1)
        stderr = math.sqrt(var / ens.draws)
    return PolicyStats(
        q_bar=q_bar,
        e_len_given_evade=evade_len / q_bar if q_bar > 0 else None,
        e_turn_given_capture=float(w @ turn) / capture,
        mode=ens.mode,
        variants=ens.draws,
        seed=ens.seed,
        q_bar_stderr=stderr,
        evade_len_mass=evade_len,
    )


def policy_sweep_aggregate(
    g: Graph, cfg: StrategyConfig, d: GamblerDistribution, mode: Mode = ENUMERATED
) -> PolicyStats:
    return aggregate(sweep_ensemble(g, cfg, mode), d.p)


def capture_time_from_ensemble(ens: SweepEnsemble, p: np.ndarray) -> ExactCaptureTime:
    """Failed-sweep turns plus the capture turn of the successful sweep."""
    stats = aggregate(ens, p)
    if stats.q_bar >= 1.0:
        raise DegenerateEvasion("gambler evades every sweep")
    failed = stats.evade_len_mass / (1.0 - stats.q_bar)
    success = stats.e_turn_given_capture
    return ExactCaptureTime(failed + success, failed, success, stats)


def expected_capture_time(
    g: Graph, cfg: StrategyConfig, d: GamblerDistribution, mode: Mode = ENUMERATED
) -> ExactCaptureTime:
    """Exact expected capture time when the wait set is redrawn every sweep.

    A coin frozen for the whole game is handled by conditioning on its side;
    a frozen wait set makes sweeps dependent and is rejected.
    """
    if not cfg.resample_U_each_sweep:
        raise NonIIDSweeps("wait set is frozen across sweeps; use Monte Carlo or the turn-level oracle")
    t = spanning_tree(g, cfg.root)
    if cfg.resample_direction_each_sweep:
        return capture_time_from_ensemble(sweep_ensemble(t, cfg, mode), d.p)
    halves = [
        capture_time_from_ensemble(sweep_ensemble(t, cfg, mode, (direction,)), d.p)
        for direction in DIRECTIONS
    ]
    failed = 0.5 * sum(h.e_failed_turns for h in halves)
    success = 0.5 * sum(h.e_success_turns for h in halves)
    return ExactCaptureTime(failed + success, failed, success, None)
