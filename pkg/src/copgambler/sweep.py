"""One sweep of the cop: a closed DFS walk of the spanning tree with extra
stays at sampled leaves, run forwards or backwards."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidParameter
from .graph import SpanningTree, leaves

DEFAULT_C = 0.72912

FORWARD = "forward"
BACKWARD = "backward"
DIRECTIONS = (FORWARD, BACKWARD)


@dataclass(frozen=True)
class StrategyConfig:
    c: float = DEFAULT_C
    root: int = 0
    resample_U_each_sweep: bool = True
    resample_direction_each_sweep: bool = True

    def __post_init__(self):
        if not 0.0 <= self.c <= 1.0:
            raise InvalidParameter(f"wait-set fraction c must lie in [0, 1], got {self.c}")
        if self.root < 0:
            raise InvalidParameter(f"root must be non-negative, got {self.root}")

    def wait_set_size(self, n: int) -> int:
        return wait_set_size(n, self.c)

    @property
    def iid_sweeps(self) -> bool:
        return self.resample_U_each_sweep and self.resample_direction_each_sweep


def wait_set_size(n: int, c: float) -> int:
    # c*n is rounded to 12 digits first so that e.g. 0.5*4 is never pushed to 3 by
    # representation error.
    return min(n, math.ceil(round(c * n, 12)))


@dataclass(frozen=True)
class SweepWalk:
    visits: tuple[int, ...]
    direction: str = FORWARD
    root: int = 0
    wait_set: frozenset[int] = field(default_factory=frozenset)

    def __len__(self) -> int:
        return len(self.visits)

    def counts(self, n: int) -> np.ndarray:
        return np.bincount(np.asarray(self.visits, dtype=np.int64), minlength=n)

    def to_json(self) -> list[int]:
        return list(self.visits)


def dfs_closed_walk(t: SpanningTree) -> list[int]:
    """Vertex occupied on each turn of a closed preorder DFS of ``t``.

    Every tree edge is walked twice, so the walk has ``2(n-1)+1`` entries and
    starts and ends at the root.
    """
    walk = [t.root]
    stack = [(t.root, iter(t.children[t.root]))]
    while stack:
        v, it = stack[-1]
        child = next(it, None)
        if child is None:
            stack.pop()
            if stack:
                walk.append(stack[-1][0])
        else:
            walk.append(child)
            stack.append((child, iter(t.children[child])))
    return walk


def fisher_yates_prefix(uniforms: np.ndarray, n: int) -> np.ndarray:
    """Rows of ``k`` distinct vertices from a partial Fisher-Yates shuffle.

    ``uniforms`` has shape ``(batch, k)`` with entries in [0, 1); column ``i``
    picks the swap partner among positions ``i..n-1``.
    """
    uniforms = np.atleast_2d(uniforms)
    batch, k = uniforms.shape
    perm = np.tile(np.arange(n, dtype=np.int64), (batch, 1))
    rows = np.arange(batch)
    for i in range(k):
        j = i + np.minimum((uniforms[:, i] * (n - i)).astype(np.int64), n - i - 1)
        a = perm[rows, i].copy()
        perm[rows, i] = perm[rows, j]
        perm[rows, j] = a
    return perm[:, :k]


def sample_wait_set(n: int, c: float, rng: np.random.Generator) -> frozenset[int]:
    """Uniform random subset of ``ceil(c*n)`` vertices."""
    if not 0.0 <= c <= 1.0:
        raise InvalidParameter(f"c must lie in [0, 1], got {c}")
    k = wait_set_size(n, c)
    if k == 0:
        return frozenset()
    chosen = fisher_yates_prefix(rng.random((1, k)), n)[0]
    return frozenset(chosen.tolist())


def augment_walk(
    walk: list[int] | tuple[int, ...],
    wait_set: frozenset[int] | set[int],
    leaf_set: frozenset[int] | set[int],
    root: Optional[int] = None,
) -> SweepWalk:
    """Stay one extra turn at every leaf that belongs to the wait set."""
    extra = set(wait_set) & set(leaf_set)
    visits: list[int] = []
    for v in walk:
        visits.append(v)
        if v in extra:
            visits.append(v)
    return SweepWalk(
        tuple(visits),
        FORWARD,
        walk[0] if root is None else root,
        frozenset(wait_set),
    )


def orient(w: SweepWalk, direction: str) -> SweepWalk:
    if direction == FORWARD:
        return w
    if direction == BACKWARD:
        return SweepWalk(tuple(reversed(w.visits)), BACKWARD, w.root, w.wait_set)
    raise InvalidParameter(f"direction must be one of {DIRECTIONS}, got {direction!r}")


def build_sweep(
    t: SpanningTree,
    cfg: StrategyConfig,
    rng: np.random.Generator,
    *,
    wait_set: Optional[frozenset[int]] = None,
    direction: Optional[str] = None,
) -> SweepWalk:
    """Sample the wait set and the coin, then build the oriented sweep.

    Passing ``wait_set`` or ``direction`` reuses that value instead of drawing
    a fresh one (used when the strategy freezes them across sweeps).
    """
    if wait_set is None:
        wait_set = sample_wait_set(t.n, cfg.c, rng)
    if direction is None:
        direction = FORWARD if rng.random() < 0.5 else BACKWARD
    walk = augment_walk(dfs_closed_walk(t), wait_set, leaves(t), t.root)
    return orient(walk, direction)
