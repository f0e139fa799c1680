"""The gambler's fixed per-turn distribution over vertices."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import AllZero, InvalidParameter, NegativeWeight

NORMALIZATION_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class GamblerDistribution:
    """Probability vector ``p`` over vertices ``0..n-1``.

    Weights are renormalised on construction, so ``p`` always sums to one.
    """

    p: np.ndarray
    cdf: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        p = np.array(self.p, dtype=np.float64).ravel()
        if p.size == 0:
            raise InvalidParameter("distribution needs at least one vertex")
        if not np.all(np.isfinite(p)):
            raise InvalidParameter("weights must be finite")
        if np.any(p < 0):
            raise NegativeWeight("weights must be non-negative")
        total = p.sum()
        if total <= 0:
            raise AllZero("at least one weight must be positive")
        p = p / total
        if abs(p.sum() - 1.0) > NORMALIZATION_TOL:
            p = p / p.sum()
        p.setflags(write=False)
        cdf = np.cumsum(p)
        cdf[-1] = 1.0
        cdf.setflags(write=False)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "cdf", cdf)

    @property
    def n(self) -> int:
        return self.p.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, GamblerDistribution):
            return NotImplemented
        return bool(np.array_equal(self.p, other.p))

    def __hash__(self) -> int:
        return hash(self.p.tobytes())

    def to_list(self) -> list[float]:
        return self.p.tolist()


def uniform(n: int) -> GamblerDistribution:
    if n < 1:
        raise InvalidParameter(f"n must be >= 1, got {n}")
    return GamblerDistribution(np.full(n, 1.0 / n))


def point_mass(n: int, vertex: int) -> GamblerDistribution:
    if not 0 <= vertex < n:
        raise InvalidParameter(f"vertex {vertex} out of range for n={n}")
    w = np.zeros(n)
    w[vertex] = 1.0
    return GamblerDistribution(w)


def from_weights(w: Sequence[float] | np.ndarray) -> GamblerDistribution:
    return GamblerDistribution(np.asarray(w, dtype=np.float64))


def sample_vertex(d: GamblerDistribution, rng: np.random.Generator) -> int:
    return int(np.searchsorted(d.cdf, rng.random(), side="right"))


def sample_vertices(d: GamblerDistribution, uniforms: np.ndarray) -> np.ndarray:
    """Inverse-CDF lookup for an array of uniforms in [0, 1)."""
    idx = np.searchsorted(d.cdf, uniforms, side="right")
    return np.minimum(idx, d.n - 1)


def parse_distribution(spec: str, n: int) -> GamblerDistribution:
    """``uniform``, ``point:<i>`` or a comma-separated weight list."""
    spec = spec.strip()
    if spec == "uniform":
        return uniform(n)
    if spec.startswith("point:"):
        try:
            vertex = int(spec.split(":", 1)[1])
        except ValueError:
            raise InvalidParameter(f"bad point mass spec {spec!r}") from None
        return point_mass(n, vertex)
    try:
        weights = [float(x) for x in spec.split(",")]
    except ValueError:
        raise InvalidParameter(f"bad distribution spec {spec!r}") from None
    if len(weights) != n:
        raise InvalidParameter(f"got {len(weights)} weights for {n} vertices")
    return from_weights(weights)
