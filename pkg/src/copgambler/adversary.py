"""Adversarial gambler: projected gradient ascent over the probability simplex."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .exact import ENUMERATED, Mode, SweepEnsemble, capture_time_from_ensemble, sweep_ensemble
from .gambler import GamblerDistribution, uniform
from .graph import Graph
from .sweep import StrategyConfig

STATIONARITY_TOL = 1e-8
ARMIJO = 1e-4
FD_STEP = 1e-6


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto ``{x >= 0, sum x = 1}``."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    x = np.maximum(v - theta, 0.0)
    return x / x.sum()


def tangent(grad: np.ndarray) -> np.ndarray:
    return grad - grad.mean()


@dataclass(frozen=True)
class EvasionObjective:
    value: float
    gradient: np.ndarray  # projected onto the simplex tangent space
    partials: np.ndarray = field(repr=False)


def evasion_value_and_partials(ens: SweepEnsemble, p: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean sweep evasion and its partial derivatives in each ``p_i``.

    ``d/dp_i prod_v (1-p_v)^m_v = -m_i (1-p_i)^(m_i-1) prod_{v != i} (1-p_v)^m_v``;
    the product over the other vertices uses prefix/suffix products so a
    factor equal to zero never gets divided out.
    """
    p = np.asarray(p, dtype=np.float64)
    m = ens.counts
    base = 1.0 - p
    factors = base ** m
    with np.errstate(divide="ignore", invalid="ignore"):
        dfac = np.where(m > 0, m * base ** np.maximum(m - 1, 0), 0.0)
    w = m.shape[0]
    ones = np.ones((w, 1))
    prefix = np.cumprod(np.hstack([ones, factors[:, :-1]]), axis=1)
    suffix = np.cumprod(np.hstack([ones, factors[:, :0:-1]]), axis=1)[:, ::-1]
    others = prefix * suffix
    q = np.prod(factors, axis=1)
    partials = -(ens.weights @ (dfac * others))
    return float(ens.weights @ q), partials


def evasion_objective(
    g: Graph, cfg: StrategyConfig, d: GamblerDistribution, mode: Mode = ENUMERATED
) -> EvasionObjective:
    ens = sweep_ensemble(g, cfg, mode)
    value, partials = evasion_value_and_partials(ens, d.p)
    return EvasionObjective(value, tangent(partials), partials)


def capture_time_value(ens: SweepEnsemble, p: np.ndarray) -> float:
    return capture_time_from_ensemble(ens, p).value


def capture_time_partials(ens: SweepEnsemble, p: np.ndarray, h: float = FD_STEP) -> np.ndarray:
    """Central differences of the exact capture time in each raw ``p_i``."""
    grad = np.empty(p.size)
    for i in range(p.size):
        up, down = p.copy(), p.copy()
        up[i] += h
        down[i] -= h
        grad[i] = (capture_time_value(ens, up) - capture_time_value(ens, down)) / (2 * h)
    return grad


@dataclass
class AdversaryResult:
    best_distribution: GamblerDistribution
    best_objective: float
    objective_kind: str
    iterations: int
    restarts: int
    seed: int
    gradient_norm_at_solution: float
    uniform_objective: float
    mode: str = "enumerated"

    @property
    def beats_uniform(self) -> bool:
        return self.best_objective > self.uniform_objective + 1e-12

    def to_dict(self) -> dict:
        return {
            "objective_kind": self.objective_kind,
            "best_objective": self.best_objective,
            "uniform_objective": self.uniform_objective,
            "beats_uniform": self.beats_uniform,
            "best_distribution": self.best_distribution.to_list(),
            "iterations": self.iterations,
            "restarts": self.restarts,
            "seed": self.seed,
            "gradient_norm_at_solution": self.gradient_norm_at_solution,
            "mode": self.mode,
        }


def stationarity(x: np.ndarray, grad: np.ndarray) -> float:
    """Norm of the projected-gradient step; zero exactly at KKT points."""
    return float(np.linalg.norm(project_simplex(x + grad) - x))


def ascend(
    fun: Callable[[np.ndarray], float],
    grad_fun: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    iters: int,
    callback: Optional[Callable[[np.ndarray], None]] = None,
) -> tuple[np.ndarray, float, int, float]:
    """Projected gradient ascent with Armijo backtracking from step 1."""
    x = project_simplex(np.asarray(x0, dtype=np.float64))
    fx = fun(x)
    it = 0
    gnorm = np.inf
    for it in range(1, iters + 1):
        grad = grad_fun(x)
        gnorm = stationarity(x, grad)
        if gnorm < STATIONARITY_TOL:
            break
        step = 1.0
        while step > 1e-14:
            y = project_simplex(x + step * grad)
            fy = fun(y)
            if fy >= fx + ARMIJO * float(grad @ (y - x)) and fy >= fx:
                break
            step *= 0.5
        else:
            break
        if callback is not None:
            callback(y)
        converged = fy - fx <= 1e-15 * max(1.0, abs(fx))
        x, fx = y, fy
        if converged:
            gnorm = stationarity(x, grad_fun(x))
            break
    else:
        gnorm = stationarity(x, grad_fun(x))
    return x, fx, it, gnorm


def starting_points(n: int, restarts: int, seed: int) -> list[np.ndarray]:
    """Uniform, point masses, then ``restarts`` Dirichlet(1) draws."""
    rng = np.random.default_rng(seed)
    starts = [np.full(n, 1.0 / n)]
    for v in sorted(set(np.linspace(0, n - 1, min(n, max(restarts, 1))).round().astype(int).tolist())):
        e = np.zeros(n)
        e[v] = 1.0
        starts.append(e)
    starts.extend(rng.dirichlet(np.ones(n)) for _ in range(restarts))
    return starts


def _maximize(kind, ens, fun, grad_fun, n, restarts, iters, seed, callback) -> AdversaryResult:
    best = None
    total_iters = 0
    starts = starting_points(n, restarts, seed)
    for idx, x0 in enumerate(starts):
        x, fx, it, gnorm = ascend(fun, grad_fun, x0, iters, callback)
        total_iters += it
        if best is None or fx > best[0]:
            best = (fx, idx, x, gnorm)
    fx, _, x, gnorm = best
    dist = GamblerDistribution(x)
    return AdversaryResult(
        best_distribution=dist,
        best_objective=fun(dist.p),
        objective_kind=kind,
        iterations=total_iters,
        restarts=len(starts),
        seed=seed,
        gradient_norm_at_solution=gnorm,
        uniform_objective=fun(uniform(n).p),
        mode=ens.mode,
    )


def maximize_evasion(
    g: Graph,
    cfg: StrategyConfig,
    restarts: int = 8,
    iters: int = 500,
    seed: int = 0,
    mode: Mode = ENUMERATED,
    callback: Optional[Callable[[np.ndarray], None]] = None,
) -> AdversaryResult:
    """Gambler distribution maximising the mean per-sweep evasion probability."""
    ens = sweep_ensemble(g, cfg, mode)
    return _maximize(
        "sweep_evasion",
        ens,
        lambda p: evasion_value_and_partials(ens, p)[0],
        lambda p: tangent(evasion_value_and_partials(ens, p)[1]),
        g.n,
        restarts,
        iters,
        seed,
        callback,
    )


def maximize_capture_time(
    g: Graph,
    cfg: StrategyConfig,
    restarts: int = 8,
    iters: int = 200,
    seed: int = 0,
    budget: Optional[int] = None,
    callback: Optional[Callable[[np.ndarray], None]] = None,
) -> AdversaryResult:
    """Gambler distribution maximising the exact expected capture time.

    Needs an enumerable strategy; raises ``BudgetExceeded`` otherwise.
    """
    mode = ENUMERATED if budget is None else Mode("enumerated", budget=budget)
    ens = sweep_ensemble(g, cfg, mode)
    return _maximize(
        "capture_time",
        ens,
        lambda p: capture_time_value(ens, p),
        lambda p: tangent(capture_time_partials(ens, p)),
        g.n,
        restarts,
        iters,
        seed,
        callback,
    )
