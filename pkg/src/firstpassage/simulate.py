"""Seeded Monte Carlo sampling of trajectories stopped at the target set.

Every run draws from its own generator seeded by ``(master_seed, run_index)``
through ``numpy.random.SeedSequence``, so a run's outcome does not depend on
which other runs were simulated or in what order.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import ExcursionStalled, MissingTargetDynamics, PolicyUndefined
from .model import MarkovControlModel, StationaryPolicy
from .policy import TotalPolicy

BLOCK = 256


@dataclass(frozen=True)
class SimulationConfig:
    runs: int = 10_000
    max_steps: int = 100_000
    master_seed: int = 0
    initial_state: int = 0

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


@dataclass
class TrajectoryRecord:
    states: list
    actions: list
    hitting_time: int | None  # None means censored at max_steps
    discounted_cost: float

    @property
    def censored(self) -> bool:
        return self.hitting_time is None


@dataclass
class MonteCarloSummary:
    runs: int
    cost_mean: float
    cost_std: float
    cost_stderr: float
    time_mean: float | None
    time_std: float | None
    censored_count: int
    degenerate: bool = False


def run_rng(master_seed: int, run_index: int) -> np.random.Generator:
    return np.random.default_rng([int(master_seed) & 0xFFFFFFFFFFFFFFFF, int(run_index)])


class _Uniforms:
    def __init__(self, rng):
        self.rng = rng
        self.buf = []
        self.pos = 0

    def __call__(self) -> float:
        if self.pos == len(self.buf):
            self.buf = self.rng.random(BLOCK).tolist()
            self.pos = 0
        u = self.buf[self.pos]
        self.pos += 1
        return u


class _Chain:
    """Per-state cumulative rows, costs and stop flags for one policy."""

    def __init__(self, model: MarkovControlModel, policy, stop_on_target=True):
        n = model.state_count
        self.alpha = model.discount
        self.n = n
        self.action = [None] * n
        self.cum = [None] * n
        self.cost = [0.0] * n
        self.stop = [stop_on_target and model.is_target(x) for x in range(n)]
        self.trapped = [False] * n
        for x in range(n):
            if model.is_target(x):
                if isinstance(policy, TotalPolicy):
                    if model.in_target is None:
                        raise MissingTargetDynamics("total policy needs in-target dynamics")
                    lbl, row = model.in_target[x]
                    self._set(x, 0, row, 0.0)
                continue
            a = _lookup(model, policy, x)
            if a is None:
                continue
            row = model.transition[x][a]
            self._set(x, a, row, float(model.stage_cost[x][a]))
            self.trapped[x] = row[x] == 1.0

    def _set(self, x, a, row, cost):
        cum = np.cumsum(row)
        cum[-1] = 1.0
        self.action[x] = a
        self.cum[x] = cum.tolist()
        self.cost[x] = cost

    def step(self, x, u) -> int:
        return min(bisect_right(self.cum[x], u), self.n - 1)


def _lookup(model, policy, x):
    if isinstance(policy, StationaryPolicy):
        return policy.choice[model.position[x]]
    if isinstance(policy, TotalPolicy):
        return policy.choice[x]
    if isinstance(policy, Mapping):
        a = policy.get(x)
        return None if a is None else model.action_index(x, a)
    raise TypeError(f"unsupported policy type {type(policy).__name__}")


def _walk(chain: _Chain, x: int, max_steps: int, draw, record=None):
    """Run until a stop state or max_steps. Returns (state, steps, discounted cost, hit)."""
    alpha = chain.alpha
    disc, total, t = 1.0, 0.0, 0
    while not chain.stop[x]:
        if t >= max_steps:
            return x, t, total, False
        a = chain.action[x]
        if a is None:
            raise PolicyUndefined(f"no action for state {x}")
        if chain.trapped[x]:
            # deterministic self-loop: the rest of the path is known in closed form
            r = max_steps - t
            total += chain.cost[x] * disc * (1.0 - alpha**r) / (1.0 - alpha)
            if record is not None:
                record[0].extend([x] * r)
                record[1].extend([a] * r)
            return x, max_steps, total, False
        total += disc * chain.cost[x]
        disc *= alpha
        if record is not None:
            record[0].append(x)
            record[1].append(a)
        x = chain.step(x, draw())
        t += 1
    return x, t, total, True


def sample_trajectory(
    model: MarkovControlModel, policy, master_seed: int = 0, max_steps: int = 100_000,
    initial_state: int = 0, run_index: int = 0,
) -> TrajectoryRecord:
    """Simulate x_{i+1} ~ Q(.|x_i, pi(x_i)) until the target set is entered or max_steps elapse."""
    chain = _Chain(model, policy)
    return _sample(chain, master_seed, max_steps, initial_state, run_index)


def _sample(chain, master_seed, max_steps, initial_state, run_index):
    record = ([], [])
    draw = _Uniforms(run_rng(master_seed, run_index))
    x, t, cost, hit = _walk(chain, int(initial_state), max_steps, draw, record)
    states = record[0] + [x]
    return TrajectoryRecord(states, record[1], t if hit else None, cost)


def monte_carlo(model: MarkovControlModel, policy, config: SimulationConfig) -> MonteCarloSummary:
    """Aggregate ``config.runs`` independent trajectories (unbiased n-1 estimators)."""
    chain = _Chain(model, policy)
    costs = np.empty(config.runs)
    times = []
    for r in range(config.runs):
        draw = _Uniforms(run_rng(config.master_seed, r))
        _, t, cost, hit = _walk(chain, int(config.initial_state), config.max_steps, draw)
        costs[r] = cost
        if hit:
            times.append(t)
    n = config.runs
    degenerate = n == 1
    cost_std = 0.0 if degenerate else float(np.std(costs, ddof=1))
    if times:
        times = np.asarray(times, dtype=float)
        time_mean = float(times.mean())
        time_std = 0.0 if len(times) == 1 else float(np.std(times, ddof=1))
    else:
        time_mean = time_std = None
    return MonteCarloSummary(
        runs=n,
        cost_mean=float(costs.mean()),
        cost_std=cost_std,
        cost_stderr=cost_std / math.sqrt(n),
        time_mean=time_mean,
        time_std=time_std,
        censored_count=n - len(times),
        degenerate=degenerate,
    )


@dataclass
class RecoveryEstimate:
    estimate: float
    half_width: float
    excursions: int
    runs: int
    exits: int  # excursions that actually left the target set, summed over runs
    shortfall: int  # excursions that were empty because the in-target step stayed in K


def estimate_recovery_cost(
    model: MarkovControlModel, total_policy: TotalPolicy, config: SimulationConfig,
    excursions: int, z: float = 3.0,
) -> RecoveryEstimate:
    """Average discounted cost per excursion under the concatenated policy.

    Excursion i starts at tau_{2i} and accrues alpha**(t - tau_{2i}) c(x_t, a_t)
    until the next entry tau_{2i+1} into K; tau_{2i+2} is one in-target step
    later. An in-target step that lands in K again yields an empty excursion
    with zero cost. Each run averages ``excursions + 1`` excursions; the
    estimate is the mean over runs, with half-width ``z`` standard errors.
    """
    if model.in_target is None:
        raise MissingTargetDynamics("model has no in-target dynamics")
    if excursions < 1:
        raise ValueError("excursions must be >= 1")
    out_chain = _Chain(model, total_policy)
    k = excursions + 1
    run_means = np.empty(config.runs)
    all_costs = []
    exits = 0
    for r in range(config.runs):
        draw = _Uniforms(run_rng(config.master_seed, r))
        x = int(config.initial_state)
        if model.is_target(x):
            x = out_chain.step(x, draw())
        costs = np.empty(k)
        for i in range(k):
            if model.is_target(x):
                costs[i] = 0.0
            else:
                exits += 1
                x, _, cost, hit = _walk(out_chain, x, config.max_steps, draw)
                if not hit:
                    raise ExcursionStalled(
                        f"run {r}, excursion {i} did not reach the target set in {config.max_steps} steps"
                    )
                costs[i] = cost
            x = out_chain.step(x, draw())
        run_means[r] = costs.mean()
        if config.runs == 1:
            all_costs = costs
    if config.runs > 1:
        se = np.std(run_means, ddof=1) / math.sqrt(config.runs)
    else:
        se = np.std(all_costs, ddof=1) / math.sqrt(k)
    total = config.runs * k
    return RecoveryEstimate(float(run_means.mean()), float(z * se), excursions, config.runs, exits, total - exits)
