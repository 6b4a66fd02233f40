import numpy as np
import pytest

from firstpassage import dp, instances
from firstpassage import policy as pe
from firstpassage import simulate as sim
from firstpassage.errors import ExcursionStalled, PolicyUndefined
from firstpassage.model import StationaryPolicy


def test_start_in_target(fishery, fishery_star):
    rec = sim.sample_trajectory(fishery, fishery_star.greedy, initial_state=3)
    assert rec.hitting_time == 0
    assert rec.discounted_cost == 0.0
    assert rec.actions == []


def test_trajectory_reproducible(fishery, fishery_star):
    a = sim.sample_trajectory(fishery, fishery_star.greedy, master_seed=42, run_index=7)
    b = sim.sample_trajectory(fishery, fishery_star.greedy, master_seed=42, run_index=7)
    assert a == b
    assert a.states[-1] == 3
    assert len(a.states) == a.hitting_time + 1
    # recompute the cost from the recorded path
    cost = sum(0.9**i * fishery.stage_cost[x][u] for i, (x, u) in enumerate(zip(a.states, a.actions)))
    assert a.discounted_cost == pytest.approx(cost, rel=1e-12)


def test_harvesting_state_one_is_censored(fishery):
    f = pe.rolling_horizon(fishery, 1).stationary_selector
    rec = sim.sample_trajectory(fishery, f, max_steps=500)
    assert rec.censored
    assert len(rec.actions) == 500
    assert set(rec.states) == {0}
    assert rec.discounted_cost == pytest.approx(280 * (1 - 0.9**500) / 0.1, rel=1e-12)


def test_partial_policy_raises(fishery):
    with pytest.raises(PolicyUndefined):
        # state 2 has no action; import from state 1 eventually reaches it
        sim.sample_trajectory(fishery, {0: "import"}, master_seed=1)


def test_monte_carlo_matches_exact(fishery, fishery_star):
    exact = pe.evaluate_policy(fishery, fishery_star.greedy).value[0]
    s = sim.monte_carlo(fishery, fishery_star.greedy, sim.SimulationConfig(runs=10_000, master_seed=5))
    assert s.censored_count == 0
    assert abs(s.cost_mean - exact) <= 3 * s.cost_stderr
    assert s.time_mean > 0 and s.time_std > 0


def test_single_run_is_degenerate(fishery, fishery_star):
    s = sim.monte_carlo(fishery, fishery_star.greedy, sim.SimulationConfig(runs=1))
    assert s.degenerate and s.cost_std == 0.0 and s.cost_stderr == 0.0


def test_monte_carlo_deterministic(fishery, fishery_star):
    cfg = sim.SimulationConfig(runs=500, master_seed=11)
    assert sim.monte_carlo(fishery, fishery_star.greedy, cfg) == sim.monte_carlo(fishery, fishery_star.greedy, cfg)
    other = sim.monte_carlo(fishery, fishery_star.greedy, sim.SimulationConfig(runs=500, master_seed=12))
    assert other != sim.monte_carlo(fishery, fishery_star.greedy, cfg)


def test_run_streams_do_not_depend_on_run_count(fishery, fishery_star):
    # run r of a 10-run batch equals run r sampled alone
    f = fishery_star.greedy
    alone = sim.sample_trajectory(fishery, f, master_seed=3, run_index=4)
    cfg = sim.SimulationConfig(runs=10, master_seed=3)
    chain = sim._Chain(fishery, f)
    assert sim._sample(chain, cfg.master_seed, cfg.max_steps, 0, 4) == alone


def test_indicator_cost_matches_dssp(fishery, fishery_star):
    f = fishery_star.greedy
    unit = fishery.with_unit_cost()
    s = sim.monte_carlo(unit, f, sim.SimulationConfig(runs=10_000, master_seed=8))
    assert abs(s.cost_mean - dp.dssp_value(fishery, f, 0)) <= 4 * s.cost_stderr


def _small_recovery_model():
    rng = np.random.default_rng(2024)
    return instances.random_model(rng, n_nontarget=3, n_target=1, in_target=True, exit_mass=(0.2, 0.6))


def test_recovery_estimate_singleton_target():
    model = _small_recovery_model()
    res = dp.value_iteration(model, tolerance=1e-10)
    b = pe.recovery_bounds(model, res.value)
    assert b.beta_lower == b.beta_upper
    total = pe.concatenate_recovery(model, res.greedy)
    est = sim.estimate_recovery_cost(model, total, sim.SimulationConfig(runs=100, master_seed=1, initial_state=3), 1000)
    assert abs(est.estimate - b.beta_lower) <= est.half_width
    assert est.exits + est.shortfall == 100 * 1001


def test_recovery_never_exits(fishery, fishery_star):
    closed = instances.with_in_target(fishery, {3: [0, 0, 0, 1.0]})
    total = pe.concatenate_recovery(closed, fishery_star.greedy)
    est = sim.estimate_recovery_cost(closed, total, sim.SimulationConfig(runs=5, master_seed=0, initial_state=3), 50)
    assert est.estimate == 0.0
    assert est.exits == 0 and est.shortfall == 5 * 51


def test_recovery_stalls_when_recovery_policy_never_returns(fishery_exit):
    harvest = StationaryPolicy((0, 0, 0))
    total = pe.concatenate_recovery(fishery_exit, harvest)
    with pytest.raises(ExcursionStalled):
        sim.estimate_recovery_cost(fishery_exit, total, sim.SimulationConfig(runs=3, max_steps=1000), 10)


def test_config_validation():
    with pytest.raises(ValueError):
        sim.SimulationConfig(runs=0)
    with pytest.raises(ValueError):
        sim.SimulationConfig(max_steps=0)
