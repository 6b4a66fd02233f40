"""Horizon sweep on the fishery model: cost and hitting-time statistics per rolling horizon.

Writes one CSV row per policy (rolling:1..10 and optimal), the data behind the
accumulated-cost and hitting-time plots. Runs start at population level 1.

    python scripts/fishery_horizon_study.py --runs 200000 --out horizon.csv
"""
import argparse
import csv
import sys

from firstpassage import dp, instances, policy as pe, simulate as sim
from firstpassage.cli import fmt


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--runs", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-steps", type=int, default=10_000)
    ap.add_argument("--horizons", type=int, default=10)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()

    model = instances.fishery()
    opt = dp.value_iteration(model, tolerance=1e-9).greedy
    config = sim.SimulationConfig(args.runs, args.max_steps, args.seed, initial_state=0)
    policies = [(f"rolling:{N}", pe.rolling_horizon(model, N).stationary_selector)
                for N in range(1, args.horizons + 1)]
    policies.append(("optimal", opt))

    out = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["policy", "matches_optimal", "exact_cost", "cost_mean", "cost_std",
                "time_mean", "time_std", "censored_count"])
    for name, f in policies:
        s = sim.monte_carlo(model, f, config)
        exact = pe.evaluate_policy(model, f).value[0]
        w.writerow([name, f == opt, fmt(exact), fmt(s.cost_mean), fmt(s.cost_std),
                    fmt(s.time_mean), fmt(s.time_std), s.censored_count])
    if out is not sys.stdout:
        out.close()


if __name__ == "__main__":
    main()
