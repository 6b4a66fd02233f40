"""Average recovery cost on the fishery model with a synthetic exit row for state 4.

Sweeps the number of excursions and prints the estimate next to the beta bounds.
"""
import argparse

from firstpassage import dp, instances, policy as pe, simulate as sim


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--runs", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    model = instances.fishery_with_exit()
    res = dp.value_iteration(model, tolerance=1e-10)
    b = pe.recovery_bounds(model, res.value)
    total = pe.concatenate_recovery(model, res.greedy)
    print(f"beta_lower={b.beta_lower:.4f} beta_upper={b.beta_upper:.4f}")
    for n in (10, 100, 1000):
        est = sim.estimate_recovery_cost(model, total, sim.SimulationConfig(args.runs, master_seed=args.seed), n)
        print(f"excursions={n:5d} estimate={est.estimate:.4f} half_width={est.half_width:.4f} exits={est.exits}")


if __name__ == "__main__":
    main()
