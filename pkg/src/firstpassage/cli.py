"""Command-line front end: ``firstpassage {validate,solve,rolling,simulate,recovery}``.

Each command prints a JSON run report on stdout; ``--out`` additionally writes
the result table as CSV. Exit codes: 0 ok, 2 invalid model or arguments,
3 value iteration did not converge, 4 I/O failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import dp, policy as pe, simulate as sim
from .errors import FirstPassageError, NotConverged, ValidationError
from .model import StationaryPolicy, make_weight_certificate
from .modelfile import bundled_path, load_model_with_weight

EXIT_OK, EXIT_INVALID, EXIT_NOT_CONVERGED, EXIT_IO = 0, 2, 3, 4
CENSORED = "CENSORED"

# Column order per command; fixed and documented in the README.
COLUMNS = {
    "solve": ["state", "action", "value"],
    "rolling": ["horizon", "state", "action", "vi_value", "achieved_value", "gap", "bound"],
    "simulate": [
        "policy", "runs", "cost_mean", "cost_std", "cost_stderr",
        "time_mean", "time_std", "censored_count",
    ],
    "recovery": ["beta_lower", "beta_upper", "estimate", "half_width", "excursions", "runs", "exits", "shortfall"],
}


def fmt(x):
    """Shortest round-trip decimal for floats, CENSORED for missing statistics."""
    if x is None:
        return CENSORED
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            raise ValueError(f"non-finite report cell {x!r}")
        return repr(x)
    return str(x)


def to_csv(command, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = COLUMNS[command]
    w.writerow(cols)
    for r in rows:
        w.writerow([fmt(r[c]) for c in cols])
    return buf.getvalue()


def _parse_range(text):
    for sep in ("..", ":", "-"):
        if sep in text:
            lo, hi = text.split(sep, 1)
            return list(range(int(lo), int(hi) + 1))
    return [int(text)]


def _certificate(model, file_weight, weight_arg):
    if weight_arg in (None, "file"):
        weight = file_weight if file_weight is not None else "unit"
    elif weight_arg == "unit":
        weight = "unit"
    else:
        weight = np.array([float(t) for t in weight_arg.split(",")])
    return make_weight_certificate(model, weight)


def _cert_doc(cert):
    return {
        "cost_bound": cert.cost_bound,
        "drift_bound": cert.drift_bound,
        "modulus": cert.modulus,
        "weight": cert.weight.tolist(),
    }


def _policy_from(spec, model, cert, tol, max_iter):
    if spec == "optimal":
        return dp.value_iteration(model, tol, max_iter, cert).greedy
    if spec.startswith("rolling:"):
        return pe.rolling_horizon(model, int(spec.split(":", 1)[1]), cert).stationary_selector
    path = spec[5:] if spec.startswith("file:") else spec
    mapping = json.loads(Path(path).read_text())
    return StationaryPolicy.from_labels(model, mapping)


def cmd_validate(args, model, weight):
    return {"violations": []}, []


def cmd_solve(args, model, weight):
    cert = _certificate(model, weight, args.weight)
    res = dp.value_iteration(model, args.tol, args.max_iter, cert)
    labels = res.greedy.labels(model)
    rows = [
        {"state": model.state_names[x], "action": labels[model.state_names[x]], "value": float(v)}
        for x, v in zip(model.nontarget, res.value)
    ]
    return {
        "iterations": res.iterations,
        "sup_gap_bound": res.sup_gap_bound,
        "certificate": _cert_doc(cert),
        "policy": labels,
    }, rows


def cmd_rolling(args, model, weight):
    cert = _certificate(model, weight, args.weight)
    rows, per_n = [], {}
    for N in _parse_range(args.horizon_range):
        rh = pe.rolling_horizon(model, N, cert)
        labels = rh.stationary_selector.labels(model)
        per_n[str(N)] = labels
        for i, x in enumerate(model.nontarget):
            name = model.state_names[x]
            rows.append({
                "horizon": N, "state": name, "action": labels[name],
                "vi_value": float(rh.vi_value[i]), "achieved_value": float(rh.achieved_value[i]),
                "gap": float(rh.gap[i]), "bound": float(rh.bound * rh.weight[i]),
            })
    return {"certificate": _cert_doc(cert), "selectors": per_n}, rows


def cmd_simulate(args, model, weight):
    cert = _certificate(model, weight, args.weight)
    x0 = model.state_index(args.initial_state) if args.initial_state is not None else int(model.nontarget[0])
    config = sim.SimulationConfig(args.runs, args.max_steps, args.seed, x0)
    rows, exact = [], {}
    for spec in args.policy or ["optimal"]:
        f = _policy_from(spec, model, cert, args.tol, args.max_iter)
        s = sim.monte_carlo(model, f, config)
        if not model.is_target(x0):
            exact[spec] = float(pe.evaluate_policy(model, f, certificate=cert).value[model.position[x0]])
        rows.append({
            "policy": spec, "runs": s.runs, "cost_mean": s.cost_mean, "cost_std": s.cost_std,
            "cost_stderr": s.cost_stderr, "time_mean": s.time_mean, "time_std": s.time_std,
            "censored_count": s.censored_count,
        })
    return {"certificate": _cert_doc(cert), "initial_state": model.state_names[x0], "exact_value": exact}, rows


def cmd_recovery(args, model, weight):
    cert = _certificate(model, weight, args.weight)
    res = dp.value_iteration(model, args.tol, args.max_iter, cert)
    bounds = pe.recovery_bounds(model, res.value)
    total = pe.concatenate_recovery(model, res.greedy)
    x0 = model.state_index(args.initial_state) if args.initial_state is not None else int(model.nontarget[0])
    config = sim.SimulationConfig(args.runs, args.max_steps, args.seed, x0)
    est = sim.estimate_recovery_cost(model, total, config, args.excursions)
    row = {
        "beta_lower": bounds.beta_lower, "beta_upper": bounds.beta_upper,
        "estimate": est.estimate, "half_width": est.half_width,
        "excursions": est.excursions, "runs": est.runs, "exits": est.exits, "shortfall": est.shortfall,
    }
    return {"certificate": _cert_doc(cert), "policy": total.labels(model)}, [row]


COMMANDS = {
    "validate": cmd_validate,
    "solve": cmd_solve,
    "rolling": cmd_rolling,
    "simulate": cmd_simulate,
    "recovery": cmd_recovery,
}


def build_parser():
    p = argparse.ArgumentParser(prog="firstpassage", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--model", default=None, help="model file (default: bundled fishery model)")
        s.add_argument("--out", default=None, help="write the result table as CSV")
        if name == "validate":
            continue
        s.add_argument("--tol", type=float, default=1e-9)
        s.add_argument("--max-iter", type=int, default=100_000)
        s.add_argument("--weight", default=None, help="unit, file, or comma-separated values")
        if name == "rolling":
            s.add_argument("--horizon-range", "--horizon", default="1..10")
        if name in ("simulate", "recovery"):
            s.add_argument("--runs", type=int, default=10_000 if name == "simulate" else 200)
            s.add_argument("--seed", type=int, default=0)
            s.add_argument("--max-steps", type=int, default=100_000)
            s.add_argument("--initial-state", default=None, help="state name (default: first non-target)")
        if name == "simulate":
            s.add_argument("--policy", action="append", help="optimal | rolling:N | file:PATH (repeatable)")
        if name == "recovery":
            s.add_argument("--excursions", type=int, default=1000)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.model is None:
        default = "fishery_with_exit.model" if args.command == "recovery" else "fishery.model"
        args.model = str(bundled_path(default))
    t0 = time.perf_counter()
    report = {"command": args.command, "config": {k: v for k, v in vars(args).items()}}
    try:
        try:
            model, weight = load_model_with_weight(args.model)
        except ValidationError as e:
            if args.command == "validate":
                report["violations"] = e.violations
                print(json.dumps(report, indent=2))
                return EXIT_INVALID
            raise
        extra, rows = COMMANDS[args.command](args, model, weight)
    except NotConverged as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except (FirstPassageError, KeyError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    report.update(extra)
    report["results"] = [{k: fmt(v) for k, v in r.items()} for r in rows]
    report["wall_clock_s"] = time.perf_counter() - t0
    if args.out and args.command in COLUMNS:
        try:
            Path(args.out).write_text(to_csv(args.command, rows))
        except OSError as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_IO
    print(json.dumps(report, indent=2))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
