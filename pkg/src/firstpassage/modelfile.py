"""JSON model files with named states.

Schema (``schema_version`` 1)::

    {
      "schema_version": 1,
      "states": ["1", "2", "3", "4"],          # ordered, unique names
      "target": ["4"],
      "discount": 0.9,
      "base_cost": {"1": 300, ...},           # optional, C(x)
      "actions": {
        "1": [
          {"name": "harvest", "action_cost": -20, "transition": {"1": 1.0}},
          {"name": "import", "cost": 450, "transition": {"1": 0.4, "2": 0.6}}
        ], ...
      },
      "in_target_dynamics": {"4": {"action": "maintain", "transition": {...}}},  # optional
      "weight": {"1": 1.0, ...}                # optional, non-target states only
    }

Each action gives either a total ``cost`` or an ``action_cost`` added to the
state's ``base_cost``. Transition rows are keyed by state name; omitted states
have probability 0. Rows within 1e-12 of summing to one are renormalised by
adjusting their largest entry.
"""
from __future__ import annotations

import json
import math
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError
from .model import ROW_TOL, MarkovControlModel, validate_model

SCHEMA_VERSION = 1


def bundled_path(name: str = "fishery.model") -> Path:
    return Path(str(resources.files("firstpassage") / "data" / name))


def _row(spec, index, where):
    if not isinstance(spec, dict):
        raise ParseError(f"{where}: transition must be an object keyed by state name")
    row = np.zeros(len(index))
    for name, p in spec.items():
        if name not in index:
            raise ParseError(f"{where}: unknown state {name!r} in transition row")
        if not isinstance(p, (int, float)) or isinstance(p, bool):
            raise ParseError(f"{where}: probability for {name!r} is not a number")
        row[index[name]] = float(p)
    if np.all(row >= 0) and abs(math.fsum(row) - 1.0) <= ROW_TOL:
        # absorb rounding into the largest entry; idempotent, so save/load round-trips exactly
        k = int(np.argmax(row))
        row[k] = 1.0 - math.fsum(np.delete(row, k))
    return row


def parse_model(doc: dict) -> tuple[MarkovControlModel, np.ndarray | None]:
    """Build a model (and optional weight vector over non-target positions) from a parsed document."""
    try:
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise ParseError(f"unsupported schema_version {doc.get('schema_version')!r}")
        states = [str(s) for s in doc["states"]]
        if len(set(states)) != len(states):
            raise ParseError("state names must be unique")
        index = {s: i for i, s in enumerate(states)}
        target = set()
        for name in doc["target"]:
            if name not in index:
                raise ParseError(f"unknown target state {name!r}")
            target.add(index[name])
        discount = doc["discount"]
        base = doc.get("base_cost", {})
        for name in base:
            if name not in index:
                raise ParseError(f"unknown state {name!r} in base_cost")
        acts_doc = doc.get("actions", {})
        for name in acts_doc:
            if name not in index:
                raise ParseError(f"unknown state {name!r} in actions")
            if index[name] in target:
                raise ParseError(f"target state {name!r} must not list out-of-target actions")
        n = len(states)
        actions, transition, stage_cost = {}, {}, {}
        for x, name in enumerate(states):
            if x in target:
                continue
            labels, rows, costs = [], [], []
            for entry in acts_doc.get(name, []):
                where = f"state {name!r}, action {entry.get('name')!r}"
                labels.append(str(entry["name"]))
                rows.append(_row(entry["transition"], index, where))
                if "cost" in entry:
                    costs.append(float(entry["cost"]))
                elif "action_cost" in entry:
                    if name not in base:
                        raise ParseError(f"{where}: action_cost given but state has no base_cost")
                    costs.append(float(base[name]) + float(entry["action_cost"]))
                else:
                    raise ParseError(f"{where}: needs 'cost' or 'action_cost'")
            actions[x] = labels
            transition[x] = np.array(rows).reshape(len(rows), n)
            stage_cost[x] = np.array(costs)
        in_target = None
        if "in_target_dynamics" in doc:
            in_target = {}
            for name, entry in doc["in_target_dynamics"].items():
                if name not in index:
                    raise ParseError(f"unknown state {name!r} in in_target_dynamics")
                in_target[index[name]] = (
                    str(entry["action"]),
                    _row(entry["transition"], index, f"in-target state {name!r}"),
                )
        weight = None
        if "weight" in doc:
            wdoc = doc["weight"]
            for name in wdoc:
                if name not in index or index[name] in target:
                    raise ParseError(f"weight given for unknown or target state {name!r}")
            weight = np.array([float(wdoc[s]) for i, s in enumerate(states) if i not in target])
    except KeyError as e:
        raise ParseError(f"missing field {e.args[0]!r}") from None
    except (TypeError, ValueError) as e:
        raise ParseError(str(e)) from None
    model = MarkovControlModel.from_tables(
        n, target, actions, transition, stage_cost, discount,
        in_target=in_target, state_names=tuple(states),
    )
    return model, weight


def load_model_with_weight(path) -> tuple[MarkovControlModel, np.ndarray | None]:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: {e}") from None
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: top level must be an object")
    model, weight = parse_model(doc)
    violations = validate_model(model)
    if violations:
        raise ValidationError(violations)
    return model, weight


def load_model(path) -> MarkovControlModel:
    return load_model_with_weight(path)[0]


def model_to_doc(model: MarkovControlModel, weight=None) -> dict:
    names = model.state_names

    def row_doc(row):
        return {names[y]: float(p) for y, p in enumerate(row) if p != 0}

    doc = {
        "schema_version": SCHEMA_VERSION,
        "states": list(names),
        "target": [names[k] for k in sorted(model.target_set)],
        "discount": model.discount,
        "actions": {
            names[x]: [
                {"name": a, "cost": float(model.stage_cost[x][j]), "transition": row_doc(model.transition[x][j])}
                for j, a in enumerate(model.actions[x])
            ]
            for x in model.nontarget
        },
    }
    if model.in_target is not None:
        doc["in_target_dynamics"] = {
            names[k]: {"action": lbl, "transition": row_doc(row)}
            for k, (lbl, row) in sorted(model.in_target.items())
        }
    if weight is not None:
        doc["weight"] = {names[x]: float(w) for x, w in zip(model.nontarget, weight)}
    return doc


def save_model(model: MarkovControlModel, path, weight=None):
    Path(path).write_text(json.dumps(model_to_doc(model, weight), indent=2) + "\n")
