"""Ready-made models: the bundled fishery, small closed-form chains and random instances."""
from __future__ import annotations

from dataclasses import replace

import numpy as np

from .model import MarkovControlModel
from .modelfile import bundled_path, load_model

FISHERY_OPTIMAL = {"1": "import", "2": "import-less", "3": "do-nothing"}


def fishery() -> MarkovControlModel:
    return load_model(bundled_path("fishery.model"))


def fishery_with_exit() -> MarkovControlModel:
    """Fishery plus an in-target row for state 4: [0.1, 0.2, 0.3, 0.4]."""
    return load_model(bundled_path("fishery_with_exit.model"))


def with_in_target(model: MarkovControlModel, rows: dict, label="stay") -> MarkovControlModel:
    return replace(model, in_target={k: (label, np.asarray(r, dtype=float)) for k, r in rows.items()})


def geometric(stay: float, cost: float = 1.0, discount: float = 0.9) -> MarkovControlModel:
    """State 0 stays put with probability ``stay`` and otherwise enters target state 1."""
    return MarkovControlModel.from_tables(
        2, {1}, {0: ["go"]}, {0: [[stay, 1.0 - stay]]}, {0: [cost]}, discount
    )


def random_model(
    rng: np.random.Generator,
    n_nontarget: int = 4,
    n_actions=(2, 3),
    n_target: int = 1,
    discount: float = 0.9,
    exit_mass=(0.05, 0.95),
    cost_range=(0.0, 10.0),
    in_target: bool = False,
) -> MarkovControlModel:
    """Random model whose every row sends a mass drawn from ``exit_mass`` into the target set."""
    n = n_nontarget + n_target
    target = set(range(n_nontarget, n))
    actions, trans, costs = {}, {}, {}
    for x in range(n_nontarget):
        k = int(rng.integers(n_actions[0], n_actions[1] + 1))
        rows = np.zeros((k, n))
        for j in range(k):
            exit_p = rng.uniform(*exit_mass)
            rows[j, :n_nontarget] = rng.dirichlet(np.ones(n_nontarget)) * (1.0 - exit_p)
            rows[j, n_nontarget:] = rng.dirichlet(np.ones(n_target)) * exit_p
            rows[j, -1] = 1.0 - rows[j, :-1].sum()
        actions[x] = [f"a{j}" for j in range(k)]
        trans[x] = rows
        costs[x] = rng.uniform(*cost_range, size=k)
    kw = {}
    if in_target:
        kw["in_target"] = {}
        for t in target:
            row = rng.dirichlet(np.ones(n))
            row[-1] = 1.0 - row[:-1].sum()
            kw["in_target"][t] = ("g", row)
    return MarkovControlModel.from_tables(n, target, actions, trans, costs, discount, **kw)
