"""Finite Markov control models stopped at the first hitting time of a target set.

States are dense indices ``0..state_count-1``. Value functions and stationary
selectors are indexed by *position* among the non-target states
(``model.nontarget[i]`` is the state at position ``i``); the value on the target
set is identically zero and never stored.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .errors import CertificateInfeasible, InfeasibleAction

ROW_TOL = 1e-12


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MarkovControlModel:
    """Finite hitting-time control model.

    ``actions[x]``, ``transition[x]`` and ``stage_cost[x]`` are given for every
    state ``x``; for target states they are empty. ``transition[x]`` has shape
    ``(len(actions[x]), state_count)`` and covers *all* states, target included.
    ``in_target`` optionally maps each target state to ``(action_label, row)``,
    the fixed in-target policy used for recovery-cost analysis.
    """

    state_count: int
    target_set: frozenset
    actions: tuple
    transition: tuple
    stage_cost: tuple
    discount: float
    in_target: Mapping[int, tuple] | None = None
    state_names: tuple = ()

    def __post_init__(self):
        n = int(self.state_count)
        object.__setattr__(self, "state_count", n)
        object.__setattr__(self, "target_set", frozenset(int(k) for k in self.target_set))
        object.__setattr__(self, "actions", tuple(tuple(str(a) for a in acts) for acts in self.actions))
        object.__setattr__(
            self, "transition",
            tuple(_frozen(np.reshape(t, (-1, n)) if np.size(t) else np.zeros((0, n))) for t in self.transition),
        )
        object.__setattr__(self, "stage_cost", tuple(_frozen(np.ravel(c)) for c in self.stage_cost))
        object.__setattr__(self, "discount", float(self.discount))
        if self.in_target is not None:
            object.__setattr__(
                self, "in_target",
                {int(k): (str(lbl), _frozen(row)) for k, (lbl, row) in self.in_target.items()},
            )
        if not self.state_names:
            object.__setattr__(self, "state_names", tuple(str(i) for i in range(n)))
        else:
            object.__setattr__(self, "state_names", tuple(str(s) for s in self.state_names))

    @classmethod
    def from_tables(cls, state_count, target_set, actions, transition, stage_cost, discount, **kw):
        """Build from dicts keyed by non-target state; target entries are filled with empties."""
        n = state_count
        acts, trans, costs = [], [], []
        for x in range(n):
            if x in target_set:
                acts.append(())
                trans.append(np.zeros((0, n)))
                costs.append(np.zeros(0))
            else:
                acts.append(tuple(actions[x]))
                trans.append(np.asarray(transition[x], dtype=float))
                costs.append(np.asarray(stage_cost[x], dtype=float))
        return cls(n, frozenset(target_set), tuple(acts), tuple(trans), tuple(costs), discount, **kw)

    def __eq__(self, other):
        if not isinstance(other, MarkovControlModel):
            return NotImplemented
        if (self.state_count, self.target_set, self.actions, self.discount, self.state_names) != (
            other.state_count, other.target_set, other.actions, other.discount, other.state_names
        ):
            return False
        if not all(np.array_equal(a, b) for a, b in zip(self.transition, other.transition)):
            return False
        if not all(np.array_equal(a, b) for a, b in zip(self.stage_cost, other.stage_cost)):
            return False
        if (self.in_target is None) != (other.in_target is None):
            return False
        if self.in_target is not None:
            if self.in_target.keys() != other.in_target.keys():
                return False
            for k, (lbl, row) in self.in_target.items():
                olbl, orow = other.in_target[k]
                if lbl != olbl or not np.array_equal(row, orow):
                    return False
        return True

    __hash__ = None

    # -- indexing ----------------------------------------------------------

    @cached_property
    def nontarget(self) -> np.ndarray:
        return _frozen([x for x in range(self.state_count) if x not in self.target_set], dtype=int)

    @cached_property
    def position(self) -> np.ndarray:
        """Full state index -> position among non-target states, -1 on the target set."""
        pos = np.full(self.state_count, -1, dtype=int)
        pos[self.nontarget] = np.arange(len(self.nontarget))
        pos.setflags(write=False)
        return pos

    @property
    def n_nontarget(self) -> int:
        return len(self.nontarget)

    def is_target(self, x) -> bool:
        return int(x) in self.target_set

    def state_index(self, name) -> int:
        """Resolve a state name (or an int index) to its index."""
        if isinstance(name, (int, np.integer)):
            return int(name)
        try:
            return self.state_names.index(str(name))
        except ValueError:
            raise KeyError(f"unknown state {name!r}") from None

    def action_index(self, x: int, a) -> int:
        acts = self.actions[x]
        if isinstance(a, (int, np.integer)):
            if 0 <= a < len(acts):
                return int(a)
        elif str(a) in acts:
            return acts.index(str(a))
        raise InfeasibleAction(f"action {a!r} is not feasible in state {self.state_names[x]}")

    # -- padded tables used by the operators ----------------------------------

    @cached_property
    def n_actions(self) -> np.ndarray:
        return _frozen([len(self.actions[x]) for x in self.nontarget], dtype=int)

    @cached_property
    def max_actions(self) -> int:
        return int(self.n_actions.max()) if len(self.n_actions) else 0

    @cached_property
    def full_rows(self) -> np.ndarray:
        """Transition rows over all states, shape (m, max_actions, state_count); padding is 0."""
        m, k = self.n_nontarget, self.max_actions
        P = np.zeros((m, k, self.state_count))
        for i, x in enumerate(self.nontarget):
            P[i, : self.n_actions[i]] = self.transition[x]
        P.setflags(write=False)
        return P

    @cached_property
    def restricted_rows(self) -> np.ndarray:
        """Sub-stochastic rows restricted to non-target columns, shape (m, max_actions, m)."""
        R = np.ascontiguousarray(self.full_rows[:, :, self.nontarget])
        R.setflags(write=False)
        return R

    @cached_property
    def cost_table(self) -> np.ndarray:
        """Stage costs, shape (m, max_actions); infeasible slots hold +inf."""
        m, k = self.n_nontarget, self.max_actions
        C = np.full((m, k), np.inf)
        for i, x in enumerate(self.nontarget):
            C[i, : self.n_actions[i]] = self.stage_cost[x]
        C.setflags(write=False)
        return C

    def policy_system(self, policy: StationaryPolicy):
        """Restricted transition matrix and cost vector of a stationary selector."""
        idx = np.arange(self.n_nontarget)
        choice = np.asarray(policy.choice, dtype=int)
        return self.restricted_rows[idx, choice], self.cost_table[idx, choice]

    def with_unit_cost(self) -> MarkovControlModel:
        """Same dynamics with indicator cost c = 1 on every non-target state-action pair."""
        costs = tuple(np.ones(len(a)) for a in self.actions)
        return replace(self, stage_cost=costs)

    def expand(self, v) -> np.ndarray:
        """Value over non-target positions -> value over all states (0 on the target set)."""
        full = np.zeros(self.state_count)
        full[self.nontarget] = v
        return full


@dataclass(frozen=True)
class StationaryPolicy:
    """A selector: ``choice[i]`` is an action index for the non-target state at position ``i``."""

    choice: tuple

    def __post_init__(self):
        object.__setattr__(self, "choice", tuple(int(a) for a in self.choice))

    def action_of(self, model: MarkovControlModel, x: int) -> int:
        return self.choice[model.position[x]]

    def labels(self, model: MarkovControlModel) -> dict:
        return {
            model.state_names[x]: model.actions[x][a] for x, a in zip(model.nontarget, self.choice)
        }

    @classmethod
    def from_labels(cls, model: MarkovControlModel, mapping: Mapping) -> StationaryPolicy:
        choice = []
        for x in model.nontarget:
            name = model.state_names[x]
            if name not in mapping:
                raise InfeasibleAction(f"no action given for state {name}")
            choice.append(model.action_index(x, mapping[name]))
        return cls(tuple(choice))

    def check(self, model: MarkovControlModel):
        if len(self.choice) != model.n_nontarget:
            raise InfeasibleAction("selector length does not match non-target state count")
        for i, a in enumerate(self.choice):
            if not 0 <= a < model.n_actions[i]:
                raise InfeasibleAction(
                    f"action index {a} infeasible in state {model.state_names[model.nontarget[i]]}"
                )


@dataclass(frozen=True)
class HorizonPolicy:
    """Selectors ordered newest first: ``(f_n, ..., f_1, f_0)``."""

    selectors: tuple

    def __len__(self):
        return len(self.selectors)

    def __getitem__(self, k):
        return self.selectors[k]


@dataclass(frozen=True, eq=False)
class WeightCertificate:
    """Constants making the restricted Bellman operator a w-weighted contraction.

    ``cost_bound`` bounds c(x, a) / w(x), ``drift_bound`` bounds the restricted
    expected weight ratio; ``modulus = discount * drift_bound < 1``.
    """

    weight: np.ndarray
    cost_bound: float
    drift_bound: float
    discount: float
    modulus: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "weight", _frozen(self.weight))
        object.__setattr__(self, "modulus", self.discount * self.drift_bound)

    def norm(self, u) -> float:
        """Weighted sup norm max |u| / w."""
        u = np.asarray(u, dtype=float)
        return float(np.max(np.abs(u) / self.weight)) if u.size else 0.0

    def gap_bound(self, n: int) -> float:
        """c_bar * gamma**n / (1 - gamma)."""
        return self.cost_bound * self.modulus**n / (1.0 - self.modulus)

    def violations(self, model: MarkovControlModel, tol=ROW_TOL) -> list:
        out = []
        if self.modulus >= 1:
            out.append(f"modulus {self.modulus} >= 1")
        if np.any(self.weight < 1):
            out.append("weight has entries below 1")
        w = self.weight
        C = model.cost_table
        feasible = np.isfinite(C)
        lhs_c = np.where(feasible, C, -np.inf).max(axis=1)
        for i in np.nonzero(lhs_c > self.cost_bound * w + tol)[0]:
            out.append(f"cost bound fails at state {model.state_names[model.nontarget[i]]}")
        drift = np.where(feasible, model.restricted_rows @ w, -np.inf).max(axis=1)
        for i in np.nonzero(drift > self.drift_bound * w + tol)[0]:
            out.append(f"drift bound fails at state {model.state_names[model.nontarget[i]]}")
        return out


def validate_model(model: MarkovControlModel) -> list:
    """Return a list of human-readable invariant violations; empty iff the model is well-formed."""
    out = []
    n = model.state_count
    names = model.state_names
    if n < 1:
        return ["state_count must be positive"]
    if len(names) != n or len(set(names)) != n:
        out.append("state names must be unique and one per state")
    bad = [k for k in model.target_set if not 0 <= k < n]
    if bad:
        out.append(f"target set references unknown states {sorted(bad)}")
    if not model.target_set:
        out.append("target set must be nonempty")
    if len(model.target_set) >= n:
        out.append("target set must be strict subset of states")
    if not 0.0 < model.discount < 1.0:
        out.append(f"discount {model.discount} must lie in (0, 1)")
    for table, what in ((model.actions, "actions"), (model.transition, "transition"), (model.stage_cost, "stage_cost")):
        if len(table) != n:
            out.append(f"{what} must have one entry per state")
            return out
    for x in range(n):
        if x in model.target_set:
            continue
        acts, T, c = model.actions[x], model.transition[x], model.stage_cost[x]
        if not acts:
            out.append(f"state {names[x]} has no feasible action")
            continue
        if len(set(acts)) != len(acts):
            out.append(f"state {names[x]} has duplicate action labels")
        if T.shape != (len(acts), n):
            out.append(f"state {names[x]}: transition table has shape {T.shape}, expected {(len(acts), n)}")
            continue
        if c.shape != (len(acts),):
            out.append(f"state {names[x]}: stage cost has shape {c.shape}, expected {(len(acts),)}")
            continue
        for j, a in enumerate(acts):
            out.extend(_row_violations(T[j], f"row ({names[x]}, {a})"))
            if not np.isfinite(c[j]):
                out.append(f"cost ({names[x]}, {a}) is not finite")
            elif c[j] < 0:
                out.append(f"cost ({names[x]}, {a}) = {c[j]} is negative")
    if model.in_target is not None:
        for k in model.target_set:
            if k not in model.in_target:
                out.append(f"in-target dynamics missing for target state {names[k]}")
        for k, (lbl, row) in model.in_target.items():
            if k not in model.target_set:
                out.append(f"in-target dynamics given for non-target state {names[k] if 0 <= k < n else k}")
            elif row.shape != (n,):
                out.append(f"in-target row ({names[k]}, {lbl}) has wrong length")
            else:
                out.extend(_row_violations(row, f"in-target row ({names[k]}, {lbl})"))
    return out


def _row_violations(row, where):
    out = []
    if not np.all(np.isfinite(row)):
        return [f"{where} has non-finite entries"]
    if np.any(row < 0):
        out.append(f"{where} has negative entries")
    s = row.sum()
    if abs(s - 1.0) > ROW_TOL:
        out.append(f"{where} sums to {s!r}, not 1")
    return out


def make_weight_certificate(model: MarkovControlModel, weight="unit") -> WeightCertificate:
    """Tightest cost and drift constants for ``weight`` (a vector over non-target positions, or "unit")."""
    m = model.n_nontarget
    if isinstance(weight, str):
        if weight != "unit":
            raise ValueError(f"unknown weight spec {weight!r}")
        w = np.ones(m)
    else:
        w = np.asarray(weight, dtype=float)
        if w.shape != (m,):
            raise ValueError(f"weight must have length {m}")
        if np.any(w < 1):
            raise ValueError("weight entries must be >= 1")
    C = model.cost_table
    feasible = np.isfinite(C)
    c_bar = float(np.max(np.where(feasible, C, 0.0) / w[:, None]))
    if c_bar <= 0:
        # all-zero costs: any positive constant certifies the cost growth bound
        c_bar = 1.0
    drift = np.where(feasible, model.restricted_rows @ w, 0.0) / w[:, None]
    beta = max(1.0, float(drift.max()))
    cert = WeightCertificate(w, c_bar, beta, model.discount)
    if cert.modulus >= 1:
        raise CertificateInfeasible(
            f"discount * drift bound = {cert.modulus:.6g} >= 1 for the given weight"
        )
    return cert


def as_value(v: Sequence[float]) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)) or np.any(v < 0):
        raise ValueError("value functions must be finite and nonnegative")
    return v
