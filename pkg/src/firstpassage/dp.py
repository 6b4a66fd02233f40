"""Restricted Bellman operator, value iteration with certified bounds, and a brute-force oracle."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import BoundViolation, NotConverged, TooLarge
from .model import (
    HorizonPolicy,
    MarkovControlModel,
    StationaryPolicy,
    WeightCertificate,
    as_value,
    make_weight_certificate,
)

DISCREPANCY_CLAMP = 1e-9


def q_values(model: MarkovControlModel, u) -> np.ndarray:
    """c(x, a) + alpha * sum_{y not in K} Q(y|x, a) u(y), shape (m, max_actions)."""
    return model.cost_table + model.discount * (model.restricted_rows @ u)


def bellman_apply(model: MarkovControlModel, u) -> tuple[np.ndarray, StationaryPolicy]:
    """One application of the dynamic programming operator T and its argmin selector.

    Ties go to the lowest action index (``np.argmin`` returns the first minimiser).
    """
    u = as_value(u)
    q = q_values(model, u)
    choice = np.argmin(q, axis=1)
    return q[np.arange(len(choice)), choice], StationaryPolicy(tuple(choice))


def vi_iterates(model: MarkovControlModel, n: int):
    """Yield ``(k, v_k, f_k)`` for k = 1..n, where ``v_k = T v_{k-1} = T_{f_k} v_{k-1}`` and v_0 = 0."""
    v = np.zeros(model.n_nontarget)
    for k in range(1, n + 1):
        v, f = bellman_apply(model, v)
        yield k, v, f


@dataclass
class ValueIterationResult:
    value: np.ndarray
    iterations: int
    sup_gap_bound: float
    greedy: StationaryPolicy
    certificate: WeightCertificate
    history: list = field(default_factory=list)


def value_iteration(
    model: MarkovControlModel,
    tolerance: float = 1e-9,
    max_iter: int = 100_000,
    certificate: WeightCertificate | None = None,
) -> ValueIterationResult:
    """Iterate v_n = T v_{n-1} from v_0 = 0 until c_bar * gamma**n / (1 - gamma) <= tolerance.

    The stopping rule is the a-priori certificate; ``history`` keeps the weighted
    successive differences for diagnostics only. ``greedy`` is the selector that
    realised the last Bellman minimisation (the myopic selector when no step ran).
    Raises NotConverged, carrying the result, if ``max_iter`` runs out first.
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    cert = certificate or make_weight_certificate(model)
    v = np.zeros(model.n_nontarget)
    greedy = None
    history = []
    n = 0
    while cert.gap_bound(n) > tolerance and n < max_iter:
        v_new, greedy = bellman_apply(model, v)
        # v_n increases to V*; a drop beyond rounding means a broken operator
        if np.any(v_new < v - 1e-12 * (1.0 + np.abs(v))):
            raise BoundViolation(f"value iteration not monotone at step {n + 1}")
        history.append(cert.norm(v_new - v))
        v = v_new
        n += 1
    if greedy is None:
        _, greedy = bellman_apply(model, v)
    result = ValueIterationResult(v, n, cert.gap_bound(n), greedy, cert, history)
    if result.sup_gap_bound > tolerance:
        raise NotConverged(
            f"certified gap {result.sup_gap_bound:.3g} > tolerance {tolerance:g} after {n} iterations",
            result,
        )
    return result


def iterations_needed(cert: WeightCertificate, tolerance: float) -> int:
    """Smallest n with c_bar * gamma**n / (1 - gamma) <= tolerance."""
    n = int(np.ceil(np.log(tolerance * (1 - cert.modulus) / cert.cost_bound) / np.log(cert.modulus)))
    n = max(n, 0)
    # guard the closed form against rounding at the boundary
    while n > 0 and cert.gap_bound(n - 1) <= tolerance:
        n -= 1
    while cert.gap_bound(n) > tolerance:
        n += 1
    return n


def discrepancy(model: MarkovControlModel, v_star, x: int, a) -> float:
    """D(x, a) = c(x, a) + alpha * sum_{y not in K} Q(y|x, a) V*(y) - V*(x), clamped at 0 near 0."""
    i = model.position[x]
    if i < 0:
        raise ValueError(f"state {model.state_names[x]} is in the target set")
    j = model.action_index(x, a)
    v_star = np.asarray(v_star, dtype=float)
    d = model.cost_table[i, j] + model.discount * model.restricted_rows[i, j] @ v_star - v_star[i]
    if abs(d) <= DISCREPANCY_CLAMP:
        d = max(d, 0.0)
    return float(d)


def vi_policy_sequence(model: MarkovControlModel, n: int) -> HorizonPolicy:
    """Greedy selectors of n value-iteration steps, newest first: (f_n, ..., f_1, f_0).

    f_k realises v_k = T v_{k-1}; f_0 is fixed to the lowest-indexed action.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    sels = [StationaryPolicy((0,) * model.n_nontarget)]
    for _, _, f in vi_iterates(model, n):
        sels.append(f)
    return HorizonPolicy(tuple(reversed(sels)))


def evaluate_exact(model: MarkovControlModel, policy: StationaryPolicy) -> np.ndarray:
    """Solve (I - alpha Q_f) V = c_f on the non-target states."""
    Q, c = model.policy_system(policy)
    m = model.n_nontarget
    return np.linalg.solve(np.eye(m) - model.discount * Q, c)


def brute_force_optimal(model: MarkovControlModel, cap: int = 10**6, batch: int = 4096):
    """Enumerate every deterministic stationary selector and solve each one exactly.

    Returns the pointwise minimal value and a selector attaining it at every
    state simultaneously. Independent of value iteration.
    """
    m = model.n_nontarget
    sizes = [int(k) for k in model.n_actions]
    total = int(np.prod(sizes, dtype=object))
    if total > cap:
        raise TooLarge(f"{total} stationary policies exceed the cap of {cap}")
    alpha = model.discount
    R, C = model.restricted_rows, model.cost_table
    eye = np.eye(m)
    rows = np.arange(m)
    best_v = np.full(m, np.inf)
    values, choices = [], []
    it = itertools.product(*(range(k) for k in sizes))
    while True:
        chunk = list(itertools.islice(it, batch))
        if not chunk:
            break
        ch = np.array(chunk, dtype=int).reshape(len(chunk), m)
        Q = R[rows, ch]  # (b, m, m)
        c = C[rows, ch]  # (b, m)
        V = np.linalg.solve(eye - alpha * Q, c[..., None])[..., 0]
        values.append(V)
        choices.append(ch)
        best_v = np.minimum(best_v, V.min(axis=0))
    values = np.concatenate(values)
    choices = np.concatenate(choices)
    scale = 1e-10 * (1.0 + np.abs(best_v))
    attains = np.all(values <= best_v + scale, axis=1)
    if not attains.any():
        raise BoundViolation("no single stationary policy attains the pointwise minimum")
    k = int(np.argmax(attains))
    return best_v, StationaryPolicy(tuple(choices[k]))


def dssp_vector(model: MarkovControlModel, policy: StationaryPolicy) -> np.ndarray:
    """(1 - E[alpha**tau]) / (1 - alpha) at every non-target state: the unit-cost evaluation."""
    return evaluate_exact(model.with_unit_cost(), policy)


def dssp_value(model: MarkovControlModel, policy: StationaryPolicy, x: int) -> float:
    i = model.position[x]
    if i < 0:
        raise ValueError(f"state {model.state_names[x]} is in the target set")
    return float(dssp_vector(model, policy)[i])
