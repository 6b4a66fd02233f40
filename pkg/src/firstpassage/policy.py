"""Policy evaluation, rolling-horizon synthesis and recovery-cost bounds."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dp import bellman_apply, evaluate_exact
from .errors import BoundViolation, MissingTargetDynamics, SolveFailed
from .model import MarkovControlModel, StationaryPolicy, WeightCertificate, make_weight_certificate

EXACT_LIMIT = 2000


@dataclass
class PolicyEvaluation:
    value: np.ndarray
    method: str
    residual: float


def policy_residual(model, policy, value, weight=None) -> float:
    """Weighted sup norm of c_f + alpha Q_f V - V."""
    Q, c = model.policy_system(policy)
    r = c + model.discount * Q @ value - value
    w = np.ones_like(r) if weight is None else weight
    return float(np.max(np.abs(r) / w)) if r.size else 0.0


def evaluate_policy(
    model: MarkovControlModel,
    policy: StationaryPolicy,
    method: str = "auto",
    tolerance: float = 1e-9,
    certificate: WeightCertificate | None = None,
) -> PolicyEvaluation:
    """Value of the stationary policy f^inf on the non-target states.

    ``exact`` solves (I - alpha Q_f) V = c_f densely; ``iterative`` runs
    V <- c_f + alpha Q_f V from 0 until c_bar gamma**k / (1 - gamma) <= tolerance.
    ``auto`` picks exact up to 2000 non-target states.
    """
    policy.check(model)
    if method == "auto":
        method = "exact" if model.n_nontarget <= EXACT_LIMIT else "iterative"
    cert = certificate or make_weight_certificate(model)
    if method == "exact":
        try:
            v = evaluate_exact(model, policy)
        except np.linalg.LinAlgError as e:
            raise SolveFailed(str(e)) from e
        if not np.all(np.isfinite(v)):
            raise SolveFailed("non-finite solution of the policy equation")
    elif method == "iterative":
        Q, c = model.policy_system(policy)
        v = np.zeros(model.n_nontarget)
        k = 0
        while cert.gap_bound(k) > tolerance:
            v = c + model.discount * Q @ v
            k += 1
    else:
        raise ValueError(f"unknown evaluation method {method!r}")
    # rounding can push an exact solve a hair below zero
    v = np.maximum(v, 0.0)
    return PolicyEvaluation(v, method, policy_residual(model, policy, v, cert.weight))


@dataclass
class RollingHorizonCertificate:
    horizon: int
    stationary_selector: StationaryPolicy
    vi_value: np.ndarray
    achieved_value: np.ndarray
    bound: float
    weight: np.ndarray

    @property
    def gap(self) -> np.ndarray:
        return self.achieved_value - self.vi_value


def rolling_horizon(
    model: MarkovControlModel, N: int, certificate: WeightCertificate | None = None
) -> RollingHorizonCertificate:
    """Stationary policy replaying the first selector of an (N+1)-stage solve.

    The selector is the argmin of the final Bellman step v_{N+1} = T v_N, and
    0 <= V(f_N^inf) - v_{N+1} <= c_bar w gamma**(N+1) / (1 - gamma) is checked
    before returning.
    """
    if N < 0:
        raise ValueError("horizon must be >= 0")
    cert = certificate or make_weight_certificate(model)
    v = np.zeros(model.n_nontarget)
    for _ in range(N + 1):
        v, f = bellman_apply(model, v)
    achieved = evaluate_policy(model, f, method="exact", certificate=cert).value
    bound = cert.gap_bound(N + 1)
    gap = achieved - v
    slack = 1e-9 * (1.0 + np.abs(achieved))
    if np.any(gap < -slack) or np.any(gap > bound * cert.weight + slack):
        raise BoundViolation(f"rolling-horizon sandwich fails at N={N}")
    return RollingHorizonCertificate(N, f, v, achieved, bound, cert.weight)


@dataclass(frozen=True)
class TotalPolicy:
    """Action index for every state: the recovery selector off K, the in-target action on K."""

    choice: tuple
    on_target: frozenset

    def action_of(self, model, x: int) -> int:
        return self.choice[x]

    def labels(self, model) -> dict:
        out = {}
        for x, a in enumerate(self.choice):
            name = model.state_names[x]
            out[name] = model.in_target[x][0] if x in self.on_target else model.actions[x][a]
        return out


def concatenate_recovery(model: MarkovControlModel, recovery: StationaryPolicy) -> TotalPolicy:
    if model.in_target is None:
        raise MissingTargetDynamics("model has no in-target dynamics")
    recovery.check(model)
    choice = [0] * model.state_count
    for i, x in enumerate(model.nontarget):
        choice[x] = recovery.choice[i]
    return TotalPolicy(tuple(choice), frozenset(model.target_set))


@dataclass(frozen=True)
class RecoveryBounds:
    beta_lower: float
    beta_upper: float


def recovery_bounds(model: MarkovControlModel, v_star) -> RecoveryBounds:
    """min / max over target states x of sum_{y not in K} Q(y|x, g) V*(y)."""
    if model.in_target is None:
        raise MissingTargetDynamics("model has no in-target dynamics")
    v_star = np.asarray(v_star, dtype=float)
    vals = [float(model.in_target[k][1][model.nontarget] @ v_star) for k in sorted(model.target_set)]
    return RecoveryBounds(min(vals), max(vals))
