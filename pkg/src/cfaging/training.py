"""Pilot assignment, de-spread uplink observations, and linear MMSE estimation.

Pilot sequences are orthonormal and never materialized: under exact
orthogonality the de-spread observation of user k collapses to the sum of
the channels of all users sharing k's pilot plus unit-norm-combined noise,
which is all the estimator ever consumes. Users sharing a pilot therefore
share one observation, including its noise realization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .aging import complex_normal
from .errors import InvalidParameterError


@dataclass(frozen=True)
class PilotPlan:
    """Which orthonormal pilot each user transmits."""

    assignment: np.ndarray  # (K,) pilot index in [0, num_pilots)
    num_pilots: int

    def __post_init__(self):
        assignment = np.asarray(self.assignment, dtype=int)
        object.__setattr__(self, "assignment", assignment)
        if assignment.ndim != 1:
            raise InvalidParameterError("assignment must be one pilot index per user")
        if np.any(assignment < 0) or np.any(assignment >= self.num_pilots):
            raise InvalidParameterError("pilot indices out of range")

    @property
    def num_users(self) -> int:
        return self.assignment.shape[0]

    def coset(self, user: int) -> np.ndarray:
        """Indices of all users sharing this user's pilot (including itself)."""
        return np.flatnonzero(self.assignment == self.assignment[user])

    def membership(self) -> np.ndarray:
        """(K, num_pilots) 0/1 matrix mapping users to their pilot."""
        member = np.zeros((self.num_users, self.num_pilots))
        member[np.arange(self.num_users), self.assignment] = 1.0
        return member


def assign_pilots(
    num_users: int,
    num_pilots: int,
    policy: str = "round_robin",
    rng: np.random.Generator | None = None,
) -> PilotPlan:
    """Give every user one pilot index.

    round_robin assigns user k pilot k mod num_pilots; random draws
    uniformly and needs an rng.
    """
    if num_pilots < 1:
        raise InvalidParameterError("num_pilots must be >= 1")
    if num_users < 1:
        raise InvalidParameterError("num_users must be >= 1")
    if policy == "round_robin":
        assignment = np.arange(num_users) % num_pilots
    elif policy == "random":
        if rng is None:
            raise InvalidParameterError("random pilot policy needs an rng")
        assignment = rng.integers(0, num_pilots, size=num_users)
    else:
        raise InvalidParameterError(f"unknown pilot policy {policy!r}")
    return PilotPlan(assignment=assignment, num_pilots=num_pilots)


def pilot_observe(
    g_pilot: np.ndarray,
    plan: PilotPlan,
    tx_power_ue: float,
    noise_var: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """De-spread pilot observation per (AP, user), shape like g_pilot.

    g_pilot holds the composite channels at sounding time, shape
    (..., M, K). Users in the same coset receive identical observations.
    """
    if tx_power_ue <= 0:
        raise InvalidParameterError("tx_power_ue must be positive")
    if noise_var < 0:
        raise InvalidParameterError("noise_var must be non-negative")
    g_pilot = np.asarray(g_pilot)
    member = plan.membership()
    coset_sum = g_pilot @ member  # (..., M, num_pilots)
    noise_shape = g_pilot.shape[:-1] + (plan.num_pilots,)
    noise = complex_normal(rng, noise_shape) * np.sqrt(noise_var)
    per_pilot = np.sqrt(tx_power_ue) * coset_sum + noise
    return per_pilot[..., plan.assignment]


@dataclass(frozen=True)
class EstimationResult:
    """Channel estimates with their variance split."""

    g_hat: np.ndarray  # (..., M, K)
    alpha: np.ndarray  # (M, K) estimate variances
    g_tilde_variance: np.ndarray  # (M, K) error variances beta - alpha


def mmse_variances(
    beta: np.ndarray, plan: PilotPlan, tx_power_ue: float, noise_var: float
) -> np.ndarray:
    """Estimate variance per link: p_u*beta^2 / (p_u*coset beta sum + noise)."""
    beta = np.asarray(beta, dtype=float)
    if np.any(beta <= 0):
        raise InvalidParameterError("beta must be strictly positive")
    member = plan.membership()
    coset_beta = (beta @ member)[:, plan.assignment]  # (M, K)
    denom = tx_power_ue * coset_beta + noise_var
    return tx_power_ue * np.square(beta) / denom


def mmse_estimate(
    observations: np.ndarray,
    beta: np.ndarray,
    plan: PilotPlan,
    tx_power_ue: float,
    noise_var: float,
) -> EstimationResult:
    """Linear MMSE channel estimates from de-spread observations."""
    beta = np.asarray(beta, dtype=float)
    if np.any(beta <= 0):
        raise InvalidParameterError("beta must be strictly positive")
    member = plan.membership()
    coset_beta = (beta @ member)[:, plan.assignment]
    denom = tx_power_ue * coset_beta + noise_var
    scale = np.sqrt(tx_power_ue) * beta / denom
    g_hat = scale * np.asarray(observations)
    alpha = tx_power_ue * np.square(beta) / denom
    return EstimationResult(g_hat=g_hat, alpha=alpha, g_tilde_variance=beta - alpha)
