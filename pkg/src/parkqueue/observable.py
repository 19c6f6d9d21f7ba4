"""The parking game with free queue observation.

Every arriving driver sees the current occupancy ``k`` and joins exactly
when the reward net of waiting and parking costs is non-negative.  That
threshold rule, the social-welfare curve it induces, and the parking-fee
intervals that shift the threshold are all computed here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .exceptions import InfeasibleTargetError, ParameterDomainError
from .queues import CostParams, QueueParams, StationaryDistribution, expected_wait_cost

__all__ = [
    "nominal_utility",
    "total_utility",
    "balking_level",
    "equilibrium_strategy",
    "social_welfare_curve",
    "socially_optimal_level",
    "PriceInterval",
    "pricing_interval",
    "WelfareOrdering",
    "welfare_ordering_check",
    "offstreet_balking_level",
]

# Guard against floor() dropping a level when the defining ratio is an exact
# integer that floating point lands just below.
_FLOOR_SLACK = 1e-9


def nominal_utility(queue: QueueParams, costs: CostParams, k) -> float | np.ndarray:
    """Reward minus expected waiting cost for a driver joining at state ``k``."""
    return costs.reward - expected_wait_cost(queue, costs, k)


def total_utility(queue: QueueParams, costs: CostParams, k) -> float | np.ndarray:
    """Utility of joining at state ``k`` including the parking fee.

    The fee is ``park_cost`` per minute over a mean stay of
    ``1 / service_rate`` minutes.
    """
    return nominal_utility(queue, costs, k) - costs.park_cost / queue.service_rate


def balking_level(queue: QueueParams, costs: CostParams) -> int:
    """Occupancy at which an informed driver stops joining.

    A driver who sees ``k`` drivers joins exactly when
    ``total_utility(k) >= 0``, which holds for ``k`` below::

        floor((reward * service_rate * spots - park_cost * spots) / wait_cost)

    Returns 0 when even an empty queue is not worth joining.
    """
    c, mu = queue.spots, queue.service_rate
    level = (costs.reward * mu * c - costs.park_cost * c) / costs.wait_cost
    return max(0, int(np.floor(level + _FLOOR_SLACK)))


def equilibrium_strategy(queue: QueueParams, costs: CostParams) -> np.ndarray:
    """Individually optimal joining rule under free observation.

    Returns:
        Boolean array over arrival states ``0 .. capacity - 1``;
        entry ``k`` is True when a driver who sees ``k`` joins.
    """
    n_b = balking_level(queue, costs)
    return np.arange(queue.capacity) < n_b


def _stationary_capped(queue: QueueParams, level: int) -> StationaryDistribution:
    """Stationary occupancy when joining stops at ``level`` (, possibly < spots)."""
    k = np.arange(level)
    with np.errstate(divide="ignore"):
        log_birth = np.full(level, np.log(queue.arrival_rate) if queue.arrival_rate > 0 else -np.inf)
    log_death = np.log(np.minimum(k + 1, queue.spots) * queue.service_rate)
    log_d = np.concatenate(([0.0], np.cumsum(log_birth - log_death)))
    probs = np.exp(log_d - logsumexp(log_d))
    weights = np.exp(log_d - log_d.max())
    return StationaryDistribution(probs=probs, cum_norm=np.cumsum(weights), variant="plain")


def social_welfare_curve(queue: QueueParams, costs: CostParams, max_level: int | None = None) -> np.ndarray:
    """Long-run welfare rate for each candidate joining threshold.

    With joining capped at ``m``, welfare is the arrival rate times the
    expected joining utility under the resulting stationary occupancy:
    ``arrival_rate * sum_{k<m} p_k(m) * total_utility(k)``.

    Args:
        queue: queue parameters.
        costs: cost parameters.
        max_level: largest threshold to evaluate; defaults to the
            balking level.

    Returns:
        Array ``welfare[m]`` for thresholds ``m = 0 .. max_level``.
    """
    if max_level is None:
        max_level = balking_level(queue, costs)
    if max_level < 0:
        raise ParameterDomainError(f"max_level must be >= 0, got {max_level}")
    beta = np.asarray(total_utility(queue, costs, np.arange(max(max_level, 1))))
    welfare = np.zeros(max_level + 1)
    for m in range(1, max_level + 1):
        dist = _stationary_capped(queue, m)
        welfare[m] = queue.arrival_rate * float(dist.probs[:m] @ beta[:m])
    return welfare


def socially_optimal_level(queue: QueueParams, costs: CostParams) -> int:
    """Joining threshold that maximizes the welfare rate.

    Scans thresholds ``0 .. balking_level``; ties resolve to the smallest
    maximizer.
    """
    curve = social_welfare_curve(queue, costs)
    return int(np.argmax(curve))


@dataclass(frozen=True)
class PriceInterval:
    """Half-open interval ``(lower, upper]`` of per-minute parking fees."""

    lower: float
    upper: float
    target: int

    def contains(self, fee: float) -> bool:
        return self.lower < fee <= self.upper

    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)


def pricing_interval(queue: QueueParams, costs: CostParams, target: int) -> PriceInterval:
    """Per-minute parking fees that make ``target`` the balking level.

    A fee ``p`` induces balking level ``target`` exactly when
    ``service_rate * nominal_utility(target) < p <=
    service_rate * nominal_utility(target - 1)``.  Negative bounds mean the
    target needs a subsidy.

    Raises:
        InfeasibleTargetError: if ``target < 1`` (no fee can make the
            empty queue unjoinable from below).
    """
    if target < 1:
        raise InfeasibleTargetError(f"pricing target must be >= 1, got {target}")
    fee_costs = CostParams(
        reward=costs.reward, wait_cost=costs.wait_cost, park_cost=0.0,
        observe_cost=costs.observe_cost, offstreet_cost=costs.offstreet_cost,
    )
    mu = queue.service_rate
    lower = mu * float(nominal_utility(queue, fee_costs, target))
    upper = mu * float(nominal_utility(queue, fee_costs, target - 1))
    return PriceInterval(lower=lower, upper=upper, target=target)


@dataclass(frozen=True)
class WelfareOrdering:
    """Welfare comparison across the selfish, optimal, and capped thresholds."""

    balk_level: int
    optimal_level: int
    capped_level: int | None
    balk_welfare: float
    optimal_welfare: float
    capped_welfare: float | None

    @property
    def consistent(self) -> bool:
        """True when the optimum is no looser than selfish joining and beats it."""
        ok = self.optimal_level <= self.balk_level
        ok = ok and self.optimal_welfare >= self.balk_welfare - 1e-12
        if self.capped_welfare is not None:
            ok = ok and self.capped_welfare <= self.optimal_welfare + 1e-12
        return ok


def welfare_ordering_check(queue: QueueParams, costs: CostParams, capped_level: int | None = None) -> WelfareOrdering:
    """Compare welfare at the selfish, socially optimal, and capped levels.

    ``capped_level`` models an externally imposed occupancy cap (e.g. a
    congestion target); it is always supplied by the caller, never derived.
    """
    n_b = balking_level(queue, costs)
    if capped_level is not None and not 0 <= capped_level <= n_b:
        raise ParameterDomainError(
            f"capped_level must lie in [0, {n_b}], got {capped_level}"
        )
    curve = social_welfare_curve(queue, costs)
    n_so = int(np.argmax(curve))
    return WelfareOrdering(
        balk_level=n_b,
        optimal_level=n_so,
        capped_level=capped_level,
        balk_welfare=float(curve[n_b]),
        optimal_welfare=float(curve[n_so]),
        capped_welfare=None if capped_level is None else float(curve[capped_level]),
    )


def offstreet_balking_level(queue: QueueParams, costs: CostParams) -> int:
    """Joining threshold when balkers divert to off-street parking.

    Joining on-street at state ``k`` beats the off-street alternative while
    the waiting cost stays under the price gap, giving threshold
    ``floor(spots * (offstreet_cost - park_cost) / wait_cost)``.
    """
    if costs.offstreet_cost is None:
        raise ParameterDomainError("offstreet_cost is required for the off-street threshold")
    gap = costs.offstreet_cost - costs.park_cost
    if gap < 0:
        return 0
    return int(np.floor(queue.spots * gap / costs.wait_cost + _FLOOR_SLACK))
