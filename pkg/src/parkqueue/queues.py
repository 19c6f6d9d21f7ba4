"""Stationary analysis of a curbside parking queue.

A block of ``spots`` parking spots fed by Poisson arrivals is an M/M/c/n
queue: service (parking duration) is exponential per spot, and at most
``capacity`` drivers may be in the system at once, counting both parked
drivers and drivers circling for a spot.  All rates are per minute.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from .exceptions import ParameterDomainError

__all__ = [
    "QueueParams",
    "CostParams",
    "StationaryDistribution",
    "stationary_plain",
    "expected_wait_cost",
    "queue_time_density",
]


@dataclass(frozen=True)
class QueueParams:
    """Parameters of a single parking queue.

    Attributes:
        arrival_rate: exogenous driver arrival rate (per minute).
        service_rate: per-spot departure rate (per minute); mean parking
            duration is ``1 / service_rate`` minutes.
        spots: number of parking spots (servers).
        capacity: maximum number of drivers in the system, parked plus
            waiting; must be at least ``spots``.
    """

    arrival_rate: float
    service_rate: float
    spots: int
    capacity: int

    def __post_init__(self):
        if self.arrival_rate < 0:
            raise ParameterDomainError(f"arrival_rate must be >= 0, got {self.arrival_rate}")
        if self.service_rate <= 0:
            raise ParameterDomainError(f"service_rate must be > 0, got {self.service_rate}")
        if self.spots < 1:
            raise ParameterDomainError(f"spots must be >= 1, got {self.spots}")
        if self.capacity < self.spots:
            raise ParameterDomainError(
                f"capacity ({self.capacity}) must be >= spots ({self.spots})"
            )

    @property
    def traffic_intensity(self) -> float:
        """Offered load per spot, ``arrival_rate / (spots * service_rate)``."""
        return self.arrival_rate / (self.spots * self.service_rate)


@dataclass(frozen=True)
class CostParams:
    """Driver-facing rewards and costs.

    ``reward`` is the value of an on-street spot.  ``wait_cost`` and
    ``park_cost`` are charged per minute of waiting and of parking;
    ``observe_cost`` is the flat fee for inspecting the queue before
    deciding, and ``offstreet_cost`` (optional) is the per-minute price of
    the off-street alternative a balking driver falls back to.
    """

    reward: float
    wait_cost: float
    park_cost: float = 0.0
    observe_cost: float = 0.0
    offstreet_cost: float | None = None

    def __post_init__(self):
        if self.reward <= 0:
            raise ParameterDomainError(f"reward must be > 0, got {self.reward}")
        if self.wait_cost <= 0:
            raise ParameterDomainError(f"wait_cost must be > 0, got {self.wait_cost}")


@dataclass(frozen=True)
class StationaryDistribution:
    """Stationary occupancy of a parking queue.

    Attributes:
        probs: ``probs[k]`` is the long-run probability of ``k`` drivers in
            the system, ``k = 0 .. capacity``.
        cum_norm: running partial sums of the (rescaled) birth-death weights
            ``d_k``; only ratios of these are meaningful, since the weights
            are rescaled by a common factor for numerical range.
        variant: ``"plain"`` for a fixed arrival rate, ``"thresholded"``
            when the arrival rate drops at a balk threshold.
    """

    probs: np.ndarray
    cum_norm: np.ndarray
    variant: str = "plain"

    def mean_in_system(self) -> float:
        return float(np.arange(self.probs.size) @ self.probs)

    def mean_occupancy(self, spots: int) -> float:
        """Expected fraction of spots in use."""
        busy = np.minimum(np.arange(self.probs.size), spots)
        return float(busy @ self.probs) / spots


def _stationary_from_log_rates(log_birth: np.ndarray, log_death: np.ndarray, variant: str) -> StationaryDistribution:
    """Normalize a birth-death chain given per-transition log rates."""
    log_d = np.concatenate(([0.0], np.cumsum(log_birth - log_death)))
    log_total = logsumexp(log_d)
    probs = np.exp(log_d - log_total)
    weights = np.exp(log_d - log_d.max())
    return StationaryDistribution(probs=probs, cum_norm=np.cumsum(weights), variant=variant)


def stationary_plain(queue: QueueParams) -> StationaryDistribution:
    """Stationary distribution of the M/M/c/n parking queue.

    The birth-death weights are accumulated in log space, so the result
    stays finite for capacities in the thousands and loads well past
    saturation.

    Args:
        queue: queue parameters; ``arrival_rate`` may be zero, in which
            case all mass sits on the empty state.

    Returns:
        StationaryDistribution over ``0 .. queue.capacity`` drivers.
    """
    n, c = queue.capacity, queue.spots
    k = np.arange(n)  # transition k -> k+1
    with np.errstate(divide="ignore"):
        log_birth = np.full(n, np.log(queue.arrival_rate) if queue.arrival_rate > 0 else -np.inf)
    log_death = np.log(np.minimum(k + 1, c) * queue.service_rate)
    return _stationary_from_log_rates(log_birth, log_death, "plain")


def expected_wait_cost(queue: QueueParams, costs: CostParams, k) -> float | np.ndarray:
    """Expected waiting cost for a driver who joins with ``k`` already present.

    Uses the uniform convention ``wait_cost * (k + 1) / (spots * service_rate)``
    for every state, including states with free spots: the joining driver is
    charged as if all ``k + 1`` drivers ahead of (and including) them must be
    cleared at the aggregate service rate.

    Args:
        queue: queue parameters.
        costs: cost parameters (only ``wait_cost`` is used).
        k: occupancy seen on arrival, scalar or array, ``0 <= k <= capacity``.

    Returns:
        Expected waiting cost, same shape as ``k``.
    """
    k = np.asarray(k)
    if np.any(k < 0) or np.any(k > queue.capacity):
        raise ParameterDomainError(f"state k must lie in [0, {queue.capacity}]")
    w = costs.wait_cost * (k + 1) / (queue.spots * queue.service_rate)
    return float(w) if w.ndim == 0 else w


def queue_time_density(queue: QueueParams, k: int, t) -> float | np.ndarray:
    """Density of the waiting time before parking, joining at occupancy ``k``.

    With all spots busy (``k >= spots``), the joining driver waits for
    ``k - spots + 1`` departures, each at the aggregate rate
    ``spots * service_rate``; the wait is Erlang with that shape and rate.

    Args:
        queue: queue parameters.
        k: occupancy on arrival; must satisfy ``spots <= k <= capacity``.
        t: time in minutes, scalar or array, ``t >= 0``.

    Returns:
        Density value(s) at ``t``.
    """
    if not queue.spots <= k <= queue.capacity:
        raise ParameterDomainError(
            f"density defined for spots <= k <= capacity, got k={k}"
        )
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ParameterDomainError("time t must be >= 0")
    rate = queue.spots * queue.service_rate
    shape = k - queue.spots + 1
    with np.errstate(divide="ignore"):
        log_t = np.where(t > 0, np.log(np.where(t > 0, t, 1.0)), -np.inf)
    log_pdf = shape * np.log(rate) + (shape - 1) * log_t - rate * t - gammaln(shape)
    if shape == 1:  # exponential: finite at t = 0
        pdf = np.exp(np.log(rate) - rate * t)
    else:
        pdf = np.where(t > 0, np.exp(log_pdf), 0.0)
    return float(pdf) if pdf.ndim == 0 else pdf
