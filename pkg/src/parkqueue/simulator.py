"""Discrete-event simulator of a street-parking network.

Blockfaces are multi-server queues (one server per curb spot) linked by
directed streets with fixed drive times.  Exogenous drivers arrive in
Poisson streams at source blockfaces, act according to a mixed strategy
(observe / balk / join blind), and circle to adjacent blockfaces when
they find a full curb.  A single seeded event loop makes every run
bit-reproducible.

Routing semantics, in the order a driver experiences them:

* balk -- leave immediately (collecting the off-street payoff when that
  outside option is configured);
* observe -- pay the observation fee and check the curb: drive straight
  to the least committed blockface (parked + en-route drivers) unless
  even that one has exceeded the balk threshold, in which case fall back
  to the outside option;
* join blind -- try the driver's own source blockface first.

A driver reaching a full blockface picks a uniformly random outgoing
street and tries again after that street's drive time; scenarios with
``patient_drivers`` set instead have the driver hold position until a
spot at that blockface frees up (first come, first served).  Arrivals
finding the whole system at capacity are turned away.
"""

from __future__ import annotations

import heapq
import itertools
import math
import random
from collections import deque
from dataclasses import dataclass, replace

from .costly import Strategy
from .exceptions import ConfigurationError, ParameterDomainError
from .queues import CostParams

__all__ = [
    "Blockface",
    "Street",
    "NetworkScenario",
    "SimMetrics",
    "SweepRow",
    "run_simulation",
    "occupancy_congestion_sweep",
    "estimate_welfare",
    "congestion_knee",
    "complete_topology",
]


@dataclass(frozen=True)
class Blockface:
    """One curbside queue: ``spots`` parallel parking spaces."""

    id: str
    spots: int

    def __post_init__(self):
        if self.spots < 1:
            raise ConfigurationError(f"blockface {self.id!r}: spots must be >= 1, got {self.spots}")


@dataclass(frozen=True)
class Street:
    """Directed road segment with a fixed traversal time in minutes."""

    origin: str
    destination: str
    drive_time: float = 1.0

    def __post_init__(self):
        if self.drive_time <= 0:
            raise ConfigurationError(
                f"street {self.origin!r}->{self.destination!r}: drive_time must be > 0, "
                f"got {self.drive_time}"
            )


@dataclass(frozen=True)
class NetworkScenario:
    """Everything one simulation run needs.

    Attributes:
        blockfaces: the parking queues.
        streets: directed edges drivers circle along.
        sources: blockface ids receiving exogenous arrivals (the total
            rate is split evenly across them).
        arrival_rate: total exogenous arrival rate, drivers/min.
        service_rate: per-spot service rate (1 / mean parking duration).
        strategy: mixed (observe, balk, join) strategy every driver samples.
        balk_threshold: an informed driver gives up once even the least
            committed blockface holds more than this many drivers.
        capacity: system-wide cap on drivers present (parked + circling).
        costs: optional cost parameters; enables welfare accounting.
        outside_option: "zero" or "offstreet", the balk payoff.
        patient_drivers: when True, a driver finding a blockface full
            waits there for the next free spot instead of circling on.
    """

    blockfaces: tuple[Blockface, ...]
    streets: tuple[Street, ...]
    sources: tuple[str, ...]
    arrival_rate: float
    service_rate: float
    strategy: Strategy
    balk_threshold: int
    capacity: int
    costs: CostParams | None = None
    outside_option: str = "zero"
    patient_drivers: bool = False

    def __post_init__(self):
        object.__setattr__(self, "blockfaces", tuple(self.blockfaces))
        object.__setattr__(self, "streets", tuple(self.streets))
        object.__setattr__(self, "sources", tuple(self.sources))
        ids = [b.id for b in self.blockfaces]
        if not ids:
            raise ConfigurationError("blockfaces: at least one required")
        if len(set(ids)) != len(ids):
            raise ConfigurationError("blockfaces: ids must be unique")
        known = set(ids)
        for st in self.streets:
            for end in (st.origin, st.destination):
                if end not in known:
                    raise ConfigurationError(f"streets: unknown blockface id {end!r}")
        if not self.sources:
            raise ConfigurationError("sources: at least one required")
        for s in self.sources:
            if s not in known:
                raise ConfigurationError(f"sources: unknown blockface id {s!r}")
        if self.arrival_rate < 0:
            raise ConfigurationError(f"arrival_rate must be >= 0, got {self.arrival_rate}")
        if self.service_rate <= 0:
            raise ConfigurationError(f"service_rate must be > 0, got {self.service_rate}")
        if self.balk_threshold < 0:
            raise ConfigurationError(f"balk_threshold must be >= 0, got {self.balk_threshold}")
        if self.capacity < 1:
            raise ConfigurationError(f"capacity must be >= 1, got {self.capacity}")
        if self.outside_option not in ("zero", "offstreet"):
            raise ConfigurationError(
                f"outside_option must be 'zero' or 'offstreet', got {self.outside_option!r}"
            )
        if self.outside_option == "offstreet" and self.costs is not None \
                and self.costs.offstreet_cost is None:
            raise ConfigurationError("outside_option 'offstreet' requires costs.offstreet_cost")
        self._check_topology(ids)

    def _check_topology(self, ids: list[str]) -> None:
        out = {i: [] for i in ids}
        for st in self.streets:
            out[st.origin].append(st.destination)
        for b in self.blockfaces:
            if not out[b.id]:
                raise ConfigurationError(
                    f"blockface {b.id!r} has no outgoing street; circling drivers would strand"
                )
        # every blockface reachable from every source
        for s in self.sources:
            seen = {s}
            frontier = [s]
            while frontier:
                cur = frontier.pop()
                for nxt in out[cur]:
                    if nxt not in seen:
                        seen.add(nxt)
                        frontier.append(nxt)
            missing = set(ids) - seen
            if missing:
                raise ConfigurationError(
                    f"blockface {sorted(missing)[0]!r} unreachable from source {s!r}"
                )

    @property
    def total_spots(self) -> int:
        return sum(b.spots for b in self.blockfaces)


# disposition-count keys, in the fixed order used for CSV emission
DRIVER_COUNT_KEYS = (
    "arrived",
    "balked",
    "joined_blind",
    "observed",
    "parked",
    "rejected_at_capacity",
    "observer_balked",
)


@dataclass(frozen=True)
class SimMetrics:
    """Aggregate results of one run, measured after warmup.

    ``total_wait`` and ``total_service`` are the per-driver sums behind
    ``avg_wait`` and the welfare estimate, kept (together with the
    scenario's ``service_rate``) so welfare can be re-priced against
    different costs without re-running.
    """

    avg_wait: float
    utilization: float
    welfare_rate: float
    drivers: dict[str, int]
    horizon: float
    warmup: float
    seed: int
    service_rate: float = 1.0
    total_wait: float = 0.0
    total_service: float = 0.0


_ARRIVE, _REACH, _DEPART = 0, 1, 2


def run_simulation(
    scenario: NetworkScenario,
    horizon: float,
    warmup: float | None = None,
    seed: int = 0,
) -> SimMetrics:
    """Run one seeded realization and return its metrics.

    Args:
        scenario: network, rates, and strategy.
        horizon: simulated minutes.
        warmup: minutes discarded from every statistic (default: 10% of
            the horizon).
        seed: RNG seed; identical inputs give bit-identical metrics.
    """
    if warmup is None:
        warmup = 0.1 * horizon
    if not horizon > warmup >= 0:
        raise ParameterDomainError(f"need horizon > warmup >= 0, got {horizon}, {warmup}")

    rng = random.Random(seed)
    faces = scenario.blockfaces
    nb = len(faces)
    index = {b.id: i for i, b in enumerate(faces)}
    spots = [b.spots for b in faces]
    neighbors: list[list[tuple[int, float]]] = [[] for _ in range(nb)]
    for st in scenario.streets:
        neighbors[index[st.origin]].append((index[st.destination], st.drive_time))
    source_idx = [index[s] for s in scenario.sources]

    p_obs = scenario.strategy.p_observe
    p_balk = scenario.strategy.p_balk
    threshold = scenario.balk_threshold
    capacity = scenario.capacity
    mu = scenario.service_rate

    parked = [0] * nb
    en_route = [0] * nb
    waiting: list[deque] = [deque() for _ in range(nb)]
    population = 0
    occupied = 0

    counts = dict.fromkeys(DRIVER_COUNT_KEYS, 0)
    total_wait = 0.0
    total_service = 0.0

    heap: list[tuple] = []
    seq = itertools.count()
    last_t = 0.0
    area = 0.0  # integral of occupied spots over the measured window

    def advance(t: float) -> None:
        nonlocal last_t, area
        lo = max(last_t, warmup)
        hi = min(t, horizon)
        if hi > lo:
            area += occupied * (hi - lo)
        last_t = t

    if scenario.arrival_rate > 0:
        per_source = scenario.arrival_rate / len(source_idx)
        for s in source_idx:
            heapq.heappush(heap, (rng.expovariate(per_source), next(seq), _ARRIVE, s, 0.0))

    def park(t: float, b: int, arrived_at: float) -> None:
        nonlocal occupied, total_wait, total_service
        parked[b] += 1
        occupied += 1
        service = rng.expovariate(mu)
        heapq.heappush(heap, (t + service, next(seq), _DEPART, b, 0.0))
        if t > warmup:
            counts["parked"] += 1
            total_wait += t - arrived_at
            total_service += service

    def committed(i: int) -> int:
        return parked[i] + en_route[i] + len(waiting[i])

    def reach(t: float, b: int, arrived_at: float) -> None:
        """Driver pulls up at blockface ``b``: park, hold, or circle on."""
        if parked[b] < spots[b]:
            advance(t)
            park(t, b, arrived_at)
        elif scenario.patient_drivers:
            waiting[b].append(arrived_at)
        else:
            nxt, drive = neighbors[b][rng.randrange(len(neighbors[b]))]
            en_route[nxt] += 1
            heapq.heappush(heap, (t + drive, next(seq), _REACH, nxt, arrived_at))

    while heap:
        t, _, kind, b, arrived_at = heapq.heappop(heap)
        if t > horizon:
            break
        if kind == _ARRIVE:
            per_source = scenario.arrival_rate / len(source_idx)
            heapq.heappush(heap, (t + rng.expovariate(per_source), next(seq), _ARRIVE, b, 0.0))
            measuring = t > warmup
            if measuring:
                counts["arrived"] += 1
            u = rng.random()
            if u < p_obs:
                if measuring:
                    counts["observed"] += 1
                best = min(range(nb), key=committed)
                if committed(best) > threshold:
                    if measuring:
                        counts["observer_balked"] += 1
                elif population >= capacity:
                    if measuring:
                        counts["rejected_at_capacity"] += 1
                else:
                    population += 1
                    reach(t, best, t)
            elif u < p_obs + p_balk:
                if measuring:
                    counts["balked"] += 1
            else:
                if measuring:
                    counts["joined_blind"] += 1
                if population >= capacity:
                    if measuring:
                        counts["rejected_at_capacity"] += 1
                else:
                    population += 1
                    reach(t, b, t)
        elif kind == _REACH:
            en_route[b] -= 1
            reach(t, b, arrived_at)
        else:  # _DEPART
            advance(t)
            parked[b] -= 1
            occupied -= 1
            population -= 1
            if waiting[b]:
                park(t, b, waiting[b].popleft())
    advance(horizon)

    span = horizon - warmup
    utilization = area / (span * scenario.total_spots)
    n_parked = counts["parked"]
    avg_wait = total_wait / n_parked if n_parked else 0.0
    metrics = SimMetrics(
        avg_wait=avg_wait,
        utilization=utilization,
        welfare_rate=0.0,
        drivers=counts,
        horizon=horizon,
        warmup=warmup,
        seed=seed,
        service_rate=mu,
        total_wait=total_wait,
        total_service=total_service,
    )
    if scenario.costs is not None:
        metrics = replace(
            metrics,
            welfare_rate=estimate_welfare(metrics, scenario.costs, scenario.outside_option),
        )
    return metrics


def estimate_welfare(metrics: SimMetrics, costs: CostParams, outside_option: str = "zero") -> float:
    """Realized welfare per minute implied by a finished run.

    Prices the run's sufficient statistics: parked drivers earn the
    reward net of waiting and parking costs, every observer is debited
    the observation fee, and every driver who ended up balking (outright
    or after observing) collects the outside-option payoff.
    """
    if outside_option not in ("zero", "offstreet"):
        raise ParameterDomainError(f"unknown outside_option {outside_option!r}")
    balk_value = 0.0
    if outside_option == "offstreet":
        if costs.offstreet_cost is None:
            raise ParameterDomainError("offstreet welfare requires offstreet_cost")
        balk_value = costs.reward - costs.offstreet_cost / metrics.service_rate
    d = metrics.drivers
    total = (
        d["parked"] * costs.reward
        - costs.wait_cost * metrics.total_wait
        - costs.park_cost * metrics.total_service
        - costs.observe_cost * d["observed"]
        + balk_value * (d["balked"] + d["observer_balked"])
    )
    return total / (metrics.horizon - metrics.warmup)


@dataclass(frozen=True)
class SweepRow:
    """One aggregated sweep point: seed-mean and standard error."""

    arrival_rate: float
    mean_utilization: float
    se_utilization: float
    mean_avg_wait: float
    se_avg_wait: float
    mean_welfare_rate: float
    se_welfare_rate: float
    n_seeds: int


def _mean_se(values: list[float]) -> tuple[float, float]:
    n = len(values)
    m = sum(values) / n
    if n < 2:
        return m, 0.0
    var = sum((v - m) ** 2 for v in values) / (n - 1)
    return m, math.sqrt(var / n)


def occupancy_congestion_sweep(
    scenario: NetworkScenario,
    lambda_range: tuple[float, float],
    steps: int,
    seeds,
    horizon: float = 20_000.0,
    warmup: float | None = None,
) -> list[SweepRow]:
    """Sweep the arrival rate and aggregate metrics over seeds.

    ``seeds`` may be an integer count (seeds 0..N-1) or an explicit
    sequence; passing the same sequence to two sweeps yields paired
    (common-random-number) comparisons.
    """
    lo, hi = lambda_range
    if not 0 < lo <= hi:
        raise ParameterDomainError(f"lambda_range must satisfy 0 < lo <= hi, got {lambda_range}")
    if steps < 2:
        raise ParameterDomainError(f"steps must be >= 2, got {steps}")
    if isinstance(seeds, int):
        if seeds < 1:
            raise ParameterDomainError(f"seeds must be >= 1, got {seeds}")
        seeds = range(seeds)
    seeds = list(seeds)
    rows = []
    for i in range(steps):
        lam = lo + (hi - lo) * i / (steps - 1)
        runs = [
            run_simulation(replace(scenario, arrival_rate=lam), horizon, warmup, seed)
            for seed in seeds
        ]
        mu_u, se_u = _mean_se([r.utilization for r in runs])
        mu_w, se_w = _mean_se([r.avg_wait for r in runs])
        mu_v, se_v = _mean_se([r.welfare_rate for r in runs])
        rows.append(SweepRow(lam, mu_u, se_u, mu_w, se_w, mu_v, se_v, len(seeds)))
    return rows


def congestion_knee(rows: list[SweepRow], factor: float = 5.0) -> float | None:
    """Utilization at which mean wait first exceeds ``factor`` x its
    low-arrival baseline (the first sweep point); None if it never does."""
    if not rows:
        raise ParameterDomainError("empty sweep")
    baseline = max(rows[0].mean_avg_wait, 1e-12)
    for row in rows:
        if row.mean_avg_wait > factor * baseline:
            return row.mean_utilization
    return None


def complete_topology(
    spots: tuple[int, ...] = (10, 10, 10),
    drive_time: float = 1.0,
) -> tuple[tuple[Blockface, ...], tuple[Street, ...]]:
    """Fully connected two-way street grid over ``len(spots)`` blockfaces."""
    names = [f"b{i}" for i in range(len(spots))]
    faces = tuple(Blockface(n, s) for n, s in zip(names, spots))
    streets = tuple(
        Street(a, b, drive_time) for a in names for b in names if a != b
    )
    return faces, streets
