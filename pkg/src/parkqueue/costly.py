"""The parking game when observing the queue costs a fee.

Drivers commit in advance to one of three actions: pay a fee to observe
the occupancy and then join only below the balk threshold, join blind, or
balk outright.  A mixed strategy over those actions induces a birth-death
occupancy whose arrival rate drops at the threshold; utilities, the
symmetric Nash equilibrium (damped best-response iteration), and the
socially optimal strategy (simplex grid search) follow from it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .exceptions import ParameterDomainError
from .observable import balking_level, total_utility
from .queues import CostParams, QueueParams, StationaryDistribution

__all__ = [
    "Strategy",
    "GameSpec",
    "EquilibriumResult",
    "stationary_costly",
    "utility_observe",
    "utility_join",
    "utility_balk",
    "best_response",
    "nash_equilibrium",
    "social_welfare",
    "socially_optimal_strategy",
]

_SIMPLEX_TOL = 1e-9
_SUPPORT_TOL = 1e-12


@dataclass(frozen=True)
class Strategy:
    """Mixed strategy over (observe, balk, join blind)."""

    p_observe: float
    p_balk: float
    p_join: float

    def __post_init__(self):
        probs = (self.p_observe, self.p_balk, self.p_join)
        if min(probs) < -_SIMPLEX_TOL or max(probs) > 1 + _SIMPLEX_TOL:
            raise ParameterDomainError(f"strategy components must lie in [0, 1], got {probs}")
        if abs(sum(probs) - 1.0) > _SIMPLEX_TOL:
            raise ParameterDomainError(f"strategy must sum to 1, got {probs}")

    @classmethod
    def uniform(cls) -> "Strategy":
        return cls(1 / 3, 1 / 3, 1 / 3)

    def as_array(self) -> np.ndarray:
        return np.array([self.p_observe, self.p_balk, self.p_join])


@dataclass(frozen=True)
class GameSpec:
    """Full description of one costly-observation game.

    ``balk_threshold`` is the occupancy at which an informed driver stops
    joining.  When omitted it is derived from the free-observation balking
    level for either outside option, which keeps the informed policy
    identical across variants and lets the off-street comparison isolate
    the change in the balk payoff.  A threshold above ``capacity`` is
    clamped to ``capacity``.
    """

    queue: QueueParams
    costs: CostParams
    outside_option: str = "zero"
    balk_threshold: int | None = None

    def __post_init__(self):
        if self.outside_option not in ("zero", "offstreet"):
            raise ParameterDomainError(
                f"outside_option must be 'zero' or 'offstreet', got {self.outside_option!r}"
            )
        if self.outside_option == "offstreet" and self.costs.offstreet_cost is None:
            raise ParameterDomainError("offstreet outside option requires offstreet_cost")
        threshold = self.balk_threshold
        if threshold is None:
            threshold = balking_level(self.queue, self.costs)
        threshold = min(threshold, self.queue.capacity)
        if threshold < 1:
            raise ParameterDomainError(
                "balk threshold is 0: no state is worth joining, the game is degenerate"
            )
        object.__setattr__(self, "balk_threshold", threshold)


class _Workspace:
    """Per-spec arrays reused across solver iterations."""

    def __init__(self, spec: GameSpec):
        queue, n = spec.queue, spec.queue.capacity
        k = np.arange(n)
        self.n = n
        self.threshold = spec.balk_threshold
        self.below = k < self.threshold
        self.log_death = np.log(np.minimum(k + 1, queue.spots) * queue.service_rate)
        self.beta = np.asarray(total_utility(queue, spec.costs, k), dtype=float)
        self.arrival = queue.arrival_rate
        self.observe_fee = spec.costs.observe_cost
        self.balk_value = utility_balk(spec)


def _workspace(spec: GameSpec) -> _Workspace:
    return _Workspace(spec)


def _occupancy_probs(ws: _Workspace, p_balk: float, p_join: float) -> np.ndarray:
    with np.errstate(divide="ignore"):
        lam_low = np.log((1.0 - p_balk) * ws.arrival) if (1.0 - p_balk) * ws.arrival > 0 else -np.inf
        lam_high = np.log(p_join * ws.arrival) if p_join * ws.arrival > 0 else -np.inf
    log_birth = np.where(ws.below, lam_low, lam_high)
    log_d = np.concatenate(([0.0], np.cumsum(log_birth - ws.log_death)))
    return np.exp(log_d - logsumexp(log_d))


def stationary_costly(spec: GameSpec, strategy: Strategy) -> StationaryDistribution:
    """Stationary occupancy induced by a mixed strategy.

    Below the balk threshold both observers and blind joiners enter, so
    births run at ``(1 - p_balk) * arrival_rate``; at or above it only
    blind joiners do, at ``p_join * arrival_rate``.  Degenerate strategies
    (everyone balks) are fine: the queue just stays empty.
    """
    ws = _workspace(spec)
    probs = _occupancy_probs(ws, strategy.p_balk, strategy.p_join)
    weights = probs / probs.max()
    return StationaryDistribution(probs=probs, cum_norm=np.cumsum(weights), variant="thresholded")


def utility_balk(spec: GameSpec) -> float:
    """Payoff of balking: zero, or the off-street alternative's net value."""
    if spec.outside_option == "offstreet":
        return spec.costs.reward - spec.costs.offstreet_cost / spec.queue.service_rate
    return 0.0


def _utilities(ws: _Workspace, probs: np.ndarray) -> tuple[float, float, float]:
    thr = ws.threshold
    mass_below = float(probs[:thr].sum())
    u_join = float(probs[: ws.n] @ ws.beta)
    u_obs = float(probs[:thr] @ ws.beta[:thr]) + (1.0 - mass_below) * ws.balk_value - ws.observe_fee
    return u_obs, ws.balk_value, u_join


def utility_observe(spec: GameSpec, strategy: Strategy) -> float:
    """Expected utility of paying the fee and joining only below threshold.

    States at or above the threshold pay out the balk value (zero against
    a worthless outside option, the off-street value otherwise), and the
    observation fee is charged regardless.
    """
    ws = _workspace(spec)
    probs = _occupancy_probs(ws, strategy.p_balk, strategy.p_join)
    return _utilities(ws, probs)[0]


def utility_join(spec: GameSpec, strategy: Strategy) -> float:
    """Expected utility of joining blind (arrivals at full capacity get nothing)."""
    ws = _workspace(spec)
    probs = _occupancy_probs(ws, strategy.p_balk, strategy.p_join)
    return _utilities(ws, probs)[2]


def _best_response_probs(
    utils: tuple[float, float, float], strategy: np.ndarray, epsilon: float
) -> np.ndarray:
    u_o, u_b, u_j = utils
    p_o, p_b, p_j = strategy
    if u_o > max(u_j, u_b) + epsilon:
        return np.array([1.0, 0.0, 0.0])
    if u_j > max(u_o, u_b) + epsilon:
        return np.array([0.0, 0.0, 1.0])
    if u_b > max(u_o, u_j) + epsilon:
        return np.array([0.0, 1.0, 0.0])
    if abs(u_o - u_b) < epsilon and min(u_o, u_b) > u_j + epsilon:
        mass = p_o + p_b
        if mass <= 0.0:
            return np.array([0.5, 0.5, 0.0])
        return np.array([p_o / mass, p_b / mass, 0.0])
    if abs(u_j - u_b) < epsilon and min(u_j, u_b) > u_o + epsilon:
        return np.array([0.0, p_b, 1.0 - p_b])
    if abs(u_j - u_o) < epsilon and min(u_j, u_o) > u_b + epsilon:
        return np.array([p_o, 0.0, 1.0 - p_o])
    return np.array([p_o, p_b, p_j])  # three-way tie: stand still


def best_response(spec: GameSpec, strategy: Strategy, epsilon: float = 1e-4) -> Strategy:
    """One best-response step of the equilibrium iteration.

    A strict winner (by more than ``epsilon``) maps to its pure strategy;
    a two-way near-tie that dominates the third action redistributes mass
    over the tied pair; a three-way tie leaves the strategy unchanged.
    """
    ws = _workspace(spec)
    probs = _occupancy_probs(ws, strategy.p_balk, strategy.p_join)
    target = _best_response_probs(_utilities(ws, probs), strategy.as_array(), epsilon)
    return Strategy(*target)


@dataclass(frozen=True)
class EquilibriumResult:
    """Solution of the costly-observation game.

    ``utilities`` is (observe, balk, join) at the returned strategy, and
    ``residual`` is the worst shortfall of a played action's utility below
    the best action -- near zero at a true equilibrium.  For the social
    optimum the residual is the final search step instead.
    """

    strategy: Strategy
    utilities: tuple[float, float, float]
    kind: str
    welfare: float
    iterations: int
    residual: float
    converged: bool


def _residual(utils: tuple[float, float, float], strategy: np.ndarray) -> float:
    """Complementarity gap: mass on an action times its shortfall from the best."""
    best = max(utils)
    return max(p * (best - u) for u, p in zip(utils, strategy))


def _welfare_from_parts(ws: _Workspace, strategy: np.ndarray, utils: tuple[float, float, float]) -> float:
    u_o, u_b, u_j = utils
    return ws.arrival * float(strategy[0] * u_o + strategy[1] * u_b + strategy[2] * u_j)


def social_welfare(spec: GameSpec, strategy: Strategy) -> float:
    """Aggregate welfare rate ``arrival_rate * E[utility of an arrival]``."""
    ws = _workspace(spec)
    arr = strategy.as_array()
    probs = _occupancy_probs(ws, arr[1], arr[2])
    return _welfare_from_parts(ws, arr, _utilities(ws, probs))


def nash_equilibrium(
    spec: GameSpec,
    start: Strategy | None = None,
    epsilon: float = 1e-4,
    delta: float = 1e-6,
    damping: float = 0.9,
    max_iters: int = 100_000,
) -> EquilibriumResult:
    """Symmetric Nash equilibrium by damped best-response iteration.

    Each pass moves the population strategy a fraction ``1 - damping`` of
    the way toward its best response and stops once the observe/balk
    components move by less than ``delta``.  When the fixed step keeps
    overshooting a mixed equilibrium (no residual improvement for a few
    hundred passes) the step fraction is halved so the iterate can settle
    into the indifference band instead of orbiting it.  If the iteration
    is still wandering after ``max_iters`` passes, the visited point with
    the smallest equilibrium residual is returned with ``converged=False``.

    Args:
        spec: game description.
        start: initial strategy, uniform by default.
        epsilon: utility-comparison tolerance for the best response.
        delta: stopping tolerance on the strategy update.
        damping: fraction of the old strategy retained each pass.
        max_iters: pass budget before falling back to the best visited point.
    """
    if not 0.0 <= damping < 1.0:
        raise ParameterDomainError(f"damping must lie in [0, 1), got {damping}")
    ws = _workspace(spec)
    current = (start or Strategy.uniform()).as_array()

    stall_window = 400
    step_fraction = 1.0 - damping
    best_point, best_res, best_utils = current, np.inf, (0.0, 0.0, 0.0)
    since_improvement = 0
    for iteration in range(1, max_iters + 1):
        probs = _occupancy_probs(ws, current[1], current[2])
        utils = _utilities(ws, probs)
        res = _residual(utils, current)
        if res < best_res - 1e-15:
            best_point, best_res, best_utils = current, res, utils
            since_improvement = 0
        else:
            since_improvement += 1
            if since_improvement >= stall_window:
                step_fraction *= 0.5
                since_improvement = 0
                current = best_point  # resume from the best point seen
                if step_fraction < 1e-6:
                    break
                continue
        target = _best_response_probs(utils, current, epsilon)
        if abs(target[0] - current[0]) + abs(target[1] - current[1]) < delta:
            return EquilibriumResult(
                strategy=Strategy(*current),
                utilities=utils,
                kind="nash",
                welfare=_welfare_from_parts(ws, current, utils),
                iterations=iteration,
                residual=res,
                converged=True,
            )
        current = step_fraction * target + (1.0 - step_fraction) * current

    return EquilibriumResult(
        strategy=Strategy(*best_point),
        utilities=best_utils,
        kind="nash",
        welfare=_welfare_from_parts(ws, best_point, best_utils),
        iterations=iteration,
        residual=best_res,
        converged=bool(best_res <= epsilon),
    )


def _welfare_batch(ws: _Workspace, points: np.ndarray) -> np.ndarray:
    """Welfare rate for each strategy row of ``points`` (shape (m, 3))."""
    thr, n = ws.threshold, ws.n
    with np.errstate(divide="ignore"):
        lam_low = np.log((1.0 - points[:, 1]) * ws.arrival)
        lam_high = np.log(points[:, 2] * ws.arrival)
    log_birth = np.where(ws.below[None, :], lam_low[:, None], lam_high[:, None])
    log_d = np.concatenate(
        (np.zeros((points.shape[0], 1)), np.cumsum(log_birth - ws.log_death[None, :], axis=1)),
        axis=1,
    )
    probs = np.exp(log_d - logsumexp(log_d, axis=1, keepdims=True))
    mass_below = probs[:, :thr].sum(axis=1)
    u_obs = probs[:, :thr] @ ws.beta[:thr] + (1.0 - mass_below) * ws.balk_value - ws.observe_fee
    u_join = probs[:, :n] @ ws.beta
    return ws.arrival * (
        points[:, 0] * u_obs + points[:, 1] * ws.balk_value + points[:, 2] * u_join
    )


def _simplex_grid(resolution: int) -> np.ndarray:
    pts = [
        (i / resolution, j / resolution, (resolution - i - j) / resolution)
        for i in range(resolution + 1)
        for j in range(resolution + 1 - i)
    ]
    return np.array(pts)


def socially_optimal_strategy(
    spec: GameSpec, resolution: int = 200, refine_step: float = 1e-4
) -> EquilibriumResult:
    """Strategy maximizing the aggregate welfare rate.

    Scans a barycentric grid with ``resolution`` subdivisions per simplex
    edge, then refines the incumbent by pairwise-exchange descent with
    halving steps down to ``refine_step``.  Deterministic: grid ties go to
    the first point in generation order.
    """
    if resolution < 1:
        raise ParameterDomainError(f"resolution must be >= 1, got {resolution}")
    ws = _workspace(spec)
    grid = _simplex_grid(resolution)
    scores = _welfare_batch(ws, grid)
    best = int(np.argmax(scores))
    point, value = grid[best], float(scores[best])
    evals = grid.shape[0]

    # Pairwise exchanges keep the point on the simplex; shrink until the
    # step is below the refinement target.
    moves = []
    for src in range(3):
        for dst in range(3):
            if src != dst:
                shift = np.zeros(3)
                shift[src] -= 1.0
                shift[dst] += 1.0
                moves.append(shift)
    step = 1.0 / resolution
    while step >= refine_step:
        candidates = [point + step * m for m in moves]
        candidates = [c for c in candidates if c.min() > -1e-12]
        if candidates:
            batch = np.clip(np.array(candidates), 0.0, 1.0)
            batch /= batch.sum(axis=1, keepdims=True)
            vals = _welfare_batch(ws, batch)
            evals += batch.shape[0]
            top = int(np.argmax(vals))
            if vals[top] > value + 1e-15:
                point, value = batch[top], float(vals[top])
                continue
        step *= 0.5

    probs = _occupancy_probs(ws, point[1], point[2])
    utils = _utilities(ws, probs)
    return EquilibriumResult(
        strategy=Strategy(*point),
        utilities=utils,
        kind="social_optimum",
        welfare=value,
        iterations=evals,
        residual=step,
        converged=True,
    )
