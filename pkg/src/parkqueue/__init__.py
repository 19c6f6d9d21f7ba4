"""Queueing-game toolkit for curbside parking.

Submodules:
    queues      -- M/M/c/n stationary analysis and waiting-time primitives
    observable  -- the free-observation balking game and welfare pricing
    costly      -- the costly-observation game: equilibria and social optima
    simulator   -- discrete-event simulation of a blockface network
    config      -- scenario files shared by the library and the CLI
    cli         -- command-line front end (analyze / equilibrium / simulate / sweep)
"""

from .costly import (
    EquilibriumResult,
    GameSpec,
    Strategy,
    best_response,
    nash_equilibrium,
    social_welfare,
    socially_optimal_strategy,
    stationary_costly,
    utility_balk,
    utility_join,
    utility_observe,
)
from .config import (
    ScenarioConfig,
    SimulationSettings,
    SolverSettings,
    SweepSettings,
    game_spec,
    load_config,
    network_scenario,
    parse_config,
    save_config,
    scenario_id,
    serialize_config,
)
from .exceptions import ConfigurationError, InfeasibleTargetError, ParameterDomainError
from .observable import (
    PriceInterval,
    WelfareOrdering,
    balking_level,
    equilibrium_strategy,
    nominal_utility,
    offstreet_balking_level,
    pricing_interval,
    social_welfare_curve,
    socially_optimal_level,
    total_utility,
    welfare_ordering_check,
)
from .queues import (
    CostParams,
    QueueParams,
    StationaryDistribution,
    expected_wait_cost,
    queue_time_density,
    stationary_plain,
)
from .simulator import (
    Blockface,
    NetworkScenario,
    SimMetrics,
    Street,
    SweepRow,
    complete_topology,
    congestion_knee,
    estimate_welfare,
    occupancy_congestion_sweep,
    run_simulation,
)

__version__ = "0.1.0"

__all__ = [
    "QueueParams",
    "CostParams",
    "StationaryDistribution",
    "stationary_plain",
    "expected_wait_cost",
    "queue_time_density",
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
    "Blockface",
    "Street",
    "NetworkScenario",
    "SimMetrics",
    "SweepRow",
    "run_simulation",
    "estimate_welfare",
    "occupancy_congestion_sweep",
    "congestion_knee",
    "complete_topology",
    "ScenarioConfig",
    "SolverSettings",
    "SimulationSettings",
    "SweepSettings",
    "parse_config",
    "load_config",
    "serialize_config",
    "save_config",
    "scenario_id",
    "game_spec",
    "network_scenario",
    "ParameterDomainError",
    "InfeasibleTargetError",
    "ConfigurationError",
    "__version__",
]
