"""Scenario configuration files shared by the library and the CLI.

A scenario file is YAML with nested sections::

    name: example
    queue:        {arrival_rate, service_rate, spots, capacity}
    costs:        {reward, wait_cost, park_cost, observe_cost, offstreet_cost}
    outside_option: zero | offstreet
    strategy:     [P_o, P_b, P_j]          # optional fixed strategy
    balk_threshold: int                    # optional, else derived from costs
    capped_level: int                      # optional, for pricing reports
    network:      {blockfaces, streets, sources, patient_drivers}
    solver:       {epsilon, delta, damping, start, max_iters, grid_resolution}
    simulation:   {horizon, warmup, seeds}
    sweep:        {parameter, range, steps}

Only ``queue`` is mandatory; ``costs`` is needed for anything that touches
utilities, and ``sweep`` only for the sweep command.  When ``network`` is
omitted the scenario runs on a fully connected triangle of blockfaces that
splits ``queue.spots`` as evenly as possible.  Unknown keys are rejected so
typos fail loudly instead of silently using a default.

``parse_config`` and ``serialize_config`` round-trip exactly, and
``scenario_id`` hashes the canonical form so every output row can name the
scenario it came from regardless of how the file was formatted.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field

import yaml

from .costly import GameSpec, Strategy
from .exceptions import ConfigurationError
from .queues import CostParams, QueueParams
from .simulator import Blockface, NetworkScenario, Street, complete_topology

__all__ = [
    "SolverSettings",
    "SimulationSettings",
    "SweepSettings",
    "ScenarioConfig",
    "parse_config",
    "load_config",
    "config_to_mapping",
    "serialize_config",
    "save_config",
    "scenario_id",
    "game_spec",
    "network_scenario",
]


@dataclass(frozen=True)
class SolverSettings:
    """Knobs for the equilibrium and social-optimum searches."""

    epsilon: float = 1e-4
    delta: float = 1e-6
    damping: float = 0.9
    start: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)
    max_iters: int = 100_000
    grid_resolution: int = 200


@dataclass(frozen=True)
class SimulationSettings:
    """Horizon, warm-up, and the seed list shared by simulate and sweep."""

    horizon: float = 20_000.0
    warmup: float | None = None
    seeds: tuple[int, ...] = tuple(range(10))


@dataclass(frozen=True)
class SweepSettings:
    """One-parameter sweep: evenly spaced values of ``parameter``."""

    parameter: str = "arrival_rate"
    lower: float = 0.0
    upper: float = 0.0
    steps: int = 1

    def values(self) -> list[float]:
        if self.steps == 1:
            return [self.lower]
        width = (self.upper - self.lower) / (self.steps - 1)
        return [self.lower + i * width for i in range(self.steps)]


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to analyze, solve, or simulate one scenario."""

    queue: QueueParams
    name: str = "scenario"
    costs: CostParams | None = None
    outside_option: str = "zero"
    strategy: Strategy | None = None
    balk_threshold: int | None = None
    capped_level: int | None = None
    blockfaces: tuple[Blockface, ...] = ()
    streets: tuple[Street, ...] = ()
    sources: tuple[str, ...] = ()
    patient_drivers: bool = False
    solver: SolverSettings = field(default_factory=SolverSettings)
    simulation: SimulationSettings = field(default_factory=SimulationSettings)
    sweep: SweepSettings | None = None


def _reject_unknown(mapping: dict, known: tuple[str, ...], path: str) -> None:
    extra = sorted(set(mapping) - set(known))
    if extra:
        raise ConfigurationError(f"unknown key {path}.{extra[0]}")


def _get_number(mapping: dict, key: str, path: str, *, required: bool = False, default=None):
    if key not in mapping or mapping[key] is None:
        if required:
            raise ConfigurationError(f"{path}.{key} is required")
        return default
    value = mapping[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"{path}.{key} must be a number, got {value!r}")
    return float(value)


def _get_int(mapping: dict, key: str, path: str, *, required: bool = False, default=None):
    value = _get_number(mapping, key, path, required=required)
    if value is None:
        return default
    if value != int(value):
        raise ConfigurationError(f"{path}.{key} must be an integer, got {value!r}")
    return int(value)


def _get_bool(mapping: dict, key: str, path: str, default: bool = False) -> bool:
    value = mapping.get(key, default)
    if not isinstance(value, bool):
        raise ConfigurationError(f"{path}.{key} must be true or false, got {value!r}")
    return value


def _get_section(mapping: dict, key: str, *, required: bool = False) -> dict | None:
    if key not in mapping or mapping[key] is None:
        if required:
            raise ConfigurationError(f"{key} section is required")
        return None
    value = mapping[key]
    if not isinstance(value, dict):
        raise ConfigurationError(f"{key} must be a mapping, got {value!r}")
    return value


def _parse_strategy(raw, path: str) -> Strategy:
    if not isinstance(raw, (list, tuple)) or len(raw) != 3:
        raise ConfigurationError(
            f"{path} must be a list of three probabilities (observe, balk, join)"
        )
    try:
        return Strategy(*(float(v) for v in raw))
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"{path} is not a valid mixed strategy: {exc}") from exc


def _parse_network(section: dict, spots_total: int | None):
    _reject_unknown(section, ("blockfaces", "streets", "sources", "patient_drivers"), "network")
    raw_faces = section.get("blockfaces")
    if not raw_faces:
        raise ConfigurationError("network.blockfaces is required when network is given")
    faces = []
    for i, entry in enumerate(raw_faces):
        if not isinstance(entry, dict):
            raise ConfigurationError(f"network.blockfaces[{i}] must be a mapping")
        _reject_unknown(entry, ("id", "spots"), f"network.blockfaces[{i}]")
        if "id" not in entry:
            raise ConfigurationError(f"network.blockfaces[{i}].id is required")
        spots = _get_int(entry, "spots", f"network.blockfaces[{i}]", required=True)
        faces.append(Blockface(id=str(entry["id"]), spots=spots))
    streets = []
    for i, entry in enumerate(section.get("streets") or ()):
        if not isinstance(entry, dict):
            raise ConfigurationError(f"network.streets[{i}] must be a mapping")
        _reject_unknown(entry, ("origin", "destination", "drive_time"), f"network.streets[{i}]")
        for key in ("origin", "destination"):
            if key not in entry:
                raise ConfigurationError(f"network.streets[{i}].{key} is required")
        drive = _get_number(entry, "drive_time", f"network.streets[{i}]", default=1.0)
        streets.append(
            Street(origin=str(entry["origin"]), destination=str(entry["destination"]), drive_time=drive)
        )
    sources = tuple(str(s) for s in (section.get("sources") or ()))
    if not sources:
        sources = tuple(f.id for f in faces)
    patient = _get_bool(section, "patient_drivers", "network")
    if spots_total is not None:
        network_total = sum(f.spots for f in faces)
        if network_total != spots_total:
            raise ConfigurationError(
                f"network blockface spots sum to {network_total} "
                f"but queue.spots is {spots_total}"
            )
    return tuple(faces), tuple(streets), sources, patient


def parse_config(mapping: dict, source: str = "config") -> ScenarioConfig:
    """Validate a raw mapping and build a :class:`ScenarioConfig`.

    Raises:
        ConfigurationError: naming the offending field, e.g. a file whose
            queue section lacks ``service_rate``.
    """
    if not isinstance(mapping, dict):
        raise ConfigurationError(f"{source} must be a mapping of sections, got {mapping!r}")
    _reject_unknown(
        mapping,
        (
            "name", "queue", "costs", "outside_option", "strategy", "balk_threshold",
            "capped_level", "network", "solver", "simulation", "sweep",
        ),
        source,
    )
    name = str(mapping.get("name", "scenario"))

    queue_map = _get_section(mapping, "queue", required=True)
    _reject_unknown(queue_map, ("arrival_rate", "service_rate", "spots", "capacity"), "queue")
    try:
        queue = QueueParams(
            arrival_rate=_get_number(queue_map, "arrival_rate", "queue", required=True),
            service_rate=_get_number(queue_map, "service_rate", "queue", required=True),
            spots=_get_int(queue_map, "spots", "queue", required=True),
            capacity=_get_int(queue_map, "capacity", "queue", default=100),
        )
    except ValueError as exc:
        raise ConfigurationError(f"queue: {exc}") from exc

    costs = None
    costs_map = _get_section(mapping, "costs")
    if costs_map is not None:
        _reject_unknown(
            costs_map, ("reward", "wait_cost", "park_cost", "observe_cost", "offstreet_cost"), "costs"
        )
        try:
            costs = CostParams(
                reward=_get_number(costs_map, "reward", "costs", required=True),
                wait_cost=_get_number(costs_map, "wait_cost", "costs", required=True),
                park_cost=_get_number(costs_map, "park_cost", "costs", default=0.0),
                observe_cost=_get_number(costs_map, "observe_cost", "costs", default=0.0),
                offstreet_cost=_get_number(costs_map, "offstreet_cost", "costs"),
            )
        except ValueError as exc:
            raise ConfigurationError(f"costs: {exc}") from exc

    outside = mapping.get("outside_option", "zero")
    if outside not in ("zero", "offstreet"):
        raise ConfigurationError(
            f"outside_option must be 'zero' or 'offstreet', got {outside!r}"
        )
    if outside == "offstreet" and (costs is None or costs.offstreet_cost is None):
        raise ConfigurationError("outside_option 'offstreet' requires costs.offstreet_cost")

    strategy = None
    if mapping.get("strategy") is not None:
        strategy = _parse_strategy(mapping["strategy"], "strategy")

    balk_threshold = _get_int(mapping, "balk_threshold", source)
    if balk_threshold is not None and balk_threshold < 1:
        raise ConfigurationError(f"balk_threshold must be >= 1, got {balk_threshold}")
    capped_level = _get_int(mapping, "capped_level", source)
    if capped_level is not None and capped_level < 1:
        raise ConfigurationError(f"capped_level must be >= 1, got {capped_level}")

    network_map = _get_section(mapping, "network")
    if network_map is not None:
        faces, streets, sources, patient = _parse_network(network_map, queue.spots)
    else:
        base, per = divmod(queue.spots, 3)
        if base == 0:
            raise ConfigurationError(
                f"queue.spots must be >= 3 to split across the default network, got {queue.spots}"
            )
        split = tuple(base + (1 if i < per else 0) for i in range(3))
        faces, streets = complete_topology(split)
        sources = tuple(f.id for f in faces)
        patient = False

    solver = SolverSettings()
    solver_map = _get_section(mapping, "solver")
    if solver_map is not None:
        _reject_unknown(
            solver_map,
            ("epsilon", "delta", "damping", "start", "max_iters", "grid_resolution"),
            "solver",
        )
        start = solver.start
        if solver_map.get("start") is not None:
            start_strategy = _parse_strategy(solver_map["start"], "solver.start")
            start = (start_strategy.p_observe, start_strategy.p_balk, start_strategy.p_join)
        solver = SolverSettings(
            epsilon=_get_number(solver_map, "epsilon", "solver", default=solver.epsilon),
            delta=_get_number(solver_map, "delta", "solver", default=solver.delta),
            damping=_get_number(solver_map, "damping", "solver", default=solver.damping),
            start=start,
            max_iters=_get_int(solver_map, "max_iters", "solver", default=solver.max_iters),
            grid_resolution=_get_int(
                solver_map, "grid_resolution", "solver", default=solver.grid_resolution
            ),
        )
        if not 0 < solver.epsilon:
            raise ConfigurationError(f"solver.epsilon must be > 0, got {solver.epsilon}")
        if not 0 < solver.delta:
            raise ConfigurationError(f"solver.delta must be > 0, got {solver.delta}")
        if not 0 <= solver.damping < 1:
            raise ConfigurationError(f"solver.damping must lie in [0, 1), got {solver.damping}")
        if solver.max_iters < 1:
            raise ConfigurationError(f"solver.max_iters must be >= 1, got {solver.max_iters}")
        if solver.grid_resolution < 1:
            raise ConfigurationError(
                f"solver.grid_resolution must be >= 1, got {solver.grid_resolution}"
            )

    simulation = SimulationSettings()
    sim_map = _get_section(mapping, "simulation")
    if sim_map is not None:
        _reject_unknown(sim_map, ("horizon", "warmup", "seeds"), "simulation")
        seeds = simulation.seeds
        if sim_map.get("seeds") is not None:
            raw_seeds = sim_map["seeds"]
            if isinstance(raw_seeds, int) and not isinstance(raw_seeds, bool):
                seeds = tuple(range(raw_seeds))
            elif isinstance(raw_seeds, list):
                seeds = tuple(
                    _get_int({"seed": s}, "seed", f"simulation.seeds[{i}]", required=True)
                    for i, s in enumerate(raw_seeds)
                )
            else:
                raise ConfigurationError(
                    f"simulation.seeds must be a count or a list of seeds, got {raw_seeds!r}"
                )
            if not seeds:
                raise ConfigurationError("simulation.seeds must name at least one seed")
        simulation = SimulationSettings(
            horizon=_get_number(sim_map, "horizon", "simulation", default=simulation.horizon),
            warmup=_get_number(sim_map, "warmup", "simulation"),
            seeds=seeds,
        )
        if simulation.horizon <= 0:
            raise ConfigurationError(f"simulation.horizon must be > 0, got {simulation.horizon}")
        if simulation.warmup is not None and not 0 <= simulation.warmup < simulation.horizon:
            raise ConfigurationError(
                f"simulation.warmup must lie in [0, horizon), got {simulation.warmup}"
            )

    sweep = None
    sweep_map = _get_section(mapping, "sweep")
    if sweep_map is not None:
        _reject_unknown(sweep_map, ("parameter", "range", "steps"), "sweep")
        parameter = sweep_map.get("parameter", "arrival_rate")
        if parameter != "arrival_rate":
            raise ConfigurationError(
                f"sweep.parameter: only 'arrival_rate' is supported, got {parameter!r}"
            )
        raw_range = sweep_map.get("range")
        if not isinstance(raw_range, (list, tuple)) or len(raw_range) != 2:
            raise ConfigurationError("sweep.range must be [lower, upper]")
        lower = _get_number({"lower": raw_range[0]}, "lower", "sweep.range", required=True)
        upper = _get_number({"upper": raw_range[1]}, "upper", "sweep.range", required=True)
        steps = _get_int(sweep_map, "steps", "sweep", default=2)
        if lower < 0 or upper < lower:
            raise ConfigurationError(
                f"sweep.range must satisfy 0 <= lower <= upper, got ({lower}, {upper})"
            )
        if steps < 1 or (steps == 1 and lower != upper) or (steps > 1 and lower == upper):
            raise ConfigurationError(
                f"sweep.steps ({steps}) is inconsistent with range ({lower}, {upper})"
            )
        sweep = SweepSettings(parameter=parameter, lower=lower, upper=upper, steps=steps)

    return ScenarioConfig(
        queue=queue,
        name=name,
        costs=costs,
        outside_option=outside,
        strategy=strategy,
        balk_threshold=balk_threshold,
        capped_level=capped_level,
        blockfaces=faces,
        streets=streets,
        sources=sources,
        patient_drivers=patient,
        solver=solver,
        simulation=simulation,
        sweep=sweep,
    )


def load_config(path) -> ScenarioConfig:
    """Parse a YAML scenario file."""
    try:
        with open(path, encoding="utf-8") as handle:
            raw = yaml.safe_load(handle)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"invalid YAML in {path}: {exc}") from exc
    return parse_config(raw, source=str(path))


def config_to_mapping(config: ScenarioConfig) -> dict:
    """Canonical plain-dict form: all defaults filled, optionals omitted."""
    out: dict = {
        "name": config.name,
        "queue": {
            "arrival_rate": config.queue.arrival_rate,
            "service_rate": config.queue.service_rate,
            "spots": config.queue.spots,
            "capacity": config.queue.capacity,
        },
        "outside_option": config.outside_option,
        "network": {
            "blockfaces": [{"id": f.id, "spots": f.spots} for f in config.blockfaces],
            "streets": [
                {"origin": s.origin, "destination": s.destination, "drive_time": s.drive_time}
                for s in config.streets
            ],
            "sources": list(config.sources),
            "patient_drivers": config.patient_drivers,
        },
        "solver": dataclasses.asdict(config.solver) | {"start": list(config.solver.start)},
        "simulation": {
            "horizon": config.simulation.horizon,
            "warmup": config.simulation.warmup,
            "seeds": list(config.simulation.seeds),
        },
    }
    if config.simulation.warmup is None:
        del out["simulation"]["warmup"]
    if config.costs is not None:
        costs = {
            "reward": config.costs.reward,
            "wait_cost": config.costs.wait_cost,
            "park_cost": config.costs.park_cost,
            "observe_cost": config.costs.observe_cost,
            "offstreet_cost": config.costs.offstreet_cost,
        }
        if costs["offstreet_cost"] is None:
            del costs["offstreet_cost"]
        out["costs"] = costs
    if config.strategy is not None:
        out["strategy"] = [
            config.strategy.p_observe, config.strategy.p_balk, config.strategy.p_join,
        ]
    if config.balk_threshold is not None:
        out["balk_threshold"] = config.balk_threshold
    if config.capped_level is not None:
        out["capped_level"] = config.capped_level
    if config.sweep is not None:
        out["sweep"] = {
            "parameter": config.sweep.parameter,
            "range": [config.sweep.lower, config.sweep.upper],
            "steps": config.sweep.steps,
        }
    return out


def serialize_config(config: ScenarioConfig) -> str:
    """YAML text whose parse equals ``config`` exactly."""
    return yaml.safe_dump(config_to_mapping(config), sort_keys=True, default_flow_style=False)


def save_config(config: ScenarioConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(serialize_config(config))


def scenario_id(config: ScenarioConfig) -> str:
    """Short stable hash of the canonicalized scenario.

    Two files that parse to the same scenario get the same id, however
    they were formatted or which defaults they spelled out.
    """
    canonical = json.dumps(config_to_mapping(config), sort_keys=True)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


def game_spec(config: ScenarioConfig) -> GameSpec:
    """The analytic game this scenario describes.

    Raises:
        ConfigurationError: if the scenario has no costs section.
    """
    if config.costs is None:
        raise ConfigurationError("costs section is required to build the game")
    try:
        return GameSpec(
            queue=config.queue,
            costs=config.costs,
            outside_option=config.outside_option,
            balk_threshold=config.balk_threshold,
        )
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from exc


def network_scenario(config: ScenarioConfig, strategy: Strategy) -> NetworkScenario:
    """The simulation scenario at a given strategy.

    The informed-driver threshold comes from the explicit
    ``balk_threshold`` if present, else from the game (when costs are
    given), else it is the system capacity so observers only react to a
    full system.
    """
    if config.balk_threshold is not None:
        threshold = config.balk_threshold
    elif config.costs is not None:
        threshold = game_spec(config).balk_threshold
    else:
        threshold = config.queue.capacity
    try:
        return NetworkScenario(
            blockfaces=config.blockfaces,
            streets=config.streets,
            sources=config.sources,
            arrival_rate=config.queue.arrival_rate,
            service_rate=config.queue.service_rate,
            strategy=strategy,
            balk_threshold=threshold,
            capacity=config.queue.capacity,
            costs=config.costs,
            outside_option=config.outside_option,
            patient_drivers=config.patient_drivers,
        )
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from exc
