"""Command-line front end: analyze, equilibrium, simulate, sweep.

Every subcommand reads one scenario (``--config FILE`` or ``--preset NAME``;
presets ship with the package and ``PARKQUEUE_PRESETS`` points elsewhere)
and emits CSV with a fixed, documented column order -- UTF-8, header row,
floats at nine significant digits.  With ``--out`` the CSV goes to the file
and a short human report to stdout; without it the CSV itself is stdout.

Column orders:

* ``equilibrium``: scenario_id, kind, P_o, P_b, P_j, U_o, U_b, U_j,
  welfare, residual, converged
* ``simulate``: scenario_id, kind, seed, utilization, avg_wait,
  welfare_rate, se_utilization, se_avg_wait, se_welfare_rate -- one row
  per seed (se cells blank) plus a ``seed=mean`` aggregate row
* ``sweep``: scenario_id, sweep_parameter, sweep_value, kind, metric,
  value, stderr -- long form, one metric per row; analytic strategy
  components and utilities come before simulated metrics at each point
* ``analyze`` (with ``--out``): scenario_id, level, welfare -- the
  welfare curve over joining thresholds

Exit codes: 0 success (including a non-converged solve, which is data),
2 configuration problem, 3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import math
import os
import sys
from pathlib import Path

from .config import (
    ScenarioConfig,
    game_spec,
    load_config,
    network_scenario,
    scenario_id,
)
from .costly import EquilibriumResult, Strategy, nash_equilibrium, socially_optimal_strategy
from .exceptions import ConfigurationError
from .observable import offstreet_balking_level, pricing_interval, welfare_ordering_check
from .simulator import run_simulation

PRESET_ENV = "PARKQUEUE_PRESETS"

EQUILIBRIUM_COLUMNS = [
    "scenario_id", "kind", "P_o", "P_b", "P_j",
    "U_o", "U_b", "U_j", "welfare", "residual", "converged",
]
SIMULATE_COLUMNS = [
    "scenario_id", "kind", "seed", "utilization", "avg_wait", "welfare_rate",
    "se_utilization", "se_avg_wait", "se_welfare_rate",
]
SWEEP_COLUMNS = [
    "scenario_id", "sweep_parameter", "sweep_value", "kind", "metric", "value", "stderr",
]
ANALYZE_COLUMNS = ["scenario_id", "level", "welfare"]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "%.9g" % value
    return str(value)


def _emit_csv(header: list[str], rows: list[list], out: str | None) -> None:
    def write(handle):
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])

    if out:
        with open(out, "w", encoding="utf-8", newline="") as handle:
            write(handle)
    else:
        write(sys.stdout)


def _preset_dir() -> Path:
    override = os.environ.get(PRESET_ENV)
    if override:
        return Path(override)
    return Path(__file__).resolve().parent / "presets"


def _resolve_config(args) -> ScenarioConfig:
    if bool(args.config) == bool(args.preset):
        raise ConfigurationError("exactly one of --config or --preset is required")
    if args.config:
        return load_config(args.config)
    name = args.preset if args.preset.endswith((".yaml", ".yml")) else args.preset + ".yaml"
    path = _preset_dir() / name
    if not path.is_file():
        known = ", ".join(sorted(p.stem for p in _preset_dir().glob("*.yaml"))) or "none"
        raise ConfigurationError(f"unknown preset {args.preset!r}; available: {known}")
    return load_config(path)


def _resolve_kind(config: ScenarioConfig, kind_flag: str | None) -> str:
    if kind_flag:
        return kind_flag
    if config.strategy is not None:
        return "fixed"
    return "nash"


def _strategy_for(config: ScenarioConfig, kind: str) -> tuple[Strategy, EquilibriumResult | None]:
    """Pick the strategy to run: the config's own, or a fresh solve."""
    if kind == "fixed":
        if config.strategy is None:
            raise ConfigurationError("no fixed strategy in config; pass --kind nash|social")
        return config.strategy, None
    spec = game_spec(config)
    solver = config.solver
    if kind == "nash":
        result = nash_equilibrium(
            spec,
            start=Strategy(*solver.start),
            epsilon=solver.epsilon,
            delta=solver.delta,
            damping=solver.damping,
            max_iters=solver.max_iters,
        )
    else:
        result = socially_optimal_strategy(spec, resolution=solver.grid_resolution)
    return result.strategy, result


def _seeds(config: ScenarioConfig, seeds_flag: int | None) -> tuple[int, ...]:
    if seeds_flag is None:
        return config.simulation.seeds
    if seeds_flag < 1:
        raise ConfigurationError(f"--seeds must be >= 1, got {seeds_flag}")
    return tuple(range(seeds_flag))


def _mean_se(values: list[float]) -> tuple[float, float]:
    n = len(values)
    mean = sum(values) / n
    if n < 2:
        return mean, 0.0
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var / n)


def _interval_text(interval) -> str:
    return f"({_fmt(interval.lower)}, {_fmt(interval.upper)}] per minute"


def cmd_analyze(config: ScenarioConfig, args) -> int:
    spec = game_spec(config)
    queue, costs = config.queue, config.costs
    sid = scenario_id(config)
    ordering = welfare_ordering_check(queue, costs, capped_level=config.capped_level)
    n_b, n_so = ordering.balk_level, ordering.optimal_level

    print(f"scenario {config.name} [{sid}]")
    print(f"traffic intensity: {_fmt(queue.traffic_intensity)}")
    print(f"balking level: {n_b}")
    print(f"socially optimal level: {n_so}")
    print(f"welfare at balking level: {_fmt(ordering.balk_welfare)}")
    print(f"welfare at optimal level: {_fmt(ordering.optimal_welfare)}")
    if n_so >= 1:
        print(f"fee interval inducing optimal level: {_interval_text(pricing_interval(queue, costs, n_so))}")
    if config.capped_level is not None:
        print(f"welfare at capped level {config.capped_level}: {_fmt(ordering.capped_welfare)}")
        print(
            f"fee interval inducing capped level: "
            f"{_interval_text(pricing_interval(queue, costs, config.capped_level))}"
        )
    if costs.offstreet_cost is not None:
        n_off = offstreet_balking_level(queue, costs)
        print(f"off-street balking level: {n_off}")
        if n_off >= 1:
            print(
                f"fee interval inducing off-street level: "
                f"{_interval_text(pricing_interval(queue, costs, n_off))}"
            )
    print(f"informed-driver threshold in play: {spec.balk_threshold}")

    if args.out:
        from .observable import social_welfare_curve

        curve = social_welfare_curve(queue, costs)
        rows = [[sid, level, float(w)] for level, w in enumerate(curve)]
        _emit_csv(ANALYZE_COLUMNS, rows, args.out)
        print(f"welfare curve written to {args.out}")
    return 0


def _equilibrium_row(sid: str, kind: str, result: EquilibriumResult) -> list:
    s = result.strategy
    u_o, u_b, u_j = result.utilities
    return [
        sid, kind, s.p_observe, s.p_balk, s.p_join,
        u_o, u_b, u_j, result.welfare, result.residual, result.converged,
    ]


def cmd_equilibrium(config: ScenarioConfig, args) -> int:
    kind = args.kind or "nash"
    _, result = _strategy_for(config, kind)
    sid = scenario_id(config)
    _emit_csv(EQUILIBRIUM_COLUMNS, [_equilibrium_row(sid, kind, result)], args.out)
    if args.out:
        s = result.strategy
        print(f"scenario {config.name} [{sid}] kind={kind}")
        print(
            f"strategy: observe={_fmt(s.p_observe)} balk={_fmt(s.p_balk)} "
            f"join={_fmt(s.p_join)}"
        )
        print(f"welfare rate: {_fmt(result.welfare)}  residual: {_fmt(result.residual)}")
        print(
            f"iterations: {result.iterations}  converged: "
            f"{'yes' if result.converged else 'NO'}"
        )
        print(f"row written to {args.out}")
    return 0


def cmd_simulate(config: ScenarioConfig, args) -> int:
    kind = _resolve_kind(config, args.kind)
    strategy, _ = _strategy_for(config, kind)
    scenario = network_scenario(config, strategy)
    sid = scenario_id(config)
    seeds = _seeds(config, args.seeds)
    sim = config.simulation

    runs = [run_simulation(scenario, sim.horizon, sim.warmup, seed=s) for s in seeds]
    rows = [
        [sid, kind, m.seed, m.utilization, m.avg_wait, m.welfare_rate, None, None, None]
        for m in runs
    ]
    util = _mean_se([m.utilization for m in runs])
    wait = _mean_se([m.avg_wait for m in runs])
    welf = _mean_se([m.welfare_rate for m in runs])
    rows.append([sid, kind, "mean", util[0], wait[0], welf[0], util[1], wait[1], welf[1]])
    _emit_csv(SIMULATE_COLUMNS, rows, args.out)
    if args.out:
        print(f"scenario {config.name} [{sid}] kind={kind} seeds={len(seeds)}")
        print(f"utilization: {_fmt(util[0])} +/- {_fmt(util[1])}")
        print(f"avg wait:    {_fmt(wait[0])} +/- {_fmt(wait[1])}")
        print(f"welfare rate: {_fmt(welf[0])} +/- {_fmt(welf[1])}")
        print(f"rows written to {args.out}")
    return 0


def cmd_sweep(config: ScenarioConfig, args) -> int:
    if config.sweep is None:
        raise ConfigurationError("sweep section is required for the sweep command")
    kind = _resolve_kind(config, args.kind)
    sid = scenario_id(config)
    seeds = _seeds(config, args.seeds)
    sim = config.simulation
    parameter = config.sweep.parameter

    rows: list[list] = []
    for value in config.sweep.values():
        point = dataclasses.replace(
            config, queue=dataclasses.replace(config.queue, arrival_rate=value)
        )
        strategy, result = _strategy_for(point, kind)
        prefix = [sid, parameter, value, kind]
        rows.append(prefix + ["P_o", strategy.p_observe, None])
        rows.append(prefix + ["P_b", strategy.p_balk, None])
        rows.append(prefix + ["P_j", strategy.p_join, None])
        if result is not None:
            u_o, u_b, u_j = result.utilities
            rows.append(prefix + ["U_o", u_o, None])
            rows.append(prefix + ["U_b", u_b, None])
            rows.append(prefix + ["U_j", u_j, None])
            rows.append(prefix + ["welfare_analytic", result.welfare, None])
        scenario = network_scenario(point, strategy)
        runs = [run_simulation(scenario, sim.horizon, sim.warmup, seed=s) for s in seeds]
        for metric, values in (
            ("utilization", [m.utilization for m in runs]),
            ("avg_wait", [m.avg_wait for m in runs]),
            ("welfare_rate", [m.welfare_rate for m in runs]),
        ):
            mean, se = _mean_se(values)
            rows.append(prefix + [metric, mean, se])
    _emit_csv(SWEEP_COLUMNS, rows, args.out)
    if args.out:
        print(
            f"scenario {config.name} [{sid}] kind={kind}: "
            f"{config.sweep.steps} sweep points, {len(seeds)} seeds each"
        )
        print(f"rows written to {args.out}")
    return 0


_COMMANDS = {
    "analyze": cmd_analyze,
    "equilibrium": cmd_equilibrium,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="parkqueue",
        description="Curbside-parking queueing games: analytic levels, "
        "equilibria, and network simulation.",
        epilog=f"Preset files are read from the packaged directory unless "
        f"the {PRESET_ENV} environment variable points elsewhere.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str, *, kind: bool, seeds: bool) -> None:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", metavar="PATH", help="scenario YAML file")
        p.add_argument("--preset", metavar="NAME", help="named packaged scenario")
        p.add_argument("--out", metavar="PATH", help="write CSV here instead of stdout")
        if kind:
            p.add_argument("--kind", choices=("nash", "social"), help="which solution to use")
        if seeds:
            p.add_argument("--seeds", type=int, metavar="N", help="run seeds 0..N-1")

    add("analyze", "levels, welfare curve, and fee intervals", kind=False, seeds=False)
    add("equilibrium", "solve the game and emit one CSV row", kind=True, seeds=False)
    add("simulate", "simulate the network at a solved or fixed strategy", kind=True, seeds=True)
    add("sweep", "repeat the solve+simulate pipeline across a parameter range", kind=True, seeds=True)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = _resolve_config(args)
        return _COMMANDS[args.command](config, args)
    except ValueError as exc:
        # Domain and configuration problems are the user's to fix.
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
