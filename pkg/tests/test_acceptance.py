"""End-to-end acceptance checks, one test per numbered criterion.

Each test prints a single ``criterion NN: PASS/FAIL`` line and then
asserts.  The tolerances are contract values and are never loosened to
make a test pass: where the implemented model provably cannot hit a
benchmark number, the test stays strict and fails, and its docstring
says why.

The benchmark tables used in criteria 1-3 describe five reference
scenarios on a 30-spot curb with two-hour stays; rows 1-3 send balking
drivers away empty-handed, rows 4-5 divert them to a garage at
0.962/min.
"""

import time

import numpy as np
import pytest

from parkqueue import (
    CostParams,
    GameSpec,
    NetworkScenario,
    QueueParams,
    Strategy,
    balking_level,
    complete_topology,
    congestion_knee,
    load_config,
    nash_equilibrium,
    network_scenario,
    occupancy_congestion_sweep,
    run_simulation,
    social_welfare_curve,
    socially_optimal_level,
    socially_optimal_strategy,
    stationary_costly,
    stationary_plain,
)
from parkqueue.cli import main

from test_config_cli import PRESETS
from test_costly import benchmark, random_spec
from oracles import gated_queue_stationary, plain_queue_stationary

MU = 1 / 120
FACES, STREETS = complete_topology((10, 10, 10))

# Benchmark solutions for the five reference scenarios: strategy tuples
# are (observe, balk, join) and welfare is the long-run rate.
BENCH_NASH = {
    "row1": (0.85, 0.13, 0.02),
    "row2": (0.84, 0.09, 0.07),
    "row3": (0.55, 0.00, 0.45),
    "row4": (0.49, 0.00, 0.51),
    "row5": (0.53, 0.00, 0.47),
}
BENCH_SOCIAL = {
    "row1": ((0.00, 0.58, 0.42), 2.80),
    "row2": ((0.00, 0.56, 0.44), 3.02),
    "row3": ((0.00, 0.40, 0.60), 4.27),
    "row4": ((0.47, 0.19, 0.34), 6.58),
    "row5": ((0.50, 0.14, 0.36), 9.23),
}
BENCH_UTILIZATION = {
    ("row1", "social"): 0.332,
    ("row1", "nash"): 0.693,
    ("row4", "social"): 0.699,
    ("row4", "nash"): 0.840,
}


VERDICTS: list[str] = []


def _verdict(num: int, ok: bool, detail: str) -> None:
    """Record one pass/fail line per criterion; conftest replays them after
    the run so they show up even without ``-s``."""
    line = f"criterion {num:02d}: {'PASS' if ok else 'FAIL'} -- {detail}"
    VERDICTS.append(line)
    print(line)


@pytest.fixture(scope="module")
def spec_grid():
    """The randomized game grid shared by criteria 4, 5, and 7."""
    rng = np.random.default_rng(160493)
    return [random_spec(rng) for _ in range(50)]


def test_criterion_01_selfish_equilibrium_benchmarks():
    """Expected to FAIL: the benchmark strategy tuples are not fixed
    points of the utility model built here.  At those points the played
    actions earn strictly unequal utilities (e.g. scenario 1 pays an
    observer about +9 while balking pays 0, so mixing them cannot be a
    best response), and no admissible parameter reading changes that.
    The solver's true equilibria are frozen in test_costly.py; this test
    keeps the benchmark comparison at the contract tolerance."""
    failures = []
    for name, expected in BENCH_NASH.items():
        start = time.perf_counter()
        result = nash_equilibrium(benchmark(name))
        elapsed = time.perf_counter() - start
        got = result.strategy.as_array()
        gap = float(np.max(np.abs(got - np.array(expected))))
        if gap > 0.02 or not result.converged:
            failures.append(f"{name}: got {np.round(got, 3).tolist()} vs {expected} (gap {gap:.3f})")
        assert elapsed < 10.0, f"{name} took {elapsed:.1f}s"
    ok = not failures
    _verdict(1, ok, "selfish equilibria within 0.02 of benchmarks" if ok else "; ".join(failures))
    assert ok, "; ".join(failures)


def test_criterion_02_planner_benchmarks():
    """Partially expected to FAIL: scenarios 1-3 reproduce, but the
    benchmark welfare for scenarios 4-5 is positive while every strategy
    in those games nets a negative rate (the garage fallback alone costs
    each diverted driver 50.44), so no point of the simplex attains the
    quoted numbers."""
    failures = []
    for name, (expected, welfare) in BENCH_SOCIAL.items():
        start = time.perf_counter()
        result = socially_optimal_strategy(benchmark(name), resolution=200)
        elapsed = time.perf_counter() - start
        got = result.strategy.as_array()
        gap = float(np.max(np.abs(got - np.array(expected))))
        wgap = abs(result.welfare - welfare)
        if gap > 0.03 or wgap > 0.15:
            failures.append(
                f"{name}: strategy gap {gap:.3f}, welfare {result.welfare:.2f} vs {welfare}"
            )
        assert elapsed < 60.0, f"{name} took {elapsed:.1f}s"
    ok = not failures
    _verdict(2, ok, "planner optima within tolerance" if ok else "; ".join(failures))
    assert ok, "; ".join(failures)


def test_criterion_03_simulated_utilization():
    """The network simulator run at the benchmark strategy profiles
    reproduces the benchmark utilizations within three points, and the
    planner profile always waits less than the selfish one."""
    profiles = {
        ("row1", "social"): Strategy(0.00, 0.58, 0.42),
        ("row1", "nash"): Strategy(0.85, 0.13, 0.02),
        ("row4", "social"): Strategy(0.47, 0.19, 0.34),
        ("row4", "nash"): Strategy(0.49, 0.00, 0.51),
    }
    seeds = range(10)
    horizon, warmup = 1e5, 1e4
    measured = {}
    failures = []
    for (row, kind), strategy in profiles.items():
        config = load_config(PRESETS / f"table1-{row}.yaml")
        scenario = network_scenario(config, strategy)
        runs = [run_simulation(scenario, horizon, warmup, seed=s) for s in seeds]
        util = float(np.mean([m.utilization for m in runs]))
        wait = float(np.mean([m.avg_wait for m in runs]))
        measured[(row, kind)] = (util, wait)
        target = BENCH_UTILIZATION[(row, kind)]
        if abs(util - target) > 0.03:
            failures.append(f"{row}/{kind}: {util:.3f} vs {target:.3f}")
    for row in ("row1", "row4"):
        if not measured[(row, "social")][1] < measured[(row, "nash")][1]:
            failures.append(f"{row}: planner wait not below selfish wait")
    ok = not failures
    detail = ", ".join(
        f"{row}/{kind}={measured[(row, kind)][0] * 100:.1f}%" for (row, kind) in profiles
    )
    _verdict(3, ok, detail if ok else "; ".join(failures))
    assert ok, "; ".join(failures)


def test_criterion_04_planner_dominates_selfish(spec_grid):
    """On 50 random games the planner's welfare is never below the
    equilibrium welfare, and equilibria that mix in empty-handed balking
    sit at the zero-utility waterline."""
    failures = []
    for i, spec in enumerate(spec_grid):
        eq = nash_equilibrium(spec)
        planner = socially_optimal_strategy(spec, resolution=100)
        if not eq.converged:
            failures.append(f"game {i}: equilibrium did not converge")
            continue
        if planner.welfare < eq.welfare - 1e-6:
            failures.append(
                f"game {i}: planner {planner.welfare:.4f} < equilibrium {eq.welfare:.4f}"
            )
        if spec.outside_option == "zero" and eq.strategy.p_balk > 1e-3:
            if abs(eq.welfare) > 0.05:
                failures.append(
                    f"game {i}: balking in support but welfare {eq.welfare:.4f} != 0"
                )
    ok = not failures
    _verdict(4, ok, f"{len(spec_grid)} games, planner >= equilibrium welfare" if ok else "; ".join(failures))
    assert ok, "; ".join(failures)


def test_criterion_05_threshold_ordering_and_unimodality(spec_grid):
    """The planner's joining threshold never exceeds the selfish one,
    welfare at the selfish threshold never beats the optimum, and every
    welfare curve is single-peaked."""
    failures = []
    for i, spec in enumerate(spec_grid):
        queue, costs = spec.queue, spec.costs
        n_b = balking_level(queue, costs)
        n_so = socially_optimal_level(queue, costs)
        curve = social_welfare_curve(queue, costs)
        if n_so > n_b:
            failures.append(f"game {i}: planner threshold {n_so} > selfish {n_b}")
        if curve[n_b] > curve[n_so] + 1e-12:
            failures.append(f"game {i}: selfish welfare above optimum")
        tol = 1e-9 * max(1.0, float(np.max(np.abs(curve))))
        peak = int(np.argmax(curve))
        rising = np.all(np.diff(curve[: peak + 1]) > -tol)
        falling = np.all(np.diff(curve[peak:]) < tol)
        if not (rising and falling):
            failures.append(f"game {i}: welfare curve not single-peaked")
    ok = not failures
    _verdict(5, ok, f"{len(spec_grid)} curves ordered and single-peaked" if ok else "; ".join(failures))
    assert ok, "; ".join(failures)


def test_criterion_06_stationary_laws_match_generator_solves():
    """Fast stationary laws agree with dense generator solves to 1e-9
    across 100+ random draws, in under a minute."""
    rng = np.random.default_rng(271828)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(55):
        spots = int(rng.integers(1, 50))
        capacity = spots + int(rng.integers(0, 200 - spots))
        service = float(rng.uniform(0.004, 0.3))
        lam = float(rng.uniform(0.05, 4.0)) * spots * service
        queue = QueueParams(lam, service, spots, capacity)
        diff = np.max(
            np.abs(
                stationary_plain(queue).probs
                - plain_queue_stationary(lam, service, spots, capacity)
            )
        )
        worst = max(worst, float(diff))
    for _ in range(55):
        spec = random_spec(rng)
        strategy = Strategy(*rng.dirichlet((1.0, 1.0, 1.0)))
        diff = np.max(
            np.abs(
                stationary_costly(spec, strategy).probs
                - gated_queue_stationary(
                    spec.queue.arrival_rate, spec.queue.service_rate,
                    spec.queue.spots, spec.queue.capacity, spec.balk_threshold,
                    strategy.p_observe, strategy.p_balk, strategy.p_join,
                )
            )
        )
        worst = max(worst, float(diff))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-9 and elapsed < 60.0
    _verdict(6, ok, f"110 draws, worst gap {worst:.2e}, {elapsed:.1f}s")
    assert worst < 1e-9
    assert elapsed < 60.0


def test_criterion_07_free_observation_collapses_to_informed_play(spec_grid):
    """With the inspection fee removed, everyone inspects.  The check
    runs on the empty-handed-balking games of the shared grid (where the
    informed cutoff is the optimal policy, so inspecting dominates) and
    tightens the solver's tie tolerance so payoff-identical actions are
    not mixed."""
    failures = []
    checked = 0
    for i, spec in enumerate(spec_grid):
        if spec.outside_option != "zero":
            continue
        checked += 1
        free = GameSpec(
            spec.queue,
            CostParams(
                reward=spec.costs.reward, wait_cost=spec.costs.wait_cost,
                park_cost=spec.costs.park_cost, observe_cost=0.0,
            ),
        )
        result = nash_equilibrium(free, epsilon=1e-9)
        if result.strategy.p_observe < 0.99:
            failures.append(f"game {i}: P_o = {result.strategy.p_observe:.4f}")
    ok = not failures and checked >= 20
    _verdict(7, ok, f"{checked} free-inspection games, all P_o >= 0.99" if ok else "; ".join(failures))
    assert checked >= 20
    assert ok, "; ".join(failures)


def test_criterion_08_congestion_knee_ordering():
    """Funneling all demand into two of three blockfaces moves the
    wait-time knee to much lower system utilization."""
    knees = {}
    for preset in ("fig3-three-source", "fig3-two-source"):
        config = load_config(PRESETS / f"{preset}.yaml")
        scenario = network_scenario(config, config.strategy)
        rows = occupancy_congestion_sweep(
            scenario,
            (config.sweep.lower, config.sweep.upper),
            config.sweep.steps,
            seeds=config.simulation.seeds,
            horizon=config.simulation.horizon,
            warmup=config.simulation.warmup,
        )
        knees[preset] = congestion_knee(rows)
    three, two = knees["fig3-three-source"], knees["fig3-two-source"]
    ok = (
        two is not None and three is not None
        and two < three
        and 0.80 <= three <= 0.95
        and 0.55 <= two <= 0.75
    )
    _verdict(8, ok, f"knees: three-source {three:.1%}, two-source {two:.1%}")
    assert ok, f"three-source {three}, two-source {two}"


def test_criterion_09_demand_sweep_utilization_and_balking_onset():
    """Across the demand sweep the selfish curb is never emptier than
    the planner's (paired seeds make the low-demand ties exact), and
    selfish balking switches on in the 0.7-0.9 load band."""
    costs = CostParams(95.0, 1.5, 0.05, 3.85, 0.962)
    seeds = range(3)
    onset = None
    violations = []
    for lam in np.linspace(0.025, 0.225, 17):
        queue = QueueParams(float(lam), MU, 30, 100)
        spec = GameSpec(queue, costs, "offstreet")
        rho = queue.traffic_intensity
        eq = nash_equilibrium(spec)
        planner = socially_optimal_strategy(spec, resolution=100)
        if onset is None and eq.strategy.p_balk > 0.01:
            onset = rho
        utils = {}
        for kind, strategy in (("nash", eq.strategy), ("social", planner.strategy)):
            scenario = NetworkScenario(
                blockfaces=FACES, streets=STREETS, sources=("b0", "b1", "b2"),
                arrival_rate=float(lam), service_rate=MU, strategy=strategy,
                balk_threshold=spec.balk_threshold, capacity=100,
                costs=costs, outside_option="offstreet",
            )
            utils[kind] = float(
                np.mean([run_simulation(scenario, 2e4, seed=s).utilization for s in seeds])
            )
        if utils["nash"] < utils["social"]:
            violations.append(f"rho={rho:.2f}: {utils['nash']:.3f} < {utils['social']:.3f}")
    ok = not violations and onset is not None and 0.7 <= onset <= 0.9
    _verdict(
        9, ok,
        f"selfish >= planner at all 17 points, balking onset at load {onset:.2f}"
        if ok else "; ".join(violations) or f"onset {onset}",
    )
    assert not violations, "; ".join(violations)
    assert onset is not None and 0.7 <= onset <= 0.9, f"onset {onset}"


def test_criterion_10_simulate_is_byte_deterministic(tmp_path):
    """Identical config and seeds produce byte-identical CSV."""
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["simulate", "--preset", "table1-row1", "--kind", "nash", "--seeds", "2"]
    assert main(args + ["--out", str(first)]) == 0
    assert main(args + ["--out", str(second)]) == 0
    ok = first.read_bytes() == second.read_bytes()
    _verdict(10, ok, "repeated runs byte-identical")
    assert ok
