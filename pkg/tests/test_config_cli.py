"""Scenario files and the command-line front end.

Golden CSVs under ``tests/golden/`` lock the output schemas: column order,
nine-significant-digit floats, and the exact random streams.
"""

import subprocess
import sys
from pathlib import Path

import pytest
import yaml

from parkqueue import (
    ConfigurationError,
    Strategy,
    game_spec,
    load_config,
    network_scenario,
    parse_config,
    scenario_id,
    serialize_config,
)
from parkqueue.cli import main

GOLDEN = Path(__file__).parent / "golden"
PRESETS = Path(__file__).parents[1] / "src" / "parkqueue" / "presets"


def base_mapping(**overrides):
    raw = {
        "name": "unit",
        "queue": {"arrival_rate": 0.1, "service_rate": 0.05, "spots": 6, "capacity": 20},
        "costs": {"reward": 20.0, "wait_cost": 1.0, "park_cost": 0.01, "observe_cost": 1.0},
    }
    raw.update(overrides)
    return raw


class TestParsing:
    def test_minimal_config_gets_defaults(self):
        config = parse_config({"queue": {"arrival_rate": 0.1, "service_rate": 0.05, "spots": 6}})
        assert config.queue.capacity == 100
        assert [f.spots for f in config.blockfaces] == [2, 2, 2]
        assert len(config.streets) == 6  # fully connected triangle
        assert config.sources == ("b0", "b1", "b2")
        assert config.solver.epsilon == 1e-4
        assert config.simulation.seeds == tuple(range(10))

    def test_uneven_default_split(self):
        config = parse_config({"queue": {"arrival_rate": 0.1, "service_rate": 0.05, "spots": 7}})
        assert [f.spots for f in config.blockfaces] == [3, 2, 2]

    def test_missing_queue_section(self):
        with pytest.raises(ConfigurationError, match="queue section is required"):
            parse_config({"costs": {"reward": 1.0, "wait_cost": 1.0}})

    def test_missing_service_rate_is_named(self):
        raw = base_mapping()
        del raw["queue"]["service_rate"]
        with pytest.raises(ConfigurationError, match="service_rate"):
            parse_config(raw)

    def test_unknown_key_is_named(self):
        with pytest.raises(ConfigurationError, match="wait_price"):
            parse_config(base_mapping(costs={"reward": 20.0, "wait_price": 1.0}))

    def test_network_spots_must_match_queue(self):
        raw = base_mapping(
            network={
                "blockfaces": [{"id": "a", "spots": 2}, {"id": "b", "spots": 2}],
                "streets": [
                    {"origin": "a", "destination": "b"},
                    {"origin": "b", "destination": "a"},
                ],
            }
        )
        with pytest.raises(ConfigurationError, match="queue.spots"):
            parse_config(raw)

    def test_offstreet_requires_price(self):
        with pytest.raises(ConfigurationError, match="offstreet_cost"):
            parse_config(base_mapping(outside_option="offstreet"))

    def test_bad_strategy_rejected(self):
        with pytest.raises(ConfigurationError, match="strategy"):
            parse_config(base_mapping(strategy=[0.5, 0.5]))
        with pytest.raises(ConfigurationError, match="strategy"):
            parse_config(base_mapping(strategy=[0.9, 0.9, -0.8]))

    def test_sweep_validation(self):
        with pytest.raises(ConfigurationError, match="sweep"):
            parse_config(base_mapping(sweep={"parameter": "reward", "range": [1, 2], "steps": 2}))
        with pytest.raises(ConfigurationError, match="sweep"):
            parse_config(base_mapping(sweep={"range": [2.0, 1.0], "steps": 2}))
        with pytest.raises(ConfigurationError, match="steps"):
            parse_config(base_mapping(sweep={"range": [1.0, 2.0], "steps": 1}))

    def test_seed_count_shorthand(self):
        config = parse_config(base_mapping(simulation={"seeds": 4}))
        assert config.simulation.seeds == (0, 1, 2, 3)


class TestRoundTrip:
    @pytest.mark.parametrize("preset", sorted(p.name for p in PRESETS.glob("*.yaml")))
    def test_presets_round_trip_exactly(self, preset):
        config = load_config(PRESETS / preset)
        again = parse_config(yaml.safe_load(serialize_config(config)))
        assert again == config
        assert scenario_id(again) == scenario_id(config)

    def test_formatting_does_not_change_identity(self):
        """Spelling out defaults or reordering keys keeps the scenario id."""
        sparse = parse_config({"queue": {"arrival_rate": 0.1, "service_rate": 0.05, "spots": 6}})
        explicit = parse_config(
            {
                "queue": {
                    "capacity": 100, "spots": 6, "service_rate": 0.05, "arrival_rate": 0.1,
                },
                "outside_option": "zero",
                "name": "scenario",
                "solver": {"epsilon": 1.0e-4},
            }
        )
        assert scenario_id(sparse) == scenario_id(explicit)

    def test_parameter_change_changes_identity(self):
        a = parse_config(base_mapping())
        b_raw = base_mapping()
        b_raw["queue"]["arrival_rate"] = 0.11
        assert scenario_id(a) != scenario_id(parse_config(b_raw))


class TestBuilders:
    def test_game_spec_needs_costs(self):
        config = parse_config({"queue": {"arrival_rate": 0.1, "service_rate": 0.05, "spots": 6}})
        with pytest.raises(ConfigurationError, match="costs"):
            game_spec(config)

    def test_threshold_fallbacks(self):
        with_costs = parse_config(base_mapping())
        assert network_scenario(with_costs, Strategy(0, 0, 1)).balk_threshold == 5
        explicit = parse_config(base_mapping(balk_threshold=3))
        assert network_scenario(explicit, Strategy(0, 0, 1)).balk_threshold == 3
        bare = parse_config({"queue": {"arrival_rate": 0.1, "service_rate": 0.05, "spots": 6}})
        assert network_scenario(bare, Strategy(0, 0, 1)).balk_threshold == 100

    @pytest.mark.parametrize("preset", sorted(p.name for p in PRESETS.glob("*.yaml")))
    def test_presets_build_runnable_scenarios(self, preset):
        config = load_config(PRESETS / preset)
        strategy = config.strategy or Strategy(0.0, 1.0, 0.0)
        scenario = network_scenario(config, strategy)
        assert scenario.total_spots == config.queue.spots
        if config.costs is not None:
            assert game_spec(config).balk_threshold >= 1


class TestCliPlumbing:
    def test_requires_exactly_one_source(self, capsys):
        assert main(["analyze"]) == 2
        assert "--config or --preset" in capsys.readouterr().err

    def test_missing_file(self, capsys):
        assert main(["analyze", "--config", "/nonexistent.yaml"]) == 2

    def test_unknown_preset_lists_known_ones(self, capsys):
        assert main(["analyze", "--preset", "nope"]) == 2
        assert "table1-row1" in capsys.readouterr().err

    def test_malformed_config_names_field(self, tmp_path, capsys):
        bad = tmp_path / "bad.yaml"
        bad.write_text("name: broken\nqueue:\n  arrival_rate: 0.1\n  spots: 6\n")
        assert main(["analyze", "--config", str(bad)]) == 2
        assert "service_rate" in capsys.readouterr().err

    def test_preset_dir_override(self, tmp_path, monkeypatch, capsys):
        custom = tmp_path / "mine.yaml"
        custom.write_text(serialize_config(parse_config(base_mapping(name="mine"))))
        monkeypatch.setenv("PARKQUEUE_PRESETS", str(tmp_path))
        assert main(["analyze", "--preset", "mine"]) == 0
        assert "scenario mine" in capsys.readouterr().out

    def test_console_script_entry_point(self):
        proc = subprocess.run(
            [sys.executable, "-m", "parkqueue.cli", "analyze", "--preset", "fig4-pricing"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert "balking level: 11" in proc.stdout


class TestAnalyzeCommand:
    def test_report_contents(self, capsys):
        assert main(["analyze", "--preset", "fig4-pricing"]) == 0
        out = capsys.readouterr().out
        assert "balking level: 11" in out
        assert "socially optimal level: 6" in out
        assert "fee interval inducing optimal level: (0.275, 0.325]" in out
        assert "welfare at capped level 4" in out

    def test_welfare_curve_csv(self, tmp_path, capsys):
        out = tmp_path / "curve.csv"
        assert main(["analyze", "--preset", "fig4-pricing", "--out", str(out)]) == 0
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "scenario_id,level,welfare"
        assert len(lines) == 13  # header + levels 0..11


class TestEquilibriumCommand:
    def test_golden_nash_row(self, tmp_path):
        out = tmp_path / "eq.csv"
        code = main(
            ["equilibrium", "--config", str(GOLDEN / "small-game.yaml"),
             "--kind", "nash", "--out", str(out)]
        )
        assert code == 0
        assert out.read_bytes() == (GOLDEN / "equilibrium-nash.csv").read_bytes()

    def test_nonconvergence_is_data_not_failure(self, tmp_path, capsys):
        raw = yaml.safe_load((GOLDEN / "small-game.yaml").read_text())
        raw["solver"] = {"max_iters": 2}
        # A scenario with a mixed equilibrium cannot settle in two passes.
        raw["costs"]["observe_cost"] = 0.05
        raw["queue"]["arrival_rate"] = 0.35
        stubborn = tmp_path / "stubborn.yaml"
        stubborn.write_text(yaml.safe_dump(raw))
        assert main(["equilibrium", "--config", str(stubborn)]) == 0
        csv_out = capsys.readouterr().out.splitlines()
        assert csv_out[0].endswith("converged")
        assert csv_out[1].endswith("false")


class TestSimulateCommand:
    def test_golden_rows(self, tmp_path):
        out = tmp_path / "sim.csv"
        code = main(
            ["simulate", "--config", str(GOLDEN / "small-game.yaml"),
             "--kind", "nash", "--out", str(out)]
        )
        assert code == 0
        assert out.read_bytes() == (GOLDEN / "simulate-fixed.csv").read_bytes()

    def test_byte_identical_reruns(self, tmp_path):
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["simulate", "--config", str(GOLDEN / "small-game.yaml"), "--kind", "nash"]
        assert main(args + ["--out", str(first)]) == 0
        assert main(args + ["--out", str(second)]) == 0
        assert first.read_bytes() == second.read_bytes()

    def test_seed_flag_overrides_config(self, capsys):
        assert main(
            ["simulate", "--config", str(GOLDEN / "small-game.yaml"),
             "--kind", "nash", "--seeds", "3"]
        ) == 0
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 5  # header, three seeds, aggregate
        assert lines[-1].split(",")[2] == "mean"


class TestSweepCommand:
    def test_requires_sweep_section(self, capsys):
        assert main(["sweep", "--config", str(GOLDEN / "small-game.yaml")]) == 2
        assert "sweep" in capsys.readouterr().err

    def test_single_point_sweep_matches_simulate(self, tmp_path, capsys):
        raw = yaml.safe_load((GOLDEN / "small-game.yaml").read_text())
        raw["strategy"] = [0.0, 0.0, 1.0]
        raw["sweep"] = {"parameter": "arrival_rate", "range": [0.1, 0.1], "steps": 1}
        path = tmp_path / "point.yaml"
        path.write_text(yaml.safe_dump(raw))

        assert main(["sweep", "--config", str(path)]) == 0
        sweep_lines = capsys.readouterr().out.splitlines()
        assert main(["simulate", "--config", str(path)]) == 0
        sim_lines = capsys.readouterr().out.splitlines()

        sweep_vals = {
            parts[4]: parts[5]
            for parts in (line.split(",") for line in sweep_lines[1:])
            if parts[4] in ("utilization", "avg_wait", "welfare_rate")
        }
        aggregate = sim_lines[-1].split(",")
        assert sweep_vals["utilization"] == aggregate[3]
        assert sweep_vals["avg_wait"] == aggregate[4]
        assert sweep_vals["welfare_rate"] == aggregate[5]

    def test_fixed_strategy_sweep_structure(self, tmp_path, capsys):
        raw = yaml.safe_load((GOLDEN / "small-game.yaml").read_text())
        raw["strategy"] = [0.0, 0.0, 1.0]
        raw["simulation"]["seeds"] = [0, 1]
        raw["sweep"] = {"parameter": "arrival_rate", "range": [0.05, 0.15], "steps": 3}
        path = tmp_path / "sweep.yaml"
        path.write_text(yaml.safe_dump(raw))
        assert main(["sweep", "--config", str(path)]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "scenario_id,sweep_parameter,sweep_value,kind,metric,value,stderr"
        # three points x (P_o, P_b, P_j, utilization, avg_wait, welfare_rate)
        assert len(lines) == 1 + 3 * 6
        assert all(line.split(",")[3] == "fixed" for line in lines[1:])
        values = [line.split(",")[2] for line in lines[1:]]
        assert values == sorted(values, key=float)
