import json
import os

import pytest

from mdpvol import ConfigError
from mdpvol.cli import main
from mdpvol.config import (DEFAULT_SEED, build_model, build_regime,
                           parse_config, print_config, subseed)
from mdpvol.reporting import CSV_HEADERS


class TestParseConfig:
    def test_minimal_heston_mc(self):
        config = parse_config(json.dumps({
            "experiment": "mc",
            "model": {"kind": "heston", "kappa": 2.0, "theta": 0.1, "xi": 0.5,
                      "rho": -0.5, "x0": 0.0, "y0": 0.1},
            "params": {"t": 0.01, "k": 0.2, "paths": 1000, "steps": 10},
        }))
        assert config.experiment == "mc"
        assert build_model(config).kind == "heston"

    def test_empty_document_uses_defaults(self):
        config = parse_config("{}")
        assert config.seed == DEFAULT_SEED
        assert config.model["kappa"] == 2.0
        assert build_regime(config).beta == 0.25

    def test_beta_out_of_range(self):
        with pytest.raises(ConfigError) as info:
            parse_config(json.dumps({"regime": {"beta": 0.7}}))
        assert any("beta" in v for v in info.value.violations)

    def test_unknown_key_suggestion(self):
        with pytest.raises(ConfigError) as info:
            parse_config(json.dumps({"model": {"kapa": 2.0}}))
        assert any("did you mean 'kappa'" in v for v in info.value.violations)

    def test_all_violations_reported(self):
        with pytest.raises(ConfigError) as info:
            parse_config(json.dumps({
                "model": {"kappa": -1.0, "rho": 3.0},
                "regime": {"beta": 0.9},
            }))
        text = " | ".join(info.value.violations)
        assert "kappa" in text and "rho" in text and "beta" in text

    def test_parse_error_carries_position(self):
        with pytest.raises(ConfigError) as info:
            parse_config("{\n  \"experiment\": \n}")
        assert "line" in info.value.violations[0]

    def test_round_trip(self):
        config = parse_config(json.dumps({
            "experiment": "ldp", "seed": 7,
            "model": {"kind": "heston", "kappa": 1.5, "theta": 0.2, "xi": 0.4,
                      "rho": 0.1, "x0": 0.0, "y0": 0.2},
            "regime": {"beta": 0.3, "gamma": 1.0, "zeta_c": 0.0},
            "params": {"n_points": 11},
        }))
        assert parse_config(print_config(config)) == config

    def test_subseed_stable_and_label_sensitive(self):
        assert subseed(1, "a") == subseed(1, "a")
        assert subseed(1, "a") != subseed(1, "b")
        assert subseed(1, "a") != subseed(2, "a")


class TestCliRuns:
    @pytest.mark.parametrize("name", ["invariant", "poisson", "rate", "ldp",
                                      "asymptotics", "compare"])
    def test_subcommand_headers(self, tmp_path, name):
        code = main([name, "--out", str(tmp_path)])
        assert code == 0
        csv_path = tmp_path / f"{name}.csv"
        with open(csv_path, encoding="utf-8") as handle:
            header = handle.readline().strip()
        assert header == ",".join(CSV_HEADERS[name])

    def test_mc_flags(self, tmp_path):
        code = main(["mc", "--out", str(tmp_path), "--paths", "2000",
                     "--steps", "10", "--t", "0.01", "--k", "0.2",
                     "--seed", "5"])
        assert code == 0
        assert (tmp_path / "mc.csv").exists()

    def test_deterministic_outputs(self, tmp_path):
        for sub in ("invariant", "poisson", "rate", "ldp", "asymptotics",
                    "compare"):
            a_dir, b_dir = tmp_path / sub / "a", tmp_path / sub / "b"
            assert main([sub, "--out", str(a_dir)]) == 0
            assert main([sub, "--out", str(b_dir)]) == 0
            for fname in os.listdir(a_dir):
                with open(a_dir / fname, "rb") as fa, open(b_dir / fname, "rb") as fb:
                    assert fa.read() == fb.read(), f"{sub}/{fname} differs"

    def test_mc_deterministic(self, tmp_path):
        args = ["mc", "--paths", "5000", "--steps", "10", "--t", "0.01",
                "--k", "0.2", "--seed", "3"]
        assert main(args + ["--out", str(tmp_path / "a")]) == 0
        assert main(args + ["--out", str(tmp_path / "b")]) == 0
        with open(tmp_path / "a" / "mc.csv", "rb") as fa, \
                open(tmp_path / "b" / "mc.csv", "rb") as fb:
            assert fa.read() == fb.read()

    def test_invalid_config_exit_code(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"regime": {"beta": 0.9}}))
        assert main(["rate", "--config", str(bad), "--out", str(tmp_path)]) == 1

    def test_unparseable_config_exit_code(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{ not json }")
        assert main(["rate", "--config", str(bad), "--out", str(tmp_path)]) == 1

    def test_domain_error_exit_code(self, tmp_path):
        # share-measure tilt undefined: kappa - rho xi <= 0 surfaces as
        # a validation failure from the rate pipeline
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "experiment": "rate",
            "model": {"kind": "heston", "kappa": 0.6, "theta": 0.1, "xi": 0.9,
                      "rho": 0.9, "x0": 0.0, "y0": 0.1},
        }))
        assert main(["rate", "--config", str(cfg), "--out", str(tmp_path)]) == 1


class TestCompareOutputs:
    def test_minima_match_at_center(self, tmp_path):
        assert main(["compare", "--out", str(tmp_path)]) == 0
        rows = {}
        with open(tmp_path / "compare.csv", encoding="utf-8") as handle:
            header = handle.readline().strip().split(",")
            for line in handle:
                cells = line.strip().split(",")
                rows[float(cells[0])] = dict(zip(header, map(float, cells)))
        center = min(rows, key=lambda x: abs(x + 0.05))
        assert abs(center + 0.05) < 1e-12
        assert rows[center]["abs_diff"] <= 1e-12

    def test_summary_records_passing_variant(self, tmp_path):
        assert main(["compare", "--out", str(tmp_path)]) == 0
        with open(tmp_path / "compare_summary.json", encoding="utf-8") as handle:
            summary = json.load(handle)
        assert summary["passing_variant"] == "standard"
        assert summary["curvature_identity_residual"]["standard"] <= 1e-3

    def test_cubic_growth_of_difference_near_minimum(self, tmp_path):
        # under the variant satisfying the curvature identity, the gap between
        # the rate function and the matched quadratic is third order
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "experiment": "compare",
            "params": {"d_variant": "standard", "n_points": 161,
                       "x_min": -0.13, "x_max": 0.03},
        }))
        assert main(["compare", "--config", str(cfg), "--out", str(tmp_path)]) == 0
        xs, diffs = [], []
        with open(tmp_path / "compare.csv", encoding="utf-8") as handle:
            handle.readline()
            for line in handle:
                cells = line.strip().split(",")
                xs.append(float(cells[0]))
                diffs.append(float(cells[3]))
        import numpy as np

        xs = np.asarray(xs) + 0.05
        diffs = np.asarray(diffs)
        window = (np.abs(xs) > 0.01) & (np.abs(xs) < 0.06) & (diffs > 0)
        slope = np.polyfit(np.log(np.abs(xs[window])), np.log(diffs[window]), 1)[0]
        assert slope >= 2.7
