import copy
import math
from pathlib import Path

import pytest
import yaml

from mdiqkd.cli import main
from mdiqkd.config import ConfigError, dump_run_config, from_dict, load_run_config, to_dict
from mdiqkd.datasets import load_reference_config

DATA_DIR = Path(__file__).resolve().parents[1] / "src" / "mdiqkd" / "data"


@pytest.fixture()
def reference_doc():
    return yaml.safe_load((DATA_DIR / "reference_config.yaml").read_text())


class TestConfigSchema:
    def test_reference_config_loads(self):
        run = load_reference_config()
        assert run.seed == 20130704
        central = run.uncertain.central()
        assert central.detector.eta == 0.145
        assert central.visibility == 0.94
        assert central.t_alice == central.t_bob == pytest.approx(10 ** (-13.6 / 20))

    def test_round_trip_is_semantically_identical(self, tmp_path, reference_doc):
        first = from_dict(reference_doc)
        path = tmp_path / "roundtrip.yaml"
        dump_run_config(first, path)
        second = load_run_config(path)
        assert second == first

    def test_unknown_key_rejected(self, reference_doc):
        doc = copy.deepcopy(reference_doc)
        doc["detectors"]["dark_rate"] = 1e-5
        with pytest.raises(ConfigError, match="unknown key.*dark_rate"):
            from_dict(doc)

    def test_missing_section_rejected(self, reference_doc):
        doc = copy.deepcopy(reference_doc)
        del doc["interference"]
        with pytest.raises(ConfigError, match="interference"):
            from_dict(doc)

    def test_band_shorthand_accepted(self, reference_doc):
        doc = copy.deepcopy(reference_doc)
        doc["interference"]["visibility"] = 0.9
        run = from_dict(doc)
        assert run.uncertain.visibility.central == 0.9
        assert run.uncertain.visibility.half_width == 0.0

    def test_explicit_gate_dark_rate_must_be_consistent(self, reference_doc):
        doc = copy.deepcopy(reference_doc)
        doc["detectors"]["p_dark_gate"] = 1.83e-5 / 4.97e-2
        from_dict(doc)  # consistent value accepted
        doc["detectors"]["p_dark_gate"] = 9e-4
        with pytest.raises(ConfigError, match="inconsistent"):
            from_dict(doc)

    def test_channel_forms_are_exclusive(self, reference_doc):
        doc = copy.deepcopy(reference_doc)
        doc["channels"] = {"total_loss_db": 10.0, "transmission_alice": 0.3}
        with pytest.raises(ConfigError, match="not both"):
            from_dict(doc)
        doc["channels"] = {"transmission_alice": 0.3, "transmission_bob": 0.4}
        run = from_dict(doc)
        assert run.uncertain.t_alice == 0.3
        assert run.uncertain.t_bob == 0.4

    def test_field_path_in_errors(self, reference_doc):
        doc = copy.deepcopy(reference_doc)
        doc["sources"]["alice"]["states"]["z0"]["m"] = {"value": 1.4}
        with pytest.raises(ConfigError, match=r"sources\.alice"):
            from_dict(doc)

    def test_grid_section(self, reference_doc, tmp_path):
        doc = copy.deepcopy(reference_doc)
        doc["grid"] = {"distance_min_km": 50.0, "distance_max_km": 100.0, "distance_step_km": 50.0}
        run = from_dict(doc)
        assert run.grid.distance_min_km == 50.0
        assert run.grid.intensity_step == 0.01  # untouched default
        path = tmp_path / "grid.yaml"
        dump_run_config(run, path)
        assert load_run_config(path) == run
        doc["grid"]["step"] = 1
        with pytest.raises(ConfigError, match="unknown key.*step"):
            from_dict(doc)

    def test_serialization_structure(self, reference_doc):
        run = from_dict(reference_doc)
        doc = to_dict(run)
        assert doc["detectors"]["alpha"] == 0.179
        assert doc["sources"]["bob"]["states"]["x_minus"]["phi"]["value"] == pytest.approx(
            math.pi - 0.075
        )


class TestBenchmarkDataset:
    def test_row_count_and_losses(self, benchmark_rows):
        assert len(benchmark_rows) == 15
        assert sorted({row.loss_db for row in benchmark_rows}) == [9.0, 13.6, 18.2, 22.7, 27.2]

    def test_annotated_outlier_kept_verbatim(self, benchmark_rows):
        flagged = [row for row in benchmark_rows if row.note]
        assert len(flagged) == 1
        row = flagged[0]
        assert row.fiber == "deployed" and row.mu == 0.100
        assert row.values["gain_z"] == 7.3e-7


class TestCli:
    def test_predict_deterministic_csv(self, tmp_path):
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (out1, out2):
            code = main(["predict", "--samples", "80", "--seed", "5", "--out", str(out), "--no-plot"])
            assert code == 0
        assert out1.read_bytes() == out2.read_bytes()
        header = out1.read_text().splitlines()[0]
        assert header == "basis,gain,error_rate,gain_low,gain_high,error_low,error_high"

    def test_predict_renders_figure(self, tmp_path):
        out = tmp_path / "p.csv"
        assert main(["predict", "--samples", "30", "--out", str(out)]) == 0
        assert (tmp_path / "p.png").exists()

    def test_bad_config_exits_2(self, tmp_path):
        bad = tmp_path / "bad.yaml"
        bad.write_text("sources: {}\n")
        assert main(["predict", "--config", str(bad), "--out", str(tmp_path / "x.csv")]) == 2

    def test_compare_flags_shifted_value(self, tmp_path, benchmark_rows):
        # A dataset with one artificially shifted error rate must come back
        # out-of-band and set the exit code.
        source = (DATA_DIR / "benchmark_observations.csv").read_text().splitlines()
        header, first = source[0], source[1].split(",")
        ez_col = header.split(",").index("error_z")
        first[ez_col] = str(float(first[ez_col]) + 0.1)
        shifted = tmp_path / "shifted.csv"
        shifted.write_text("\n".join([header, ",".join(first)]) + "\n")
        out = tmp_path / "cmp.csv"
        code = main(
            ["compare", "--dataset", str(shifted), "--samples", "60", "--out", str(out), "--no-plot"]
        )
        assert code == 1
        lines = out.read_text().splitlines()
        bad = [l for l in lines if ",error_z," in l]
        assert len(bad) == 1 and ",false," in bad[0]

    def test_compare_full_dataset_runs(self, tmp_path):
        out = tmp_path / "cmp.csv"
        code = main(["compare", "--samples", "40", "--out", str(out), "--no-plot"])
        assert code in (0, 1)
        lines = out.read_text().splitlines()
        assert len(lines) == 1 + 15 * 4
        assert (tmp_path / "cmp.png").exists() is False

    def test_optimize_rejects_unknown_scenario(self, tmp_path):
        code = main(
            ["optimize", "--scenario", "warpdrive", "--out", str(tmp_path / "o.csv"), "--no-plot"]
        )
        assert code == 2

    def test_optimize_writes_table(self, tmp_path):
        out = tmp_path / "o.csv"
        code = main(
            [
                "optimize",
                "--decoy-min", "0.05", "--decoy-max", "0.05",
                "--intensity-step", "0.05",
                "--distance-min-km", "50", "--distance-max-km", "100", "--distance-step-km", "50",
                "--out", str(out), "--no-plot",
            ]
        )
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "loss_db,distance_km,tau_s,tau_d,secret_key_rate,raw_rate,truncation_warning"
        assert len(lines) == 3

    def test_optimize_uses_config_grid_with_flag_override(self, tmp_path, reference_doc):
        doc = copy.deepcopy(reference_doc)
        doc["grid"] = {
            "decoy_min": 0.05,
            "decoy_max": 0.05,
            "intensity_step": 0.05,
            "distance_min_km": 50.0,
            "distance_max_km": 100.0,
            "distance_step_km": 50.0,
        }
        cfg = tmp_path / "with_grid.yaml"
        cfg.write_text(yaml.safe_dump(doc))
        out = tmp_path / "o.csv"
        code = main(
            ["optimize", "--config", str(cfg), "--distance-max-km", "50", "--out", str(out), "--no-plot"]
        )
        assert code == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 2  # the flag shrank the config's distance range

    def test_fit_afterpulse_on_bundled_sample(self, tmp_path):
        out = tmp_path / "fit.csv"
        code = main(
            ["fit-afterpulse", str(DATA_DIR / "afterpulse_sample.csv"), "--out", str(out), "--no-plot"]
        )
        assert code == 0
        header, values = out.read_text().splitlines()
        assert header == "alpha,p_geo,bin_gate_ratio,residual_rms,n_points"
        alpha = float(values.split(",")[0])
        assert alpha == pytest.approx(0.179, rel=0.1)

    def test_fit_afterpulse_too_few_rows(self, tmp_path):
        short = tmp_path / "short.csv"
        short.write_text("mu_avg,p_afterpulse_bin\n0.1,1e-5\n0.2,2e-5\n")
        assert main(["fit-afterpulse", str(short), "--out", str(tmp_path / "f.csv")]) == 2

    def test_usage_error_exit_code(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["optimize", "--mode", "telepathy"])
        assert exc.value.code == 2
