import json

import pytest

from ropuf import cli, ro


def write_config(path, n_chips=3, samples=10, voltages=(1.3,), seed=5,
                 coupling=None, **ro_overrides):
    ro_params = {
        "nominal_period_s": 1e-9,
        "process_sigma": 0.04,
        "jitter_sigma": 0.0003,
        "voltage_sensitivity_per_v": 0.5,
        "voltage_sensitivity_sigma_per_v": 0.15,
        "reference_voltage_v": 1.3,
    }
    ro_params.update(ro_overrides)
    config = {
        "ro": ro_params,
        "campaign": {
            "n_chips": n_chips,
            "pairs_per_id": 2,
            "word_length": 16,
            "samples_per_chip": samples,
            "enroll_repetitions": 9,
            "voltages_v": list(voltages),
            "master_seed": seed,
        },
        "coupling": coupling or {"mode": "none"},
        "flags": {"post_bch": False, "emit_histograms": True, "emit_sweep": False},
    }
    path.write_text(json.dumps(config, indent=2))
    return config


class TestSimulate:
    def test_minimal_run_row_count(self, tmp_path, capsys):
        cfg = tmp_path / "run.json"
        write_config(cfg, n_chips=2, samples=10, voltages=(1.25, 1.3))
        assert cli.main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
        rows = (tmp_path / "o" / "dataset.csv").read_text().strip().splitlines()
        assert len(rows) == 1 + 2 * 2 * 10  # header + chips*voltages*samples

    def test_rerun_is_byte_identical(self, tmp_path):
        cfg = tmp_path / "run.json"
        write_config(cfg)
        cli.main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "a")])
        cli.main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "b")])
        for name in ("dataset.csv", "dataset.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_bad_id_length_names_field(self, tmp_path, capsys):
        cfg = tmp_path / "run.json"
        config = write_config(cfg)
        config["campaign"]["id_length"] = 31
        cfg.write_text(json.dumps(config))
        assert cli.main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
        assert "id_length" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path, capsys):
        rc = cli.main(["simulate", "--config", str(tmp_path / "nope.json"),
                       "--out", str(tmp_path / "o")])
        assert rc == 2

    def test_seed_override_changes_dataset(self, tmp_path):
        cfg = tmp_path / "run.json"
        write_config(cfg)
        cli.main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "a")])
        cli.main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "b"),
                  "--seed", "321"])
        assert (tmp_path / "a" / "dataset.csv").read_bytes() != \
            (tmp_path / "b" / "dataset.csv").read_bytes()


class TestMetrics:
    def _simulated(self, tmp_path, **kwargs):
        cfg = tmp_path / "run.json"
        write_config(cfg, **kwargs)
        out = tmp_path / "sim"
        assert cli.main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
        return out / "dataset.csv"

    def test_identity_dataset_percentages(self, tmp_path, capsys):
        # zero variation: clone chips, zero jitter
        csv_path = self._simulated(tmp_path, process_sigma=0.0, jitter_sigma=0.0,
                                   voltage_sensitivity_sigma_per_v=0.0)
        out = tmp_path / "m"
        assert cli.main(["metrics", str(csv_path), "--out", str(out)]) == 0
        text = capsys.readouterr().out
        assert "Uniqueness     0.00" in text
        assert "Reliability  100.00" in text
        report = json.loads((out / "report.json").read_text())
        assert report["uniqueness_pct"] == 0.0
        assert report["bch_stage"] == "raw"
        assert (out / "histograms.csv").exists()

    def test_golden_small_dataset_matches_oracle(self, tmp_path):
        import sys
        sys.path.insert(0, str(tmp_path.parent))
        from oracles import uniqueness_formula
        csv_path = self._simulated(tmp_path, n_chips=4, samples=6)
        out = tmp_path / "m"
        assert cli.main(["metrics", str(csv_path), "--out", str(out)]) == 0
        report = json.loads((out / "report.json").read_text())
        sidecar = json.loads((csv_path.with_suffix(".json")).read_text())
        refs = []
        for c in sorted(sidecar["references"], key=int):
            hexword = sidecar["references"][c]["1.3"]
            value = int(hexword, 16)
            refs.append([(value >> (32 - 1 - i)) & 1 for i in range(32)])
        assert report["uniqueness_pct"] == pytest.approx(
            uniqueness_formula(refs, 32), rel=1e-12)

    def test_missing_dataset_is_data_error(self, tmp_path):
        assert cli.main(["metrics", str(tmp_path / "no.csv"), "--out", str(tmp_path)]) == 3

    def test_post_bch_flag(self, tmp_path):
        csv_path = self._simulated(tmp_path)
        out = tmp_path / "m"
        assert cli.main(["metrics", str(csv_path), "--out", str(out), "--post-bch"]) == 0
        report = json.loads((out / "report.json").read_text())
        assert report["bch_stage"] == "post_bch"
        assert report["id_length"] == 31


class TestSweep:
    def test_emits_series_and_fit(self, tmp_path, capsys):
        cfg = tmp_path / "run.json"
        write_config(cfg, n_chips=4, samples=15, voltages=(1.25, 1.3, 1.35))
        out = tmp_path / "s"
        assert cli.main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
        lines = (out / "sweep.csv").read_text().strip().splitlines()
        assert lines[0] == "delta_v,abs_delta_v,hd_shift"
        assert len(lines) == 4
        fit = json.loads((out / "sweep.json").read_text())["fit_vs_abs_dv"]
        assert set(fit) == {"slope", "intercept", "r2"}

    def test_single_voltage_rejected(self, tmp_path):
        cfg = tmp_path / "run.json"
        write_config(cfg, voltages=(1.3,))
        assert cli.main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "s")]) == 2


class TestBchSelftest:
    def test_fresh_build_passes(self, capsys):
        assert cli.main(["bch-selftest", "--trials", "200"]) == 0
        out = capsys.readouterr().out
        assert "FAIL" not in out
        assert out.count("PASS") == 7

    def test_tampered_generator_exits_4(self, monkeypatch, capsys):
        from ropuf import bch
        monkeypatch.setattr(bch, "GENERATOR", bch.GENERATOR ^ (1 << 3))
        assert cli.main(["bch-selftest", "--trials", "10"]) == 4
        assert "FAIL" in capsys.readouterr().out


class TestCost:
    def test_default_table(self, capsys):
        assert cli.main(["cost"]) == 0
        out = capsys.readouterr().out
        assert "2000" in out and out.index("2000") < out.index("8")
        assert "3240" in out and "2048" in out

    def test_doubling_bits_doubles_cycles(self, capsys):
        cli.main(["cost", "--bits", "256", "--json"])
        data = json.loads(capsys.readouterr().out)
        assert data["waveform_ro_puf"]["clock_cycles"] == 16
        assert data["conventional_ro_puf"]["clock_cycles"] == 4096

    def test_free_ff_override(self, capsys):
        cli.main(["cost", "--per-ff", "0", "--json"])
        data = json.loads(capsys.readouterr().out)
        assert data["waveform_ro_puf"]["transistors"] == 80

    def test_negative_override_is_config_error(self, capsys):
        assert cli.main(["cost", "--per-ff", "-3"]) == 2


class TestRunConfig:
    def test_round_trip_identical_structure(self, tmp_path):
        cfg_path = tmp_path / "run.json"
        write_config(cfg_path, coupling={"mode": "capacitive", "strength": 0.7})
        parsed = cli.load_run_config(cfg_path)
        again = cli.RunConfig.from_json_dict(parsed.to_json_dict())
        assert again == parsed

    def test_capacitive_defaults_documented_strength(self):
        rc = cli.RunConfig.from_json_dict({
            "ro": json.loads(json.dumps({
                "nominal_period_s": 1e-9, "process_sigma": 0.04,
                "jitter_sigma": 0.0003, "voltage_sensitivity_per_v": 0.5,
                "voltage_sensitivity_sigma_per_v": 0.15, "reference_voltage_v": 1.3})),
            "campaign": {"n_chips": 2, "pairs_per_id": 2, "word_length": 16,
                         "samples_per_chip": 1, "enroll_repetitions": 1,
                         "voltages_v": [1.3], "master_seed": 0},
            "coupling": {"mode": "capacitive"},
        })
        assert rc.coupling.strength == ro.DEFAULT_CAPACITIVE_STRENGTH
