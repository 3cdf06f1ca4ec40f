import numpy as np
import pytest

from ropuf import chipsim, metrics, ro
from ropuf.errors import ConfigurationError, DatasetError, DecodeFailure
from ropuf.sampler import ResponseWord

FAST = dict(n_chips=4, samples_per_chip=20, enroll_repetitions=9)


def small_campaign(master_seed=5, voltages=(1.3,), params=None,
                   coupling=ro.Coupling.none(), **overrides):
    params = params or ro.RoParams()
    cfg = chipsim.CampaignConfig(voltages=voltages, master_seed=master_seed,
                                 **{**FAST, **overrides})
    chips = chipsim.build_population(cfg, params, coupling)
    return chipsim.run_campaign(chips, cfg, params, coupling), cfg, params


class TestPopulation:
    def test_shapes(self):
        cfg = chipsim.CampaignConfig(n_chips=10, pairs_per_id=2, word_length=16)
        chips = chipsim.build_population(cfg, ro.RoParams())
        assert len(chips) == 10
        assert all(len(c.units) == 2 for c in chips)
        assert cfg.id_length == 32

    def test_same_seed_identical_population(self):
        cfg = chipsim.CampaignConfig(master_seed=77, **FAST)
        a = chipsim.build_population(cfg, ro.RoParams())
        b = chipsim.build_population(cfg, ro.RoParams())
        assert a == b

    def test_zero_process_variation_clones_chips(self):
        params = ro.RoParams(process_sigma=0.0, jitter_sigma=0.0,
                             voltage_sensitivity_sigma=0.0)
        ds, cfg, _ = small_campaign(params=params)
        refs = [ds.reference(c, 1.3) for c in range(cfg.n_chips)]
        assert all(r == refs[0] for r in refs)
        assert metrics.uniqueness(refs, cfg.id_length) == 0.0

    def test_config_validation(self):
        with pytest.raises(ConfigurationError, match="n_chips"):
            chipsim.CampaignConfig(n_chips=1).validate()
        with pytest.raises(ConfigurationError, match="id_length"):
            chipsim.CampaignConfig(id_length=31).validate()
        with pytest.raises(ConfigurationError, match="model range"):
            chipsim.CampaignConfig(voltages=(2.8,)).validate(ro.RoParams())


class TestCampaign:
    def test_grid_size_and_completeness(self):
        ds, cfg, _ = small_campaign(voltages=(1.25, 1.3))
        ds.check_complete()
        for c in range(cfg.n_chips):
            for v in cfg.voltages:
                assert ds.sample_array(c, v).shape == (20, 32)

    def test_zero_jitter_reliability_exact_100(self):
        params = ro.RoParams(jitter_sigma=0.0)
        ds, cfg, _ = small_campaign(params=params)
        report = metrics.compute_report(ds)
        assert all(v == 100.0 for v in report.reliability_pct_per_chip.values())
        intra, _ = metrics.hd_distributions(ds)
        assert intra.mass_at(0) == 1.0

    def test_determinism(self):
        a, cfg, _ = small_campaign(master_seed=9)
        b, _, _ = small_campaign(master_seed=9)
        for c in range(cfg.n_chips):
            assert a.reference(c, 1.3) == b.reference(c, 1.3)
            assert np.array_equal(a.sample_array(c, 1.3), b.sample_array(c, 1.3))

    def test_threads_do_not_change_results(self):
        params = ro.RoParams()
        cfg = chipsim.CampaignConfig(voltages=(1.3,), master_seed=13, **FAST)
        chips = chipsim.build_population(cfg, params)
        seq = chipsim.run_campaign(chips, cfg, params, threads=1)
        par = chipsim.run_campaign(chips, cfg, params, threads=3)
        for c in range(cfg.n_chips):
            assert seq.reference(c, 1.3) == par.reference(c, 1.3)
            assert np.array_equal(seq.sample_array(c, 1.3), par.sample_array(c, 1.3))

    def test_streams_keyed_by_voltage_value(self):
        # shared voltages give identical words no matter what else is swept
        a, cfg, _ = small_campaign(master_seed=21, voltages=(1.3, 1.25))
        b, _, _ = small_campaign(master_seed=21, voltages=(1.25, 1.35, 1.3))
        for c in range(cfg.n_chips):
            for v in (1.25, 1.3):
                assert a.reference(c, v) == b.reference(c, v)
                assert np.array_equal(a.sample_array(c, v), b.sample_array(c, v))

    def test_inter_chip_words_look_independent(self):
        ds, cfg, _ = small_campaign(master_seed=2, n_chips=12)
        refs = [ds.reference(c, 1.3) for c in range(cfg.n_chips)]
        u = metrics.uniqueness(refs, cfg.id_length)
        assert 30.0 < u < 70.0


class TestVoltageSweep:
    def test_zero_shift_at_reference(self):
        ds, _, _ = small_campaign(voltages=(1.25, 1.3, 1.35))
        series = dict(chipsim.voltage_sweep(ds))
        assert series[0.0] == 0.0

    def test_shared_sensitivity_cancels(self):
        params = ro.RoParams(voltage_sensitivity_sigma=0.0)
        ds, _, _ = small_campaign(voltages=(1.2, 1.3, 1.4), params=params)
        for _, shift in chipsim.voltage_sweep(ds):
            assert shift == 0.0

    def test_missing_reference_voltage(self):
        ds, _, _ = small_campaign(voltages=(1.25, 1.3))
        with pytest.raises(ValueError):
            chipsim.voltage_sweep(ds, reference_voltage=1.35)

    def test_mismatch_shifts_grow_with_offset(self):
        params = ro.RoParams()
        cfg = chipsim.CampaignConfig(n_chips=20, samples_per_chip=40,
                                     enroll_repetitions=19,
                                     voltages=(1.2, 1.3, 1.4), master_seed=6)
        chips = chipsim.build_population(cfg, params)
        ds = chipsim.run_campaign(chips, cfg, params)
        series = dict(chipsim.voltage_sweep(ds))
        shifts = {round(dv, 2): s for dv, s in series.items()}
        assert shifts[-0.1] > 0.0 and shifts[0.1] > 0.0
        fit = chipsim.fit_sweep(list(series.items()))
        assert fit["slope"] > 0.0


class TestVoltageCorrection:
    def test_exact_calibration_point_noiseless(self):
        params = ro.RoParams(jitter_sigma=0.0)
        ds, cfg, _ = small_campaign(voltages=(1.25, 1.3, 1.35), params=params)
        for c in range(cfg.n_chips):
            calib = {v: ds.reference(c, v) for v in cfg.voltages}
            raw = ds.sample_words(c, 1.25)[0]
            assert chipsim.correct_for_voltage(raw, 1.25, calib) == calib[1.25]

    def test_single_entry_always_that_anchor(self):
        ds, cfg, _ = small_campaign(voltages=(1.3,))
        c = 0
        calib = {1.3: ds.reference(c, 1.3)}
        raw = ds.sample_words(c, 1.3)[0]
        corrected = chipsim.correct_for_voltage(raw, 1.05, calib)
        assert np.array_equal(corrected.bits[:31], calib[1.3].bits[:31])

    def test_nearest_tie_resolves_to_lower(self):
        ref_low = ResponseWord(np.zeros(32, dtype=np.uint8))
        high = np.zeros(32, dtype=np.uint8)
        high[:7] = 1
        calib = {1.25: ref_low, 1.35: ResponseWord(high)}
        raw = ResponseWord(np.zeros(32, dtype=np.uint8))
        corrected = chipsim.correct_for_voltage(raw, 1.30, calib)
        assert np.array_equal(corrected.bits[:31], ref_low.bits[:31])

    def test_empty_calibration(self):
        with pytest.raises(ValueError):
            chipsim.correct_for_voltage(ResponseWord(np.zeros(32, dtype=np.uint8)),
                                        1.3, {})

    def test_nearest_anchor_beats_distant_anchor(self):
        params = ro.RoParams()
        cfg = chipsim.CampaignConfig(n_chips=10, samples_per_chip=60,
                                     enroll_repetitions=19,
                                     voltages=(1.25, 1.26, 1.30, 1.35),
                                     master_seed=11)
        chips = chipsim.build_population(cfg, params)
        ds = chipsim.run_campaign(chips, cfg, params)

        def successes(calib_voltages):
            ok = total = 0
            for c in range(cfg.n_chips):
                calib = {v: ds.reference(c, v) for v in calib_voltages}
                anchor_v = min(calib, key=lambda vv: (abs(vv - 1.26), vv))
                anchor31 = calib[anchor_v].bits[:31]
                for w in ds.sample_words(c, 1.26):
                    total += 1
                    try:
                        got = chipsim.correct_for_voltage(w, 1.26, calib)
                        ok += int(np.array_equal(got.bits[:31], anchor31))
                    except DecodeFailure:
                        pass
            return ok / total

        assert successes([1.25, 1.30, 1.35]) > successes([1.30])


class TestSerialization:
    def test_round_trip(self, tmp_path):
        ds, cfg, _ = small_campaign(voltages=(1.25, 1.3))
        csv_path, json_path = tmp_path / "d.csv", tmp_path / "d.json"
        chipsim.save_dataset(ds, csv_path, json_path)
        loaded = chipsim.load_dataset(csv_path, json_path)
        assert loaded.config == cfg
        assert loaded.ro_params == ds.ro_params
        assert loaded.coupling == ds.coupling
        for c in range(cfg.n_chips):
            for v in cfg.voltages:
                assert loaded.reference(c, v) == ds.reference(c, v)
                assert np.array_equal(loaded.sample_array(c, v), ds.sample_array(c, v))

    def test_rewrite_is_byte_identical(self, tmp_path):
        ds, _, _ = small_campaign()
        chipsim.save_dataset(ds, tmp_path / "a.csv", tmp_path / "a.json")
        chipsim.save_dataset(ds, tmp_path / "b.csv", tmp_path / "b.json")
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_incomplete_dataset_rejected(self, tmp_path):
        ds, _, _ = small_campaign()
        csv_path, json_path = tmp_path / "d.csv", tmp_path / "d.json"
        chipsim.save_dataset(ds, csv_path, json_path)
        lines = csv_path.read_text().splitlines()
        csv_path.write_text("\n".join(lines[:-3]) + "\n")  # drop rows
        with pytest.raises(DatasetError):
            chipsim.load_dataset(csv_path, json_path)

    def test_config_dict_round_trip(self):
        cfg = chipsim.CampaignConfig(voltages=(1.2, 1.3), master_seed=3, **FAST)
        assert chipsim.campaign_config_from_dict(chipsim.campaign_config_to_dict(cfg)) == cfg
        params = ro.RoParams(jitter_sigma=0.002)
        assert chipsim.ro_params_from_dict(chipsim.ro_params_to_dict(params)) == params
        coup = ro.Coupling.capacitive(0.7)
        assert chipsim.coupling_from_dict(chipsim.coupling_to_dict(coup)) == coup


class TestPostBchDistributions:
    def test_post_bch_mass_at_zero_improves(self):
        params = ro.RoParams(jitter_sigma=0.001)
        ds, _, _ = small_campaign(params=params, n_chips=6,
                                  samples_per_chip=80, master_seed=20260809)
        raw_intra, _ = metrics.hd_distributions(ds, post_bch=False)
        post_intra, post_inter = metrics.hd_distributions(ds, post_bch=True)
        assert post_intra.mass_at(0) > raw_intra.mass_at(0)
        assert post_intra.length == 31 and post_inter.length == 31

    def test_report_labels(self):
        ds, _, _ = small_campaign()
        raw = metrics.compute_report(ds)
        post = metrics.compute_report(ds, post_bch=True)
        assert raw.bch_stage == "raw" and raw.id_length == 32
        assert post.bch_stage == "post_bch" and post.id_length == 31
        assert raw.voltage == post.voltage == 1.3
