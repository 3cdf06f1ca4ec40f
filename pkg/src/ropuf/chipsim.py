"""Chip populations and measurement campaigns.

A campaign realizes N chips from one parameter family, enrolls a
reference ID per chip and voltage, then collects T fresh-jitter samples
per (chip, voltage) cell.  Every stochastic draw comes from a stream
keyed by (master seed, purpose, chip, unit, sample), so the full grid,
any sub-grid, and any worker partitioning produce identical bits.
"""
from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import bch, ro
from .errors import ConfigurationError, DatasetError
from .metrics import hamming, linear_fit
from .rng import TAG_ENROLL, TAG_REALIZE, TAG_SAMPLE, keyed_rng
from .sampler import PufUnit, ResponseWord, compose_id, enroll_id, sample_word


@dataclass(frozen=True)
class Chip:
    """One simulated die: an ordered list of PUF units."""

    chip_id: int
    units: tuple[PufUnit, ...]
    seed: int


@dataclass(frozen=True)
class CampaignConfig:
    n_chips: int = 10
    pairs_per_id: int = 2
    word_length: int = 16
    samples_per_chip: int = 5000
    enroll_repetitions: int = 99
    voltages: tuple[float, ...] = (1.3,)
    master_seed: int = 20260809
    id_length: int | None = None

    def __post_init__(self):
        if self.id_length is None:
            object.__setattr__(self, "id_length", self.pairs_per_id * self.word_length)

    def validate(self, params: ro.RoParams | None = None) -> None:
        if self.n_chips < 2:
            raise ConfigurationError("n_chips must be >= 2 for inter-chip metrics")
        if self.pairs_per_id < 1 or self.word_length < 1:
            raise ConfigurationError("pairs_per_id and word_length must be >= 1")
        if self.id_length != self.pairs_per_id * self.word_length:
            raise ConfigurationError(
                f"id_length {self.id_length} != pairs_per_id*word_length "
                f"{self.pairs_per_id * self.word_length}")
        if self.samples_per_chip < 1:
            raise ConfigurationError("samples_per_chip must be >= 1")
        if self.enroll_repetitions < 1:
            raise ConfigurationError("enroll_repetitions must be >= 1")
        if not self.voltages:
            raise ConfigurationError("voltages must be non-empty")
        if params is not None:
            params.validate()
            # Reject configurations that could leave the linear voltage
            # model (worst realistic sensitivity draw at the worst voltage).
            gamma_max = abs(params.voltage_sensitivity_mean) + \
                6.0 * params.voltage_sensitivity_sigma
            dv_max = max(abs(v - params.reference_voltage) for v in self.voltages)
            if gamma_max * dv_max >= 0.5:
                raise ConfigurationError(
                    "voltages: |gamma*(V-V0)| may reach 0.5; outside model range")


def build_population(config: CampaignConfig, params: ro.RoParams,
                     coupling: ro.Coupling = ro.Coupling.none()) -> list[Chip]:
    """Realize n_chips chips, each with pairs_per_id independent RO pairs."""
    config.validate(params)
    chips = []
    for c in range(config.n_chips):
        units = []
        for u in range(config.pairs_per_id):
            ro1 = ro.realize_ro(params, (config.master_seed, TAG_REALIZE, c, u, 0))
            ro2 = ro.realize_ro(params, (config.master_seed, TAG_REALIZE, c, u, 1))
            units.append(PufUnit(ro1=ro1, ro2=ro2, coupling=coupling,
                                 word_length=config.word_length,
                                 reference_voltage=params.reference_voltage))
        chips.append(Chip(chip_id=c, units=tuple(units), seed=config.master_seed))
    return chips


@dataclass
class CampaignDataset:
    """Complete (chip, voltage, sample) grid plus enrolled references."""

    config: CampaignConfig
    ro_params: ro.RoParams
    coupling: ro.Coupling
    references: dict[int, dict[float, ResponseWord]]
    samples: dict[int, dict[float, np.ndarray]] = field(repr=False)

    @property
    def reference_voltage(self) -> float:
        return self.ro_params.reference_voltage

    def reference(self, chip_id: int, v: float) -> ResponseWord:
        return self.references[chip_id][v]

    def sample_array(self, chip_id: int, v: float) -> np.ndarray:
        return self.samples[chip_id][v]

    def sample_words(self, chip_id: int, v: float) -> list[ResponseWord]:
        return [ResponseWord(row) for row in self.samples[chip_id][v]]

    def check_complete(self) -> None:
        cfg = self.config
        for c in range(cfg.n_chips):
            for v in cfg.voltages:
                if c not in self.references or v not in self.references[c]:
                    raise DatasetError(f"missing reference for chip {c} at {v} V")
                arr = self.samples.get(c, {}).get(v)
                if arr is None or arr.shape != (cfg.samples_per_chip, cfg.id_length):
                    raise DatasetError(f"missing or ragged samples for chip {c} at {v} V")


def _chip_cells(args) -> tuple[int, dict, dict]:
    # Jitter streams are keyed by (chip, unit, sample) but NOT by voltage:
    # sweeping a voltage grid re-measures the same enable cycles under
    # common random numbers, so a pair with equal voltage sensitivities
    # produces bit-identical words at every voltage (and the drift
    # statistic is exactly zero, not just zero in expectation).
    chip, voltages, t_samples, t_enroll, master_seed = args
    refs: dict[float, ResponseWord] = {}
    rows: dict[float, np.ndarray] = {}
    n_units = len(chip.units)
    lw = chip.units[0].word_length
    for v in voltages:
        refs[v] = compose_id([
            enroll_id(unit, t_enroll, v,
                      keyed_rng(master_seed, TAG_ENROLL, chip.chip_id, u))
            for u, unit in enumerate(chip.units)])
        cell = np.empty((t_samples, n_units * lw), dtype=np.uint8)
        for t in range(t_samples):
            for u, unit in enumerate(chip.units):
                word = sample_word(
                    unit, v, keyed_rng(master_seed, TAG_SAMPLE, chip.chip_id, u, t))
                cell[t, u * lw:(u + 1) * lw] = word.bits
        rows[v] = cell
    return chip.chip_id, refs, rows


def run_campaign(chips: list[Chip], config: CampaignConfig,
                 ro_params: ro.RoParams, coupling: ro.Coupling = ro.Coupling.none(),
                 threads: int = 1) -> CampaignDataset:
    """Enroll and sample every (chip, voltage) cell of the campaign grid.

    Results are identical for any threads value: cells are keyed by grid
    indices, and assembly is ordered by chip id, not completion time.
    """
    config.validate(ro_params)
    if len(chips) != config.n_chips:
        raise ConfigurationError("chip list does not match config.n_chips")
    jobs = [(chip, config.voltages, config.samples_per_chip,
             config.enroll_repetitions, config.master_seed) for chip in chips]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_chip_cells, jobs))
    else:
        results = [_chip_cells(job) for job in jobs]
    references, samples = {}, {}
    for chip_id, refs, rows in sorted(results, key=lambda r: r[0]):
        references[chip_id] = refs
        samples[chip_id] = rows
    dataset = CampaignDataset(config=config, ro_params=ro_params, coupling=coupling,
                              references=references, samples=samples)
    dataset.check_complete()
    return dataset


def voltage_sweep(dataset: CampaignDataset, reference_voltage: float | None = None
                  ) -> list[tuple[float, float]]:
    """Shift of the mean Hamming distance at each voltage, vs. operation
    at the reference voltage.

    For each voltage V the mean of HD(R_i at V0, R'_{i,t} at V) is taken
    over chips and samples; the series reports that mean minus its value
    at V0, paired with dV = V - V0.
    """
    v0 = dataset.reference_voltage if reference_voltage is None else reference_voltage
    if v0 not in dataset.config.voltages:
        raise ValueError(f"reference voltage {v0} not in dataset voltages")

    def mean_hd(v: float) -> float:
        total, count = 0, 0
        for c in range(dataset.config.n_chips):
            ref_bits = dataset.reference(c, v0).bits
            arr = dataset.sample_array(c, v)
            total += int(np.count_nonzero(arr != ref_bits[None, :]))
            count += arr.shape[0]
        return total / count

    base = mean_hd(v0)
    return [(v - v0, mean_hd(v) - base) for v in dataset.config.voltages]


def fit_sweep(series: list[tuple[float, float]]) -> dict:
    """OLS fit of the HD shift against |dV| (drift magnitude is symmetric
    in the sign of the voltage offset)."""
    return linear_fit([(abs(dv), shift) for dv, shift in series])


def correct_for_voltage(raw_id: ResponseWord, v_measured: float,
                        calibration: dict[float, ResponseWord]) -> ResponseWord:
    """Correct a raw ID using the calibration entry nearest the measured
    supply voltage (ties resolve to the lower voltage).

    The selected enrolled reference serves as the decoding anchor: the
    protected 31 bits are corrected toward it through the error-correcting
    code, and any remaining bits ride along unprotected.  Raises
    DecodeFailure if the raw ID is too far from the anchor.
    """
    if not calibration:
        raise ValueError("calibration table is empty")
    anchor_v = min(calibration, key=lambda vv: (abs(vv - v_measured), vv))
    anchor = calibration[anchor_v]
    if len(raw_id) != len(anchor):
        raise ValueError("raw ID and calibration reference lengths differ")
    if len(raw_id) < bch.N:
        raise ValueError(f"ID must be at least {bch.N} bits for correction")
    helper = bch.HelperData(offset=ResponseWord(anchor.bits[:bch.N]))
    corrected = bch.correct_response(ResponseWord(raw_id.bits[:bch.N]), helper)
    return ResponseWord(np.concatenate([corrected.bits, raw_id.bits[bch.N:]]))


# --- dict (de)serialization with explicit units in field names ---------

def ro_params_to_dict(p: ro.RoParams) -> dict:
    return {
        "nominal_period_s": p.nominal_period,
        "process_sigma": p.process_sigma,
        "jitter_sigma": p.jitter_sigma,
        "voltage_sensitivity_per_v": p.voltage_sensitivity_mean,
        "voltage_sensitivity_sigma_per_v": p.voltage_sensitivity_sigma,
        "reference_voltage_v": p.reference_voltage,
    }


def ro_params_from_dict(d: dict) -> ro.RoParams:
    try:
        return ro.RoParams(
            nominal_period=d["nominal_period_s"],
            process_sigma=d["process_sigma"],
            jitter_sigma=d["jitter_sigma"],
            voltage_sensitivity_mean=d["voltage_sensitivity_per_v"],
            voltage_sensitivity_sigma=d["voltage_sensitivity_sigma_per_v"],
            reference_voltage=d["reference_voltage_v"],
        )
    except KeyError as exc:
        raise ConfigurationError(f"ro params missing field {exc.args[0]!r}") from exc


def campaign_config_to_dict(c: CampaignConfig) -> dict:
    return {
        "n_chips": c.n_chips,
        "pairs_per_id": c.pairs_per_id,
        "word_length": c.word_length,
        "samples_per_chip": c.samples_per_chip,
        "enroll_repetitions": c.enroll_repetitions,
        "voltages_v": list(c.voltages),
        "master_seed": c.master_seed,
        "id_length": c.id_length,
    }


def campaign_config_from_dict(d: dict) -> CampaignConfig:
    try:
        return CampaignConfig(
            n_chips=d["n_chips"],
            pairs_per_id=d["pairs_per_id"],
            word_length=d["word_length"],
            samples_per_chip=d["samples_per_chip"],
            enroll_repetitions=d["enroll_repetitions"],
            voltages=tuple(d["voltages_v"]),
            master_seed=d["master_seed"],
            id_length=d.get("id_length"),
        )
    except KeyError as exc:
        raise ConfigurationError(f"campaign config missing field {exc.args[0]!r}") from exc


def coupling_to_dict(c: ro.Coupling) -> dict:
    return {"mode": c.mode, "strength": c.strength}


def coupling_from_dict(d: dict) -> ro.Coupling:
    mode = d.get("mode", ro.COUPLING_NONE)
    default_strength = (ro.DEFAULT_CAPACITIVE_STRENGTH
                        if mode == ro.COUPLING_CAPACITIVE else 0.0)
    return ro.Coupling(mode=mode, strength=d.get("strength", default_strength))


# --- file round trip ---------------------------------------------------

def save_dataset(dataset: CampaignDataset, csv_path: str | Path,
                 sidecar_path: str | Path) -> None:
    """CSV of samples (hex words, bit 0 most significant) plus a JSON
    sidecar carrying the configuration, seed, and enrolled references."""
    cfg = dataset.config
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["chip_id", "voltage", "sample_index", "word_hex"])
        for c in range(cfg.n_chips):
            for v in cfg.voltages:
                for t, row in enumerate(dataset.sample_array(c, v)):
                    writer.writerow([c, repr(v), t, ResponseWord(row).to_hex()])
    sidecar = {
        "config": {
            "ro": ro_params_to_dict(dataset.ro_params),
            "campaign": campaign_config_to_dict(cfg),
            "coupling": coupling_to_dict(dataset.coupling),
        },
        "master_seed": cfg.master_seed,
        "references": {
            str(c): {repr(v): dataset.reference(c, v).to_hex() for v in cfg.voltages}
            for c in range(cfg.n_chips)
        },
    }
    Path(sidecar_path).write_text(json.dumps(sidecar, indent=2) + "\n")


def load_dataset(csv_path: str | Path, sidecar_path: str | Path) -> CampaignDataset:
    try:
        sidecar = json.loads(Path(sidecar_path).read_text())
        params = ro_params_from_dict(sidecar["config"]["ro"])
        cfg = campaign_config_from_dict(sidecar["config"]["campaign"])
        coupling = coupling_from_dict(sidecar["config"]["coupling"])
    except (KeyError, json.JSONDecodeError) as exc:
        raise DatasetError(f"bad sidecar: {exc}") from exc
    id_len = cfg.id_length
    references = {
        int(c): {float(v): ResponseWord.from_hex(h, id_len) for v, h in per_chip.items()}
        for c, per_chip in sidecar["references"].items()}
    samples: dict[int, dict[float, list]] = {}
    with open(csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["chip_id", "voltage", "sample_index", "word_hex"]:
            raise DatasetError(f"unexpected CSV header: {reader.fieldnames}")
        for row in reader:
            c, v = int(row["chip_id"]), float(row["voltage"])
            samples.setdefault(c, {}).setdefault(v, []).append(
                (int(row["sample_index"]), row["word_hex"]))
    arrays: dict[int, dict[float, np.ndarray]] = {}
    for c, per_chip in samples.items():
        arrays[c] = {}
        for v, rows in per_chip.items():
            rows.sort()
            if [t for t, _ in rows] != list(range(len(rows))):
                raise DatasetError(f"sample indices not contiguous for chip {c} at {v} V")
            arrays[c][v] = np.stack([ResponseWord.from_hex(h, id_len).bits for _, h in rows])
    dataset = CampaignDataset(config=cfg, ro_params=params, coupling=coupling,
                              references=references, samples=arrays)
    dataset.check_complete()
    return dataset


def with_master_seed(config: CampaignConfig, master_seed: int) -> CampaignConfig:
    return replace(config, master_seed=master_seed)
