"""Command-line front end.

Subcommands: simulate, metrics, sweep, bch-selftest, cost.  Every
command is deterministic given its inputs; data files never contain
timestamps or environment state.

Exit codes: 0 success, 2 configuration error, 3 data error,
4 self-test failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import bch, chipsim, cost, metrics, ro
from .errors import ConfigurationError, DatasetError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_SELFTEST = 4


@dataclass
class RunConfig:
    """Everything one simulation run needs, round-trippable through JSON."""

    ro_params: ro.RoParams = field(default_factory=ro.RoParams)
    campaign: chipsim.CampaignConfig = field(default_factory=chipsim.CampaignConfig)
    coupling: ro.Coupling = field(default_factory=ro.Coupling.none)
    post_bch: bool = False
    emit_histograms: bool = True
    emit_sweep: bool = False

    def to_json_dict(self) -> dict:
        return {
            "ro": chipsim.ro_params_to_dict(self.ro_params),
            "campaign": chipsim.campaign_config_to_dict(self.campaign),
            "coupling": chipsim.coupling_to_dict(self.coupling),
            "flags": {
                "post_bch": self.post_bch,
                "emit_histograms": self.emit_histograms,
                "emit_sweep": self.emit_sweep,
            },
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "RunConfig":
        for section in ("ro", "campaign"):
            if section not in data:
                raise ConfigurationError(f"config missing section {section!r}")
        flags = data.get("flags", {})
        return cls(
            ro_params=chipsim.ro_params_from_dict(data["ro"]),
            campaign=chipsim.campaign_config_from_dict(data["campaign"]),
            coupling=chipsim.coupling_from_dict(data.get("coupling", {})),
            post_bch=bool(flags.get("post_bch", False)),
            emit_histograms=bool(flags.get("emit_histograms", True)),
            emit_sweep=bool(flags.get("emit_sweep", False)),
        )


def load_run_config(path: str | Path) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigurationError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config is not valid JSON: {exc}") from exc
    cfg = RunConfig.from_json_dict(data)
    cfg.campaign.validate(cfg.ro_params)
    return cfg


def _run_campaign_from_config(cfg: RunConfig, threads: int) -> chipsim.CampaignDataset:
    chips = chipsim.build_population(cfg.campaign, cfg.ro_params, cfg.coupling)
    return chipsim.run_campaign(chips, cfg.campaign, cfg.ro_params, cfg.coupling,
                                threads=threads)


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    if args.seed is not None:
        cfg.campaign = chipsim.with_master_seed(cfg.campaign, args.seed)
    return cfg


def cmd_simulate(args) -> int:
    cfg = _apply_overrides(load_run_config(args.config), args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dataset = _run_campaign_from_config(cfg, args.threads)
    chipsim.save_dataset(dataset, out / "dataset.csv", out / "dataset.json")
    n_rows = cfg.campaign.n_chips * len(cfg.campaign.voltages) * cfg.campaign.samples_per_chip
    print(f"wrote {out / 'dataset.csv'} ({n_rows} rows) and {out / 'dataset.json'}")
    if cfg.emit_histograms:
        report = metrics.compute_report(dataset, post_bch=cfg.post_bch)
        report.save_json(out / "report.json")
        metrics.write_histogram_csv(out / "histograms.csv", [report.intra, report.inter])
        print(f"wrote {out / 'report.json'} and {out / 'histograms.csv'}")
    if cfg.emit_sweep and len(cfg.campaign.voltages) >= 2:
        series = chipsim.voltage_sweep(dataset)
        _write_sweep_files(out, series)
    return EXIT_OK


def cmd_metrics(args) -> int:
    csv_path = Path(args.dataset)
    sidecar = Path(args.sidecar) if args.sidecar else csv_path.with_suffix(".json")
    if not csv_path.exists() or not sidecar.exists():
        raise DatasetError(f"dataset files not found: {csv_path}, {sidecar}")
    dataset = chipsim.load_dataset(csv_path, sidecar)
    report = metrics.compute_report(dataset, post_bch=args.post_bch)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report.save_json(out / "report.json")
    if args.histograms:
        metrics.write_histogram_csv(out / "histograms.csv", [report.intra, report.inter])
    stage = "post-BCH" if args.post_bch else "raw"
    print(f"metrics at {report.voltage} V ({stage}, L={report.id_length}):")
    for line in report.summary_lines():
        print(line)
    return EXIT_OK


def _write_sweep_files(out: Path, series) -> dict:
    fit = chipsim.fit_sweep(series)
    with open(out / "sweep.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["delta_v", "abs_delta_v", "hd_shift"])
        for dv, shift in series:
            writer.writerow([repr(dv), repr(abs(dv)), repr(shift)])
    (out / "sweep.json").write_text(json.dumps(
        {"series": [[dv, shift] for dv, shift in series], "fit_vs_abs_dv": fit},
        indent=2) + "\n")
    return fit


def cmd_sweep(args) -> int:
    cfg = _apply_overrides(load_run_config(args.config), args)
    if len(cfg.campaign.voltages) < 2:
        raise ConfigurationError("voltages_v: sweep needs at least two voltages")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dataset = _run_campaign_from_config(cfg, args.threads)
    fit = _write_sweep_files(out, chipsim.voltage_sweep(dataset))
    print(f"HD shift vs |dV|: slope {fit['slope']:.3f} bits/V, "
          f"intercept {fit['intercept']:.3f}, R^2 {fit['r2']:.4f}")
    return EXIT_OK


def cmd_bch_selftest(args) -> int:
    results = bch.selftest(random_error_trials=args.trials)
    failed = False
    for name, passed in results:
        print(f"{'PASS' if passed else 'FAIL'}  {name}")
        failed |= not passed
    return EXIT_SELFTEST if failed else EXIT_OK


def cmd_cost(args) -> int:
    params = cost.CostParams(
        transistors_per_ro=args.per_ro,
        transistors_per_ff=args.per_ff,
        transistors_per_mux4=args.per_mux4,
        transistors_per_full_adder=args.per_adder,
        bits_required=args.bits,
        bits_per_word=args.bits_per_word,
        counter_bits=args.counter_bits,
    )
    wave = cost.waveform_puf_cost(params)
    conv = cost.conventional_puf_cost(params)
    if args.json:
        print(json.dumps({
            "bits_required": params.bits_required,
            "waveform_ro_puf": {"transistors": wave[0], "clock_cycles": wave[1]},
            "conventional_ro_puf": {"transistors": conv[0], "clock_cycles": conv[1]},
        }, indent=2))
    else:
        print(f"{'':24s}{'Area (transistors)':>20s}{'Clock cycles':>14s}")
        print(f"{'Waveform RO-PUF':24s}{wave[0]:>20d}{wave[1]:>14d}")
        print(f"{'Conventional RO-PUF':24s}{conv[0]:>20d}{conv[1]:>14d}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ropuf",
        description="Simulate and evaluate waveform-sampling ring-oscillator PUFs")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", required=True, help="run configuration JSON")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override master seed")
        p.add_argument("--threads", type=int, default=1, help="worker processes")

    p = sub.add_parser("simulate", help="run a campaign, write dataset CSV + sidecar")
    add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("metrics", help="evaluate a dataset written by simulate")
    p.add_argument("dataset", help="dataset CSV path")
    p.add_argument("--sidecar", default=None, help="sidecar JSON (default: CSV stem .json)")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--post-bch", action="store_true", dest="post_bch",
                   help="evaluate error-corrected words")
    p.add_argument("--no-histograms", action="store_false", dest="histograms")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("sweep", help="voltage sweep: HD shift series and linear fit")
    add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bch-selftest", help="verify the (31,16,7) codec")
    p.add_argument("--trials", type=int, default=10000,
                   help="random 3-error decode trials")
    p.set_defaults(func=cmd_bch_selftest)

    p = sub.add_parser("cost", help="area/cycle comparison table")
    p.add_argument("--bits", type=int, default=128, help="required output bits")
    p.add_argument("--bits-per-word", type=int, default=16)
    p.add_argument("--counter-bits", type=int, default=16)
    p.add_argument("--per-ro", type=int, default=20, help="transistors per RO")
    p.add_argument("--per-ff", type=int, default=30, help="transistors per FF")
    p.add_argument("--per-mux4", type=int, default=30, help="transistors per 4-input MUX")
    p.add_argument("--per-adder", type=int, default=20, help="transistors per full adder")
    p.add_argument("--json", action="store_true", help="emit JSON instead of a table")
    p.set_defaults(func=cmd_cost)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DatasetError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
