"""Evaluation mathematics: Hamming-distance statistics and the three
standard PUF percentages (uniqueness, reliability, uniformity), plus the
least-squares fit used for the supply-voltage drift analysis.

References R_i are always the enrolled (modal) IDs, never a designated
first sample.  Every metric in a report is labelled with the voltage and
the error-correction stage it was computed at, since the same formulas
apply before and after decoding.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DecodeFailure
from .rng import TAG_KEY, keyed_rng
from .sampler import ResponseWord


def hamming(a: ResponseWord, b: ResponseWord) -> int:
    """Number of differing bit positions."""
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    return int(np.count_nonzero(a.bits != b.bits))


def uniqueness(references: list[ResponseWord], length: int) -> float:
    """Mean pairwise fractional Hamming distance over all chip pairs, in %.

    2/(N(N-1)) * sum_{i<j} HD(R_i, R_j)/L * 100.
    """
    n = len(references)
    if n < 2:
        raise ValueError("uniqueness needs at least 2 references")
    if any(len(r) != length for r in references):
        raise ValueError("all references must have the stated length")
    total = 0.0
    for i in range(n - 1):
        for j in range(i + 1, n):
            total += hamming(references[i], references[j]) / length
    return 2.0 / (n * (n - 1)) * total * 100.0


def reliability(reference: ResponseWord, samples: list[ResponseWord],
                length: int, t: int | None = None) -> float:
    """[1 - mean fractional HD from the reference] * 100, over t samples."""
    if t is None:
        t = len(samples)
    if t < 1 or len(samples) < t:
        raise ValueError("need at least one sample (t <= len(samples))")
    total = sum(hamming(reference, s) / length for s in samples[:t])
    return (1.0 - total / t) * 100.0


def uniformity(responses: list[ResponseWord], length: int) -> float:
    """Mean ones-fraction per response, averaged over responses, in %."""
    if not responses:
        raise ValueError("need at least one response")
    if any(len(r) != length for r in responses):
        raise ValueError("all responses must have the stated length")
    return float(np.mean([r.bits.sum() / length for r in responses]) * 100.0)


@dataclass
class HdHistogram:
    """Counts of Hamming distances 0..length for one population."""

    population: str  # "intra" | "inter"
    length: int
    counts: np.ndarray = field(repr=False)

    @classmethod
    def from_distances(cls, population: str, length: int, distances) -> "HdHistogram":
        counts = np.bincount(np.asarray(list(distances), dtype=np.int64),
                             minlength=length + 1)
        if counts.shape[0] > length + 1:
            raise ValueError("distance exceeds word length")
        return cls(population=population, length=length, counts=counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def mass_at(self, distance: int) -> float:
        """Fraction of the population at exactly this distance."""
        return float(self.counts[distance] / self.total) if self.total else 0.0

    def mean(self) -> float:
        d = np.arange(self.counts.shape[0])
        return float((d * self.counts).sum() / self.total) if self.total else 0.0

    def to_rows(self) -> list[dict]:
        return [{"population": self.population, "distance": int(d), "count": int(c)}
                for d, c in enumerate(self.counts)]


def write_histogram_csv(path: str | Path, histograms: list[HdHistogram]) -> None:
    """One row per distance, per population."""
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["population", "distance", "count"])
        writer.writeheader()
        for h in histograms:
            writer.writerows(h.to_rows())


def linear_fit(points: list[tuple[float, float]]) -> dict:
    """Ordinary least squares y = slope*x + intercept with R^2."""
    if len(points) < 2:
        raise ValueError("need at least 2 points")
    x = np.array([p[0] for p in points], dtype=np.float64)
    y = np.array([p[1] for p in points], dtype=np.float64)
    if np.ptp(x) == 0.0:
        raise ValueError("degenerate abscissae: all x equal")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(np.sum(resid ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return {"slope": float(slope), "intercept": float(intercept), "r2": float(r2)}


@dataclass
class MetricsReport:
    """Aggregated evaluation results for one campaign at one voltage."""

    voltage: float
    bch_stage: str  # "raw" | "post_bch"
    id_length: int
    uniqueness_pct: float
    reliability_pct_per_chip: dict[int, float]
    uniformity_pct_per_chip: dict[int, float]
    intra: HdHistogram
    inter: HdHistogram
    voltage_fit: dict | None = None

    @property
    def reliability_pct_mean(self) -> float:
        return float(np.mean(list(self.reliability_pct_per_chip.values())))

    @property
    def uniformity_pct_mean(self) -> float:
        return float(np.mean(list(self.uniformity_pct_per_chip.values())))

    def to_json_dict(self) -> dict:
        return {
            "voltage": self.voltage,
            "bch_stage": self.bch_stage,
            "id_length": self.id_length,
            "uniqueness_pct": self.uniqueness_pct,
            "reliability_pct_mean": self.reliability_pct_mean,
            "reliability_pct_per_chip": {str(k): v for k, v in
                                         self.reliability_pct_per_chip.items()},
            "uniformity_pct_mean": self.uniformity_pct_mean,
            "uniformity_pct_per_chip": {str(k): v for k, v in
                                        self.uniformity_pct_per_chip.items()},
            "intra_hist": [int(c) for c in self.intra.counts],
            "inter_hist": [int(c) for c in self.inter.counts],
            "voltage_fit": self.voltage_fit,
        }

    def save_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2) + "\n")

    def summary_lines(self) -> list[str]:
        """Three-row layout, percentages at two decimals."""
        return [
            f"Uniformity   {self.uniformity_pct_mean:6.2f}",
            f"Reliability  {self.reliability_pct_mean:6.2f}",
            f"Uniqueness   {self.uniqueness_pct:6.2f}",
        ]


# --- campaign-level evaluation ------------------------------------------


def _protected(word: ResponseWord) -> ResponseWord:
    """First 31 bits of an ID: the part covered by the error-correcting
    code (a 32-bit ID maps onto the 31-bit code by dropping its last bit,
    which is carried unprotected)."""
    from . import bch
    if len(word) < bch.N:
        raise ValueError(f"ID shorter than the {bch.N}-bit code")
    return ResponseWord(word.bits[:bch.N])


def corrected_sample_words(dataset, chip_id: int, v: float) -> list[ResponseWord]:
    """Per-sample 31-bit words after error correction against the chip's
    enrolled helper data (enrolled at the reference voltage).

    Uncorrectable samples are passed through unchanged; correctable ones
    land exactly on the enrolled response.
    """
    from . import bch
    v0 = dataset.reference_voltage
    ref = _protected(dataset.reference(chip_id, v0))
    _, helper = bch.fe_enroll(ref, keyed_rng(dataset.config.master_seed, TAG_KEY, chip_id))
    out = []
    for word in dataset.sample_words(chip_id, v):
        raw = _protected(word)
        try:
            out.append(bch.correct_response(raw, helper))
        except DecodeFailure:
            out.append(raw)
    return out


def hd_distributions(dataset, post_bch: bool = False) -> tuple[HdHistogram, HdHistogram]:
    """Intra- and inter-chip Hamming distance histograms at the reference
    voltage.

    Intra pairs each chip's enrolled reference with its raw samples;
    inter pairs the references of distinct chips.  With post_bch the
    words first pass through the fuzzy extractor and re-encoding, so any
    residual errors of weight <= 3 are removed and the histograms live
    on the 31 protected bits.
    """
    dataset.check_complete()
    cfg = dataset.config
    v0 = dataset.reference_voltage
    if post_bch:
        length = 31
        refs = [_protected(dataset.reference(c, v0)) for c in range(cfg.n_chips)]
        per_chip = [corrected_sample_words(dataset, c, v0) for c in range(cfg.n_chips)]
    else:
        length = cfg.id_length
        refs = [dataset.reference(c, v0) for c in range(cfg.n_chips)]
        per_chip = [dataset.sample_words(c, v0) for c in range(cfg.n_chips)]
    intra_d = [hamming(refs[c], w) for c in range(cfg.n_chips) for w in per_chip[c]]
    inter_d = [hamming(refs[i], refs[j])
               for i in range(cfg.n_chips - 1) for j in range(i + 1, cfg.n_chips)]
    return (HdHistogram.from_distances("intra", length, intra_d),
            HdHistogram.from_distances("inter", length, inter_d))


def compute_report(dataset, voltage: float | None = None, post_bch: bool = False,
                   voltage_fit: dict | None = None) -> MetricsReport:
    """Full metrics report for one campaign at one voltage.

    Reliability and uniformity use the samples at the requested voltage
    against that voltage's own enrolled reference; intra/inter histograms
    are always computed at the reference voltage.
    """
    dataset.check_complete()
    cfg = dataset.config
    v = dataset.reference_voltage if voltage is None else voltage
    if v not in cfg.voltages:
        raise ValueError(f"voltage {v} not in dataset")
    if post_bch:
        length = 31
        refs = {c: _protected(dataset.reference(c, v)) for c in range(cfg.n_chips)}
        words = {c: corrected_sample_words(dataset, c, v) for c in range(cfg.n_chips)}
    else:
        length = cfg.id_length
        refs = {c: dataset.reference(c, v) for c in range(cfg.n_chips)}
        words = {c: dataset.sample_words(c, v) for c in range(cfg.n_chips)}
    rel = {c: reliability(refs[c], words[c], length) for c in range(cfg.n_chips)}
    unif = {c: uniformity(words[c], length) for c in range(cfg.n_chips)}
    intra, inter = hd_distributions(dataset, post_bch=post_bch)
    return MetricsReport(
        voltage=v,
        bch_stage="post_bch" if post_bch else "raw",
        id_length=length,
        uniqueness_pct=uniqueness(list(refs.values()), length),
        reliability_pct_per_chip=rel,
        uniformity_pct_per_chip=unif,
        intra=intra,
        inter=inter,
        voltage_fit=voltage_fit,
    )
