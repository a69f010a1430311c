"""Figure rendering for per-user spectral-efficiency results."""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import (
    MissingScenarioError,
    SchemaError,
    read_result_records,
    read_summary_records,
    sniff_schema,
)

BENCHMARK_LABEL = "benchmark"
REFERENCE_LABELS = (BENCHMARK_LABEL, "perfect_csi")

CDF_KIND = "cdf"
PERCENTILE_VS_RHO = "percentile_vs_rho"
PERCENTILE_VS_PHASE = "percentile_vs_phase"
KINDS = (CDF_KIND, PERCENTILE_VS_RHO, PERCENTILE_VS_PHASE)


@dataclass(frozen=True)
class PlotJob:
    """One figure request: inputs, figure kind, output path, axis ranges."""

    inputs: tuple[str, ...]
    kind: str
    output: str
    x_range: tuple[float, float] | None = None
    y_range: tuple[float, float] | None = None
    scenarios: tuple[str, ...] | None = None
    dpi: int = 200

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; expected one of {KINDS}")
        if not self.inputs:
            raise ValueError("a plot job needs at least one input file")


@dataclass(frozen=True)
class CdfCurve:
    scenario: str
    values: np.ndarray  # sorted rates, bit/s/Hz
    probs: np.ndarray  # cumulative probabilities in (0, 1]

    def crossing(self, level: float) -> float:
        """Rate at which the curve reaches the given cumulative level."""
        return float(np.interp(level, self.probs, self.values))


@dataclass(frozen=True)
class CdfFigure:
    curves: list[CdfCurve]
    paths: tuple[str, ...]


@dataclass(frozen=True)
class PercentileFigure:
    sweep: np.ndarray
    q05: np.ndarray
    q50: np.ndarray
    reference: tuple[float, float] | None
    paths: tuple[str, ...] = field(default=())


def _group_by_scenario(records):
    order: list[str] = []
    grouped: dict[str, list] = {}
    for rec in records:
        if rec.scenario not in grouped:
            order.append(rec.scenario)
            grouped[rec.scenario] = []
        grouped[rec.scenario].append(rec)
    return order, grouped


def _select(order, grouped, scenarios):
    if scenarios is None:
        return list(order)
    chosen = []
    for label in scenarios:
        if label not in grouped:
            raise MissingScenarioError(label, order)
        chosen.append(label)
    return chosen


def _save(fig, output, dpi) -> tuple[str, ...]:
    """Write the lossless raster plus an SVG vector variant."""
    stem, ext = os.path.splitext(output)
    raster = output if ext else stem + ".png"
    vector = stem + ".svg"
    fig.savefig(raster, dpi=dpi, bbox_inches="tight")
    fig.savefig(vector, bbox_inches="tight")
    plt.close(fig)
    return (raster, vector)


def plot_cdf(
    results_path,
    scenarios=None,
    output: str = "cdf.png",
    x_range=None,
    dpi: int = 200,
) -> CdfFigure:
    """One empirical CDF curve of per-user rate for each scenario.

    Validates the input before any file is written; a missing scenario
    raises MissingScenarioError listing the available labels.
    """
    records = read_result_records(results_path)
    order, grouped = _group_by_scenario(records)
    chosen = _select(order, grouped, scenarios)

    curves = []
    for label in chosen:
        values = np.sort(np.array([r.se_bpshz for r in grouped[label]]))
        probs = np.arange(1, values.size + 1) / values.size
        if np.any(np.diff(values) < 0):
            raise AssertionError(f"CDF values for {label!r} are not sorted")
        curves.append(CdfCurve(scenario=label, values=values, probs=probs))

    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for curve in curves:
        ax.step(curve.values, curve.probs, where="post", label=curve.scenario)
    ax.axhline(0.05, color="grey", linewidth=0.8, linestyle=":")
    ax.set_xlabel("per-user spectral efficiency (bit/s/Hz)")
    ax.set_ylabel("CDF")
    ax.set_ylim(0.0, 1.0)
    if x_range is not None:
        ax.set_xlim(*x_range)
    ax.grid(True, linestyle=":", linewidth=0.5)
    ax.legend()
    paths = _save(fig, output, dpi)
    return CdfFigure(curves=curves, paths=paths)


def _sweep_from_results(records, kind, scenarios):
    order, grouped = _group_by_scenario(records)
    reference = None
    if BENCHMARK_LABEL in grouped:
        rates = np.array([r.se_bpshz for r in grouped[BENCHMARK_LABEL]])
        reference = (float(np.quantile(rates, 0.05)), float(np.quantile(rates, 0.50)))

    if scenarios is None:
        candidates = [label for label in order if label not in REFERENCE_LABELS]
        if kind == PERCENTILE_VS_RHO:
            candidates = [
                label
                for label in candidates
                if all(r.tpn_label_deg == 0.0 for r in grouped[label])
            ]
        else:
            candidates = [
                label for label in candidates if all(r.rho == 1.0 for r in grouped[label])
            ]
    else:
        candidates = _select(order, grouped, scenarios)
    if not candidates:
        raise SchemaError(f"no scenarios with a sweep variable for kind {kind!r}")

    sweep, q05, q50 = [], [], []
    for label in candidates:
        recs = grouped[label]
        rates = np.array([r.se_bpshz for r in recs])
        value = np.median([r.rho for r in recs]) if kind == PERCENTILE_VS_RHO else np.median(
            [r.tpn_label_deg for r in recs]
        )
        sweep.append(float(value))
        q05.append(float(np.quantile(rates, 0.05)))
        q50.append(float(np.quantile(rates, 0.50)))
    return np.array(sweep), np.array(q05), np.array(q50), reference


def _sweep_from_summary(records, kind, scenarios):
    reference = None
    rows = []
    for rec in records:
        if rec.scenario == BENCHMARK_LABEL:
            reference = (rec.q05_bpshz, rec.q50_bpshz)
            continue
        rows.append(rec)
    if scenarios is not None:
        available = [r.scenario for r in rows]
        for label in scenarios:
            if label not in available:
                raise MissingScenarioError(label, available)
        rows = [r for r in rows if r.scenario in scenarios]

    if kind == PERCENTILE_VS_RHO:
        raise SchemaError(
            "the summary schema carries no correlation values; pass the per-user "
            "results file to plot against the correlation coefficient"
        )
    sweep, q05, q50 = [], [], []
    for rec in rows:
        if not rec.scenario.startswith("pn"):
            continue
        try:
            sweep.append(float(rec.scenario[2:]))
        except ValueError:
            continue
        q05.append(rec.q05_bpshz)
        q50.append(rec.q50_bpshz)
    if not sweep:
        raise SchemaError("no phase-noise scenarios (labels 'pn<degrees>') in the summary")
    return np.array(sweep), np.array(q05), np.array(q50), reference


def plot_percentiles(
    input_path,
    kind: str,
    scenarios=None,
    output: str = "percentiles.png",
    dpi: int = 200,
) -> PercentileFigure:
    """5%-likely and median rate against the sweep variable.

    Accepts either CSV schema; the per-user results file is required for a
    correlation sweep. A benchmark scenario, when present, is drawn as two
    horizontal reference lines. A non-monotone sweep is sorted with a
    warning.
    """
    if kind not in (PERCENTILE_VS_RHO, PERCENTILE_VS_PHASE):
        raise ValueError(f"unknown percentile kind {kind!r}")
    schema = sniff_schema(input_path)
    if schema == "results":
        records = read_result_records(input_path)
        sweep, q05, q50, reference = _sweep_from_results(records, kind, scenarios)
    else:
        records = read_summary_records(input_path)
        sweep, q05, q50, reference = _sweep_from_summary(records, kind, scenarios)

    ascending = np.all(np.diff(sweep) >= 0)
    descending = np.all(np.diff(sweep) <= 0)
    if not ascending:
        if not descending:
            warnings.warn("sweep variable is not monotone; sorting the series", stacklevel=2)
        idx = np.argsort(sweep, kind="stable")
        sweep, q05, q50 = sweep[idx], q05[idx], q50[idx]

    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.plot(sweep, q05, marker="o", label="5%-likely")
    ax.plot(sweep, q50, marker="s", label="median")
    if reference is not None:
        ax.axhline(reference[0], linestyle="--", color="grey", linewidth=0.9)
        ax.axhline(reference[1], linestyle="--", color="black", linewidth=0.9)
    if kind == PERCENTILE_VS_RHO:
        ax.set_xlabel("correlation coefficient")
    else:
        ax.set_xlabel("accumulated phase drift label (degrees)")
    ax.set_ylabel("per-user spectral efficiency (bit/s/Hz)")
    ax.grid(True, linestyle=":", linewidth=0.5)
    ax.legend()
    paths = _save(fig, output, dpi)
    return PercentileFigure(sweep=sweep, q05=q05, q50=q50, reference=reference, paths=paths)


def render_job(job: PlotJob):
    """Dispatch a PlotJob to the matching figure routine."""
    if job.kind == CDF_KIND:
        return plot_cdf(
            job.inputs[0], scenarios=job.scenarios, output=job.output,
            x_range=job.x_range, dpi=job.dpi,
        )
    return plot_percentiles(
        job.inputs[0],
        PERCENTILE_VS_RHO if job.kind == PERCENTILE_VS_RHO else PERCENTILE_VS_PHASE,
        scenarios=job.scenarios,
        output=job.output,
        dpi=job.dpi,
    )
