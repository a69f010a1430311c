"""Experiment orchestration: scenario grids, seeded parallel drops, CSV output.

Every (scenario, drop) pair derives its random streams from the master seed
and its own indices, so results are identical for any worker count and any
execution order. Rows are sorted by (scenario, drop, user) before writing.
"""

from __future__ import annotations

import csv
import os
import tempfile
from dataclasses import dataclass, field
from multiprocessing import Pool

import numpy as np

from .aging import correlation_coefficient
from .config import SystemConfig, accumulated_phase_variance_from_label
from .errors import InvalidParameterError
from .performance import cdf_and_percentiles, sinr_closed_form, spectral_efficiency
from .precoding import estimate_expectations, power_control_eta
from .propagation import draw_large_scale
from .training import assign_pilots, mmse_variances

RESULTS_COLUMNS = [
    "scenario",
    "drop",
    "user",
    "velocity_kmh",
    "rho",
    "tpn_label_deg",
    "attenuation",
    "gamma_linear",
    "se_bpshz",
]
SUMMARY_COLUMNS = ["scenario", "q05_bpshz", "q50_bpshz", "n_samples"]


@dataclass(frozen=True)
class Scenario:
    """One operating point of the sweep."""

    label: str
    velocity_kmh: float | None = 0.0  # None = take per-user speeds from the config
    phase_label_deg: float = 0.0
    perfect_csi: bool = False


@dataclass(frozen=True)
class ScenarioSpec:
    """A full run: scenario grid, drop/inner counts, and the master seed."""

    velocities: tuple[float, ...] = (30.0, 50.0, 120.0)
    phase_labels: tuple[float, ...] = (30.0, 90.0, 150.0)
    include_benchmark: bool = True
    include_perfect_csi: bool = False
    n_drops: int = 200
    n_inner: int = 200
    seed: int = 1

    def __post_init__(self):
        if self.n_drops < 1 or self.n_inner < 1:
            raise InvalidParameterError("n_drops and n_inner must be >= 1")
        labels = [s.label for s in self.scenarios()]
        if len(labels) != len(set(labels)):
            raise InvalidParameterError(f"scenario labels must be unique, got {labels}")

    def scenarios(self) -> list[Scenario]:
        out: list[Scenario] = []
        if self.include_benchmark:
            out.append(Scenario(label="benchmark"))
        for v in self.velocities:
            out.append(Scenario(label=f"v{v:g}", velocity_kmh=float(v)))
        for deg in self.phase_labels:
            out.append(Scenario(label=f"pn{deg:g}", phase_label_deg=float(deg)))
        if self.include_perfect_csi:
            out.append(Scenario(label="perfect_csi", perfect_csi=True))
        return out


@dataclass(frozen=True)
class ResultRow:
    scenario: str
    drop: int
    user: int
    velocity_kmh: float
    rho: float
    tpn_label_deg: float
    attenuation: float
    gamma_linear: float
    se_bpshz: float


@dataclass(frozen=True)
class SummaryRow:
    scenario: str
    q05_bpshz: float
    q50_bpshz: float
    n_samples: int


@dataclass(frozen=True)
class Diagnostic:
    scenario: str
    drop: int
    error: str


@dataclass(frozen=True)
class ExperimentResult:
    rows: list[ResultRow]
    summaries: list[SummaryRow]
    diagnostics: list[Diagnostic] = field(default_factory=list)


def _drop_streams(seed: int, scenario_index: int, drop_index: int):
    root = np.random.SeedSequence(seed, spawn_key=(scenario_index, drop_index))
    children = root.spawn(3)
    return tuple(np.random.default_rng(c) for c in children)


def compute_drop(
    config: SystemConfig,
    scenario: Scenario,
    scenario_index: int,
    drop_index: int,
    seed: int,
    n_inner: int,
) -> list[ResultRow]:
    """Evaluate every user of one drop under one scenario."""
    rng_drop, rng_plan, rng_inner = _drop_streams(seed, scenario_index, drop_index)
    drop = draw_large_scale(config, rng_drop)
    beta = drop.beta
    noise = config.noise_variance_w()
    num_users = config.num_users

    if scenario.perfect_csi:
        alpha = beta
        rho = np.ones(num_users)
        attenuation = 1.0
        speeds = np.zeros(num_users)
    else:
        plan = assign_pilots(num_users, config.pilot_length, config.pilot_policy, rng_plan)
        alpha = mmse_variances(beta, plan, config.pilot_energy_w(), noise)
        if scenario.velocity_kmh is None:
            speeds = config.speeds_kmh()
        else:
            speeds = np.full(num_users, scenario.velocity_kmh)
        rho = np.atleast_1d(
            correlation_coefficient(speeds, config.carrier_freq_hz, config.delay.total_s)
        )
        acc_var = accumulated_phase_variance_from_label(
            scenario.phase_label_deg, config.phase_label_mapping
        )
        attenuation = float(np.exp(-0.5 * acc_var))

    xi, chi, delta = estimate_expectations(beta, alpha, n_inner, rng_inner)
    eta = power_control_eta(delta)
    gamma = sinr_closed_form(rho, eta, xi, chi, noise, config.tx_power_ap_w, attenuation)
    se = spectral_efficiency(
        gamma, config.air_delay_samples, config.n_delay_samples(), config.block_length
    )
    return [
        ResultRow(
            scenario=scenario.label,
            drop=drop_index,
            user=user,
            velocity_kmh=float(speeds[user]),
            rho=float(rho[user]),
            tpn_label_deg=float(scenario.phase_label_deg),
            attenuation=float(attenuation),
            gamma_linear=float(gamma[user]),
            se_bpshz=float(se[user]),
        )
        for user in range(num_users)
    ]


def _run_task(args) -> tuple:
    config, scenario, scenario_index, drop_index, seed, n_inner = args
    try:
        rows = compute_drop(config, scenario, scenario_index, drop_index, seed, n_inner)
        return ("ok", scenario_index, drop_index, rows)
    except Exception as exc:  # surfaced as a per-scenario diagnostic
        return ("error", scenario_index, drop_index, f"{type(exc).__name__}: {exc}")


def summarize(rows: list[ResultRow]) -> list[SummaryRow]:
    """Per-scenario 5% / median quantiles, in first-appearance order."""
    order: list[str] = []
    grouped: dict[str, list[float]] = {}
    for row in rows:
        if row.scenario not in grouped:
            order.append(row.scenario)
            grouped[row.scenario] = []
        grouped[row.scenario].append(row.se_bpshz)
    out = []
    for label in order:
        cdf = cdf_and_percentiles(grouped[label])
        out.append(
            SummaryRow(
                scenario=label,
                q05_bpshz=cdf.q05,
                q50_bpshz=cdf.q50,
                n_samples=len(grouped[label]),
            )
        )
    return out


def run_experiment(
    config: SystemConfig,
    spec: ScenarioSpec,
    workers: int = 1,
    scenario_filter: str | None = None,
) -> ExperimentResult:
    """Sweep all scenarios over n_drops drops; deterministic for a fixed seed.

    scenario_filter selects a single label ("all" or None runs everything).
    Scenario indices for seeding always refer to the full grid, so a filtered
    run reproduces the corresponding rows of the full run. A failing drop
    aborts its whole scenario and is reported as a diagnostic.
    """
    scenarios = spec.scenarios()
    if scenario_filter not in (None, "all"):
        wanted = [s for s in scenarios if s.label == scenario_filter]
        if not wanted:
            available = ", ".join(s.label for s in scenarios)
            raise InvalidParameterError(
                f"unknown scenario {scenario_filter!r}; available: {available}"
            )
    tasks = [
        (config, scenario, s_idx, d_idx, spec.seed, spec.n_inner)
        for s_idx, scenario in enumerate(scenarios)
        if scenario_filter in (None, "all") or scenario.label == scenario_filter
        for d_idx in range(spec.n_drops)
    ]

    if workers <= 1:
        outcomes = [_run_task(t) for t in tasks]
    else:
        with Pool(processes=workers) as pool:
            outcomes = pool.map(_run_task, tasks, chunksize=1)

    failed_scenarios: dict[int, list[Diagnostic]] = {}
    collected: dict[tuple[int, int], list[ResultRow]] = {}
    for status, s_idx, d_idx, payload in outcomes:
        if status == "ok":
            collected[(s_idx, d_idx)] = payload
        else:
            failed_scenarios.setdefault(s_idx, []).append(
                Diagnostic(scenario=scenarios[s_idx].label, drop=d_idx, error=payload)
            )

    rows: list[ResultRow] = []
    for key in sorted(collected):
        if key[0] in failed_scenarios:
            continue
        rows.extend(collected[key])
    diagnostics = [d for ds in failed_scenarios.values() for d in ds]
    return ExperimentResult(rows=rows, summaries=summarize(rows), diagnostics=diagnostics)


# --- CSV output ---------------------------------------------------------------


def _atomic_write(path: str, write_body) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as fh:
            write_body(fh)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def _fmt(value: float) -> str:
    return repr(float(value))


def write_results(
    rows: list[ResultRow],
    out_dir: str,
    summaries: list[SummaryRow] | None = None,
) -> tuple[str, str]:
    """Write results.csv and summary.csv atomically; returns their paths."""
    os.makedirs(out_dir, exist_ok=True)
    if summaries is None:
        summaries = summarize(rows)
    results_path = os.path.join(out_dir, "results.csv")
    summary_path = os.path.join(out_dir, "summary.csv")

    def body_results(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULTS_COLUMNS)
        for r in rows:
            writer.writerow([
                r.scenario,
                r.drop,
                r.user,
                _fmt(r.velocity_kmh),
                _fmt(r.rho),
                _fmt(r.tpn_label_deg),
                _fmt(r.attenuation),
                _fmt(r.gamma_linear),
                _fmt(r.se_bpshz),
            ])

    def body_summary(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        for s in summaries:
            writer.writerow([s.scenario, _fmt(s.q05_bpshz), _fmt(s.q50_bpshz), s.n_samples])

    try:
        _atomic_write(results_path, body_results)
        _atomic_write(summary_path, body_summary)
    except OSError as exc:
        raise OSError(f"failed writing results under {out_dir}: {exc}") from exc
    return results_path, summary_path


def read_results(path: str) -> list[ResultRow]:
    """Parse a results.csv back into rows (inverse of write_results)."""
    rows = []
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RESULTS_COLUMNS:
            raise InvalidParameterError(
                f"{path}: unexpected results schema {reader.fieldnames}"
            )
        for rec in reader:
            rows.append(
                ResultRow(
                    scenario=rec["scenario"],
                    drop=int(rec["drop"]),
                    user=int(rec["user"]),
                    velocity_kmh=float(rec["velocity_kmh"]),
                    rho=float(rec["rho"]),
                    tpn_label_deg=float(rec["tpn_label_deg"]),
                    attenuation=float(rec["attenuation"]),
                    gamma_linear=float(rec["gamma_linear"]),
                    se_bpshz=float(rec["se_bpshz"]),
                )
            )
    return rows
