"""Reading and validating the simulator's CSV interfaces.

Two schemas exist: per-user result rows and per-scenario summaries. Files
are identified by their header, so either kind can be fed to the tools that
accept both.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

RESULTS_HEADER = [
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
SUMMARY_HEADER = ["scenario", "q05_bpshz", "q50_bpshz", "n_samples"]


class SchemaError(ValueError):
    """The input file does not match a known CSV schema."""


class MissingScenarioError(KeyError):
    """A requested scenario label is not present in the input."""

    def __init__(self, wanted, available):
        self.wanted = wanted
        self.available = list(available)
        super().__init__(
            f"scenario {wanted!r} not found; available: {', '.join(self.available) or '(none)'}"
        )

    def __str__(self) -> str:
        return self.args[0]


@dataclass(frozen=True)
class ResultRecord:
    scenario: str
    rho: float
    tpn_label_deg: float
    se_bpshz: float


@dataclass(frozen=True)
class SummaryRecord:
    scenario: str
    q05_bpshz: float
    q50_bpshz: float
    n_samples: int


def sniff_schema(path) -> str:
    """Return "results" or "summary" based on the header row."""
    with open(path, "r", newline="", encoding="utf-8") as fh:
        header = next(csv.reader(fh), None)
    if header == RESULTS_HEADER:
        return "results"
    if header == SUMMARY_HEADER:
        return "summary"
    raise SchemaError(f"{path}: header {header} matches neither the results nor summary schema")


def read_result_records(path) -> list[ResultRecord]:
    if sniff_schema(path) != "results":
        raise SchemaError(f"{path}: expected the per-user results schema")
    records = []
    with open(path, "r", newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            try:
                records.append(
                    ResultRecord(
                        scenario=rec["scenario"],
                        rho=float(rec["rho"]),
                        tpn_label_deg=float(rec["tpn_label_deg"]),
                        se_bpshz=float(rec["se_bpshz"]),
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise SchemaError(f"{path}: malformed row {rec}: {exc}") from exc
    if not records:
        raise SchemaError(f"{path}: no data rows")
    return records


def read_summary_records(path) -> list[SummaryRecord]:
    if sniff_schema(path) != "summary":
        raise SchemaError(f"{path}: expected the summary schema")
    records = []
    with open(path, "r", newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            try:
                records.append(
                    SummaryRecord(
                        scenario=rec["scenario"],
                        q05_bpshz=float(rec["q05_bpshz"]),
                        q50_bpshz=float(rec["q50_bpshz"]),
                        n_samples=int(rec["n_samples"]),
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise SchemaError(f"{path}: malformed row {rec}: {exc}") from exc
    if not records:
        raise SchemaError(f"{path}: no data rows")
    return records
