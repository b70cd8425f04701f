"""Bundled reference data: system characterization and benchmark measurements.

The package ships the full characterization of the reference testbed (as a
run configuration with uncertainties) and the gains and error rates it
measured over five fiber configurations at three intensities each.  Both
files double as documentation and as comparison fixtures.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import yaml

from .config import RunConfig, from_dict
from .link import ParameterBand, UncertainSystemConfig, transmissions_from_total_loss

REFERENCE_CONFIG_RESOURCE = "reference_config.yaml"
BENCHMARK_RESOURCE = "benchmark_observations.csv"

EXPECTED_BENCHMARK_ROWS = 15
EXPECTED_LOSSES_DB = (13.6, 18.2, 22.7, 27.2, 9.0)

# (csv column stem, band key) for the four observables of every row.
OBSERVABLE_COLUMNS = (
    ("gain_x", "gain_x"),
    ("gain_z", "gain_z"),
    ("error_x", "error_x"),
    ("error_z", "error_z"),
)


@dataclass(frozen=True)
class BenchmarkRow:
    """One measured configuration: fiber type, intensities, loss, observables."""

    fiber: str
    mu: float
    mu_err: float
    ell_a_km: float
    ell_b_km: float
    loss_db: float
    values: dict[str, float]
    errors: dict[str, float]
    note: str = ""

    def label(self) -> str:
        return f"{self.fiber}/{self.loss_db:g}dB/mu={self.mu:g}"


def _data_text(name: str) -> str:
    return resources.files("mdiqkd.data").joinpath(name).read_text()


def load_reference_config() -> RunConfig:
    """The bundled testbed characterization, uncertainties included."""
    document = yaml.safe_load(_data_text(REFERENCE_CONFIG_RESOURCE))
    return from_dict(document, source=REFERENCE_CONFIG_RESOURCE)


def _parse_rows(text: str, source: str) -> list[BenchmarkRow]:
    rows = []
    reader = csv.DictReader(text.splitlines())
    for record in reader:
        values = {key: float(record[col]) for col, key in OBSERVABLE_COLUMNS}
        errors = {key: float(record[f"{col}_err"]) for col, key in OBSERVABLE_COLUMNS}
        rows.append(
            BenchmarkRow(
                fiber=record["fiber"],
                mu=float(record["mu"]),
                mu_err=float(record["mu_err"]),
                ell_a_km=float(record["ell_a_km"]),
                ell_b_km=float(record["ell_b_km"]),
                loss_db=float(record["loss_db"]),
                values=values,
                errors=errors,
                note=(record.get("note") or "").strip(),
            )
        )
    if not rows:
        raise ValueError(f"{source}: no benchmark rows found")
    return rows


def load_benchmark_rows(path: str | Path | None = None) -> list[BenchmarkRow]:
    """Benchmark measurements; the bundled set has 15 rows (5 configurations x 3 intensities)."""
    if path is None:
        rows = _parse_rows(_data_text(BENCHMARK_RESOURCE), BENCHMARK_RESOURCE)
        if len(rows) != EXPECTED_BENCHMARK_ROWS:
            raise ValueError(
                f"bundled benchmark should have {EXPECTED_BENCHMARK_ROWS} rows, found {len(rows)}"
            )
        if {row.loss_db for row in rows} != set(EXPECTED_LOSSES_DB):
            raise ValueError("bundled benchmark loss values were tampered with")
        return rows
    path = Path(path)
    return _parse_rows(path.read_text(), str(path))


def row_config(base: UncertainSystemConfig, row: BenchmarkRow) -> UncertainSystemConfig:
    """Specialize the characterization to one benchmark row.

    Both parties used the same mean photon number; the total loss splits
    evenly between the two arms, matching the testbed's balanced-transmission
    configuration.
    """
    t_alice, t_bob = transmissions_from_total_loss(row.loss_db)
    intensity = ParameterBand(central=row.mu, half_width=row.mu_err)
    return base.with_point(mu=intensity, sigma=intensity, t_alice=t_alice, t_bob=t_bob)
