"""Report documents and CSV export.

Every command's JSON output shares one envelope so downstream tooling can
treat runs uniformly.  The `results` payload is a pure function of
(parameters, seed); wall time is the only field allowed to vary between
identical runs.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from . import __version__


@dataclass(frozen=True)
class ReportDocument:
    command: str
    parameters: dict[str, Any]
    results: dict[str, Any]
    seed: int
    wall_time_seconds: float
    version: str = field(default=__version__)

    def __post_init__(self) -> None:
        if not (0 <= self.seed < 2**64):
            raise ValueError(f"seed must fit in 64 unsigned bits, got {self.seed}")
        if self.wall_time_seconds < 0:
            raise ValueError("wall_time_seconds must be nonnegative")

    def as_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "parameters": self.parameters,
            "results": self.results,
            "seed": self.seed,
            "version": self.version,
            "wall_time_seconds": self.wall_time_seconds,
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.as_dict(), indent=indent, sort_keys=False)


def _write_rows(header: Sequence[str], rows: Sequence[Mapping[str, Any]]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(header), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row[k] for k in header})
    return buf.getvalue()


def estimates_csv(rows: Sequence[Mapping[str, Any]]) -> str:
    """One row per lattice size of an estimate run."""
    return _write_rows(("n", "replicates", "mean", "stderr", "ci_lo", "ci_hi"), rows)


def scan_csv(rows: Sequence[Mapping[str, Any]]) -> str:
    """One row per p value of a survival scan."""
    return _write_rows(("p", "depth", "trials", "successes", "frequency", "stderr"), rows)


def probe_csv(rows: Sequence[Mapping[str, Any]]) -> str:
    """One row per slack value of a flat-edge probe."""
    return _write_rows(("M", "freq_A", "freq_A_prime", "freq_AA", "stderr_A", "stderr_AA"), rows)


def median_suite_csv(rows: Sequence[Mapping[str, Any]]) -> str:
    """One row per (family, k) cell of a median-suite run."""
    return _write_rows(("family", "k", "n", "replicates", "mean", "stderr"), rows)


_CSV_WRITERS = {
    "estimates": estimates_csv,
    "scan": scan_csv,
    "probe": probe_csv,
    "median_suite": median_suite_csv,
}


def csv_for(kind: str, rows: Sequence[Mapping[str, Any]]) -> str:
    try:
        writer = _CSV_WRITERS[kind]
    except KeyError:
        raise ValueError(f"no CSV writer named {kind!r}") from None
    return writer(rows)
