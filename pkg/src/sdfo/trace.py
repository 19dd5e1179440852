"""Per-iteration run records and their delimited serialization.

The CSV schema is fixed (column order below) and floats are written with
17 significant digits so a round-trip through disk is lossless.  Header
comment lines starting with ``#`` carry reproducibility metadata.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

TRACE_COLUMNS = (
    "k",
    "success",
    "delta",
    "step_norm",
    "f_true_current",
    "est_current",
    "est_trial",
    "samples_current",
    "samples_trial",
)


@dataclass(frozen=True)
class IterationRecord:
    """One optimizer iteration.

    The nine scalar fields form the CSV schema.  The vector fields
    (iterate, direction, step) are kept in memory for diagnostics that
    need them and are not serialized.
    """

    k: int
    success: bool
    delta: float
    step_norm: float
    f_true_current: float
    est_current: float
    est_trial: float
    samples_current: int
    samples_trial: int
    x: np.ndarray | None = None
    direction: np.ndarray | None = None
    step: np.ndarray | None = None


def format_float(value: float) -> str:
    return format(float(value), ".17g")


def _metadata_lines(metadata: Mapping[str, object] | None) -> list[str]:
    if not metadata:
        return []
    return [f"# {key}={value}" for key, value in metadata.items()]


def write_trace_csv(
    path, records: Iterable[IterationRecord], metadata: Mapping[str, object] | None = None
) -> None:
    lines = _metadata_lines(metadata)
    lines.append(",".join(TRACE_COLUMNS))
    for rec in records:
        lines.append(
            ",".join(
                (
                    str(rec.k),
                    "1" if rec.success else "0",
                    format_float(rec.delta),
                    format_float(rec.step_norm),
                    format_float(rec.f_true_current),
                    format_float(rec.est_current),
                    format_float(rec.est_trial),
                    str(rec.samples_current),
                    str(rec.samples_trial),
                )
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_trace_csv(path) -> list[IterationRecord]:
    """Parse a trace written by :func:`write_trace_csv`.

    Vector fields are not stored on disk, so the returned records carry
    ``None`` for them.
    """
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    rows = [ln for ln in lines if ln and not ln.startswith("#")]
    if not rows:
        raise ValueError(f"no header row found in {path}")
    header = tuple(rows[0].split(","))
    if header != TRACE_COLUMNS:
        raise ValueError(f"unexpected trace header {header} in {path}")
    records = []
    for row in rows[1:]:
        parts = row.split(",")
        if len(parts) != len(TRACE_COLUMNS):
            raise ValueError(f"malformed trace row in {path}: {row!r}")
        records.append(
            IterationRecord(
                k=int(parts[0]),
                success=bool(int(parts[1])),
                delta=float(parts[2]),
                step_norm=float(parts[3]),
                f_true_current=float(parts[4]),
                est_current=float(parts[5]),
                est_trial=float(parts[6]),
                samples_current=int(parts[7]),
                samples_trial=int(parts[8]),
            )
        )
    return records
