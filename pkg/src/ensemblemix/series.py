"""Sampled observables over one evolution and their CSV form."""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

COLUMNS = (
    "t",
    "Ne1",
    "Ne2",
    "Imix_over_Ngamma",
    "trace_err",
    "herm_err",
    "min_diag",
    "top1",
    "top2",
    "phi",
)

UNITS_LINE = "units: rates and frequencies in gamma_1, times in 1/gamma_1"


def format_float(x: float) -> str:
    return format(float(x), ".17g")


@dataclass
class TimeSeries:
    """Column store of sampled observables.

    ``min_eig`` holds the smallest density-matrix eigenvalue per sample when it
    was tracked; it is diagnostic only and not part of the CSV layout.
    """

    data: dict[str, np.ndarray]
    min_eig: np.ndarray | None = None
    snapshots: dict[float, np.ndarray] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        missing = [c for c in COLUMNS if c not in self.data]
        if missing:
            raise ValueError(f"missing columns: {missing}")
        self.data = {c: np.asarray(self.data[c], dtype=float) for c in COLUMNS}
        n = len(self.data["t"])
        if any(len(v) != n for v in self.data.values()):
            raise ValueError("columns have different lengths")
        if n > 1 and not np.all(np.diff(self.data["t"]) > 0):
            raise ValueError("time column must be strictly increasing")

    @classmethod
    def from_columns(cls, **columns) -> "TimeSeries":
        """Build a series from a subset of columns; the rest are filled with NaN."""
        t = np.asarray(columns["t"], dtype=float)
        data = {c: np.asarray(columns.get(c, np.full(len(t), np.nan)), dtype=float) for c in COLUMNS}
        return cls(data)

    def __len__(self) -> int:
        return len(self.data["t"])

    def __getitem__(self, name: str) -> np.ndarray:
        return self.data[name]

    @property
    def t(self) -> np.ndarray:
        return self.data["t"]

    @property
    def sample_interval(self) -> float:
        return float(np.median(np.diff(self.t)))

    def value_at(self, name: str, t: float) -> float:
        i = int(np.argmin(np.abs(self.t - t)))
        return float(self.data[name][i])

    def window(self, t_a: float, t_b: float) -> np.ndarray:
        t = self.t
        tol = 1e-9 * max(1.0, abs(t_b))
        return (t >= t_a - tol) & (t <= t_b + tol)

    # -- CSV ------------------------------------------------------------------

    def to_csv(self, path=None, header: list[str] | None = None) -> str:
        buf = io.StringIO()
        buf.write(f"# {UNITS_LINE}\n")
        for line in header or []:
            buf.write(f"# {line}\n")
        buf.write(",".join(COLUMNS) + "\n")
        cols = [self.data[c] for c in COLUMNS]
        for row in zip(*cols):
            buf.write(",".join(format_float(v) for v in row) + "\n")
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, newline="\n")
        return text

    @classmethod
    def from_csv(cls, path) -> "TimeSeries":
        return cls.from_csv_text(Path(path).read_text())

    @classmethod
    def from_csv_text(cls, text: str) -> "TimeSeries":
        lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
        names = lines[0].split(",")
        if tuple(names) != COLUMNS:
            raise ValueError(f"unexpected CSV header {names}")
        rows = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]], dtype=float)
        rows = rows.reshape(-1, len(COLUMNS))
        return cls({c: rows[:, i] for i, c in enumerate(COLUMNS)})
