"""Loading, validation and filtering of wide-format indicator panels."""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import InsufficientDataError, LoadError, ParameterError, RangeError

log = logging.getLogger(__name__)

MISSING_MARKERS = frozenset({"", "na", "n/a", "nan"})


@dataclass(frozen=True)
class IndicatorSeries:
    id: str
    values: np.ndarray  # float, NaN marks a missing value
    years: np.ndarray  # int, unit step
    label: str = ""
    sdg: int | None = None

    def __post_init__(self):
        if len(self.values) != len(self.years):
            raise ValueError(f"{self.id}: {len(self.values)} values for {len(self.years)} years")
        if len(self.years) > 1 and np.any(np.diff(self.years) != 1):
            raise ValueError(f"{self.id}: years must increase in unit steps")

    @property
    def n_missing(self) -> int:
        return int(np.isnan(self.values).sum())


@dataclass(frozen=True)
class DropRecord:
    id: str
    reason: str  # "missing" | "constant-lag-slice"


@dataclass(frozen=True)
class Panel:
    window: tuple[int, int]
    series: tuple[IndicatorSeries, ...]
    dropped: tuple[DropRecord, ...] = field(default=())

    @property
    def ids(self) -> list[str]:
        return [s.id for s in self.series]

    @property
    def years(self) -> np.ndarray:
        return np.arange(self.window[0], self.window[1] + 1)

    def matrix(self) -> np.ndarray:
        """Values as an (n_series, n_years) float array."""
        if not self.series:
            return np.empty((0, self.window[1] - self.window[0] + 1))
        return np.vstack([s.values for s in self.series])

    def __getitem__(self, sid: str) -> IndicatorSeries:
        for s in self.series:
            if s.id == sid:
                return s
        raise KeyError(sid)


@dataclass(frozen=True)
class RangeViolation:
    id: str
    year: int
    value: float


def parse_window(text: str) -> tuple[int, int]:
    """Parse ``"2000:2024"`` into ``(2000, 2024)``."""
    try:
        a, b = text.split(":")
        start, end = int(a), int(b)
    except ValueError:
        raise ParameterError(f"window must look like START:END, got {text!r}") from None
    if end < start:
        raise ParameterError(f"window end {end} precedes start {start}")
    return start, end


def _parse_cell(cell: str) -> float:
    text = cell.strip()
    if text.lower() in MISSING_MARKERS:
        return math.nan
    try:
        value = float(text)
    except ValueError:
        return math.nan
    return value if math.isfinite(value) else math.nan


def load_panel(path, window: tuple[int, int] | None = None) -> Panel:
    """Read a wide CSV (``year,<id1>,<id2>,...``) into a raw panel.

    Years of the window absent from the file become missing values. With no
    window, the file's min and max year define it.
    """
    path = Path(path)
    if not path.exists():
        raise LoadError(f"input file not found: {path}")
    with path.open(newline="", encoding="utf-8-sig") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise LoadError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if len(header) < 2 or header[0].lower() != "year":
        raise LoadError(f"{path}: header must start with 'year' followed by indicator ids")
    ids = header[1:]
    seen = set()
    for col, sid in enumerate(ids, start=2):
        if not sid:
            raise LoadError(f"{path}: empty indicator id in header column {col}")
        if sid in seen:
            raise LoadError(f"{path}: duplicate indicator id {sid!r} in header column {col}")
        seen.add(sid)

    by_year: dict[int, list[float]] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        try:
            year = int(row[0].strip())
        except ValueError:
            raise LoadError(f"{path}: row {lineno}, column 1: non-numeric year {row[0]!r}") from None
        if year in by_year:
            raise LoadError(f"{path}: row {lineno}: duplicate year {year}")
        if len(row) > len(header):
            raise LoadError(f"{path}: row {lineno} has {len(row)} cells, header has {len(header)}")
        cells = row[1:] + [""] * (len(header) - len(row))
        by_year[year] = [_parse_cell(c) for c in cells]

    if not by_year:
        raise LoadError(f"{path}: no data rows")
    if window is None:
        window = (min(by_year), max(by_year))
    years = np.arange(window[0], window[1] + 1)
    missing_row = [math.nan] * len(ids)
    data = np.array([by_year.get(int(y), missing_row) for y in years], dtype=float)
    series = tuple(
        IndicatorSeries(id=sid, values=data[:, j].copy(), years=years.copy())
        for j, sid in enumerate(ids)
    )
    return Panel(window=window, series=series)


def load_metadata(path) -> dict[str, tuple[str, int | None]]:
    """Read ``id,label,sdg`` rows; returns ``{id: (label, sdg)}``."""
    path = Path(path)
    if not path.exists():
        raise LoadError(f"metadata file not found: {path}")
    meta = {}
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "id" not in reader.fieldnames:
            raise LoadError(f"{path}: metadata header must contain 'id'")
        for lineno, row in enumerate(reader, start=2):
            sid = (row.get("id") or "").strip()
            if not sid:
                continue
            sdg_text = (row.get("sdg") or "").strip()
            sdg = None
            if sdg_text:
                try:
                    sdg = int(sdg_text)
                except ValueError:
                    raise LoadError(f"{path}: row {lineno}: sdg {sdg_text!r} is not an integer") from None
                if not 1 <= sdg <= 17:
                    raise LoadError(f"{path}: row {lineno}: sdg {sdg} outside 1..17")
            meta[sid] = ((row.get("label") or "").strip(), sdg)
    return meta


def attach_metadata(panel: Panel, meta: dict[str, tuple[str, int | None]]) -> Panel:
    series = tuple(
        replace(s, label=meta[s.id][0], sdg=meta[s.id][1]) if s.id in meta else s
        for s in panel.series
    )
    return replace(panel, series=series)


def _constant(values: np.ndarray) -> bool:
    return bool(np.all(values == values[0]))


def filter_panel(panel: Panel) -> Panel:
    """Drop series with missing values or a constant lag slice.

    A series is constant-lag-slice when it has no variation over
    ``[start, end-1]`` or over ``[start+1, end]``.
    """
    n_years = panel.window[1] - panel.window[0] + 1
    if n_years < 3:
        raise ParameterError(f"window must span at least 3 years, got {n_years}")
    kept, dropped = [], list(panel.dropped)
    for s in panel.series:
        if s.n_missing:
            dropped.append(DropRecord(s.id, "missing"))
        elif _constant(s.values[:-1]) or _constant(s.values[1:]):
            dropped.append(DropRecord(s.id, "constant-lag-slice"))
        else:
            kept.append(s)
    for d in dropped[len(panel.dropped):]:
        log.info("dropped %s (%s)", d.id, d.reason)
    if len(kept) < 2:
        raise InsufficientDataError(
            f"only {len(kept)} series survive filtering (need at least 2)"
        )
    return Panel(window=panel.window, series=tuple(kept), dropped=tuple(dropped))


def validate_range(panel: Panel, strict: bool = False) -> list[RangeViolation]:
    """List values outside [0, 100]; raise RangeError instead under ``strict``."""
    report = []
    for s in panel.series:
        bad = ~np.isnan(s.values) & ((s.values < 0) | (s.values > 100))
        for idx in np.flatnonzero(bad):
            report.append(RangeViolation(s.id, int(s.years[idx]), float(s.values[idx])))
    if report:
        if strict:
            first = report[0]
            raise RangeError(
                f"{len(report)} value(s) outside [0,100], first at "
                f"({first.id}, {first.year}) = {first.value}"
            )
        log.warning("%d value(s) outside [0,100]", len(report))
    return report


def long_to_wide(rows, ids_order=None) -> tuple[list[int], list[str], dict]:
    """Pivot ``(id, year, value)`` records into year rows and id columns."""
    table: dict[tuple[str, int], str] = {}
    ids, years = [], set()
    for sid, year, value in rows:
        if sid not in ids:
            ids.append(sid)
        key = (sid, int(year))
        if key in table:
            raise LoadError(f"duplicate record for ({sid}, {year})")
        table[key] = value
        years.add(int(year))
    if ids_order is not None:
        ids = list(ids_order)
    return sorted(years), ids, table
