"""Panel ingestion: rectangular entity-by-year series and scalar covariates.

Two delimited-text layouts are supported for panels:

* wide -- header ``entity,<year1>,...,<yearT>``, one row per entity;
* long -- header ``entity,year,value``, one row per (entity, year) cell.

A covariate file is two columns, ``entity,value`` (header optional).
Entities with incomplete year coverage are either rejected or, with
``filter_incomplete``, dropped and reported as ``DROPPED <label>
missing=<count>`` lines on the diagnostic channel.
"""
from __future__ import annotations

import csv
import io
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_labels

DELIMITERS = {"comma": ",", "tab": "\t"}


@dataclass(eq=False)
class PanelSeries:
    """A complete rectangular panel: n entities, T years, no missing cells.

    ``values[i, t]`` is the score of ``entities[i]`` in ``years[t]``. Rows are
    frozen after construction and safe to share across threads.
    """

    entities: list[str]
    years: list[int]
    values: np.ndarray

    def __post_init__(self):
        self.entities = check_labels(self.entities)
        self.years = [int(y) for y in self.years]
        if len(self.entities) < 2:
            raise ValueError("a panel needs at least 2 entities")
        if len(self.years) < 1:
            raise ValueError("a panel needs at least 1 year")
        if any(b <= a for a, b in zip(self.years, self.years[1:])):
            raise ValueError("years must be strictly increasing")
        arr = np.array(self.values, dtype=np.float64)
        if arr.shape != (len(self.entities), len(self.years)):
            raise ValueError(
                f"values shape {arr.shape} does not match "
                f"{len(self.entities)} entities x {len(self.years)} years"
            )
        if not np.isfinite(arr).all():
            raise ValueError("panel values must be finite (no missing cells)")
        arr.flags.writeable = False
        self.values = arr

    @property
    def n(self) -> int:
        return len(self.entities)

    @property
    def n_years(self) -> int:
        return len(self.years)

    def row(self, i: int) -> np.ndarray:
        return self.values[i]

    def year_column(self, year: int) -> np.ndarray:
        try:
            t = self.years.index(int(year))
        except ValueError:
            raise ValueError(f"year {year} not present in panel") from None
        return self.values[:, t]

    def equals(self, other: "PanelSeries") -> bool:
        """Bit-exact structural equality (labels, years, values)."""
        return (
            self.entities == other.entities
            and self.years == other.years
            and self.values.shape == other.values.shape
            and bool(np.all(self.values == other.values))
        )


@dataclass(eq=False)
class CovariateMap:
    """Scalar covariate per entity (e.g. GDP per capita)."""

    entries: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for label, value in self.entries.items():
            label = str(label)
            value = float(value)
            if not label:
                raise ValueError("covariate labels must be non-empty")
            if not math.isfinite(value):
                raise ValueError(f"covariate value for {label!r} is not finite")
            clean[label] = value
        self.entries = clean

    def __getitem__(self, label: str) -> float:
        return self.entries[label]

    def __contains__(self, label: str) -> bool:
        return label in self.entries

    def __len__(self) -> int:
        return len(self.entries)


def _open_text(source):
    """Accept a path, text stream, or byte stream; yield decoded lines."""
    if hasattr(source, "read"):
        data = source.read()
        if isinstance(data, bytes):
            data = data.decode("utf-8")
        return io.StringIO(data)
    return open(source, "r", encoding="utf-8", newline="")


def _parse_cell(text: str, where: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ValueError(f"non-numeric value {text!r} {where}") from None
    if math.isinf(value):
        raise ValueError(f"non-finite value {text!r} {where}")
    return value


def _is_missing(text: str) -> bool:
    text = text.strip()
    if text == "":
        return True
    try:
        return math.isnan(float(text))
    except ValueError:
        return False


def load_panel(source, layout="wide", filter_incomplete=False, delimiter=",",
               diagnostics=None) -> PanelSeries:
    """Parse a delimited panel file into a validated PanelSeries.

    ``layout`` is ``"wide"`` or ``"long"``. With ``filter_incomplete``,
    entities missing any year are dropped and reported on ``diagnostics``
    (default: stderr); otherwise a missing cell is an error. Empty cells and
    NaN markers count as missing. Surviving entities keep source order; year
    columns are sorted ascending.
    """
    if layout not in ("wide", "long"):
        raise ValueError(f"unknown panel layout: {layout!r} (choose wide or long)")
    out = diagnostics if diagnostics is not None else sys.stderr
    stream = _open_text(source)
    try:
        rows = [row for row in csv.reader(stream, delimiter=delimiter)]
    finally:
        stream.close()
    rows = [row for row in rows if row and any(cell.strip() for cell in row)]
    if not rows:
        raise ValueError("empty panel file")
    if layout == "wide":
        entities, years, cells = _parse_wide(rows)
    else:
        entities, years, cells = _parse_long(rows)

    complete, dropped = [], []
    for label in entities:
        missing = sum(1 for y in years if y not in cells[label])
        if missing == 0:
            complete.append(label)
        else:
            dropped.append((label, missing))
    if dropped and not filter_incomplete:
        label, missing = dropped[0]
        raise ValueError(f"entity {label!r} is missing {missing} year(s); "
                         "pass filter_incomplete to drop incomplete entities")
    for label, missing in dropped:
        print(f"DROPPED {label} missing={missing}", file=out)
    if len(complete) < 2:
        raise ValueError(f"fewer than 2 complete entities ({len(complete)}) after filtering")

    values = np.array([[cells[label][y] for y in years] for label in complete],
                      dtype=np.float64)
    return PanelSeries(entities=complete, years=years, values=values)


def _parse_wide(rows):
    header = [cell.strip() for cell in rows[0]]
    if not header or header[0].lower() != "entity" or len(header) < 2:
        raise ValueError("wide panel header must be 'entity,<year1>,...,<yearT>'")
    try:
        years = [int(cell) for cell in header[1:]]
    except ValueError:
        raise ValueError("wide panel header years must be integers") from None
    if len(set(years)) != len(years):
        raise ValueError("duplicate year columns in wide panel header")
    order = sorted(range(len(years)), key=lambda t: years[t])

    entities, cells = [], {}
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ValueError(f"malformed row at line {lineno}: "
                             f"expected {len(header)} fields, got {len(row)}")
        label = row[0].strip()
        if not label:
            raise ValueError(f"empty entity label at line {lineno}")
        if label in cells:
            raise ValueError(f"duplicate entity label: {label!r}")
        per_year = {}
        for t in order:
            cell = row[1 + t]
            if _is_missing(cell):
                continue
            per_year[years[t]] = _parse_cell(
                cell, f"for entity {label!r}, year {years[t]}")
        entities.append(label)
        cells[label] = per_year
    return entities, sorted(years), cells


def _parse_long(rows):
    header = [cell.strip().lower() for cell in rows[0]]
    if header != ["entity", "year", "value"]:
        raise ValueError("long panel header must be 'entity,year,value'")
    entities, cells = [], {}
    years = set()
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 3:
            raise ValueError(f"malformed row at line {lineno}: expected 3 fields, got {len(row)}")
        label = row[0].strip()
        if not label:
            raise ValueError(f"empty entity label at line {lineno}")
        try:
            year = int(row[1])
        except ValueError:
            raise ValueError(f"non-integer year {row[1]!r} at line {lineno}") from None
        if label not in cells:
            entities.append(label)
            cells[label] = {}
        if year in cells[label]:
            raise ValueError(f"duplicate (entity, year) pair: ({label!r}, {year})")
        if _is_missing(row[2]):
            continue
        cells[label][year] = _parse_cell(row[2], f"for entity {label!r}, year {year}")
        years.add(year)
    return entities, sorted(years), cells


def load_covariate(source, delimiter=",") -> CovariateMap:
    """Parse a two-column entity,value file. The header row is optional."""
    stream = _open_text(source)
    try:
        rows = [row for row in csv.reader(stream, delimiter=delimiter)]
    finally:
        stream.close()
    rows = [row for row in rows if row and any(cell.strip() for cell in row)]
    if rows and [cell.strip().lower() for cell in rows[0]] == ["entity", "value"]:
        rows = rows[1:]
    entries = {}
    for lineno, row in enumerate(rows, start=1):
        if len(row) != 2:
            raise ValueError(f"malformed covariate row at line {lineno}: "
                             f"expected 2 fields, got {len(row)}")
        label = row[0].strip()
        if not label:
            raise ValueError(f"empty covariate label at line {lineno}")
        if label in entries:
            raise ValueError(f"duplicate covariate label: {label!r}")
        entries[label] = _parse_cell(row[1], f"for entity {label!r}")
    return CovariateMap(entries=entries)


def write_panel_wide(panel: PanelSeries, delimiter=",") -> str:
    """Serialize to the wide layout. Values round-trip bit-exactly."""
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    writer.writerow(["entity"] + [str(y) for y in panel.years])
    for i, label in enumerate(panel.entities):
        writer.writerow([label] + [repr(float(v)) for v in panel.values[i]])
    return buf.getvalue()


def check_value_range(panel: PanelSeries, lo: float, hi: float) -> None:
    """Reject panels with values outside [lo, hi] (opt-in dataset check)."""
    bad = (panel.values < lo) | (panel.values > hi)
    if bad.any():
        i, t = np.argwhere(bad)[0]
        raise ValueError(
            f"value {panel.values[i, t]} for entity {panel.entities[i]!r} in "
            f"year {panel.years[t]} is outside the expected range [{lo}, {hi}]")
