"""Parsing and validation of the Kaggle SF-crime train/test CSV files."""

from __future__ import annotations

import csv
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Iterable, Optional

from .address import extract_block_flag, extract_street_number
from .errors import DataError, ParseError, SchemaError

log = logging.getLogger(__name__)

TIMESTAMP_FORMAT = "%Y-%m-%d %H:%M:%S"
# Canonical weekday names in calendar order (datetime.weekday() indexing).
WEEKDAYS = ("Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday")

TRAIN_COLUMNS = ("Dates", "Category", "Descript", "DayOfWeek", "PdDistrict",
                 "Resolution", "Address", "X", "Y")
TEST_COLUMNS = ("Id", "Dates", "DayOfWeek", "PdDistrict", "Address", "X", "Y")

# Latitudes at or above this are a known placeholder artifact (Y = 90).
OUTLIER_LATITUDE = 38.0

_TIMESTAMP_RE = re.compile(r"[0-9]{4}-[0-9]{2}-[0-9]{2} [0-9]{2}:[0-9]{2}:[0-9]{2}")


@dataclass(frozen=True, slots=True)
class RawIncident:
    timestamp: datetime
    day_of_week: str
    district: str
    address: str
    longitude: float
    latitude: float
    category: Optional[str] = None
    resolution: Optional[str] = None
    id: Optional[int] = None

    @property
    def hour(self) -> int:
        return self.timestamp.hour

    @property
    def month(self) -> int:
        return self.timestamp.month


@dataclass
class DatasetSummary:
    row_count: int = 0
    category_counts: dict = field(default_factory=dict)
    district_counts: dict = field(default_factory=dict)
    unique_address_count: int = 0
    block_count: int = 0
    non_block_count: int = 0
    hour_histogram: list = field(default_factory=lambda: [0] * 24)
    weekday_histogram: list = field(default_factory=lambda: [0] * 7)
    zero_street_number_count: int = 0
    distinct_street_numbers: int = 0  # distinct nonzero values


def parse_timestamp(text: str) -> datetime:
    """Parse ``YYYY-mm-dd hh:MM:ss``; raise ValueError on anything else."""
    if not isinstance(text, str) or not _TIMESTAMP_RE.fullmatch(text):
        raise ValueError(f"timestamp {text!r} does not match YYYY-mm-dd hh:MM:ss")
    try:
        return datetime(int(text[0:4]), int(text[5:7]), int(text[8:10]),
                        int(text[11:13]), int(text[14:16]), int(text[17:19]))
    except ValueError as exc:
        raise ValueError(f"timestamp {text!r}: {exc}") from None


def format_timestamp(ts: datetime) -> str:
    return f"{ts.year:04d}-{ts.month:02d}-{ts.day:02d} {ts.hour:02d}:{ts.minute:02d}:{ts.second:02d}"


def _header_index(header: list[str], required: Iterable[str], path) -> dict[str, int]:
    header = [h.strip() for h in header]
    missing = [c for c in required if c not in header]
    if missing:
        raise SchemaError(f"{path}: missing column(s) {', '.join(missing)}")
    return {name: header.index(name) for name in required}


def _float(value: str, line: int, column: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ParseError(f"not a number: {value!r}", row=line, column=column) from None


class _WeekdayCheck:
    """Counts weekday/date disagreements; logs the first few."""

    def __init__(self, limit=5):
        self.limit = limit
        self.mismatches = 0

    def __call__(self, ts: datetime, day: str, line: int) -> None:
        if WEEKDAYS[ts.weekday()] != day:
            self.mismatches += 1
            if self.mismatches <= self.limit:
                log.warning("line %d: DayOfWeek %s disagrees with date %s (%s)",
                            line, day, format_timestamp(ts), WEEKDAYS[ts.weekday()])

    def report(self, path) -> None:
        if self.mismatches > self.limit:
            log.warning("%s: %d weekday/date mismatches in total", path, self.mismatches)


def _read(path, columns, is_test: bool, filter_outliers: bool) -> list[RawIncident]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: no such file")
    rows: list[RawIncident] = []
    check = _WeekdayCheck()
    seen_ids: set[int] = set()
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, no header row") from None
        if is_test and "Category" in header:
            raise SchemaError(f"{path}: test file must not carry a Category column")
        idx = _header_index(header, columns, path)
        width = len(header)
        weekdays = frozenset(WEEKDAYS)
        for rec in reader:
            line = reader.line_num
            if not rec:
                continue
            if len(rec) != width:
                raise ParseError(f"expected {width} fields, got {len(rec)}", row=line)
            try:
                ts = parse_timestamp(rec[idx["Dates"]])
            except ValueError as exc:
                raise ParseError(str(exc), row=line, column="Dates") from None
            day = rec[idx["DayOfWeek"]]
            if day not in weekdays:
                raise ParseError(f"unknown weekday {day!r}", row=line, column="DayOfWeek")
            check(ts, day, line)
            lon = _float(rec[idx["X"]], line, "X")
            lat = _float(rec[idx["Y"]], line, "Y")
            if filter_outliers and lat >= OUTLIER_LATITUDE:
                continue
            if is_test:
                raw_id = rec[idx["Id"]]
                if not raw_id.isdigit():
                    raise ParseError(f"Id must be a non-negative integer, got {raw_id!r}",
                                     row=line, column="Id")
                ident = int(raw_id)
                if ident in seen_ids:
                    raise ParseError(f"duplicate Id {ident}", row=line, column="Id")
                seen_ids.add(ident)
                rows.append(RawIncident(ts, day, rec[idx["PdDistrict"]], rec[idx["Address"]],
                                        lon, lat, id=ident))
            else:
                category = rec[idx["Category"]]
                if not category:
                    raise ParseError("empty category", row=line, column="Category")
                rows.append(RawIncident(ts, day, rec[idx["PdDistrict"]], rec[idx["Address"]],
                                        lon, lat, category=category,
                                        resolution=rec[idx["Resolution"]]))
    check.report(path)
    return rows


def load_train(path, filter_outliers: bool = False) -> list[RawIncident]:
    """Read a Kaggle ``train.csv``. The Descript column is read and discarded."""
    return _read(path, TRAIN_COLUMNS, is_test=False, filter_outliers=filter_outliers)


def load_test(path, filter_outliers: bool = False) -> list[RawIncident]:
    """Read a Kaggle ``test.csv``; every row carries a unique ``id``."""
    return _read(path, TEST_COLUMNS, is_test=True, filter_outliers=filter_outliers)


def summarize(rows: Iterable[RawIncident]) -> DatasetSummary:
    categories: Counter = Counter()
    districts: Counter = Counter()
    addresses: set[str] = set()
    street_numbers: set[int] = set()
    s = DatasetSummary()
    weekday_pos = {d: i for i, d in enumerate(WEEKDAYS)}
    for r in rows:
        s.row_count += 1
        if r.category is not None:
            categories[r.category] += 1
        districts[r.district] += 1
        addresses.add(r.address)
        if extract_block_flag(r.address):
            s.block_count += 1
        else:
            s.non_block_count += 1
        no = extract_street_number(r.address)
        if no:
            street_numbers.add(no)
        else:
            s.zero_street_number_count += 1
        s.hour_histogram[r.timestamp.hour] += 1
        s.weekday_histogram[weekday_pos[r.day_of_week]] += 1
    s.category_counts = dict(_by_count(categories))
    s.district_counts = dict(_by_count(districts))
    s.unique_address_count = len(addresses)
    s.distinct_street_numbers = len(street_numbers)
    return s


def _by_count(counter: Counter) -> list[tuple[str, int]]:
    return sorted(counter.items(), key=lambda kv: (-kv[1], kv[0]))


def _bar(count: int, peak: int, width: int = 40) -> str:
    return "#" * (round(width * count / peak) if peak else 0)


def render_summary(s: DatasetSummary) -> str:
    """Plain-text tables and histograms for a dataset summary."""
    out = [f"Rows: {s.row_count:,}", ""]

    def table(title, counts):
        out.append(f"{title:<30} {'Number of Crimes':>16}")
        out.append("-" * 47)
        for name, n in _by_count(Counter(counts)):
            out.append(f"{name:<30} {n:>16,}")
        out.append("")

    table("District", s.district_counts)
    if s.category_counts:
        table("Category", s.category_counts)

    out.append("Crime Distribution Per Hour")
    peak = max(s.hour_histogram, default=0)
    for h, n in enumerate(s.hour_histogram):
        out.append(f"{h:>2}  {n:>9,}  {_bar(n, peak)}")
    out.append("")
    out.append("Crime Distribution Per Day Of Week")
    peak = max(s.weekday_histogram, default=0)
    for day, n in zip(WEEKDAYS, s.weekday_histogram):
        out.append(f"{day:<9}  {n:>9,}  {_bar(n, peak)}")
    out.append("")
    out.append(f"Unique addresses:               {s.unique_address_count:,}")
    out.append(f"Block addresses:                {s.block_count:,}")
    out.append(f"Non-block addresses:            {s.non_block_count:,}")
    out.append(f"Zero street number:             {s.zero_street_number_count:,}")
    out.append(f"Distinct nonzero street numbers: {s.distinct_street_numbers:,}")
    return "\n".join(out) + "\n"
