"""Snapshot ingestion: HTML status tables -> time series -> knowledge base.

Raw rows are only ever appended to the store; the knowledge base keeps just
the most recent status per region plus the derived weekly trend, so the
trend can always be recomputed from the raw rows.
"""

from __future__ import annotations

import csv
import datetime as dt
import re
from dataclasses import dataclass, field
from html.parser import HTMLParser
from pathlib import Path
from typing import Callable

from .kb import KnowledgeBase, TrendValue

TREND_BASELINE_DAYS = 7

STORE_COLUMNS = ("region", "retrieved", "cases", "deaths", "recovered", "source_url", "publisher")

_FOOTNOTE_RE = re.compile(r"\[[^\]]*\]")
_HEADER_SYNONYMS: dict[str, frozenset[str]] = {
    "region": frozenset({"location", "country", "region", "country or region", "country/region", "place", "territory"}),
    "cases": frozenset({"cases", "total cases", "confirmed", "confirmed cases"}),
    "deaths": frozenset({"deaths", "total deaths"}),
    "recovered": frozenset({"recovered", "recoveries", "total recovered"}),
}


class SnapshotError(Exception):
    """The HTML did not contain a usable status table."""


class StoreConflictError(Exception):
    def __init__(self, conflicts: list[str]):
        self.conflicts = conflicts
        super().__init__("conflicting rows: " + "; ".join(conflicts))


class CapabilityError(Exception):
    """A config-gated capability was invoked while disabled."""


class FetchError(Exception):
    pass


@dataclass(frozen=True)
class StatusRecord:
    region: str
    cases: int
    deaths: int
    recovered: int
    retrieved: dt.date
    source_url: str = ""
    publisher: str = ""

    def __post_init__(self) -> None:
        if not self.region.strip():
            raise ValueError("record has an empty region")
        if min(self.cases, self.deaths, self.recovered) < 0:
            raise ValueError(f"{self.region}: counts must be non-negative")
        if self.deaths > self.cases:
            raise ValueError(f"{self.region}: deaths ({self.deaths}) exceed cases ({self.cases})")
        if self.recovered > self.cases:
            raise ValueError(f"{self.region}: recovered ({self.recovered}) exceed cases ({self.cases})")
        if self.retrieved > dt.date.today():
            raise ValueError(f"{self.region}: retrieval date {self.retrieved} is in the future")


@dataclass(frozen=True)
class RejectedRow:
    cells: tuple[str, ...]
    reason: str


@dataclass(frozen=True)
class SnapshotParse:
    records: list[StatusRecord]
    rejects: list[RejectedRow]


class _TableExtractor(HTMLParser):
    """Collects every <table> as a list of rows of concatenated cell text."""

    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.tables: list[list[list[str]]] = []
        self._row: list[str] | None = None
        self._cell: list[str] | None = None

    def handle_starttag(self, tag: str, attrs) -> None:
        if tag == "table":
            self.tables.append([])
        elif tag == "tr" and self.tables:
            self._row = []
        elif tag in ("td", "th") and self._row is not None:
            self._cell = []

    def handle_endtag(self, tag: str) -> None:
        if tag in ("td", "th") and self._cell is not None and self._row is not None:
            self._row.append("".join(self._cell).strip())
            self._cell = None
        elif tag == "tr" and self._row is not None:
            if self._row:
                self.tables[-1].append(self._row)
            self._row = None
        elif tag == "table" and self._cell is not None:
            self._cell = None

    def handle_data(self, data: str) -> None:
        if self._cell is not None:
            self._cell.append(data)


def _normalize_header(cell: str) -> str:
    return " ".join(_FOOTNOTE_RE.sub("", cell).lower().replace("_", " ").split())


def _clean_count(cell: str, column: str) -> int:
    text = _FOOTNOTE_RE.sub("", cell)
    text = text.replace(",", "").replace(" ", "").replace(" ", "").replace(" ", "")
    text = text.lstrip("+")
    if text in ("", "-", "–", "—", "n/a", "unknown"):
        raise ValueError(f"{column}: no numeric value in {cell!r}")
    if not re.fullmatch(r"\d+", text):
        raise ValueError(f"{column}: not a count: {cell!r}")
    return int(text)


def _match_columns(header: list[str]) -> dict[str, int]:
    normalized = [_normalize_header(cell) for cell in header]
    columns: dict[str, int] = {}
    for name, synonyms in _HEADER_SYNONYMS.items():
        for i, cell in enumerate(normalized):
            if cell in synonyms:
                columns[name] = i
                break
    return columns


def parse_snapshot(
    html: str, retrieved: dt.date, source_url: str = "", publisher: str = ""
) -> SnapshotParse:
    """Parse the per-region status table out of an HTML snapshot.

    Rows that fail record invariants are returned in the rejects report
    rather than silently dropped.
    """
    extractor = _TableExtractor()
    extractor.feed(html)
    tables = [t for t in extractor.tables if t]
    if not tables:
        raise SnapshotError("no status table found in snapshot")

    best: tuple[dict[str, int], list[list[str]]] | None = None
    for table in tables:
        columns = _match_columns(table[0])
        if best is None or len(columns) > len(best[0]):
            best = (columns, table)
    assert best is not None
    columns, table = best
    missing = [name for name in _HEADER_SYNONYMS if name not in columns]
    if missing:
        raise SnapshotError(f"status table header is missing column(s): {', '.join(missing)}")

    records: list[StatusRecord] = []
    rejects: list[RejectedRow] = []
    width = max(columns.values()) + 1
    for row in table[1:]:
        if len(row) < width:
            rejects.append(RejectedRow(tuple(row), f"expected at least {width} cells"))
            continue
        try:
            region = " ".join(_FOOTNOTE_RE.sub("", row[columns["region"]]).split())
            records.append(
                StatusRecord(
                    region=region,
                    cases=_clean_count(row[columns["cases"]], "cases"),
                    deaths=_clean_count(row[columns["deaths"]], "deaths"),
                    recovered=_clean_count(row[columns["recovered"]], "recovered"),
                    retrieved=retrieved,
                    source_url=source_url,
                    publisher=publisher,
                )
            )
        except ValueError as exc:
            rejects.append(RejectedRow(tuple(row), str(exc)))
    return SnapshotParse(records=records, rejects=rejects)


@dataclass(frozen=True)
class TimeSeriesStore:
    """Append-only series of status records, one row per (region, date)."""

    rows: tuple[StatusRecord, ...] = ()

    @staticmethod
    def _key(region: str, retrieved: dt.date) -> tuple[str, dt.date]:
        return (" ".join(region.split()).casefold(), retrieved)

    def regions(self) -> list[str]:
        seen: dict[str, str] = {}
        for row in self.rows:
            seen.setdefault(self._key(row.region, row.retrieved)[0], row.region)
        return list(seen.values())

    def latest(self, region: str, asof: dt.date) -> StatusRecord | None:
        key = self._key(region, asof)[0]
        candidates = [
            row for row in self.rows
            if self._key(row.region, row.retrieved)[0] == key and row.retrieved <= asof
        ]
        return max(candidates, key=lambda r: r.retrieved, default=None)


def append(store: TimeSeriesStore, records: list[StatusRecord]) -> TimeSeriesStore:
    """New store with the records added; history is never mutated.

    Re-appending an identical row is a no-op; the same (region, date) key
    with different values raises a conflict naming the offenders.
    """
    existing = {TimeSeriesStore._key(r.region, r.retrieved): r for r in store.rows}
    rows = list(store.rows)
    conflicts: list[str] = []
    for record in records:
        key = TimeSeriesStore._key(record.region, record.retrieved)
        held = existing.get(key)
        if held is None:
            existing[key] = record
            rows.append(record)
        elif held != record:
            conflicts.append(f"{record.region} @ {record.retrieved.isoformat()}")
    if conflicts:
        raise StoreConflictError(conflicts)
    return TimeSeriesStore(rows=tuple(rows))


def weekly_trend(store: TimeSeriesStore, region: str, asof: dt.date) -> TrendValue:
    """Sign of the case-count change over a seven-day baseline.

    Baselines use the latest row at or before each cutoff; unknown when
    either row is missing.
    """
    now = store.latest(region, asof)
    then = store.latest(region, asof - dt.timedelta(days=TREND_BASELINE_DAYS))
    if now is None or then is None:
        return TrendValue.UNKNOWN
    if now.cases > then.cases:
        return TrendValue.INCREASING
    if now.cases < then.cases:
        return TrendValue.DECREASING
    return TrendValue.STABLE


def refresh_kb(store: TimeSeriesStore, kb: KnowledgeBase, asof: dt.date) -> KnowledgeBase:
    """Push the latest status and trend per region into the knowledge base."""
    out = kb
    for region in store.regions():
        record = store.latest(region, asof)
        if record is None:
            continue
        out = out.upsert_status(record, weekly_trend(store, region, asof))
    return out


# -- CSV persistence ---------------------------------------------------------


def load_store(path: str | Path) -> TimeSeriesStore:
    """Read the CSV store; a missing file is an empty store."""
    path = Path(path)
    if not path.exists():
        return TimeSeriesStore()
    rows: list[StatusRecord] = []
    with path.open(newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        got = tuple(reader.fieldnames or ())
        if got != STORE_COLUMNS:
            raise ValueError(f"{path}: unexpected store header {got!r}")
        for raw in reader:
            rows.append(
                StatusRecord(
                    region=raw["region"],
                    cases=int(raw["cases"]),
                    deaths=int(raw["deaths"]),
                    recovered=int(raw["recovered"]),
                    retrieved=dt.date.fromisoformat(raw["retrieved"]),
                    source_url=raw["source_url"],
                    publisher=raw["publisher"],
                )
            )
    return TimeSeriesStore(rows=tuple(rows))


def save_store(store: TimeSeriesStore, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with tmp.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(STORE_COLUMNS)
        for r in store.rows:
            writer.writerow(
                [r.region, r.retrieved.isoformat(), r.cases, r.deaths, r.recovered, r.source_url, r.publisher]
            )
    tmp.replace(path)


# -- optional live fetching ----------------------------------------------------


def _default_opener(url: str) -> tuple[int, str]:
    import requests

    response = requests.get(url, timeout=30)
    return response.status_code, response.text


def fetch_live(
    url: str,
    archive_dir: str | Path,
    *,
    enabled: bool,
    opener: Callable[[str], tuple[int, str]] | None = None,
    now: Callable[[], dt.datetime] | None = None,
) -> str:
    """Fetch the live status page and archive it for reproducibility.

    Disabled by default; nothing is archived unless the fetch succeeds.
    """
    if not enabled:
        raise CapabilityError("live fetching is disabled in the configuration")
    opener = opener or _default_opener
    try:
        status, text = opener(url)
    except Exception as exc:  # noqa: BLE001 - network failures become FetchError
        raise FetchError(f"fetch failed: {exc}") from exc
    if status != 200:
        raise FetchError(f"fetch failed with status {status}")
    stamp = (now() if now else dt.datetime.utcnow()).strftime("%Y-%m-%dT%H%M%S")
    archive_dir = Path(archive_dir)
    archive_dir.mkdir(parents=True, exist_ok=True)
    (archive_dir / f"{stamp}.html").write_text(text, encoding="utf-8")
    return text
