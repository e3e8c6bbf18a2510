"""Event-log ingestion: parsing, serialisation, labelling and filtering.

An :class:`EventLog` is stored column-wise.  User ids, domains and record
kinds are dictionary-encoded against sorted vocabularies, so integer codes
order the same way as the strings they stand for.
"""

import csv
import enum
import io
import json
import logging
import math
import os
import re
from dataclasses import dataclass, field
from datetime import date, datetime, timezone

import numpy as np

from .errors import InfodemicError, TooManyMalformed, UnreadableStream

logger = logging.getLogger(__name__)

SECONDS_PER_DAY = 86400
EVENT_FIELDS = ("timestamp", "actor", "source", "domain", "category", "kind")
NO_CATEGORY = -1


class ContentCategory(enum.Enum):
    Science = 0
    MainstreamMedia = 1
    Satire = 2
    Clickbait = 3
    Political = 4
    FakeHoax = 5
    ConspiracyJunkScience = 6
    Unlabeled = 7

    @property
    def is_fake(self):
        return self in FAKE_CATEGORIES

    @classmethod
    def parse(cls, name):
        key = str(name).strip().lower()
        for member in cls:
            if member.name.lower() == key:
                return member
        raise ValueError(f"unknown content category {name!r}")


FAKE_CATEGORIES = frozenset({ContentCategory.Clickbait, ContentCategory.FakeHoax,
                             ContentCategory.ConspiracyJunkScience})
LABELED_CATEGORIES = tuple(c for c in ContentCategory if c is not ContentCategory.Unlabeled)
_FAKE_CODES = np.array([c.value for c in FAKE_CATEGORIES], dtype=np.int8)


def is_fake(category):
    """True for Clickbait, FakeHoax and ConspiracyJunkScience."""
    return category is not None and ContentCategory(category) in FAKE_CATEGORIES


class InvalidCategoryTable(InfodemicError):
    pass


@dataclass(frozen=True)
class ShareEvent:
    timestamp: int
    actor: str
    source: str
    domain: str = None
    category: ContentCategory = None
    kind: str = None


@dataclass(frozen=True)
class ParseStats:
    records: int = 0
    malformed: int = 0
    self_shares: int = 0


def _encode(values):
    """Dictionary-encode a sequence of optional strings; ``None`` maps to -1."""
    vals = list(values)
    present = sorted({v for v in vals if v is not None})
    if not present:
        return np.full(len(vals), -1, dtype=np.int32), np.array([], dtype=object)
    lookup = {v: i for i, v in enumerate(present)}
    codes = np.fromiter((lookup[v] if v is not None else -1 for v in vals),
                        dtype=np.int32, count=len(vals))
    return codes, np.array(present, dtype=object)


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


class EventLog:
    """Time-sorted, immutable collection of share events.

    Parameters
    ----------
    timestamp : int array, epoch seconds
    actor, source : int arrays of codes into ``users``
    users : array of str, sorted
    category : int8 array of :class:`ContentCategory` values, -1 where absent
    domain : int array of codes into ``domains`` (-1 for none), optional
    domains : array of str
    kind : int array of codes into ``kinds`` (-1 for none), optional
    kinds : array of str
    window : (start, end) epoch seconds, inclusive
    """

    def __init__(self, timestamp, actor, source, users, category=None,
                 domain=None, domains=None, kind=None, kinds=None, window=None,
                 stats=None, presorted=False):
        timestamp = np.asarray(timestamp, dtype=np.int64)
        n = timestamp.shape[0]
        actor = np.asarray(actor, dtype=np.int32)
        source = np.asarray(source, dtype=np.int32)
        category = (np.full(n, NO_CATEGORY, dtype=np.int8) if category is None
                    else np.asarray(category, dtype=np.int8))
        domain = (np.full(n, -1, dtype=np.int32) if domain is None
                  else np.asarray(domain, dtype=np.int32))
        kind = (np.full(n, -1, dtype=np.int32) if kind is None
                else np.asarray(kind, dtype=np.int32))
        for name, col in (("actor", actor), ("source", source), ("category", category),
                          ("domain", domain), ("kind", kind)):
            if col.shape != (n,):
                raise ValueError(f"column {name} has shape {col.shape}, expected ({n},)")
        if not presorted and n and np.any(np.diff(timestamp) < 0):
            order = np.argsort(timestamp, kind="stable")
            timestamp, actor, source = timestamp[order], actor[order], source[order]
            category, domain, kind = category[order], domain[order], kind[order]
        self.timestamp = _frozen(timestamp)
        self.actor = _frozen(actor)
        self.source = _frozen(source)
        self.category = _frozen(category)
        self.domain = _frozen(domain)
        self.kind = _frozen(kind)
        self.users = _frozen(np.asarray(users, dtype=object))
        self.domains = _frozen(np.asarray(domains if domains is not None else [], dtype=object))
        self.kinds = _frozen(np.asarray(kinds if kinds is not None else [], dtype=object))
        if window is None:
            window = (int(timestamp[0]), int(timestamp[-1])) if n else (0, 0)
        self.window = (int(window[0]), int(window[1]))
        self.stats = stats or ParseStats(records=n)

    @classmethod
    def from_records(cls, records, window=None, stats=None):
        """Build a log from :class:`ShareEvent` objects (or equivalent tuples).

        Self-shares (actor == source) are dropped.
        """
        recs = [r if isinstance(r, ShareEvent) else ShareEvent(*r) for r in records]
        recs = [r for r in recs if r.actor != r.source]
        users = sorted({r.actor for r in recs} | {r.source for r in recs})
        lookup = {u: i for i, u in enumerate(users)}
        ts = np.array([int(r.timestamp) for r in recs], dtype=np.int64)
        actor = np.array([lookup[r.actor] for r in recs], dtype=np.int32)
        source = np.array([lookup[r.source] for r in recs], dtype=np.int32)
        cat = np.array([NO_CATEGORY if r.category is None else ContentCategory(r.category).value
                        for r in recs], dtype=np.int8)
        dom, domains = _encode([r.domain for r in recs])
        kind, kinds = _encode([r.kind for r in recs])
        return cls(ts, actor, source, users, cat, dom, domains, kind, kinds,
                   window=window, stats=stats)

    def __len__(self):
        return self.timestamp.shape[0]

    def __iter__(self):
        return iter(self.records())

    def __repr__(self):
        return f"EventLog(n_events={len(self)}, n_users={len(self.users)}, window={self.window})"

    def records(self):
        cats = list(ContentCategory)
        return [
            ShareEvent(int(t), self.users[a], self.users[s],
                       self.domains[d] if d >= 0 else None,
                       cats[c] if c >= 0 else None,
                       self.kinds[k] if k >= 0 else None)
            for t, a, s, d, c, k in zip(self.timestamp, self.actor, self.source,
                                        self.domain, self.category, self.kind)
        ]

    def equals(self, other):
        """Event-by-event equality on decoded values; the window is ignored."""
        if len(self) != len(other):
            return False
        return self.records() == other.records()

    def subset(self, mask, window=None):
        mask = np.asarray(mask, dtype=bool)
        return EventLog(self.timestamp[mask], self.actor[mask], self.source[mask],
                        self.users, self.category[mask], self.domain[mask], self.domains,
                        self.kind[mask], self.kinds, window=window or self.window,
                        presorted=True)

    @property
    def origin_day(self):
        return self.window[0] // SECONDS_PER_DAY

    @property
    def n_days(self):
        return self.window[1] // SECONDS_PER_DAY - self.origin_day + 1

    @property
    def days(self):
        """UTC calendar day of each event, counted from the window's first day."""
        return (self.timestamp // SECONDS_PER_DAY - self.origin_day).astype(np.int64)

    @property
    def fake(self):
        return np.isin(self.category, _FAKE_CODES)

    @property
    def labeled(self):
        return (self.category >= 0) & (self.category != ContentCategory.Unlabeled.value)

    def with_window(self, window):
        return self.subset(np.ones(len(self), dtype=bool), window=window)


# -- parsing -------------------------------------------------------------------

def parse_timestamp(value):
    """Epoch seconds from an integer, a digit string or an ISO-8601 string.

    Naive ISO timestamps are taken as UTC; fractional seconds are floored.
    """
    if isinstance(value, bool):
        raise ValueError("boolean is not a timestamp")
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError("non-finite timestamp")
        return math.floor(value)
    s = str(value).strip()
    if not s:
        raise ValueError("empty timestamp")
    if s.lstrip("-").isdigit():
        return int(s)
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    # dropping the fraction floors the instant; older fromisoformat rejects short fractions
    s = re.sub(r"(T\d\d:\d\d:\d\d)\.\d+", r"\1", s)
    dt = datetime.fromisoformat(s)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return math.floor(dt.timestamp())


def _as_date_bound(value, end=False):
    if value is None:
        return None
    if isinstance(value, datetime):
        if value.tzinfo is None:
            value = value.replace(tzinfo=timezone.utc)
        return math.floor(value.timestamp())
    if isinstance(value, date):
        ts = int(datetime(value.year, value.month, value.day, tzinfo=timezone.utc).timestamp())
        return ts + SECONDS_PER_DAY - 1 if end else ts
    if isinstance(value, str) and len(value.strip()) == 10 and value.count("-") == 2:
        return _as_date_bound(date.fromisoformat(value.strip()), end=end)
    return parse_timestamp(value)


def _opt(value):
    if value is None:
        return None
    s = str(value)
    return s if s != "" else None


def _record_from_mapping(row):
    ts = parse_timestamp(row["timestamp"])
    actor = _opt(row.get("actor"))
    source = _opt(row.get("source"))
    if actor is None or source is None:
        raise ValueError("missing actor or source")
    cat = _opt(row.get("category"))
    return ShareEvent(ts, actor, source, _opt(row.get("domain")),
                      ContentCategory.parse(cat) if cat is not None else None,
                      _opt(row.get("kind")))


def _open_text(stream):
    if isinstance(stream, (str, os.PathLike)):
        try:
            return open(stream, newline="", encoding="utf-8"), True
        except OSError as exc:
            raise UnreadableStream(str(exc)) from exc
    if isinstance(stream, (bytes, bytearray)):
        return io.StringIO(bytes(stream).decode("utf-8"), newline=""), True
    return stream, False


def _iter_csv(fh):
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        return
    header = [h.strip() for h in header]
    missing = {"timestamp", "actor", "source"} - set(header)
    if missing:
        raise UnreadableStream(f"CSV header lacks required field(s): {sorted(missing)}")
    for row in reader:
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != len(header):
            yield None
            continue
        yield dict(zip(header, row))


def _iter_jsonl(fh):
    for line in fh:
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError:
            yield None
            continue
        yield obj if isinstance(obj, dict) else None


def parse_events(stream, format="csv", max_malformed=0.01):
    """Read an event log from CSV or JSONL.

    Parameters
    ----------
    stream : path, file object, bytes, or iterable of lines
    format : {"csv", "jsonl"}
    max_malformed : float, default=0.01
        Largest tolerated fraction of malformed records.

    Returns
    -------
    EventLog
        Sorted by timestamp; self-shares dropped.  ``log.stats`` records the
        number of records read, malformed records and dropped self-shares.

    Raises
    ------
    UnreadableStream
    TooManyMalformed
    """
    if format not in ("csv", "jsonl"):
        raise ValueError(f"unknown format {format!r}")
    fh, owned = _open_text(stream)
    records, malformed, selfs, total = [], 0, 0, 0
    try:
        rows = _iter_csv(fh) if format == "csv" else _iter_jsonl(fh)
        for row in rows:
            total += 1
            if row is None:
                malformed += 1
                continue
            try:
                rec = _record_from_mapping(row)
            except (KeyError, ValueError, TypeError, OverflowError):
                malformed += 1
                continue
            if rec.actor == rec.source:
                selfs += 1
                continue
            records.append(rec)
    except (OSError, UnicodeDecodeError) as exc:
        raise UnreadableStream(str(exc)) from exc
    finally:
        if owned:
            fh.close()
    if malformed:
        logger.warning("%d of %d record(s) malformed", malformed, total)
        if malformed > max_malformed * total:
            raise TooManyMalformed(malformed, total, max_malformed)
    stats = ParseStats(total, malformed, selfs)
    return EventLog.from_records(records, stats=stats)


def write_events(log, stream, format="csv"):
    """Serialise ``log`` so that :func:`parse_events` reads it back unchanged."""
    if format not in ("csv", "jsonl"):
        raise ValueError(f"unknown format {format!r}")
    if isinstance(stream, (str, os.PathLike)):
        with open(stream, "w", newline="", encoding="utf-8") as fh:
            return write_events(log, fh, format)
    cats = [c.name for c in ContentCategory]
    users, domains, kinds = log.users, log.domains, log.kinds
    if format == "csv":
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(EVENT_FIELDS)
        for t, a, s, d, c, k in zip(log.timestamp.tolist(), log.actor.tolist(),
                                    log.source.tolist(), log.domain.tolist(),
                                    log.category.tolist(), log.kind.tolist()):
            w.writerow((t, users[a], users[s], domains[d] if d >= 0 else "",
                        cats[c] if c >= 0 else "", kinds[k] if k >= 0 else ""))
    else:
        for t, a, s, d, c, k in zip(log.timestamp.tolist(), log.actor.tolist(),
                                    log.source.tolist(), log.domain.tolist(),
                                    log.category.tolist(), log.kind.tolist()):
            obj = {"timestamp": t, "actor": users[a], "source": users[s],
                   "domain": domains[d] if d >= 0 else None,
                   "category": cats[c] if c >= 0 else None,
                   "kind": kinds[k] if k >= 0 else None}
            stream.write(json.dumps(obj, sort_keys=False) + "\n")


# -- category tables ---------------------------------------------------------

def read_category_table(stream):
    """Read a ``domain,category`` CSV into a ``{hostname: ContentCategory}`` dict."""
    fh, owned = _open_text(stream)
    table = {}
    try:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"domain", "category"} <= set(reader.fieldnames):
            raise InvalidCategoryTable("category table needs a 'domain,category' header")
        for line, row in enumerate(reader, start=2):
            host = (row["domain"] or "").strip().lower()
            if not host:
                raise InvalidCategoryTable(f"line {line}: empty domain")
            try:
                cat = ContentCategory.parse((row["category"] or "").strip())
            except ValueError as exc:
                raise InvalidCategoryTable(f"line {line}: {exc}") from None
            if host in table and table[host] is not cat:
                raise InvalidCategoryTable(f"line {line}: conflicting entries for {host}")
            table[host] = cat
    except OSError as exc:
        raise UnreadableStream(str(exc)) from exc
    finally:
        if owned:
            fh.close()
    return table


def write_category_table(table, stream):
    if isinstance(stream, (str, os.PathLike)):
        with open(stream, "w", newline="", encoding="utf-8") as fh:
            return write_category_table(table, fh)
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(("domain", "category"))
    for host in sorted(table):
        w.writerow((host, table[host].name))


def label_events(log, table):
    """Attach categories from a domain table.

    Events that already carry a category keep it.  The rest take the
    table's category for their (lower-cased) domain, or Unlabeled.
    """
    dom_codes = np.full(len(log.domains) + 1, ContentCategory.Unlabeled.value, dtype=np.int8)
    for i, host in enumerate(log.domains):
        cat = table.get(str(host).lower())
        if cat is not None:
            dom_codes[i] = ContentCategory(cat).value
    # index -1 (no domain) hits the trailing Unlabeled slot
    looked_up = dom_codes[log.domain]
    category = np.where(log.category >= 0, log.category, looked_up).astype(np.int8)
    return EventLog(log.timestamp, log.actor, log.source, log.users, category,
                    log.domain, log.domains, log.kind, log.kinds, window=log.window,
                    stats=log.stats, presorted=True)


def filter_events(log, start=None, end=None, exclude_unlabeled=False):
    """Keep events inside ``[start, end]`` (inclusive), optionally only labelled ones.

    ``start``/``end`` accept epoch seconds, ISO timestamps, or ISO dates (a
    date used as ``end`` covers the whole day).  The result's window is the
    requested range.
    """
    lo = _as_date_bound(start)
    hi = _as_date_bound(end, end=True)
    if lo is not None and hi is not None and lo > hi:
        raise ValueError(f"empty date range: start {start} after end {end}")
    mask = np.ones(len(log), dtype=bool)
    if lo is not None:
        mask &= log.timestamp >= lo
    if hi is not None:
        mask &= log.timestamp <= hi
    if exclude_unlabeled:
        mask &= log.labeled
    window = (log.window[0] if lo is None else lo, log.window[1] if hi is None else hi)
    return log.subset(mask, window=window)
