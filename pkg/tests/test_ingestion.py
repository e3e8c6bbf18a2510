import io
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from infodemic.errors import TooManyMalformed, UnreadableStream
from infodemic.ingestion import (ContentCategory, EventLog, InvalidCategoryTable, ShareEvent,
                                 filter_events, is_fake, label_events, parse_events,
                                 parse_timestamp, read_category_table, write_category_table,
                                 write_events)

CSV = """timestamp,actor,source,domain,category
1580000000,alice,bob,a.com,FakeHoax
1580000100,bob,carol,b.com,Science
1580086400,carol,alice,,
"""


def test_fake_categories():
    assert is_fake(ContentCategory.Clickbait)
    assert is_fake(ContentCategory.FakeHoax)
    assert is_fake(ContentCategory.ConspiracyJunkScience)
    assert not is_fake(ContentCategory.Political)
    assert not is_fake(ContentCategory.Unlabeled)
    assert ContentCategory.parse("fakehoax") is ContentCategory.FakeHoax


def test_parse_csv_basic():
    log = parse_events(io.StringIO(CSV))
    assert len(log) == 3
    assert list(log.users) == ["alice", "bob", "carol"]
    recs = log.records()
    assert recs[0].category is ContentCategory.FakeHoax
    assert recs[2].category is None and recs[2].domain is None
    np.testing.assert_array_equal(log.fake, [True, False, False])
    assert log.n_days == 2


def test_parse_timestamp_forms():
    assert parse_timestamp(1580000000) == 1580000000
    assert parse_timestamp("1580000000") == 1580000000
    assert parse_timestamp("2020-01-26T00:53:20Z") == 1580000000
    assert parse_timestamp("2020-01-26T00:53:20.9") == 1580000000
    with pytest.raises(ValueError):
        parse_timestamp("yesterday")


def test_self_shares_dropped():
    log = EventLog.from_records([(1, "a", "a"), (2, "a", "b")])
    assert len(log) == 1


def test_malformed_within_budget():
    rows = ["timestamp,actor,source"] + [f"{1580000000 + i},u{i},v{i}" for i in range(200)]
    rows.append("garbage,,")
    log = parse_events(io.StringIO("\n".join(rows) + "\n"))
    assert len(log) == 200
    assert log.stats.malformed == 1


def test_malformed_over_budget():
    rows = ["timestamp,actor,source", "1,a,b", "x,y,", "nope,,"]
    with pytest.raises(TooManyMalformed):
        parse_events(io.StringIO("\n".join(rows)))


def test_missing_file():
    with pytest.raises(UnreadableStream):
        parse_events("/nonexistent/events.csv")


def test_jsonl_roundtrip():
    log = parse_events(io.StringIO(CSV))
    buf = io.StringIO()
    write_events(log, buf, format="jsonl")
    lines = buf.getvalue().splitlines()
    assert json.loads(lines[0])["actor"] == "alice"
    back = parse_events(io.StringIO(buf.getvalue()), format="jsonl")
    assert back.equals(log)


record = st.tuples(
    st.integers(1_500_000_000, 1_700_000_000),
    st.sampled_from(["a", "b", "c", "d", "e"]),
    st.sampled_from(["a", "b", "c", "d", "e"]),
    st.one_of(st.none(), st.sampled_from(["x.org", "y.net"])),
    st.one_of(st.none(), st.sampled_from(list(ContentCategory))),
    st.one_of(st.none(), st.sampled_from(["retweet", "reply"])),
)


@settings(max_examples=60, deadline=None)
@given(st.lists(record, max_size=30), st.sampled_from(["csv", "jsonl"]))
def test_write_parse_roundtrip(recs, fmt):
    log = EventLog.from_records([ShareEvent(*r) for r in recs])
    buf = io.StringIO()
    write_events(log, buf, format=fmt)
    back = parse_events(io.StringIO(buf.getvalue()), format=fmt)
    assert back.equals(log)


def test_label_events_table_and_override():
    table = read_category_table(io.StringIO("domain,category\na.com,Science\nb.com,Clickbait\n"))
    log = EventLog.from_records([
        ShareEvent(1, "u", "v", "a.com"),
        ShareEvent(2, "u", "v", "b.com"),
        ShareEvent(3, "u", "v", "c.com"),
        ShareEvent(4, "u", "v", "b.com", ContentCategory.Political),
    ])
    cats = [r.category for r in label_events(log, table).records()]
    assert cats == [ContentCategory.Science, ContentCategory.Clickbait,
                    ContentCategory.Unlabeled, ContentCategory.Political]


def test_category_table_roundtrip(tmp_path):
    table = {"a.com": ContentCategory.Satire, "b.org": ContentCategory.FakeHoax}
    path = tmp_path / "cats.csv"
    write_category_table(table, str(path))
    assert read_category_table(str(path)) == table


def test_category_table_bad_header():
    with pytest.raises(InvalidCategoryTable):
        read_category_table(io.StringIO("host,label\na,b\n"))


def test_filter_events_dates():
    log = parse_events(io.StringIO(CSV))
    first_day = filter_events(log, "2020-01-26", "2020-01-26")
    assert len(first_day) == 2
    labeled = filter_events(log, exclude_unlabeled=True)
    assert len(labeled) == 2
    assert filter_events(log, start="2020-01-27").window[0] == 1580083200


def test_arrays_are_read_only():
    log = parse_events(io.StringIO(CSV))
    with pytest.raises(ValueError):
        log.actor[0] = 2


def test_filter_identity_and_empty():
    log = parse_events(io.StringIO(CSV))
    assert filter_events(log, "2020-01-01", "2020-12-31").equals(log)
    assert len(filter_events(log, "2021-01-01", "2021-02-01")) == 0


def test_label_then_exclude_idempotent():
    table = {"a.com": ContentCategory.Science}
    log = label_events(parse_events(io.StringIO(CSV)), table)
    once = filter_events(log, exclude_unlabeled=True)
    twice = filter_events(label_events(once, table), exclude_unlabeled=True)
    assert once.equals(twice)
    assert all(r.category is not ContentCategory.Unlabeled for r in once.records())
