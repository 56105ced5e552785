import io
import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from homonymy.corpus import (
    Corpus,
    CorpusError,
    NameKey,
    articles_of,
    parse_corpus,
    read_corpus,
    write_corpus,
)

from conftest import corpus, key, rec


def test_normalizes_case_and_whitespace():
    c = parse_corpus('{"id":"p1","year":2001,"authors":[{"last":"wang","initials":"ch"}],"cites":[]}\n')
    assert c.keys() == [NameKey("WANG", "CH")]
    assert NameKey.normalized("  lee ", " c.h. ") == NameKey("LEE", "CH")


def test_duplicate_id_rejected():
    line = '{"id":"p1","year":2001,"authors":[{"last":"A","initials":"B"}],"cites":[]}\n'
    with pytest.raises(CorpusError, match="p1"):
        parse_corpus(line * 2)


def test_duplicate_authors_collapsed():
    obj = {"id": "p1", "year": 2000, "cites": [],
           "authors": [{"last": "LEE", "initials": "H"}, {"last": "lee", "initials": "h"},
                       {"last": "KIM", "initials": "J"}]}
    c = parse_corpus(json.dumps(obj))
    assert c.records["p1"].authors == (NameKey("LEE", "H"), NameKey("KIM", "J"))
    assert articles_of(c, NameKey("LEE", "H")) == {"p1"}


@pytest.mark.parametrize(
    "text,line",
    [
        ('{"id":"p1","year":2001,"authors":[{"last":"A"}],"cites":[]}\nnot json\n', 2),
        ('{"id":"p1","year":2001,"authors":[{"last":"  ","initials":"X"}],"cites":[]}\n', 1),
        ('{"id":"p1","year":2001,"authors":[],"cites":[]}\n', 1),
        ('{"id":"p1","year":"x","authors":[{"last":"A"}],"cites":[]}\n', 1),
    ],
)
def test_bad_lines_report_line_number(text, line):
    with pytest.raises(CorpusError) as exc:
        parse_corpus(text)
    assert exc.value.line == line


def test_articles_of():
    c = corpus(rec("p1", "A,X B,Y"), rec("p2", "A,X"))
    assert articles_of(c, key("A,X")) == {"p1", "p2"}
    assert articles_of(c, key("Z,Z")) == frozenset()


def test_dangling_citations_kept():
    c = corpus(rec("p1", "A,X", cites="elsewhere"))
    assert c.records["p1"].cites == {"elsewhere"}


def test_read_from_path_and_bytes(tmp_path):
    c = corpus(rec("p2", "B,Y A,X", cites="p1"), rec("p1", "A,X"))
    path = tmp_path / "c.jsonl"
    with open(path, "w") as fh:
        write_corpus(c, fh)
    assert read_corpus(path) == c
    assert parse_corpus(path.read_bytes()) == c
    first = json.loads(path.read_text().splitlines()[0])
    assert list(first) == ["id", "year", "authors", "cites"]
    assert first["id"] == "p1"


# --- properties -------------------------------------------------------------

lasts = st.sampled_from(["WANG", "LEE", "kim", "Smith", "O'NEIL"])
inits = st.sampled_from(["", "A", "c.h.", "J", "HK"])
author = st.fixed_dictionaries({"last": lasts, "initials": inits})
record_objs = st.lists(
    st.tuples(
        st.lists(author, min_size=1, max_size=5),
        st.lists(st.integers(0, 30), max_size=4),
        st.integers(1950, 2020),
    ),
    min_size=1,
    max_size=25,
)


def _jsonl(objs) -> str:
    lines = []
    for i, (authors, cites, year) in enumerate(objs):
        lines.append(json.dumps({"id": f"p{i}", "year": year, "authors": authors,
                                 "cites": [f"p{c}" for c in cites]}))
    return "\n".join(lines) + "\n"


@given(record_objs)
def test_round_trip(objs):
    c = parse_corpus(_jsonl(objs))
    buf = io.StringIO()
    write_corpus(c, buf)
    again = parse_corpus(buf.getvalue())
    assert again == c
    buf2 = io.StringIO()
    write_corpus(again, buf2)
    assert buf2.getvalue() == buf.getvalue()


@given(record_objs)
def test_name_index_is_inverse_of_authors(objs):
    c = parse_corpus(_jsonl(objs))
    pairs_from_records = {(k, r.id) for r in c for k in r.authors}
    pairs_from_index = {(k, pid) for k, ids in c.name_index.items() for pid in ids}
    assert pairs_from_records == pairs_from_index
    for r in c:
        assert len(set(r.authors)) == len(r.authors)


def test_corpus_from_records_rejects_duplicates():
    with pytest.raises(CorpusError):
        Corpus.from_records([rec("p1", "A,X"), rec("p1", "B,Y")])
