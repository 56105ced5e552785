"""Bibliographic records, name keys and the canonical JSONL corpus format."""

from __future__ import annotations

import io
import json
import re
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Mapping

__all__ = [
    "CorpusError",
    "NameKey",
    "PublicationRecord",
    "Corpus",
    "parse_corpus",
    "read_corpus",
    "write_corpus",
    "articles_of",
]

_NON_INITIAL = re.compile(r"[^0-9A-Z]")


class CorpusError(ValueError):
    """Raised for malformed input lines, duplicate ids and invalid names."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass(frozen=True, order=True)
class NameKey:
    last: str
    initials: str = ""

    @classmethod
    def normalized(cls, last: str, initials: str = "") -> "NameKey":
        """Uppercase and trim; initials lose periods, spaces and hyphens."""
        last = (last or "").strip().upper()
        if not last:
            raise CorpusError("empty last name")
        initials = _NON_INITIAL.sub("", (initials or "").upper())
        return cls(last, initials)

    def __str__(self) -> str:
        return f"{self.last}, {self.initials}" if self.initials else self.last


@dataclass(frozen=True)
class PublicationRecord:
    id: str
    year: int
    authors: tuple[NameKey, ...]
    cites: frozenset[str] = frozenset()

    def to_json(self) -> str:
        return json.dumps(
            {
                "id": self.id,
                "year": self.year,
                "authors": [{"last": a.last, "initials": a.initials} for a in self.authors],
                "cites": sorted(self.cites),
            },
            ensure_ascii=False,
        )


@dataclass
class Corpus:
    records: dict[str, PublicationRecord] = field(default_factory=dict)
    name_index: dict[NameKey, frozenset[str]] = field(default_factory=dict)

    @classmethod
    def from_records(cls, records: Iterable[PublicationRecord]) -> "Corpus":
        by_id: dict[str, PublicationRecord] = {}
        index: dict[NameKey, set[str]] = {}
        for rec in records:
            if rec.id in by_id:
                raise CorpusError(f"duplicate publication id {rec.id!r}")
            by_id[rec.id] = rec
            for key in rec.authors:
                index.setdefault(key, set()).add(rec.id)
        return cls(by_id, {k: frozenset(v) for k, v in index.items()})

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[PublicationRecord]:
        return iter(self.records.values())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Corpus):
            return NotImplemented
        return self.records == other.records

    def keys(self) -> list[NameKey]:
        """All distinct name keys, sorted."""
        return sorted(self.name_index)

    def subset(self, ids: Iterable[str]) -> "Corpus":
        return Corpus.from_records(self.records[i] for i in sorted(ids))


def _record_from_obj(obj: Mapping, line: int | None = None) -> PublicationRecord:
    try:
        pid = obj["id"]
        authors_raw = obj["authors"]
    except (KeyError, TypeError) as exc:
        raise CorpusError(f"missing field {exc}", line) from None
    if not isinstance(pid, str) or not pid:
        raise CorpusError("id must be a non-empty string", line)
    if not isinstance(authors_raw, list) or not authors_raw:
        raise CorpusError(f"record {pid!r} needs at least one author", line)
    year = obj.get("year", 0)
    if year is None:
        year = 0
    if not isinstance(year, int) or isinstance(year, bool):
        raise CorpusError(f"record {pid!r}: year must be an integer", line)

    authors: list[NameKey] = []
    seen: set[NameKey] = set()
    for a in authors_raw:
        if not isinstance(a, Mapping):
            raise CorpusError(f"record {pid!r}: author entries must be objects", line)
        try:
            key = NameKey.normalized(a.get("last", ""), a.get("initials", ""))
        except CorpusError:
            raise CorpusError(f"record {pid!r}: empty last name", line) from None
        if key not in seen:
            seen.add(key)
            authors.append(key)

    cites = obj.get("cites", []) or []
    if not isinstance(cites, list) or not all(isinstance(c, str) for c in cites):
        raise CorpusError(f"record {pid!r}: cites must be a list of strings", line)
    return PublicationRecord(pid, year, tuple(authors), frozenset(cites))


def parse_corpus(stream: IO[str] | IO[bytes] | str | bytes) -> Corpus:
    """Parse a JSONL byte or text stream into a validated corpus.

    Blank lines are skipped. Errors carry the 1-based line number.
    """
    if isinstance(stream, bytes):
        stream = io.StringIO(stream.decode("utf-8"))
    elif isinstance(stream, str):
        stream = io.StringIO(stream)

    records: dict[str, PublicationRecord] = {}
    for lineno, raw in enumerate(stream, start=1):
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"malformed JSON ({exc.msg})", lineno) from None
        rec = _record_from_obj(obj, lineno)
        if rec.id in records:
            raise CorpusError(f"duplicate publication id {rec.id!r}", lineno)
        records[rec.id] = rec
    return Corpus.from_records(records.values())


def read_corpus(path) -> Corpus:
    with open(path, encoding="utf-8") as fh:
        return parse_corpus(fh)


def write_corpus(corpus: Corpus, fh: IO[str]) -> None:
    """Write records sorted by id, keys in the order id, year, authors, cites."""
    for pid in sorted(corpus.records):
        fh.write(corpus.records[pid].to_json())
        fh.write("\n")


def articles_of(corpus: Corpus, key: NameKey) -> frozenset[str]:
    return corpus.name_index.get(key, frozenset())
