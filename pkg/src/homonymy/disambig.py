"""Within-name resolution of articles into author identities.

Articles sharing a name key are linked when their co-author sets overlap on
at least one last name, or when one cites the other. Identities are the
connected components of that graph. Names whose last name is rare (raw
redundancy at or below the cutoff) skip the evidence step and collapse into
a single identity.
"""

from __future__ import annotations

import json
import multiprocessing as mp
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import IO, Iterable, Mapping

from .corpus import Corpus, CorpusError, NameKey, articles_of
from .redundancy import RedundancyTable

__all__ = [
    "UnionFind",
    "DisambigConfig",
    "ArticleGraph",
    "IdentityPartition",
    "COAUTHOR_OVERLAP",
    "SELF_CITATION",
    "BOTH",
    "build_article_graph",
    "resolve_name",
    "resolve_corpus",
    "trivial_partitions",
    "identity_label",
    "parse_label",
    "write_partitions",
    "read_partitions",
]

COAUTHOR_OVERLAP = "coauthor_overlap"
SELF_CITATION = "self_citation"
BOTH = "both"


class UnionFind:
    """Disjoint sets keyed by arbitrary hashable items.

    Union by size with path halving. Component membership does not depend on
    the order of unions; only the internal root choice does, and callers
    never observe it.
    """

    def __init__(self, items: Iterable = ()):
        self.parent: dict = {}
        self.size: dict = {}
        for x in items:
            self.add(x)

    def add(self, x) -> None:
        if x not in self.parent:
            self.parent[x] = x
            self.size[x] = 1

    def find(self, x):
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True

    def union_all(self, items: Iterable) -> None:
        it = iter(items)
        try:
            first = next(it)
        except StopIteration:
            return
        for x in it:
            self.union(first, x)

    def groups(self) -> list[list]:
        """Components as sorted lists, ordered by their smallest member."""
        out: dict = {}
        for x in self.parent:
            out.setdefault(self.find(x), []).append(x)
        return sorted((sorted(g) for g in out.values()), key=lambda g: g[0])


@dataclass(frozen=True)
class DisambigConfig:
    low_redundancy_cutoff: int = 3
    use_self_citation: bool = True
    use_coauthor_overlap: bool = True
    # match co-authors on the full name key instead of the last name alone
    strict_key_match: bool = False

    def __post_init__(self):
        if self.low_redundancy_cutoff < 0:
            raise ValueError("low_redundancy_cutoff must be >= 0")


@dataclass(frozen=True)
class ArticleGraph:
    key: NameKey
    nodes: tuple[str, ...]
    edges: dict[tuple[str, str], str]


@dataclass(frozen=True)
class IdentityPartition:
    """Articles of one name key grouped into identities.

    Identities are stored as sorted id tuples, ordered by size (descending)
    and then by smallest article id, which is also the label order.
    """

    key: NameKey
    identities: tuple[tuple[str, ...], ...]

    @classmethod
    def from_groups(cls, key: NameKey, groups: Iterable[Iterable[str]]) -> "IdentityPartition":
        ids = [tuple(sorted(g)) for g in groups]
        if any(not g for g in ids):
            raise ValueError(f"{key}: identities must be nonempty")
        seen: set[str] = set()
        for g in ids:
            for a in g:
                if a in seen:
                    raise ValueError(f"{key}: article {a!r} assigned to two identities")
                seen.add(a)
        ids.sort(key=lambda g: (-len(g), g[0]))
        return cls(key, tuple(ids))

    @property
    def articles(self) -> frozenset[str]:
        return frozenset(a for g in self.identities for a in g)

    def labels(self) -> list[str]:
        return [identity_label(self.key, i + 1) for i in range(len(self.identities))]

    def labelled(self) -> list[tuple[str, tuple[str, ...]]]:
        return list(zip(self.labels(), self.identities))

    def __len__(self) -> int:
        return len(self.identities)


def identity_label(key: NameKey, k: int) -> str:
    return f"{key.last}_{key.initials}#{k}"


def parse_label(label: str) -> NameKey:
    """Recover the name key from an ``LAST_INITIALS#k`` identity label."""
    head, sep, _ = label.rpartition("#")
    if not sep:
        raise ValueError(f"not an identity label: {label!r}")
    last, sep, initials = head.rpartition("_")
    if not sep or not last:
        raise ValueError(f"not an identity label: {label!r}")
    return NameKey(last, initials)


def _overlap_token(key: NameKey, strict: bool):
    return key if strict else key.last


def build_article_graph(corpus: Corpus, key: NameKey, config: DisambigConfig = DisambigConfig()) -> ArticleGraph:
    ids = articles_of(corpus, key)
    if not ids:
        raise CorpusError(f"name {key} does not appear in the corpus")
    nodes = tuple(sorted(ids))
    edges: dict[tuple[str, str], str] = {}

    if config.use_coauthor_overlap:
        tokens = {
            pid: {
                _overlap_token(a, config.strict_key_match)
                for a in corpus.records[pid].authors
                if a.last != key.last
            }
            for pid in nodes
        }
        for i, a in enumerate(nodes):
            ta = tokens[a]
            if not ta:
                continue
            for b in nodes[i + 1:]:
                if ta & tokens[b]:
                    edges[(a, b)] = COAUTHOR_OVERLAP

    if config.use_self_citation:
        members = set(nodes)
        for a in nodes:
            for b in corpus.records[a].cites:
                if b in members and b != a:
                    pair = (a, b) if a < b else (b, a)
                    prev = edges.get(pair)
                    edges[pair] = BOTH if prev == COAUTHOR_OVERLAP else (prev or SELF_CITATION)
    return ArticleGraph(key, nodes, dict(sorted(edges.items())))


def _components(corpus: Corpus, key: NameKey, ids: frozenset[str], config: DisambigConfig):
    # inverted index token -> articles avoids the pairwise scan on big blocks
    uf = UnionFind(sorted(ids))
    if config.use_coauthor_overlap:
        postings: dict = {}
        for pid in ids:
            for a in corpus.records[pid].authors:
                if a.last != key.last:
                    postings.setdefault(_overlap_token(a, config.strict_key_match), []).append(pid)
        for plist in postings.values():
            uf.union_all(plist)
    if config.use_self_citation:
        for pid in ids:
            for c in corpus.records[pid].cites:
                if c in ids and c != pid:
                    uf.union(pid, c)
    return uf.groups()


def resolve_name(
    corpus: Corpus, table: RedundancyTable, key: NameKey, config: DisambigConfig = DisambigConfig()
) -> IdentityPartition:
    ids = articles_of(corpus, key)
    if not ids:
        raise CorpusError(f"name {key} does not appear in the corpus")
    if table.raw_of(key.last) <= config.low_redundancy_cutoff:
        return IdentityPartition.from_groups(key, [ids])
    return IdentityPartition.from_groups(key, _components(corpus, key, ids, config))


# Worker state for the process pool; set in the parent before forking so the
# corpus is shared copy-on-write rather than pickled per task.
_WORKER_STATE: tuple | None = None


def _resolve_chunk(keys: list[NameKey]) -> list[IdentityPartition]:
    corpus, table, config = _WORKER_STATE
    return [resolve_name(corpus, table, k, config) for k in keys]


def resolve_corpus(
    corpus: Corpus,
    table: RedundancyTable,
    config: DisambigConfig = DisambigConfig(),
    threads: int = 1,
    keys: Iterable[NameKey] | None = None,
) -> dict[NameKey, IdentityPartition]:
    """Resolve every name key (or the given subset).

    Output is keyed and ordered by name key, so it does not depend on
    ``threads``.
    """
    global _WORKER_STATE
    todo = sorted(set(keys) if keys is not None else corpus.name_index)
    if threads <= 1 or len(todo) < 2000 or "fork" not in mp.get_all_start_methods():
        parts = [resolve_name(corpus, table, k, config) for k in todo]
    else:
        n_chunks = threads * 4
        step = -(-len(todo) // n_chunks)
        chunks = [todo[i:i + step] for i in range(0, len(todo), step)]
        _WORKER_STATE = (corpus, table, config)
        try:
            with ProcessPoolExecutor(threads, mp_context=mp.get_context("fork")) as pool:
                parts = [p for chunk in pool.map(_resolve_chunk, chunks) for p in chunk]
        finally:
            _WORKER_STATE = None
    return {p.key: p for p in sorted(parts, key=lambda p: p.key)}


def trivial_partitions(corpus: Corpus) -> dict[NameKey, IdentityPartition]:
    """One identity per name key: the undisambiguated assignment."""
    return {k: IdentityPartition.from_groups(k, [ids]) for k, ids in sorted(corpus.name_index.items())}


def write_partitions(partitions: Mapping[NameKey, IdentityPartition], fh: IO[str]) -> None:
    for key in sorted(partitions):
        p = partitions[key]
        fh.write(
            json.dumps(
                {
                    "last": key.last,
                    "initials": key.initials,
                    "identities": [list(g) for g in p.identities],
                    "labels": p.labels(),
                },
                ensure_ascii=False,
            )
        )
        fh.write("\n")


def read_partitions(fh: IO[str]) -> dict[NameKey, IdentityPartition]:
    """Read name-key partitions (identity or ground-truth JSONL)."""
    out: dict[NameKey, IdentityPartition] = {}
    for lineno, raw in enumerate(fh, start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
            key = NameKey.normalized(obj["last"], obj.get("initials", ""))
            groups = obj["identities"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise CorpusError(f"malformed partition line ({exc})", lineno) from None
        if key in out:
            raise CorpusError(f"duplicate name key {key}", lineno)
        try:
            out[key] = IdentityPartition.from_groups(key, groups)
        except ValueError as exc:
            raise CorpusError(str(exc), lineno) from None
    return out
