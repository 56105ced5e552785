"""Co-author network construction with one-paper filtering."""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from typing import IO, Mapping

from .corpus import Corpus, NameKey
from .disambig import IdentityPartition, UnionFind

__all__ = [
    "NetworkError",
    "AuthorNode",
    "CoauthorNetwork",
    "build_network",
    "giant_component",
    "network_summary",
    "write_edges",
    "write_nodes",
    "read_edges",
]


class NetworkError(ValueError):
    pass


@dataclass(frozen=True)
class AuthorNode:
    label: str
    key: NameKey
    paper_ids: frozenset[str]


@dataclass
class CoauthorNetwork:
    nodes: dict[str, AuthorNode] = field(default_factory=dict)
    # (u, v) with u < v -> number of co-authored papers
    edges: dict[tuple[str, str], int] = field(default_factory=dict)
    component_ids: dict[str, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.nodes)

    def adjacency(self) -> dict[str, dict[str, int]]:
        adj: dict[str, dict[str, int]] = {u: {} for u in self.nodes}
        for (u, v), w in self.edges.items():
            adj[u][v] = w
            adj[v][u] = w
        return adj

    def induced(self, labels) -> "CoauthorNetwork":
        keep = set(labels)
        nodes = {u: n for u, n in self.nodes.items() if u in keep}
        edges = {e: w for e, w in self.edges.items() if e[0] in keep and e[1] in keep}
        return _with_components(nodes, edges)


def _with_components(nodes: dict[str, AuthorNode], edges: dict[tuple[str, str], int]) -> CoauthorNetwork:
    uf = UnionFind(nodes)
    for u, v in edges:
        uf.union(u, v)
    # component ids ordered by (size desc, smallest label)
    groups = sorted(uf.groups(), key=lambda g: (-len(g), g[0]))
    comp = {u: i for i, g in enumerate(groups) for u in g}
    return CoauthorNetwork(dict(sorted(nodes.items())), dict(sorted(edges.items())), dict(sorted(comp.items())))


def build_network(
    corpus: Corpus,
    identities: Mapping[NameKey, IdentityPartition],
    filter_to_fixpoint: bool = False,
) -> CoauthorNetwork:
    """Build the co-author network from an identity assignment.

    Identities with a single paper are dropped, then publications left with
    fewer than two identities are dropped, and the filter stops there. Some
    identities can end up with one paper. ``filter_to_fixpoint`` repeats both
    steps until nothing changes.
    """
    missing = set(corpus.name_index) - set(identities)
    if missing:
        raise NetworkError(f"no identity partition for {len(missing)} name keys, e.g. {min(missing)}")

    papers_of: dict[str, tuple[NameKey, set[str]]] = {}
    authors_of: dict[str, list[str]] = {pid: [] for pid in corpus.records}
    for key in sorted(identities):
        part = identities[key]
        known = corpus.name_index.get(key, frozenset())
        for label, group in part.labelled():
            for pid in group:
                if pid not in known:
                    raise NetworkError(f"identity {label} references article {pid!r} not authored by {key}")
                authors_of[pid].append(label)
            papers_of[label] = (key, set(group))

    alive_papers = set(corpus.records)
    while True:
        # step 1: identities with exactly one (remaining) paper
        dropped = {u for u, (_, ps) in papers_of.items() if len(ps) == 1}
        for u in dropped:
            del papers_of[u]
        # step 2: publications with fewer than two remaining identities
        gone = {
            pid for pid in alive_papers
            if sum(1 for u in authors_of[pid] if u in papers_of) < 2
        }
        alive_papers -= gone
        for u in list(papers_of):
            ps = papers_of[u][1]
            ps -= gone
            if not ps:
                del papers_of[u]
        if not filter_to_fixpoint:
            break
        if not dropped and not gone:
            break

    nodes = {u: AuthorNode(u, key, frozenset(ps)) for u, (key, ps) in papers_of.items()}
    weights: Counter = Counter()
    for pid in alive_papers:
        labels = sorted(u for u in authors_of[pid] if u in nodes)
        for u, v in combinations(labels, 2):
            weights[(u, v)] += 1
    return _with_components(nodes, dict(weights))


def giant_component(net: CoauthorNetwork) -> CoauthorNetwork:
    """Largest connected component; ties go to the one holding the smallest label."""
    if not net.nodes:
        raise NetworkError("empty network has no giant component")
    members = [u for u, c in net.component_ids.items() if c == 0]
    return net.induced(members)


def network_summary(net: CoauthorNetwork, giant: CoauthorNetwork | None = None) -> dict:
    if giant is None and net.nodes:
        giant = giant_component(net)
    n = len(net.nodes)
    g = len(giant.nodes) if giant is not None else 0
    single = sum(1 for node in net.nodes.values() if len(node.paper_ids) == 1)
    papers = set()
    for node in net.nodes.values():
        papers |= node.paper_ids
    return {
        "nodes": n,
        "edges": len(net.edges),
        "publications": len(papers),
        "components": len(set(net.component_ids.values())),
        "giant_component_nodes": g,
        "giant_component_fraction": (g / n) if n else None,
        "single_paper_node_fraction": (single / n) if n else None,
    }


def write_edges(net: CoauthorNetwork, fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["u", "v", "weight"])
    for (u, v), weight in net.edges.items():
        w.writerow([u, v, weight])


def write_nodes(net: CoauthorNetwork, fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["label", "paper_count"])
    for u, node in net.nodes.items():
        w.writerow([u, len(node.paper_ids)])


def read_edges(fh: IO[str]) -> CoauthorNetwork:
    """Rebuild a network (without paper sets) from an edge-list CSV."""
    from .disambig import parse_label

    nodes: dict[str, AuthorNode] = {}
    edges: dict[tuple[str, str], int] = {}
    for row in csv.DictReader(fh):
        u, v = sorted((row["u"], row["v"]))
        if u == v:
            raise NetworkError(f"self edge on {u}")
        edges[(u, v)] = int(row.get("weight") or 1)
        for x in (u, v):
            if x not in nodes:
                nodes[x] = AuthorNode(x, parse_label(x), frozenset())
    return _with_components(nodes, edges)
