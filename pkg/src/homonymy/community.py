"""Module detection on the co-author network and node-role cartography.

The default clustering minimizes the two-level map equation for undirected
flow with a multilevel local-moving scheme (move nodes greedily, aggregate
modules into super-nodes, repeat). A modularity-based Louvain run from
networkx is available as ``method="louvain"``.

Roles follow the within-module degree z-score / participation coefficient
scheme: hubs have z >= 2.5 and are split by p into R5-R7, non-hubs into R1-R4.
"""

from __future__ import annotations

import csv
import math
import random
from collections import Counter
from dataclasses import dataclass
from typing import IO, Mapping

import numpy as np

from .netbuild import CoauthorNetwork, NetworkError

__all__ = [
    "Clustering",
    "NodeRoleMetrics",
    "RoleThresholds",
    "ROLES",
    "UNCLASSIFIABLE",
    "map_equation",
    "cluster_network",
    "classify_roles",
    "role_distribution",
    "write_roles",
    "read_roles",
    "write_distribution",
]

ROLES = ("R1", "R2", "R3", "R4", "R5", "R6", "R7")
UNCLASSIFIABLE = "Unclassifiable"
_EPS = 1e-10


@dataclass(frozen=True)
class Clustering:
    assignment: dict[str, int]
    quality: float
    method: str = "infomap"

    @property
    def n_clusters(self) -> int:
        return len(set(self.assignment.values()))


def _plogp(x: float) -> float:
    return x * math.log2(x) if x > 0 else 0.0


def _index_graph(net: CoauthorNetwork, weighted: bool):
    labels = list(net.nodes)
    index = {u: i for i, u in enumerate(labels)}
    adj: list[dict[int, float]] = [{} for _ in labels]
    for (u, v), w in net.edges.items():
        w = float(w) if weighted else 1.0
        i, j = index[u], index[v]
        adj[i][j] = adj[i].get(j, 0.0) + w
        adj[j][i] = adj[j].get(i, 0.0) + w
    return labels, adj


def map_equation(net: CoauthorNetwork, assignment: Mapping[str, int], weighted: bool = True) -> float:
    """Two-level map equation codelength (bits) of a partition, undirected flow."""
    labels, adj = _index_graph(net, weighted)
    total = sum(sum(a.values()) for a in adj)
    if total == 0:
        return 0.0
    mod_exit: Counter = Counter()
    mod_flow: Counter = Counter()
    node_term = 0.0
    for i, u in enumerate(labels):
        m = assignment[u]
        d = sum(adj[i].values()) / total
        mod_flow[m] += d
        node_term += _plogp(d)
        for j, w in adj[i].items():
            if assignment[labels[j]] != m:
                mod_exit[m] += w / total
    q = sum(mod_exit.values())
    return (
        _plogp(q)
        - 2 * sum(_plogp(x) for x in mod_exit.values())
        + sum(_plogp(mod_exit[m] + mod_flow[m]) for m in mod_flow)
        - node_term
    )


class _MapEquationOptimizer:
    """Greedy multilevel minimization of the map equation.

    All quantities are flow fractions: node flow is weighted degree over the
    total degree, and an undirected edge carries w / total in each direction.
    """

    def __init__(self, adj: list[dict[int, float]], rng: random.Random, max_passes: int = 50):
        self.rng = rng
        self.max_passes = max_passes
        total = sum(sum(a.values()) for a in adj)
        self.total = total
        self.node_flow = [sum(a.values()) / total for a in adj]
        self.node_term = sum(_plogp(p) for p in self.node_flow)
        self.adj0 = [{j: w / total for j, w in a.items()} for a in adj]

    def run(self) -> list[int]:
        n0 = len(self.adj0)
        members: list[list[int]] = [[i] for i in range(n0)]
        adj = self.adj0
        flow = list(self.node_flow)
        exit_ = [sum(a.values()) for a in adj]
        while True:
            module = self._local_moving(adj, flow, exit_)
            ids = sorted(set(module))
            if len(ids) == len(module):
                break
            remap = {m: k for k, m in enumerate(ids)}
            k = len(ids)
            new_members: list[list[int]] = [[] for _ in range(k)]
            new_flow = [0.0] * k
            new_adj: list[dict[int, float]] = [{} for _ in range(k)]
            for u, m in enumerate(module):
                mu = remap[m]
                new_members[mu].extend(members[u])
                new_flow[mu] += flow[u]
                for v, w in adj[u].items():
                    mv = remap[module[v]]
                    if mv != mu:
                        new_adj[mu][mv] = new_adj[mu].get(mv, 0.0) + w
            members, adj, flow = new_members, new_adj, new_flow
            exit_ = [sum(a.values()) for a in adj]
        out = [0] * n0
        for m, group in enumerate(members):
            for i in group:
                out[i] = m
        return out

    def _local_moving(self, adj, flow, exit_) -> list[int]:
        n = len(adj)
        module = list(range(n))
        mod_exit = list(exit_)
        mod_flow = list(flow)
        mod_size = [1] * n
        sum_q = sum(mod_exit)
        sum_q_term = sum(_plogp(q) for q in mod_exit)
        sum_qp_term = sum(_plogp(q + p) for q, p in zip(mod_exit, mod_flow))
        empty: list[int] = []

        order = list(range(n))
        for _ in range(self.max_passes):
            self.rng.shuffle(order)
            moved = 0
            for u in order:
                a = module[u]
                links: dict[int, float] = {}
                for v, w in adj[u].items():
                    m = module[v]
                    links[m] = links.get(m, 0.0) + w
                if not links:
                    continue
                w_ua = links.pop(a, 0.0)
                eu, pu = exit_[u], flow[u]
                qa, pa = mod_exit[a], mod_flow[a]
                qa_new = qa - eu + 2 * w_ua
                pa_new = pa - pu

                base_q = sum_q - qa + qa_new
                base_q_term = sum_q_term - _plogp(qa) + _plogp(qa_new)
                base_qp_term = sum_qp_term - _plogp(qa + pa) + _plogp(qa_new + pa_new)
                current = _plogp(sum_q) - 2 * sum_q_term + sum_qp_term

                candidates = sorted(links.items())
                if mod_size[a] > 1 and empty:
                    candidates.append((empty[-1], 0.0))

                best, best_delta = a, -_EPS
                best_state = None
                for b, w_ub in candidates:
                    qb, pb = mod_exit[b], mod_flow[b]
                    qb_new = qb + eu - 2 * w_ub
                    pb_new = pb + pu
                    s_q = base_q - qb + qb_new
                    s_qt = base_q_term - _plogp(qb) + _plogp(qb_new)
                    s_qpt = base_qp_term - _plogp(qb + pb) + _plogp(qb_new + pb_new)
                    delta = _plogp(s_q) - 2 * s_qt + s_qpt - current
                    if delta < best_delta:
                        best, best_delta = b, delta
                        best_state = (qb_new, pb_new, s_q, s_qt, s_qpt)
                if best == a:
                    continue

                qb_new, pb_new, sum_q, sum_q_term, sum_qp_term = best_state
                if mod_size[best] == 0:
                    empty.pop()
                mod_exit[a], mod_flow[a] = qa_new, pa_new
                mod_exit[best], mod_flow[best] = qb_new, pb_new
                mod_size[a] -= 1
                mod_size[best] += 1
                if mod_size[a] == 0:
                    mod_exit[a] = mod_flow[a] = 0.0
                    empty.append(a)
                module[u] = best
                moved += 1
            if not moved:
                break
        return module

    def codelength(self, assignment: list[int]) -> float:
        mod_exit: Counter = Counter()
        mod_flow: Counter = Counter()
        for i, m in enumerate(assignment):
            mod_flow[m] += self.node_flow[i]
            for j, w in self.adj0[i].items():
                if assignment[j] != m:
                    mod_exit[m] += w
        q = sum(mod_exit.values())
        return (
            _plogp(q)
            - 2 * sum(_plogp(x) for x in mod_exit.values())
            + sum(_plogp(mod_exit[m] + mod_flow[m]) for m in mod_flow)
            - self.node_term
        )


def _canonical(labels: list[str], raw: list[int]) -> dict[str, int]:
    # cluster ids ordered by (size desc, smallest label) so they are seed-free
    groups: dict[int, list[str]] = {}
    for u, m in zip(labels, raw):
        groups.setdefault(m, []).append(u)
    ordered = sorted(groups.values(), key=lambda g: (-len(g), min(g)))
    return {u: cid for cid, g in enumerate(ordered) for u in g}


def cluster_network(
    net: CoauthorNetwork,
    seed: int = 0,
    method: str = "infomap",
    weighted: bool = True,
    trials: int = 1,
) -> Clustering:
    """Partition the network into modules; deterministic for a fixed seed.

    Modules never span connected components. ``quality`` is the map equation
    codelength in bits for ``infomap`` and modularity for ``louvain``.
    """
    if not net.nodes:
        raise NetworkError("cannot cluster an empty network")
    labels, adj = _index_graph(net, weighted)

    if method == "louvain":
        import networkx as nx
        from networkx.algorithms.community import louvain_communities, modularity

        g = nx.Graph()
        g.add_nodes_from(range(len(labels)))
        g.add_weighted_edges_from((i, j, w) for i, a in enumerate(adj) for j, w in a.items() if i < j)
        comms = louvain_communities(g, weight="weight", seed=seed)
        raw = [0] * len(labels)
        for cid, c in enumerate(comms):
            for i in c:
                raw[i] = cid
        q = modularity(g, comms, weight="weight") if g.number_of_edges() else 0.0
        return Clustering(_canonical(labels, raw), float(q), "louvain")
    if method != "infomap":
        raise ValueError(f"unknown clustering method {method!r}")

    if not net.edges:
        return Clustering({u: i for i, u in enumerate(labels)}, 0.0, "infomap")
    best_raw, best_len = None, math.inf
    for t in range(max(1, trials)):
        opt = _MapEquationOptimizer(adj, random.Random(seed * 1_000_003 + t))
        # isolated nodes carry no flow; keep them as their own modules
        raw = opt.run()
        length = opt.codelength(raw)
        if length < best_len - 1e-12:
            best_raw, best_len = raw, length
    return Clustering(_canonical(labels, best_raw), best_len, "infomap")


@dataclass(frozen=True)
class NodeRoleMetrics:
    z: float
    p: float
    role: str
    cluster: int = -1
    degree: float = 0.0

    @property
    def classifiable(self) -> bool:
        return self.role != UNCLASSIFIABLE


@dataclass(frozen=True)
class RoleThresholds:
    hub_z: float = 2.5
    r1: float = 0.05
    r2: float = 0.62
    r3: float = 0.80
    r5: float = 0.30
    r6: float = 0.75

    def role(self, z: float, p: float) -> str:
        # boundaries are inclusive up to float noise (a 5-node star gives z = 2 - 2e-16)
        z, p = z + _EPS, p - _EPS
        if z >= self.hub_z:
            if p <= self.r5:
                return "R5"
            return "R6" if p <= self.r6 else "R7"
        if p <= self.r1:
            return "R1"
        if p <= self.r2:
            return "R2"
        return "R3" if p <= self.r3 else "R4"


def classify_roles(
    net: CoauthorNetwork,
    clustering: Clustering,
    thresholds: RoleThresholds = RoleThresholds(),
    weighted: bool = False,
) -> dict[str, NodeRoleMetrics]:
    """Within-cluster degree z-score, participation coefficient and role per node.

    Degrees are link counts unless ``weighted``. Nodes in clusters whose
    internal degree has zero standard deviation are Unclassifiable.
    """
    missing = [u for u in net.nodes if u not in clustering.assignment]
    if missing:
        raise NetworkError(f"node {missing[0]} missing from clustering")
    assign = clustering.assignment
    adj = net.adjacency()

    k_in: dict[str, float] = {}
    degree: dict[str, float] = {}
    part: dict[str, float] = {}
    for u, nbrs in adj.items():
        per_cluster: Counter = Counter()
        for v, w in nbrs.items():
            per_cluster[assign[v]] += float(w) if weighted else 1.0
        k = sum(per_cluster.values())
        degree[u] = k
        k_in[u] = per_cluster.get(assign[u], 0.0)
        part[u] = 1.0 - sum((ks / k) ** 2 for ks in per_cluster.values()) if k > 0 else 0.0

    members: dict[int, list[str]] = {}
    for u in net.nodes:
        members.setdefault(assign[u], []).append(u)
    stats: dict[int, tuple[float, float]] = {}
    for c, us in members.items():
        arr = np.array([k_in[u] for u in us], dtype=float)
        stats[c] = (float(arr.mean()), float(arr.std()))

    out: dict[str, NodeRoleMetrics] = {}
    for u in net.nodes:
        c = assign[u]
        mean, std = stats[c]
        p = min(max(part[u], 0.0), 1.0)
        if std <= 1e-12:
            out[u] = NodeRoleMetrics(math.nan, p, UNCLASSIFIABLE, c, degree[u])
        else:
            z = (k_in[u] - mean) / std
            out[u] = NodeRoleMetrics(z, p, thresholds.role(z, p), c, degree[u])
    return out


def role_distribution(roles: Mapping[str, NodeRoleMetrics]) -> dict:
    """Counts and fractions per role over classifiable nodes.

    Fractions are None when no node is classifiable. The report also carries
    the Unclassifiable count and its share of all nodes.
    """
    counts = Counter(m.role for m in roles.values())
    n_class = sum(counts[r] for r in ROLES)
    dist = {
        r: {"count": counts[r], "fraction": (counts[r] / n_class) if n_class else None}
        for r in ROLES
    }
    n_all = len(roles)
    return {
        "roles": dist,
        "classifiable": n_class,
        "unclassifiable": counts[UNCLASSIFIABLE],
        "unclassifiable_fraction": (counts[UNCLASSIFIABLE] / n_all) if n_all else None,
    }


def _fmt(x: float) -> str:
    return "" if math.isnan(x) else repr(float(x))


def write_roles(roles: Mapping[str, NodeRoleMetrics], fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["label", "cluster", "z", "p", "role"])
    for u in sorted(roles):
        m = roles[u]
        w.writerow([u, m.cluster, _fmt(m.z), _fmt(m.p), m.role])


def read_roles(fh: IO[str]) -> dict[str, NodeRoleMetrics]:
    out = {}
    for row in csv.DictReader(fh):
        z = float(row["z"]) if row["z"] else math.nan
        out[row["label"]] = NodeRoleMetrics(z, float(row["p"]), row["role"], int(row["cluster"]))
    return out


def write_distribution(dist: dict, fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["role", "count", "fraction"])
    for r in ROLES:
        f = dist["roles"][r]["fraction"]
        w.writerow([r, dist["roles"][r]["count"], "" if f is None else repr(f)])
