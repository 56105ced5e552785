"""Scoring disambiguation against ground truth and ground-truth-free diagnostics.

* K metric: geometric mean of average cluster purity (ACP) and average author
  purity (AAP) from the contingency table of a true and an empirical
  partition of one name's articles.
* Error taxonomy for a merged node: correct / reduce / split / delete.
* Weighted quantiles of K (weights are article counts per name).
* Cutoff learning by sweeping the low-redundancy cutoff.
* Distortion: largest two-sample KS statistic between the per-role
  distributions of raw last-name redundancy.
* Role-stratified sampling and finite-population sample sizes.
"""

from __future__ import annotations

import enum
import json
import math
import random
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from statistics import NormalDist
from typing import IO, Iterable, Mapping, Sequence

from .community import ROLES, NodeRoleMetrics
from .corpus import Corpus, CorpusError, NameKey, articles_of
from .disambig import DisambigConfig, IdentityPartition, parse_label, read_partitions, resolve_name
from .redundancy import RedundancyTable

__all__ = [
    "EvaluationError",
    "ClusteringComparison",
    "KScore",
    "ErrorType",
    "GroundTruth",
    "compare",
    "k_score",
    "classify_error",
    "weighted_quantile",
    "learn_cutoff",
    "CutoffSweep",
    "evaluate",
    "EvaluationReport",
    "distortion_analysis",
    "DistortionReport",
    "ks_statistic",
    "stratified_sample",
    "sample_size",
    "DEFAULT_STRATA_SIZES",
]

# ground-truth sample sizes per role stratum used as the default preset
DEFAULT_STRATA_SIZES = {"R1": 102, "R2": 102, "R3": 102, "R4": 89, "R5": 72, "R6": 77, "R7": 28}


class EvaluationError(ValueError):
    pass


# --- K metric ---------------------------------------------------------------


@dataclass(frozen=True)
class ClusteringComparison:
    N: int
    t: int
    e: int
    n_j: tuple[int, ...]
    n_i: tuple[int, ...]
    # n_ij[i][j]: articles in empirical cluster i and true cluster j
    n_ij: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class KScore:
    acp: float
    aap: float
    k: float


def _groups(p) -> list[tuple[str, ...]]:
    if isinstance(p, IdentityPartition):
        return list(p.identities)
    return [tuple(sorted(g)) for g in p]


def compare(truth, empirical) -> ClusteringComparison:
    """Contingency table between a true and an empirical partition.

    Both arguments are IdentityPartitions or plain iterables of article sets.
    """
    tg, eg = _groups(truth), _groups(empirical)
    true_of = {a: j for j, g in enumerate(tg) for a in g}
    emp_of = {a: i for i, g in enumerate(eg) for a in g}
    if set(true_of) != set(emp_of):
        only_t = sorted(set(true_of) - set(emp_of))
        only_e = sorted(set(emp_of) - set(true_of))
        raise EvaluationError(
            f"article sets differ: {len(only_t)} only in truth {only_t[:3]}, "
            f"{len(only_e)} only in empirical {only_e[:3]}"
        )
    table = [[0] * len(tg) for _ in eg]
    for a, j in true_of.items():
        table[emp_of[a]][j] += 1
    return ClusteringComparison(
        N=len(true_of),
        t=len(tg),
        e=len(eg),
        n_j=tuple(len(g) for g in tg),
        n_i=tuple(len(g) for g in eg),
        n_ij=tuple(tuple(row) for row in table),
    )


def k_score(cmp: ClusteringComparison) -> KScore:
    if cmp.N == 0:
        raise EvaluationError("K metric undefined for zero articles")
    acp = sum(
        nij * nij / cmp.n_i[i] for i, row in enumerate(cmp.n_ij) for nij in row if nij
    ) / cmp.N
    aap = sum(
        nij * nij / cmp.n_j[j] for row in cmp.n_ij for j, nij in enumerate(row) if nij
    ) / cmp.N
    return KScore(acp, aap, math.sqrt(acp * aap))


# --- error taxonomy ---------------------------------------------------------


class ErrorType(str, enum.Enum):
    CORRECT = "correct"
    REDUCE = "reduce"
    SPLIT = "split"
    DELETE = "delete"


def classify_error(truth) -> ErrorType:
    """Effect of the ground truth on a node that merges all of ``truth``.

    Identities with a single paper do not survive one-paper filtering, so
    they shrink (reduce) or remove (delete) the node rather than split it.
    """
    sizes = [len(g) for g in _groups(truth)]
    if not sizes or any(s == 0 for s in sizes):
        raise EvaluationError("classify_error needs a nonempty partition of nonempty identities")
    if len(sizes) == 1:
        return ErrorType.CORRECT
    big = sum(1 for s in sizes if s >= 2)
    if big >= 2:
        return ErrorType.SPLIT
    if big == 0:
        return ErrorType.DELETE
    return ErrorType.REDUCE


# --- weighted quantiles -----------------------------------------------------


def weighted_quantile(values: Sequence[tuple[float, float]], q: float) -> float:
    """Smallest value whose cumulative normalized weight reaches ``q``.

    ``values`` holds ``(value, weight)`` pairs with positive weights. The
    step rule is left-continuous: q = 0 gives the minimum.
    """
    if not values:
        raise EvaluationError("weighted_quantile of an empty list")
    if not 0.0 <= q <= 1.0:
        raise EvaluationError(f"quantile level {q} outside [0, 1]")
    if any(w <= 0 for _, w in values):
        raise EvaluationError("weights must be positive")
    pairs = sorted(values, key=lambda vw: vw[0])
    total = math.fsum(w for _, w in pairs)
    running = 0.0
    for v, w in pairs:
        running += w
        if running / total >= q - 1e-12:
            return v
    return pairs[-1][0]


# --- ground truth -----------------------------------------------------------


@dataclass
class GroundTruth:
    partitions: dict[NameKey, IdentityPartition] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.partitions)

    def __iter__(self):
        return iter(sorted(self.partitions))

    def __getitem__(self, key: NameKey) -> IdentityPartition:
        return self.partitions[key]

    def validate(self, corpus: Corpus) -> None:
        for key, part in self.partitions.items():
            expected = articles_of(corpus, key)
            if part.articles != expected:
                raise EvaluationError(
                    f"ground truth for {key} covers {len(part.articles)} articles, corpus has {len(expected)}"
                )

    def weight(self, key: NameKey) -> int:
        return len(self.partitions[key].articles)

    @classmethod
    def read(cls, fh: IO[str]) -> "GroundTruth":
        return cls(read_partitions(fh))

    def write(self, fh: IO[str]) -> None:
        for key in sorted(self.partitions):
            fh.write(
                json.dumps(
                    {
                        "last": key.last,
                        "initials": key.initials,
                        "identities": [list(g) for g in self.partitions[key].identities],
                    },
                    ensure_ascii=False,
                )
            )
            fh.write("\n")

    def subset(self, keys: Iterable[NameKey]) -> "GroundTruth":
        return GroundTruth({k: self.partitions[k] for k in sorted(keys)})


# --- cutoff learning --------------------------------------------------------


@dataclass(frozen=True)
class CutoffSweep:
    cutoff: int
    median: float
    q25: float
    minimum: float
    mean: float


_OBJECTIVES = {
    "median": lambda s: (s.median, s.q25),
    "q25": lambda s: (s.q25, s.median),
    "min": lambda s: (s.minimum, s.median),
    "mean": lambda s: (s.mean, s.median),
}


def learn_cutoff(
    corpus: Corpus,
    table: RedundancyTable,
    training: GroundTruth,
    cutoffs: Iterable[int] = range(0, 11),
    objective: str = "median",
    use_self_citation: bool = False,
) -> tuple[int, list[CutoffSweep]]:
    """Sweep the low-redundancy cutoff on training names.

    Names are resolved with co-author overlap only (self-citation off by
    default). The weighted median K picks the cutoff; the 25% quantile breaks
    ties, then the smaller cutoff. Returns the cutoff and the full sweep.
    """
    if not len(training):
        raise EvaluationError("empty training set")
    if objective not in _OBJECTIVES:
        raise EvaluationError(f"unknown objective {objective!r}")
    for key in training:
        if not articles_of(corpus, key):
            raise EvaluationError(f"training name {key} not in corpus")
    cutoffs = sorted(set(cutoffs))
    if not cutoffs:
        raise EvaluationError("empty cutoff range")

    sweep: list[CutoffSweep] = []
    for c in cutoffs:
        cfg = DisambigConfig(low_redundancy_cutoff=c, use_self_citation=use_self_citation)
        scored = []
        for key in training:
            emp = resolve_name(corpus, table, key, cfg)
            scored.append((k_score(compare(training[key], emp)).k, training.weight(key)))
        sweep.append(
            CutoffSweep(
                cutoff=c,
                median=weighted_quantile(scored, 0.5),
                q25=weighted_quantile(scored, 0.25),
                minimum=weighted_quantile(scored, 0.0),
                mean=math.fsum(k * w for k, w in scored) / math.fsum(w for _, w in scored),
            )
        )
    key_fn = _OBJECTIVES[objective]
    best = max(sweep, key=lambda s: (*key_fn(s), -s.cutoff))
    return best.cutoff, sweep


# --- evaluation report ------------------------------------------------------


@dataclass
class EvaluationReport:
    names: list[dict]
    quantiles: list[dict]
    errors: list[dict]
    decomposition: list[dict]

    def summary(self) -> dict:
        overall = next(q for q in self.quantiles if q["stratum"] == "all")
        return {
            "names": len(self.names),
            "weighted_median_k": overall["median"],
            "weighted_q25_k": overall["q25"],
            "weighted_min_k": overall["minimum"],
            "errors": [e for e in self.errors if e["stratum"] == "all"],
            "decomposition": [d for d in self.decomposition if d["stratum"] == "all"],
        }


def _decompose(truth: IdentityPartition, emp: IdentityPartition) -> str:
    emp_of = {a: i for i, g in enumerate(emp.identities) for a in g}
    true_of = {a: j for j, g in enumerate(truth.identities) for a in g}
    over_split = any(len({emp_of[a] for a in g}) >= 2 for g in truth.identities)
    over_merged = any(len({true_of[a] for a in g}) >= 2 for g in emp.identities)
    if over_split and over_merged:
        return "both"
    if over_split:
        return "over_split"
    if over_merged:
        return "over_merged"
    return "exact"


def _pct(n: int, d: int):
    return (100.0 * n / d) if d else None


def evaluate(
    truth: GroundTruth,
    empirical: Mapping[NameKey, IdentityPartition],
    strata: Mapping[NameKey, str] | None = None,
) -> EvaluationReport:
    """Score every ground-truth name against its empirical partition.

    ``strata`` maps a name key to its role stratum; names without a stratum
    only count toward ``all``. Quantiles are weighted by the name's article
    count. The error table classifies every empirical identity (node) by the
    truth restricted to its articles, so for the undisambiguated assignment it
    is the per-name taxonomy. Percentages state their denominator.
    """
    strata = strata or {}
    names: list[dict] = []
    node_errors: list[tuple[str, ErrorType]] = []
    for key in truth:
        if key not in empirical:
            raise EvaluationError(f"no empirical partition for ground-truth name {key}")
        t, e = truth[key], empirical[key]
        ks = k_score(compare(t, e))
        stratum = strata.get(key)
        names.append(
            {
                "last": key.last,
                "initials": key.initials,
                "stratum": stratum or "",
                "articles": len(t.articles),
                "true_identities": len(t),
                "empirical_identities": len(e),
                "acp": ks.acp,
                "aap": ks.aap,
                "k": ks.k,
                "decomposition": _decompose(t, e),
            }
        )
        true_of = {a: j for j, g in enumerate(t.identities) for a in g}
        for g in e.identities:
            sub: dict[int, list[str]] = {}
            for a in g:
                sub.setdefault(true_of[a], []).append(a)
            node_errors.append((stratum or "", classify_error(list(sub.values()))))

    labels = ["all"] + [r for r in ROLES if any(n["stratum"] == r for n in names)]
    others = sorted({n["stratum"] for n in names} - set(ROLES) - {""})
    labels += others

    quantiles, errors, decomposition = [], [], []
    for lab in labels:
        rows = [n for n in names if lab == "all" or n["stratum"] == lab]
        pairs = [(n["k"], n["articles"]) for n in rows]
        quantiles.append(
            {
                "stratum": lab,
                "names": len(rows),
                "median": weighted_quantile(pairs, 0.5),
                "q25": weighted_quantile(pairs, 0.25),
                "minimum": weighted_quantile(pairs, 0.0),
            }
        )
        errs = [et for s, et in node_errors if lab == "all" or s == lab]
        cnt = Counter(errs)
        for et in ErrorType:
            errors.append(
                {
                    "stratum": lab,
                    "error_type": et.value,
                    "count": cnt[et],
                    "denominator": len(errs),
                    "percent": _pct(cnt[et], len(errs)),
                }
            )
        dc = Counter(n["decomposition"] for n in rows)
        for kind in ("exact", "over_split", "over_merged", "both"):
            decomposition.append(
                {
                    "stratum": lab,
                    "kind": kind,
                    "count": dc[kind],
                    "denominator": len(rows),
                    "percent": _pct(dc[kind], len(rows)),
                }
            )
    return EvaluationReport(names, quantiles, errors, decomposition)


# --- distortion -------------------------------------------------------------


def ks_statistic(a: Sequence[float], b: Sequence[float]) -> float:
    """Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|."""
    if not a or not b:
        raise EvaluationError("KS statistic needs two nonempty samples")
    sa, sb = sorted(a), sorted(b)
    na, nb = len(sa), len(sb)
    i = j = 0
    d = 0.0
    while i < na and j < nb:
        x = min(sa[i], sb[j])
        while i < na and sa[i] == x:
            i += 1
        while j < nb and sb[j] == x:
            j += 1
        d = max(d, abs(i / na - j / nb))
    return d


@dataclass
class DistortionReport:
    score: float | None
    worst_pair: tuple[str, str] | None
    pairwise: dict[tuple[str, str], float]
    samples: dict[str, list[int]]
    omitted: list[str]

    def curves(self) -> list[tuple[str, int, float]]:
        """Per-role ECDF of raw redundancy as (role, raw, cumulative_probability)."""
        rows = []
        for role in ROLES:
            vals = self.samples.get(role)
            if not vals:
                continue
            cnt = Counter(vals)
            running = 0
            for r in sorted(cnt):
                running += cnt[r]
                rows.append((role, r, running / len(vals)))
        return rows

    def to_json(self) -> dict:
        return {
            "score": self.score,
            "worst_pair": list(self.worst_pair) if self.worst_pair else None,
            "pairwise": [
                {"a": a, "b": b, "ks": v} for (a, b), v in sorted(self.pairwise.items())
            ],
            "nodes_per_role": {r: len(self.samples.get(r, [])) for r in ROLES},
            "omitted_roles": self.omitted,
        }


def distortion_analysis(
    roles: Mapping[str, NodeRoleMetrics],
    table: RedundancyTable,
    min_nodes: int = 1,
) -> DistortionReport:
    """Compare per-role distributions of raw last-name redundancy.

    Node labels resolve to last names through the identity label format.
    The score is the largest pairwise KS statistic over roles that have at
    least ``min_nodes`` classifiable nodes; the others are listed as omitted.
    """
    samples: dict[str, list[int]] = {r: [] for r in ROLES}
    for label in sorted(roles):
        m = roles[label]
        if m.role in samples:
            samples[m.role].append(table.raw_of(parse_label(label).last))
    present = [r for r in ROLES if len(samples[r]) >= max(1, min_nodes)]
    omitted = [r for r in ROLES if r not in present]
    pairwise = {(a, b): ks_statistic(samples[a], samples[b]) for a, b in combinations(present, 2)}
    worst, score = None, None
    for pair, d in pairwise.items():
        if score is None or d > score:
            worst, score = pair, d
    return DistortionReport(score, worst, pairwise, samples, omitted)


# --- sampling ---------------------------------------------------------------


def stratified_sample(
    roles: Mapping[str, NodeRoleMetrics],
    sizes: Mapping[str, int],
    seed: int = 0,
) -> dict[str, list[str]]:
    """Uniform sample without replacement within each role stratum."""
    population: dict[str, list[str]] = {}
    for label in sorted(roles):
        population.setdefault(roles[label].role, []).append(label)
    out: dict[str, list[str]] = {}
    for role in sorted(sizes):
        # one stream per stratum, so a stratum's draw ignores the other requests
        rng = random.Random(f"{seed}:{role}")
        n = sizes[role]
        pool = population.get(role, [])
        if n < 0 or n > len(pool):
            raise EvaluationError(f"role {role}: requested {n} nodes, population has {len(pool)}")
        out[role] = sorted(rng.sample(pool, n))
    return out


def sample_size(population: int, confidence: float = 0.95, half_width: float = 0.10, p: float = 0.5) -> int:
    """Minimal sample size for estimating a proportion, finite-population corrected.

    n = z^2 p (1-p) N / (z^2 p (1-p) + (N - 1) c^2), rounded up.
    """
    if population <= 0:
        raise EvaluationError("population must be positive")
    z = NormalDist().inv_cdf(0.5 + confidence / 2)
    num = z * z * p * (1 - p) * population
    den = z * z * p * (1 - p) + (population - 1) * half_width * half_width
    return min(population, math.ceil(num / den - 1e-9))


def strata_from_roles(roles: Mapping[str, NodeRoleMetrics]) -> dict[NameKey, str]:
    """Name key -> role of its node, for labels of an undisambiguated network."""
    out: dict[NameKey, str] = {}
    for label in sorted(roles):
        key = parse_label(label)
        if key not in out:
            out[key] = roles[label].role
    return out


def check_truth_keys(truth: GroundTruth, corpus: Corpus) -> None:
    for key in truth:
        if not articles_of(corpus, key):
            raise CorpusError(f"ground-truth name {key} not in corpus")
