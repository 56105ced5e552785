"""Synthetic corpora with planted author identities.

Identities are grouped into research teams. Every team paper carries the
team's lead (PI) plus a subset of members; with probability
``coauthor_stability`` a later paper reuses one of the lead's earlier team
co-authors, otherwise the lead publishes with fresh one-paper co-authors.
Some team papers add a lead/member pair from another team
(``collaboration_rate``). Homonyms are planted by letting a new identity
reuse an existing name key with probability ``homonym_rate``.

With ``disjoint_teams`` the generator guarantees that identities sharing a
name key never share a co-author last name and are never linked by a
citation, so any merge of two of them by the resolver is impossible.
"""

from __future__ import annotations

import itertools
import json
import random
import string
from collections import Counter
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Sequence

from .corpus import Corpus, NameKey, PublicationRecord, write_corpus
from .disambig import IdentityPartition
from .evaluation import GroundTruth

__all__ = [
    "SynthError",
    "SynthSpec",
    "PlantedTruth",
    "generate",
    "emit",
    "initials_pool",
    "cutoff_training_corpus",
]


class SynthError(ValueError):
    pass


@dataclass(frozen=True)
class SynthSpec:
    n_identities: int = 1000
    last_name_distribution: str = "uniform"  # or "heavy_tailed"
    exponent: float = 1.1
    n_last_names: int | None = None
    initials_pool_size: int = 200
    papers_per_identity: tuple[int, int] = (4, 10)
    team_size: tuple[int, int] = (3, 8)
    authors_per_paper: tuple[int, int] = (2, 5)
    coauthor_stability: float = 0.9
    self_citation_rate: float = 0.3
    homonym_rate: float = 0.05
    cross_citation_noise: float = 0.0
    collaboration_rate: float = 0.1
    disjoint_teams: bool = False
    years: tuple[int, int] = (1987, 2008)
    seed: int = 0

    def __post_init__(self):
        for name in ("coauthor_stability", "self_citation_rate", "homonym_rate",
                     "cross_citation_noise", "collaboration_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise SynthError(f"{name}={v} outside [0, 1]")
        for name in ("papers_per_identity", "team_size", "authors_per_paper", "years"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise SynthError(f"{name} range {lo}..{hi} is empty")
        if self.n_identities < 1:
            raise SynthError("n_identities must be positive")
        if self.papers_per_identity[0] < 1:
            raise SynthError("papers_per_identity must be >= 1")
        if self.team_size[0] < 2:
            raise SynthError("team_size must be >= 2")
        if self.authors_per_paper[0] < 2:
            raise SynthError("authors_per_paper must be >= 2")
        if self.team_size[0] > self.n_identities:
            raise SynthError(f"team_size {self.team_size[0]} exceeds the identity pool {self.n_identities}")
        if self.last_name_distribution not in ("uniform", "heavy_tailed"):
            raise SynthError(f"unknown last_name_distribution {self.last_name_distribution!r}")
        if self.initials_pool_size < 1:
            raise SynthError("initials_pool_size must be positive")

    @classmethod
    def from_dict(cls, d: dict) -> "SynthSpec":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise SynthError(f"unknown spec fields {sorted(unknown)}")
        kw = {k: tuple(v) if isinstance(v, list) else v for k, v in d.items()}
        return cls(**kw)

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}

    @property
    def last_name_pool(self) -> int:
        return self.n_last_names or max(20, self.n_identities // 3)


@dataclass
class PlantedTruth:
    truth: GroundTruth
    identity_articles: dict[str, tuple[str, ...]] = field(default_factory=dict)
    identity_key: dict[str, NameKey] = field(default_factory=dict)
    core: frozenset[str] = frozenset()

    def homonym_keys(self) -> list[NameKey]:
        return [k for k in self.truth if len(self.truth[k]) >= 2]


def initials_pool(size: int) -> list[str]:
    letters = string.ascii_uppercase
    out: list[str] = []
    for n in itertools.count(1):
        for combo in itertools.product(letters, repeat=n):
            out.append("".join(combo))
            if len(out) == size:
                return out


def _last_name(i: int) -> str:
    return f"N{i:05d}"


class _Builder:
    def __init__(self, spec: SynthSpec, seed: int):
        self.spec = spec
        self.rng = random.Random(seed)
        self.pool = initials_pool(spec.initials_pool_size)
        n = spec.last_name_pool
        self.names = [_last_name(i) for i in range(n)]
        if spec.last_name_distribution == "heavy_tailed":
            w = [(i + 1) ** -spec.exponent for i in range(n)]
        else:
            w = [1.0] * n
        self.cum = list(itertools.accumulate(w))
        self.used_initials: dict[str, set[str]] = {}
        self.key_of: dict[int, NameKey] = {}
        self.by_key: dict[NameKey, list[int]] = {}
        self.coauthor_lasts: dict[int, set[str]] = {}
        self.n_transient = 0

    # identities -------------------------------------------------------------

    def _fresh_key(self) -> NameKey:
        pool = self.pool
        for _ in range(200):
            last = self.rng.choices(self.names, cum_weights=self.cum)[0]
            used = self.used_initials.setdefault(last, set())
            if len(used) >= len(pool):
                continue
            for _ in range(20):
                ini = self.rng.choice(pool)
                if ini not in used:
                    break
            else:
                ini = next(x for x in pool if x not in used)
            used.add(ini)
            return NameKey(last, ini)
        raise SynthError("name space exhausted: raise n_last_names or initials_pool_size")

    def new_identity(self, unique_last: bool = False) -> int:
        ident = len(self.key_of)
        if unique_last:
            key = NameKey(f"T{self.n_transient:06d}", self.pool[0])
            self.n_transient += 1
        else:
            key = None
            if self.spec.homonym_rate > 0 and self.rng.random() < self.spec.homonym_rate:
                # a homonym takes an initials variant already used with its
                # last name, so common last names collect most homonyms
                last = self.rng.choices(self.names, cum_weights=self.cum)[0]
                used = self.used_initials.get(last)
                if used:
                    key = NameKey(last, self.rng.choice(sorted(used)))
            if key is None:
                key = self._fresh_key()
        self.key_of[ident] = key
        self.by_key.setdefault(key, []).append(ident)
        self.coauthor_lasts[ident] = set()
        return ident

    # constraint bookkeeping ---------------------------------------------------

    def paper_ok(self, authors: Sequence[int]) -> bool:
        keys = [self.key_of[a] for a in authors]
        if len(set(keys)) != len(keys):
            return False
        if not self.spec.disjoint_teams:
            return True
        lasts = {k.last for k in keys}
        for a, k in zip(authors, keys):
            new = lasts - {k.last}
            for b in self.by_key[k]:
                if b != a and new & self.coauthor_lasts[b]:
                    return False
        return True

    def record_paper(self, authors: Sequence[int]) -> None:
        lasts = {self.key_of[a].last for a in authors}
        for a in authors:
            self.coauthor_lasts[a] |= lasts - {self.key_of[a].last}

    def citation_ok(self, src: Sequence[int], dst: Sequence[int]) -> bool:
        if not self.spec.disjoint_teams:
            return True
        dst_by_key = {self.key_of[b]: b for b in dst}
        for a in src:
            b = dst_by_key.get(self.key_of[a])
            if b is not None and b != a:
                return False
        return True


def _teams(b: _Builder, core: list[int]) -> list[list[int]]:
    """Group core identities into teams with distinct last names.

    In disjoint mode two teams hosting identities of the same name key may
    only share that key's last name.
    """
    spec, rng = b.spec, b.rng
    order = list(core)
    rng.shuffle(order)
    teams: list[list[int]] = []
    lastset: list[set[str]] = []
    target: list[int] = []
    team_of: dict[int, int] = {}
    links: list[dict[int, set[str]]] = []
    open_teams: list[int] = []

    def fits(x: int, t: int) -> bool:
        k = b.key_of[x]
        if k.last in lastset[t]:
            return False
        if not spec.disjoint_teams:
            return True
        for u, allowed in links[t].items():
            if k.last in lastset[u] and k.last not in allowed:
                return False
        for y in b.by_key[k]:
            u = team_of.get(y)
            if u is None or y == x:
                continue
            if u == t:
                return False
            allowed = links[t].get(u, {k.last}) & {k.last}
            if ((lastset[t] | {k.last}) & lastset[u]) - allowed:
                return False
        return True

    def place(x: int, t: int) -> None:
        k = b.key_of[x]
        teams[t].append(x)
        lastset[t].add(k.last)
        team_of[x] = t
        if spec.disjoint_teams:
            for y in b.by_key[k]:
                u = team_of.get(y)
                if u is not None and u != t:
                    links[t][u] = links[t].get(u, {k.last}) & {k.last}
                    links[u][t] = links[t][u]

    def open_team(x: int) -> None:
        teams.append([])
        lastset.append(set())
        links.append({})
        target.append(rng.randint(*spec.team_size))
        place(x, len(teams) - 1)
        open_teams.append(len(teams) - 1)

    for x in order:
        placed = False
        if open_teams:
            cands = open_teams[-8:]
            for t in sorted(cands, key=lambda _: rng.random()):
                if fits(x, t):
                    place(x, t)
                    placed = True
                    if len(teams[t]) >= target[t]:
                        open_teams.remove(t)
                    break
        if not placed:
            open_team(x)

    # fold undersized teams into others
    for t in range(len(teams)):
        if len(teams[t]) >= 2 or not teams[t]:
            continue
        x = teams[t][0]
        for u in sorted(range(len(teams)), key=lambda _: rng.random()):
            if u != t and len(teams[u]) >= 1 and fits(x, u):
                teams[t].clear()
                lastset[t].clear()
                for v, allowed in links[t].items():
                    links[v].pop(t, None)
                links[t].clear()
                del team_of[x]
                place(x, u)
                break
        else:
            raise SynthError("cannot form teams of size >= 2 under the spec's constraints")
    return [sorted(tm) for tm in teams if tm]


def _generate_once(spec: SynthSpec, seed: int) -> tuple[Corpus, PlantedTruth]:
    b = _Builder(spec, seed)
    rng = b.rng
    core = [b.new_identity() for _ in range(spec.n_identities)]
    teams = _teams(b, core)

    # papers as (year, creation index, author identity list)
    drafts: list[list] = []
    team_of = {x: t for t, tm in enumerate(teams) for x in tm}
    appearances = {x: 0 for x in core}

    def transient() -> int:
        return b.new_identity(unique_last=spec.disjoint_teams)

    for t, members in enumerate(teams):
        lead = members[0]
        others = members[1:]
        n_papers = rng.randint(*spec.papers_per_identity)
        years = sorted(rng.randint(*spec.years) for _ in range(n_papers))
        previous: list[int] = []
        for i, year in enumerate(years):
            n_co = rng.randint(*spec.authors_per_paper) - 1
            team_paper = i == 0 or (previous and rng.random() < spec.coauthor_stability)
            if team_paper:
                n_co = max(1, min(n_co, len(others)))
                chosen: list[int] = []
                if previous:
                    chosen.append(rng.choice(previous))
                ranked = sorted(
                    (x for x in others if x not in chosen),
                    key=lambda x: (appearances[x], rng.random()),
                )
                chosen += ranked[: n_co - len(chosen)]
                authors = [lead] + chosen
                if not b.paper_ok(authors):
                    raise SynthError("internal: team paper violates disjointness")
                for x in chosen:
                    if x not in previous:
                        previous.append(x)
            else:
                for _ in range(50):
                    authors = [lead] + [transient() for _ in range(n_co)]
                    if b.paper_ok(authors):
                        break
                else:
                    raise SynthError("cannot draw fresh co-authors with distinct name keys")
            for x in authors:
                if x in appearances:
                    appearances[x] += 1
            b.record_paper(authors)
            drafts.append([year, len(drafts), authors, team_paper, t])

    # inter-team collaboration: add another team's lead plus one active member
    if spec.collaboration_rate > 0 and len(teams) > 1:
        for d in drafts:
            if not d[3] or rng.random() >= spec.collaboration_rate:
                continue
            for _ in range(10):
                u = rng.randrange(len(teams))
                if u == d[4]:
                    continue
                active = [x for x in teams[u][1:] if appearances[x] > 0]
                if not active:
                    continue
                pair = [teams[u][0], rng.choice(active)]
                authors = d[2] + pair
                if b.paper_ok(authors):
                    b.record_paper(authors)
                    d[2] = authors
                    for x in pair:
                        appearances[x] += 1
                    break

    drafts.sort(key=lambda d: (d[0], d[1]))
    width = max(6, len(str(len(drafts))))
    ids = [f"P{i:0{width}d}" for i in range(len(drafts))]
    papers_of: dict[int, list[int]] = {}
    for i, d in enumerate(drafts):
        for x in d[2]:
            papers_of.setdefault(x, []).append(i)

    cites: list[set[int]] = [set() for _ in drafts]
    for i, d in enumerate(drafts):
        for x in d[2]:
            earlier = [j for j in papers_of[x] if j < i]
            if earlier and rng.random() < spec.self_citation_rate:
                j = rng.choice(earlier)
                if b.citation_ok(d[2], drafts[j][2]):
                    cites[i].add(j)
        if spec.cross_citation_noise and rng.random() < spec.cross_citation_noise:
            cands = [x for x in d[2] if len(b.by_key[b.key_of[x]]) > 1]
            if cands:
                x = rng.choice(cands)
                others = [y for y in b.by_key[b.key_of[x]] if y != x and y in papers_of]
                pool = [j for y in others for j in papers_of[y] if j < i]
                if pool:
                    cites[i].add(rng.choice(sorted(pool)))

    records = [
        PublicationRecord(
            ids[i],
            d[0],
            tuple(b.key_of[x] for x in d[2]),
            frozenset(ids[j] for j in cites[i]),
        )
        for i, d in enumerate(drafts)
    ]
    corpus = Corpus.from_records(records)

    ident_name = {x: f"I{x:07d}" for x in papers_of}
    groups: dict[NameKey, list[tuple[str, ...]]] = {}
    identity_articles: dict[str, tuple[str, ...]] = {}
    identity_key: dict[str, NameKey] = {}
    for x in sorted(papers_of):
        arts = tuple(sorted(ids[i] for i in papers_of[x]))
        identity_articles[ident_name[x]] = arts
        identity_key[ident_name[x]] = b.key_of[x]
        groups.setdefault(b.key_of[x], []).append(arts)
    truth = GroundTruth({k: IdentityPartition.from_groups(k, g) for k, g in sorted(groups.items())})
    core_names = frozenset(ident_name[x] for x in core if x in ident_name)
    return corpus, PlantedTruth(truth, identity_articles, identity_key, core_names)


def generate(spec: SynthSpec, max_retries: int = 20) -> tuple[Corpus, PlantedTruth]:
    """Generate a corpus and its planted truth, deterministic under ``spec.seed``.

    When ``homonym_rate > 0`` the draw is repeated with derived seeds until
    at least one name key hosts two identities.
    """
    failures: Counter = Counter()
    for attempt in range(max_retries):
        seed = spec.seed if attempt == 0 else spec.seed * 7919 + attempt
        try:
            corpus, planted = _generate_once(spec, seed)
        except SynthError as exc:
            if "exhausted" in str(exc) or "exceeds" in str(exc):
                raise
            failures[str(exc)] += 1
            continue
        if spec.homonym_rate == 0 or planted.homonym_keys():
            return corpus, planted
        failures["no homonym planted"] += 1
    detail = "; ".join(f"{msg} ({n}x)" for msg, n in failures.most_common())
    raise SynthError(f"gave up after {max_retries} attempts: {detail}")


def emit(corpus: Corpus, planted: PlantedTruth, corpus_path, truth_path) -> None:
    corpus_path, truth_path = Path(corpus_path), Path(truth_path)
    with open(corpus_path, "w", encoding="utf-8", newline="\n") as fh:
        write_corpus(corpus, fh)
    with open(truth_path, "w", encoding="utf-8", newline="\n") as fh:
        planted.truth.write(fh)


# --- constructed training sets for cutoff learning ---------------------------


def cutoff_training_corpus(kind: str, max_redundancy: int = 6, seed: int = 0) -> tuple[Corpus, GroundTruth]:
    """Small corpora whose best low-redundancy cutoff is known by construction.

    ``threshold``: last names with raw redundancy <= 3 belong to single
    individuals whose papers share no co-author (merging is right); names
    above 3 each host two individuals with stable, disjoint teams (overlap
    evidence is right). Names of redundancy 3 and 4 carry more than a quarter
    of the article weight each, so the 3/4 boundary moves both the weighted
    median and the 25% quantile.

    ``all_unique``: every last name has redundancy ``max_redundancy`` and
    every key is one individual with unlinked papers. Every cutoff at or
    above ``max_redundancy`` scores K = 1, so set it to the top of the swept
    range to make that top value the unique winner.

    ``all_split``: every key is two individuals with disjoint stable teams and
    a last name of redundancy 1.
    """
    rng = random.Random(seed)
    records: list[PublicationRecord] = []
    truth: dict[NameKey, IdentityPartition] = {}
    counter = itertools.count()
    pool = initials_pool(max(max_redundancy, 2))

    def pid() -> str:
        return f"Q{next(counter):05d}"

    def unique_coauthor() -> NameKey:
        return NameKey(f"C{next(counter):05d}", "A")

    def fragmented(key: NameKey, n: int) -> IdentityPartition:
        arts = []
        for _ in range(n):
            p = pid()
            records.append(PublicationRecord(p, 2000, (key, unique_coauthor()), frozenset()))
            arts.append(p)
        return IdentityPartition.from_groups(key, [arts])

    def two_teams(key: NameKey, n: int) -> IdentityPartition:
        groups = []
        for _ in range(2):
            mate = unique_coauthor()
            arts = []
            for _ in range(n):
                p = pid()
                records.append(PublicationRecord(p, 2000, (key, mate), frozenset()))
                arts.append(p)
            groups.append(arts)
        return IdentityPartition.from_groups(key, groups)

    if kind == "threshold":
        if max_redundancy < 4:
            raise SynthError("threshold construction needs max_redundancy >= 4")
        for r in range(1, max_redundancy + 1):
            last = f"L{r:02d}"
            n = 12 if r in (3, 4) else 4
            for ini in pool[:r]:
                key = NameKey(last, ini)
                truth[key] = fragmented(key, n) if r <= 3 else two_teams(key, n // 2)
    elif kind == "all_unique":
        for li in range(3):
            for ini in pool[:max_redundancy]:
                key = NameKey(f"U{li:02d}", ini)
                truth[key] = fragmented(key, rng.randint(3, 6))
    elif kind == "all_split":
        for li in range(6):
            key = NameKey(f"S{li:02d}", "A")
            truth[key] = two_teams(key, rng.randint(2, 4))
    else:
        raise SynthError(f"unknown construction {kind!r}")
    return Corpus.from_records(records), GroundTruth(truth)
