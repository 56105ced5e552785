"""Last-name commonality statistics.

Raw redundancy of a last name is the number of distinct initials variants it
appears with. Name redundancy is the empirical CDF of raw redundancy evaluated
at that name, so rare names score near 0 and the most common names score 1.
"""

from __future__ import annotations

import bisect
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Iterable

from .corpus import Corpus, NameKey, PublicationRecord, articles_of

__all__ = [
    "RedundancyError",
    "RedundancyTable",
    "build_redundancy_table",
    "article_redundancy",
    "average_article_redundancy",
    "histogram",
    "DEFAULT_DIVISION_POINT",
]

DEFAULT_DIVISION_POINT = 0.85


class RedundancyError(ValueError):
    pass


@dataclass(frozen=True)
class RedundancyTable:
    raw: dict[str, int]
    cdf: dict[int, float]
    s: dict[str, float]

    def raw_of(self, last: str) -> int:
        try:
            return self.raw[last]
        except KeyError:
            raise RedundancyError(f"last name {last!r} not in redundancy table") from None

    def s_of(self, last: str) -> float:
        try:
            return self.s[last]
        except KeyError:
            raise RedundancyError(f"last name {last!r} not in redundancy table") from None

    @property
    def max_raw(self) -> int:
        return max(self.raw.values())

    def cdf_at(self, r: float) -> float:
        """Pr[X <= r] for an arbitrary r, including unobserved values."""
        support = sorted(self.cdf)
        i = bisect.bisect_right(support, r)
        return 0.0 if i == 0 else self.cdf[support[i - 1]]


def build_redundancy_table(
    corpus: Corpus | Iterable[NameKey], weighting: str = "names"
) -> RedundancyTable:
    """Compute raw redundancy, its CDF and name redundancy per last name.

    ``weighting="names"`` counts every distinct last name once in the
    distribution of X. ``"occurrences"`` weights each last name by its number
    of authorship instances instead (sensitivity variant; needs a Corpus).
    """
    if isinstance(corpus, Corpus):
        keys = list(corpus.name_index)
    else:
        keys = list(corpus)
    if not keys:
        raise RedundancyError("cannot build a redundancy table from an empty corpus")

    variants: dict[str, set[str]] = defaultdict(set)
    for k in keys:
        variants[k.last].add(k.initials)
    raw = {last: len(v) for last, v in sorted(variants.items())}

    if weighting == "names":
        weights: Counter = Counter(raw.values())
    elif weighting == "occurrences":
        if not isinstance(corpus, Corpus):
            raise RedundancyError("occurrence weighting needs a corpus")
        occ: Counter = Counter()
        for k, ids in corpus.name_index.items():
            occ[k.last] += len(ids)
        weights = Counter()
        for last, r in raw.items():
            weights[r] += occ[last]
    else:
        raise RedundancyError(f"unknown weighting {weighting!r}")

    total = sum(weights.values())
    cdf: dict[int, float] = {}
    running = 0
    for r in sorted(weights):
        running += weights[r]
        cdf[r] = running / total
    # guard against rounding in the last step
    cdf[max(cdf)] = 1.0
    s = {last: cdf[r] for last, r in raw.items()}
    return RedundancyTable(raw=raw, cdf=cdf, s=s)


def article_redundancy(
    table: RedundancyTable, record: PublicationRecord, distinct: bool = True
) -> float:
    """Product of name redundancies over the record's authors' last names.

    With ``distinct`` (default) a last name shared by several co-authors is
    counted once.
    """
    lasts = [a.last for a in record.authors]
    if distinct:
        lasts = list(dict.fromkeys(lasts))
    value = 1.0
    for last in lasts:
        value *= table.s_of(last)
    return value


def average_article_redundancy(
    table: RedundancyTable,
    corpus: Corpus,
    key: NameKey,
    distinct: bool = True,
    cache: dict[str, float] | None = None,
) -> float:
    ids = articles_of(corpus, key)
    if not ids:
        raise RedundancyError(f"name {key} does not appear in the corpus")
    total = 0.0
    for pid in sorted(ids):
        if cache is not None and pid in cache:
            v = cache[pid]
        else:
            v = article_redundancy(table, corpus.records[pid], distinct)
            if cache is not None:
                cache[pid] = v
        total += v
    return total / len(ids)


def histogram(values: Iterable[float], bins: int = 20, lo: float = 0.0, hi: float = 1.0):
    """Fixed-width histogram over [lo, hi]; the last bin is closed on the right.

    Returns a list of ``(bin_lo, bin_hi, count)``.
    """
    counts = [0] * bins
    width = (hi - lo) / bins
    for v in values:
        i = int((v - lo) / width)
        if i == bins and v <= hi:
            i = bins - 1
        if 0 <= i < bins:
            counts[i] += 1
    return [(lo + i * width, lo + (i + 1) * width, c) for i, c in enumerate(counts)]
