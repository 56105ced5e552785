"""Independent reference implementations used as test oracles."""

from __future__ import annotations

import math
import random


def k_by_pairs(truth: list[list[str]], empirical: list[list[str]]) -> tuple[float, float, float]:
    """ACP, AAP and K from article pairs, without building a contingency table.

    For each article a, purity is the share of a's empirical cluster that
    sits in a's true cluster (pairs (a, b) including b = a); ACP averages it
    over articles. AAP is the same with the roles of the partitions swapped.
    """
    t_of = {a: i for i, g in enumerate(truth) for a in g}
    e_of = {a: i for i, g in enumerate(empirical) for a in g}
    arts = sorted(t_of)
    acp = aap = 0.0
    for a in arts:
        same_e = [b for b in arts if e_of[b] == e_of[a]]
        same_t = [b for b in arts if t_of[b] == t_of[a]]
        both = sum(1 for b in arts if e_of[b] == e_of[a] and t_of[b] == t_of[a])
        acp += both / len(same_e)
        aap += both / len(same_t)
    acp /= len(arts)
    aap /= len(arts)
    return acp, aap, math.sqrt(acp * aap)


def random_partition(items: list[str], rng: random.Random) -> list[list[str]]:
    """Random set partition via a random restricted growth string."""
    blocks: list[list[str]] = []
    for x in items:
        i = rng.randint(0, len(blocks))
        if i == len(blocks):
            blocks.append([x])
        else:
            blocks[i].append(x)
    return blocks


def set_partitions(items: list):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for p in set_partitions(rest):
        for i in range(len(p)):
            yield p[:i] + [[first] + p[i]] + p[i + 1:]
        yield [[first]] + p


def step_quantile(xs: list[float], q: float) -> float:
    """Unweighted left-continuous quantile: the ceil(q n)-th order statistic."""
    s = sorted(xs)
    k = max(1, math.ceil(q * len(s) - 1e-12))
    return s[k - 1]
