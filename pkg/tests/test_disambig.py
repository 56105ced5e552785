import io

import pytest
from hypothesis import given
from hypothesis import strategies as st

from homonymy.corpus import Corpus, CorpusError, NameKey, PublicationRecord
from homonymy.disambig import (
    BOTH,
    COAUTHOR_OVERLAP,
    SELF_CITATION,
    DisambigConfig,
    IdentityPartition,
    UnionFind,
    build_article_graph,
    identity_label,
    parse_label,
    read_partitions,
    resolve_corpus,
    resolve_name,
    trivial_partitions,
    write_partitions,
)
from homonymy.redundancy import build_redundancy_table
from homonymy.synthgen import SynthSpec, generate

from conftest import corpus, key, rec

X_A = key("X,A")


def _pad_redundancy(*records, n=10):
    """Add filler records so last name X has raw redundancy n."""
    filler = [rec(f"f{i}", f"X,F{i}") for i in range(n - 1)]
    return corpus(*records, *filler)


def test_overlap_edge_on_shared_last_name():
    c = corpus(rec("p1", "X,A Y,B"), rec("p2", "X,A Y,C"))
    g = build_article_graph(c, X_A)
    assert g.edges == {("p1", "p2"): COAUTHOR_OVERLAP}


def test_self_citation_edge():
    c = corpus(rec("p1", "X,A Y,B", cites="p2"), rec("p2", "X,A Z,C"))
    assert build_article_graph(c, X_A).edges == {("p1", "p2"): SELF_CITATION}


def test_both_evidence_label():
    c = corpus(rec("p1", "X,A Y,B", cites="p2"), rec("p2", "X,A Y,C"))
    assert build_article_graph(c, X_A).edges == {("p1", "p2"): BOTH}


def test_focal_last_name_excluded():
    c = corpus(rec("p1", "X,A X,B"), rec("p2", "X,A X,C"))
    assert build_article_graph(c, X_A).edges == {}


def test_disabled_evidence_types():
    c = corpus(rec("p1", "X,A Y,B", cites="p2"), rec("p2", "X,A Y,C"))
    only_cite = DisambigConfig(use_coauthor_overlap=False)
    only_overlap = DisambigConfig(use_self_citation=False)
    assert build_article_graph(c, X_A, only_cite).edges == {("p1", "p2"): SELF_CITATION}
    assert build_article_graph(c, X_A, only_overlap).edges == {("p1", "p2"): COAUTHOR_OVERLAP}


def test_strict_key_match():
    c = corpus(rec("p1", "X,A Y,B"), rec("p2", "X,A Y,C"))
    g = build_article_graph(c, X_A, DisambigConfig(strict_key_match=True))
    assert g.edges == {}


def test_unseen_key():
    c = corpus(rec("p1", "X,A"))
    with pytest.raises(CorpusError):
        build_article_graph(c, key("Q,Q"))
    with pytest.raises(CorpusError):
        resolve_name(c, build_redundancy_table(c), key("Q,Q"))


def test_cutoff_short_circuit():
    c = corpus(*(rec(f"p{i}", f"X,A Q{i},B") for i in range(5)))
    t = build_redundancy_table(c)
    assert t.raw_of("X") == 1
    part = resolve_name(c, t, X_A, DisambigConfig(low_redundancy_cutoff=3))
    assert part.identities == (("p0", "p1", "p2", "p3", "p4"),)


def test_components_above_cutoff():
    c = _pad_redundancy(rec("p1", "X,A Y,B"), rec("p2", "X,A Y,C"), rec("p3", "X,A Z,D"))
    t = build_redundancy_table(c)
    assert t.raw_of("X") == 10
    part = resolve_name(c, t, X_A, DisambigConfig(low_redundancy_cutoff=3))
    assert part.identities == (("p1", "p2"), ("p3",))


def test_transitive_closure():
    c = corpus(rec("p1", "X,A Y,B"), rec("p2", "X,A Y,C", cites="p3"), rec("p3", "X,A Z,D"))
    t = build_redundancy_table(c)
    part = resolve_name(c, t, X_A, DisambigConfig(low_redundancy_cutoff=0))
    assert part.identities == (("p1", "p2", "p3"),)


def test_single_article_key():
    c = corpus(rec("p1", "X,A Y,B"))
    part = resolve_name(c, build_redundancy_table(c), X_A, DisambigConfig(low_redundancy_cutoff=0))
    assert part.identities == (("p1",),)


def test_one_record_two_authors():
    c = corpus(rec("p1", "X,A Y,B"))
    parts = resolve_corpus(c, build_redundancy_table(c))
    assert len(parts) == 2
    assert all(p.identities == (("p1",),) for p in parts.values())


def test_labels_and_order():
    p = IdentityPartition.from_groups(key("LEE,H"), [["p9"], ["p3", "p1"], ["p2", "p5"]])
    assert p.identities == (("p1", "p3"), ("p2", "p5"), ("p9",))
    assert p.labels() == ["LEE_H#1", "LEE_H#2", "LEE_H#3"]
    assert parse_label("LEE_H#2") == key("LEE,H")
    assert parse_label(identity_label(NameKey("DE_LA", ""), 1)) == NameKey("DE_LA", "")
    with pytest.raises(ValueError):
        IdentityPartition.from_groups(key("LEE,H"), [["p1"], ["p1", "p2"]])


def test_partition_file_round_trip():
    c = corpus(rec("p1", "X,A Y,B"), rec("p2", "X,A Z,C"), rec("p3", "Y,B"))
    parts = resolve_corpus(c, build_redundancy_table(c), DisambigConfig(low_redundancy_cutoff=0))
    buf = io.StringIO()
    write_partitions(parts, buf)
    assert read_partitions(io.StringIO(buf.getvalue())) == parts


# --- planted identities from the generator ------------------------------------


def _planted(**kw):
    spec = SynthSpec(n_identities=300, coauthor_stability=1.0, self_citation_rate=0.0,
                     homonym_rate=0.1, disjoint_teams=True, seed=11, **kw)
    return generate(spec)


def test_planted_homonyms_recovered():
    c, planted = _planted()
    t = build_redundancy_table(c)
    cfg = DisambigConfig(low_redundancy_cutoff=0)
    homs = planted.homonym_keys()
    assert homs
    for k in homs:
        assert resolve_name(c, t, k, cfg) == planted.truth[k]


def test_cross_identity_citation_merges():
    c, planted = _planted()
    t = build_redundancy_table(c)
    cfg = DisambigConfig(low_redundancy_cutoff=0)
    k = planted.homonym_keys()[0]
    truth = planted.truth[k]
    a, b = truth.identities[0][0], truth.identities[1][0]
    rec_a = c.records[a]
    patched = Corpus.from_records(
        [r for r in c if r.id != a]
        + [PublicationRecord(a, rec_a.year, rec_a.authors, rec_a.cites | {b})]
    )
    before = len(resolve_name(c, t, k, cfg))
    after = len(resolve_name(patched, t, k, cfg))
    assert after == before - 1
    if len(truth) == 2:
        assert after == 1


def test_thread_count_does_not_change_output():
    c, _ = generate(SynthSpec(n_identities=2500, homonym_rate=0.1, seed=5))
    t = build_redundancy_table(c)
    assert len(c.name_index) >= 2000
    assert resolve_corpus(c, t, threads=1) == resolve_corpus(c, t, threads=3)


# --- properties ---------------------------------------------------------------

small_corpora = st.lists(
    st.tuples(
        st.lists(st.sampled_from(["X,A", "X,B", "Y,A", "Y,B", "Z,A", "W,C", "V,D"]),
                 min_size=1, max_size=4, unique=True),
        st.lists(st.integers(0, 11), max_size=2),
    ),
    min_size=1,
    max_size=12,
)


def _build(spec):
    return corpus(*(rec(f"p{i:02d}", " ".join(a), " ".join(f"p{c:02d}" for c in cs))
                    for i, (a, cs) in enumerate(spec)))


def _graph_components(g):
    uf = UnionFind(g.nodes)
    for a, b in g.edges:
        uf.union(a, b)
    return sorted(tuple(x) for x in uf.groups())


@given(small_corpora, st.booleans(), st.booleans(), st.booleans())
def test_fast_path_matches_explicit_graph(spec, overlap, cites, strict):
    c = _build(spec)
    t = build_redundancy_table(c)
    cfg = DisambigConfig(0, cites, overlap, strict)
    for k in c.name_index:
        got = sorted(resolve_name(c, t, k, cfg).identities)
        assert got == _graph_components(build_article_graph(c, k, cfg))


@given(small_corpora)
def test_self_citation_only_merges(spec):
    c = _build(spec)
    t = build_redundancy_table(c)
    a = resolve_corpus(c, t, DisambigConfig(0, use_self_citation=False))
    b = resolve_corpus(c, t, DisambigConfig(0, use_self_citation=True))
    for k in a:
        assert len(b[k]) <= len(a[k])
        # every merged identity is a union of the finer ones
        coarse = {x: i for i, g in enumerate(b[k].identities) for x in g}
        for g in a[k].identities:
            assert len({coarse[x] for x in g}) == 1


@given(small_corpora, st.integers(0, 4), st.integers(0, 4))
def test_cutoff_monotone(spec, c1, c2):
    lo, hi = sorted((c1, c2))
    c = _build(spec)
    t = build_redundancy_table(c)
    n_lo = sum(len(p) for p in resolve_corpus(c, t, DisambigConfig(lo)).values())
    n_hi = sum(len(p) for p in resolve_corpus(c, t, DisambigConfig(hi)).values())
    assert n_hi <= n_lo


@given(small_corpora)
def test_soundness_extremes(spec):
    c = _build(spec)
    t = build_redundancy_table(c)
    none = resolve_corpus(c, t, DisambigConfig(0, False, False))
    for k, p in none.items():
        assert all(len(g) == 1 for g in p.identities)
        assert len(p) == len(c.name_index[k])
    assert resolve_corpus(c, t, DisambigConfig(t.max_raw)) == trivial_partitions(c)


@given(small_corpora)
def test_partitions_cover_and_stay_in_block(spec):
    c = _build(spec)
    t = build_redundancy_table(c)
    parts = resolve_corpus(c, t, DisambigConfig(0))
    assert set(parts) == set(c.name_index)
    labels = set()
    for k, p in parts.items():
        assert p.articles == c.name_index[k]
        assert sum(len(g) for g in p.identities) == len(p.articles)
        assert all(parse_label(u) == k for u in p.labels())
        assert labels.isdisjoint(p.labels())
        labels |= set(p.labels())


@given(small_corpora, st.randoms(use_true_random=False))
def test_order_independent(spec, rnd):
    c = _build(spec)
    shuffled = list(c)
    rnd.shuffle(shuffled)
    c2 = Corpus.from_records(shuffled)
    t = build_redundancy_table(c)
    keys = list(c.name_index)
    rnd.shuffle(keys)
    assert resolve_corpus(c, t, DisambigConfig(0)) == resolve_corpus(c2, t, DisambigConfig(0), keys=keys)
