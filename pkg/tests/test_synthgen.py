import statistics

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homonymy.corpus import read_corpus
from homonymy.disambig import DisambigConfig, resolve_corpus
from homonymy.evaluation import GroundTruth, compare, k_score
from homonymy.redundancy import build_redundancy_table
from homonymy.synthgen import SynthError, SynthSpec, emit, generate


def test_emit_is_byte_identical(tmp_path):
    spec = SynthSpec(n_identities=400, homonym_rate=0.1, cross_citation_noise=0.05, seed=9)
    paths = []
    for run in ("a", "b"):
        c, planted = generate(spec)
        emit(c, planted, tmp_path / f"{run}.jsonl", tmp_path / f"{run}_truth.jsonl")
        paths.append((tmp_path / f"{run}.jsonl", tmp_path / f"{run}_truth.jsonl"))
    assert paths[0][0].read_bytes() == paths[1][0].read_bytes()
    assert paths[0][1].read_bytes() == paths[1][1].read_bytes()
    other, _ = generate(SynthSpec(n_identities=400, homonym_rate=0.1, seed=10))
    assert other != read_corpus(paths[0][0])


@pytest.mark.parametrize(
    "kw",
    [
        dict(homonym_rate=0.0),
        dict(coauthor_stability=1.0, self_citation_rate=0.0, disjoint_teams=True, homonym_rate=0.1),
        dict(coauthor_stability=0.0, self_citation_rate=0.0, homonym_rate=0.1),
    ],
)
def test_round_trip_and_truth_validity(tmp_path, kw):
    c, planted = generate(SynthSpec(n_identities=300, seed=4, **kw))
    emit(c, planted, tmp_path / "c.jsonl", tmp_path / "t.jsonl")
    assert read_corpus(tmp_path / "c.jsonl") == c
    with open(tmp_path / "t.jsonl") as fh:
        truth = GroundTruth.read(fh)
    assert truth.partitions == planted.truth.partitions
    truth.validate(c)
    assert set(truth.partitions) == set(c.name_index)


def test_no_homonyms_when_rate_zero():
    c, planted = generate(SynthSpec(n_identities=500, homonym_rate=0.0, seed=2))
    assert planted.homonym_keys() == []
    assert all(len(p) == 1 for p in planted.truth.partitions.values())


def test_homonym_guaranteed():
    _, planted = generate(SynthSpec(n_identities=50, homonym_rate=0.01, seed=0))
    assert planted.homonym_keys()


def test_fresh_teams_only_over_split():
    c, planted = generate(SynthSpec(n_identities=400, coauthor_stability=0.0, self_citation_rate=0.0,
                                    homonym_rate=0.1, disjoint_teams=True, seed=1))
    parts = resolve_corpus(c, build_redundancy_table(c), DisambigConfig(low_redundancy_cutoff=0))
    imperfect = 0
    for k in planted.truth:
        ks = k_score(compare(planted.truth[k], parts[k]))
        assert ks.acp == 1.0
        if ks.k < 1:
            imperfect += 1
            assert ks.aap < 1
    assert imperfect > 0


def test_heavy_tail_ratio():
    c, _ = generate(SynthSpec(n_identities=10_000, last_name_distribution="heavy_tailed",
                              homonym_rate=0.05, seed=0))
    raw = build_redundancy_table(c).raw
    assert max(raw.values()) >= 10 * statistics.median(raw.values())


@pytest.mark.parametrize(
    "kw",
    [
        dict(homonym_rate=1.5),
        dict(coauthor_stability=-0.1),
        dict(papers_per_identity=(5, 2)),
        dict(team_size=(4, 8), n_identities=3),
        dict(last_name_distribution="zipf"),
        dict(n_identities=0),
    ],
)
def test_invalid_specs(kw):
    with pytest.raises(SynthError):
        SynthSpec(**kw)


def test_name_space_exhaustion():
    with pytest.raises(SynthError, match="exhausted"):
        generate(SynthSpec(n_identities=100, n_last_names=2, initials_pool_size=3, homonym_rate=0.0))


def test_unplantable_homonym_gives_up():
    with pytest.raises(SynthError, match="no homonym"):
        generate(SynthSpec(n_identities=20, homonym_rate=1e-9))


def test_spec_dict_round_trip():
    spec = SynthSpec(n_identities=77, team_size=(2, 3), last_name_distribution="heavy_tailed", seed=5)
    assert SynthSpec.from_dict(spec.to_dict()) == spec
    with pytest.raises(SynthError):
        SynthSpec.from_dict({"bogus": 1})


@settings(max_examples=15)
@given(
    st.integers(20, 120),
    st.floats(0, 1),
    st.floats(0, 1),
    st.one_of(st.just(0.0), st.floats(0.05, 0.3)),
    st.booleans(),
    st.integers(0, 10_000),
)
def test_generated_truth_is_consistent(n, stability, cite, hom, disjoint, seed):
    spec = SynthSpec(n_identities=n, coauthor_stability=stability, self_citation_rate=cite,
                     homonym_rate=hom, disjoint_teams=disjoint, seed=seed)
    c, planted = generate(spec)
    planted.truth.validate(c)
    for name, arts in planted.identity_articles.items():
        k = planted.identity_key[name]
        assert arts in planted.truth[k].identities
        assert all(k in c.records[a].authors for a in arts)
    assert sum(len(p) for p in planted.truth.partitions.values()) == len(planted.identity_articles)
