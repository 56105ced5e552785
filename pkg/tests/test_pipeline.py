import json
import os
from pathlib import Path

import pytest

from homonymy.pipeline import PipelineConfig, PipelineError, run_pipeline
from homonymy.synthgen import SynthSpec, emit, generate


def _make(tmp_path, **kw):
    spec = SynthSpec(n_identities=kw.pop("n", 600), seed=kw.pop("seed", 3), **kw)
    c, planted = generate(spec)
    emit(c, planted, tmp_path / "corpus.jsonl", tmp_path / "truth.jsonl")
    return tmp_path / "corpus.jsonl", tmp_path / "truth.jsonl"


def _bundle(out: Path) -> dict[str, bytes]:
    files = {}
    for root, dirs, names in os.walk(out):
        dirs[:] = [d for d in dirs if d != ".cache"]
        for n in names:
            p = Path(root) / n
            rel = str(p.relative_to(out))
            if rel != "metadata.json":
                files[rel] = p.read_bytes()
    return files


def test_no_homonyms_before_equals_after(tmp_path):
    corpus, truth = _make(tmp_path, homonym_rate=0.0, coauthor_stability=1.0)
    summary = run_pipeline(PipelineConfig(str(corpus), str(tmp_path / "out"), truth=str(truth)))
    out = tmp_path / "out"
    for rel in ("network/edges.csv", "network/nodes.csv", "roles/nodes.csv", "distortion/cdf.csv"):
        assert (out / "before" / rel).read_bytes() == (out / "after" / rel).read_bytes()
    assert summary["before"]["evaluation"]["weighted_median_k"] == 1.0
    assert summary["after"]["evaluation"]["weighted_min_k"] == 1.0


def test_planted_homonyms_shrink_giant_component(tmp_path):
    corpus, truth = _make(tmp_path, homonym_rate=0.15, coauthor_stability=1.0,
                          self_citation_rate=0.0, disjoint_teams=True)
    summary = run_pipeline(PipelineConfig(str(corpus), str(tmp_path / "out"), truth=str(truth)))
    before = summary["before"]["network"]["giant_component_fraction"]
    after = summary["after"]["network"]["giant_component_fraction"]
    assert after <= before


def test_bundle_layout_and_provenance(tmp_path):
    corpus, truth = _make(tmp_path, n=300)
    out = tmp_path / "out"
    run_pipeline(PipelineConfig(str(corpus), str(out), truth=str(truth), seed=4))
    for rel in ("config.json", "summary.json", "metadata.json", "identities.jsonl",
                "redundancy/last_names.csv", "before/roles/distribution.csv",
                "after/evaluation/quantiles.csv", "after/distortion/summary.json"):
        assert (out / rel).exists(), rel
    cfg = json.loads((out / "config.json").read_text())
    assert cfg["seed"] == 4 and cfg["corpus"] == "corpus.jsonl"
    assert PipelineConfig.from_dict({**cfg, "out_dir": "x"}).seed == 4
    assert not [p for p in out.iterdir() if p.name.startswith(".staging")]


def test_rerun_is_identical_and_uses_cache(tmp_path):
    corpus, truth = _make(tmp_path, n=300)
    out = tmp_path / "out"
    cfg = PipelineConfig(str(corpus), str(out), truth=str(truth))
    run_pipeline(cfg)
    first = _bundle(out)
    assert list((out / ".cache").iterdir())
    run_pipeline(cfg)
    assert _bundle(out) == first
    fresh = tmp_path / "fresh"
    run_pipeline(PipelineConfig(str(corpus), str(fresh), truth=str(truth), use_cache=False))
    assert _bundle(fresh) == first


def test_failed_stage_names_itself_and_leaves_nothing(tmp_path):
    corpus, _ = _make(tmp_path, n=300)
    bad_truth = tmp_path / "bad.jsonl"
    bad_truth.write_text('{"last": "NOPE", "initials": "X", "identities": [["P000001"]]}\n')
    out = tmp_path / "out"
    with pytest.raises(PipelineError) as exc:
        run_pipeline(PipelineConfig(str(corpus), str(out), truth=str(bad_truth)))
    assert exc.value.stage == "ingest"
    assert list(out.iterdir()) == []
