"""End-to-end run: ingest, redundancy, disambiguation, networks, roles, reports.

Both the undisambiguated network (one identity per name key) and the
disambiguated one go through the same stages, and the bundle holds the two
side by side under ``before/`` and ``after/``.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import pickle
import platform
import shutil
import tempfile
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from . import __version__
from .community import (
    RoleThresholds,
    classify_roles,
    cluster_network,
    role_distribution,
    write_distribution,
    write_roles,
)
from .corpus import Corpus, read_corpus
from .disambig import DisambigConfig, resolve_corpus, trivial_partitions, write_partitions
from .evaluation import GroundTruth, distortion_analysis, evaluate, strata_from_roles
from .netbuild import build_network, giant_component, network_summary, write_edges, write_nodes
from .redundancy import DEFAULT_DIVISION_POINT, build_redundancy_table
from .reports import distortion_tables, evaluation_tables, redundancy_tables, write_json

log = logging.getLogger(__name__)

__all__ = ["PipelineConfig", "PipelineError", "run_pipeline"]

METADATA_FILE = "metadata.json"
CACHE_DIR = ".cache"


class PipelineError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class PipelineConfig:
    corpus: str
    out_dir: str
    truth: str | None = None
    disambig: DisambigConfig = field(default_factory=DisambigConfig)
    seed: int = 0
    clustering_method: str = "infomap"
    clustering_trials: int = 1
    clustering_weighted: bool = True
    role_thresholds: RoleThresholds = field(default_factory=RoleThresholds)
    weighted_degree: bool = False
    filter_to_fixpoint: bool = False
    redundancy_weighting: str = "names"
    redundancy_distinct: bool = True
    redundancy_post_filter: bool = False
    division_point: float = DEFAULT_DIVISION_POINT
    distortion_min_nodes: int = 30
    threads: int = 1
    use_cache: bool = True

    def to_dict(self) -> dict:
        d = asdict(self)
        d["disambig"] = asdict(self.disambig)
        d["role_thresholds"] = asdict(self.role_thresholds)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        d = dict(d)
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown pipeline config keys {sorted(unknown)}")
        if isinstance(d.get("disambig"), dict):
            d["disambig"] = DisambigConfig(**d["disambig"])
        if isinstance(d.get("role_thresholds"), dict):
            d["role_thresholds"] = RoleThresholds(**d["role_thresholds"])
        return cls(**d)

    def provenance(self) -> dict:
        """Config as embedded in the bundle; paths and worker count excluded
        since they do not change any result."""
        d = self.to_dict()
        for k in ("out_dir", "threads", "use_cache"):
            d.pop(k)
        d["corpus"] = os.path.basename(d["corpus"])
        if d["truth"]:
            d["truth"] = os.path.basename(d["truth"])
        return d


class _Stages:
    def __init__(self, cfg: PipelineConfig, cache_dir: Path | None, corpus_digest: str):
        self.cfg = cfg
        self.cache_dir = cache_dir
        self.digest = corpus_digest

    def cached(self, stage: str, params: dict, fn):
        if self.cache_dir is None:
            return fn()
        blob = json.dumps({"stage": stage, "params": params, "corpus": self.digest,
                           "version": __version__}, sort_keys=True)
        path = self.cache_dir / f"{stage}-{hashlib.sha256(blob.encode()).hexdigest()[:24]}.pkl"
        if path.exists():
            try:
                with open(path, "rb") as fh:
                    return pickle.load(fh)
            except Exception:  # stale or truncated entry
                path.unlink(missing_ok=True)
        value = fn()
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        with open(tmp, "wb") as fh:
            pickle.dump(value, fh, protocol=pickle.HIGHEST_PROTOCOL)
        tmp.replace(path)
        return value


def _run_stage(name: str, fn, *args, **kwargs):
    log.info("stage %s", name)
    t0 = time.perf_counter()
    try:
        out = fn(*args, **kwargs)
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError(name, exc) from exc
    log.info("stage %s done in %.2fs", name, time.perf_counter() - t0)
    return out


def _variant(tag: str, corpus: Corpus, partitions, cfg: PipelineConfig, stages: _Stages, table, out: Path,
             truth: GroundTruth | None, strata):
    net = _run_stage(f"{tag}:network", build_network, corpus, partitions, cfg.filter_to_fixpoint)
    giant = _run_stage(f"{tag}:network", giant_component, net)
    summary = network_summary(net, giant)
    write_edges_path = out / "network"
    write_edges_path.mkdir(parents=True, exist_ok=True)
    with open(write_edges_path / "edges.csv", "w", encoding="utf-8", newline="") as fh:
        write_edges(net, fh)
    with open(write_edges_path / "nodes.csv", "w", encoding="utf-8", newline="") as fh:
        write_nodes(net, fh)
    write_json(write_edges_path / "summary.json", summary)

    params = {
        "variant": tag,
        "disambig": asdict(cfg.disambig) if tag == "after" else None,
        "seed": cfg.seed,
        "method": cfg.clustering_method,
        "trials": cfg.clustering_trials,
        "weighted": cfg.clustering_weighted,
        "fixpoint": cfg.filter_to_fixpoint,
    }
    clustering = _run_stage(
        f"{tag}:cluster",
        stages.cached,
        "cluster",
        params,
        lambda: cluster_network(giant, cfg.seed, cfg.clustering_method, cfg.clustering_weighted,
                                cfg.clustering_trials),
    )
    roles = _run_stage(f"{tag}:roles", classify_roles, giant, clustering, cfg.role_thresholds, cfg.weighted_degree)
    dist = role_distribution(roles)
    (out / "roles").mkdir(parents=True, exist_ok=True)
    with open(out / "roles" / "nodes.csv", "w", encoding="utf-8", newline="") as fh:
        write_roles(roles, fh)
    with open(out / "roles" / "distribution.csv", "w", encoding="utf-8", newline="") as fh:
        write_distribution(dist, fh)
    role_summary = {
        "clusters": clustering.n_clusters,
        "clustering_method": clustering.method,
        "clustering_quality": clustering.quality,
        **dist,
    }
    write_json(out / "roles" / "summary.json", role_summary)

    distortion = _run_stage(f"{tag}:distortion", distortion_analysis, roles, table, cfg.distortion_min_nodes)
    distortion_tables(distortion, out / "distortion")

    result = {
        "network": summary,
        "roles": role_summary,
        "distortion_score": distortion.score,
    }
    if truth is not None:
        if strata is None:
            strata = strata_from_roles(roles)
        report = _run_stage(f"{tag}:evaluate", evaluate, truth, partitions, strata)
        evaluation_tables(report, out / "evaluation")
        result["evaluation"] = report.summary()
    return result, roles


def _bundle(cfg: PipelineConfig, staging: Path, cache_dir: Path | None) -> dict:
    corpus_bytes = _run_stage("ingest", Path(cfg.corpus).read_bytes)
    digest = hashlib.sha256(corpus_bytes).hexdigest()
    corpus = _run_stage("ingest", read_corpus, cfg.corpus)
    truth = None
    if cfg.truth:
        def _load_truth():
            with open(cfg.truth, encoding="utf-8") as fh:
                gt = GroundTruth.read(fh)
            gt.validate(corpus)
            return gt
        truth = _run_stage("ingest", _load_truth)
    stages = _Stages(cfg, cache_dir, digest)

    write_json(staging / "config.json", cfg.provenance())

    trivial = trivial_partitions(corpus)
    red_corpus = corpus
    if cfg.redundancy_post_filter:
        net0 = _run_stage("redundancy", build_network, corpus, trivial, cfg.filter_to_fixpoint)
        kept = set().union(*(n.paper_ids for n in net0.nodes.values())) if net0.nodes else set()
        red_corpus = corpus.subset(kept)
    table = _run_stage("redundancy", build_redundancy_table, red_corpus, cfg.redundancy_weighting)
    if cfg.redundancy_post_filter:
        # names filtered out still need a redundancy value downstream
        full = build_redundancy_table(corpus, cfg.redundancy_weighting)
        table = type(table)(raw={**full.raw, **table.raw}, cdf=table.cdf,
                            s={**{k: table.cdf_at(v) for k, v in full.raw.items()}, **table.s})
    red_summary = _run_stage("redundancy", redundancy_tables, corpus, table, staging / "redundancy",
                             cfg.redundancy_distinct, cfg.division_point)

    resolved = _run_stage(
        "disambiguate",
        stages.cached,
        "disambiguate",
        {"disambig": asdict(cfg.disambig), "weighting": cfg.redundancy_weighting,
         "post_filter": cfg.redundancy_post_filter},
        lambda: resolve_corpus(corpus, table, cfg.disambig, threads=cfg.threads),
    )
    with open(staging / "identities.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        write_partitions(resolved, fh)

    before, before_roles = _variant("before", corpus, trivial, cfg, stages, table, staging / "before", truth, None)
    strata = strata_from_roles(before_roles) if truth is not None else None
    after, _ = _variant("after", corpus, resolved, cfg, stages, table, staging / "after", truth, strata)

    n_before = sum(len(p) for p in trivial.values())
    n_after = sum(len(p) for p in resolved.values())
    summary = {
        "corpus": {"publications": len(corpus), "name_keys": len(corpus.name_index)},
        "redundancy": red_summary,
        "identities": {"before": n_before, "after": n_after},
        "before": before,
        "after": after,
        "distortion_change": (
            None if before["distortion_score"] is None or after["distortion_score"] is None
            else after["distortion_score"] - before["distortion_score"]
        ),
    }
    write_json(staging / "summary.json", summary)
    return summary


def run_pipeline(cfg: PipelineConfig) -> dict:
    """Run every stage and write the report bundle into ``cfg.out_dir``.

    Outputs are assembled in a staging directory and moved into place only
    on success, so a failed stage leaves no partial bundle behind. Timestamps
    live in ``metadata.json`` only; every other file is a pure function of
    the config and the inputs.
    """
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cache_dir = out / CACHE_DIR if cfg.use_cache else None
    staging = Path(tempfile.mkdtemp(prefix=".staging-", dir=out))
    started = time.time()
    try:
        summary = _bundle(cfg, staging, cache_dir)
        write_json(
            staging / METADATA_FILE,
            {
                "started": time.strftime("%Y-%m-%dT%H:%M:%S%z", time.localtime(started)),
                "elapsed_seconds": round(time.time() - started, 3),
                "package_version": __version__,
                "python": platform.python_version(),
                "threads": cfg.threads,
            },
        )
    except BaseException:
        shutil.rmtree(staging, ignore_errors=True)
        raise
    for entry in sorted(staging.iterdir()):
        target = out / entry.name
        if target.is_dir():
            shutil.rmtree(target)
        elif target.exists():
            target.unlink()
        entry.replace(target)
    staging.rmdir()
    return summary
