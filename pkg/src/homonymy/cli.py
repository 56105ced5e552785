"""Command-line interface.

Every subcommand writes into ``--out-dir``. Tables are CSV with a header
row, summaries are JSON. ``--config`` names a JSON file whose keys provide
defaults for the subcommand's options (option names with dashes replaced by
underscores); explicit flags still win.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path

from .community import (
    ROLES,
    RoleThresholds,
    classify_roles,
    cluster_network,
    read_roles,
    role_distribution,
    write_distribution,
    write_roles,
)
from .corpus import Corpus, CorpusError, parse_corpus, write_corpus
from .disambig import DisambigConfig, read_partitions, resolve_corpus, write_partitions
from .evaluation import (
    DEFAULT_STRATA_SIZES,
    GroundTruth,
    distortion_analysis,
    evaluate,
    learn_cutoff,
    sample_size,
    strata_from_roles,
    stratified_sample,
)
from .netbuild import build_network, giant_component, network_summary, read_edges, write_edges, write_nodes
from .pipeline import PipelineConfig, PipelineError, run_pipeline
from .redundancy import DEFAULT_DIVISION_POINT, build_redundancy_table
from .reports import distortion_tables, evaluation_tables, redundancy_tables, write_csv, write_json
from .synthgen import SynthSpec, emit, generate

log = logging.getLogger("homonymy")

DEFAULT_MIN_ROLE_NODES = 30


def _read_corpus_arg(path: str) -> Corpus:
    if path == "-":
        return parse_corpus(sys.stdin.buffer)
    with open(path, "rb") as fh:
        return parse_corpus(fh)


def _disambig_config(args) -> DisambigConfig:
    return DisambigConfig(
        low_redundancy_cutoff=args.cutoff,
        use_self_citation=not args.no_self_citation,
        use_coauthor_overlap=not args.no_coauthor_overlap,
        strict_key_match=args.strict_key_match,
    )


def _out(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


# --- subcommands ------------------------------------------------------------


def cmd_ingest(args) -> int:
    corpus = _read_corpus_arg(args.corpus)
    out = _out(args)
    with open(out / "corpus.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        write_corpus(corpus, fh)
    n_auth = sum(len(r.authors) for r in corpus)
    write_json(out / "ingest_summary.json", {
        "publications": len(corpus),
        "name_keys": len(corpus.name_index),
        "last_names": len({k.last for k in corpus.name_index}),
        "authorship_instances": n_auth,
        "dangling_citations": sum(1 for r in corpus for c in r.cites if c not in corpus.records),
    })
    return 0


def cmd_redundancy(args) -> int:
    corpus = _read_corpus_arg(args.corpus)
    table = build_redundancy_table(corpus, args.weighting)
    summary = redundancy_tables(corpus, table, _out(args), not args.all_last_names,
                                args.division_point, args.bins)
    print(json.dumps(summary, sort_keys=True))
    return 0


def cmd_disambiguate(args) -> int:
    corpus = _read_corpus_arg(args.corpus)
    table = build_redundancy_table(corpus, args.weighting)
    parts = resolve_corpus(corpus, table, _disambig_config(args), threads=args.threads)
    out = _out(args)
    with open(out / "identities.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        write_partitions(parts, fh)
    write_json(out / "disambiguate_summary.json", {
        "name_keys": len(parts),
        "identities": sum(len(p) for p in parts.values()),
        "split_name_keys": sum(1 for p in parts.values() if len(p) > 1),
        "config": {f.name: getattr(_disambig_config(args), f.name) for f in fields(DisambigConfig)},
    })
    return 0


def cmd_learn_cutoff(args) -> int:
    corpus = _read_corpus_arg(args.corpus)
    with open(args.truth, encoding="utf-8") as fh:
        training = GroundTruth.read(fh)
    training.validate(corpus)
    table = build_redundancy_table(corpus, args.weighting)
    best, sweep = learn_cutoff(corpus, table, training, range(args.min_cutoff, args.max_cutoff + 1),
                               args.objective, args.with_self_citation)
    out = _out(args)
    write_csv(out / "cutoff_sweep.csv", ["cutoff", "median", "q25", "minimum", "mean"],
              ((s.cutoff, s.median, s.q25, s.minimum, s.mean) for s in sweep))
    write_json(out / "learned_cutoff.json", {"cutoff": best, "objective": args.objective,
                                             "training_names": len(training)})
    print(best)
    return 0


def cmd_network(args) -> int:
    from .disambig import trivial_partitions

    corpus = _read_corpus_arg(args.corpus)
    if args.identities:
        with open(args.identities, encoding="utf-8") as fh:
            parts = read_partitions(fh)
    else:
        parts = trivial_partitions(corpus)
    net = build_network(corpus, parts, args.filter_to_fixpoint)
    out = _out(args)
    with open(out / "edges.csv", "w", encoding="utf-8", newline="") as fh:
        write_edges(net, fh)
    with open(out / "nodes.csv", "w", encoding="utf-8", newline="") as fh:
        write_nodes(net, fh)
    write_json(out / "network_summary.json", network_summary(net))
    return 0


def cmd_roles(args) -> int:
    with open(args.edges, encoding="utf-8") as fh:
        net = read_edges(fh)
    giant = giant_component(net)
    clustering = cluster_network(giant, args.seed, args.method, not args.unweighted_clustering, args.trials)
    thresholds = RoleThresholds(hub_z=args.hub_z)
    roles = classify_roles(giant, clustering, thresholds, args.weighted_degree)
    dist = role_distribution(roles)
    out = _out(args)
    with open(out / "roles.csv", "w", encoding="utf-8", newline="") as fh:
        write_roles(roles, fh)
    with open(out / "role_distribution.csv", "w", encoding="utf-8", newline="") as fh:
        write_distribution(dist, fh)
    write_json(out / "roles_summary.json", {
        "clusters": clustering.n_clusters,
        "clustering_method": clustering.method,
        "clustering_quality": clustering.quality,
        **dist,
    })
    return 0


def cmd_evaluate(args) -> int:
    with open(args.truth, encoding="utf-8") as fh:
        truth = GroundTruth.read(fh)
    if args.identities:
        with open(args.identities, encoding="utf-8") as fh:
            empirical = read_partitions(fh)
    else:
        from .disambig import IdentityPartition

        empirical = {k: IdentityPartition.from_groups(k, [truth[k].articles]) for k in truth}
    strata = None
    if args.roles:
        with open(args.roles, encoding="utf-8") as fh:
            strata = strata_from_roles(read_roles(fh))
    report = evaluate(truth, empirical, strata)
    out = _out(args)
    evaluation_tables(report, out)
    print(json.dumps(report.summary(), sort_keys=True))
    return 0


def cmd_distortion(args) -> int:
    corpus = _read_corpus_arg(args.corpus)
    table = build_redundancy_table(corpus, args.weighting)
    with open(args.roles, encoding="utf-8") as fh:
        roles = read_roles(fh)
    report = distortion_analysis(roles, table, args.min_nodes)
    distortion_tables(report, _out(args))
    print(json.dumps(report.to_json(), sort_keys=True))
    return 0


def _parse_sizes(spec: str, roles) -> dict[str, int]:
    if spec == "default":
        return dict(DEFAULT_STRATA_SIZES)
    if spec.startswith("auto"):
        pops: dict[str, int] = {}
        for m in roles.values():
            if m.role in ROLES:
                pops[m.role] = pops.get(m.role, 0) + 1
        return {r: sample_size(n) for r, n in sorted(pops.items())}
    sizes = {}
    for part in spec.split(","):
        role, _, n = part.partition("=")
        if not n:
            raise ValueError(f"bad size spec {part!r}; expected ROLE=N")
        sizes[role.strip()] = int(n)
    return sizes


def cmd_sample(args) -> int:
    with open(args.roles, encoding="utf-8") as fh:
        roles = read_roles(fh)
    sizes = _parse_sizes(args.sizes, roles)
    if args.training_fraction:
        sizes = {r: round(n * (1 + args.training_fraction)) for r, n in sizes.items()}
    picked = stratified_sample(roles, sizes, args.seed)
    out = _out(args)
    write_csv(out / "sample.csv", ["role", "label"], ((r, u) for r in sorted(picked) for u in picked[r]))
    write_json(out / "sample_summary.json", {"seed": args.seed, "sizes": sizes})
    return 0


def cmd_synth(args) -> int:
    d: dict = {}
    if args.spec:
        with open(args.spec, encoding="utf-8") as fh:
            d.update(json.load(fh))
    for f in fields(SynthSpec):
        v = getattr(args, f"synth_{f.name}", None)
        if v is not None:
            d[f.name] = v
    if args.seed is not None:
        d["seed"] = args.seed
    spec = SynthSpec.from_dict(d)
    corpus, planted = generate(spec)
    out = _out(args)
    emit(corpus, planted, out / "corpus.jsonl", out / "truth.jsonl")
    write_json(out / "synth_spec.json", spec.to_dict())
    print(json.dumps({"publications": len(corpus), "name_keys": len(corpus.name_index),
                      "homonym_keys": len(planted.homonym_keys())}, sort_keys=True))
    return 0


def cmd_pipeline(args) -> int:
    cfg = PipelineConfig(
        corpus=args.corpus,
        out_dir=args.out_dir,
        truth=args.truth,
        disambig=_disambig_config(args),
        seed=args.seed,
        clustering_method=args.method,
        clustering_trials=args.trials,
        clustering_weighted=not args.unweighted_clustering,
        role_thresholds=RoleThresholds(hub_z=args.hub_z),
        weighted_degree=args.weighted_degree,
        filter_to_fixpoint=args.filter_to_fixpoint,
        redundancy_weighting=args.weighting,
        redundancy_distinct=not args.all_last_names,
        redundancy_post_filter=args.post_filter_redundancy,
        division_point=args.division_point,
        distortion_min_nodes=args.min_nodes,
        threads=args.threads,
        use_cache=not args.no_cache,
    )
    summary = run_pipeline(cfg)
    brief = {
        tag: {
            "giant_component_fraction": summary[tag]["network"]["giant_component_fraction"],
            "distortion_score": summary[tag]["distortion_score"],
            **({"weighted_median_k": summary[tag]["evaluation"]["weighted_median_k"]}
               if "evaluation" in summary[tag] else {}),
        }
        for tag in ("before", "after")
    }
    print(json.dumps(brief, sort_keys=True))
    return 0


# --- parser -----------------------------------------------------------------


def _add_disambig_flags(p) -> None:
    p.add_argument("--cutoff", type=int, default=3, help="low redundancy cutoff (default 3)")
    p.add_argument("--no-self-citation", action="store_true")
    p.add_argument("--no-coauthor-overlap", action="store_true")
    p.add_argument("--strict-key-match", action="store_true",
                   help="match co-authors on last name and initials")


def _add_redundancy_flags(p) -> None:
    p.add_argument("--weighting", choices=["names", "occurrences"], default="names",
                   help="distribution of raw redundancy: one count per last name, or per authorship")


def _add_cluster_flags(p) -> None:
    p.add_argument("--method", choices=["infomap", "louvain"], default="infomap")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--unweighted-clustering", action="store_true")
    p.add_argument("--weighted-degree", action="store_true", help="weighted degree for z and p")
    p.add_argument("--hub-z", type=float, default=2.5)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--config", help="JSON file with option defaults")
    g.add_argument("--seed", type=int, default=None, help="random seed (default 0; synth: the spec's seed)")
    g.add_argument("--threads", type=int, default=1, help="worker cap")
    g.add_argument("--out-dir", default=".", help="output directory")
    g.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="homonymy",
        description="Author-name homonymy resolution and co-author network distortion analysis.",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    def add(name, help_, fn):
        p = sub.add_parser(name, parents=[common], help=help_, description=help_)
        p.set_defaults(func=fn)
        return p

    p = add("ingest", "validate a JSONL corpus and write it in canonical form", cmd_ingest)
    p.add_argument("--corpus", required=True, help="corpus JSONL path, or - for stdin")

    p = add("redundancy", "compute name, article and average article redundancy tables", cmd_redundancy)
    p.add_argument("--corpus", required=True)
    _add_redundancy_flags(p)
    p.add_argument("--all-last-names", action="store_true",
                   help="article redundancy over every author, not distinct last names")
    p.add_argument("--division-point", type=float, default=DEFAULT_DIVISION_POINT)
    p.add_argument("--bins", type=int, default=20)

    p = add("disambiguate", "resolve every name key into author identities", cmd_disambiguate)
    p.add_argument("--corpus", required=True)
    _add_disambig_flags(p)
    _add_redundancy_flags(p)

    p = add("learn-cutoff", "sweep the low redundancy cutoff on training names", cmd_learn_cutoff)
    p.add_argument("--corpus", required=True)
    p.add_argument("--truth", required=True, help="training ground truth JSONL")
    p.add_argument("--min-cutoff", type=int, default=0)
    p.add_argument("--max-cutoff", type=int, default=10)
    p.add_argument("--objective", choices=["median", "q25", "min", "mean"], default="median")
    p.add_argument("--with-self-citation", action="store_true")
    _add_redundancy_flags(p)

    p = add("network", "build the filtered co-author network", cmd_network)
    p.add_argument("--corpus", required=True)
    p.add_argument("--identities", help="identities JSONL; omitted = one identity per name key")
    p.add_argument("--filter-to-fixpoint", action="store_true")

    p = add("roles", "cluster the giant component and classify node roles", cmd_roles)
    p.add_argument("--edges", required=True, help="edges.csv from the network command")
    _add_cluster_flags(p)

    p = add("evaluate", "score identities against ground truth (K metric, error tables)", cmd_evaluate)
    p.add_argument("--truth", required=True)
    p.add_argument("--identities", help="identities JSONL; omitted = undisambiguated")
    p.add_argument("--roles", help="roles.csv of the undisambiguated network, for strata")

    p = add("distortion", "role-stratified raw-redundancy distributions and KS distortion", cmd_distortion)
    p.add_argument("--corpus", required=True)
    p.add_argument("--roles", required=True)
    p.add_argument("--min-nodes", type=int, default=DEFAULT_MIN_ROLE_NODES,
                   help="roles with fewer classifiable nodes are left out of the score")
    _add_redundancy_flags(p)

    p = add("sample", "draw a role-stratified sample of nodes", cmd_sample)
    p.add_argument("--roles", required=True)
    p.add_argument("--sizes", default="default",
                   help="'default' preset sizes, 'auto' (finite-population sizes), or R1=10,R2=5,...")
    p.add_argument("--training-fraction", type=float, default=0.0,
                   help="extra fraction sampled per stratum for a training set")

    p = add("synth", "generate a synthetic corpus with planted identities", cmd_synth)
    p.add_argument("--spec", help="SynthSpec JSON file")
    for f in fields(SynthSpec):
        if f.name == "seed":
            continue
        flag = "--" + f.name.replace("_", "-")
        default_t = type(f.default) if f.default is not None else int
        if isinstance(f.default, tuple):
            p.add_argument(flag, dest=f"synth_{f.name}", type=int, nargs=2, default=None)
        elif isinstance(f.default, bool):
            p.add_argument(flag, dest=f"synth_{f.name}", action="store_const", const=True, default=None)
        else:
            p.add_argument(flag, dest=f"synth_{f.name}", type=default_t, default=None)

    p = add("pipeline", "run the whole before/after pipeline into a report bundle", cmd_pipeline)
    p.add_argument("--corpus", required=True)
    p.add_argument("--truth")
    _add_disambig_flags(p)
    _add_redundancy_flags(p)
    _add_cluster_flags(p)
    p.add_argument("--filter-to-fixpoint", action="store_true")
    p.add_argument("--all-last-names", action="store_true")
    p.add_argument("--post-filter-redundancy", action="store_true")
    p.add_argument("--division-point", type=float, default=DEFAULT_DIVISION_POINT)
    p.add_argument("--min-nodes", type=int, default=DEFAULT_MIN_ROLE_NODES)
    p.add_argument("--no-cache", action="store_true")
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    command = next((a for a in argv if a in sub.choices), None)
    if known.config and command:
        with open(known.config, encoding="utf-8") as fh:
            defaults = json.load(fh)
        if not isinstance(defaults, dict):
            parser.error("--config must hold a JSON object")
        subparser = sub.choices[command]
        dests = {a.dest for a in subparser._actions}
        mapped = {k.replace("-", "_"): v for k, v in defaults.items()}
        unknown = sorted(set(mapped) - dests)
        if unknown:
            parser.error(f"unknown keys in --config for {command}: {unknown}")
        for a in subparser._actions:
            if a.dest in mapped:
                a.required = False
        subparser.set_defaults(**mapped)
    return parser.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = _apply_config(parser, argv)
    if args.seed is None and args.command != "synth":
        args.seed = 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (CorpusError, ValueError, OSError, KeyError) as exc:
        print(f"error: {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
