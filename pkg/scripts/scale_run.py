"""Full pipeline on a ~30k-publication synthetic corpus, run twice.

Checks that both bundles are byte-identical (metadata.json and the cache
aside) and reports wall time per run.

    python3 scripts/scale_run.py --workdir /tmp/scale --threads 1 8
"""

from __future__ import annotations

import argparse
import filecmp
import sys
import time
from pathlib import Path

from homonymy.pipeline import PipelineConfig, run_pipeline
from homonymy.synthgen import SynthSpec, emit, generate


def _same(a: Path, b: Path) -> bool:
    cmp = filecmp.dircmp(a, b, ignore=["metadata.json", ".cache"])
    stack = [cmp]
    while stack:
        d = stack.pop()
        if d.left_only or d.right_only or d.funny_files:
            return False
        _, mismatch, errors = filecmp.cmpfiles(d.left, d.right, d.common_files, shallow=False)
        if mismatch or errors:
            return False
        stack.extend(d.subdirs.values())
    return True


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description="scale and determinism run")
    ap.add_argument("--workdir", type=Path, default=Path("scale_run"))
    ap.add_argument("--identities", type=int, default=24_000)
    ap.add_argument("--threads", type=int, nargs="+", default=[1, 8])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    args.workdir.mkdir(parents=True, exist_ok=True)
    spec = SynthSpec(n_identities=args.identities, last_name_distribution="heavy_tailed",
                     homonym_rate=0.1, seed=args.seed)
    t0 = time.perf_counter()
    corpus, planted = generate(spec)
    corpus_path, truth_path = args.workdir / "corpus.jsonl", args.workdir / "truth.jsonl"
    emit(corpus, planted, corpus_path, truth_path)
    print(f"generated {len(corpus)} publications in {time.perf_counter() - t0:.1f}s")

    outs = []
    for i, threads in enumerate(args.threads):
        out = args.workdir / f"run{i}_t{threads}"
        t0 = time.perf_counter()
        s = run_pipeline(PipelineConfig(str(corpus_path), str(out), truth=str(truth_path),
                                        threads=threads, use_cache=False))
        print(f"threads={threads}: {time.perf_counter() - t0:.1f}s, giant fraction "
              f"{s['before']['network']['giant_component_fraction']:.3f} -> "
              f"{s['after']['network']['giant_component_fraction']:.3f}, distortion "
              f"{s['before']['distortion_score']:.3f} -> {s['after']['distortion_score']:.3f}")
        outs.append(out)
    ok = all(_same(outs[0], o) for o in outs[1:])
    print("bundles identical" if ok else "BUNDLES DIFFER")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
