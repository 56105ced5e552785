"""Weighted K quantiles per low-redundancy cutoff.

Runs the sweep on the three constructed training sets and, optionally, on a
random sample of names from a synthetic corpus with its planted truth:

    python3 scripts/cutoff_sweep.py --synthetic 5000 --sample 400
"""

from __future__ import annotations

import argparse
import random
import sys

from homonymy.evaluation import learn_cutoff
from homonymy.redundancy import build_redundancy_table
from homonymy.synthgen import SynthSpec, cutoff_training_corpus, generate


def show(title, corpus, training, cutoffs):
    best, sweep = learn_cutoff(corpus, build_redundancy_table(corpus), training, cutoffs)
    print(f"\n{title}: {len(training)} names, learned cutoff {best}")
    print(f"{'cutoff':>6} {'median':>8} {'q25':>8} {'min':>8} {'mean':>8}")
    for s in sweep:
        mark = " *" if s.cutoff == best else ""
        print(f"{s.cutoff:>6} {s.median:8.4f} {s.q25:8.4f} {s.minimum:8.4f} {s.mean:8.4f}{mark}")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description="cutoff sweep")
    ap.add_argument("--max-cutoff", type=int, default=10)
    ap.add_argument("--synthetic", type=int, default=0, help="identities in an extra synthetic corpus")
    ap.add_argument("--sample", type=int, default=300, help="training names drawn from it")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    cutoffs = range(0, args.max_cutoff + 1)

    for kind, top in (("threshold", 6), ("all_unique", args.max_cutoff), ("all_split", 6)):
        c, t = cutoff_training_corpus(kind, max_redundancy=top, seed=args.seed)
        show(kind, c, t, cutoffs)

    if args.synthetic:
        spec = SynthSpec(n_identities=args.synthetic, last_name_distribution="heavy_tailed",
                         homonym_rate=0.1, seed=args.seed)
        corpus, planted = generate(spec)
        keys = sorted(planted.truth)
        picked = random.Random(args.seed).sample(keys, min(args.sample, len(keys)))
        show(f"synthetic ({args.synthetic} identities)", corpus, planted.truth.subset(picked), cutoffs)
    return 0


if __name__ == "__main__":
    sys.exit(main())
