"""CSV and JSON writers shared by the CLI and the pipeline.

Every table has a header row; column orders are fixed here.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import Corpus
from .evaluation import DistortionReport, EvaluationReport
from .redundancy import (
    DEFAULT_DIVISION_POINT,
    RedundancyTable,
    article_redundancy,
    average_article_redundancy,
    histogram,
)

NAME_COLUMNS = ["last", "initials", "stratum", "articles", "true_identities",
                "empirical_identities", "acp", "aap", "k", "decomposition"]
QUANTILE_COLUMNS = ["stratum", "names", "median", "q25", "minimum"]
ERROR_COLUMNS = ["stratum", "error_type", "count", "denominator", "percent"]
DECOMPOSITION_COLUMNS = ["stratum", "kind", "count", "denominator", "percent"]


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return v


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])


def write_dict_rows(path: Path, header: Sequence[str], rows: Iterable[dict]) -> None:
    write_csv(path, header, ([r[c] for c in header] for r in rows))


def write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")


def redundancy_tables(
    corpus: Corpus,
    table: RedundancyTable,
    out: Path,
    distinct: bool = True,
    division_point: float = DEFAULT_DIVISION_POINT,
    bins: int = 20,
) -> dict:
    """Write per-last-name, per-article and per-name tables plus histograms."""
    write_csv(out / "last_names.csv", ["last", "raw", "s"],
              ((last, table.raw[last], table.s[last]) for last in sorted(table.raw)))
    write_csv(out / "raw_redundancy_cdf.csv", ["raw", "cumulative_probability"], sorted(table.cdf.items()))

    art: dict[str, float] = {}
    for pid in sorted(corpus.records):
        art[pid] = article_redundancy(table, corpus.records[pid], distinct)
    write_csv(out / "articles.csv", ["id", "article_redundancy"], sorted(art.items()))

    avg = {k: average_article_redundancy(table, corpus, k, distinct, cache=art) for k in corpus.keys()}
    write_csv(out / "names.csv", ["last", "initials", "avg_article_redundancy"],
              ((k.last, k.initials, v) for k, v in avg.items()))

    raw_hist: dict[int, int] = {}
    for r in table.raw.values():
        raw_hist[r] = raw_hist.get(r, 0) + 1
    write_csv(out / "hist_raw_redundancy.csv", ["raw", "last_names"], sorted(raw_hist.items()))
    write_csv(out / "hist_article_redundancy.csv", ["bin_lo", "bin_hi", "articles"],
              histogram(art.values(), bins))
    write_csv(out / "hist_avg_article_redundancy.csv", ["bin_lo", "bin_hi", "names"],
              histogram(avg.values(), bins))

    above = sum(1 for v in avg.values() if v > division_point)
    summary = {
        "last_names": len(table.raw),
        "name_keys": len(avg),
        "articles": len(art),
        "max_raw_redundancy": table.max_raw,
        "division_point": division_point,
        "names_above_division_point": above,
        "fraction_names_above_division_point": above / len(avg) if avg else None,
    }
    write_json(out / "summary.json", summary)
    return summary


def evaluation_tables(report: EvaluationReport, out: Path) -> None:
    write_dict_rows(out / "names.csv", NAME_COLUMNS, report.names)
    write_dict_rows(out / "quantiles.csv", QUANTILE_COLUMNS, report.quantiles)
    write_dict_rows(out / "errors.csv", ERROR_COLUMNS, report.errors)
    write_dict_rows(out / "decomposition.csv", DECOMPOSITION_COLUMNS, report.decomposition)
    write_json(out / "summary.json", report.summary())


def distortion_tables(report: DistortionReport, out: Path) -> None:
    write_csv(out / "cdf.csv", ["role", "raw", "cumulative_probability"], report.curves())
    write_json(out / "summary.json", report.to_json())
