"""Author-name homonymy resolution and co-author network distortion analysis."""

__version__ = "0.1.0"

from .corpus import Corpus, NameKey, PublicationRecord, articles_of, parse_corpus, read_corpus
from .disambig import DisambigConfig, IdentityPartition, resolve_corpus, resolve_name
from .evaluation import GroundTruth, compare, evaluate, k_score, learn_cutoff
from .redundancy import RedundancyTable, build_redundancy_table

__all__ = [
    "Corpus",
    "NameKey",
    "PublicationRecord",
    "articles_of",
    "parse_corpus",
    "read_corpus",
    "DisambigConfig",
    "IdentityPartition",
    "resolve_corpus",
    "resolve_name",
    "GroundTruth",
    "compare",
    "evaluate",
    "k_score",
    "learn_cutoff",
    "RedundancyTable",
    "build_redundancy_table",
]
