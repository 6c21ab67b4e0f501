"""Parser robustness evaluation against misspelled input."""

from .corpus import (
    Edit,
    Lexicon,
    NoisySentence,
    Sentence,
    TestCorpus,
    Token,
    apply_edit,
    build_corpus,
    corrupt_sentence,
    corrupt_word,
    keyboard_neighbors,
    read_corpus,
    tokenize,
    write_corpus,
)
from .parsegraph import LabeledEdge, ParseGraph, ParseOutcome, labeled_equal, read_conll_block, structure_equal
from .scoring import (
    LevelScore,
    PairVerdict,
    RobustnessReport,
    aggregate,
    compare_pair,
    degradation,
    fscore,
    rescore_inclusive,
    score_level,
)

__version__ = "0.1.0"
