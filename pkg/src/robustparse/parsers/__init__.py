from ._kernels import backend
from .builtin import ChainParser, CykParser, ExternalParser, chain_parse
from .external import AdapterConfig, AdapterError, run_external
from .pcfg import (
    DerivationTree,
    GrammarError,
    HeadRules,
    PcfgGrammar,
    TreeOutcome,
    cyk_dependencies,
    cyk_parse,
    enumerate_parses,
    load_grammar,
    load_head_rules,
    parse_grammar,
    parse_head_rules,
    tree_to_dependencies,
    viterbi_chart,
)

__all__ = [
    "AdapterConfig",
    "AdapterError",
    "ChainParser",
    "CykParser",
    "DerivationTree",
    "ExternalParser",
    "GrammarError",
    "HeadRules",
    "PcfgGrammar",
    "TreeOutcome",
    "backend",
    "chain_parse",
    "cyk_dependencies",
    "cyk_parse",
    "enumerate_parses",
    "load_grammar",
    "load_head_rules",
    "parse_grammar",
    "parse_head_rules",
    "run_external",
    "tree_to_dependencies",
    "viterbi_chart",
]
