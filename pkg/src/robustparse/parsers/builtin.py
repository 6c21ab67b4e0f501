"""Built-in parsers usable without external software."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from ..corpus import Sentence
from ..parsegraph import DIRECTED, ParseGraph, ParseOutcome
from .external import AdapterConfig, run_external
from .pcfg import HeadRules, PcfgGrammar, cyk_dependencies


def chain_parse(s: Sentence | Sequence[str]) -> ParseGraph:
    """Each token depends on its left neighbour; token 1 is the root.

    Depends only on the token count, so it is perfectly robust to
    word-internal corruption.
    """
    words = s.texts if isinstance(s, Sentence) else list(s)
    if not words:
        raise ValueError("empty sentence")
    return ParseGraph.build(len(words), DIRECTED, [(i - 1, i, "chain") for i in range(1, len(words) + 1)], words)


@dataclass(frozen=True)
class ChainParser:
    name: str = "chain"
    mode: str = DIRECTED

    def parse_all(self, sentences: Sequence[Sentence]) -> list[ParseOutcome]:
        return [ParseOutcome.parsed(chain_parse(s)) for s in sentences]


@dataclass(frozen=True)
class CykParser:
    grammar: PcfgGrammar
    heads: HeadRules = field(default_factory=HeadRules)
    name: str = "cyk"
    mode: str = DIRECTED

    def parse_all(self, sentences: Sequence[Sentence]) -> list[ParseOutcome]:
        return [cyk_dependencies(self.grammar, self.heads, s) for s in sentences]


@dataclass(frozen=True)
class ExternalParser:
    config: AdapterConfig

    @property
    def name(self) -> str:
        return self.config.name

    @property
    def mode(self) -> str:
        return self.config.mode

    def parse_all(self, sentences: Sequence[Sentence]) -> list[ParseOutcome]:
        return run_external(self.config, sentences)
