"""PCFG in Chomsky normal form: loading, Viterbi CYK, brute-force
enumeration, and head-rule conversion of derivations to dependencies."""

from __future__ import annotations

import math
import os
import re
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from ..corpus import Sentence
from ..parsegraph import DIRECTED, ParseGraph, ParseOutcome
from . import _kernels

NORMALIZATION_TOL = 1e-6
MAX_ENUMERATION_LENGTH = 8


class GrammarError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class PcfgGrammar:
    start: str
    binary_rules: tuple[tuple[str, str, str, float], ...]
    lexical_rules: tuple[tuple[str, str, float], ...]
    unknown_preterminals: frozenset[str] = frozenset()
    unknown_prob: float = 0.0

    def __post_init__(self):
        validate_grammar(self)

    @cached_property
    def nonterminals(self) -> frozenset[str]:
        syms = {self.start, *self.unknown_preterminals}
        for lhs, r1, r2, _ in self.binary_rules:
            syms.update((lhs, r1, r2))
        syms.update(lhs for lhs, _, _ in self.lexical_rules)
        return frozenset(syms)

    @cached_property
    def symbols(self) -> tuple[str, ...]:
        """Nonterminals in index order (sorted by name)."""
        return tuple(sorted(self.nonterminals))

    @cached_property
    def lexicon(self) -> dict[str, list[tuple[str, float]]]:
        out: dict[str, list[tuple[str, float]]] = defaultdict(list)
        for lhs, word, p in self.lexical_rules:
            out[word].append((lhs, p))
        return dict(out)

    @cached_property
    def _compiled(self):
        index = {s: i for i, s in enumerate(self.symbols)}
        rules = sorted(
            (index[lhs], index[r1], index[r2], math.log(p)) for lhs, r1, r2, p in self.binary_rules
        )
        lhs = np.array([r[0] for r in rules], dtype=np.int64)
        lhs_start = np.searchsorted(lhs, np.arange(len(self.symbols) + 1)).astype(np.int64)
        rhs1 = np.array([r[1] for r in rules], dtype=np.int64)
        rhs2 = np.array([r[2] for r in rules], dtype=np.int64)
        logp = np.array([r[3] for r in rules], dtype=np.float64)
        return index, lhs_start, rhs1, rhs2, logp

    def lookup(self, word: str) -> list[tuple[str, float]] | None:
        """Preterminals for ``word``: exact match, then lowercase; None if unknown."""
        hit = self.lexicon.get(word)
        if hit is None:
            hit = self.lexicon.get(word.lower())
        return hit

    def preterminals(self, word: str) -> list[tuple[str, float]]:
        hit = self.lookup(word)
        if hit is not None:
            return hit
        return [(a, self.unknown_prob) for a in sorted(self.unknown_preterminals)]

    def min_rule_prob(self) -> float:
        probs = [r[-1] for r in self.binary_rules] + [r[-1] for r in self.lexical_rules]
        if self.unknown_preterminals:
            probs.append(self.unknown_prob)
        return min(probs)


def validate_grammar(g: PcfgGrammar) -> None:
    totals: dict[str, float] = defaultdict(float)
    seen = set()
    for lhs, r1, r2, p in g.binary_rules:
        if not 0.0 < p <= 1.0:
            raise GrammarError(f"probability out of (0, 1] for {lhs} -> {r1} {r2}")
        if (lhs, r1, r2) in seen:
            raise GrammarError(f"duplicate rule {lhs} -> {r1} {r2}")
        seen.add((lhs, r1, r2))
        totals[lhs] += p
    for lhs, w, p in g.lexical_rules:
        if not 0.0 < p <= 1.0:
            raise GrammarError(f"probability out of (0, 1] for {lhs} -> '{w}'")
        if (lhs, w) in seen:
            raise GrammarError(f"duplicate rule {lhs} -> '{w}'")
        seen.add((lhs, w))
        totals[lhs] += p
    for lhs, total in sorted(totals.items()):
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise GrammarError(f"rules for {lhs} sum to {total:.9g}, not 1")
    if g.unknown_preterminals and not 0.0 < g.unknown_prob <= 1.0:
        raise GrammarError("unknown-word probability out of (0, 1]")


_SYM = r"[^\s'\"]+"
_BINARY = re.compile(rf"^({_SYM})\s*->\s*(.+?)\s*:\s*(\S+)$")


def parse_grammar(text: str) -> PcfgGrammar:
    """Parse grammar text.

    Lines are ``LHS -> RHS1 RHS2 : p`` or ``LHS -> 'word' : p``, plus the
    directives ``%start S`` and ``%unknown A B : p``; ``#`` starts a comment.
    """
    start = None
    binary, lexical = [], []
    unk, unk_p = frozenset(), 0.0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("%start"):
            parts = line.split()
            if len(parts) != 2:
                raise GrammarError("expected '%start SYMBOL'", lineno)
            start = parts[1]
            continue
        if line.startswith("%unknown"):
            body, sep, prob = line[len("%unknown"):].rpartition(":")
            syms = body.split()
            if not sep or not syms:
                raise GrammarError("expected '%unknown A B ... : p'", lineno)
            try:
                unk, unk_p = frozenset(syms), float(prob)
            except ValueError:
                raise GrammarError(f"bad probability {prob.strip()!r}", lineno) from None
            continue
        m = _BINARY.match(line)
        if not m:
            raise GrammarError(f"cannot parse rule {line!r}", lineno)
        lhs, rhs, prob = m.groups()
        try:
            p = float(prob)
        except ValueError:
            raise GrammarError(f"bad probability {prob!r}", lineno) from None
        if len(rhs) >= 2 and rhs[0] == rhs[-1] and rhs[0] in "'\"":
            word = rhs[1:-1]
            if not word or any(c.isspace() for c in word):
                raise GrammarError("terminal must be a single non-empty word", lineno)
            lexical.append((lhs, word, p))
            continue
        parts = rhs.split()
        if len(parts) != 2 or any(q[0] in "'\"" for q in parts):
            raise GrammarError(f"rule is not in Chomsky normal form: {line!r}", lineno)
        binary.append((lhs, parts[0], parts[1], p))
    if start is None:
        if not binary and not lexical:
            raise GrammarError("grammar has no rules")
        start = (binary[0][0] if binary else lexical[0][0])
    return PcfgGrammar(start, tuple(binary), tuple(lexical), unk, unk_p)


def load_grammar(path: str | os.PathLike) -> PcfgGrammar:
    return parse_grammar(Path(path).read_text(encoding="utf-8"))


# --------------------------------------------------------------------------
# derivations
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DerivationTree:
    symbol: str
    logprob: float
    left: DerivationTree | None = None
    right: DerivationTree | None = None
    word: str | None = None

    @property
    def probability(self) -> float:
        return math.exp(self.logprob)

    @property
    def is_leaf(self) -> bool:
        return self.word is not None

    def leaves(self) -> list[str]:
        if self.is_leaf:
            return [self.word]
        return self.left.leaves() + self.right.leaves()

    def bracketed(self) -> str:
        if self.is_leaf:
            return f"({self.symbol} {self.word})"
        return f"({self.symbol} {self.left.bracketed()} {self.right.bracketed()})"

    def shape(self) -> str:
        """Bracketing without probabilities; identifies a derivation."""
        return self.bracketed()


@dataclass(frozen=True)
class TreeOutcome:
    tree: DerivationTree | None = None
    failure_reason: str | None = None

    @property
    def ok(self) -> bool:
        return self.tree is not None

    @property
    def logprob(self) -> float:
        return self.tree.logprob if self.tree else -math.inf


def _words(s: Sentence | Sequence[str]) -> list[str]:
    return s.texts if isinstance(s, Sentence) else list(s)


def lexical_chart(g: PcfgGrammar, words: Sequence[str]) -> np.ndarray:
    index = g._compiled[0]
    lex = np.full((len(words), len(g.symbols)), -np.inf)
    for i, w in enumerate(words):
        for a, p in g.preterminals(w):
            lex[i, index[a]] = math.log(p)
    return lex


def viterbi_chart(g: PcfgGrammar, s: Sentence | Sequence[str], backend: str | None = None):
    """Return ``(score, back_split, back_rule)`` arrays for ``s``."""
    words = _words(s)
    _, lhs_start, rhs1, rhs2, logp = g._compiled
    return _kernels.viterbi_chart(lexical_chart(g, words), lhs_start, rhs1, rhs2, logp, use=backend)


def cyk_parse(g: PcfgGrammar, s: Sentence | Sequence[str], backend: str | None = None) -> TreeOutcome:
    """Most probable derivation of the start symbol over the whole sentence.

    Ties are broken towards the smaller split point, then the smaller
    ``(lhs, rhs1, rhs2)`` rule.
    """
    words = _words(s)
    if not words:
        return TreeOutcome(failure_reason="empty sentence")
    index, _, rhs1, rhs2, _ = g._compiled
    score, back_split, back_rule = viterbi_chart(g, words, backend)
    n = len(words)
    if g.start not in index or score[0, n, index[g.start]] == -np.inf:
        return TreeOutcome(failure_reason="no parse")
    syms = g.symbols

    def build(i: int, j: int, a: int) -> DerivationTree:
        lp = float(score[i, j, a])
        if j - i == 1:
            return DerivationTree(syms[a], lp, word=words[i])
        k, r = int(back_split[i, j, a]), int(back_rule[i, j, a])
        return DerivationTree(syms[a], lp, build(i, k, int(rhs1[r])), build(k, j, int(rhs2[r])))

    return TreeOutcome(tree=build(0, n, index[g.start]))


def enumerate_parses(g: PcfgGrammar, s: Sentence | Sequence[str]) -> list[tuple[DerivationTree, float]]:
    """All derivations of the start symbol, by exhaustive span splitting.

    Probabilities are plain products of rule probabilities, independent of
    the log-space chart.
    """
    words = _words(s)
    if len(words) > MAX_ENUMERATION_LENGTH:
        raise ValueError(f"sentence too long to enumerate ({len(words)} > {MAX_ENUMERATION_LENGTH})")
    if not words:
        return []
    by_lhs: dict[str, list[tuple[str, str, float]]] = defaultdict(list)
    for lhs, r1, r2, p in g.binary_rules:
        by_lhs[lhs].append((r1, r2, p))
    memo: dict[tuple[str, int, int], list[tuple[DerivationTree, float]]] = {}

    def derive(a: str, i: int, j: int) -> list[tuple[DerivationTree, float]]:
        key = (a, i, j)
        if key in memo:
            return memo[key]
        out = []
        if j - i == 1:
            for pre, p in g.preterminals(words[i]):
                if pre == a:
                    out.append((DerivationTree(a, math.log(p), word=words[i]), p))
        else:
            for r1, r2, p in by_lhs.get(a, ()):
                for k in range(i + 1, j):
                    for lt, lp in derive(r1, i, k):
                        for rt, rp in derive(r2, k, j):
                            prob = p * lp * rp
                            out.append((DerivationTree(a, math.log(prob), lt, rt), prob))
        memo[key] = out
        return out

    return list(derive(g.start, 0, len(words)))


# --------------------------------------------------------------------------
# dependency conversion
# --------------------------------------------------------------------------

LEFTMOST = "leftmost"
RIGHTMOST = "rightmost"


@dataclass(frozen=True)
class HeadRules:
    rules: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        bad = {k: v for k, v in self.rules.items() if v not in (LEFTMOST, RIGHTMOST)}
        if bad:
            raise ValueError(f"head direction must be leftmost or rightmost: {bad}")

    def direction(self, symbol: str) -> str:
        return self.rules.get(symbol, LEFTMOST)


def parse_head_rules(text: str) -> HeadRules:
    rules = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2 or parts[1] not in (LEFTMOST, RIGHTMOST):
            raise ValueError(f"line {lineno}: expected 'NONTERM leftmost|rightmost'")
        rules[parts[0]] = parts[1]
    return HeadRules(rules)


def load_head_rules(path: str | os.PathLike) -> HeadRules:
    return parse_head_rules(Path(path).read_text(encoding="utf-8"))


def tree_to_dependencies(t: DerivationTree, heads: HeadRules) -> ParseGraph:
    """Project a derivation onto a directed dependency tree.

    The lexical head of each non-head child attaches to the lexical head of
    its head sibling, labeled with the non-head child's symbol.
    """
    edges = []
    pos = 0

    def walk(node: DerivationTree) -> int:
        nonlocal pos
        if node.is_leaf:
            pos += 1
            return pos
        lh, rh = walk(node.left), walk(node.right)
        if heads.direction(node.symbol) == LEFTMOST:
            edges.append((lh, rh, node.right.symbol))
            return lh
        edges.append((rh, lh, node.left.symbol))
        return rh

    top = walk(t)
    edges.append((0, top, "root"))
    return ParseGraph.build(pos, DIRECTED, edges, t.leaves())


def cyk_dependencies(
    g: PcfgGrammar, heads: HeadRules, s: Sentence | Sequence[str], backend: str | None = None
) -> ParseOutcome:
    res = cyk_parse(g, s, backend)
    if not res.ok:
        return ParseOutcome.failed(res.failure_reason)
    return ParseOutcome.parsed(tree_to_dependencies(res.tree, heads))
