"""Noisy test corpus construction.

Clean sentences are corrupted with single-character keyboard typos
(delete, add, swap), at most one edit per word, such that every corrupted
word is a non-word under a configurable lexicon.  Corpora are a pure
function of ``(base sentences, plan, seed, lexicon)``.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import string
import tempfile
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

MAX_TOKENS = 1000
MAX_SAMPLES = 100
MAX_VARIANT_ATTEMPTS = 200
OPS = ("delete", "add", "swap")

_ROWS = ("qwertyuiop", "asdfghjkl", "zxcvbnm")
_ROW_OFFSETS = (0.0, 0.25, 0.75)
_ADJACENCY_RADIUS = 1.3


class CorpusError(ValueError):
    """Raised for any corpus construction or validation failure."""


class CorpusFormatError(CorpusError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


# --------------------------------------------------------------------------
# keyboard model
# --------------------------------------------------------------------------


def _key_positions() -> dict[str, tuple[float, float]]:
    pos = {}
    for row, (letters, offset) in enumerate(zip(_ROWS, _ROW_OFFSETS)):
        for col, c in enumerate(letters):
            pos[c] = (col + offset, float(row))
    return pos


KEY_POSITIONS = _key_positions()


def _build_neighbors() -> dict[str, frozenset[str]]:
    out = {}
    for a, (xa, ya) in KEY_POSITIONS.items():
        out[a] = frozenset(
            b
            for b, (xb, yb) in KEY_POSITIONS.items()
            if b != a and math.hypot(xa - xb, ya - yb) <= _ADJACENCY_RADIUS
        )
    return out


_NEIGHBORS = _build_neighbors()


def keyboard_neighbors(c: str) -> frozenset[str]:
    """Letters adjacent to ``c`` on a US QWERTY keyboard (case-folded)."""
    if not isinstance(c, str) or len(c) != 1 or c.lower() not in _NEIGHBORS:
        raise CorpusError("not a letter")
    return _NEIGHBORS[c.lower()]


# --------------------------------------------------------------------------
# sentences and tokens
# --------------------------------------------------------------------------


def is_corruptible(text: str) -> bool:
    return len(text) >= 3 and all(c in string.ascii_letters for c in text)


@dataclass(frozen=True)
class Token:
    index: int
    text: str
    corruptible: bool

    @classmethod
    def make(cls, index: int, text: str) -> Token:
        return cls(index, text, is_corruptible(text))


def _make_tokens(texts: Sequence[str]) -> tuple[Token, ...]:
    if not texts:
        raise CorpusError("empty sentence")
    if len(texts) > MAX_TOKENS:
        raise CorpusError(f"sentence has {len(texts)} tokens (max {MAX_TOKENS})")
    if any(not t for t in texts):
        raise CorpusError("empty token")
    return tuple(Token.make(i, t) for i, t in enumerate(texts, start=1))


@dataclass(frozen=True)
class Sentence:
    id: str
    tokens: tuple[Token, ...]

    @classmethod
    def from_texts(cls, sentence_id: str, texts: Sequence[str]) -> Sentence:
        return cls(sentence_id, _make_tokens(texts))

    @property
    def texts(self) -> list[str]:
        return [t.text for t in self.tokens]

    def __len__(self) -> int:
        return len(self.tokens)

    def detokenize(self) -> str:
        return " ".join(self.texts)

    def corruptible_indexes(self) -> list[int]:
        return [t.index for t in self.tokens if t.corruptible]


def _is_punct(c: str) -> bool:
    return c in string.punctuation or unicodedata.category(c).startswith("P")


def tokenize(text: str, sentence_id: str = "s0") -> Sentence:
    """Whitespace tokenization with leading/trailing punctuation split off.

    Each leading or trailing punctuation character becomes its own token;
    interior characters are left alone.
    """
    if not text or not text.strip():
        raise CorpusError("empty sentence")
    out: list[str] = []
    for chunk in text.split():
        lead = 0
        while lead < len(chunk) and _is_punct(chunk[lead]):
            lead += 1
        if lead == len(chunk):
            out.extend(chunk)
            continue
        trail = len(chunk)
        while _is_punct(chunk[trail - 1]):
            trail -= 1
        out.extend(chunk[:lead])
        out.append(chunk[lead:trail])
        out.extend(chunk[trail:])
    return Sentence.from_texts(sentence_id, out)


# --------------------------------------------------------------------------
# edits
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Edit:
    word_index: int
    op: str
    char_index: int
    inserted_char: str | None = None

    def to_json(self) -> dict:
        d = {"word_index": self.word_index, "op": self.op, "char_index": self.char_index}
        if self.inserted_char is not None:
            d["inserted_char"] = self.inserted_char
        return d

    @classmethod
    def from_json(cls, d: Mapping) -> Edit:
        return cls(int(d["word_index"]), d["op"], int(d["char_index"]), d.get("inserted_char"))


def edit_is_legal(word: str, e: Edit) -> bool:
    n = len(word)
    if e.op == "delete":
        return e.inserted_char is None and 0 <= e.char_index < n and n - 1 >= 2
    if e.op == "add":
        if not (0 <= e.char_index < n) or e.inserted_char is None:
            return False
        ins, anchor = e.inserted_char, word[e.char_index]
        if len(ins) != 1 or ins not in string.ascii_letters or anchor not in string.ascii_letters:
            return False
        return ins.lower() in _NEIGHBORS[anchor.lower()]
    if e.op == "swap":
        return (
            e.inserted_char is None
            and 0 <= e.char_index < n - 1
            and word[e.char_index] != word[e.char_index + 1]
        )
    return False


def apply_edit(word: str, e: Edit) -> str:
    if not edit_is_legal(word, e):
        raise CorpusError("invalid edit")
    i = e.char_index
    if e.op == "delete":
        return word[:i] + word[i + 1 :]
    if e.op == "add":
        return word[: i + 1] + e.inserted_char + word[i + 1 :]
    return word[:i] + word[i + 1] + word[i] + word[i + 2 :]


def _match_case(c: str, anchor: str) -> str:
    return c.upper() if anchor.isupper() else c


def legal_edits(word: str) -> list[Edit]:
    """Every legal edit of ``word`` in canonical order (word_index left as 0)."""
    out = [Edit(0, "delete", i) for i in range(len(word))] if len(word) >= 3 else []
    for i, c in enumerate(word):
        if c in string.ascii_letters:
            out.extend(Edit(0, "add", i, _match_case(n, c)) for n in sorted(_NEIGHBORS[c.lower()]))
    out.extend(Edit(0, "swap", i) for i in range(len(word) - 1) if word[i] != word[i + 1])
    return out


# --------------------------------------------------------------------------
# lexicon
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Lexicon:
    words: frozenset[str]
    source_path: str

    def __post_init__(self):
        if not self.words:
            raise CorpusError("empty lexicon")

    def __contains__(self, word: str) -> bool:
        return word.lower() in self.words

    def __len__(self) -> int:
        return len(self.words)

    @classmethod
    def from_words(cls, words: Iterable[str], source: str = "<memory>") -> Lexicon:
        return cls(frozenset(w.strip().lower() for w in words if w.strip()), source)

    @classmethod
    def load(cls, path: str | os.PathLike) -> Lexicon:
        with open(path, encoding="utf-8") as f:
            words = [ln for ln in f if not ln.lstrip().startswith("#")]
        return cls.from_words(words, str(path))


# --------------------------------------------------------------------------
# randomness
# --------------------------------------------------------------------------


def derive_seed(seed: int, *parts: object) -> int:
    """Stable 64-bit seed for a sub-stream keyed by ``parts``."""
    key = "\x1f".join([str(seed), *(str(p) for p in parts)]).encode("utf-8")
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")


def stream(seed: int, *parts: object) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_seed(seed, *parts)))


# --------------------------------------------------------------------------
# corruption
# --------------------------------------------------------------------------


def _sample_edit(word: str, rng: np.random.Generator) -> Edit:
    n = len(word)
    swaps = [i for i in range(n - 1) if word[i] != word[i + 1]]
    ops = ["delete", "add"] + (["swap"] if swaps else [])
    op = ops[rng.integers(len(ops))]
    if op == "delete":
        return Edit(0, "delete", int(rng.integers(n)))
    if op == "add":
        i = int(rng.integers(n))
        choices = sorted(_NEIGHBORS[word[i].lower()])
        return Edit(0, "add", i, _match_case(choices[rng.integers(len(choices))], word[i]))
    return Edit(0, "swap", swaps[rng.integers(len(swaps))])


def corrupt_word(
    word: str, lexicon: Lexicon, rng: np.random.Generator, word_index: int = 0
) -> tuple[str, Edit]:
    """Corrupt ``word`` into a non-word with one keyboard edit.

    Rejection-samples up to ``MAX_SAMPLES`` edits, then falls back to a
    uniform pick among all legal edits that produce non-words.
    """
    if not is_corruptible(word):
        raise CorpusError(f"word not corruptible: {word!r}")
    for _ in range(MAX_SAMPLES):
        e = _sample_edit(word, rng)
        out = apply_edit(word, e)
        if out not in lexicon:
            return out, Edit(word_index, e.op, e.char_index, e.inserted_char)
    ok = [e for e in legal_edits(word) if apply_edit(word, e) not in lexicon]
    if not ok:
        raise CorpusError("word uncorruptible")
    e = ok[rng.integers(len(ok))]
    return apply_edit(word, e), Edit(word_index, e.op, e.char_index, e.inserted_char)


@dataclass(frozen=True)
class NoisySentence:
    base_id: str
    error_level: int
    tokens: tuple[Token, ...]
    edits: tuple[Edit, ...]

    @property
    def texts(self) -> list[str]:
        return [t.text for t in self.tokens]

    def detokenize(self) -> str:
        return " ".join(self.texts)

    def edit_key(self) -> tuple:
        return tuple((e.word_index, e.op, e.char_index, e.inserted_char) for e in self.edits)


def corrupt_sentence(
    s: Sentence, k: int, lexicon: Lexicon, rng: np.random.Generator
) -> NoisySentence:
    candidates = s.corruptible_indexes()
    if k < 1 or k > 3:
        raise CorpusError(f"error level must be 1..3, got {k}")
    if k > len(candidates):
        raise CorpusError("not enough corruptible words")
    picked = sorted(candidates[i] for i in rng.choice(len(candidates), size=k, replace=False))
    texts = s.texts
    edits = []
    for wi in picked:
        texts[wi - 1], e = corrupt_word(texts[wi - 1], lexicon, rng, word_index=wi)
        edits.append(e)
    return NoisySentence(s.id, k, _make_tokens(texts), tuple(edits))


# --------------------------------------------------------------------------
# corpus
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class TestCorpus:
    __test__ = False  # not a pytest class

    base: tuple[Sentence, ...]
    noisy: tuple[NoisySentence, ...]
    seed: int
    lexicon_source: str
    _by_id: dict = field(default=None, compare=False, repr=False)

    def base_by_id(self, base_id: str) -> Sentence:
        if self._by_id is None:
            object.__setattr__(self, "_by_id", {s.id: s for s in self.base})
        return self._by_id[base_id]

    def level(self, k: int) -> list[NoisySentence]:
        return [ns for ns in self.noisy if ns.error_level == k]

    def levels(self) -> list[int]:
        return sorted({ns.error_level for ns in self.noisy})


def _normalize_plan(plan: Mapping[int, int] | Iterable[tuple[int, int]]) -> list[tuple[int, int]]:
    items = list(plan.items()) if isinstance(plan, Mapping) else [tuple(p) for p in plan]
    seen = set()
    for level, count in items:
        if level not in (1, 2, 3):
            raise CorpusError(f"plan level must be 1..3, got {level}")
        if count < 0:
            raise CorpusError(f"plan count must be >= 0, got {count}")
        if level in seen:
            raise CorpusError(f"duplicate plan level {level}")
        seen.add(level)
    return sorted(items)


def build_corpus(
    base: Sequence[Sentence],
    plan: Mapping[int, int] | Iterable[tuple[int, int]],
    seed: int,
    lexicon: Lexicon,
) -> TestCorpus:
    """Generate ``count`` distinct noisy variants per level.

    Variants are dealt round-robin across the base sentences that have
    enough corruptible words for the level.  Each variant draws from its own
    stream keyed by ``(seed, base_id, level, ordinal, attempt)``.
    """
    if not base:
        raise CorpusError("no base sentences")
    ids = [s.id for s in base]
    if len(set(ids)) != len(ids):
        raise CorpusError("duplicate base sentence ids")
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    noisy: list[NoisySentence] = []
    for level, count in _normalize_plan(plan):
        if count == 0:
            continue
        eligible = [s for s in base if len(s.corruptible_indexes()) >= level]
        if not eligible:
            raise CorpusError(
                f"base sentence {base[0].id!r}: not enough corruptible words for level {level}"
            )
        seen: dict[str, set] = {s.id: set() for s in eligible}
        for v in range(count):
            s = eligible[v % len(eligible)]
            ordinal = v // len(eligible)
            for attempt in range(MAX_VARIANT_ATTEMPTS):
                rng = stream(seed, s.id, level, ordinal, attempt)
                try:
                    ns = corrupt_sentence(s, level, lexicon, rng)
                except CorpusError:
                    continue
                if ns.edit_key() not in seen[s.id]:
                    seen[s.id].add(ns.edit_key())
                    noisy.append(ns)
                    break
            else:
                raise CorpusError(
                    f"base sentence {s.id!r}: cannot produce {ordinal + 1} distinct "
                    f"level-{level} variants (edit space exhausted)"
                )
    return TestCorpus(tuple(base), tuple(noisy), seed, lexicon.source_path)


# --------------------------------------------------------------------------
# validation
# --------------------------------------------------------------------------


def one_edit_apart(original: str, corrupted: str) -> bool:
    """True if ``corrupted`` is one deletion, insertion or adjacent swap from ``original``."""
    a, b = original, corrupted
    if a == b:
        return False
    if len(b) == len(a) - 1:
        return any(a[:i] + a[i + 1 :] == b for i in range(len(a)))
    if len(b) == len(a) + 1:
        return any(b[:i] + b[i + 1 :] == a for i in range(len(b)))
    if len(a) == len(b):
        diff = [i for i in range(len(a)) if a[i] != b[i]]
        return len(diff) == 2 and diff[1] == diff[0] + 1 and a[diff[0]] == b[diff[1]] and a[diff[1]] == b[diff[0]]
    return False


def check_noisy(ns: NoisySentence, base: Sentence, lexicon: Lexicon | None = None) -> None:
    """Raise ``CorpusError`` naming the first violated invariant."""
    if ns.error_level not in (1, 2, 3):
        raise CorpusError(f"invariant error_level in {{1,2,3}} violated: {ns.error_level}")
    if len(ns.edits) != ns.error_level:
        raise CorpusError("invariant len(edits) == error_level violated")
    if len(ns.tokens) != len(base.tokens):
        raise CorpusError("invariant token count preserved violated")
    edited = {e.word_index for e in ns.edits}
    if len(edited) != len(ns.edits):
        raise CorpusError("invariant distinct edit word_indexes violated")
    for e in ns.edits:
        if not 1 <= e.word_index <= len(base.tokens) or e.op not in OPS:
            raise CorpusError("invariant edit well-formed violated")
        orig = base.tokens[e.word_index - 1].text
        if not is_corruptible(orig):
            raise CorpusError("invariant edited word corruptible violated")
        try:
            expected = apply_edit(orig, e)
        except CorpusError:
            raise CorpusError("invariant edit legal violated") from None
        if ns.tokens[e.word_index - 1].text != expected:
            raise CorpusError("invariant token equals edited original violated")
        if lexicon is not None and expected in lexicon:
            raise CorpusError("invariant corrupted word is non-word violated")
    for bt, nt in zip(base.tokens, ns.tokens):
        if bt.index not in edited and bt.text != nt.text:
            raise CorpusError("invariant uncorrupted tokens identical violated")


def validate_corpus(c: TestCorpus, lexicon: Lexicon | None = None) -> None:
    ids = [s.id for s in c.base]
    if len(set(ids)) != len(ids):
        raise CorpusError("invariant unique base ids violated")
    by_id = {s.id: s for s in c.base}
    for ns in c.noisy:
        if ns.base_id not in by_id:
            raise CorpusError(f"invariant base_id resolves violated: {ns.base_id!r}")
        check_noisy(ns, by_id[ns.base_id], lexicon)


# --------------------------------------------------------------------------
# serialization
# --------------------------------------------------------------------------


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps_corpus(c: TestCorpus) -> str:
    lines = [json.dumps({"seed": c.seed, "lexicon_source": c.lexicon_source}, ensure_ascii=False)]
    for s in c.base:
        lines.append(json.dumps({"kind": "base", "id": s.id, "tokens": s.texts}, ensure_ascii=False))
    for ns in c.noisy:
        rec = {
            "kind": "noisy",
            "base_id": ns.base_id,
            "error_level": ns.error_level,
            "tokens": ns.texts,
            "edits": [e.to_json() for e in ns.edits],
        }
        lines.append(json.dumps(rec, ensure_ascii=False))
    return "\n".join(lines) + "\n"


def write_corpus(c: TestCorpus, path: str | os.PathLike) -> None:
    validate_corpus(c)
    atomic_write_text(path, dumps_corpus(c))


def loads_corpus(text: str) -> TestCorpus:
    header = None
    base: list[Sentence] = []
    noisy: list[NoisySentence] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusFormatError(f"invalid JSON ({exc.msg})", lineno) from None
        if not isinstance(rec, dict):
            raise CorpusFormatError("record is not an object", lineno)
        try:
            if header is None:
                if "kind" in rec:
                    raise CorpusFormatError("missing header record", lineno)
                seed = rec["seed"]
                if not isinstance(seed, int) or not 0 <= seed < 2**64:
                    raise CorpusFormatError("seed must be an unsigned 64-bit integer", lineno)
                header = (seed, str(rec["lexicon_source"]))
            elif rec.get("kind") == "base":
                base.append(Sentence.from_texts(str(rec["id"]), [str(t) for t in rec["tokens"]]))
            elif rec.get("kind") == "noisy":
                level = rec["error_level"]
                if level not in (1, 2, 3) or isinstance(level, bool):
                    raise CorpusError(f"invariant error_level in {{1,2,3}} violated: {level!r}")
                noisy.append(
                    NoisySentence(
                        str(rec["base_id"]),
                        level,
                        _make_tokens([str(t) for t in rec["tokens"]]),
                        tuple(Edit.from_json(e) for e in rec["edits"]),
                    )
                )
            else:
                raise CorpusFormatError(f"unknown record kind {rec.get('kind')!r}", lineno)
        except CorpusFormatError:
            raise
        except CorpusError as exc:
            raise CorpusFormatError(str(exc), lineno) from None
        except (KeyError, TypeError, ValueError) as exc:
            raise CorpusFormatError(f"malformed record ({exc})", lineno) from None
    if header is None:
        raise CorpusFormatError("missing header record", 1)
    c = TestCorpus(tuple(base), tuple(noisy), header[0], header[1])
    validate_corpus(c)
    return c


def read_corpus(path: str | os.PathLike) -> TestCorpus:
    return loads_corpus(Path(path).read_text(encoding="utf-8"))


def export_plaintext(c: TestCorpus, stem: str | os.PathLike) -> list[Path]:
    """Write ``<stem>.cs.txt`` plus, per level k, ``<stem>.ns{k}.txt`` and the
    line-aligned clean counterparts ``<stem>.cs{k}.txt``."""
    stem = str(stem)
    written = []
    path = Path(f"{stem}.cs.txt")
    atomic_write_text(path, "".join(s.detokenize() + "\n" for s in c.base))
    written.append(path)
    for k in c.levels():
        level = c.level(k)
        ns_path, cs_path = Path(f"{stem}.ns{k}.txt"), Path(f"{stem}.cs{k}.txt")
        atomic_write_text(ns_path, "".join(ns.detokenize() + "\n" for ns in level))
        atomic_write_text(cs_path, "".join(c.base_by_id(ns.base_id).detokenize() + "\n" for ns in level))
        written += [ns_path, cs_path]
    return written
