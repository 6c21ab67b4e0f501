"""Parser-output graphs and the exact-match predicates used for scoring."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

DIRECTED = "directed"
UNDIRECTED = "undirected"
MODES = (DIRECTED, UNDIRECTED)


class GraphError(ValueError):
    pass


class IncomparableGraphs(GraphError):
    def __init__(self, detail: str = ""):
        super().__init__("incomparable graphs" + (f": {detail}" if detail else ""))


@dataclass(frozen=True, order=True)
class LabeledEdge:
    """An arc ``a -> b``; in directed mode ``a`` is the head (0 for the root
    pseudo-edge), in undirected mode ``a < b``."""

    a: int
    b: int
    label: str = "_"


@dataclass(frozen=True)
class ParseGraph:
    n_tokens: int
    mode: str
    edges: frozenset[LabeledEdge]
    forms: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise GraphError(f"unknown mode {self.mode!r}")
        if self.n_tokens < 1:
            raise GraphError("n_tokens must be >= 1")
        if self.forms and len(self.forms) != self.n_tokens:
            raise GraphError("forms length != n_tokens")
        lo = 0 if self.mode == DIRECTED else 1
        heads: dict[int, int] = {}
        for e in self.edges:
            if not e.label:
                raise GraphError("empty label")
            if e.a == e.b:
                raise GraphError(f"self-loop on token {e.a}")
            if not (lo <= e.a <= self.n_tokens and 1 <= e.b <= self.n_tokens):
                raise GraphError(f"edge endpoint out of range: {e}")
            if self.mode == UNDIRECTED and e.a > e.b:
                raise GraphError(f"undirected edge not canonical: {e}")
            if self.mode == DIRECTED:
                if e.b in heads:
                    raise GraphError(f"token {e.b} has more than one head")
                heads[e.b] = e.a

    @classmethod
    def build(
        cls,
        n_tokens: int,
        mode: str,
        edges: Iterable[tuple[int, int, str] | LabeledEdge],
        forms: Iterable[str] = (),
    ) -> ParseGraph:
        """Construct a graph, canonicalizing undirected endpoints to ``(min, max)``."""
        out = set()
        for e in edges:
            a, b, label = (e.a, e.b, e.label) if isinstance(e, LabeledEdge) else e
            if mode == UNDIRECTED and a > b:
                a, b = b, a
            out.add(LabeledEdge(a, b, label))
        return cls(n_tokens, mode, frozenset(out), tuple(forms))

    @property
    def root_index(self) -> int | None:
        if self.mode != DIRECTED:
            return None
        roots = [e.b for e in self.edges if e.a == 0]
        return min(roots) if roots else None

    def head_of(self, dependent: int) -> LabeledEdge | None:
        for e in self.edges:
            if e.b == dependent:
                return e
        return None

    def sorted_edges(self) -> list[LabeledEdge]:
        return sorted(self.edges)


def canonicalize(g: ParseGraph) -> ParseGraph:
    return ParseGraph.build(g.n_tokens, g.mode, g.edges, g.forms)


def unlabeled_edges(g: ParseGraph, include_root: bool = False) -> frozenset[tuple[int, int]]:
    """Endpoint pairs with labels dropped.

    The root pseudo-edge ``(0, r)`` is omitted unless ``include_root``.
    """
    return frozenset((e.a, e.b) for e in g.edges if include_root or e.a != 0)


def _check_comparable(g1: ParseGraph, g2: ParseGraph) -> None:
    if g1.mode != g2.mode:
        raise IncomparableGraphs(f"mode {g1.mode} vs {g2.mode}")
    if g1.n_tokens != g2.n_tokens:
        raise IncomparableGraphs(f"{g1.n_tokens} vs {g2.n_tokens} tokens")


def structure_equal(g1: ParseGraph, g2: ParseGraph) -> bool:
    # the root pseudo-edge counts: moving the root is a structural change
    _check_comparable(g1, g2)
    return unlabeled_edges(g1, include_root=True) == unlabeled_edges(g2, include_root=True)


def labeled_equal(g1: ParseGraph, g2: ParseGraph) -> bool:
    _check_comparable(g1, g2)
    return g1.edges == g2.edges


# --------------------------------------------------------------------------
# outcomes and the adapter wire format
# --------------------------------------------------------------------------

PARSED = "parsed"
FAILED = "failed"


@dataclass(frozen=True)
class ParseOutcome:
    status: str
    graph: ParseGraph | None = None
    failure_reason: str | None = None

    def __post_init__(self):
        if self.status == PARSED and (self.graph is None or self.failure_reason is not None):
            raise GraphError("parsed outcome needs a graph and no failure reason")
        if self.status == FAILED and (self.graph is not None or not self.failure_reason):
            raise GraphError("failed outcome needs a reason and no graph")
        if self.status not in (PARSED, FAILED):
            raise GraphError(f"unknown status {self.status!r}")

    @classmethod
    def parsed(cls, graph: ParseGraph) -> ParseOutcome:
        return cls(PARSED, graph=graph)

    @classmethod
    def failed(cls, reason: str) -> ParseOutcome:
        return cls(FAILED, failure_reason=reason or "unspecified")

    @property
    def ok(self) -> bool:
        return self.status == PARSED


MALFORMED = "malformed output"


def _parse_rows(lines: list[str], mode: str, n_tokens: int | None) -> ParseGraph:
    rows = []
    for ln in lines:
        cols = ln.split("\t")
        if len(cols) != 4:
            raise ValueError("wrong column count")
        idx, form, head, label = int(cols[0]), cols[1], int(cols[2]), cols[3]
        if not label or idx < 1 or head < 0:
            raise ValueError("bad row")
        rows.append((idx, form, head, label))
    if mode == DIRECTED:
        if [r[0] for r in rows] != list(range(1, len(rows) + 1)):
            raise ValueError("indexes not consecutive")
        if n_tokens is not None and n_tokens != len(rows):
            raise ValueError("token count mismatch")
        return ParseGraph.build(
            len(rows), mode, [(h, i, lab) for i, _, h, lab in rows], [r[1] for r in rows]
        )
    if any(h == 0 for _, _, h, _ in rows):
        raise ValueError("root link in undirected mode")
    n = n_tokens if n_tokens is not None else max(max(i, h) for i, _, h, _ in rows)
    forms = ["_"] * n
    for i, form, _, _ in rows:
        forms[i - 1] = form
    return ParseGraph.build(n, mode, [(i, h, lab) for i, _, h, lab in rows], forms)


def read_conll_block(text: str | bytes, mode: str = DIRECTED, n_tokens: int | None = None) -> ParseOutcome:
    """Read one adapter output block into an outcome.

    Never raises on bad input: misbehaving adapters produce failed outcomes.
    Undirected blocks list links, so ``n_tokens`` should be supplied when
    known; otherwise it is inferred from the largest endpoint.
    """
    try:
        if isinstance(text, bytes):
            text = text.decode("utf-8", errors="replace")
        lines = [ln.rstrip("\r") for ln in text.split("\n")]
        while lines and not lines[-1].strip():
            lines.pop()
        while lines and not lines[0].strip():
            lines.pop(0)
        if not lines:
            return ParseOutcome.failed("empty output")
        if lines[0].startswith("#FAIL"):
            return ParseOutcome.failed(lines[0][len("#FAIL"):].strip() or "unspecified")
        return ParseOutcome.parsed(_parse_rows(lines, mode, n_tokens))
    except Exception:
        return ParseOutcome.failed(MALFORMED)


def write_conll_block(outcome: ParseOutcome) -> str:
    """Render an outcome as one blank-line-terminated wire-format block."""
    if not outcome.ok:
        reason = " ".join(outcome.failure_reason.split())
        return f"#FAIL {reason}\n\n"
    g = outcome.graph
    forms = g.forms or ("_",) * g.n_tokens
    if g.mode == DIRECTED:
        heads = {e.b: e for e in g.edges}
        if len(heads) != g.n_tokens:
            raise GraphError("directed graph must give every token a head to be serialized")
        rows = [f"{i}\t{forms[i - 1]}\t{heads[i].a}\t{heads[i].label}" for i in range(1, g.n_tokens + 1)]
    else:
        rows = [f"{e.a}\t{forms[e.a - 1]}\t{e.b}\t{e.label}" for e in g.sorted_edges()]
    return "".join(r + "\n" for r in rows) + "\n"


def split_blocks(text: str) -> list[str]:
    """Split an outcomes file into blocks (blank-line separated)."""
    blocks, cur = [], []
    for ln in text.split("\n"):
        if ln.strip():
            cur.append(ln)
        elif cur:
            blocks.append("\n".join(cur) + "\n")
            cur = []
    if cur:
        blocks.append("\n".join(cur) + "\n")
    return blocks
