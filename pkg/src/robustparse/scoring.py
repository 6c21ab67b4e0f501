"""Robustness scores from clean/noisy parse pairs.

A pair is accepted by the unlabeled measure when both analyses have exactly
the same structure, and by the labeled measure when labels match as well.
A parse failure on either side rejects the pair.  Scores are kept in full
precision; rounding happens only when formatting.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Sequence

from .parsegraph import IncomparableGraphs, ParseOutcome, labeled_equal, structure_equal


class ScoringError(ValueError):
    pass


@dataclass(frozen=True)
class PairVerdict:
    base_id: str
    error_level: int
    cs_failed: bool = False
    ns_failed: bool = False
    structural_match: bool = False
    labeled_match: bool = False
    reason: str | None = None

    def __post_init__(self):
        if self.labeled_match and not self.structural_match:
            raise ScoringError("labeled match without structural match")
        if (self.cs_failed or self.ns_failed) and self.structural_match:
            raise ScoringError("failed pair cannot match")

    @property
    def failed(self) -> bool:
        return self.cs_failed or self.ns_failed


def compare_pair(cs: ParseOutcome, ns: ParseOutcome, level: int, base_id: str) -> PairVerdict:
    if not cs.ok or not ns.ok:
        return PairVerdict(base_id, level, cs_failed=not cs.ok, ns_failed=not ns.ok)
    try:
        structural = structure_equal(cs.graph, ns.graph)
        labeled = labeled_equal(cs.graph, ns.graph)
    except IncomparableGraphs as exc:
        return PairVerdict(base_id, level, reason=str(exc))
    return PairVerdict(base_id, level, structural_match=structural, labeled_match=labeled)


def _pct(num: int, den: int) -> float | None:
    return 100.0 * num / den if den else None


@dataclass(frozen=True)
class LevelScore:
    level: int
    n_pairs: int
    n_failures: int
    n_structural: int
    n_labeled: int

    def __post_init__(self):
        if self.n_pairs <= 0:
            raise ScoringError("level has no pairs")
        if not 0 <= self.n_labeled <= self.n_structural <= self.n_pairs - self.n_failures:
            raise ScoringError(f"inconsistent counts for level {self.level}")

    @property
    def unlabeled_incl(self) -> float:
        return _pct(self.n_structural, self.n_pairs)

    @property
    def labeled_incl(self) -> float:
        return _pct(self.n_labeled, self.n_pairs)

    @property
    def unlabeled_excl(self) -> float | None:
        """Score over pairs without failures; None if every pair failed."""
        return _pct(self.n_structural, self.n_pairs - self.n_failures)

    @property
    def labeled_excl(self) -> float | None:
        return _pct(self.n_labeled, self.n_pairs - self.n_failures)

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "n_pairs": self.n_pairs,
            "n_failures": self.n_failures,
            "n_structural": self.n_structural,
            "n_labeled": self.n_labeled,
            "unlabeled_incl": self.unlabeled_incl,
            "labeled_incl": self.labeled_incl,
            "unlabeled_excl": self.unlabeled_excl,
            "labeled_excl": self.labeled_excl,
        }

    @classmethod
    def from_json(cls, d: dict) -> LevelScore:
        return cls(d["level"], d["n_pairs"], d["n_failures"], d["n_structural"], d["n_labeled"])


def score_level(verdicts: Sequence[PairVerdict]) -> LevelScore:
    if not verdicts:
        raise ScoringError("no verdicts to score")
    levels = {v.error_level for v in verdicts}
    if len(levels) != 1:
        raise ScoringError(f"verdicts span several levels: {sorted(levels)}")
    return LevelScore(
        level=levels.pop(),
        n_pairs=len(verdicts),
        n_failures=sum(v.failed for v in verdicts),
        n_structural=sum(v.structural_match for v in verdicts),
        n_labeled=sum(v.labeled_match for v in verdicts),
    )


def rescore_inclusive(excl_score: float, n_pairs: int, n_failures: int) -> float:
    """Convert a failure-exclusive score to one that counts failures as rejections."""
    if n_pairs <= 0 or not 0 <= n_failures <= n_pairs:
        raise ScoringError("need n_pairs > 0 and 0 <= n_failures <= n_pairs")
    return excl_score * (n_pairs - n_failures) / n_pairs


def degradation(level1_score: float, level3_score: float) -> float:
    """Relative drop from the level-1 score, in percent of the level-1 score."""
    if level1_score <= 0:
        raise ScoringError("undefined degradation")
    return 100.0 * (level1_score - level3_score) / level1_score


def fscore(precision: float, recall: float) -> float:
    if precision + recall <= 0:
        raise ScoringError("precision + recall must be positive")
    return 2.0 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class RobustnessReport:
    parser: str
    levels: tuple[LevelScore, ...]
    notes: tuple[str, ...] = field(default=())

    @property
    def n_pairs(self) -> int:
        return sum(s.n_pairs for s in self.levels)

    @property
    def overall_unlabeled(self) -> float:
        return _pct(sum(s.n_structural for s in self.levels), self.n_pairs)

    @property
    def overall_labeled(self) -> float:
        return _pct(sum(s.n_labeled for s in self.levels), self.n_pairs)

    def level(self, k: int) -> LevelScore | None:
        for s in self.levels:
            if s.level == k:
                return s
        return None

    def degradation(self, metric: str, first: int = 1, last: int = 3) -> float | None:
        a, b = self.level(first), self.level(last)
        if a is None or b is None:
            return None
        sa, sb = getattr(a, f"{metric}_incl"), getattr(b, f"{metric}_incl")
        return degradation(sa, sb) if sa > 0 else None

    def to_json(self) -> dict:
        steps = {}
        ks = [s.level for s in self.levels]
        for a, b in zip(ks, ks[1:]):
            steps[f"{a}-{b}"] = {m: self.degradation(m, a, b) for m in ("unlabeled", "labeled")}
        return {
            "parser": self.parser,
            "levels": [s.to_json() for s in self.levels],
            "overall": {"unlabeled": self.overall_unlabeled, "labeled": self.overall_labeled},
            "degradation": {m: self.degradation(m) for m in ("unlabeled", "labeled")},
            "degradation_steps": steps,
            "notes": list(self.notes),
        }

    @classmethod
    def from_json(cls, d: dict) -> RobustnessReport:
        return cls(
            d["parser"],
            tuple(LevelScore.from_json(x) for x in d["levels"]),
            tuple(d.get("notes", ())),
        )


def aggregate(levels: Iterable[LevelScore], parser: str = "", notes: Iterable[str] = ()) -> RobustnessReport:
    """Pair-weighted overall scores from per-level counts."""
    levels = sorted(levels, key=lambda s: s.level)
    if not levels:
        raise ScoringError("no levels to aggregate")
    ks = [s.level for s in levels]
    if len(set(ks)) != len(ks):
        raise ScoringError(f"duplicate level in {ks}")
    return RobustnessReport(parser, tuple(levels), tuple(notes))


def score_verdicts(verdicts: Iterable[PairVerdict], parser: str = "", notes: Iterable[str] = ()) -> RobustnessReport:
    by_level: dict[int, list[PairVerdict]] = {}
    for v in verdicts:
        by_level.setdefault(v.error_level, []).append(v)
    return aggregate((score_level(vs) for vs in by_level.values()), parser, notes)


def check_report(r: RobustnessReport, tol: float = 1e-9) -> None:
    """Assert the scoring invariants; raise ScoringError on violation."""
    for s in r.levels:
        if not 0 <= s.labeled_incl <= s.unlabeled_incl <= 100:
            raise ScoringError(f"level {s.level}: labeled > unlabeled or out of range")
        if s.unlabeled_excl is not None:
            if s.labeled_excl > s.unlabeled_excl:
                raise ScoringError(f"level {s.level}: labeled_excl > unlabeled_excl")
            for m in ("unlabeled", "labeled"):
                incl = rescore_inclusive(getattr(s, f"{m}_excl"), s.n_pairs, s.n_failures)
                if abs(incl - getattr(s, f"{m}_incl")) > tol:
                    raise ScoringError(f"level {s.level}: {m} incl/excl mismatch")
    if r.overall_labeled > r.overall_unlabeled:
        raise ScoringError("overall labeled > unlabeled")


def fmt(x: float | None, places: int = 2) -> str:
    """Round half-up for presentation; empty string for missing values."""
    if x is None:
        return ""
    q = Decimal(1).scaleb(-places)
    return str(Decimal(repr(x)).quantize(q, rounding=ROUND_HALF_UP))

