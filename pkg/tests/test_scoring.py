import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robustparse.parsegraph import DIRECTED, ParseGraph, ParseOutcome
from robustparse.scoring import (
    LevelScore,
    PairVerdict,
    RobustnessReport,
    ScoringError,
    aggregate,
    check_report,
    compare_pair,
    degradation,
    fmt,
    fscore,
    rescore_inclusive,
    score_level,
    score_verdicts,
)


def graph(labels):
    n = len(labels)
    return ParseGraph.build(n, DIRECTED, [(i - 1, i, lab) for i, lab in enumerate(labels, start=1)])


def verdicts(level, n, failures, structural, labeled):
    out = [PairVerdict("b", level, cs_failed=True) for _ in range(failures)]
    out += [PairVerdict("b", level, structural_match=True, labeled_match=True) for _ in range(labeled)]
    out += [PairVerdict("b", level, structural_match=True) for _ in range(structural - labeled)]
    out += [PairVerdict("b", level) for _ in range(n - len(out))]
    return out


class TestComparePair:
    g = ParseOutcome.parsed(graph(["root", "det", "dobj"]))

    def test_identity(self):
        v = compare_pair(self.g, self.g, 1, "s1")
        assert v.structural_match and v.labeled_match

    def test_failure_rejects(self):
        v = compare_pair(self.g, ParseOutcome.failed("timeout"), 2, "s1")
        assert (v.structural_match, v.labeled_match) == (False, False)
        assert v.ns_failed and not v.cs_failed

    def test_label_only(self):
        other = ParseOutcome.parsed(graph(["root", "det", "ncsubj"]))
        v = compare_pair(self.g, other, 1, "s1")
        assert (v.structural_match, v.labeled_match) == (True, False)

    def test_incomparable(self):
        v = compare_pair(self.g, ParseOutcome.parsed(graph(["root"])), 1, "s1")
        assert not v.structural_match and "incomparable" in v.reason

    def test_verdict_invariants(self):
        with pytest.raises(ScoringError):
            PairVerdict("b", 1, labeled_match=True)
        with pytest.raises(ScoringError):
            PairVerdict("b", 1, cs_failed=True, structural_match=True)


class TestScoreLevel:
    def test_cc_unlabeled_rescored(self):
        s = score_level(verdicts(1, 255, 23, 186, 155))
        assert s.unlabeled_incl == pytest.approx(72.94, abs=0.005)
        assert s.unlabeled_excl == pytest.approx(80.17, abs=0.005)
        assert s.labeled_incl == pytest.approx(60.78, abs=0.005)
        assert s.labeled_excl == pytest.approx(66.81, abs=0.005)

    def test_perfect(self):
        s = score_level(verdicts(2, 10, 0, 10, 10))
        assert (s.unlabeled_incl, s.unlabeled_excl, s.labeled_incl, s.labeled_excl) == (100, 100, 100, 100)

    def test_all_failed(self):
        s = score_level(verdicts(3, 4, 4, 0, 0))
        assert s.unlabeled_incl == 0 and s.unlabeled_excl is None

    def test_empty(self):
        with pytest.raises(ScoringError):
            score_level([])

    def test_mixed_levels(self):
        with pytest.raises(ScoringError):
            score_level(verdicts(1, 2, 0, 0, 0) + verdicts(2, 2, 0, 0, 0))


class TestRescore:
    @pytest.mark.parametrize("excl,incl", [(80.17, 72.94), (66.81, 60.78)])
    def test_rescored(self, excl, incl):
        assert rescore_inclusive(excl, 255, 23) == pytest.approx(incl, abs=0.01)

    def test_identity(self):
        assert rescore_inclusive(55.5, 10, 0) == 55.5

    @pytest.mark.parametrize("n,f", [(0, 0), (10, 11), (10, -1)])
    def test_preconditions(self, n, f):
        with pytest.raises(ScoringError):
            rescore_inclusive(50, n, f)


class TestAggregate:
    def test_cc_unlabeled(self):
        levels = [LevelScore(k, n, 0, a, 0) for k, n, a in [(1, 255, 186), (2, 94, 59), (3, 94, 38)]]
        assert aggregate(levels).overall_unlabeled == pytest.approx(63.88, abs=0.01)

    def test_statccg_labeled(self):
        levels = [LevelScore(k, n, 0, a, a) for k, n, a in [(1, 255, 150), (2, 94, 26), (3, 94, 19)]]
        assert aggregate(levels).overall_labeled == pytest.approx(44.02, abs=0.01)

    def test_pair_weighted_not_level_averaged(self):
        levels = [LevelScore(1, 100, 0, 100, 0), LevelScore(2, 10, 0, 0, 0)]
        assert aggregate(levels).overall_unlabeled == pytest.approx(100 * 100 / 110)

    def test_single_level(self):
        assert aggregate([LevelScore(1, 5, 0, 5, 5)]).overall_unlabeled == 100

    def test_duplicate(self):
        with pytest.raises(ScoringError):
            aggregate([LevelScore(1, 5, 0, 5, 5), LevelScore(1, 5, 0, 5, 5)])


class TestDegradation:
    @pytest.mark.parametrize("l1,l3,expected", [(72.94, 40.43, 44.6), (40.39, 8.51, 78.9), (29.41, 1.06, 96.4)])
    def test_results_prose(self, l1, l3, expected):
        assert degradation(l1, l3) == pytest.approx(expected, abs=0.1)

    def test_identities(self):
        assert degradation(37.0, 37.0) == 0
        assert degradation(37.0, 0) == 100

    def test_zero(self):
        with pytest.raises(ScoringError, match="undefined degradation"):
            degradation(0, 0)


class TestFscore:
    @pytest.mark.parametrize("p,r,f", [(86.6, 92.1, 89.3), (54.6, 43.7, 48.5)])
    def test_results(self, p, r, f):
        assert fscore(p, r) == pytest.approx(f, abs=0.05)

    @given(st.floats(min_value=0.01, max_value=100))
    def test_symmetric_identity(self, p):
        assert fscore(p, p) == pytest.approx(p)

    def test_zero(self):
        with pytest.raises(ScoringError):
            fscore(0, 0)


@pytest.mark.parametrize(
    "x,expected", [(72.945, "72.95"), (72.944999, "72.94"), (100.0, "100.00"), (0.125, "0.13"), (None, "")]
)
def test_fmt_half_up(x, expected):
    assert fmt(x) == expected


# --------------------------------------------------------------------------
# properties over random verdict sets
# --------------------------------------------------------------------------

verdict = st.builds(
    lambda level, kind: {
        "fail_cs": PairVerdict("b", level, cs_failed=True),
        "fail_ns": PairVerdict("b", level, ns_failed=True),
        "none": PairVerdict("b", level),
        "struct": PairVerdict("b", level, structural_match=True),
        "both": PairVerdict("b", level, structural_match=True, labeled_match=True),
    }[kind],
    st.integers(1, 3),
    st.sampled_from(["fail_cs", "fail_ns", "none", "struct", "both"]),
)
verdict_sets = st.lists(verdict, min_size=1, max_size=60)


@settings(max_examples=300)
@given(verdict_sets)
def test_labeled_le_unlabeled(vs):
    r = score_verdicts(vs)
    check_report(r)
    assert r.overall_labeled <= r.overall_unlabeled


@settings(max_examples=300)
@given(verdict_sets)
def test_incl_excl_identity(vs):
    for s in score_verdicts(vs).levels:
        if s.unlabeled_excl is not None:
            assert abs(rescore_inclusive(s.unlabeled_excl, s.n_pairs, s.n_failures) - s.unlabeled_incl) < 1e-9
            assert abs(rescore_inclusive(s.labeled_excl, s.n_pairs, s.n_failures) - s.labeled_incl) < 1e-9


@settings(max_examples=200)
@given(verdict_sets, st.randoms())
def test_order_and_partition_invariance(vs, rnd):
    shuffled = list(vs)
    rnd.shuffle(shuffled)
    a, b = score_verdicts(vs), score_verdicts(shuffled)
    assert a.overall_unlabeled == b.overall_unlabeled and a.overall_labeled == b.overall_labeled
    # aggregating per-level scores == scoring the whole list at once
    whole_u = 100 * sum(v.structural_match for v in vs) / len(vs)
    assert a.overall_unlabeled == pytest.approx(whole_u, abs=1e-12)


@settings(max_examples=200)
@given(verdict_sets, st.data())
def test_failure_injection_monotone(vs, data):
    matching = [i for i, v in enumerate(vs) if v.structural_match]
    if not matching:
        return
    i = data.draw(st.sampled_from(matching))
    injected = list(vs)
    injected[i] = PairVerdict(vs[i].base_id, vs[i].error_level, ns_failed=True)
    before, after = score_verdicts(vs), score_verdicts(injected)
    assert after.overall_unlabeled <= before.overall_unlabeled
    assert after.overall_labeled <= before.overall_labeled
    for s0 in before.levels:
        s1 = after.level(s0.level)
        assert s1.unlabeled_incl <= s0.unlabeled_incl and s1.labeled_incl <= s0.labeled_incl
        # an exclusive score only drops if the pair matched under that metric;
        # removing a non-matching pair from its denominator raises it
        if s1.unlabeled_excl is not None:
            assert s1.unlabeled_excl <= s0.unlabeled_excl
            if vs[i].labeled_match:
                assert s1.labeled_excl <= s0.labeled_excl


def test_report_json_round_trip():
    r = aggregate([LevelScore(1, 255, 23, 186, 155), LevelScore(3, 94, 0, 38, 14)], "cc", ["x"])
    d = r.to_json()
    assert RobustnessReport.from_json(d) == r
    assert d["degradation"]["unlabeled"] == pytest.approx(degradation(r.level(1).unlabeled_incl, r.level(3).unlabeled_incl))
    assert set(d["levels"][0]) >= {"level", "n_pairs", "n_failures", "unlabeled_incl", "labeled_incl", "unlabeled_excl", "labeled_excl"}
