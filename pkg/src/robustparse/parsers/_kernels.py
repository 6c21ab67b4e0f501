"""Viterbi CYK chart kernels.

Two implementations of the same fill: a numba ``@njit`` loop and a
vectorized numpy fallback.  Both visit candidates in (split, rule) order and
keep the first strict maximum, so they produce bit-identical charts.

Set ``ROBUSTPARSE_DISABLE_NUMBA=1`` to force the numpy path.  Results do not
depend on the backend.
"""

from __future__ import annotations

import os

import numpy as np

NEG_INF = -np.inf

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False


def _disabled() -> bool:
    return os.environ.get("ROBUSTPARSE_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")


def viterbi_chart_numpy(lex, lhs_start, rhs1, rhs2, logp):
    """Fill the chart.

    Parameters
    ----------
    lex : (n, nsym) float64
        Log-probability of each preterminal over each single word.
    lhs_start : (nsym + 1,) int64
        Binary rules are grouped by lhs; rules of symbol A occupy
        ``lhs_start[A]:lhs_start[A + 1]``.
    rhs1, rhs2 : (nrules,) int64
    logp : (nrules,) float64

    Returns
    -------
    score : (n, n + 1, nsym) float64, ``score[i, j, A]`` for span ``[i, j)``
    back_split, back_rule : (n, n + 1, nsym) int64, -1 where unset
    """
    n, nsym = lex.shape
    nrules = rhs1.shape[0]
    score = np.full((n, n + 1, nsym), NEG_INF)
    back_split = np.full((n, n + 1, nsym), -1, dtype=np.int64)
    back_rule = np.full((n, n + 1, nsym), -1, dtype=np.int64)
    for i in range(n):
        score[i, i + 1] = lex[i]
    counts = np.diff(lhs_start)
    has_rules = np.flatnonzero(counts > 0)
    if nrules == 0:
        return score, back_split, back_rule
    starts = lhs_start[has_rules]
    group = np.repeat(np.arange(has_rules.size), counts[has_rules])
    rule_ids = np.arange(nrules)
    big = np.iinfo(np.int64).max
    for span in range(2, n + 1):
        for i in range(n - span + 1):
            j = i + span
            left = score[i, i + 1 : j]  # (nk, nsym), split k = i+1 .. j-1
            right = score[i + 1 : j, j]
            cand = left[:, rhs1] + right[:, rhs2] + logp  # (nk, nrules)
            rule_max = cand.max(axis=0)
            rule_k = cand.argmax(axis=0)
            gmax = np.maximum.reduceat(rule_max, starts)
            # among rules attaining the group max: smallest split, then smallest rule
            key = np.where(rule_max == gmax[group], rule_k * nrules + rule_ids, big)
            win = np.minimum.reduceat(key, starts)
            ok = gmax > NEG_INF
            syms = has_rules[ok]
            score[i, j, syms] = gmax[ok]
            back_split[i, j, syms] = i + 1 + win[ok] // nrules
            back_rule[i, j, syms] = win[ok] % nrules
    return score, back_split, back_rule


if HAVE_NUMBA:

    @njit(cache=True)
    def _fill_numba(lex, lhs_start, rhs1, rhs2, logp):
        n, nsym = lex.shape
        score = np.full((n, n + 1, nsym), -np.inf)
        back_split = np.full((n, n + 1, nsym), -1, dtype=np.int64)
        back_rule = np.full((n, n + 1, nsym), -1, dtype=np.int64)
        for i in range(n):
            for a in range(nsym):
                score[i, i + 1, a] = lex[i, a]
        for span in range(2, n + 1):
            for i in range(n - span + 1):
                j = i + span
                for a in range(nsym):
                    best = -np.inf
                    bk = -1
                    br = -1
                    for k in range(i + 1, j):
                        for r in range(lhs_start[a], lhs_start[a + 1]):
                            s = score[i, k, rhs1[r]] + score[k, j, rhs2[r]] + logp[r]
                            if s > best:
                                best = s
                                bk = k
                                br = r
                    score[i, j, a] = best
                    back_split[i, j, a] = bk
                    back_rule[i, j, a] = br
        return score, back_split, back_rule

    def viterbi_chart_numba(lex, lhs_start, rhs1, rhs2, logp):
        return _fill_numba(
            np.ascontiguousarray(lex, dtype=np.float64),
            np.ascontiguousarray(lhs_start, dtype=np.int64),
            np.ascontiguousarray(rhs1, dtype=np.int64),
            np.ascontiguousarray(rhs2, dtype=np.int64),
            np.ascontiguousarray(logp, dtype=np.float64),
        )

else:  # pragma: no cover
    viterbi_chart_numba = None


def backend() -> str:
    return "numba" if HAVE_NUMBA and not _disabled() else "numpy"


def viterbi_chart(lex, lhs_start, rhs1, rhs2, logp, use: str | None = None):
    """Dispatch to the selected backend (``use`` overrides the env flag)."""
    if (use or backend()) == "numba":
        if viterbi_chart_numba is None:
            raise RuntimeError("numba backend requested but numba is not installed")
        return viterbi_chart_numba(lex, lhs_start, rhs1, rhs2, logp)
    return viterbi_chart_numpy(lex, lhs_start, rhs1, rhs2, logp)
