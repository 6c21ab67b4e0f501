"""Command-line front end: ``corrupt``, ``parse``, ``score``, ``report``.

Exit codes: 0 success (parse failures are data), 1 usage or configuration
error, 2 I/O or adapter-spawn error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import shlex
import sys
from pathlib import Path
from typing import Sequence

from . import corpus as corpus_mod
from .corpus import CorpusError, Lexicon, atomic_write_text, build_corpus, read_corpus, tokenize
from .parsegraph import read_conll_block, split_blocks, write_conll_block
from .parsers import (
    AdapterConfig,
    AdapterError,
    ChainParser,
    CykParser,
    ExternalParser,
    GrammarError,
    HeadRules,
    load_grammar,
    load_head_rules,
)
from .scoring import RobustnessReport, ScoringError, check_report, compare_pair, fmt, fscore, score_verdicts

EXIT_OK, EXIT_USAGE, EXIT_IO = 0, 1, 2

TABLE_HEADER = [
    "parser",
    "unlabeled_overall", "unlabeled_1", "unlabeled_2", "unlabeled_3",
    "labeled_overall", "labeled_1", "labeled_2", "labeled_3",
]


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_USAGE):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# --------------------------------------------------------------------------
# corrupt
# --------------------------------------------------------------------------


def parse_plan(text: str) -> dict[int, int]:
    plan = {}
    try:
        for item in text.split(","):
            level, count = item.split(":")
            level, count = int(level), int(count)
            if level in plan:
                raise ValueError
            plan[level] = count
    except ValueError:
        raise CliError(f"malformed plan {text!r}; expected e.g. 1:255,2:94,3:94") from None
    return plan


def read_clean_text(path: Path) -> list:
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}", EXIT_IO) from None
    sentences = [tokenize(ln, f"s{i}") for i, ln in enumerate((ln for ln in lines if ln.strip()), start=1)]
    if not sentences:
        raise CliError(f"{path}: no sentences")
    return sentences


def cmd_corrupt(args) -> int:
    try:
        lexicon = Lexicon.load(args.lexicon)
    except OSError as exc:
        raise CliError(f"cannot read lexicon {args.lexicon}: {exc.strerror}", EXIT_IO) from None
    base = read_clean_text(Path(args.inp))
    plan = parse_plan(args.plan)
    c = build_corpus(base, plan, args.seed, lexicon)
    out = Path(args.out)
    corpus_mod.write_corpus(c, out)
    corpus_mod.export_plaintext(c, out.with_suffix(""))
    avg = sum(len(s) for s in c.base) / len(c.base)
    print(f"base sentences: {len(c.base)}")
    print(f"noisy sentences: {len(c.noisy)}")
    for k in c.levels():
        print(f"  level {k}: {len(c.level(k))}")
    print(f"average base length: {fmt(avg)} words")
    print(f"wrote {out}")
    return EXIT_OK


# --------------------------------------------------------------------------
# parse
# --------------------------------------------------------------------------


def build_parsers(args) -> list:
    if not args.adapter:
        raise CliError("at least one --adapter is required")
    undirected = set(args.undirected or ())
    parsers, names = [], set()
    for spec in args.adapter:
        if spec == "builtin:chain":
            p = ChainParser()
        elif spec == "builtin:cyk":
            if not args.grammar:
                raise CliError("builtin:cyk needs --grammar")
            try:
                grammar = load_grammar(args.grammar)
                heads = load_head_rules(args.heads) if args.heads else HeadRules()
            except OSError as exc:
                raise CliError(f"cannot read {exc.filename}: {exc.strerror}", EXIT_IO) from None
            except (GrammarError, ValueError) as exc:
                raise CliError(f"bad grammar or head rules: {exc}") from None
            p = CykParser(grammar, heads)
        elif "=" in spec:
            name, cmd = spec.split("=", 1)
            if not name or not cmd.strip():
                raise CliError(f"malformed adapter {spec!r}; expected name=command")
            mode = "undirected" if name in undirected else "directed"
            p = ExternalParser(AdapterConfig(name, tuple(shlex.split(cmd)), mode, args.timeout, args.batch))
        else:
            raise CliError(f"unknown adapter {spec!r}")
        if p.name in names:
            raise CliError(f"duplicate adapter name {p.name!r}")
        names.add(p.name)
        parsers.append(p)
    return parsers


def _write_outcomes(path: Path, outcomes) -> None:
    atomic_write_text(path, "".join(write_conll_block(o) for o in outcomes))


def cmd_parse(args) -> int:
    parsers = build_parsers(args)
    try:
        c = read_corpus(args.corpus)
    except OSError as exc:
        raise CliError(f"cannot read corpus {args.corpus}: {exc.strerror}", EXIT_IO) from None
    out = Path(args.out)
    for p in parsers:
        d = out / p.name
        meta = {
            "parser": p.name,
            "mode": p.mode,
            "corpus": str(args.corpus),
            "cs": [{"id": s.id, "n_tokens": len(s)} for s in c.base],
            "levels": {},
        }
        try:
            _write_outcomes(d / "cs.conll", p.parse_all(list(c.base)))
            for k in c.levels():
                level = c.level(k)
                sents = [corpus_mod.Sentence.from_texts(ns.base_id, ns.texts) for ns in level]
                _write_outcomes(d / f"ns{k}.conll", p.parse_all(sents))
                meta["levels"][str(k)] = [{"base_id": ns.base_id, "n_tokens": len(ns.tokens)} for ns in level]
        except AdapterError as exc:
            raise CliError(str(exc), EXIT_IO) from None
        atomic_write_text(d / "meta.json", json.dumps(meta, indent=1) + "\n")
        print(f"{p.name}: wrote {d}")
    return EXIT_OK


# --------------------------------------------------------------------------
# score
# --------------------------------------------------------------------------


def _read_outcomes(path: Path, mode: str, n_tokens: Sequence[int]) -> list:
    blocks = split_blocks(path.read_text(encoding="utf-8"))
    if len(blocks) != len(n_tokens):
        raise CliError(f"{path}: {len(blocks)} outcomes for {len(n_tokens)} sentences", EXIT_IO)
    return [read_conll_block(b, mode, n) for b, n in zip(blocks, n_tokens)]


def score_dir(d: Path) -> RobustnessReport:
    meta = json.loads((d / "meta.json").read_text(encoding="utf-8"))
    mode = meta["mode"]
    cs_ids = [x["id"] for x in meta["cs"]]
    cs = dict(zip(cs_ids, _read_outcomes(d / "cs.conll", mode, [x["n_tokens"] for x in meta["cs"]])))
    verdicts, notes = [], []
    for k in ("1", "2", "3"):
        rows = meta["levels"].get(k)
        if rows is None:
            continue
        path = d / f"ns{k}.conll"
        if not path.exists():
            notes.append(f"level {k} outcomes missing; scored available levels only")
            continue
        ns = _read_outcomes(path, mode, [x["n_tokens"] for x in rows])
        for row, outcome in zip(rows, ns):
            if row["base_id"] not in cs:
                raise CliError(f"{path}: unknown base id {row['base_id']!r}", EXIT_IO)
            verdicts.append(compare_pair(cs[row["base_id"]], outcome, int(k), row["base_id"]))
    if not verdicts:
        raise CliError(f"{d}: no noisy outcomes to score", EXIT_IO)
    report = score_verdicts(verdicts, meta["parser"], notes)
    check_report(report)
    return report


def table_rows(reports: Sequence[RobustnessReport]) -> list[list[str]]:
    rows = []
    for r in reports:
        row = [r.parser]
        for metric in ("unlabeled", "labeled"):
            row.append(fmt(getattr(r, f"overall_{metric}")))
            for k in (1, 2, 3):
                s = r.level(k)
                row.append(fmt(getattr(s, f"{metric}_incl")) if s else "")
        rows.append(row)
    return rows


def render_csv(rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def cmd_score(args) -> int:
    root = Path(args.outcomes)
    if not root.is_dir():
        raise CliError(f"outcomes directory not found: {root}", EXIT_IO)
    dirs = [root] if (root / "meta.json").exists() else sorted(p.parent for p in root.glob("*/meta.json"))
    if not dirs:
        raise CliError(f"{root}: no parser outcomes found", EXIT_IO)
    try:
        reports = [score_dir(d) for d in dirs]
    except OSError as exc:
        raise CliError(f"cannot read outcomes: {exc}", EXIT_IO) from None
    out = Path(args.out)
    payload = [r.to_json() for r in reports]
    atomic_write_text(out, json.dumps(payload[0] if len(payload) == 1 else payload, indent=1) + "\n")
    stem = out.with_suffix("")
    atomic_write_text(Path(f"{stem}.csv"), render_csv([TABLE_HEADER, *table_rows(reports)]))
    for metric in ("unlabeled", "labeled"):
        rows = [["parser", "level", "score"]]
        for r in reports:
            rows.extend([r.parser, str(s.level), fmt(getattr(s, f"{metric}_incl"))] for s in r.levels)
        atomic_write_text(Path(f"{stem}.{metric}.plot.csv"), render_csv(rows))
    for r in reports:
        for note in r.notes:
            print(f"{r.parser}: {note}")
    print(f"wrote {out}")
    return EXIT_OK


# --------------------------------------------------------------------------
# report
# --------------------------------------------------------------------------


def load_reports(path: str) -> list[RobustnessReport]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        items = data if isinstance(data, list) else [data]
        return [RobustnessReport.from_json(d) for d in items]
    except OSError as exc:
        raise CliError(f"cannot read report {path}: {exc.strerror}", EXIT_IO) from None
    except (ValueError, KeyError, TypeError) as exc:
        raise CliError(f"unreadable report {path}: {exc}", EXIT_IO) from None


def parse_pr(text: str) -> tuple[str, float, float]:
    try:
        name, vals = text.rsplit(":", 1)
        p, r = (float(v) for v in vals.split(","))
    except ValueError:
        raise CliError(f"malformed --pr {text!r}; expected name:precision,recall") from None
    return name, p, r


def cmd_report(args) -> int:
    reports = [r for path in args.reports for r in load_reports(path)]
    reports.sort(key=lambda r: -r.overall_unlabeled)
    rows = table_rows(reports)
    widths = [max(len(h), *(len(row[i]) for row in rows)) for i, h in enumerate(TABLE_HEADER)]
    print("  ".join(h.ljust(w) for h, w in zip(TABLE_HEADER, widths)).rstrip())
    for row in rows:
        print("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    print()
    for r in reports:
        parts = []
        for metric in ("unlabeled", "labeled"):
            d = r.degradation(metric)
            parts.append(f"{metric} {fmt(d, 1)}%" if d is not None else f"{metric} n/a")
        print(f"degradation level 1 -> 3, {r.parser}: " + ", ".join(parts))
    if args.pr:
        print()
        for text in args.pr:
            name, p, rec = parse_pr(text)
            print(f"F-score {name}: {fmt(fscore(p, rec), 1)}")
    return EXIT_OK


# --------------------------------------------------------------------------


def make_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="robustparse", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("corrupt", help="build a noisy test corpus")
    p.add_argument("--in", dest="inp", required=True, help="clean text, one sentence per line")
    p.add_argument("--lexicon", required=True, help="word list, one word per line")
    p.add_argument("--plan", default="1:255,2:94,3:94", help="noisy sentences per error level (default %(default)s)")
    p.add_argument("--seed", type=int, default=0, help="random seed (default %(default)s)")
    p.add_argument("--out", required=True, help="corpus file to write (JSONL)")
    p.set_defaults(func=cmd_corrupt)

    p = sub.add_parser("parse", help="run parsers over a corpus")
    p.add_argument("--corpus", required=True, help="test corpus written by corrupt")
    p.add_argument("--adapter", action="append", help="name=command, builtin:chain or builtin:cyk")
    p.add_argument("--grammar", help="PCFG file for builtin:cyk")
    p.add_argument("--heads", help="head rules for builtin:cyk")
    p.add_argument("--undirected", action="append", metavar="NAME", help="treat adapter NAME as undirected")
    p.add_argument("--timeout", type=float, default=60.0, help="seconds per sentence (default %(default)s)")
    p.add_argument("--batch", action="store_true", help="send all sentences up front instead of one at a time")
    p.add_argument("--out", required=True, help="outcomes directory")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("score", help="score parse outcomes")
    p.add_argument("--outcomes", required=True, help="directory written by parse")
    p.add_argument("--out", required=True, help="report JSON; CSV files go next to it")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("report", help="compare score reports")
    p.add_argument("reports", nargs="+", help="report files written by score")
    p.add_argument("--pr", action="append", metavar="NAME:P,R", help="precision and recall for an F-score line")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"robustparse: {exc}", file=sys.stderr)
        return exc.code
    except (CorpusError, ScoringError) as exc:
        print(f"robustparse: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
