import csv
import io
import json
import sys
from pathlib import Path

import pytest

from robustparse.cli import main, render_csv
from robustparse.parsegraph import DIRECTED, ParseGraph, ParseOutcome, write_conll_block

ADAPTERS = Path(__file__).parent / "adapters"


@pytest.fixture(scope="module")
def corpus_path(tmp_path_factory, lexicon_file, demo_clean):
    out = tmp_path_factory.mktemp("corpus") / "corpus.jsonl"
    assert main(["corrupt", "--in", str(demo_clean), "--lexicon", str(lexicon_file),
                 "--plan", "1:255,2:94,3:94", "--seed", "42", "--out", str(out)]) == 0
    return out


def test_corrupt_summary(tmp_path, lexicon_file, demo_clean, capsys):
    out = tmp_path / "c.jsonl"
    assert main(["corrupt", "--in", str(demo_clean), "--lexicon", str(lexicon_file),
                 "--plan", "1:255,2:94,3:94", "--seed", "7", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "noisy sentences: 443" in text
    assert "base sentences: 19" in text
    assert "average base length: 14.79 words" in text
    for name in ("c.cs.txt", "c.ns1.txt", "c.cs1.txt", "c.ns3.txt"):
        assert (tmp_path / name).exists()


def test_corrupt_empty_input(tmp_path, lexicon_file):
    empty = tmp_path / "empty.txt"
    empty.write_text("\n\n")
    assert main(["corrupt", "--in", str(empty), "--lexicon", str(lexicon_file), "--out", str(tmp_path / "o")]) == 1


def test_corrupt_missing_lexicon(tmp_path, demo_clean):
    assert main(["corrupt", "--in", str(demo_clean), "--lexicon", str(tmp_path / "nope"), "--out", str(tmp_path / "o")]) == 2


def test_bad_plan(tmp_path, demo_clean, lexicon_file):
    assert main(["corrupt", "--in", str(demo_clean), "--lexicon", str(lexicon_file),
                 "--plan", "1-255", "--out", str(tmp_path / "o")]) == 1


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as ei:
        main(["parse"])
    assert ei.value.code == 1


def test_chain_pipeline(tmp_path, corpus_path):
    assert main(["parse", "--corpus", str(corpus_path), "--adapter", "builtin:chain", "--out", str(tmp_path / "o")]) == 0
    assert "#FAIL" not in (tmp_path / "o" / "chain" / "ns1.conll").read_text()
    assert main(["score", "--outcomes", str(tmp_path / "o"), "--out", str(tmp_path / "r.json")]) == 0
    rows = (tmp_path / "r.csv").read_text().splitlines()
    assert rows[1] == "chain,100.00,100.00,100.00,100.00,100.00,100.00,100.00,100.00"
    plot = (tmp_path / "r.unlabeled.plot.csv").read_text().splitlines()
    assert plot == ["parser,level,score", "chain,1,100.00", "chain,2,100.00", "chain,3,100.00"]


def test_all_fail_adapter(tmp_path, corpus_path):
    script = tmp_path / "failer.py"
    script.write_text("import sys\nfor _ in sys.stdin:\n    print('#FAIL nope\\n', flush=True)\n")
    adapter = f"failer={sys.executable} {script}"
    assert main(["parse", "--corpus", str(corpus_path), "--adapter", adapter, "--out", str(tmp_path / "o")]) == 0
    blocks = (tmp_path / "o" / "failer" / "cs.conll").read_text().split("\n\n")
    assert blocks[0] == "#FAIL nope"
    assert main(["score", "--outcomes", str(tmp_path / "o"), "--out", str(tmp_path / "r.json")]) == 0
    report = json.loads((tmp_path / "r.json").read_text())
    assert report["overall"] == {"unlabeled": 0.0, "labeled": 0.0}
    assert report["levels"][0]["n_failures"] == 255


def test_parse_missing_corpus(tmp_path):
    assert main(["parse", "--corpus", str(tmp_path / "nope.jsonl"), "--adapter", "builtin:chain", "--out", str(tmp_path)]) == 2


def test_parse_spawn_failure(tmp_path, corpus_path, capsys):
    rc = main(["parse", "--corpus", str(corpus_path), "--adapter", "ghost=no-such-binary-xyz", "--out", str(tmp_path)])
    assert rc == 2
    assert "ghost" in capsys.readouterr().err


def test_cyk_needs_grammar(tmp_path, corpus_path):
    assert main(["parse", "--corpus", str(corpus_path), "--adapter", "builtin:cyk", "--out", str(tmp_path)]) == 1


# --------------------------------------------------------------------------
# published-results fixture: C&C counts per level (pairs, failures, structural, labeled)
# --------------------------------------------------------------------------

CC_COUNTS = {1: (255, 23, 186, 155), 2: (94, 0, 59, 32), 3: (94, 0, 38, 14)}


def _g(labels, root=1):
    n = len(labels)
    arcs = [(0, root, "root")] + [(root, i, labels[i - 1]) for i in range(1, n + 1) if i != root]
    return ParseOutcome.parsed(ParseGraph.build(n, DIRECTED, arcs))


def write_fixture(d: Path, counts) -> None:
    d.mkdir(parents=True)
    clean = _g(["root", "a", "b"])
    same_structure = _g(["root", "x", "b"])
    different = _g(["root", "a", "b"], root=2)
    meta = {"parser": "C&C", "mode": "directed", "cs": [], "levels": {}}
    cs_blocks = []
    for level, (n, fail, struct, lab) in counts.items():
        rows, blocks = [], []
        for j in range(n):
            bid = f"L{level}-{j}"
            meta["cs"].append({"id": bid, "n_tokens": 3})
            rows.append({"base_id": bid, "n_tokens": 3})
            if j < fail:
                cs_blocks.append(ParseOutcome.failed("no parse"))
                blocks.append(clean)
                continue
            cs_blocks.append(clean)
            k = j - fail
            blocks.append(clean if k < lab else same_structure if k < struct else different)
        meta["levels"][str(level)] = rows
        (d / f"ns{level}.conll").write_text("".join(write_conll_block(o) for o in blocks))
    (d / "cs.conll").write_text("".join(write_conll_block(o) for o in cs_blocks))
    (d / "meta.json").write_text(json.dumps(meta))


def test_published_counts_fixture(tmp_path):
    write_fixture(tmp_path / "o" / "cc", CC_COUNTS)
    assert main(["score", "--outcomes", str(tmp_path / "o"), "--out", str(tmp_path / "r.json")]) == 0
    row = (tmp_path / "r.csv").read_text().splitlines()[1]
    assert row == "C&C,63.88,72.94,62.77,40.43,45.37,60.78,34.04,14.89"
    report = json.loads((tmp_path / "r.json").read_text())
    lvl1 = report["levels"][0]
    assert round(lvl1["unlabeled_excl"], 2) == 80.17
    assert round(lvl1["labeled_excl"], 2) == 66.81


def test_missing_level_noted(tmp_path, capsys):
    d = tmp_path / "o" / "cc"
    write_fixture(d, CC_COUNTS)
    (d / "ns2.conll").unlink()
    assert main(["score", "--outcomes", str(d), "--out", str(tmp_path / "r.json")]) == 0
    report = json.loads((tmp_path / "r.json").read_text())
    assert [lv["level"] for lv in report["levels"]] == [1, 3]
    assert any("level 2" in n for n in report["notes"])
    assert (tmp_path / "r.csv").read_text().splitlines()[1].split(",")[3] == ""


def test_mismatched_counts(tmp_path):
    d = tmp_path / "o" / "cc"
    write_fixture(d, CC_COUNTS)
    text = (d / "ns3.conll").read_text()
    (d / "ns3.conll").write_text(text + "#FAIL extra\n\n")
    assert main(["score", "--outcomes", str(d), "--out", str(tmp_path / "r.json")]) == 2


def test_csv_round_trip(tmp_path):
    write_fixture(tmp_path / "o" / "cc", CC_COUNTS)
    main(["score", "--outcomes", str(tmp_path / "o"), "--out", str(tmp_path / "r.json")])
    for name in ("r.csv", "r.unlabeled.plot.csv", "r.labeled.plot.csv"):
        text = (tmp_path / name).read_text()
        assert render_csv(list(csv.reader(io.StringIO(text)))) == text


def test_report_command(tmp_path, capsys):
    write_fixture(tmp_path / "a" / "cc", CC_COUNTS)
    write_fixture(tmp_path / "b" / "weak", {1: (255, 0, 100, 50), 2: (94, 0, 20, 10), 3: (94, 0, 8, 3)})
    meta = json.loads((tmp_path / "b" / "weak" / "meta.json").read_text())
    meta["parser"] = "weak"
    (tmp_path / "b" / "weak" / "meta.json").write_text(json.dumps(meta))
    main(["score", "--outcomes", str(tmp_path / "a"), "--out", str(tmp_path / "a.json")])
    main(["score", "--outcomes", str(tmp_path / "b"), "--out", str(tmp_path / "b.json")])
    capsys.readouterr()
    rc = main(["report", str(tmp_path / "b.json"), str(tmp_path / "a.json"), "--pr", "C&C:86.6,92.1"])
    assert rc == 0
    out = capsys.readouterr().out
    lines = out.splitlines()
    assert lines[1].startswith("C&C") and lines[2].startswith("weak")
    assert "degradation level 1 -> 3, C&C: unlabeled 44.6%, labeled 75.5%" in out
    assert "F-score C&C: 89.3" in out


def test_report_unreadable(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["report", str(bad)]) == 2
