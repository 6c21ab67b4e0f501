from pathlib import Path

import pytest

from robustparse.corpus import Lexicon

DATA = Path(__file__).resolve().parent.parent / "src" / "robustparse" / "data"


@pytest.fixture(scope="session")
def lexicon_file(tmp_path_factory) -> Path:
    """A ~114k-word English word list written in the lexicon file format."""
    english_words = pytest.importorskip("english_words")
    words = sorted(english_words.get_english_words_set(["gcide"], lower=True, alpha=True))
    path = tmp_path_factory.mktemp("lex") / "words.txt"
    path.write_text("# gcide word list\n" + "\n".join(words) + "\n", encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def lexicon(lexicon_file) -> Lexicon:
    return Lexicon.load(lexicon_file)


@pytest.fixture(scope="session")
def demo_clean() -> Path:
    return DATA / "demo_clean.txt"


@pytest.fixture(scope="session")
def demo_grammar() -> Path:
    return DATA / "demo_grammar.pcfg"


@pytest.fixture(scope="session")
def demo_heads() -> Path:
    return DATA / "demo_heads.rules"


# --------------------------------------------------------------------------
# acceptance reporting: one PASS/FAIL line per marked criterion
# --------------------------------------------------------------------------

_ACCEPTANCE: list[tuple[str, str, float]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(name): an exit criterion, summarized at the end of the run")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        _ACCEPTANCE.append((marker.args[0], rep.outcome, rep.duration))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, duration in _ACCEPTANCE:
        tag = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{tag}  {name}  ({duration:.2f}s)")
