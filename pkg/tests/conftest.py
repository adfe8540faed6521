from __future__ import annotations

from collections import Counter

import pytest

from codebench import corpus, pytok, subword

# criterion number -> (description, outcomes of its tests)
_ACCEPTANCE: dict[int, tuple[str, list[str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n, text): an acceptance criterion check")


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("acceptance")
        if m is not None:
            n, text = m.args
            _ACCEPTANCE.setdefault(n, (text, []))
            item.user_properties.append(("acceptance", n))


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    m = dict(report.user_properties).get("acceptance")
    if m is None:
        return
    _ACCEPTANCE[m][1].append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        text, outcomes = _ACCEPTANCE[n]
        if not outcomes:
            status = "NOT RUN"
        elif "failed" in outcomes:
            status = "FAIL"
        elif all(o == "skipped" for o in outcomes):
            status = "SKIP"
        else:
            status = "PASS"
        tr.write_line(f"criterion {n:>2}: {status:<7} {text}")


@pytest.fixture(scope="session")
def mini_manifest() -> list[str]:
    paths = corpus.stdlib_manifest()
    assert len(paths) >= 200
    return paths


@pytest.fixture(scope="session")
def mini_sources(mini_manifest) -> dict[str, str]:
    return {p: s for p in mini_manifest if (s := corpus.read_source(p)) is not None}


@pytest.fixture(scope="session")
def mini_tokens(mini_sources) -> dict[str, list[pytok.ProgramToken]]:
    return {p: pytok.tokenize(s) for p, s in mini_sources.items()}


@pytest.fixture(scope="session")
def mini_vocab(mini_tokens) -> subword.SubwordVocabulary:
    counts = Counter(t.text for toks in mini_tokens.values() for t in toks)
    return subword.build_vocabulary(counts, 2000)
