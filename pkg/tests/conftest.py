import re

import pytest

from databargain import corpus, market


@pytest.fixture(scope="session")
def small_corpus():
    return corpus.synthesize_corpus(num_categories=5, docs_per_category=20, seed=1)


@pytest.fixture(scope="session")
def default_scenario():
    return market.build_scenario(market.ScenarioConfig())


# -- acceptance summary: one line per criterion ------------------------------

_CRITERION_TEST = re.compile(r"test_acceptance\.py::test_c(\d)")
_outcomes: dict[int, list[tuple[str, bool]]] = {}


def pytest_runtest_logreport(report):
    m = _CRITERION_TEST.search(report.nodeid)
    if not m:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _outcomes.setdefault(int(m.group(1)), []).append(
            (report.nodeid.split("::", 1)[1], report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    from test_acceptance import CRITERIA

    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        results = _outcomes.get(n)
        if not results:
            terminalreporter.write_line(f"criterion {n} ({CRITERIA[n]}): NOT RUN")
            continue
        failed = [name for name, ok in results if not ok]
        status = "FAIL" if failed else "PASS"
        line = f"criterion {n} ({CRITERIA[n]}): {status} [{len(results) - len(failed)}/{len(results)} checks]"
        if failed:
            line += " failing: " + ", ".join(failed)
        terminalreporter.write_line(line)
