import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

DATA_DIRS = [os.environ.get("ERASURE_CG_DATA"),
             os.path.join(os.path.dirname(__file__), os.pardir, "data")]


def find_matrix(name):
    for d in DATA_DIRS:
        if d:
            path = os.path.join(d, f"{name}.mtx")
            if os.path.isfile(path):
                return os.path.abspath(path)
    return None


@pytest.fixture
def data_matrix():
    def _get(name):
        path = find_matrix(name)
        if path is None:
            pytest.skip(f"{name}.mtx not available; set ERASURE_CG_DATA "
                        f"(see README for the download link)")
        return path
    return _get


_CRITERIA = {}


@pytest.fixture
def criterion(request):
    """Record a one-line verdict for an acceptance criterion.

    Call ``criterion(number, passed, detail)``; a failed verdict also fails the
    test. The verdicts are printed in the terminal summary.
    """
    def _record(number, passed, detail):
        _CRITERIA[number] = (bool(passed), detail)
        assert passed, f"criterion {number}: {detail}"
    return _record


def pytest_runtest_logreport(report):
    # Skipped criteria (missing data files) still get a line.
    if report.skipped and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        if name.startswith("test_criterion_"):
            number = int(name.split("_")[2])
            reason = report.longrepr[-1] if isinstance(report.longrepr, tuple) else "skipped"
            _CRITERIA.setdefault(number, (None, reason))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        passed, detail = _CRITERIA[number]
        verdict = {True: "PASS", False: "FAIL", None: "SKIP"}[passed]
        terminalreporter.write_line(f"criterion {number}: {verdict}  {detail}")
