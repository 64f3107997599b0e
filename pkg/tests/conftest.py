import os
from pathlib import Path

import pytest

from stacksort.engine import compute_series
from stacksort.series import read_series, write_series

ACCEPTANCE_LINES = []
SERIES_N = 300


def pytest_collection_modifyitems(config, items):
    if os.environ.get("STACKSORT_FULLSCALE") == "1":
        return
    skip = pytest.mark.skip(reason="full-scale job; set STACKSORT_FULLSCALE=1 to run")
    for item in items:
        if "fullscale" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[1].rstrip(":").rstrip("ab"))):
        terminalreporter.write_line(line)


@pytest.fixture
def record():
    """record(k, ok, detail): one PASS/FAIL line per acceptance criterion."""
    def _record(k, ok, detail):
        line = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return _record


def _cache_dir(config) -> Path:
    env = os.environ.get("STACKSORT_SERIES_CACHE")
    if env:
        p = Path(env)
        p.mkdir(parents=True, exist_ok=True)
        return p
    return Path(config.cache.mkdir("stacksort-series"))


@pytest.fixture(scope="session")
def certified_series(request):
    """The first 300 terms, computed once (about 4 minutes on one core) and cached."""
    cache = _cache_dir(request.config)
    path = cache / f"w3_N{SERIES_N}.txt"
    if path.exists():
        s = read_series(path)
        if s.provenance == "exact-certified" and s.N >= SERIES_N:
            return s
    res = compute_series(SERIES_N, threads=os.cpu_count() or 1,
                         checkpoint_dir=cache / "checkpoints")
    assert res.report.passed, res.report.as_dict()
    write_series(res.series, path)
    return res.series
