import functools

import pytest

from charquantile import charfns, series


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow regeneration tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="slow; use --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


ACCEPTANCE: dict = {}


@pytest.fixture
def acceptance():
    """``acceptance(n, ok, detail)`` records and prints one criterion line."""
    def record(n, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
        ACCEPTANCE[n] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])


@functools.lru_cache(maxsize=None)
def _built(spec_items, terms):
    return series.build_series(charfns.from_spec(dict(spec_items)), terms=terms)


@pytest.fixture(scope="session")
def built():
    """``built(spec_dict, terms=35)`` with results shared across the session."""
    def get(spec, terms=35):
        return _built(tuple(sorted(spec.items())), terms)
    return get
