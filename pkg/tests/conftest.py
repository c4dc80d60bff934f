import contextlib
import time

import pytest

# (criterion number, title, passed, seconds, limit, notes) rows from test_acceptance
ACCEPTANCE = []


@contextlib.contextmanager
def _criterion(number, title, limit):
    t0 = time.perf_counter()
    ok = False
    notes = []
    try:
        yield notes
        ok = True
    finally:
        dt = time.perf_counter() - t0
        ok = ok and (limit is None or dt < limit)
        ACCEPTANCE.append((number, title, ok, dt, limit, notes))
    if limit is not None:
        assert dt < limit, f"criterion {number} took {dt:.2f} s (limit {limit} s)"


@pytest.fixture
def criterion():
    return _criterion


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number, title, ok, dt, limit, notes in sorted(ACCEPTANCE, key=lambda r: r[0]):
        lim = f" (limit {limit:g} s)" if limit is not None else ""
        tr.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {title}  "
                      f"[{dt:.2f} s{lim}]")
        for note in notes:
            tr.write_line(f"    {note}")
