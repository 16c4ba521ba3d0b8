import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def write_tsv(path, rows, header=None):
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            fh.write(f"# {header}\n")
        for r in rows:
            fh.write("\t".join(str(c) for c in r) + "\n")
    return str(path)


@pytest.fixture
def tsv(tmp_path):
    def make(name, rows, header=None):
        return write_tsv(tmp_path / name, rows, header)

    return make


# ---------------------------------------------------------------- acceptance reporting

_CRITERIA: dict[int, tuple[str, bool, str]] = {}


class _Criterion:
    def __init__(self, number, title):
        self.number, self.title, self.detail = number, title, ""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        ok = exc_type is None
        prev = _CRITERIA.get(self.number)
        if prev is not None:
            ok = ok and prev[1]
            detail = "; ".join(d for d in (prev[2], self.detail) if d)
        else:
            detail = self.detail
        if exc_type is not None and not self.detail:
            detail = (detail + "; " if detail else "") + f"{exc_type.__name__}: {exc}".splitlines()[0]
        _CRITERIA[self.number] = (self.title, ok, detail)
        return False


@pytest.fixture
def criterion():
    return _Criterion


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, ok, detail = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n} [{'PASS' if ok else 'FAIL'}] {title}: {detail}")
