import time

import pytest

from betacoding.beta import BetaContext

EXAMPLE_POLYS = ("2x-1", "x^2+2x-1", "2x^2+3x-1")


@pytest.fixture(scope="session")
def binary():
    return BetaContext.from_text("2x-1")


@pytest.fixture(scope="session")
def silver():
    """beta = 1 + sqrt(2), a Pisot unit."""
    return BetaContext.from_text("x^2+2x-1")


@pytest.fixture(scope="session")
def nonunit():
    """beta = (3 + sqrt(17))/2 with a 2-adic unstable place."""
    return BetaContext.from_text("2x^2+3x-1")


@pytest.fixture(scope="session")
def contexts(binary, silver, nonunit):
    return {"2x-1": binary, "x^2+2x-1": silver, "2x^2+3x-1": nonunit}


class _Criterion:
    def __init__(self, log, name, title, budget):
        self.log, self.name, self.title, self.budget = log, name, title, budget
        self.notes = []

    def note(self, text):
        self.notes.append(text)

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, kind, exc, tb):
        elapsed = time.perf_counter() - self.t0
        detail = "; ".join(self.notes)
        if kind is None and self.budget is not None and elapsed > self.budget:
            self.log.append((self.name, False, self.title, f"{elapsed:.2f}s exceeds {self.budget}s budget; {detail}"))
            raise AssertionError(f"{self.name} took {elapsed:.2f}s, budget {self.budget}s")
        if kind is None:
            self.log.append((self.name, True, self.title, f"{elapsed:.2f}s; {detail}" if detail else f"{elapsed:.2f}s"))
        else:
            self.log.append((self.name, False, self.title, f"{kind.__name__}: {exc}"))
        return False


ACCEPTANCE = pytest.StashKey()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = []


@pytest.fixture
def criterion(request):
    """criterion(name, title, budget) -> context manager that logs PASS/FAIL with timing."""
    log = request.config.stash[ACCEPTANCE]
    return lambda name, title, budget=None: _Criterion(log, name, title, budget)


def pytest_terminal_summary(terminalreporter, config):
    log = config.stash.get(ACCEPTANCE, [])
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, title, detail in sorted(log, key=lambda r: int(r[0][2:])):
        terminalreporter.write_line(f"{name:<5} {'PASS' if ok else 'FAIL'}  {title}  [{detail}]")
