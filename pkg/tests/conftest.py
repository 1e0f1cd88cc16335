import time
from contextlib import contextmanager
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

FIXTURES = Path(__file__).parent / "fixtures"
ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


class _Record:
    def __init__(self):
        self.detail = ""


@pytest.fixture
def criterion(request):
    """Context manager recording one pass/fail line per acceptance criterion."""
    lines = request.config.stash.setdefault(ACCEPTANCE, {})

    @contextmanager
    def run(number: int, title: str):
        rec = _Record()
        t0 = time.perf_counter()
        try:
            yield rec
        except BaseException as exc:
            msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
            lines[number] = f"criterion {number} FAIL  {title} ({time.perf_counter() - t0:.1f} s): {msg}"
            print(lines[number])
            raise
        lines[number] = f"criterion {number} PASS  {title} ({time.perf_counter() - t0:.1f} s) {rec.detail}".rstrip()
        print(lines[number])

    return run


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
