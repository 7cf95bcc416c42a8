import numpy as np
import pytest

from nekhoroshev.constants import derived_constants
from nekhoroshev.reference import reference_envelope, reference_model, reference_profile


@pytest.fixture(scope="session")
def model():
    return reference_model()


@pytest.fixture(scope="session")
def profile():
    return reference_profile()


@pytest.fixture(scope="session")
def consts():
    return derived_constants(reference_profile(), reference_envelope())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line per acceptance criterion.

    Usage: ``with acceptance(3, "relations", limit=30): ...``. The block fails
    the test if it raises or overruns ``limit`` seconds.
    """
    import contextlib
    import time

    lines = request.config.stash.setdefault(ACCEPTANCE, [])

    @contextlib.contextmanager
    def run(number, title, limit):
        t0 = time.perf_counter()
        ok = False
        try:
            yield
            ok = True
        finally:
            secs = time.perf_counter() - t0
            within = secs < limit
            verdict = "PASS" if ok and within else "FAIL"
            note = "" if within else f" (over the {limit:g} s limit)"
            lines.append(f"criterion {number:>2} {verdict}  {title}  [{secs:.1f} s]{note}")
            print(lines[-1])
        assert within, f"criterion {number} took {secs:.1f} s, limit {limit:g} s"

    return run


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
