import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from v2xcms.crypto import CCMS, CSCMS, SCMS  # noqa: E402
from v2xcms.flows.runner import run_lifecycle  # noqa: E402
from v2xcms.rng import SeededRng  # noqa: E402

ALL_PROFILES = [SCMS, CCMS, CSCMS]
FIXTURE_DIR = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(params=ALL_PROFILES, ids=lambda p: p.name.value)
def profile(request):
    return request.param


@pytest.fixture(scope="session")
def lifecycles():
    """One seeded lifecycle per profile, shared by read-only tests."""
    return {p.name: run_lifecycle(p, SeededRng(f"shared/{p.name.value}"), batch_size=3) for p in ALL_PROFILES}


@pytest.fixture
def rng(request):
    return SeededRng(f"test/{request.node.nodeid}")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running benchmark checks")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for ok, name, detail in results:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
