import importlib

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "exact", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture]
)
settings.load_profile("exact")


def _backends():
    mods = [importlib.import_module("hirota_kdv._pykernels")]
    try:
        mods.append(importlib.import_module("hirota_kdv._kernels"))
    except ImportError:
        pass
    return mods


BACKENDS = _backends()


@pytest.fixture(params=BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def backend(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    try:
        from tests import test_acceptance as acc
    except ImportError:
        return
    if acc.RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(acc.RESULTS):
            terminalreporter.write_line(acc.line(n))
