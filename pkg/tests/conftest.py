import numpy as np
import pytest

from heatchain.model import chain_config

FIG1 = dict(k=1.8, T=0.27, dT_over_T=0.95, delta_omega=0.5)


def fig1_config(DT_over_T=0.0, kind="ohmic", **kw):
    params = dict(FIG1, DT_over_T=DT_over_T, kind=kind)
    params.update(kw)
    return chain_config(**params)


@pytest.fixture(params=["ohmic", "superohmic"])
def kind(request):
    return request.param


@pytest.fixture
def fig1(kind):
    return fig1_config(0.0, kind)


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS):
        terminalreporter.write_line(line)
