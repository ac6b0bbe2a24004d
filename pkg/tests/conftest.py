import numpy as np
import pytest

from chirpeit import FloquetEngine, incoming_spectrum, derive_kappa2, mixing_angle
from chirpeit.scenario import config_from_dict, preset


class Scenario:
    """A preset plus its engine and incoming spectrum, built once per session."""

    def __init__(self, name):
        self.config = config_from_dict(preset(name))
        c = self.config
        self.medium, self.control, self.probe, self.grid = c.medium, c.control, c.probe, c.grid
        self.kappa2 = derive_kappa2(self.medium)
        self.theta = mixing_angle(self.kappa2, self.control.omega2)
        self._engine = None
        self._incoming = None

    @property
    def engine(self):
        if self._engine is None:
            self._engine = FloquetEngine(self.medium, self.control, self.grid)
        return self._engine

    @property
    def incoming(self):
        if self._incoming is None:
            self._incoming = incoming_spectrum(self.probe, self.grid)
        return self._incoming


_cache = {}


def scenario(name):
    if name not in _cache:
        _cache[name] = Scenario(name)
    return _cache[name]


@pytest.fixture(scope="session")
def fig2():
    return scenario("fig2")


@pytest.fixture(scope="session")
def fig4():
    s = scenario("fig4")
    # same medium and control as fig2, so share the eigendecompositions
    s._engine = scenario("fig2").engine
    return s


@pytest.fixture(scope="session")
def fig5():
    s = scenario("fig5")
    s._engine = scenario("fig2").engine
    return s


@pytest.fixture(scope="session")
def fig6():
    s = scenario("fig6")
    s._engine = scenario("fig2").engine
    return s


@pytest.fixture(scope="session")
def fig8():
    return scenario("fig8")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
