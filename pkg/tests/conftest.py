import numpy as np
import pytest
from hypothesis import settings

from fiberscope import GammaSet, LatticeConfig, RepGrid, build_sections, synthesize

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


class Setup:
    """Grids for one small instance, with a shortcut to the synthesizer."""

    def __init__(self, N=2, S=8, K=1, M=4, L=4.0, c=1.0):
        self.grid, self.residues = build_sections(LatticeConfig(c, N, 1), S, K)
        self.rep = RepGrid(M, L)

    def field(self, kind="random", seed=0, **kw):
        return synthesize(kind, self.grid, self.residues, self.rep, seed, **kw)

    def gamma(self, a=1.0, b=1.0, pairs=(((0,), (0,)),)):
        return GammaSet(a, b, pairs)


@pytest.fixture
def setup():
    return Setup()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(mod.RESULTS):
            terminalreporter.write_line(mod.RESULTS[k])
