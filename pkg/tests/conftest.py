import numpy as np
import pytest
from hypothesis import settings

from ensemblemix import HPOrder, MixParams, ModeSpec

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

# filled by test_acceptance; echoed after the run so the verdicts survive capture
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def small_params(M1=3, M2=2, N1=12, N2=9, order=HPOrder.FIRST, eta=0.6, **kw):
    m1 = ModeSpec(M1, N1, gamma=1.0, beta=0.7, delta=0.3, omega_rabi=0.9)
    m2 = ModeSpec(M2, N2, gamma=0.6, beta=1.3, delta=-0.4, omega_rabi=0.5)
    return MixParams(m1, m2, eta=eta, delta_omega=kw.pop("delta_omega", 2.5), phi0=kw.pop("phi0", 0.4),
                     hp_order=order, **kw)


def random_density(dim, rng, rank=None):
    rank = rank or dim
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def random_hermitian(dim, rng):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (g + g.conj().T)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
