import numpy as np
import pytest

from commonpc.config import bundled_config, parse_config
from commonpc.model import HarmonicParams, QuarticChainParams, SystemSpec

D = (0.0, 12.0, 19.0, 21.0)
B1 = (6.0, 1.0, 0.4, 0.4)
B2 = (1.0, 4.0, 0.4, 0.4)


def quartic_spec(b=B1, d=D, k=1e-5, beta=1.0, lo=0.2, hi=1.0, projection=(1, 2, 3), label="system1"):
    return SystemSpec(
        n=len(b),
        potential=QuarticChainParams(b=b, d=d, k=k),
        beta_target=beta,
        beta_lo=lo,
        beta_hi=hi,
        projection=projection,
        label=label,
    )


def harmonic_spec(omega=(1.0, 2.0, 3.0, 4.0), beta=1.0, lo=0.2, hi=1.0, projection=None, label="harmonic"):
    n = len(omega)
    return SystemSpec(
        n=n,
        potential=HarmonicParams(omega=omega),
        beta_target=beta,
        beta_lo=lo,
        beta_hi=hi,
        projection=projection or tuple(range(1, n + 1)),
        label=label,
    )


@pytest.fixture
def system1():
    return quartic_spec()


@pytest.fixture
def system2():
    return quartic_spec(b=B2, label="system2")


@pytest.fixture
def fig1_config():
    return parse_config(bundled_config("fig1.cfg"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
