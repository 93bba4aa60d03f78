import numpy as np
import pytest

from mcbeam.channel import ChannelGenConfig, generate


def rand_complex(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * np.sqrt(0.5)


def rand_hermitian(rng, n, scale=1.0):
    A = rand_complex(rng, n, n)
    return scale * 0.5 * (A + A.conj().T)


def rand_psd(rng, n, rank=None):
    rank = n if rank is None else rank
    F = rand_complex(rng, n, rank)
    return F @ F.conj().T


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_channels(M, K, Q, scenario="general", seed=0, **kw):
    return generate(ChannelGenConfig(M=M, K=K, Q=Q, scenario=scenario, seed=seed, **kw))
