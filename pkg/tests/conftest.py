import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from coopbeam.channel import synthesize_channel
from coopbeam.harness import draw_symbols, oracle_precoder
from coopbeam.topology import NetworkTopology, build_topology

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def make_instance(seed, mode="full", L=4, K=4, N=2, M=2, b=3, beta=1e-2, radius=None):
    """Topology, channel, symbols and oracle precoder for one seed."""
    top = build_topology(mode, L, K, N, M, b=b, radius=radius, rng=seed)
    ch = synthesize_channel(top, seed + 1)
    s = draw_symbols(seed + 2, top).s
    return ch, s, oracle_precoder(ch, s, beta)


def chain_topology(n_bs, N=2, M=2):
    """UE0 - BS0 - UE1 - BS1 - ... - BS(n-1) - UEn: a path, hence a tree."""
    edges = [(l, l) for l in range(n_bs)] + [(l + 1, l) for l in range(n_bs)]
    return NetworkTopology(n_bs, n_bs + 1, N, M, tuple(edges))




@pytest.fixture
def rng():
    return np.random.default_rng(12345)
