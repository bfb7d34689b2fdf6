"""Bipartite BS <-> UE coupling graph.

Indices are zero-based: base stations ``l = 0..L-1``, users
``k = 0..K-1``.  An edge ``(k, l)`` means the channel block ``H[k, l]`` is
nonzero.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .errors import EmptyNetwork, InvalidParam, InvalidTopology
from .numerics import make_rng

__all__ = ["NetworkTopology", "MessageCount", "build_topology", "torus_distances",
           "per_user", "per_antenna"]


class MessageCount(NamedTuple):
    """Per-round communication audit reported by every algorithm.

    originated : logical messages created by nodes
    deliveries : point-to-point deliveries along graph edges
    scalars    : complex scalars carried by all deliveries
    """
    originated: int
    deliveries: int
    scalars: int

    def __add__(self, other):
        return MessageCount(*(a + b for a, b in zip(self, other)))


def _as_counts(value, n, name):
    if np.isscalar(value):
        counts = (int(value),) * n
    else:
        counts = tuple(int(v) for v in value)
    if len(counts) != n:
        raise InvalidParam(f"{name} needs {n} entries, got {len(counts)}")
    if any(c < 1 for c in counts):
        raise InvalidParam(f"{name} entries must be >= 1")
    return counts


@dataclass(frozen=True)
class NetworkTopology:
    L: int
    K: int
    N: tuple   # antennas per BS
    M: tuple   # antennas per UE
    edges: tuple  # sorted (k, l) pairs

    def __post_init__(self):
        if self.L < 1 or self.K < 1:
            raise EmptyNetwork(f"need L, K >= 1 (got L={self.L}, K={self.K})")
        object.__setattr__(self, "N", _as_counts(self.N, self.L, "N"))
        object.__setattr__(self, "M", _as_counts(self.M, self.K, "M"))
        edges = tuple(sorted({(int(k), int(l)) for k, l in self.edges}))
        for k, l in edges:
            if not (0 <= k < self.K and 0 <= l < self.L):
                raise InvalidTopology(f"edge {(k, l)} out of range")
        object.__setattr__(self, "edges", edges)
        for k, ls in enumerate(self.B):
            if not ls:
                raise InvalidTopology(f"UE {k} has no serving BS")
        for l, ks in enumerate(self.U):
            if not ks:
                raise InvalidTopology(f"BS {l} serves no UE")

    @cached_property
    def U(self):
        """``U[l]``: users coupled to BS ``l``."""
        out = [[] for _ in range(self.L)]
        for k, l in self.edges:
            out[l].append(k)
        return tuple(tuple(v) for v in out)

    @cached_property
    def B(self):
        """``B[k]``: base stations coupled to UE ``k``."""
        out = [[] for _ in range(self.K)]
        for k, l in self.edges:
            out[k].append(l)
        return tuple(tuple(v) for v in out)

    @cached_property
    def edge_set(self):
        return frozenset(self.edges)

    @property
    def n_tx(self):
        return sum(self.N)

    @property
    def n_rx(self):
        return sum(self.M)

    @cached_property
    def tx_offsets(self):
        return tuple(np.concatenate([[0], np.cumsum(self.N)]).tolist())

    @cached_property
    def rx_offsets(self):
        return tuple(np.concatenate([[0], np.cumsum(self.M)]).tolist())

    def tx_slice(self, l):
        return slice(self.tx_offsets[l], self.tx_offsets[l + 1])

    def rx_slice(self, k):
        return slice(self.rx_offsets[k], self.rx_offsets[k + 1])

    def split_tx(self, x):
        """Split a stacked length-N vector into per-BS blocks."""
        return [np.asarray(x[self.tx_slice(l)]) for l in range(self.L)]

    def split_rx(self, s):
        return [np.asarray(s[self.rx_slice(k)]) for k in range(self.K)]

    def is_full(self):
        return len(self.edges) == self.K * self.L

    def to_dict(self):
        return {"L": self.L, "K": self.K, "N": list(self.N), "M": list(self.M),
                "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_dict(cls, d):
        return cls(int(d["L"]), int(d["K"]), tuple(d["N"]), tuple(d["M"]),
                   tuple(tuple(e) for e in d["edges"]))


def torus_distances(ue_pos, bs_pos):
    """Pairwise distances on the unit torus, shape ``(K, L)``."""
    d = np.abs(ue_pos[:, None, :] - bs_pos[None, :, :])
    d = np.minimum(d, 1.0 - d)
    return np.sqrt(np.sum(d * d, axis=-1))


def _nearest(dist_row):
    # stable sort: ties go to the lower index
    return np.argsort(dist_row, kind="stable")


def build_topology(mode, L, K, N, M, *, b=3, radius=None, rng=None):
    """Build a coupling graph.

    Parameters
    ----------
    mode : {'full', 'nearest_b', 'geometric'}
        ``full`` couples every pair.  ``nearest_b`` drops BSs and UEs
        uniformly on the unit torus and links every UE to its `b`
        nearest BSs.  ``geometric`` links pairs within torus distance
        `radius` and attaches any isolated UE to its nearest BS.
    L, K : int
        Number of base stations and users.
    N, M : int or sequence of int
        Antennas per BS / per UE.
    b : int
        Neighbour count for ``nearest_b``.
    radius : float
        Link radius for ``geometric``.
    rng : Generator or int, optional
        Randomness for node placement.

    Notes
    -----
    In both random modes a BS that ends up with no user is attached to
    its nearest UE, so every node has at least one neighbour.
    """
    if L < 1 or K < 1:
        raise EmptyNetwork(f"need L, K >= 1 (got L={L}, K={K})")
    if mode == "full":
        edges = [(k, l) for k in range(K) for l in range(L)]
        return NetworkTopology(L, K, N, M, tuple(edges))

    if mode not in ("nearest_b", "geometric"):
        raise InvalidParam(f"unknown topology mode {mode!r}")
    rng = make_rng(0 if rng is None else rng)
    bs_pos = rng.random((L, 2))
    ue_pos = rng.random((K, 2))
    dist = torus_distances(ue_pos, bs_pos)

    edges = set()
    if mode == "nearest_b":
        if not 1 <= b <= L:
            raise InvalidParam(f"b must satisfy 1 <= b <= L={L}, got {b}")
        for k in range(K):
            edges.update((k, int(l)) for l in _nearest(dist[k])[:b])
    else:
        if radius is None or not radius > 0:
            raise InvalidParam(f"radius must be > 0, got {radius}")
        ks, ls = np.nonzero(dist <= radius)
        edges.update(zip(ks.tolist(), ls.tolist()))
        served = {k for k, _ in edges}
        for k in range(K):
            if k not in served:
                edges.add((k, int(_nearest(dist[k])[0])))

    used = {l for _, l in edges}
    for l in range(L):
        if l not in used:
            edges.add((int(_nearest(dist[:, l])[0]), l))
    return NetworkTopology(L, K, N, M, tuple(edges))


def per_user(value, K):
    """Broadcast a scalar or length-``K`` sequence to a tuple of floats."""
    if np.isscalar(value):
        return (float(value),) * K
    out = tuple(float(v) for v in value)
    if len(out) != K:
        raise InvalidParam(f"expected {K} per-user values, got {len(out)}")
    return out


def per_antenna(value, topology):
    """Expand a per-user quantity to one entry per receive antenna."""
    vals = per_user(value, topology.K)
    return np.repeat(np.asarray(vals), topology.M)
