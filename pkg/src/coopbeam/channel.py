"""Kronecker-correlated channel synthesis.

Each coupled pair ``(k, l)`` gets ``H[k, l] = R^{1/2} W T^{1/2}`` where
``W`` has i.i.d. CN(0, 1/N_l) entries and the correlation matrices are
normalized so that ``tr R = gain * N_l`` and ``tr T = M_k``.  With this
scaling ``E[H H^H] = (tr T / N_l) R`` and ``E[H^H H] = (tr R / N_l) T``.
"""

from dataclasses import dataclass, field

import numpy as np

from . import jsonio
from .errors import InvalidParam, InvalidRho
from .numerics import (complex_gaussian_matrix, exp_correlation, make_rng,
                       principal_sqrt)
from .topology import NetworkTopology

__all__ = ["EdgeStats", "ChannelSet", "synthesize_channel", "resample_channel",
           "kronecker_samples", "assemble_global", "channel_to_json",
           "channel_from_json"]


@dataclass(frozen=True)
class EdgeStats:
    """Covariance description of one link."""
    rho_R: float
    rho_T: float
    gain: float
    R: np.ndarray
    T: np.ndarray


@dataclass
class ChannelSet:
    topology: NetworkTopology
    H: dict                      # (k, l) -> (M_k, N_l) complex
    stats: dict                  # (k, l) -> EdgeStats
    _sqrt_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        top = self.topology
        if set(self.H) != top.edge_set or set(self.stats) != top.edge_set:
            raise InvalidParam("channel blocks must match the topology edge set")
        for (k, l), h in self.H.items():
            if h.shape != (top.M[k], top.N[l]):
                raise InvalidParam(
                    f"H[{k},{l}] has shape {h.shape}, expected {(top.M[k], top.N[l])}")

    def R(self, k, l):
        return self.stats[k, l].R

    def T(self, k, l):
        return self.stats[k, l].T

    def sqrt_factors(self, k, l):
        """Cached ``(R^{1/2}, T^{1/2})`` for edge ``(k, l)``."""
        key = (k, l)
        if key not in self._sqrt_cache:
            st = self.stats[key]
            self._sqrt_cache[key] = (principal_sqrt(st.R), principal_sqrt(st.T))
        return self._sqrt_cache[key]

    def user_row(self, k):
        """The ``M_k x N`` block row ``[H_{k,1} ... H_{k,L}]``."""
        top = self.topology
        row = np.zeros((top.M[k], top.n_tx), dtype=complex)
        for l in top.B[k]:
            row[:, top.tx_slice(l)] = self.H[k, l]
        return row


def _edge_rng(base, k, l):
    return make_rng(np.random.SeedSequence([base, k, l]))


def _edge_stats(top, k, l, rho_R, rho_T, gain):
    if not (0.0 <= rho_R < 1.0 and 0.0 <= rho_T < 1.0):
        raise InvalidRho(f"edge {(k, l)}: correlation outside [0, 1)")
    if not gain > 0:
        raise InvalidParam(f"edge {(k, l)}: link gain must be positive")
    Mk, Nl = top.M[k], top.N[l]
    R = (gain * Nl / Mk) * exp_correlation(rho_R, Mk)
    T = (Mk / Nl) * exp_correlation(rho_T, Nl)
    return EdgeStats(float(rho_R), float(rho_T), float(gain), R, T)


def synthesize_channel(topology, rng, *, rho_max=0.7, gain_range=(0.1, 1.0),
                       edge_params=None):
    """Draw one channel realization with its covariance statistics.

    Parameters
    ----------
    topology : NetworkTopology
    rng : Generator or int
        A single value is drawn from `rng` and mixed with each edge
        index to seed that edge, so results do not depend on the order
        in which edges are processed.
    rho_max : float
        Correlation coefficients are drawn from ``Uniform(0, rho_max)``.
    gain_range : (float, float)
        Link gains are drawn from ``Uniform(*gain_range)``.
    edge_params : dict, optional
        ``{(k, l): (rho_R, rho_T, gain)}`` overriding the random policy
        for the listed edges.
    """
    if not 0.0 <= rho_max < 1.0:
        raise InvalidRho(f"rho_max must lie in [0, 1), got {rho_max}")
    lo, hi = gain_range
    if not 0 < lo <= hi:
        raise InvalidParam(f"gain range must satisfy 0 < lo <= hi, got {gain_range}")
    edge_params = edge_params or {}
    base = int(make_rng(rng).integers(2**63))
    H, stats = {}, {}
    for k, l in topology.edges:
        erng = _edge_rng(base, k, l)
        rho_R, rho_T = erng.uniform(0.0, rho_max, size=2)
        gain = erng.uniform(lo, hi)
        if (k, l) in edge_params:
            rho_R, rho_T, gain = edge_params[k, l]
        stats[k, l] = _edge_stats(topology, k, l, rho_R, rho_T, gain)
        W = complex_gaussian_matrix(erng, topology.M[k], topology.N[l],
                                    std=1.0 / np.sqrt(topology.N[l]))
        H[k, l] = principal_sqrt(stats[k, l].R) @ W @ principal_sqrt(stats[k, l].T)
    return ChannelSet(topology, H, stats)


def resample_channel(channels, rng):
    """New realization ``H`` with the same topology and statistics."""
    top = channels.topology
    base = int(make_rng(rng).integers(2**63))
    H = {}
    for k, l in top.edges:
        Rs, Ts = channels.sqrt_factors(k, l)
        W = complex_gaussian_matrix(_edge_rng(base, k, l), top.M[k], top.N[l],
                                    std=1.0 / np.sqrt(top.N[l]))
        H[k, l] = Rs @ W @ Ts
    return ChannelSet(top, H, dict(channels.stats))


def kronecker_samples(R_factor, T_factor, rng, n_samples):
    """Vectorized draws of ``R_factor @ W @ T_factor^H``.

    ``W`` has CN(0, 1/cols) entries.  Pass principal square roots (which
    are Hermitian) to reproduce :func:`synthesize_channel`; any other
    factors with ``F F^H = R`` give the same distribution.
    """
    m, n = R_factor.shape[0], T_factor.shape[0]
    W = complex_gaussian_matrix(rng, n_samples * m, n, std=1.0 / np.sqrt(n))
    W = W.reshape(n_samples, m, n)
    return R_factor @ W @ T_factor.conj().T


def assemble_global(channels):
    """Stack all blocks into the ``M x N`` network matrix (zeros off-graph)."""
    top = channels.topology
    G = np.zeros((top.n_rx, top.n_tx), dtype=complex)
    for (k, l), h in channels.H.items():
        G[top.rx_slice(k), top.tx_slice(l)] = h
    return G


def channel_to_json(channels):
    top = channels.topology
    records = []
    for k, l in top.edges:
        st = channels.stats[k, l]
        records.append({
            "k": k, "l": l,
            "rho_R": jsonio.encode_float(st.rho_R),
            "rho_T": jsonio.encode_float(st.rho_T),
            "gain": jsonio.encode_float(st.gain),
            "H": jsonio.encode_matrix(channels.H[k, l]),
            "R": jsonio.encode_matrix(st.R),
            "T": jsonio.encode_matrix(st.T),
        })
    doc = {"schema_version": jsonio.SCHEMA_VERSION, "kind": "ChannelSet",
           "topology": top.to_dict(), "edges": records}
    return jsonio.dumps(doc)


def channel_from_json(text):
    doc = jsonio.loads(text)
    if doc.get("kind") != "ChannelSet":
        raise InvalidParam("document is not a ChannelSet")
    if doc.get("schema_version") != jsonio.SCHEMA_VERSION:
        raise InvalidParam(f"unsupported schema_version {doc.get('schema_version')}")
    top = NetworkTopology.from_dict(doc["topology"])
    H, stats = {}, {}
    for rec in doc["edges"]:
        k, l = int(rec["k"]), int(rec["l"])
        R = jsonio.decode_matrix(rec["R"])
        T = jsonio.decode_matrix(rec["T"])
        # real-valued correlation matrices are kept real
        if not R.imag.any():
            R = R.real.copy()
        if not T.imag.any():
            T = T.real.copy()
        stats[k, l] = EdgeStats(float(rec["rho_R"]), float(rec["rho_T"]),
                                float(rec["gain"]), R, T)
        H[k, l] = jsonio.decode_matrix(rec["H"])
    return ChannelSet(top, H, stats)
