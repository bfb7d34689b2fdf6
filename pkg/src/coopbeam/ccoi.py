"""Covariance-aided AMP (CCoI-AMP).

AMP's per-round matrix quantities depend on the channel realization and
need fresh inversions every round.  Here they are replaced by
deterministic surrogates built from the correlation matrices alone.
Starting from ``Rbar^0 = 0`` and ``Tbar^0 = 0``, for ``t = 1, 2, ...``::

    st[k,l]  = tr(T_{k,l} (Tbar_l^{t-1} + I)^{-1}) / N_l
    Rbar_k   = sum_{l in B_k} st[k,l] R_{k,l}
    sg[k,l]  = tr(R_{k,l} (Rbar_k^t + beta_k I)^{-1}) / N_l
    Tbar_l   = sum_{k in U_l} sg[k,l] T_{k,l}
    A_l      = Tbar_l (Tbar_l + I)^{-1}
    B_k      = Rbar_k^t (Rbar_k^{t-1} + beta_k I)^{-1}

These statics never see ``H``, ``s`` or ``x`` and can be computed once
per covariance epoch.  The per-round work is then matrix-vector only::

    nu_k <- s_k - sum_{l in B_k} H_{k,l} x_l + B_k nu_k
    x_l  <- (Tbar_l + I)^{-1} (Tbar_l x_l + sum_{k in U_l} H_{k,l}^H (Rbar_k + beta_k I)^{-1} nu_k)

The second line is ``A_l [x_l + Tbar_l^{-1} (...)]`` rearranged so that
no standalone ``Tbar_l^{-1}`` is needed.
"""

import hashlib
from dataclasses import dataclass, replace

import numpy as np

from . import jsonio
from .errors import InvalidParam
from .numerics import hermitian_inverse, hermitian_part
from .topology import MessageCount, NetworkTopology, per_user

__all__ = ["CCoIStatics", "CCoIState", "ccoi_precompute", "ccoi_init", "ccoi_round",
           "ccoi_messages", "ccoi_statics_messages", "statics_to_json",
           "statics_from_json", "statics_key", "clear_statics_cache"]


@dataclass(frozen=True)
class CCoIStatics:
    """Covariance-only operators for rounds ``t = 1..T_max``.

    Lists are indexed by ``t - 1``.  ``Rinv[t-1][k]`` is
    ``(Rbar_k^t + beta_k I)^{-1}`` and ``P[t-1][l]`` is ``(Tbar_l^t + I)^{-1}``.
    """
    topology: NetworkTopology
    beta: tuple
    T_max: int
    st: list       # per t: {(k, l): tilde-varsigma}
    sg: list       # per t: {(k, l): varsigma}
    Rbar: list     # per t: [M_k x M_k]
    Tbar: list     # per t: [N_l x N_l]
    A: list
    B: list
    Rinv: list
    P: list
    key: str = ""

    def at(self, t):
        """Index into the lists for round ``t``; the last entry is reused past ``T_max``."""
        if t < 1:
            raise ValueError("rounds are numbered from 1")
        return min(t, self.T_max) - 1


@dataclass(frozen=True)
class CCoIState:
    topology: object
    t: int
    x: list
    nu: list
    first_round_onsager: bool = False
    damping: float = 0.0


def statics_key(channels, beta, T_max):
    """Content hash of everything the statics depend on."""
    top = channels.topology
    h = hashlib.sha256()
    h.update(repr(top.to_dict()).encode())
    h.update(np.asarray(per_user(beta, top.K)).tobytes())
    h.update(str(int(T_max)).encode())
    for e in top.edges:
        st = channels.stats[e]
        h.update(np.ascontiguousarray(st.R).tobytes())
        h.update(np.ascontiguousarray(st.T).tobytes())
    return h.hexdigest()


_CACHE = {}


def clear_statics_cache():
    _CACHE.clear()


def ccoi_precompute(channels, beta, T_max, *, cache=True):
    """Run the statics recursion for ``T_max`` rounds.

    Only ``channels.topology`` and ``channels.stats`` (the ``R``/``T``
    matrices) are read.  Results are memoized by a content hash of those
    inputs when `cache` is true.
    """
    if T_max < 1:
        raise InvalidParam("T_max must be >= 1")
    key = statics_key(channels, beta, T_max)
    if cache and key in _CACHE:
        return _CACHE[key]

    top = channels.topology
    betas = per_user(beta, top.K)
    R = {e: channels.stats[e].R for e in top.edges}
    T = {e: channels.stats[e].T for e in top.edges}
    Tbar_prev = [np.zeros((n, n)) for n in top.N]
    Rbar_prev = [np.zeros((m, m)) for m in top.M]
    out = {name: [] for name in ("st", "sg", "Rbar", "Tbar", "A", "B", "Rinv", "P")}
    for _ in range(T_max):
        Pprev = [hermitian_inverse(Tb + np.eye(Tb.shape[0])) for Tb in Tbar_prev]
        st = {(k, l): float(np.trace(T[k, l] @ Pprev[l]).real) / top.N[l]
              for k, l in top.edges}
        Rbar = [hermitian_part(sum(st[k, l] * R[k, l] for l in top.B[k]))
                for k in range(top.K)]
        Rinv = [hermitian_inverse(Rbar[k] + betas[k] * np.eye(top.M[k])) for k in range(top.K)]
        sg = {(k, l): float(np.trace(R[k, l] @ Rinv[k]).real) / top.N[l]
              for k, l in top.edges}
        Tbar = [hermitian_part(sum(sg[k, l] * T[k, l] for k in top.U[l]))
                for l in range(top.L)]
        P = [hermitian_inverse(Tb + np.eye(Tb.shape[0])) for Tb in Tbar]
        A = [Tb @ Pl for Tb, Pl in zip(Tbar, P)]
        Rprev_inv = [hermitian_inverse(Rbar_prev[k] + betas[k] * np.eye(top.M[k]))
                     for k in range(top.K)]
        B = [Rb @ Ri for Rb, Ri in zip(Rbar, Rprev_inv)]
        for name, val in (("st", st), ("sg", sg), ("Rbar", Rbar), ("Tbar", Tbar),
                          ("A", A), ("B", B), ("Rinv", Rinv), ("P", P)):
            out[name].append(val)
        Tbar_prev, Rbar_prev = Tbar, Rbar

    statics = CCoIStatics(top, betas, int(T_max), key=key, **out)
    if cache:
        _CACHE[key] = statics
    return statics


def ccoi_init(topology, s, *, first_round_onsager=False, damping=0.0):
    """``x = 0`` and ``nu = s``.

    By default round one carries no memory term, as in
    :func:`coopbeam.amp.amp_init`.  ``first_round_onsager=True`` applies
    ``B^1 = Rbar^1 / beta`` to ``nu^0 = s`` in round one, which
    overshoots badly before settling.
    """
    if not 0.0 <= damping < 1.0:
        raise ValueError(f"damping must lie in [0, 1), got {damping}")
    return CCoIState(topology, 0,
                     [np.zeros(n, dtype=complex) for n in topology.N],
                     [b.astype(complex) for b in topology.split_rx(np.asarray(s))],
                     bool(first_round_onsager), float(damping))


def ccoi_round(state, statics, channels, s, beta=None):
    """One round using precomputed statics; matrix-vector products only.

    `beta` is optional since the statics already carry it; when given it
    must agree with them.
    """
    top = state.topology
    if beta is not None and per_user(beta, top.K) != tuple(statics.beta):
        raise InvalidParam("beta differs from the one the statics were built with")
    i = statics.at(state.t + 1)
    B, Rinv, Tbar, P = statics.B[i], statics.Rinv[i], statics.Tbar[i], statics.P[i]
    s_blocks = top.split_rx(s)
    with_memory = state.t > 0 or state.first_round_onsager

    nu = []
    for k in range(top.K):
        r = s_blocks[k].astype(complex)
        for l in top.B[k]:
            r = r - channels.H[k, l] @ state.x[l]
        if with_memory:
            r = r + B[k] @ state.nu[k]
        nu.append(r)

    white = [Rinv[k] @ nu[k] for k in range(top.K)]
    d = state.damping
    x = []
    for l in range(top.L):
        g = sum(channels.H[k, l].conj().T @ white[k] for k in top.U[l])
        xl = P[l] @ (Tbar[l] @ state.x[l] + g)
        if d:
            xl = (1 - d) * xl + d * state.x[l]
        x.append(xl)
    return replace(state, t=state.t + 1, x=x, nu=nu)


def ccoi_messages(topology):
    """Per-round traffic: ``H x_l`` broadcasts from BSs, ``nu_k`` from UEs."""
    n_edges = len(topology.edges)
    scalars = sum(2 * topology.M[k] for k, _ in topology.edges)
    return MessageCount(topology.K + topology.L, 2 * n_edges, scalars)


def ccoi_statics_messages(topology, T_max):
    """One-off traffic of the statics recursion (two real scalars per edge per step)."""
    n_edges = len(topology.edges)
    return MessageCount(T_max * (topology.K + topology.L), 2 * T_max * n_edges,
                        2 * T_max * n_edges)


def statics_to_json(statics):
    top = statics.topology
    enc = jsonio.encode_matrix
    steps = []
    for i in range(statics.T_max):
        steps.append({
            "t": i + 1,
            "tilde_varsigma": [[k, l, jsonio.encode_float(statics.st[i][k, l])] for k, l in top.edges],
            "varsigma": [[k, l, jsonio.encode_float(statics.sg[i][k, l])] for k, l in top.edges],
            "Rbar": [enc(m) for m in statics.Rbar[i]],
            "Tbar": [enc(m) for m in statics.Tbar[i]],
            "A": [enc(m) for m in statics.A[i]],
            "B": [enc(m) for m in statics.B[i]],
            "Rinv": [enc(m) for m in statics.Rinv[i]],
            "P": [enc(m) for m in statics.P[i]],
        })
    doc = {"schema_version": jsonio.SCHEMA_VERSION, "kind": "CCoIStatics",
           "key": statics.key, "topology": top.to_dict(),
           "beta": [jsonio.encode_float(b) for b in statics.beta],
           "T_max": statics.T_max, "steps": steps}
    return jsonio.dumps(doc)


def statics_from_json(text):
    doc = jsonio.loads(text)
    if doc.get("kind") != "CCoIStatics":
        raise InvalidParam("document is not a CCoIStatics export")
    if doc.get("schema_version") != jsonio.SCHEMA_VERSION:
        raise InvalidParam(f"unsupported schema_version {doc.get('schema_version')}")
    top = NetworkTopology.from_dict(doc["topology"])
    dec = jsonio.decode_matrix
    out = {name: [] for name in ("st", "sg", "Rbar", "Tbar", "A", "B", "Rinv", "P")}
    for step in doc["steps"]:
        out["st"].append({(k, l): float(v) for k, l, v in step["tilde_varsigma"]})
        out["sg"].append({(k, l): float(v) for k, l, v in step["varsigma"]})
        for name in ("Rbar", "Tbar", "A", "B", "Rinv", "P"):
            out[name].append([dec(m) for m in step[name]])
    return CCoIStatics(top, tuple(float(b) for b in doc["beta"]), int(doc["T_max"]),
                       key=doc.get("key", ""), **out)
