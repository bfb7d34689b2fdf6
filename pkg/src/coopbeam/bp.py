"""Gaussian belief propagation for distributed RZF beamforming.

Variable nodes are the per-BS transmit blocks ``x_l``; factor nodes are
the per-UE residual terms ``||s_k - sum_l H_{k,l} x_l||^2 / beta_k``.
Because every density involved is Gaussian, each message is carried
exactly by a mean/covariance pair (variable -> factor) or by an
information pair ``(E, F)`` (factor -> variable)::

    G_{k\\l}   = sum_{j in B_k \\ l} H_{k,j} V_{j->k} H_{k,j}^H + beta_k I
    E_{k->l}  = H_{k,l}^H G_{k\\l}^{-1} H_{k,l}
    F_{k->l}  = H_{k,l}^H G_{k\\l}^{-1} (s_k - sum_{j in B_k \\ l} H_{k,j} x_{j->k})

    V_{l->k}  = (sum_{i in U_l \\ k} E_{i->l} + I)^{-1}
    x_{l->k}  = V_{l->k} sum_{i in U_l \\ k} F_{i->l}

and the belief of BS ``l`` uses the full sums over ``U_l``.  Rounds are
fully synchronous: all factor messages are computed from the previous
round's variable messages, then all variable messages from the new
factor messages.
"""

from dataclasses import dataclass, replace

import numpy as np

from .numerics import hermitian_part, hermitian_solve
from .topology import MessageCount, per_user

__all__ = ["BPState", "bp_init", "bp_factor_update", "bp_variable_update",
           "bp_round", "bp_estimate", "bp_messages"]


@dataclass(frozen=True)
class BPState:
    """Messages on every edge, keyed by ``(k, l)``.

    ``x``/``V`` travel BS -> UE, ``E``/``F`` travel UE -> BS.
    """
    topology: object
    t: int
    x: dict
    V: dict
    E: dict
    F: dict
    damping: float = 0.0


def bp_init(topology, damping=0.0):
    """All variable messages set to the prior ``(0, I)``; no factor information."""
    if not 0.0 <= damping < 1.0:
        raise ValueError(f"damping must lie in [0, 1), got {damping}")
    x, V, E, F = {}, {}, {}, {}
    for k, l in topology.edges:
        n = topology.N[l]
        x[k, l] = np.zeros(n, dtype=complex)
        V[k, l] = np.eye(n, dtype=complex)
        E[k, l] = np.zeros((n, n), dtype=complex)
        F[k, l] = np.zeros(n, dtype=complex)
    return BPState(topology, 0, x, V, E, F, damping)


def bp_factor_update(state, channels, s, beta):
    """Factor-to-variable messages ``(E, F)`` from the current ``(x, V)``.

    Returns
    -------
    E, F : dict
        New messages keyed by ``(k, l)``.
    """
    top = state.topology
    betas = per_user(beta, top.K)
    s_blocks = top.split_rx(s)
    E, F = {}, {}
    for k in range(top.K):
        ls = top.B[k]
        Mk = top.M[k]
        cov = {j: channels.H[k, j] @ state.V[k, j] @ channels.H[k, j].conj().T for j in ls}
        mean = {j: channels.H[k, j] @ state.x[k, j] for j in ls}
        for l in ls:
            G = betas[k] * np.eye(Mk, dtype=complex)
            r = s_blocks[k].astype(complex)
            for j in ls:
                if j != l:
                    G = G + cov[j]
                    r = r - mean[j]
            Hkl = channels.H[k, l]
            Y = hermitian_solve(hermitian_part(G), np.column_stack([Hkl, r]))
            E[k, l] = hermitian_part(Hkl.conj().T @ Y[:, :-1])
            F[k, l] = Hkl.conj().T @ Y[:, -1]
    return E, F


def bp_variable_update(state):
    """Variable-to-factor messages ``(x, V)`` from the current ``(E, F)``.

    Returns
    -------
    x, V : dict
        New messages keyed by ``(k, l)``; damped towards the previous
        ones when ``state.damping > 0``.
    """
    top = state.topology
    d = state.damping
    x, V = {}, {}
    for l in range(top.L):
        ks = top.U[l]
        n = top.N[l]
        F_full = sum(state.F[i, l] for i in ks)
        for k in ks:
            P = np.eye(n, dtype=complex)
            for i in ks:
                if i != k:
                    P = P + state.E[i, l]
            Y = hermitian_solve(hermitian_part(P),
                                np.column_stack([F_full - state.F[k, l], np.eye(n)]))
            xn, Vn = Y[:, 0], hermitian_part(Y[:, 1:])
            if d:
                xn = (1 - d) * xn + d * state.x[k, l]
                Vn = (1 - d) * Vn + d * state.V[k, l]
            x[k, l], V[k, l] = xn, Vn
    return x, V


def bp_round(state, channels, s, beta):
    """One synchronous round: factor update, then variable update."""
    E, F = bp_factor_update(state, channels, s, beta)
    mid = replace(state, E=E, F=F)
    x, V = bp_variable_update(mid)
    return replace(mid, x=x, V=V, t=state.t + 1)


def bp_estimate(state):
    """Beliefs ``x_l = (sum_i E_{i->l} + I)^{-1} sum_i F_{i->l}``, stacked."""
    top = state.topology
    out = []
    for l in range(top.L):
        ks = top.U[l]
        P = np.eye(top.N[l], dtype=complex) + sum(state.E[i, l] for i in ks)
        out.append(hermitian_solve(hermitian_part(P), sum(state.F[i, l] for i in ks)))
    return np.concatenate(out)


def bp_messages(topology):
    """Per-round traffic: one ``(x, V)`` and one ``(E, F)`` message per edge."""
    n_edges = len(topology.edges)
    scalars = sum(2 * (topology.N[l] + topology.N[l] ** 2) for _, l in topology.edges)
    return MessageCount(2 * n_edges, 2 * n_edges, scalars)
