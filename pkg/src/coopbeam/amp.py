"""Approximate message passing for distributed RZF beamforming.

BP's per-edge messages are collapsed to per-node quantities plus an
Onsager memory term on the user residual.  Each round has a UE phase
and a BS phase::

    UE k:  Omega_k = sum_{l in B_k} H_{k,l} V_l H_{k,l}^H
           nu_k    = s_k - sum_{l in B_k} H_{k,l} x_l
                     + Omega_k (Omega_k^prev + beta I)^{-1} nu_k^prev
    BS l:  Sigma_l = sum_{k in U_l} H_{k,l}^H (Omega_k + beta I)^{-1} H_{k,l}
           g_l     = sum_{k in U_l} H_{k,l}^H (Omega_k + beta I)^{-1} nu_k
           x_l     = (Sigma_l + I)^{-1} (Sigma_l x_l + g_l)
           V_l     = (Sigma_l + I)^{-1}

The ``x`` update is the fused form of ``(Sigma + I)^{-1} Sigma mu`` with
``mu = x + Sigma^{-1} g``; it never inverts ``Sigma`` alone, so a
rank-deficient ``Sigma`` is harmless.

Variant flags
-------------
onsager_order : 'derived' (default) applies ``Omega^t (Omega^{t-1} + beta I)^{-1}``
    to ``nu^{t-1}``; 'printed' applies ``(Omega^{t-1} + beta I)^{-1} Omega^t``.
first_round_onsager : if False (default) the first round carries no
    memory term, so ``nu^1 = s - H x^0 = s``, matching one round of BP
    started from zero messages.  If True, ``Omega^0 = 0`` is used and the
    first correction is ``Omega^1 s / beta``.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import SingularSigma
from .numerics import hermitian_inverse, hermitian_part, hermitian_solve
from .topology import MessageCount, per_user

__all__ = ["AMPState", "amp_init", "amp_ue_update", "amp_bs_update",
           "amp_round", "amp_messages", "amp_mu"]

ORDERS = ("derived", "printed")


@dataclass(frozen=True)
class AMPState:
    topology: object
    t: int
    x: list          # per BS, (N_l,)
    V: list          # per BS, (N_l, N_l)
    Sigma: list      # per BS
    g: list          # per BS, matched-filter term feeding mu
    Omega: list      # per UE, latest
    Omega_prev: list
    Q: list          # per UE, (Omega + beta I)^{-1} for the latest Omega
    nu: list         # per UE, (M_k,)
    x_prev: list = None
    onsager_order: str = "derived"
    first_round_onsager: bool = False
    damping: float = 0.0


def amp_init(topology, s, *, onsager_order="derived", first_round_onsager=False,
             damping=0.0):
    """``x = 0``, ``V = I``, ``nu = s``, ``Omega = Omega_prev = 0``."""
    if onsager_order not in ORDERS:
        raise ValueError(f"onsager_order must be one of {ORDERS}")
    if not 0.0 <= damping < 1.0:
        raise ValueError(f"damping must lie in [0, 1), got {damping}")
    s_blocks = topology.split_rx(np.asarray(s, dtype=complex))
    zeros_ue = [np.zeros((m, m), dtype=complex) for m in topology.M]
    return AMPState(
        topology=topology, t=0,
        x=[np.zeros(n, dtype=complex) for n in topology.N],
        V=[np.eye(n, dtype=complex) for n in topology.N],
        Sigma=[np.zeros((n, n), dtype=complex) for n in topology.N],
        g=[np.zeros(n, dtype=complex) for n in topology.N],
        Omega=zeros_ue, Omega_prev=list(zeros_ue), Q=[None] * topology.K,
        nu=[b.copy() for b in s_blocks],
        onsager_order=onsager_order, first_round_onsager=bool(first_round_onsager),
        damping=float(damping),
    )


def amp_ue_update(state, channels, s, beta):
    """UE phase: new ``Omega_k`` and Onsager-corrected residual ``nu_k``.

    Reads only BS quantities of the previous round.
    """
    top = state.topology
    betas = per_user(beta, top.K)
    s_blocks = top.split_rx(s)
    with_memory = state.t > 0 or state.first_round_onsager
    Omega, nu, Q = [], [], []
    for k in range(top.K):
        Mk = top.M[k]
        Om = np.zeros((Mk, Mk), dtype=complex)
        r = s_blocks[k].astype(complex)
        for l in top.B[k]:
            Hkl = channels.H[k, l]
            Om = Om + Hkl @ state.V[l] @ Hkl.conj().T
            r = r - Hkl @ state.x[l]
        Om = hermitian_part(Om)
        shift = betas[k] * np.eye(Mk)
        if with_memory:
            if state.onsager_order == "derived":
                Qold = state.Q[k] if state.Q[k] is not None else hermitian_inverse(state.Omega[k] + shift)
                r = r + Om @ (Qold @ state.nu[k])
            else:
                r = r + hermitian_solve(hermitian_part(state.Omega[k] + shift), Om @ state.nu[k])
        Omega.append(Om)
        nu.append(r)
        Q.append(hermitian_inverse(Om + shift))
    return replace(state, Omega=Omega, Omega_prev=list(state.Omega), Q=Q, nu=nu)


def amp_bs_update(state, channels):
    """BS phase: ``Sigma_l``, ``g_l``, then ``x_l`` and ``V_l``.

    Reads only UE quantities of the current round.
    """
    top = state.topology
    d = state.damping
    x, V, Sigma, g = [], [], [], []
    for l in range(top.L):
        n = top.N[l]
        S = np.zeros((n, n), dtype=complex)
        gl = np.zeros(n, dtype=complex)
        for k in top.U[l]:
            Hkl_h = channels.H[k, l].conj().T
            S = S + Hkl_h @ state.Q[k] @ channels.H[k, l]
            gl = gl + Hkl_h @ (state.Q[k] @ state.nu[k])
        S = hermitian_part(S)
        Y = hermitian_solve(S + np.eye(n), np.column_stack([S @ state.x[l] + gl, np.eye(n)]))
        xl, Vl = Y[:, 0], hermitian_part(Y[:, 1:])
        if d:
            xl = (1 - d) * xl + d * state.x[l]
            Vl = (1 - d) * Vl + d * state.V[l]
        x.append(xl)
        V.append(Vl)
        Sigma.append(S)
        g.append(gl)
    return replace(state, x=x, V=V, Sigma=Sigma, g=g, x_prev=list(state.x))


def amp_round(state, channels, s, beta):
    """UE phase then BS phase; advances ``t`` by one."""
    mid = amp_ue_update(state, channels, s, beta)
    return replace(amp_bs_update(mid, channels), t=state.t + 1)


def amp_mu(state):
    """Per-BS ``mu_l = x_l^{t-1} + Sigma_l^{-1} g_l`` from the last BS phase.

    Only defined where ``Sigma_l`` is nonsingular; the iteration itself
    never needs it.
    """
    if state.x_prev is None:
        raise ValueError("no BS phase has run yet")
    out = []
    for S, gl, xl in zip(state.Sigma, state.g, state.x_prev):
        try:
            out.append(xl + hermitian_solve(S, gl))
        except ArithmeticError as exc:
            raise SingularSigma(str(exc)) from None
    return out


def amp_messages(topology):
    """Per-round traffic on any topology.

    Every BS broadcasts two quantities (``H x_l`` and ``H V_l H^H``
    contributions) and every UE two (``nu_k`` and ``Omega_k``), giving
    ``2 (K + L)`` originated messages.  Each is delivered once per
    incident edge.
    """
    n_edges = len(topology.edges)
    scalars = sum(2 * (topology.M[k] + topology.M[k] ** 2) for k, _ in topology.edges)
    return MessageCount(2 * (topology.K + topology.L), 4 * n_edges, scalars)
