"""Sharing-form ADMM baseline for the same regularized least squares.

The precoder minimizes

    sum_k (1/beta_k) ||s_k - sum_{l in B_k} H_{k,l} x_l||^2 + sum_l ||x_l||^2 ,

whose minimizer is the RZF precoder.  Each UE ``k`` shares its
residual among the ``n_k = |B_k|`` BSs that reach it; with per-UE
averages ``abar_k = (1/n_k) sum_{l in B_k} H_{k,l} x_l`` and scaled duals
``u_k`` one round of the scaled sharing iteration reads::

    c_{k,l} = H_{k,l} x_l + zbar_k - abar_k - u_k                (old values)
    x_l     = (2 I + rho sum_{k in U_l} H_{k,l}^H H_{k,l})^{-1}
              rho sum_{k in U_l} H_{k,l}^H c_{k,l}
    abar_k  = (1/n_k) sum_{l in B_k} H_{k,l} x_l                 (new x)
    zbar_k  = (s_k / beta_k + rho (u_k + abar_k) / 2) / (n_k / beta_k + rho / 2)
    u_k     = u_k + abar_k - zbar_k

The ``zbar`` line is the proximal step of ``(1/beta_k)||s_k - n_k z||^2``
with weight ``n_k rho / 2``.  Residuals use the usual sharing-problem
definitions: the primal residual stacks ``H_{k,l} x_l - z_{k,l}`` with
``z_{k,l} = H_{k,l} x_l + zbar_k - abar_k``, and the dual residual is
``rho sum_k H_{k,l}^H (z_{k,l} - z_{k,l}^prev)`` stacked over BSs.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidRho
from .numerics import hermitian_part, hermitian_solve
from .topology import MessageCount, per_user

__all__ = ["ADMMState", "admm_init", "admm_round", "admm_messages"]


@dataclass(frozen=True)
class ADMMState:
    topology: object
    rho: float
    t: int
    x: list      # per BS
    abar: list   # per UE, average of H_{k,l} x_l
    zbar: list   # per UE
    u: list      # per UE, scaled dual
    primal_residual: float = np.inf
    dual_residual: float = np.inf


def admm_init(topology, rho=1.0):
    """All-zero state with penalty `rho`."""
    rho = float(rho)
    if not rho > 0 or not np.isfinite(rho):
        raise InvalidRho(f"ADMM penalty must be positive and finite, got {rho}")
    zeros_ue = [np.zeros(m, dtype=complex) for m in topology.M]
    return ADMMState(topology, rho, 0,
                     x=[np.zeros(n, dtype=complex) for n in topology.N],
                     abar=list(zeros_ue), zbar=list(zeros_ue), u=list(zeros_ue))


def admm_round(state, channels, s, beta):
    """One x / zbar / u sweep; see the module docstring for the formulas."""
    top = state.topology
    rho = state.rho
    betas = per_user(beta, top.K)
    s_blocks = top.split_rx(s)
    H = channels.H
    shift = [state.zbar[k] - state.abar[k] - state.u[k] for k in range(top.K)]

    x = []
    for l in range(top.L):
        n = top.N[l]
        G = 2.0 * np.eye(n, dtype=complex)
        rhs = np.zeros(n, dtype=complex)
        for k in top.U[l]:
            Hh = H[k, l].conj().T
            G = G + rho * (Hh @ H[k, l])
            rhs = rhs + rho * (Hh @ (H[k, l] @ state.x[l] + shift[k]))
        x.append(hermitian_solve(hermitian_part(G), rhs))

    abar, zbar, u = [], [], []
    primal2 = 0.0
    for k in range(top.K):
        nk = len(top.B[k])
        a = sum(H[k, l] @ x[l] for l in top.B[k]) / nk
        z = (s_blocks[k] / betas[k] + 0.5 * rho * (state.u[k] + a)) / (nk / betas[k] + 0.5 * rho)
        abar.append(a)
        zbar.append(z)
        u.append(state.u[k] + a - z)
        primal2 += nk * float(np.vdot(a - z, a - z).real)

    dual2 = 0.0
    for l in range(top.L):
        acc = np.zeros(top.N[l], dtype=complex)
        for k in top.U[l]:
            dz = (H[k, l] @ (x[l] - state.x[l]) + zbar[k] - abar[k]
                  - state.zbar[k] + state.abar[k])
            acc = acc + H[k, l].conj().T @ dz
        dual2 += float(np.vdot(acc, acc).real)

    return replace(state, t=state.t + 1, x=x, abar=abar, zbar=zbar, u=u,
                   primal_residual=float(np.sqrt(primal2)),
                   dual_residual=rho * float(np.sqrt(dual2)))


def admm_messages(topology):
    """Per-round traffic: each BS broadcasts its ``H_{k,l} x_l`` terms,
    each UE returns one combined correction ``zbar_k - abar_k - u_k``."""
    n_edges = len(topology.edges)
    scalars = sum(2 * topology.M[k] for k, _ in topology.edges)
    return MessageCount(topology.L + topology.K, 2 * n_edges, scalars)
