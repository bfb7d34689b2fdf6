"""Centralized reference computations.

The regularized zero-forcing precoder

    x = H^H (H H^H + beta I)^{-1} s

coincides with the posterior mean of ``x`` under the virtual model
``s = H x + z~`` with ``z~ ~ CN(0, beta I)`` and prior ``x ~ CN(0, I)``.
Both forms are provided so each can check the other.  The distributed
algorithms all target this unnormalized ``x``; power normalization is a
separate post-processing step.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionMismatch, ZeroPrecoder
from .numerics import hermitian_part, hermitian_solve

__all__ = ["PrecoderSolution", "rzfbf_centralized", "mmse_virtual",
           "power_normalize", "lemma2_expectation"]


@dataclass(frozen=True)
class PrecoderSolution:
    x: np.ndarray
    beta: float
    alpha: Optional[float] = None
    budgets: Optional[tuple] = None

    def blocks(self, sizes):
        """Split ``x`` into per-BS pieces of the given lengths."""
        edges = np.cumsum([0, *sizes])
        if edges[-1] != self.x.shape[0]:
            raise DimensionMismatch(f"block sizes sum to {edges[-1]}, x has {self.x.shape[0]}")
        return [self.x[a:b] for a, b in zip(edges[:-1], edges[1:])]


def _user_beta(beta, n):
    b = np.asarray(beta, dtype=float)
    return np.full(n, float(b)) if b.ndim == 0 else b


def rzfbf_centralized(H, s, beta):
    """Unnormalized RZF precoder ``H^H (H H^H + beta I)^{-1} s``.

    `beta` may be a scalar or a per-row array (one entry per receive
    antenna), in which case ``beta I`` becomes ``diag(beta)``.
    """
    H = np.asarray(H)
    s = np.asarray(s)
    if H.shape[0] != s.shape[0]:
        raise DimensionMismatch(f"H has {H.shape[0]} rows, s has {s.shape[0]}")
    G = hermitian_part(H @ H.conj().T) + np.diag(_user_beta(beta, H.shape[0]))
    x = H.conj().T @ hermitian_solve(G, s)
    return PrecoderSolution(x=x, beta=beta)


def mmse_virtual(H, s, beta):
    """Posterior mean of ``x`` in the virtual model, primal form.

    Solves ``(H^H D H + I) x = H^H D s`` with ``D = diag(1 / beta)``.
    """
    H = np.asarray(H)
    s = np.asarray(s)
    if H.shape[0] != s.shape[0]:
        raise DimensionMismatch(f"H has {H.shape[0]} rows, s has {s.shape[0]}")
    d = 1.0 / _user_beta(beta, H.shape[0])
    HdH = hermitian_part(H.conj().T @ (d[:, None] * H))
    return hermitian_solve(HdH + np.eye(H.shape[1]), H.conj().T @ (d * s))


def power_normalize(solution, sizes, budgets):
    """Scale a precoder so that no BS exceeds its power budget.

    Uses the per-realization constraint ``||x_l||^2 <= P_l`` and picks
    the largest common scale: ``alpha = min_l sqrt(P_l / ||x_l||^2)``.
    BSs whose block is zero impose no constraint.

    Raises
    ------
    ZeroPrecoder
        If every block is zero.
    """
    blocks = solution.blocks(sizes)
    budgets = tuple(float(p) for p in budgets)
    if len(budgets) != len(blocks):
        raise DimensionMismatch(f"{len(budgets)} budgets for {len(blocks)} BSs")
    if any(p <= 0 for p in budgets):
        raise ValueError("power budgets must be positive")
    ratios = [np.sqrt(p / np.vdot(xl, xl).real)
              for xl, p in zip(blocks, budgets) if np.any(xl != 0)]
    if not ratios:
        raise ZeroPrecoder("precoder is identically zero")
    alpha = float(min(ratios))
    return PrecoderSolution(x=alpha * solution.x, beta=solution.beta,
                            alpha=alpha, budgets=budgets)


def lemma2_expectation(Xbar, A, B, C, side="XCXh"):
    """Closed-form second moments of a matrix-variate complex Gaussian.

    For ``X = Xbar + A^{1/2} W B^{1/2}`` with unit-variance i.i.d. ``W``
    (``A`` is ``m x m``, ``B`` is ``n x n``, ``X`` is ``m x n``):

    * ``side='XCXh'``: ``E[X C X^H] = Xbar C Xbar^H + tr(B C) A``
    * ``side='XhDX'``: ``E[X^H D X] = Xbar^H D Xbar + tr(A D) B``
      (pass ``D`` as `C`).
    """
    Xbar, A, B, C = (np.asarray(v) for v in (Xbar, A, B, C))
    m, n = Xbar.shape
    if A.shape != (m, m) or B.shape != (n, n):
        raise DimensionMismatch(
            f"Xbar is {Xbar.shape}; need A {(m, m)} and B {(n, n)}, got {A.shape}, {B.shape}")
    if side == "XCXh":
        if C.shape != (n, n):
            raise DimensionMismatch(f"C must be {(n, n)}, got {C.shape}")
        return Xbar @ C @ Xbar.conj().T + np.trace(B @ C) * A
    if side == "XhDX":
        if C.shape != (m, m):
            raise DimensionMismatch(f"D must be {(m, m)}, got {C.shape}")
        return Xbar.conj().T @ C @ Xbar + np.trace(A @ C) * B
    raise ValueError(f"side must be 'XCXh' or 'XhDX', got {side!r}")
