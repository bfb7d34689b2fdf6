"""Dense complex linear algebra and the seeded random source.

Matrices are plain ``numpy`` arrays of dtype ``complex128`` (or real
arrays where the value is real, e.g. correlation matrices).  Column
vectors are 1-D arrays.

Random numbers come from :func:`make_rng`, which returns a
``numpy.random.Generator`` backed by the PCG64 bit generator seeded
through ``numpy.random.SeedSequence``.  For a fixed seed the stream is
identical on every platform.
"""

import contextlib

import numpy as np
import scipy.linalg

from .errors import (DimensionMismatch, IndefiniteBeyondTolerance,
                     InvalidRho, NotHermitian, NotPositiveDefinite)

__all__ = [
    "HERMITIAN_TOL", "make_rng", "spawn_rngs", "hermitian_solve",
    "hermitian_inverse", "hermitian_part", "principal_sqrt",
    "complex_gaussian_matrix", "exp_correlation", "track_factorizations",
]

#: Absolute tolerance on ``max |A_ij - conj(A_ji)|``.
HERMITIAN_TOL = 1e-10

#: Relative eigenvalue floor below which :func:`principal_sqrt` refuses.
SQRT_CLAMP = 1e-12

_trackers = []


class FactorizationCount:
    """Counter filled in by :func:`track_factorizations`."""

    def __init__(self):
        self.count = 0

    def __repr__(self):
        return f"FactorizationCount({self.count})"


@contextlib.contextmanager
def track_factorizations():
    """Count matrix factorizations performed inside the block.

    Every Cholesky or eigen-decomposition done through this module
    increments all active counters.  Used for complexity accounting and
    for auditing that an update involves matrix-vector work only.

    Examples
    --------
    >>> with track_factorizations() as fc:
    ...     _ = hermitian_solve(np.eye(2), np.ones(2))
    >>> fc.count
    1
    """
    fc = FactorizationCount()
    _trackers.append(fc)
    try:
        yield fc
    finally:
        _trackers.remove(fc)


def _tick():
    for fc in _trackers:
        fc.count += 1


def make_rng(seed):
    """Return a PCG64-backed generator for a 64-bit unsigned ``seed``."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def spawn_rngs(seed, n):
    """Return ``n`` statistically independent generators derived from ``seed``."""
    ss = np.random.SeedSequence(int(seed))
    return [np.random.Generator(np.random.PCG64(c)) for c in ss.spawn(n)]


def _check_hermitian(A, name="A"):
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NotHermitian(f"{name} must be square, got shape {A.shape}")
    dev = np.max(np.abs(A - A.conj().T)) if A.size else 0.0
    if not dev <= HERMITIAN_TOL:
        raise NotHermitian(f"{name} is not Hermitian (max deviation {dev:.3e})")
    return A


def hermitian_part(A):
    """Return ``(A + A^H) / 2``."""
    return 0.5 * (A + A.conj().T)


def hermitian_solve(A, B):
    """Solve ``A X = B`` for Hermitian positive-definite ``A``.

    Uses a Cholesky factorization (direct, no iteration), so results are
    deterministic for given inputs.

    Parameters
    ----------
    A : (n, n) array_like
        Hermitian positive-definite matrix.
    B : (n,) or (n, m) array_like
        Right-hand side(s).

    Returns
    -------
    X : ndarray
        Same shape as `B`.

    Raises
    ------
    NotHermitian
        If ``max |A - A^H|`` exceeds :data:`HERMITIAN_TOL`.
    NotPositiveDefinite
        If the factorization hits a non-positive pivot.
    """
    A = _check_hermitian(A)
    B = np.asarray(B)
    if B.shape[0] != A.shape[0]:
        raise DimensionMismatch(f"A is {A.shape}, B has {B.shape[0]} rows")
    _tick()
    try:
        c = scipy.linalg.cho_factor(A, lower=True, check_finite=True)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    return scipy.linalg.cho_solve(c, B, check_finite=False)


def hermitian_inverse(A):
    """Inverse of a Hermitian PD matrix, symmetrized to be exactly Hermitian."""
    A = np.asarray(A)
    X = hermitian_solve(A, np.eye(A.shape[0], dtype=A.dtype))
    return hermitian_part(X)


def principal_sqrt(A):
    """Principal (Hermitian PSD) square root of a Hermitian PSD matrix.

    Eigenvalues in ``[-1e-12 * ||A||, 0)`` are treated as rounding noise
    and clamped to zero.

    Raises
    ------
    NotHermitian
    IndefiniteBeyondTolerance
        If an eigenvalue is below ``-1e-12 * ||A||_2``.
    """
    A = _check_hermitian(A)
    _tick()
    w, U = np.linalg.eigh(A)
    scale = np.max(np.abs(w)) if w.size else 0.0
    if w.size and w[0] < -SQRT_CLAMP * scale:
        raise IndefiniteBeyondTolerance(
            f"eigenvalue {w[0]:.3e} below -{SQRT_CLAMP:g}*||A|| = {-SQRT_CLAMP * scale:.3e}")
    S = (U * np.sqrt(np.clip(w, 0.0, None))) @ U.conj().T
    return hermitian_part(S)


def complex_gaussian_matrix(rng, m, n, std=1.0):
    """Draw an ``m x n`` matrix of i.i.d. circularly-symmetric complex Gaussians.

    Each entry has mean 0 and variance ``std**2`` (``std**2 / 2`` per
    real and imaginary part).
    """
    if std < 0:
        raise ValueError("std must be nonnegative")
    z = rng.standard_normal((m, n, 2))
    return (z[..., 0] + 1j * z[..., 1]) * (std / np.sqrt(2.0))


def exp_correlation(rho, n):
    """Exponential correlation matrix with entries ``rho ** |i - j|``.

    >>> exp_correlation(0.5, 2)
    array([[1. , 0.5],
           [0.5, 1. ]])
    """
    if not 0.0 <= rho < 1.0:
        raise InvalidRho(f"rho must lie in [0, 1), got {rho}")
    if n < 1:
        raise ValueError("n must be positive")
    idx = np.arange(n)
    return np.power(float(rho), np.abs(idx[:, None] - idx[None, :])).astype(float)
