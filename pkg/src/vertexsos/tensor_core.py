"""Dense complex tensor kernel.

Every operator in the package is a plain ``numpy.ndarray`` of dtype
``complex128``.  Multi-factor objects (vectors or operators on
``C^d1 (x) C^d2 (x) ...``) are stored flat in row-major order, with the
Kronecker index convention ``(A (x) B)[i*dB + k, j*dB + l] = A[i, j] B[k, l]``.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
import scipy.linalg

from .errors import DimensionError, SingularMatrix

__all__ = [
    "as_operator",
    "as_tensor",
    "kron",
    "permute_factors",
    "embed_two_site",
    "frobenius_norm",
    "mat_inverse",
]

SINGULAR_RTOL = 1e-13


def as_tensor(values, shape=None) -> np.ndarray:
    """Return a finite complex array, optionally reshaped to ``shape``."""
    arr = np.array(values, dtype=complex)
    if shape is not None:
        shape = tuple(int(s) for s in shape)
        if any(s <= 0 for s in shape):
            raise DimensionError(f"shape entries must be positive, got {shape}")
        if arr.size != math.prod(shape):
            raise DimensionError(f"{arr.size} entries do not fill shape {shape}")
        arr = arr.reshape(shape)
    if not np.all(np.isfinite(arr)):
        raise ValueError("tensor entries must be finite")
    return arr


def as_operator(A) -> np.ndarray:
    """Validate a square finite complex matrix."""
    arr = as_tensor(A)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {arr.shape}")
    return arr


def kron(A, B) -> np.ndarray:
    return np.kron(as_operator(A), as_operator(B))


def _check_perm(perm, n):
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(n)):
        raise DimensionError(f"{perm} is not a permutation of {n} factors")
    return perm


def permute_factors(T, dims, perm) -> np.ndarray:
    """Move tensor factor ``i`` to position ``perm[i]``.

    ``T`` is either a vector of length ``prod(dims)`` or a square operator of
    that size; for operators the row and column factors move together, so
    the result is ``P T P^-1`` for the corresponding permutation matrix.
    """
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    perm = _check_perm(perm, n)
    total = math.prod(dims)
    T = np.asarray(T, dtype=complex)
    # numpy's transpose wants, for each new axis, the old axis it comes from
    src = [0] * n
    for old, new in enumerate(perm):
        src[new] = old
    new_dims = tuple(dims[s] for s in src)
    if T.ndim == 1:
        if T.shape[0] != total:
            raise DimensionError(f"vector of length {T.shape[0]} does not factor as {dims}")
        return T.reshape(dims).transpose(src).reshape(total)
    if T.ndim == 2 and T.shape == (total, total):
        axes = src + [n + s for s in src]
        return T.reshape(dims + dims).transpose(axes).reshape(
            math.prod(new_dims), math.prod(new_dims)
        )
    raise DimensionError(f"shape {T.shape} does not factor as {dims}")


def embed_two_site(R, d, sites, n=3) -> np.ndarray:
    """Place a two-site operator ``R`` on ``(C^d)^{(x) n}`` acting on ``sites``.

    ``embed_two_site(R, 2, (0, 2))`` is the usual ``R_13``.
    """
    R = as_operator(R)
    if R.shape[0] != d * d:
        raise DimensionError(f"two-site operator must be {d*d}x{d*d}, got {R.shape}")
    i, j = sites
    if i == j or not (0 <= i < n and 0 <= j < n):
        raise DimensionError(f"invalid site pair {sites} for {n} factors")
    rest = [s for s in range(n) if s not in (i, j)]
    full = np.kron(R, np.eye(d ** (n - 2), dtype=complex))
    perm = [i, j] + rest
    return permute_factors(full, (d,) * n, perm)


def frobenius_norm(T) -> float:
    T = np.asarray(T, dtype=complex)
    return float(np.sqrt(np.sum(T.real**2 + T.imag**2)))


def mat_inverse(A) -> np.ndarray:
    """Inverse via partial-pivot LU.

    Raises :class:`SingularMatrix` when a pivot falls to or below
    ``1e-13 * ||A||_F``.
    """
    A = as_operator(A)
    scale = frobenius_norm(A)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if scale == 0.0 or pivots.min() <= SINGULAR_RTOL * scale:
        raise SingularMatrix(
            f"pivot {pivots.min():.3e} below {SINGULAR_RTOL:g} * ||A||_F = {SINGULAR_RTOL*scale:.3e}"
        )
    return scipy.linalg.lu_solve((lu, piv), np.eye(A.shape[0], dtype=complex))
