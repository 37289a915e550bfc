"""Dense primitives: Kronecker product, row-major vec/mat, block views, norms.

Matrices and vectors are plain ``float64`` numpy arrays. ``vec_of`` flattens
row by row, so row ``i`` of ``X`` occupies entries ``i*c .. (i+1)*c - 1`` and
the flattening is a zero-copy reshape.
"""

import numpy as np

#: default per-factor caps for :func:`kron` (``n`` rows, ``d`` columns)
MAX_N = 64
MAX_D = 64


class CapacityError(ValueError):
    """Raised when a requested object exceeds the configured size budget."""


class ShapeError(ValueError):
    """Raised on incompatible shapes or lengths."""


def _as_matrix(a):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeError(f"expected a 2-d array, got shape {a.shape}")
    return a


def _as_vector(v):
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise ShapeError(f"expected a 1-d array, got shape {v.shape}")
    return v


def kron(a1, a2, max_n=MAX_N, max_d=MAX_D):
    """Kronecker product ``a1 (x) a2``.

    Entry ``(i1*n2 + i2, j1*d2 + j2)`` equals ``a1[i1, j1] * a2[i2, j2]``
    (zero-based). Each factor may have at most ``max_n`` rows and ``max_d``
    columns.
    """
    a1 = _as_matrix(a1)
    a2 = _as_matrix(a2)
    for a in (a1, a2):
        if a.shape[0] > max_n or a.shape[1] > max_d:
            raise CapacityError(
                f"factor of shape {a.shape} exceeds capacity n<={max_n}, d<={max_d}"
            )
    n1, d1 = a1.shape
    n2, d2 = a2.shape
    out = a1[:, None, :, None] * a2[None, :, None, :]
    return out.reshape(n1 * n2, d1 * d2)


def vec_of(X):
    """Row-major flattening of a matrix."""
    return _as_matrix(X).reshape(-1)


def mat_of(x, r, c):
    """Inverse of :func:`vec_of`."""
    x = _as_vector(x)
    if x.size != r * c:
        raise ShapeError(f"cannot reshape length {x.size} into {r}x{c}")
    return x.reshape(r, c)


def block_rows(A, j1, n):
    """Rows ``j1*n .. (j1+1)*n - 1`` of an ``n^2``-row matrix (zero-based ``j1``)."""
    A = _as_matrix(A)
    if A.shape[0] != n * n:
        raise ShapeError(f"expected {n * n} rows, got {A.shape[0]}")
    if not 0 <= j1 < n:
        raise IndexError(f"block index {j1} out of range for n={n}")
    return A[j1 * n:(j1 + 1) * n]


def blocks(A, n):
    """View an ``n^2 x k`` matrix as an ``n x n x k`` stack of block rows."""
    A = _as_matrix(A)
    if A.shape[0] != n * n:
        raise ShapeError(f"expected {n * n} rows, got {A.shape[0]}")
    return A.reshape(n, n, A.shape[1])


def _rayleigh_power(G, v, max_iter, rtol):
    lam = float(v @ G @ v)
    for _ in range(max_iter):
        w = G @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0, v, True
        v = w / nw
        lam_new = float(v @ G @ v)
        if abs(lam_new - lam) <= rtol * abs(lam_new):
            return lam_new, v, True
        lam = lam_new
    return lam, v, False


def spectral_norm(M, max_iter=500, rtol=1e-12, seed=0):
    """Largest singular value of ``M`` by power iteration on the Gram matrix.

    The smaller of ``M^T M`` and ``M M^T`` is iterated from a seeded random
    start; a second seed restarts the iteration if the first start is
    annihilated. When plain iteration has not met ``rtol`` within
    ``max_iter`` steps (tiny spectral gap), the Gram matrix is repeatedly
    squared, which powers the same iteration to ``2^k`` steps.
    """
    M = _as_matrix(M)
    if M.size == 0 or not np.any(M):
        return 0.0
    G = M.T @ M if M.shape[1] <= M.shape[0] else M @ M.T
    k = G.shape[0]
    if k == 1:
        return float(np.sqrt(G[0, 0]))

    lam, v, ok = 0.0, None, False
    for s in (seed, seed + 1):
        v0 = np.random.default_rng(s).standard_normal(k)
        v0 /= np.linalg.norm(v0)
        lam, v, ok = _rayleigh_power(G, v0, max_iter, rtol)
        if lam > 0.0:
            break

    if not ok and k <= 512:
        P = G / np.linalg.norm(G)
        for _ in range(60):
            P = P @ P
            nP = np.linalg.norm(P)
            if nP == 0.0 or not np.isfinite(nP):
                break
            P /= nP
        w = P @ v
        if np.linalg.norm(w) == 0.0:
            w = P[:, np.argmax(np.linalg.norm(P, axis=0))]
        w = w / np.linalg.norm(w)
        lam = max(lam, float(w @ G @ w))
        lam, _, _ = _rayleigh_power(G, w, 50, rtol)
    return float(np.sqrt(max(lam, 0.0)))


def hadamard(u, v):
    u, v = _as_vector(u), _as_vector(v)
    if u.shape != v.shape:
        raise ShapeError(f"length mismatch {u.size} vs {v.size}")
    return u * v


def inner(u, v):
    u, v = _as_vector(u), _as_vector(v)
    if u.shape != v.shape:
        raise ShapeError(f"length mismatch {u.size} vs {v.size}")
    return float(u @ v)


def norm2(u):
    return float(np.linalg.norm(_as_vector(u)))


def norm_inf(u):
    u = _as_vector(u)
    return float(np.max(np.abs(u))) if u.size else 0.0


def exp_elem(u):
    return np.exp(_as_vector(u))


def block_norms(A, n):
    """Spectral norm of each block row ``A_[j]`` of an ``n^2``-row matrix."""
    return np.array([spectral_norm(B) for B in blocks(A, n)])


def norm_inf2(A, B, n):
    """``max_j ||A_[j] - B_[j]||``: the block perturbation metric."""
    return float(np.max(block_norms(np.asarray(A) - np.asarray(B), n)))
