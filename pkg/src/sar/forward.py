"""Per-block softmax quantities ``u, alpha, f, h, c, q`` and the normalizer ``D``.

Block ``j`` of every ``n^2`` vector is stored as row ``j`` of an ``n x n``
array. No log-sum-exp shift is applied: certified quantities such as
``||u_j||`` are compared against raw ``exp(R^2)`` bounds.
"""

import math
from dataclasses import dataclass

import numpy as np

from .records import CertRecord, safe_log
from .tensor import ShapeError

#: largest admissible ``|A x|`` entry before exponentiation
EXP_GUARD = 700.0
#: smallest admissible softmax entry (below this ``log f`` is unreliable)
F_FLOOR = 1e-300


class RangeError(ArithmeticError):
    """Exponent or logarithm left the safe double-precision range."""


@dataclass(frozen=True)
class ForwardState:
    n: int
    d: int
    z: np.ndarray
    u: np.ndarray
    alpha: np.ndarray
    f: np.ndarray
    h: np.ndarray
    c: np.ndarray
    q: np.ndarray
    b: np.ndarray
    beta: float

    def stacked(self, name):
        """Named per-block quantity flattened back into an ``n^2`` vector."""
        return getattr(self, name).reshape(-1)


def forward_from(A, b, x, n):
    """Forward map for a bare matrix ``A`` (``n^2`` rows) and target ``b``."""
    A = np.asarray(A, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if A.shape[0] != n * n:
        raise ShapeError(f"A has {A.shape[0]} rows, expected {n * n}")
    if x.shape != (A.shape[1],):
        raise ShapeError(f"x has shape {x.shape}, expected ({A.shape[1]},)")
    z = (A @ x).reshape(n, n)
    if not np.all(np.isfinite(z)):
        raise RangeError("non-finite entry in A x")
    big = np.max(np.abs(z), axis=1)
    if np.any(big > EXP_GUARD):
        j = int(np.argmax(big))
        raise RangeError(f"|A x| = {big[j]:.4g} exceeds {EXP_GUARD} in block {j}")
    u = np.exp(z)
    alpha = u.sum(axis=1)
    f = u / alpha[:, None]
    if np.any(f < F_FLOOR):
        j = int(np.argmax(np.any(f < F_FLOOR, axis=1)))
        raise RangeError(f"softmax entry below {F_FLOOR} in block {j}")
    h = np.log(f)
    bb = np.asarray(b, dtype=np.float64).reshape(n, n)
    c = f - bb
    q = u - alpha[:, None] * bb
    d = int(round(math.sqrt(A.shape[1])))
    arrays = [z, u, alpha, f, h, c, q, bb]
    for arr in arrays:
        arr.setflags(write=False)
    return ForwardState(n, d, z, u, alpha, f, h, c, q, bb, float(alpha.min()))


def forward(sys, x):
    return forward_from(sys.A, sys.b, x, sys.n)


def apply_D(state, v):
    """Multiply by ``D(x) = diag(alpha) (x) I_n`` without materializing it."""
    v = np.asarray(v, dtype=np.float64)
    n = state.n
    if v.shape != (n * n,):
        raise ShapeError(f"expected length {n * n}, got {v.shape}")
    return (state.alpha[:, None] * v.reshape(n, n)).reshape(-1)


def apply_D_inverse(state, v):
    v = np.asarray(v, dtype=np.float64)
    n = state.n
    if v.shape != (n * n,):
        raise ShapeError(f"expected length {n * n}, got {v.shape}")
    return (v.reshape(n, n) / state.alpha[:, None]).reshape(-1)


def D_matrix(state):
    """Dense ``n^2 x n^2`` diagonal normalizer (for oracles and small cases)."""
    return np.diag(np.repeat(state.alpha, state.n))


# (lemma id, log of the bound as a function of (n, R), measured quantity per block)
_FORWARD_BOUNDS = (
    ("lem:lower_bound:beta", None, None),
    ("lem:upper_bound:u", lambda n, R: 0.5 * math.log(n) + R * R,
     lambda s, j: np.linalg.norm(s.u[j])),
    ("lem:upper_bound:alpha_inverse", lambda n, R: R * R,
     lambda s, j: 1.0 / s.alpha[j]),
    ("lem:upper_bound:f", lambda n, R: 0.0,
     lambda s, j: np.linalg.norm(s.f[j])),
    ("lem:upper_bound_h:x", lambda n, R: math.log(2.0) + 0.5 * math.log(n) + 2 * math.log(R),
     lambda s, j: np.linalg.norm(s.h[j])),
    ("lem:upper_bound:c", lambda n, R: math.log(2.0),
     lambda s, j: np.linalg.norm(s.c[j])),
    ("lem:upper_bound:alpha", lambda n, R: math.log(n) + R * R,
     lambda s, j: s.alpha[j]),
    ("lem:upper_bound:q", lambda n, R: math.log(2.0 * n) + R * R,
     lambda s, j: np.linalg.norm(s.q[j])),
)

FORWARD_BOUND_IDS = tuple(t[0] for t in _FORWARD_BOUNDS)


def certify_forward_bounds(state, R):
    """One record per (bound, block); the beta bound is a single record.

    The beta bound is a lower bound, so its record compares ``exp(-R^2)``
    (as the left side) against ``beta``.
    """
    n, d = state.n, state.d
    recs = [CertRecord.compare("lem:lower_bound:beta", n, d, R, -R * R,
                               safe_log(state.beta), beta=state.beta)]
    for lemma, log_rhs, lhs in _FORWARD_BOUNDS[1:]:
        for j in range(n):
            recs.append(CertRecord.compare(lemma, n, d, R, safe_log(lhs(state, j)),
                                           log_rhs(n, R), beta=state.beta))
    return recs


def certify_vector_facts(x, y, n_len=None):
    """Check the four elementary vector-norm facts on ``x`` and ``y``.

    Returns records with ids ``fac:vector_norm#1`` .. ``#4``. The fourth
    fact needs ``||x - y||_inf <= 0.01`` and is skipped otherwise.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    k = x.size if n_len is None else n_len
    recs = []
    ninf_x = np.max(np.abs(x))
    recs.append(CertRecord.compare("fac:vector_norm#1", k, 0, 0.0,
                                   safe_log(np.linalg.norm(x * y)),
                                   safe_log(ninf_x) + safe_log(np.linalg.norm(y))))
    n2 = np.linalg.norm(x)
    r_lo = CertRecord.compare("fac:vector_norm#2", k, 0, 0.0, safe_log(ninf_x), safe_log(n2))
    r_hi = CertRecord.compare("fac:vector_norm#2", k, 0, 0.0, safe_log(n2),
                              0.5 * math.log(k) + safe_log(ninf_x))
    recs.append(r_lo if r_lo.margin < r_hi.margin else r_hi)
    recs.append(CertRecord.compare("fac:vector_norm#3", k, 0, 0.0,
                                   float(np.max(x)) if x.size else -math.inf, n2))
    gap = np.max(np.abs(x - y))
    if gap <= 0.01:
        ex = np.exp(x)
        recs.append(CertRecord.compare(
            "fac:vector_norm#4", k, 0, 0.0, safe_log(np.linalg.norm(ex - np.exp(y))),
            math.log(2.0) + safe_log(np.linalg.norm(ex)) + safe_log(gap)))
    else:
        recs.append(CertRecord.skip("fac:vector_norm#4", k, 0, 0.0,
                                    f"||x - y||_inf = {gap:.3g} > 0.01"))
    return recs
