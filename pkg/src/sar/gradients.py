"""Closed-form gradients of the five losses, per-block derivatives, FD oracles.

With ``A_j`` the ``n x d^2`` block ``j`` and ``A_{j,i}`` its column ``i``,
every gradient coordinate is a sum over blocks of inner products against
``A_{j,i}``; they are assembled here as ``sum_j v_j^T A_j`` for a per-block
weight vector ``v_j``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .forward import forward, forward_from
from .instance import _uniform_ball, random_system, stream
from .losses import (CROSS_ENTROPY, ENTROPY, NORMALIZED, RESCALED, SPARSE,
                     loss_from_state)
from .records import CertRecord, safe_log
from .tensor import CapacityError

U, ALPHA, ALPHA_INV, F, H, C, Q = "U", "ALPHA", "ALPHA_INV", "F", "H", "C", "Q"
BLOCK_TARGETS = (U, ALPHA, ALPHA_INV, F, H, C, Q)

FD_STEP = 1e-6
#: largest number of matrix entries ``grad_wrt_A`` will difference
GRAD_A_BUDGET = 10_000


def _contract(v, Ab):
    """``sum_j v[j] @ Ab[j]`` with ``v`` of shape ``n x n`` and ``Ab`` of ``n x n x D``."""
    out = np.zeros(Ab.shape[2])
    for j in range(v.shape[0]):
        out += v[j] @ Ab[j]
    return out


def grad_from_state(A, state, kind):
    n = state.n
    Ab = np.asarray(A, dtype=np.float64).reshape(n, n, -1)
    f, u = state.f, state.u
    if kind == RESCALED:
        qb = np.sum(state.q * state.b, axis=1)
        w = state.q * u - qb[:, None] * u
    elif kind == NORMALIZED:
        cf = np.sum(state.c * f, axis=1)
        w = state.c * f - cf[:, None] * f
    elif kind == SPARSE:
        w = u
    elif kind == CROSS_ENTROPY:
        fb = np.sum(f * state.b, axis=1)
        w = fb[:, None] * f - f * state.b
    elif kind == ENTROPY:
        fh = np.sum(f * state.h, axis=1)
        f1 = np.sum(f, axis=1)
        # the last two terms cancel exactly when <f, 1> = 1
        w = fh[:, None] * f - f * state.h + f * f1[:, None] - f
    else:
        raise ValueError(f"unknown loss kind {kind!r}")
    return _contract(w, Ab)


def grad(sys, x, kind):
    return grad_from_state(sys.A, forward(sys, x), kind)


def entropy_cancellation(sys, x):
    """Per-coordinate size of ``<f, A_i><f, 1> - <f, A_i>`` summed over blocks."""
    st = forward(sys, x)
    Ab = sys.A.reshape(st.n, st.n, -1)
    f1 = np.sum(st.f, axis=1)
    return _contract(st.f * f1[:, None] - st.f, Ab)


def central_diff(fn, x, step=FD_STEP):
    """Central differences of a scalar function, step ``step * max(1, |x_i|)``."""
    x = np.asarray(x, dtype=np.float64)
    if not step > 0:
        raise ValueError("step must be positive")
    g = np.empty_like(x)
    for i in range(x.size):
        h = step * max(1.0, abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (fn(xp) - fn(xm)) / (xp[i] - xm[i])
    return g


def fd_grad(sys, x, kind, step=FD_STEP):
    return central_diff(lambda v: loss_from_state(forward(sys, v), kind), x, step)


def rel_err(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    den = np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
    return float(np.max(np.abs(a - b) / den)) if a.size else 0.0


@dataclass
class GradReport:
    kind: str
    analytic: np.ndarray
    numeric: np.ndarray
    maxRelErr: float
    fdStep: float
    # error against the opposite overall sign, to record both orientations
    maxRelErrFlipped: float = float("nan")


def gradcheck(sys, x, kind, step=FD_STEP):
    a = grad(sys, x, kind)
    num = fd_grad(sys, x, kind, step)
    return GradReport(kind, a, num, rel_err(a, num), step, rel_err(-a, num))


def _block_value(state, target, j):
    if target == U:
        return state.u[j]
    if target == ALPHA:
        return state.alpha[j]
    if target == ALPHA_INV:
        return 1.0 / state.alpha[j]
    if target == F:
        return state.f[j]
    if target == H:
        return state.h[j]
    if target == C:
        return state.c[j]
    if target == Q:
        return state.q[j]
    raise ValueError(f"unknown block target {target!r}")


def block_value(sys, x, target, j1):
    """Value of block function ``target`` at block ``j1`` (used as FD input)."""
    return _block_value(forward(sys, x), target, j1)


def block_derivative(sys, x, target, j1, i):
    """Closed-form partial derivative of ``target_{j1}`` with respect to ``x_i``."""
    n = sys.n
    if not 0 <= j1 < n:
        raise IndexError(f"block index {j1} out of range for n={n}")
    if not 0 <= i < sys.A.shape[1]:
        raise IndexError(f"coordinate {i} out of range")
    st = forward(sys, x)
    a = sys.A[j1 * n:(j1 + 1) * n, i]
    u, f = st.u[j1], st.f[j1]
    if target == U:
        return u * a
    if target == ALPHA:
        return float(u @ a)
    if target == ALPHA_INV:
        return -float(f @ a) / st.alpha[j1]
    if target in (F, C):
        return f * a - f * float(f @ a)
    if target == H:
        return a - float(f @ a) * np.ones(n)
    if target == Q:
        return u * a - st.b[j1] * float(u @ a)
    raise ValueError(f"unknown block target {target!r}")


def fd_block_derivative(sys, x, target, j1, i, step=FD_STEP):
    x = np.asarray(x, dtype=np.float64)
    h = step * max(1.0, abs(x[i]))
    xp, xm = x.copy(), x.copy()
    xp[i] += h
    xm[i] -= h
    return (np.asarray(block_value(sys, xp, target, j1))
            - np.asarray(block_value(sys, xm, target, j1))) / (xp[i] - xm[i])


def grad_wrt_A(x, sys, kind, step=FD_STEP, budget=GRAD_A_BUDGET):
    """Central-difference gradient of the loss with respect to every entry of ``A``."""
    A = np.array(sys.A, dtype=np.float64)
    if A.size > budget:
        raise CapacityError(f"{A.size} matrix entries exceed the budget of {budget}")
    flat = A.reshape(-1)

    def fn(a):
        return loss_from_state(forward_from(a.reshape(A.shape), sys.b, x, sys.n), kind)

    return central_diff(fn, flat, step).reshape(A.shape)


GRAD_TOL = 1e-5


def gradcheck_sample(seed, k, kinds, R=4.5, n_range=(1, 5), d_range=(1, 5), blocks=True):
    """Gradient and block-derivative FD checks for sample ``k`` of a sweep.

    Returns ``(records, max_rel_err)``. Each record compares the observed
    relative error against ``GRAD_TOL`` in log space.
    """
    rng = stream(seed, k)
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    d = int(rng.integers(d_range[0], d_range[1] + 1))
    sys = random_system(n, d, R, int(rng.integers(2**31)))
    x = _uniform_ball(rng, d * d, R)
    recs, worst = [], 0.0
    for kind in kinds:
        rep = gradcheck(sys, x, kind)
        worst = max(worst, rep.maxRelErr)
        recs.append(_tol_record(f"lem:basic_derivatives:grad:{kind}", n, d, R, rep.maxRelErr,
                                {"maxRelErrFlipped": rep.maxRelErrFlipped}))
    if blocks:
        for target in BLOCK_TARGETS:
            j1 = int(rng.integers(n))
            i = int(rng.integers(d * d))
            err = rel_err(block_derivative(sys, x, target, j1, i),
                          fd_block_derivative(sys, x, target, j1, i))
            recs.append(_tol_record(f"lem:basic_derivatives:block:{target}", n, d, R, err))
    return recs, worst


def _tol_record(lemma_id, n, d, R, err, preconds=None):
    return CertRecord.compare(lemma_id, n, d, R, safe_log(err), math.log(GRAD_TOL),
                              preconds=preconds)
