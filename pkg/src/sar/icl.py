"""In-context shift vectors for parameter steps and data steps.

Moving from ``x_t`` to ``x_{t+1}`` (or from ``A_t`` to ``A_{t+1}``) is the
same as keeping the old parameters and shifting the target ``b`` to
``b - delta``. For the rescaled loss the representative shift is

    delta_q = D_t^{-1} (q(x_{t+1}) - q(x_t))    (block j: alpha_t,j^{-1} (q_{t+1,j} - q_{t,j}))

and for the normalized loss ``delta_c = f(x_{t+1}) - f(x_t)`` stacked.
The data-step variants substitute ``A_t, A_{t+1}`` at a fixed ``x``; that
construction is by analogy and validated empirically.
"""

import math
from dataclasses import dataclass

import numpy as np

from .forward import forward, forward_from
from .gradients import grad_from_state
from .instance import INF_GAP, sample_matrix_pair, sample_x_pair, random_system, stream
from .losses import NORMALIZED, RESCALED
from .parallel import pmap
from .records import PASS_TOL, safe_log
from .tensor import norm_inf2

RESCALED_X = "RESCALED_X"
RESCALED_A = "RESCALED_A"
NORMALIZED_X = "NORMALIZED_X"
NORMALIZED_A = "NORMALIZED_A"
VARIANTS = (RESCALED_X, RESCALED_A, NORMALIZED_X, NORMALIZED_A)

IDENTITY_TOL = 1e-9
SAFETY = 10.0
_TINY = 1e-300


class PreconditionError(ValueError):
    """A theorem hypothesis fails for the supplied pair."""


def log_M(variant, n, R):
    """Log of the explicit shift amplification constant.

    Rescaled: ``4 n^1.5 R exp(2R^2)``; normalized: ``4 n^2 R exp(4R^2)``.
    """
    if variant in (RESCALED_X, RESCALED_A):
        return math.log(4.0) + 1.5 * math.log(n) + math.log(R) + 2 * R * R
    return math.log(4.0) + 2.0 * math.log(n) + math.log(R) + 4 * R * R


@dataclass
class ShiftResult:
    variant: str
    n: int
    d: int
    R: float
    delta: np.ndarray
    identityResidual: float
    deltaNorm: float
    stepNorm: float
    logM: float
    passed: bool

    @property
    def boundMargin(self):
        return self.logM + safe_log(self.stepNorm) - safe_log(self.deltaNorm)

    @property
    def safetyMargin(self):
        """Margin against ``M / 10``, i.e. how much room the bound leaves."""
        return self.boundMargin - math.log(SAFETY)

    def to_dict(self):
        return {
            "variant": self.variant,
            "n": self.n,
            "d": self.d,
            "R": self.R,
            "stepNorm": self.stepNorm,
            "deltaNorm": self.deltaNorm,
            "logM": self.logM,
            "identityResidual": self.identityResidual,
            "pass": self.passed,
        }


def relative_gap(a, b):
    return abs(a - b) / max(abs(a), abs(b), _TINY)


def _check_hypotheses(R, A_list, b, xs):
    n = b.shape[0]
    if R < 4:
        raise PreconditionError(f"R must be at least 4, got {R}")
    for x in xs:
        if np.linalg.norm(x) > R * (1 + 1e-12):
            raise PreconditionError("iterate outside the R-ball")
    if np.max(np.linalg.norm(b, axis=1)) > 1 + 1e-12:
        raise PreconditionError("some target block has norm above 1")
    for A in A_list:
        nb = [np.linalg.norm(A[j * n:(j + 1) * n], 2) for j in range(n)]
        if max(nb) > R * (1 + 1e-12):
            raise PreconditionError("block norm above R")


def delta_q(s_t, s_t1):
    """Block form of the rescaled shift as an ``n x n`` array."""
    return (s_t1.q - s_t.q) / s_t.alpha[:, None]


def delta_c(s_t, s_t1):
    return s_t1.f - s_t.f


def rescaled_identity(s_t, s_t1, delta):
    """Both sides of ``||u' - a' b||^2 = ||u - a (b - delta)||^2``, stacked."""
    lhs = float(np.sum((s_t1.u - s_t1.alpha[:, None] * s_t1.b) ** 2))
    r = s_t.u - s_t.alpha[:, None] * (s_t.b - delta)
    return lhs, float(np.sum(r * r))


def normalized_identity(s_t, s_t1, delta):
    lhs = float(np.sum((s_t1.u / s_t1.alpha[:, None] - s_t1.b) ** 2))
    r = s_t.u / s_t.alpha[:, None] - (s_t.b - delta)
    return lhs, float(np.sum(r * r))


def _result(variant, s_t, s_t1, step, R):
    if variant in (RESCALED_X, RESCALED_A):
        delta = delta_q(s_t, s_t1)
        lhs, rhs = rescaled_identity(s_t, s_t1, delta)
    else:
        delta = delta_c(s_t, s_t1)
        lhs, rhs = normalized_identity(s_t, s_t1, delta)
    res = relative_gap(lhs, rhs)
    dn = float(np.linalg.norm(delta))
    lm = log_M(variant, s_t.n, R)
    ok_bound = safe_log(dn) <= lm + safe_log(step) + PASS_TOL
    flat = delta.reshape(-1).copy()
    return ShiftResult(variant, s_t.n, s_t.d, float(R), flat, res, dn, float(step), lm,
                       bool(res <= IDENTITY_TOL and ok_bound))


def _shift_x(variant, sys, xt, xt1, check):
    xt = np.asarray(xt, dtype=np.float64)
    xt1 = np.asarray(xt1, dtype=np.float64)
    if check:
        _check_hypotheses(sys.R, [sys.A], sys.b.reshape(sys.n, sys.n), [xt, xt1])
        if np.max(np.abs(sys.A @ (xt - xt1))) >= INF_GAP:
            raise PreconditionError("consecutive iterates violate the inf-gap hypothesis")
    s_t, s_t1 = forward(sys, xt), forward(sys, xt1)
    return _result(variant, s_t, s_t1, np.linalg.norm(xt1 - xt), sys.R)


def _shift_A(variant, x, sysT, sysT1, check):
    x = np.asarray(x, dtype=np.float64)
    n = sysT.n
    if check:
        _check_hypotheses(sysT.R, [sysT.A, sysT1.A], sysT.b.reshape(n, n), [x])
        if np.max(np.abs((sysT.A - sysT1.A) @ x)) >= INF_GAP:
            raise PreconditionError("data step violates the inf-gap hypothesis")
    s_t = forward_from(sysT.A, sysT.b, x, n)
    s_t1 = forward_from(sysT1.A, sysT.b, x, n)
    return _result(variant, s_t, s_t1, norm_inf2(sysT.A, sysT1.A, n), sysT.R)


def shift_rescaled_x(sys, xt, xt1, check=True):
    return _shift_x(RESCALED_X, sys, xt, xt1, check)


def shift_normalized_x(sys, xt, xt1, check=True):
    return _shift_x(NORMALIZED_X, sys, xt, xt1, check)


def shift_rescaled_A(x, sysT, sysT1, check=True):
    return _shift_A(RESCALED_A, x, sysT, sysT1, check)


def shift_normalized_A(x, sysT, sysT1, check=True):
    return _shift_A(NORMALIZED_A, x, sysT, sysT1, check)


def sign_flip_residual(sys, xt, xt1, signs, variant=RESCALED_X):
    """Identity residual for the shift built against ``signs * residual(x_{t+1})``.

    Any ``+-1`` pattern on the new residual gives another valid shift with the
    same defining norm; this returns the relative gap for one such pattern.
    """
    s_t, s_t1 = forward(sys, xt), forward(sys, xt1)
    s = np.asarray(signs, dtype=np.float64).reshape(sys.n, sys.n)
    if variant == RESCALED_X:
        delta = (s * s_t1.q - s_t.q) / s_t.alpha[:, None]
        return relative_gap(*rescaled_identity(s_t, s_t1, delta))
    delta = s * s_t1.c - s_t.c
    return relative_gap(*normalized_identity(s_t, s_t1, delta))


def icl_sample(seed, k, variant, R=4.5, n_range=(2, 5), d_range=(2, 4)):
    rng = stream(seed, k)
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    d = int(rng.integers(d_range[0], d_range[1] + 1))
    sys = random_system(n, d, R, int(rng.integers(2**31)))
    xp = sample_x_pair(sys, rng)
    if variant == RESCALED_X:
        return shift_rescaled_x(sys, xp.x, xp.y)
    if variant == NORMALIZED_X:
        return shift_normalized_x(sys, xp.x, xp.y)
    ap = sample_matrix_pair(xp.x, sys, rng)
    if variant == RESCALED_A:
        return shift_rescaled_A(ap.x, ap.Asys, ap.Bsys)
    return shift_normalized_A(ap.x, ap.Asys, ap.Bsys)


def certify_icl(samples, seed, R=4.5, variants=VARIANTS, n_range=(2, 5), d_range=(2, 4),
                workers=None):
    jobs = [(v, k) for v in variants for k in range(samples)]
    return pmap(lambda job: icl_sample(seed, job[1], job[0], R, n_range, d_range), jobs, workers)


@dataclass
class Trajectory:
    results: list
    drift: list
    boundSum: list
    iterates: list

    @property
    def cumulative_ok(self):
        return all(dr <= bs * (1 + 1e-12) for dr, bs in zip(self.drift, self.boundSum))


def icl_trajectory(sys, x0, kind, steps, eta=1e-3, max_shrink=60):
    """Gradient steps on ``kind`` read as a chain of shifted regression targets.

    Each step halves ``eta`` until the next iterate stays in the ball and
    meets the inf-gap hypothesis. ``drift[t]`` is ``||b_tilde_t - b||`` with
    ``b_tilde_t = b - sum of the shifts so far``, and ``boundSum[t]`` sums the
    per-step bounds ``M ||x_{s+1} - x_s||``.
    """
    if kind not in (RESCALED, NORMALIZED):
        raise ValueError("icl trajectories use the RESCALED or NORMALIZED loss")
    variant = RESCALED_X if kind == RESCALED else NORMALIZED_X
    x = np.asarray(x0, dtype=np.float64)
    results, drift, bsum, its = [], [], [], [x.copy()]
    total = np.zeros(sys.n * sys.n)
    acc = 0.0
    for _ in range(steps):
        g = grad_from_state(sys.A, forward(sys, x), kind)
        if not np.any(g):
            break
        h = eta
        for _ in range(max_shrink + 1):
            y = x - h * g
            if (np.linalg.norm(y) <= sys.R and np.any(y != x)
                    and np.max(np.abs(sys.A @ (y - x))) < INF_GAP):
                break
            h *= 0.5
        else:
            raise PreconditionError("step shrink budget exhausted along the trajectory")
        r = _shift_x(variant, sys, x, y, check=True)
        results.append(r)
        total += r.delta
        acc += math.exp(r.logM) * r.stepNorm if r.logM < 700 else math.inf
        drift.append(float(np.linalg.norm(total)))
        bsum.append(acc)
        x = y
        its.append(x.copy())
    return Trajectory(results, drift, bsum, its)
