"""Projected gradient descent on the ball ``||x|| <= R``."""

import math
from dataclasses import dataclass, field

import numpy as np

from .certify import GRAD_X
from .forward import forward
from .gradients import grad_from_state
from .instance import _uniform_ball, sample_x_pair
from .losses import KIND_TAG, loss_from_state

THEORY = "THEORY"
EMPIRICAL = "EMPIRICAL"
FIXED = "FIXED"

MAX_ITERS = "MAX_ITERS"
GRAD_TOL = "GRAD_TOL"
STEP_SHRUNK_OUT = "STEP_SHRUNK_OUT"


class NumericalError(ArithmeticError):
    """Non-finite loss or gradient; ``iterate`` holds the offending point."""

    def __init__(self, msg, iterate=None, it=None):
        super().__init__(msg)
        self.iterate = None if iterate is None else np.array(iterate)
        self.it = it


@dataclass
class SolveTrace:
    kind: str
    iterates: list
    losses: list
    gradNorms: list
    stepSize: float
    stopped: str
    stepMode: str = THEORY
    extra: dict = field(default_factory=dict)

    def rows(self):
        return [(i, l, g) for i, (l, g) in enumerate(zip(self.losses, self.gradNorms))]


def project_ball(x, R):
    x = np.asarray(x, dtype=np.float64)
    if not R > 0:
        raise ValueError(f"R must be positive, got {R}")
    nx = np.linalg.norm(x)
    return x if nx <= R else (R / nx) * x


def theory_step(sys, kind):
    """``1 / L`` with ``L`` the gradient-Lipschitz constant for ``kind`` on ``x``."""
    const = GRAD_X[KIND_TAG[kind]][0]
    return math.exp(-const.log_value(sys.n, sys.d, sys.R))


def empirical_smoothness(sys, kind, rng, probes=100):
    """Largest observed ``||grad(x) - grad(y)|| / ||x - y||`` over probe pairs."""
    best = 0.0
    for _ in range(probes):
        p = sample_x_pair(sys, rng)
        gx = grad_from_state(sys.A, forward(sys, p.x), kind)
        gy = grad_from_state(sys.A, forward(sys, p.y), kind)
        best = max(best, np.linalg.norm(gx - gy) / np.linalg.norm(p.x - p.y))
    return best


def _check(v, what, x, it):
    if not np.all(np.isfinite(v)):
        raise NumericalError(f"non-finite {what} at iteration {it}", x, it)


def gd_minimize(sys, kind, x0, maxIters=10_000, gradTol=1e-10, stepMode=THEORY, eta=None,
                rng=None, probes=100, stallWindow=None):
    """Run ``x <- P_R(x - eta grad L(x))``.

    ``stepMode`` is THEORY (``eta = 1/L`` from the certified constant),
    EMPIRICAL (``eta = 1/(2 L_hat)`` from ``probes`` sampled pairs), or
    FIXED (``eta`` given). With ``stallWindow`` set, the run stops as
    STEP_SHRUNK_OUT once that many consecutive steps leave ``x`` unchanged.
    """
    x = project_ball(np.asarray(x0, dtype=np.float64), sys.R)
    if np.linalg.norm(np.asarray(x0)) > sys.R * (1 + 1e-12):
        raise ValueError("x0 lies outside the R-ball")
    extra = {}
    if stepMode == THEORY:
        eta = theory_step(sys, kind)
    elif stepMode == EMPIRICAL:
        if rng is None:
            rng = np.random.default_rng(0)
        L_hat = empirical_smoothness(sys, kind, rng, probes)
        extra["L_hat"] = L_hat
        eta = 1.0 / (2.0 * L_hat) if L_hat > 0 else 1.0
    elif stepMode == FIXED:
        if eta is None or not eta > 0:
            raise ValueError("FIXED step mode needs a positive eta")
    else:
        raise ValueError(f"unknown step mode {stepMode!r}")

    st = forward(sys, x)
    L = loss_from_state(st, kind)
    g = grad_from_state(sys.A, st, kind)
    _check(L, "loss", x, 0)
    _check(g, "gradient", x, 0)
    its, losses, gns = [x.copy()], [L], [float(np.linalg.norm(g))]
    stopped = MAX_ITERS
    stall = 0
    for it in range(1, maxIters + 1):
        if gns[-1] <= gradTol:
            stopped = GRAD_TOL
            break
        y = project_ball(x - eta * g, sys.R)
        if stallWindow is not None:
            stall = stall + 1 if np.array_equal(y, x) else 0
            if stall >= stallWindow:
                stopped = STEP_SHRUNK_OUT
                break
        x = y
        st = forward(sys, x)
        L = loss_from_state(st, kind)
        g = grad_from_state(sys.A, st, kind)
        _check(L, "loss", x, it)
        _check(g, "gradient", x, it)
        its.append(x.copy())
        losses.append(L)
        gns.append(float(np.linalg.norm(g)))
    else:
        stopped = GRAD_TOL if gns[-1] <= gradTol else MAX_ITERS
    return SolveTrace(kind, its, losses, gns, float(eta), stopped, stepMode, extra)


def random_start(sys, rng):
    return _uniform_ball(rng, sys.d * sys.d, sys.R)
