"""Projected gradient descent on the R-ball with three step-size rules.

The certified smoothness constant is of order exp(5 R^2), so the step it
implies is tiny; a step from sampled smoothness makes real progress.
"""

import numpy as np

from sar import LOSS_KINDS
from sar.instance import random_system, stream
from sar.solver import EMPIRICAL, THEORY, gd_minimize, random_start

sys = random_system(3, 2, 4.5, seed=3)
x0 = random_start(sys, stream(3, 1))
for kind in LOSS_KINDS:
    th = gd_minimize(sys, kind, x0, maxIters=500, stepMode=THEORY)
    em = gd_minimize(sys, kind, x0, maxIters=500, stepMode=EMPIRICAL,
                     rng=np.random.default_rng(0))
    print(f"{kind:>14}: start {th.losses[0]: .5f}  theory step {th.stepSize:.1e} -> "
          f"{th.losses[-1]: .5f}  empirical step {em.stepSize:.1e} -> {em.losses[-1]: .5f}")
