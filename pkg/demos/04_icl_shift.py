"""Gradient steps read as shifts of the regression target.

Taking a step x_t -> x_{t+1} on the rescaled loss is the same as keeping
x_t and moving the target b to b - delta. The shift is small whenever the
step is small, with an explicit amplification factor M.
"""

import math

import numpy as np

from sar.icl import icl_trajectory, shift_rescaled_A, shift_rescaled_x
from sar.instance import random_system, sample_matrix_pair, sample_x_pair, stream
from sar.losses import RESCALED

sys = random_system(3, 2, 4.5, seed=8)
rng = stream(8, 0)
p = sample_x_pair(sys, rng)
r = shift_rescaled_x(sys, p.x, p.y)
print("parameter step  |dx| =", r.stepNorm)
print("shift           |delta| =", r.deltaNorm)
print("identity residual:", r.identityResidual)
print(f"log M = {r.logM:.2f}, room left under the bound: {r.boundMargin:.2f} nats")

# the same construction for a change of data at fixed x
ap = sample_matrix_pair(p.x, sys, rng)
ra = shift_rescaled_A(ap.x, ap.Asys, ap.Bsys)
print("data step |A - B|_inf2 =", ra.stepNorm, " |delta| =", ra.deltaNorm)

# a short descent run; the accumulated shift stays within the summed bounds
tr = icl_trajectory(sys, np.array([0.5, -0.3, 0.2, 0.1]), RESCALED, steps=25)
print("drift after 25 steps:", tr.drift[-1])
print("log of summed bounds:", math.log(tr.boundSum[-1]))
print("cumulative bound respected:", tr.cumulative_ok)
