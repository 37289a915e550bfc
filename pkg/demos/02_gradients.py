"""Closed-form gradients against central finite differences."""

import numpy as np

from sar import LOSS_KINDS, SPARSE, block_derivative, grad, grad_wrt_A, gradcheck, stream
from sar.gradients import BLOCK_TARGETS, fd_block_derivative, rel_err
from sar.instance import _uniform_ball, random_system

sys = random_system(3, 2, 4.5, seed=4)
x = _uniform_ball(stream(0, 0), 4, 4.5)
print("x =", x, " |x| =", np.linalg.norm(x))

for kind in LOSS_KINDS:
    rep = gradcheck(sys, x, kind)
    print(f"{kind:>14}: max rel err {rep.maxRelErr:.2e}"
          f"  (with sign flipped {rep.maxRelErrFlipped:.2e})")

# per-block derivatives of u, alpha, 1/alpha, f, h, c, q along one coordinate
for target in BLOCK_TARGETS:
    err = rel_err(block_derivative(sys, x, target, 1, 2),
                  fd_block_derivative(sys, x, target, 1, 2))
    print(f"d{target}_1/dx_2 rel err {err:.2e}")

# derivative with respect to the matrix itself, by finite differences
G = grad_wrt_A(x, sys, SPARSE)
print("dL_sparse/dA vs exp(Ax) x^T, rel err:",
      f"{rel_err(G, np.outer(np.exp(sys.A @ x), x)):.2e}")
print("gradient of L_sparse:", grad(sys, x, SPARSE))
