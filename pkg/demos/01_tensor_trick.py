"""Matrix regression as a vector regression.

Build a small instance, vectorize it with the Kronecker product, and check
that the matrix-form objectives match twice the vectorized losses.
"""

import numpy as np

from sar import (LOSS_KINDS, NORMALIZED, RESCALED, check_equivalence, generate_instance,
                 kron, loss, matrix_loss, vec_of, vectorize)

inst = generate_instance(n=3, d=2, R=4.5, seed=9)
sys = vectorize(inst)
print("A1 (3x2):\n", inst.A1)
print("A2 (3x2):\n", inst.A2)
print("vectorized matrix shape:", sys.A.shape)

# vec(A1 X A2^T) is the Kronecker matrix applied to vec(X)
X = np.array([[0.5, -1.0], [0.25, 0.75]])
lhs = vec_of(inst.A1 @ X @ inst.A2.T)
rhs = kron(inst.A1, inst.A2) @ vec_of(X)
print("vec identity error:", np.max(np.abs(lhs - rhs)))

# each block of n rows is one softmax distribution
x = vec_of(X)
for kind in LOSS_KINDS:
    print(f"{kind:>14}: {loss(sys, x, kind): .6f}")

# the matrix objectives carry no 0.5, so they equal twice the vector losses
for form in (NORMALIZED, RESCALED):
    m = matrix_loss(inst, X, form)
    print(f"{form}: matrix {m:.12f}  2*vector {2 * loss(sys, x, form):.12f}",
          "ok" if check_equivalence(inst, X, form).passed else "MISMATCH")

# flattening X column-major breaks the correspondence
print("column-major passes?", check_equivalence(inst, X, RESCALED, vec_order="F").passed)
