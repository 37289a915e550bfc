"""Vectorized softmax attention regression with empirical certification.

Submodules:

- ``tensor``: Kronecker product, vec/mat, block views, norms
- ``instance``: random instances, vectorized systems, perturbation pairs
- ``forward``: per-block ``u, alpha, f, h, c, q`` and the normalizer ``D``
- ``losses`` / ``gradients``: five losses, closed-form gradients, FD oracles
- ``certify``: norm-bound and Lipschitz sweeps in log domain
- ``icl``: in-context shift vectors and their bounds
- ``solver``: projected gradient descent on the ``R``-ball
- ``report`` / ``cli``: JSONL/CSV output and the ``sar`` command
"""

from .forward import ForwardState, RangeError, apply_D, apply_D_inverse, forward
from .gradients import block_derivative, fd_grad, grad, grad_wrt_A, gradcheck
from .instance import (PairSample, RegressionInstance, SamplerError, VectorizedSystem,
                       generate_instance, sample_matrix_pair, sample_x_pair, stream,
                       vectorize)
from .losses import (CROSS_ENTROPY, ENTROPY, LOSS_KINDS, NORMALIZED, RESCALED, SPARSE,
                     check_equivalence, loss, matrix_loss)
from .records import CertRecord
from .tensor import (CapacityError, ShapeError, block_rows, kron, mat_of, spectral_norm,
                     vec_of)

__version__ = "0.1.0"

__all__ = [
    "CROSS_ENTROPY", "ENTROPY", "LOSS_KINDS", "NORMALIZED", "RESCALED", "SPARSE",
    "CapacityError", "CertRecord", "ForwardState", "PairSample", "RangeError",
    "RegressionInstance", "SamplerError", "ShapeError", "VectorizedSystem",
    "apply_D", "apply_D_inverse", "block_derivative", "block_rows", "check_equivalence",
    "fd_grad", "forward", "generate_instance", "grad", "grad_wrt_A", "gradcheck", "kron",
    "loss", "mat_of", "matrix_loss", "sample_matrix_pair", "sample_x_pair",
    "spectral_norm", "stream", "vec_of", "vectorize",
]
