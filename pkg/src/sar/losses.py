"""The five vectorized losses, the two matrix-form objectives, and their link.

The matrix objectives are squared Frobenius norms without the ``0.5`` that
the vectorized ``L_c`` and ``L_q`` carry, so ``matrix_loss == 2 * loss``.
"""

import math

import numpy as np

from .forward import EXP_GUARD, RangeError, forward
from .instance import vectorize
from .records import CertRecord, safe_log

NORMALIZED = "NORMALIZED"
RESCALED = "RESCALED"
SPARSE = "SPARSE"
CROSS_ENTROPY = "CROSS_ENTROPY"
ENTROPY = "ENTROPY"
LOSS_KINDS = (NORMALIZED, RESCALED, SPARSE, CROSS_ENTROPY, ENTROPY)

#: short names used in lemma ids
KIND_TAG = {
    NORMALIZED: "L_c",
    RESCALED: "L_q",
    SPARSE: "L_sparse",
    CROSS_ENTROPY: "L_cent",
    ENTROPY: "L_ent",
}

EQUIV_TOL = 1e-10


def parse_kind(name):
    key = name.strip().upper().replace("-", "_")
    aliases = {v.upper(): k for k, v in KIND_TAG.items()}
    aliases.update({"CENT": CROSS_ENTROPY, "ENT": ENTROPY, "C": NORMALIZED, "Q": RESCALED})
    if key in LOSS_KINDS:
        return key
    if key in aliases:
        return aliases[key]
    raise ValueError(f"unknown loss kind {name!r}")


def loss_from_state(state, kind):
    if kind == NORMALIZED:
        return 0.5 * float(np.sum(state.c * state.c))
    if kind == RESCALED:
        return 0.5 * float(np.sum(state.q * state.q))
    if kind == SPARSE:
        return float(np.sum(state.alpha))
    if kind == CROSS_ENTROPY:
        return -float(np.sum(state.f * state.b))
    if kind == ENTROPY:
        return -float(np.sum(state.f * state.h))
    raise ValueError(f"unknown loss kind {kind!r}")


def loss(sys, x, kind):
    return loss_from_state(forward(sys, x), kind)


def matrix_loss(inst, X, form):
    """Frobenius objective computed in matrix form, no Kronecker product.

    NORMALIZED: ``||D(X)^{-1} exp(A1 X A2^T) - B||_F^2``;
    RESCALED: ``||exp(A1 X A2^T) - D(X) B||_F^2``.
    """
    Z = inst.A1 @ np.asarray(X, dtype=np.float64) @ inst.A2.T
    if np.max(np.abs(Z)) > EXP_GUARD:
        raise RangeError(f"|A1 X A2^T| exceeds {EXP_GUARD}")
    E = np.exp(Z)
    dX = E.sum(axis=1)
    if form == NORMALIZED:
        res = E / dX[:, None] - inst.B
    elif form == RESCALED:
        res = E - dX[:, None] * inst.B
    else:
        raise ValueError(f"matrix form must be NORMALIZED or RESCALED, got {form!r}")
    return float(np.sum(res * res))


def check_equivalence(inst, X, form, vec_order="C"):
    """Compare the matrix objective with twice the vectorized loss.

    ``vec_order="F"`` flattens ``X`` column-major, which breaks the
    correspondence and exists for negative tests.
    """
    sys = vectorize(inst)
    x = np.asarray(X, dtype=np.float64).flatten(order=vec_order)
    ml = matrix_loss(inst, X, form)
    vl = loss(sys, x, form)
    gap = abs(ml - 2.0 * vl) / max(1.0, ml)
    rec = CertRecord.compare(f"cla:vectorization:{KIND_TAG[form]}", inst.n, inst.d, inst.R,
                             safe_log(gap), math.log(EQUIV_TOL))
    return rec
