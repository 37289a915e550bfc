import math

import numpy as np
import pytest

from sar.forward import RangeError, forward
from sar.instance import _uniform_ball, generate_instance, random_system, stream
from sar.losses import (CROSS_ENTROPY, ENTROPY, LOSS_KINDS, NORMALIZED, RESCALED, SPARSE,
                        check_equivalence, loss, matrix_loss, parse_kind)

# values computed with 40-digit arithmetic on the conftest instance
ORACLE_LOSS = {
    NORMALIZED: 0.3818409535933742,
    RESCALED: 1.4169814070593758,
    SPARSE: 4.7478193720219424,
    CROSS_ENTROPY: -0.45674679638294455,
    ENTROPY: 1.3588671787831434,
}


@pytest.mark.parametrize("kind", LOSS_KINDS)
def test_oracle_values(tiny_sys, tiny_x, kind):
    assert loss(tiny_sys, tiny_x, kind) == pytest.approx(ORACLE_LOSS[kind], rel=1e-13)


class TestZeroX:
    def test_sparse(self, sys_3_2):
        assert loss(sys_3_2, np.zeros(4), SPARSE) == 9.0

    def test_entropy(self, sys_3_2):
        assert loss(sys_3_2, np.zeros(4), ENTROPY) == pytest.approx(3 * math.log(3), rel=1e-14)

    def test_cross_entropy(self, sys_3_2):
        b = np.asarray(sys_3_2.b)
        assert loss(sys_3_2, np.zeros(4), CROSS_ENTROPY) == pytest.approx(-b.sum() / 3,
                                                                          rel=1e-14)

    def test_normalized(self, sys_3_2):
        b = np.asarray(sys_3_2.b)
        ref = 0.5 * np.sum((1 / 3 - b) ** 2)
        assert loss(sys_3_2, np.zeros(4), NORMALIZED) == pytest.approx(ref, rel=1e-14)

    def test_rescaled(self, sys_3_2):
        b = np.asarray(sys_3_2.b)
        ref = 0.5 * np.sum((1 - 3 * b) ** 2)
        assert loss(sys_3_2, np.zeros(4), RESCALED) == pytest.approx(ref, rel=1e-14)


def test_sparse_is_sum_of_exp():
    for k in range(50):
        rng = stream(11, k)
        sysv = random_system(3, 3, 4.5, k)
        x = _uniform_ball(rng, 9, 4.5)
        assert loss(sysv, x, SPARSE) == pytest.approx(np.exp(sysv.A @ x).sum(), rel=1e-13)


def test_entropy_ignores_b():
    sysv = random_system(3, 2, 4.5, 3)
    other = type(sysv)(sysv.A, np.zeros(9), 3, 2, 4.5, sysv.blockNorms, False)
    x = np.array([0.4, -1.2, 0.3, 2.0])
    assert loss(sysv, x, ENTROPY) == loss(other, x, ENTROPY)


def test_nonnegative_and_entropy_range():
    for k in range(50):
        rng = stream(12, k)
        n = int(rng.integers(1, 5))
        sysv = random_system(n, 2, 4.5, k)
        x = _uniform_ball(rng, 4, 4.5)
        assert loss(sysv, x, NORMALIZED) >= 0 and loss(sysv, x, RESCALED) >= 0
        assert 0 <= loss(sysv, x, ENTROPY) <= n * math.log(n) + 1e-12


def test_parse_kind():
    assert parse_kind("l_cent") == CROSS_ENTROPY
    assert parse_kind("rescaled") == RESCALED
    assert parse_kind("L_ent") == ENTROPY
    with pytest.raises(ValueError):
        parse_kind("hinge")


def test_unknown_kind(sys_3_2):
    with pytest.raises(ValueError):
        loss(sys_3_2, np.zeros(4), "HINGE")


class TestMatrixForm:
    @pytest.mark.parametrize("form", [NORMALIZED, RESCALED])
    def test_twice_vector_loss(self, tiny_instance, form):
        X = np.array([[0.5, -1.0], [0.25, 0.75]])
        assert matrix_loss(tiny_instance, X, form) == pytest.approx(2 * ORACLE_LOSS[form],
                                                                    rel=1e-13)

    @pytest.mark.parametrize("form", [NORMALIZED, RESCALED])
    def test_equivalence_random(self, form):
        for seed in range(30):
            inst = generate_instance(3, 3, 4.5, seed)
            rng = stream(13, seed)
            X = _uniform_ball(rng, 9, 4.5).reshape(3, 3)
            rec = check_equivalence(inst, X, form)
            assert rec.passed and rec.lemmaId.startswith("cla:vectorization:")

    def test_column_major_breaks(self):
        inst = generate_instance(3, 3, 4.5, 1)
        X = np.arange(9.0).reshape(3, 3) / 10
        assert check_equivalence(inst, X, RESCALED, vec_order="C").passed
        assert not check_equivalence(inst, X, RESCALED, vec_order="F").passed

    def test_exact_zero(self, tiny_instance):
        # X = 0 gives identical arithmetic on both sides
        rec = check_equivalence(tiny_instance, np.zeros((2, 2)), NORMALIZED)
        assert rec.passed and rec.logLhs == -math.inf

    def test_bad_form(self, tiny_instance):
        with pytest.raises(ValueError):
            matrix_loss(tiny_instance, np.zeros((2, 2)), SPARSE)

    def test_overflow(self, tiny_instance):
        with pytest.raises(RangeError):
            matrix_loss(tiny_instance, np.full((2, 2), 1e4), NORMALIZED)


def test_loss_from_state_consistent(tiny_sys, tiny_x):
    st = forward(tiny_sys, tiny_x)
    assert st.alpha.sum() == loss(tiny_sys, tiny_x, SPARSE)
