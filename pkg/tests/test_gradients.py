import numpy as np
import pytest

from sar.forward import forward
from sar.gradients import (BLOCK_TARGETS, GRAD_TOL, C, F, H, Q, block_derivative,
                           central_diff, entropy_cancellation, fd_block_derivative, fd_grad,
                           grad, grad_wrt_A, gradcheck, gradcheck_sample, rel_err)
from sar.instance import _uniform_ball, random_system, stream
from sar.losses import (CROSS_ENTROPY, ENTROPY, LOSS_KINDS, NORMALIZED, RESCALED, SPARSE,
                        loss)
from sar.tensor import CapacityError

# 40-digit reference gradients on the conftest instance
ORACLE_GRAD = {
    NORMALIZED: [-0.049136794886225963, -0.049136794886225971,
                 0.091448119696602557, 0.091448119696602572],
    RESCALED: [-0.40664063048895623, -0.22677932653915826,
               1.352528350074822, 0.068438199895877559],
    SPARSE: [1.0292498126292248, -0.38592930721121962,
             1.4020593646506075, -0.35309702465737242],
    CROSS_ENTROPY: [-0.040869470002841748, -0.040869470002841755,
                    0.069401920007577992, 0.069401920007578004],
    ENTROPY: [0.016844372814187294, 0.016844372814187297,
              -0.044918327504499435, -0.044918327504499442],
}


@pytest.mark.parametrize("kind", LOSS_KINDS)
def test_oracle_gradients(tiny_sys, tiny_x, kind):
    np.testing.assert_allclose(grad(tiny_sys, tiny_x, kind), ORACLE_GRAD[kind],
                               rtol=1e-12, atol=1e-15)


@pytest.mark.parametrize("kind", LOSS_KINDS)
def test_fd_agreement(kind):
    for k in range(30):
        rng = stream(20, k)
        n, d = int(rng.integers(1, 5)), int(rng.integers(1, 4))
        sysv = random_system(n, d, 4.5, k)
        x = _uniform_ball(rng, d * d, 4.5)
        rep = gradcheck(sysv, x, kind)
        assert rep.maxRelErr <= GRAD_TOL


def test_sign_orientation_recorded(tiny_sys, tiny_x):
    rep = gradcheck(tiny_sys, tiny_x, SPARSE)
    assert rep.maxRelErr < 1e-8
    assert rep.maxRelErrFlipped > 0.1


def test_sparse_at_zero(sys_3_2):
    # gradient of sum exp(Ax) at 0 is the column sums of A
    np.testing.assert_allclose(grad(sys_3_2, np.zeros(4), SPARSE), sys_3_2.A.sum(axis=0),
                               rtol=1e-14)


def test_uniform_softmax_entropy_stationary(sys_3_2):
    # f uniform maximizes entropy, so the entropy gradient vanishes at x = 0
    np.testing.assert_allclose(grad(sys_3_2, np.zeros(4), ENTROPY), 0.0, atol=1e-15)


def test_entropy_cancellation():
    for k in range(50):
        rng = stream(21, k)
        sysv = random_system(4, 3, 4.5, k)
        x = _uniform_ball(rng, 9, 4.5)
        assert np.max(np.abs(entropy_cancellation(sysv, x))) < 1e-12


class TestBlockDerivatives:
    @pytest.mark.parametrize("target", BLOCK_TARGETS)
    def test_vs_fd(self, target):
        for k in range(20):
            rng = stream(22, k)
            sysv = random_system(3, 2, 4.5, k)
            x = _uniform_ball(rng, 4, 4.5)
            j1, i = int(rng.integers(3)), int(rng.integers(4))
            err = rel_err(block_derivative(sysv, x, target, j1, i),
                          fd_block_derivative(sysv, x, target, j1, i))
            assert err <= GRAD_TOL

    def test_chain_consistency(self, sys_3_2):
        # d/dx_i of 0.5||q||^2 assembled from dq/dx_i matches the RESCALED gradient
        x = np.array([0.3, -0.8, 1.1, 0.2])
        st = forward(sys_3_2, x)
        g = grad(sys_3_2, x, RESCALED)
        for i in range(4):
            acc = sum(st.q[j] @ block_derivative(sys_3_2, x, Q, j, i) for j in range(3))
            assert acc == pytest.approx(g[i], rel=1e-12)

    def test_chain_normalized(self, sys_3_2):
        x = np.array([-0.4, 0.9, 0.1, -1.5])
        st = forward(sys_3_2, x)
        g = grad(sys_3_2, x, NORMALIZED)
        for i in range(4):
            acc = sum(st.c[j] @ block_derivative(sys_3_2, x, C, j, i) for j in range(3))
            assert acc == pytest.approx(g[i], rel=1e-12)

    def test_f_derivative_sums_to_zero(self, sys_3_2):
        x = np.array([0.5, 0.5, -0.5, 1.0])
        for j in range(3):
            for i in range(4):
                assert abs(block_derivative(sys_3_2, x, F, j, i).sum()) < 1e-15

    def test_h_derivative_zero_row_weighted(self, sys_3_2):
        # <f, dh/dx_i> = 0 because dh = a - <f, a> 1
        x = np.array([0.5, 0.5, -0.5, 1.0])
        st = forward(sys_3_2, x)
        for j in range(3):
            assert abs(st.f[j] @ block_derivative(sys_3_2, x, H, j, 0)) < 1e-15

    def test_index_errors(self, sys_3_2):
        with pytest.raises(IndexError):
            block_derivative(sys_3_2, np.zeros(4), F, 3, 0)
        with pytest.raises(IndexError):
            block_derivative(sys_3_2, np.zeros(4), F, 0, 4)
        with pytest.raises(ValueError):
            block_derivative(sys_3_2, np.zeros(4), "Z", 0, 0)


class TestCentralDiff:
    def test_quadratic_exact(self):
        # central differences are exact on quadratics up to rounding
        M = np.array([[2.0, 0.5], [0.5, 1.0]])
        fn = lambda v: 0.5 * v @ M @ v  # noqa: E731
        x = np.array([0.7, -1.3])
        np.testing.assert_allclose(central_diff(fn, x, 1e-3), M @ x, rtol=1e-10)

    def test_bad_step(self):
        with pytest.raises(ValueError):
            central_diff(lambda v: 0.0, np.zeros(2), 0.0)

    def test_richardson_order(self, sys_3_2):
        # truncation error shrinks about 100x when the step shrinks 10x
        x = np.array([0.3, -0.8, 1.1, 0.2])
        exact = grad(sys_3_2, x, SPARSE)
        e1 = np.max(np.abs(fd_grad(sys_3_2, x, SPARSE, 1e-2) - exact))
        e2 = np.max(np.abs(fd_grad(sys_3_2, x, SPARSE, 1e-3) - exact))
        assert 50 < e1 / e2 < 200


class TestGradWrtA:
    def test_sparse_zero_x(self, sys_3_2):
        np.testing.assert_allclose(grad_wrt_A(np.zeros(4), sys_3_2, SPARSE), 0.0, atol=1e-9)

    def test_sparse_closed_form(self, sys_3_2):
        # d/dA_{r,i} sum exp(Ax) = exp(A x)_r x_i
        x = np.array([0.3, -0.8, 1.1, 0.2])
        ref = np.outer(np.exp(sys_3_2.A @ x), x)
        np.testing.assert_allclose(grad_wrt_A(x, sys_3_2, SPARSE), ref, rtol=1e-7, atol=1e-9)

    def test_duplicate_rows(self):
        # identical rows inside a block, with equal targets, get equal gradients
        sysv = random_system(2, 2, 4.5, 0)
        A = np.array(sysv.A)
        A[1] = A[0]
        b = np.array([0.3, 0.3, 0.1, 0.6])
        dup = type(sysv)(A, b, 2, 2, 4.5, sysv.blockNorms, False)
        G = grad_wrt_A(np.array([0.4, -0.2, 0.9, 0.1]), dup, RESCALED)
        np.testing.assert_allclose(G[0], G[1], rtol=1e-8)

    def test_budget(self, sys_3_2):
        with pytest.raises(CapacityError):
            grad_wrt_A(np.zeros(4), sys_3_2, SPARSE, budget=10)


def test_gradcheck_sample_records():
    recs, worst = gradcheck_sample(0, 0, LOSS_KINDS)
    assert len(recs) == len(LOSS_KINDS) + len(BLOCK_TARGETS)
    assert all(r.passed for r in recs)
    assert worst <= GRAD_TOL
    assert "maxRelErrFlipped" in recs[0].preconds


def test_fd_loss_relation(tiny_sys, tiny_x):
    # directional derivative along the gradient equals its squared norm
    g = grad(tiny_sys, tiny_x, CROSS_ENTROPY)
    t = 1e-6
    dd = (loss(tiny_sys, tiny_x + t * g, CROSS_ENTROPY)
          - loss(tiny_sys, tiny_x - t * g, CROSS_ENTROPY)) / (2 * t)
    assert dd == pytest.approx(g @ g, rel=1e-6)
