import math

import numpy as np
import pytest

from packcover import (SCALE, DomainError, MpcInstance, SaddleState,
                       SparseMatrix, build_params, gadget, gadget_hessian_det,
                       phi)
from packcover.generate import random_instance
from packcover.testkit import dense_phi, fd_hessian_check


def make(p_dense, c_dense):
    return MpcInstance(SparseMatrix.from_dense(p_dense),
                       SparseMatrix.from_dense(c_dense))


def random_domain_point(rng, inst):
    x = rng.uniform(0.0, 1.0, inst.n)
    y = rng.uniform(0.0, 1.0, inst.num_packing)
    y *= rng.uniform(0.0, 1.0) / max(1.0, y.sum())
    z = rng.uniform(0.0, 1.0, inst.num_covering)
    z *= rng.uniform(0.0, 1.0) / max(1.0, z.sum())
    return SaddleState(x=x, u=1.0, y=y, z=z)


# -- gadget ---------------------------------------------------------------

def test_gadget_values():
    assert gadget(1.0, 1.0, 2.0) == 0.0
    assert abs(gadget(0.5, 1.0, 2.0) - 0.5 * math.log(0.5)) < 1e-15
    # first term vanishes at a = 0 by the 0 log 0 convention
    for b, beta in [(0.5, 2.0), (2.0, 3.0)]:
        assert gadget(0.0, b, beta) == beta * b * math.log(b)


def test_gadget_nonpositive_for_small_b():
    rng = np.random.default_rng(2)
    for _ in range(200):
        a = rng.uniform(0.0, 1.0)
        b = rng.uniform(0.0, 1.0)
        assert gadget(a, b, rng.uniform(2.0, 10.0)) <= 0.0


def test_gadget_domain_errors():
    with pytest.raises(DomainError):
        gadget(1.5, 1.0, 2.0)
    with pytest.raises(DomainError):
        gadget(0.5, -1.0, 2.0)
    with pytest.raises(DomainError):
        gadget(0.5, 1.0, 1.5)


def test_gadget_hessian_det_values():
    assert gadget_hessian_det(1.0, 2.0) == 1.0  # beta - 1 at a = 1
    assert gadget_hessian_det(1.0, 3.0) == 2.0
    expected = 4.0 - (1.0 + math.log(0.5)) ** 2
    assert abs(gadget_hessian_det(0.5, 2.0) - expected) < 1e-15
    assert abs(gadget_hessian_det(0.5, 2.0) - 3.9058413) < 1e-6


def test_gadget_hessian_det_at_least_one():
    # log grid down to 1e-8 across several beta values
    for beta in (2.0, 2.5, 4.0, 10.0):
        for a in np.logspace(-8, 0, 1000):
            assert gadget_hessian_det(float(a), beta) >= 1.0 - 1e-12


def test_gadget_hessian_det_domain():
    with pytest.raises(DomainError):
        gadget_hessian_det(0.0, 2.0)


def test_fd_hessian_matches_analytic():
    assert fd_hessian_check(1.0, 1.0, 2.0) < 1e-5
    assert fd_hessian_check(0.5, 0.5, 2.0) < 1e-5
    rng = np.random.default_rng(4)
    for _ in range(50):
        a = rng.uniform(0.05, 1.0)
        b = rng.uniform(0.05, 1.0)
        beta = rng.uniform(2.0, 10.0)
        assert fd_hessian_check(a, b, beta) < 1e-5


def test_fd_hessian_error_shrinks_with_step():
    coarse = fd_hessian_check(0.3, 0.7, 2.5, step=4e-4)
    fine = fd_hessian_check(0.3, 0.7, 2.5, step=2e-4)
    assert fine < coarse


def test_gadget_hessian_psd_on_samples():
    rng = np.random.default_rng(6)
    for _ in range(100):
        a = rng.uniform(0.02, 1.0)
        b = rng.uniform(0.02, 1.0)
        beta = rng.uniform(2.0, 8.0)
        det = gadget_hessian_det(a, beta)
        assert det >= 1.0 - 1e-12
        assert beta / b > 0.0 and b / a > 0.0


# -- weights and range bound ------------------------------------------------

def test_weights_simple():
    params = build_params(make([[1.0]], [[1.0]]))
    assert params.p_weights[0] == 2.0 and params.c_weights[0] == 2.0


def test_weights_ratio():
    params = build_params(make([[1.0, 0.0], [0.5, 0.0]], [[1.0, 1.0]]))
    assert np.allclose(params.p_weights, [2.0, 4.0])


def test_weights_at_least_two():
    rng = np.random.default_rng(8)
    for k in range(30):
        inst = random_instance(rng, 4, 4, 4, feasible=bool(k % 2))
        params = build_params(inst)
        assert params.p_weights.min() >= 2.0 - 1e-12
        assert params.c_weights.min() >= 2.0 - 1e-12


def test_rho_explicit_value():
    params = build_params(make([[1.0]], [[1.0]]))
    expected = SCALE * (2.0 / math.e + 8.0 * math.log(2.0))
    assert abs(params.rho - expected) < 1e-12
    assert abs(params.rho - 65.27) < 0.01


def test_rho_positive_and_rejects_empty_rows():
    with pytest.raises(DomainError):
        build_params(MpcInstance(SparseMatrix.from_triplets(1, 1, [], [], []),
                                 SparseMatrix.from_dense([[1.0]])))


# -- composite regularizer ----------------------------------------------------

def test_phi_zero_at_corner():
    inst = make([[1.0]], [[1.0]])
    params = build_params(inst)
    state = SaddleState(x=np.ones(1), u=1.0, y=np.zeros(1), z=np.zeros(1))
    assert phi(params, inst, state) == 0.0
    state = SaddleState(x=np.ones(1), u=1.0, y=np.ones(1), z=np.zeros(1))
    assert phi(params, inst, state) == 0.0  # log 1 terms vanish


def test_phi_matches_dense_reference():
    rng = np.random.default_rng(10)
    for k in range(30):
        inst = random_instance(rng, int(rng.integers(1, 5)),
                               int(rng.integers(1, 5)), int(rng.integers(1, 5)),
                               feasible=True)
        params = build_params(inst)
        state = random_domain_point(rng, inst)
        fast = phi(params, inst, state)
        slow = dense_phi(params, inst, state.x, state.y, state.z)
        assert abs(fast - slow) <= 1e-9 * max(1.0, abs(slow))


def test_phi_range():
    rng = np.random.default_rng(12)
    for k in range(20):
        inst = random_instance(rng, int(rng.integers(1, 5)),
                               int(rng.integers(1, 5)), int(rng.integers(1, 5)),
                               feasible=bool(k % 2))
        params = build_params(inst)
        for _ in range(500):
            state = random_domain_point(rng, inst)
            val = phi(params, inst, state)
            assert -params.rho <= val <= 0.0


def test_phi_domain_error():
    inst = make([[1.0]], [[1.0]])
    params = build_params(inst)
    bad = SaddleState(x=np.array([1.5]), u=1.0, y=np.zeros(1), z=np.zeros(1))
    with pytest.raises(DomainError):
        phi(params, inst, bad)
