import itertools

import numpy as np
import pytest

from packcover import (SCALE, DomainError, MpcInstance, OracleInput,
                       SparseMatrix, build_params, oso, project_simplex_plus,
                       x_step, yz_step)
from packcover.generate import random_instance
from packcover.testkit import GridSpec, dense_phi, grid_oso_max


def make(p_dense, c_dense):
    return MpcInstance(SparseMatrix.from_dense(p_dense),
                       SparseMatrix.from_dense(c_dense))


def oracle_objective(inp, inst, params, x, y, z):
    lin = float(inp.a[:inst.n] @ x) + float(inp.a[inst.n]) \
        + float(inp.a1 @ y) + float(inp.a2 @ z)
    return lin - dense_phi(params, inst, x, y, z)


def random_input(rng, inst, spread=3.0):
    return OracleInput(a=rng.uniform(-spread, spread, inst.n + 1),
                       a1=rng.uniform(-spread, spread, inst.num_packing),
                       a2=rng.uniform(-spread, spread, inst.num_covering))


# -- projection ---------------------------------------------------------------

def test_projection_inside_unchanged():
    assert np.array_equal(project_simplex_plus([0.2, 0.3]), [0.2, 0.3])


def test_projection_normalizes():
    assert np.allclose(project_simplex_plus([2.0, 2.0]), [0.5, 0.5])
    assert np.allclose(project_simplex_plus([3.0, 1.0, 0.0]), [0.75, 0.25, 0.0])


def test_projection_rejects_negative():
    with pytest.raises(DomainError):
        project_simplex_plus([-0.1, 0.5])


# -- x step --------------------------------------------------------------------

def test_x_step_values():
    inst = make([[1.0]], [[1.0]])
    # d = y + z below; clamp at 1 when the stationary point passes it
    assert x_step(np.array([1.0]), np.array([1.0]), np.array([0.0]), inst)[0] == 1.0
    got = x_step(np.array([0.0]), np.array([1.0]), np.array([0.0]), inst)[0]
    assert abs(got - np.exp(-1.0)) < 1e-15


def test_x_step_degenerate_column():
    inst = make([[1.0, 0.0]], [[1.0, 0.0]])
    x = x_step(np.array([0.5, -5.0]), np.array([0.1]), np.array([0.1]), inst)
    assert x[1] == 0.0
    x = x_step(np.array([0.5, 5.0]), np.array([0.1]), np.array([0.1]), inst)
    assert x[1] == 1.0


def test_x_step_is_coordinatewise_argmax():
    rng = np.random.default_rng(17)
    for _ in range(20):
        inst = random_instance(rng, 2, 2, 2, feasible=True)
        params = build_params(inst)
        a = rng.uniform(-2.0, 2.0, 2)
        y = rng.uniform(0.0, 0.5, 2)
        z = rng.uniform(0.0, 0.5, 2)
        x_opt = x_step(a, y, z, inst)

        def obj(x):
            d = inst.packing.matvec_transpose(y) + inst.covering.matvec_transpose(z)
            xlx = np.where(x > 0, x * np.log(np.maximum(x, 1e-300)), 0.0)
            return float(a @ x - d @ xlx)

        best = obj(x_opt)
        for trial in itertools.product(np.linspace(0.0, 1.0, 101), repeat=2):
            assert best >= obj(np.array(trial)) - 1e-9


# -- yz step -------------------------------------------------------------------

def test_yz_step_unsaturated_uses_exact_stationary_point():
    # with x = 1 (so x log x = 0) and zero linear term, the dual maximizer of
    # -2(||P||_inf + 1) y log y over [0, 1] sits at 1/e, not at 1
    inst = make([[1.0]], [[1.0]])
    y, z = yz_step(np.zeros(1), np.zeros(1), np.ones(1), inst)
    assert abs(y[0] - np.exp(-1.0)) < 1e-15
    assert abs(z[0] - np.exp(-1.0)) < 1e-15


def test_yz_step_saturated_normalizes():
    inst = make([[1.0, 1.0], [1.0, 1.0]], [[1.0, 1.0]])
    big = np.array([50.0, 50.0])
    y, _ = yz_step(big, np.zeros(1), np.ones(2), inst)
    assert abs(y.sum() - 1.0) < 1e-12
    assert np.allclose(y, [0.5, 0.5])


def test_yz_step_very_negative_coordinate_vanishes():
    inst = make([[1.0, 1.0], [1.0, 1.0]], [[1.0, 1.0]])
    y, _ = yz_step(np.array([0.0, -5000.0]), np.zeros(1), np.ones(2), inst)
    assert y[1] == 0.0


def test_yz_step_attains_grid_max():
    rng = np.random.default_rng(19)
    grid = np.linspace(0.0, 1.0, 201)
    glg = np.where(grid > 0, grid * np.log(np.maximum(grid, 1e-300)), 0.0)
    for _ in range(20):
        inst = random_instance(rng, 2, 1, 1, feasible=True)
        params = build_params(inst)
        a1 = rng.uniform(-3.0, 3.0, 1)
        a2 = rng.uniform(-3.0, 3.0, 1)
        x = rng.uniform(0.0, 1.0, 2)
        y, z = yz_step(a1 / SCALE, a2 / SCALE, x, inst)

        # partial objective decomposes over the two 1-d multipliers
        xlx = np.where(x > 0, x * np.log(np.maximum(x, 1e-300)), 0.0)
        wy = inst.packing.row_l1_norms()[0] * params.p_weights[0] + 2.0
        wz = inst.covering.row_l1_norms()[0] * params.c_weights[0] + 2.0
        y_scores = a1[0] * grid - SCALE * (grid * inst.packing.matvec(xlx)[0] + wy * glg)
        z_scores = a2[0] * grid - SCALE * (grid * inst.covering.matvec(xlx)[0] + wz * glg)
        grid_best = float(y_scores.max() + z_scores.max())
        got = (float(a1[0] * y[0] + a2[0] * z[0])
               - dense_phi(params, inst, x, y, z))
        assert got >= grid_best - 1e-6


# -- full oracle ----------------------------------------------------------------

def test_oso_zero_input():
    inst = make([[1.0]], [[1.0]])
    params = build_params(inst)
    inp = OracleInput(a=np.zeros(2), a1=np.zeros(1), a2=np.zeros(1))
    res = oso(inp, 1e-3, inst, params)
    assert res.objective >= -1e-3
    # phi <= 0 on the domain makes the objective nonnegative here
    assert res.objective >= 0.0


def test_oso_monotone_objective():
    rng = np.random.default_rng(23)
    for k in range(30):
        inst = random_instance(rng, int(rng.integers(1, 4)),
                               int(rng.integers(1, 4)), int(rng.integers(1, 4)),
                               feasible=bool(k % 2))
        params = build_params(inst)
        res = oso(random_input(rng, inst, spread=10.0), 1e-4, inst, params)
        diffs = np.diff(res.objectives)
        scale = max(1.0, np.abs(res.objectives).max())
        assert np.all(diffs >= -1e-12 * scale)


def test_oso_matches_grid_reference():
    rng = np.random.default_rng(29)
    delta = 1e-3
    for _ in range(10):
        inst = random_instance(rng, 1, 1, 1, feasible=True)
        params = build_params(inst)
        inp = random_input(rng, inst)
        res = oso(inp, delta, inst, params)
        ref = grid_oso_max(inp, inst, params, GridSpec(resolution=201))
        assert res.objective >= ref - delta - 1e-9


def test_oso_unit_instance_reference_point():
    inst = make([[1.0]], [[1.0]])
    params = build_params(inst)
    inp = OracleInput(a=np.array([1.0, 0.0]), a1=np.zeros(1), a2=np.zeros(1))
    res = oso(inp, 1e-3, inst, params)
    ref = grid_oso_max(inp, inst, params, GridSpec(resolution=201))
    assert res.objective >= ref - 1e-3


def test_oso_fixed_point_consistency():
    rng = np.random.default_rng(31)
    delta = 1e-4
    for _ in range(10):
        inst = random_instance(rng, 2, 2, 2, feasible=True)
        params = build_params(inst)
        inp = random_input(rng, inst)
        res = oso(inp, delta, inst, params)
        # re-apply one alternating round through the public numpy steps
        y2, z2 = yz_step(inp.a1 / SCALE, inp.a2 / SCALE, res.x, inst)
        x2 = x_step(inp.a[:2] / SCALE, y2, z2, inst)
        after = oracle_objective(inp, inst, params, x2, y2, z2)
        assert after - res.objective < delta
        assert after >= res.objective - 1e-9  # monotone across the extra round


def test_oso_warm_start_no_decrease():
    rng = np.random.default_rng(37)
    inst = random_instance(rng, 2, 2, 2, feasible=True)
    params = build_params(inst)
    inp = random_input(rng, inst)
    first = oso(inp, 1e-5, inst, params)
    again = oso(inp, 1e-5, inst, params, warm=first.x)
    assert again.objective >= first.objective - 1e-9


def test_oso_round_cost_structure():
    # each round consumes exactly 4 sparse passes (plus 2 to set up), which
    # is the O(nnz(P) + nnz(C)) per-round contract
    rng = np.random.default_rng(41)
    for n in (4, 8, 16):
        inst = random_instance(rng, n, n, n, feasible=True, row_nnz=3)
        params = build_params(inst)
        res = oso(random_input(rng, inst), 1e-3, inst, params)
        assert res.matvecs == 2 + 4 * res.rounds


def test_oso_rejects_bad_delta():
    inst = make([[1.0]], [[1.0]])
    params = build_params(inst)
    inp = OracleInput(a=np.zeros(2), a1=np.zeros(1), a2=np.zeros(1))
    with pytest.raises(DomainError):
        oso(inp, 0.0, inst, params)
