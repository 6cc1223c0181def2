"""Independent brute-force oracles used by the test suite.

Everything here recomputes quantities from their definitions (dense
enumeration, explicit per-entry gadget sums, finite differences) rather than
through the solver's code paths, so tests compare two genuinely different
routes.  All oracles are pure, deterministic, and size-capped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .instance import MpcInstance

__all__ = ["GridSpec", "GridFeasibility", "grid_feasibility", "grid_oso_max",
           "fd_hessian_check", "dense_phi"]

MAX_GRID_POINTS = 10_000_000
FEAS_TOL = 1e-9


@dataclass(frozen=True)
class GridSpec:
    """Per-axis resolution and bounds of an enumeration grid."""

    resolution: int = 33
    bounds: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        if self.resolution < 2:
            raise DomainError("grid resolution must be at least 2")
        lo, hi = self.bounds
        if not (0.0 <= lo < hi <= 1.0):
            raise DomainError("grid bounds must satisfy 0 <= lo < hi <= 1")

    def axis(self) -> np.ndarray:
        return np.linspace(self.bounds[0], self.bounds[1], self.resolution)


def _default_feasibility_spec(n: int) -> GridSpec:
    return GridSpec(resolution={0: 2, 1: 1025, 2: 257, 3: 65, 4: 33}[n])


def _box_grid(axis: np.ndarray, n: int) -> np.ndarray:
    """All grid points of axis^n as an (axis^n, n) array, lexicographic."""
    if n == 0:
        return np.zeros((1, 0))
    mesh = np.meshgrid(*([axis] * n), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


@dataclass(frozen=True)
class GridFeasibility:
    status: str  # "feasible" | "infeasible" | "inconclusive"
    witness: np.ndarray | None = None

    @property
    def conclusive(self) -> bool:
        return self.status != "inconclusive"


def grid_feasibility(inst: MpcInstance, eps: float, spec: GridSpec | None = None) -> GridFeasibility:
    """Exhaustive feasibility oracle over a unit-box grid.

    Feasible when some grid point passes at eps/2 (the margin guards grid
    error), infeasible when none passes even at 2*eps, inconclusive in the
    band between.
    """
    if inst.n > 4:
        raise DomainError("grid_feasibility is capped at 4 variables")
    if spec is None:
        spec = _default_feasibility_spec(inst.n)
    if spec.resolution ** max(inst.n, 1) > MAX_GRID_POINTS:
        raise DomainError("grid too large")
    pts = _box_grid(spec.axis(), inst.n)
    P = inst.packing.to_dense()
    C = inst.covering.to_dense()
    px = pts @ P.T  # (npts, p)
    cx = pts @ C.T

    def passes(level):
        ok = np.ones(pts.shape[0], dtype=bool)
        if px.shape[1]:
            ok &= px.max(axis=1) <= 1.0 + level + FEAS_TOL
        if cx.shape[1]:
            ok &= cx.min(axis=1) >= 1.0 - level - FEAS_TOL
        return ok

    tight = passes(eps / 2.0)
    if tight.any():
        return GridFeasibility("feasible", pts[int(np.argmax(tight))].copy())
    if not passes(2.0 * eps).any():
        return GridFeasibility("infeasible")
    return GridFeasibility("inconclusive")


def _simplex_grid(axis: np.ndarray, k: int) -> np.ndarray:
    """Grid points of the extended simplex (coordinate sum <= 1)."""
    pts = _box_grid(axis, k)
    return pts[pts.sum(axis=1) <= 1.0 + 1e-12]


def _xlogx(v: np.ndarray) -> np.ndarray:
    return np.where(v > 0.0, v * np.log(np.maximum(v, 1e-300)), 0.0)


def dense_phi(params, inst: MpcInstance, x, y, z) -> float:
    """Scaled regularizer recomputed entry by entry from the gadget definition.

    gamma_beta(a, b) = b a log a + beta b log b summed as
    sum_ij P_ij gamma_{p_i}(x_j, y_i) + sum_i gamma_2(u, y_i) + the covering
    analogues, with u = 1.  No operator-norm collapse is used, so this is an
    independent check of the packed implementation.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    xlx = _xlogx(x)
    yly = _xlogx(y)
    zlz = _xlogx(z)
    total = 0.0
    rows, cols, vals = inst.packing.triplets()
    for r, cc, v in zip(rows, cols, vals):
        total += v * (y[r] * xlx[cc] + params.p_weights[r] * yly[r])
    total += 2.0 * yly.sum()  # gamma_2(1, y_i) terms; 1*log(1) vanishes
    rows, cols, vals = inst.covering.triplets()
    for r, cc, v in zip(rows, cols, vals):
        total += v * (z[r] * xlx[cc] + params.c_weights[r] * zlz[r])
    total += 2.0 * zlz.sum()
    return params.scale * total


def grid_oso_max(inp, inst: MpcInstance, params, spec: GridSpec | None = None) -> float:
    """Max of the oracle objective over a product grid on the domain.

    The objective separates given x (no y-z cross terms), so the grid max
    decomposes into per-block maximizations vectorized over the y and z
    grids.  Any resolution yields a valid lower bound on the supremum; finer
    grids only tighten the test.
    """
    n, p, c = inst.n, inst.num_packing, inst.num_covering
    if n + p + c > 6:
        raise DomainError("grid_oso_max is capped at 6 total dimensions")
    if spec is None:
        spec = GridSpec(resolution=41 if n >= 2 else 201)
    axis = spec.axis()
    x_grid = _box_grid(axis, n)
    y_grid = _simplex_grid(axis, p)
    z_grid = _simplex_grid(axis, c)
    if x_grid.shape[0] * (y_grid.shape[0] + z_grid.shape[0]) > MAX_GRID_POINTS:
        raise DomainError("grid too large")

    P = inst.packing.to_dense()
    C = inst.covering.to_dense()
    a_x, a_u = np.asarray(inp.a[:n]), float(inp.a[n])
    a1, a2 = np.asarray(inp.a1), np.asarray(inp.a2)
    s = params.scale

    # entropy parts of phi per grid point, entry-faithful weights
    p_row_l1 = inst.packing.row_l1_norms()
    c_row_l1 = inst.covering.row_l1_norms()
    wy = p_row_l1 * params.p_weights + 2.0  # per-row y log y coefficient
    wz = c_row_l1 * params.c_weights + 2.0
    ent_y = _xlogx(y_grid) @ wy
    ent_z = _xlogx(z_grid) @ wz

    best = -np.inf
    chunk = max(1, MAX_GRID_POINTS // max(1, 8 * (y_grid.shape[0] + z_grid.shape[0])))
    for start in range(0, x_grid.shape[0], chunk):
        xs = x_grid[start:start + chunk]
        xlx = _xlogx(xs)
        base = xs @ a_x + a_u
        # max over y of (a1 - s P xlx).y - s * ent_y, per x point
        wy_lin = a1[None, :] - s * (xlx @ P.T)
        best_y = (wy_lin @ y_grid.T - s * ent_y[None, :]).max(axis=1) if p else 0.0
        wz_lin = a2[None, :] - s * (xlx @ C.T)
        best_z = (wz_lin @ z_grid.T - s * ent_z[None, :]).max(axis=1) if c else 0.0
        best = max(best, float((base + best_y + best_z).max()))
    return best


def fd_hessian_check(a: float, b: float, beta: float, step: float = 1e-4) -> float:
    """Max relative error between finite-difference and analytic gadget Hessians.

    Central differences of gamma_beta around (a, b) against the analytic
    entries (d2/db2, d2/dadb, d2/da2) = (beta/b, 1 + log a, b/a).  The raw
    formula is evaluated directly so probes may step slightly past a = 1.
    """
    if not (0.01 < a <= 1.0 and 0.01 < b <= 1.0):
        raise DomainError("fd_hessian_check expects a, b in (0.01, 1]")

    def g(aa, bb):
        return bb * aa * math.log(aa) + beta * bb * math.log(bb)

    h = step
    daa = (g(a + h, b) - 2.0 * g(a, b) + g(a - h, b)) / h ** 2
    dbb = (g(a, b + h) - 2.0 * g(a, b) + g(a, b - h)) / h ** 2
    dab = (g(a + h, b + h) - g(a + h, b - h) - g(a - h, b + h) + g(a - h, b - h)) / (4.0 * h * h)
    exact = np.array([beta / b, 1.0 + math.log(a), b / a])
    approx = np.array([dbb, dab, daa])
    return float(np.max(np.abs(approx - exact) / np.maximum(np.abs(exact), 1e-12)))
