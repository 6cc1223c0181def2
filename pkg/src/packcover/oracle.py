"""Approximate argmax oracle for the regularized bilinear objective.

Given a linear term (a, a1, a2) the oracle returns w = (x, 1, y, z) in the
domain with  a.(x,u) + a1.y + a2.z - 6*sqrt(3)*phi(w)  within delta of its
supremum.  It alternates two exact coordinate maximizations, each available
in closed form:

  * duals:  y = proj(exp((a1/s - P(x log x)) / (2(||P||_inf + 1)) - 1))
    where proj renormalizes onto the extended simplex only when the
    coordinate sum exceeds 1 (the e^{-1} comes from the KKT multiplier and
    cancels under renormalization, so it only matters when the sum is free);
  * primal: x_j = min(exp(a_j / d_j - 1), 1) with d = P^T y + C^T z, and the
    degenerate d_j = 0 coordinate set by the sign of a_j.

The alternating objective is monotone because each half-step is an exact
argmax of a concave function.  Rounds stop early once a full round gains
less than delta/4.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DomainError, ShapeError
from .instance import MpcInstance
from .regularizer import SCALE, RegularizerParams

__all__ = ["OracleInput", "OracleResult", "project_simplex_plus", "x_step",
           "yz_step", "oso"]


@dataclass(frozen=True)
class OracleInput:
    """Linear term of the oracle objective: a over (x, u), a1 over y, a2 over z."""

    a: np.ndarray
    a1: np.ndarray
    a2: np.ndarray

    def __post_init__(self):
        for name in ("a", "a1", "a2"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if arr.ndim != 1:
                raise ShapeError(f"OracleInput.{name} must be 1-d")
            if not np.all(np.isfinite(arr)):
                raise DomainError(f"OracleInput.{name} must be finite")
            object.__setattr__(self, name, arr)


def project_simplex_plus(v) -> np.ndarray:
    """Project a nonnegative vector onto the extended simplex.

    Returns v unchanged when its coordinate sum is at most 1, otherwise
    v / sum(v).
    """
    v = np.asarray(v, dtype=np.float64)
    if v.size and v.min() < 0.0:
        raise DomainError("project_simplex_plus requires a nonnegative vector")
    total = float(v.sum())
    return v / total if total > 1.0 else v.copy()


def _xlogx(x):
    return np.where(x > 0.0, x * np.log(np.maximum(x, 1e-300)), 0.0)


def x_step(a, y, z, inst: MpcInstance) -> np.ndarray:
    """Exact primal maximizer given duals (inputs pre-divided by the scale)."""
    a = np.asarray(a, dtype=np.float64)
    if a.shape != (inst.n,):
        raise ShapeError(f"a must have length {inst.n}")
    d = inst.packing.matvec_transpose(y) + inst.covering.matvec_transpose(z)
    x = np.empty(inst.n)
    for j in range(inst.n):
        if d[j] <= 0.0:
            x[j] = 1.0 if a[j] > 0.0 else 0.0
        else:
            t = a[j] / d[j] - 1.0
            x[j] = np.exp(t) if t < 0.0 else 1.0
    return x


def _entropy_argmax(g) -> np.ndarray:
    """argmax of g.v - sum(v log v) over the extended simplex (exact)."""
    gm = g - 1.0
    m = float(gm.max())
    if m > 0.0:
        e = np.exp(gm - m)
        return e / e.sum()
    e = np.exp(gm)
    s = float(e.sum())
    return e / s if s > 1.0 else e


def yz_step(a1, a2, x, inst: MpcInstance) -> tuple[np.ndarray, np.ndarray]:
    """Exact dual maximizers given the primal point (inputs pre-scaled).

    y maximizes a1.y - y.P(x log x) - 2(||P||_inf + 1) sum y_i log y_i over
    the extended simplex, z the covering analogue.
    """
    a1 = np.asarray(a1, dtype=np.float64)
    a2 = np.asarray(a2, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if a1.shape != (inst.num_packing,) or a2.shape != (inst.num_covering,):
        raise ShapeError("dual linear terms have wrong length")
    if x.shape != (inst.n,):
        raise ShapeError(f"x must have length {inst.n}")
    xlx = _xlogx(x)
    kp = 2.0 * (inst.packing.inf_operator_norm() + 1.0)
    kc = 2.0 * (inst.covering.inf_operator_norm() + 1.0)
    y = _entropy_argmax((a1 - inst.packing.matvec(xlx)) / kp)
    z = _entropy_argmax((a2 - inst.covering.matvec(xlx)) / kc)
    return y, z


@dataclass
class OracleResult:
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    objective: float  # a.(x,1) + a1.y + a2.z - 6 sqrt(3) phi at the output
    objectives: np.ndarray  # per-round values; nondecreasing
    rounds: int
    matvecs: int = 0  # sparse passes consumed: 2 setup + 4 per round

    @property
    def u(self) -> float:
        return 1.0

    def state(self):
        from .solver import SaddleState
        return SaddleState(x=self.x, u=1.0, y=self.y, z=self.z)


def oso(inp: OracleInput, delta: float, inst: MpcInstance,
        params: RegularizerParams, warm=None) -> OracleResult:
    """Run the alternating oracle to accuracy delta.

    The round budget is max(3, ceil(log2(rho / delta))) with an early exit
    once a round gains less than delta/4; cold starts use x = 1 so the first
    dual step sees x log x = 0.
    """
    if delta <= 0.0:
        raise DomainError("delta must be positive")
    if inp.a.shape != (inst.n + 1,):
        raise ShapeError(f"oracle input a must have length n+1 = {inst.n + 1}")
    if inp.a1.shape != (inst.num_packing,) or inp.a2.shape != (inst.num_covering,):
        raise ShapeError("oracle input a1/a2 have wrong length")
    if warm is None:
        x0 = np.ones(inst.n)
    else:
        x0 = np.clip(np.asarray(warm, dtype=np.float64), 0.0, 1.0)
        if x0.shape != (inst.n,):
            raise ShapeError("warm start has wrong length")
    kmax = max(3, int(np.ceil(np.log2(max(params.rho / delta, 2.0)))))
    n, p, c = inst.n, inst.num_packing, inst.num_covering
    x = np.empty(n)
    y = np.empty(p)
    z = np.empty(c)
    objs = np.empty(kmax)
    P, C = inst.packing, inst.covering
    rounds, mv = _kernels.oso_alternating(
        P.row_ptr, P.col_idx, P.values, C.row_ptr, C.col_idx, C.values,
        n, p, c, params.p_norm_inf, params.c_norm_inf, SCALE,
        inp.a[:n], float(inp.a[n]), inp.a1, inp.a2, delta, kmax, x0,
        x, y, z, objs, np.empty(n), np.empty(p), np.empty(c), np.empty(n))
    return OracleResult(x=x, y=y, z=z, objective=float(objs[rounds - 1]),
                        objectives=objs[:rounds].copy(), rounds=rounds,
                        matvecs=int(mv))
