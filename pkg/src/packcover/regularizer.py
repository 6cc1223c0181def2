"""Area-convex regularizer built from a two-variable entropy gadget.

The gadget gamma_beta(a, b) = b*a*log(a) + beta*b*log(b) has Hessian
determinant beta/a - (1 + log a)^2 >= 1 whenever beta >= 2, a in (0, 1],
which is what makes the composite function strong enough to regularize the
bilinear saddle operator while keeping only a logarithmic range over the
domain.  The composite couples every matrix entry's variable with its row
multiplier, weighting row i of the packing matrix by
p_i = 2 ||P||_inf / ||P_i||_1 (>= 2 always) and analogously for covering.

Everything downstream consumes the regularizer scaled by 6*sqrt(3); `rho`
bounds the scaled range magnitude and drives the outer iteration budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .instance import MpcInstance

__all__ = ["SCALE", "gadget", "gadget_hessian_det", "RegularizerParams",
           "build_params", "phi"]

SCALE = 6.0 * math.sqrt(3.0)


def gadget(a: float, b: float, beta: float) -> float:
    """b*a*log(a) + beta*b*log(b), with the convention 0*log(0) = 0."""
    if not 0.0 <= a <= 1.0:
        raise DomainError(f"gadget: a must be in [0, 1], got {a}")
    if b < 0.0:
        raise DomainError(f"gadget: b must be nonnegative, got {b}")
    if beta < 2.0:
        raise DomainError(f"gadget: beta must be >= 2, got {beta}")
    first = b * a * math.log(a) if a > 0.0 else 0.0
    second = beta * b * math.log(b) if b > 0.0 else 0.0
    return first + second


def gadget_hessian_det(a: float, beta: float) -> float:
    """Determinant of the gadget Hessian: beta/a - (1 + log a)^2.

    Independent of b; >= beta - 1 on (0, 1], which certifies the area
    convexity of the composite for beta >= 2.
    """
    if a <= 0.0 or a > 1.0:
        raise DomainError(f"gadget_hessian_det: a must be in (0, 1], got {a}")
    return beta / a - (1.0 + math.log(a)) ** 2


@dataclass(frozen=True)
class RegularizerParams:
    """Per-row gadget weights, the global scale, and the range bound rho."""

    p_weights: np.ndarray  # 2 ||P||_inf / ||P_i||_1 per packing row
    c_weights: np.ndarray
    scale: float  # 6 sqrt(3)
    rho: float  # range bound of the scaled regularizer: phi in [-rho, 0]
    p_norm_inf: float
    c_norm_inf: float


def build_params(inst: MpcInstance) -> RegularizerParams:
    """Weights and range bound for an instance with no empty rows.

    The range bound assembles the four explicit lower bounds of the
    composite's parts (matrix-weighted entropy terms contribute
    ||A||_inf/e + 2 ||A||_inf log(rows), the plain multiplier entropies
    2 log(rows)) and scales by 6*sqrt(3).  Single-row sides use log 2 so the
    budget never degenerates; a larger rho only adds iterations.
    """
    p_l1 = inst.packing.row_l1_norms()
    c_l1 = inst.covering.row_l1_norms()
    if inst.num_packing == 0 or inst.num_covering == 0:
        raise DomainError("build_params requires at least one row on each side")
    if p_l1.min() <= 0.0 or c_l1.min() <= 0.0:
        raise DomainError("build_params requires no empty rows (validate first)")
    pinf = float(p_l1.max())
    cinf = float(c_l1.max())
    p_weights = 2.0 * pinf / p_l1
    c_weights = 2.0 * cinf / c_l1
    lp = math.log(max(inst.num_packing, 2))
    lc = math.log(max(inst.num_covering, 2))
    rho = SCALE * (pinf / math.e + 2.0 * pinf * lp + 2.0 * lp
                   + cinf / math.e + 2.0 * cinf * lc + 2.0 * lc)
    return RegularizerParams(p_weights=p_weights, c_weights=c_weights,
                             scale=SCALE, rho=rho,
                             p_norm_inf=pinf, c_norm_inf=cinf)


def phi(params: RegularizerParams, inst: MpcInstance, state) -> float:
    """Scaled regularizer value 6*sqrt(3)*phi(w) for w in the domain.

    phi(w) sums P_ij * gamma_{p_i}(x_j, y_i) and C_ij * gamma_{c_i}(x_j, z_i)
    over stored entries plus gamma_2(u, y_i) and gamma_2(u, z_i) per row;
    with u = 1 and the row weights above this collapses to
    y.P(x log x) + 2(||P||_inf + 1) sum_i y_i log y_i + covering analogue.
    Guaranteed within [-rho, 0] on the domain.
    """
    state.require_in_domain(inst)
    x, y, z = state.x, state.y, state.z
    xlogx = np.where(x > 0.0, x * np.log(np.maximum(x, 1e-300)), 0.0)
    ent_y = float(np.sum(np.where(y > 0.0, y * np.log(np.maximum(y, 1e-300)), 0.0)))
    ent_z = float(np.sum(np.where(z > 0.0, z * np.log(np.maximum(z, 1e-300)), 0.0)))
    val = (float(y @ inst.packing.matvec(xlogx))
           + 2.0 * (params.p_norm_inf + 1.0) * ent_y
           + float(z @ inst.covering.matvec(xlogx))
           + 2.0 * (params.c_norm_inf + 1.0) * ent_z)
    return SCALE * val
