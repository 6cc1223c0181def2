"""Mixed packing-covering problem model and its width-reduction preprocessor.

The problem: given nonnegative P (p x n) and C (c x n), decide whether some
x in [0, 1]^n satisfies Px <= 1 and Cx >= 1.  An eps-approximate solution
keeps the box exactly but relaxes the rows to Px <= (1+eps)1 and
Cx >= (1-eps)1.

`normalize` rewrites an instance into an equivalent one whose packing entries
are at most 1 and covering entries at most 2, by per-column scaling and
column splitting against doubling covering caps.  Because the unit box is
part of the problem here, the effective packing cap of a column is
max(column max of P, 1): columns whose packing entries are all below 1 are
limited by the box, and split columns in that regime get the box materialized
as an explicit packing row so the equivalence survives the change of
variables.  Feasibility of the rewritten instance is equivalent to
feasibility of the original, exactly, and `lift_solution` maps points back.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ShapeError
from .sparse import SparseMatrix

__all__ = [
    "MpcInstance", "FeasibilityCheck", "CertificateCheck", "Validation",
    "ColumnMap", "NormalizedInstance", "validate", "normalize",
    "lift_solution", "check_epsilon_feasible", "verify_certificate",
]

BOX_TOL = 1e-9
FEAS_TOL = 1e-9


@dataclass(frozen=True)
class MpcInstance:
    """A packing matrix / covering matrix pair over a common variable set.

    Right-hand sides are implicitly all-ones; general right-hand sides are
    divided out by the file loader.
    """

    packing: SparseMatrix
    covering: SparseMatrix

    def __post_init__(self):
        if self.packing.ncols != self.covering.ncols:
            raise ShapeError(
                f"packing has {self.packing.ncols} columns, "
                f"covering has {self.covering.ncols}")

    @property
    def n(self) -> int:
        return self.packing.ncols

    @property
    def num_packing(self) -> int:
        return self.packing.nrows

    @property
    def num_covering(self) -> int:
        return self.covering.nrows

    @property
    def nnz(self) -> int:
        return self.packing.nnz + self.covering.nnz

    def width(self) -> int:
        return max(self.packing.width(), self.covering.width())


@dataclass(frozen=True)
class FeasibilityCheck:
    ok: bool
    max_packing: float  # max_i (Px)_i, -inf when there are no packing rows
    min_covering: float  # min_i (Cx)_i, +inf when there are no covering rows
    box_excess: float  # max(0, max_j x_j - 1, -min_j x_j)

    def __bool__(self):
        return self.ok


def check_epsilon_feasible(inst: MpcInstance, x, eps: float) -> FeasibilityCheck:
    """Test x in [0,1]^n (1e-9 tolerance), Px <= (1+eps)1 and Cx >= (1-eps)1."""
    if eps < 0:
        raise DomainError("eps must be nonnegative")
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (inst.n,):
        raise ShapeError(f"x must have length {inst.n}, got shape {x.shape}")
    box_excess = 0.0
    if x.size:
        box_excess = max(0.0, float(x.max()) - 1.0, -float(x.min()))
    px = inst.packing.matvec(x)
    cx = inst.covering.matvec(x)
    max_packing = float(px.max()) if px.size else float("-inf")
    min_covering = float(cx.min()) if cx.size else float("inf")
    ok = (box_excess <= BOX_TOL
          and max_packing <= 1.0 + eps + FEAS_TOL
          and min_covering >= 1.0 - eps - FEAS_TOL)
    return FeasibilityCheck(ok, max_packing, min_covering, box_excess)


@dataclass(frozen=True)
class CertificateCheck:
    valid: bool
    margin: float

    def __bool__(self):
        return self.valid


def verify_certificate(inst: MpcInstance, y, z) -> CertificateCheck:
    """Check multipliers (y, z) prove infeasibility of the boxed instance.

    The margin is the exact infimum over x in [0,1]^n of
    y.(Px - 1) + z.(1 - Cx); a strictly positive margin means no feasible
    point exists.  Closed form: sum_j min(0, (P^T y - C^T z)_j) + sum z - sum y.
    """
    y = np.asarray(y, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if y.shape != (inst.num_packing,) or z.shape != (inst.num_covering,):
        raise ShapeError("certificate multipliers have wrong length")
    if (y.size and y.min() < 0) or (z.size and z.min() < 0):
        raise DomainError("certificate multipliers must be nonnegative")
    if (y.size and y.sum() > 1.0 + BOX_TOL) or (z.size and z.sum() > 1.0 + BOX_TOL):
        raise DomainError("certificate multipliers must lie in the extended simplex")
    reduced = inst.packing.matvec_transpose(y) - inst.covering.matvec_transpose(z)
    margin = float(np.minimum(reduced, 0.0).sum() + z.sum() - y.sum())
    return CertificateCheck(margin > 0.0, margin)


# -- validation ------------------------------------------------------------

@dataclass
class Validation:
    """Outcome of structural validation.

    When an all-zero covering row makes the instance unsatisfiable, `ok` is
    False and `certificate` holds original-space multipliers proving it.
    Otherwise `instance` is the cleaned instance (empty packing rows dropped;
    columns untouched) ready for `normalize`.
    """

    instance: MpcInstance
    ok: bool
    infeasible_reason: str | None = None
    certificate: tuple[np.ndarray, np.ndarray] | None = None
    dropped_packing_rows: list[int] = field(default_factory=list)
    free_columns: list[int] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)


def validate(inst: MpcInstance) -> Validation:
    """Report structural anomalies and return a cleaned instance.

    All anomalies are outcomes, not errors: an empty covering row makes the
    instance infeasible (0 >= 1), empty packing rows are dropped (0 <= 1
    always holds), and columns absent from both matrices are recorded as free
    (they get value 1 on lift-back).
    """
    notes = []
    cover_counts = inst.covering.row_nnz()
    empty_cover = np.flatnonzero(cover_counts == 0)
    if empty_cover.size:
        row = int(empty_cover[0])
        y = np.zeros(inst.num_packing)
        z = np.zeros(inst.num_covering)
        z[row] = 1.0
        return Validation(
            instance=inst, ok=False,
            infeasible_reason=f"covering row {row} has no entries: 0 >= 1 is unsatisfiable",
            certificate=(y, z),
            notes=[f"covering row {row} empty"])

    pack_counts = inst.packing.row_nnz()
    dropped = [int(i) for i in np.flatnonzero(pack_counts == 0)]
    packing = inst.packing
    if dropped:
        keep = np.flatnonzero(pack_counts > 0)
        rows, cols, vals = packing.triplets()
        remap = np.full(packing.nrows, -1, dtype=np.int64)
        remap[keep] = np.arange(keep.size)
        packing = SparseMatrix.from_triplets(keep.size, packing.ncols,
                                             remap[rows], cols, vals)
        notes.append(f"dropped {len(dropped)} empty packing row(s): {dropped}")

    touched = np.zeros(inst.n, dtype=bool)
    touched[inst.packing.col_idx] = True
    touched[inst.covering.col_idx] = True
    free_cols = [int(j) for j in np.flatnonzero(~touched)]
    if free_cols:
        notes.append(f"{len(free_cols)} free column(s) (absent from P and C), "
                     f"fixed at 1 on lift-back: {free_cols}")

    return Validation(instance=MpcInstance(packing, inst.covering), ok=True,
                      dropped_packing_rows=dropped, free_columns=free_cols,
                      notes=notes)


# -- width reduction -------------------------------------------------------

@dataclass(frozen=True)
class ColumnMap:
    """How normalized columns map back to original variables.

    Transformed column k contributes x_bar[k] / scales[k] to original
    variable cols[k]; `eliminated` maps variables removed during
    preprocessing (pure-covering and free columns) to their fixed values.
    """

    cols: np.ndarray  # original column per transformed column
    scales: np.ndarray  # positive; ours are always >= 1
    eliminated: dict[int, float]


@dataclass
class NormalizedInstance:
    """Result of the width-reduction rewrite."""

    instance: MpcInstance
    column_map: ColumnMap
    n_original: int
    trivially_feasible: np.ndarray | None = None
    trivially_infeasible: bool = False
    infeasible_reason: str | None = None
    infeasible_certificate: tuple[np.ndarray, np.ndarray] | None = None
    box_packing_rows: list[int] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)


def _column_lists(mat: SparseMatrix):
    """Per-column (row_indices, values) views, via one CSC-style sort."""
    rows, cols, vals = mat.triplets()
    order = np.lexsort((rows, cols))
    rows, cols, vals = rows[order], cols[order], vals[order]
    out = [((), ()) for _ in range(mat.ncols)]
    if rows.size:
        boundaries = np.flatnonzero(np.diff(cols)) + 1
        starts = np.concatenate(([0], boundaries))
        ends = np.concatenate((boundaries, [rows.size]))
        for s, e in zip(starts, ends):
            out[cols[s]] = (rows[s:e], vals[s:e])
    return out


def normalize(inst: MpcInstance) -> NormalizedInstance:
    """Rewrite the instance so packing entries are <= 1 and covering <= 2.

    Stage 1 eliminates pure-covering columns (no packing entries): each is
    fixed at the smallest value in [0, 1] that satisfies as many of its rows
    as possible; fully satisfied rows are removed and partially satisfied
    ones are rescaled to unit right-hand side.  A row left with no support
    and positive residual proves infeasibility outright.

    Stage 2 processes each remaining column against its effective packing
    cap M = max(max_j P_ji, 1) (the box supplies the 1):
      * all covering entries <= M: emit one column scaled by M;
      * all covering entries >= M: the single-variable point x_i = 1/M is a
        complete feasible solution, returned as such;
      * otherwise: split into ceil(log2(cmax/M)) copies with covering entries
        capped at doubling thresholds, copy l scaled by 2^(l-1) M.  When the
        cap comes from the box (column max of P below 1) the box constraint
        is materialized as a packing row over the copies.
    """
    n = inst.n
    p_rows = inst.packing.nrows
    notes = []
    eliminated: dict[int, float] = {}

    pack_colmax = inst.packing.column_max()
    cover_cols = _column_lists(inst.covering)

    empty_cover = np.flatnonzero(inst.covering.row_nnz() == 0)
    if empty_cover.size:
        raise DomainError(
            f"covering row {int(empty_cover[0])} has no entries; "
            "run validate() first")

    # --- stage 1: pure-covering and free columns --------------------------
    row_credit = np.zeros(inst.covering.nrows)
    pure_cols = np.flatnonzero(pack_colmax == 0.0)
    for i in pure_cols:
        rows_i, vals_i = cover_cols[i]
        if len(rows_i) == 0:
            eliminated[int(i)] = 1.0  # free variable
            continue
        required = float(np.max(1.0 / np.asarray(vals_i)))
        value = min(1.0, required)
        eliminated[int(i)] = value
        row_credit[np.asarray(rows_i, dtype=np.int64)] += np.asarray(vals_i) * value
    if pure_cols.size:
        notes.append(f"eliminated {pure_cols.size} column(s) without packing entries")

    residual = 1.0 - row_credit
    keep_row = residual > FEAS_TOL  # rows not already satisfied by stage 1
    kept_rows = np.flatnonzero(keep_row)
    row_rescale = np.ones(inst.covering.nrows)
    row_rescale[kept_rows] = 1.0 / residual[kept_rows]

    case1_cols = np.flatnonzero(pack_colmax > 0.0)

    # a kept covering row whose support is entirely eliminated columns is
    # unsatisfiable: even x = 1 everywhere leaves it short of its residual
    kept_support = np.zeros(inst.covering.nrows, dtype=np.int64)
    for i in case1_cols:
        rows_i, _ = cover_cols[i]
        if len(rows_i):
            kept_support[np.asarray(rows_i, dtype=np.int64)] += 1
    for j in kept_rows:
        if kept_support[j] == 0:
            y = np.zeros(p_rows)
            z = np.zeros(inst.covering.nrows)
            z[j] = 1.0
            return NormalizedInstance(
                instance=inst, column_map=ColumnMap(np.zeros(0, np.int64), np.zeros(0), eliminated),
                n_original=n, trivially_infeasible=True,
                infeasible_reason=(
                    f"covering row {int(j)} cannot reach 1 even with every "
                    "variable at its upper bound"),
                infeasible_certificate=(y, z), notes=notes)

    cover_row_new = np.full(inst.covering.nrows, -1, dtype=np.int64)
    cover_row_new[kept_rows] = np.arange(kept_rows.size)

    pack_cols = _column_lists(inst.packing)

    # --- stage 2: per-column scaling / splitting ---------------------------
    new_cols: list[int] = []      # original column per transformed column
    new_scales: list[float] = []
    p_trip: list[tuple[int, int, float]] = []  # (row, new_col, value)
    c_trip: list[tuple[int, int, float]] = []
    box_rows: list[int] = []
    next_box_row = p_rows

    for i in case1_cols:
        m_i = float(pack_colmax[i])
        eff_cap = max(m_i, 1.0)
        rows_i, vals_i = cover_cols[i]
        rows_i = np.asarray(rows_i, dtype=np.int64)
        vals_i = np.asarray(vals_i, dtype=np.float64)
        live = cover_row_new[rows_i] >= 0 if rows_i.size else np.zeros(0, dtype=bool)
        crow = rows_i[live]
        cval = vals_i[live] * row_rescale[crow]
        cmax = float(cval.max()) if cval.size else 0.0
        # minimum over ALL kept covering rows; a structurally missing entry
        # counts as zero and defeats the single-variable shortcut
        cmin = float(cval.min()) if (cval.size == kept_rows.size and kept_rows.size) else 0.0

        prow, pval = pack_cols[i]
        prow = np.asarray(prow, dtype=np.int64)
        pval = np.asarray(pval, dtype=np.float64)

        if cmax <= eff_cap:
            k = len(new_cols)
            new_cols.append(int(i))
            new_scales.append(eff_cap)
            for r, v in zip(prow, pval):
                p_trip.append((int(r), k, v / eff_cap))
            for r, v in zip(crow, cval):
                c_trip.append((int(cover_row_new[r]), k, v / eff_cap))
            continue

        if kept_rows.size and cmin >= eff_cap:
            # x_i = 1/eff_cap alone satisfies every remaining covering row,
            # stays in the box, and cannot break any packing row
            x = np.zeros(n)
            for col, value in eliminated.items():
                x[col] = value
            x[i] = 1.0 / eff_cap
            notes.append(f"column {int(i)}: single-variable solution x = 1/{eff_cap:g}")
            return NormalizedInstance(
                instance=inst,
                column_map=ColumnMap(np.zeros(0, np.int64), np.zeros(0), eliminated),
                n_original=n, trivially_feasible=x, notes=notes)

        # split: doubling covering caps, copy l scaled by 2^(l-1) * eff_cap
        ratio = cmax / eff_cap
        copies = max(1, int(np.ceil(np.log2(ratio) - 1e-12)))
        box_row = -1
        if m_i < eff_cap and copies > 1:
            # box-limited column: the lift sum_l x_bar/2^(l-1) <= 1 is not
            # implied by the per-copy boxes, so keep it as a packing row
            # (a single copy has scale 1 and needs no extra row)
            box_row = next_box_row
            next_box_row += 1
            box_rows.append(box_row)
        for l in range(1, copies + 1):
            scale = (2.0 ** (l - 1)) * eff_cap
            cap = (2.0 ** l) * eff_cap
            k = len(new_cols)
            new_cols.append(int(i))
            new_scales.append(scale)
            for r, v in zip(prow, pval):
                p_trip.append((int(r), k, v / scale))
            if box_row >= 0:
                p_trip.append((box_row, k, 1.0 / scale))
            for r, v in zip(crow, cval):
                c_trip.append((int(cover_row_new[r]), k, min(v, cap) / scale))

    n_new = len(new_cols)
    if kept_rows.size == 0:
        # nothing left to cover: zero is feasible for the remaining columns
        x = np.zeros(n)
        for col, value in eliminated.items():
            x[col] = value
        notes.append("all covering rows satisfied during preprocessing")
        return NormalizedInstance(
            instance=inst,
            column_map=ColumnMap(np.zeros(0, np.int64), np.zeros(0), eliminated),
            n_original=n, trivially_feasible=x, notes=notes)

    p_new_rows = next_box_row
    packing = SparseMatrix.from_triplets(
        p_new_rows, n_new,
        [t[0] for t in p_trip], [t[1] for t in p_trip], [t[2] for t in p_trip])
    covering = SparseMatrix.from_triplets(
        kept_rows.size, n_new,
        [t[0] for t in c_trip], [t[1] for t in c_trip], [t[2] for t in c_trip])

    column_map = ColumnMap(np.asarray(new_cols, dtype=np.int64),
                           np.asarray(new_scales, dtype=np.float64),
                           eliminated)
    return NormalizedInstance(
        instance=MpcInstance(packing, covering), column_map=column_map,
        n_original=n, box_packing_rows=box_rows, notes=notes)


def lift_solution(norm: NormalizedInstance, x_bar) -> np.ndarray:
    """Map a point of the normalized instance back to original variables.

    x_i = sum over copies of x_bar[(i,l)] / scale[(i,l)], plus the values of
    eliminated variables.  The result is clipped to the unit box: clipping
    equals a per-column downscale by at most the packing slack of the point,
    so an (eps/2)-feasible normalized point lifts to an eps-feasible original
    one, and an exactly feasible point is never clipped.
    """
    x_bar = np.asarray(x_bar, dtype=np.float64)
    k = norm.column_map.cols.shape[0]
    if x_bar.shape != (k,):
        raise ShapeError(f"x_bar must have length {k}, got shape {x_bar.shape}")
    if x_bar.size and (x_bar.min() < -BOX_TOL or x_bar.max() > 1.0 + BOX_TOL):
        raise DomainError("x_bar must lie in the unit box (1e-9 slack)")
    x = np.zeros(norm.n_original)
    np.add.at(x, norm.column_map.cols, x_bar / norm.column_map.scales)
    for col, value in norm.column_map.eliminated.items():
        x[col] = value
    return np.clip(x, 0.0, 1.0)
