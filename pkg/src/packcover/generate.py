"""Seeded random instances and graphs with known ground truth.

Feasible instances are planted by scaling rows around a random interior
point: packing rows are scaled so the point sits comfortably below 1,
covering rows comfortably above.  Infeasible instances get one packing row
that strictly dominates a covering row entrywise, which rules out any
nonnegative solution (boxed or not) with enough margin for grid oracles to
certify it.  Everything is driven by numpy Generators, so identical seeds
reproduce identical instances bit for bit.
"""

from __future__ import annotations

import numpy as np

from .densest import Graph
from .instance import MpcInstance
from .sparse import SparseMatrix

__all__ = ["random_instance", "random_connected_graph"]


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _random_pattern(rng, rows, n, row_nnz):
    idx_rows, idx_cols, vals = [], [], []
    for i in range(rows):
        k = min(n, row_nnz if row_nnz else int(rng.integers(1, n + 1)))
        cols = rng.choice(n, size=k, replace=False)
        idx_rows += [i] * k
        idx_cols += [int(cc) for cc in cols]
        vals += [float(v) for v in rng.uniform(0.1, 1.0, size=k)]
    return np.array(idx_rows), np.array(idx_cols), np.array(vals)


def random_instance(seed, n: int, p: int, c: int, *, feasible: bool = True,
                    row_nnz: int | None = None) -> MpcInstance:
    """A planted instance on n variables with p packing and c covering rows.

    When `feasible`, some interior point x* in (0.3, 0.9)^n satisfies
    Px* <= 0.85 and Cx* >= 1.15.  Otherwise packing row 0 is set to a
    covering row scaled up by a factor in [1.6, 2.5], so Px <= 1 and Cx >= 1
    cannot hold together for any x >= 0.
    """
    rng = _rng(seed)
    x_star = rng.uniform(0.3, 0.9, size=n)

    pr, pc, pv = _random_pattern(rng, p, n, row_nnz)
    cr, cc, cv = _random_pattern(rng, c, n, row_nnz)

    for i in range(p):
        sel = pr == i
        target = rng.uniform(0.55, 0.85)
        pv[sel] *= target / float(pv[sel] @ x_star[pc[sel]])
    for i in range(c):
        sel = cr == i
        target = rng.uniform(1.15, 1.5)
        cv[sel] *= target / float(cv[sel] @ x_star[cc[sel]])

    if not feasible:
        j = int(rng.integers(0, c))
        factor = rng.uniform(1.6, 2.5)
        sel = cr == j
        keep = pr != 0
        pr = np.concatenate((pr[keep], np.zeros(sel.sum(), dtype=pr.dtype)))
        pc = np.concatenate((pc[keep], cc[sel]))
        pv = np.concatenate((pv[keep], cv[sel] * factor))

    packing = SparseMatrix.from_triplets(p, n, pr, pc, pv)
    covering = SparseMatrix.from_triplets(c, n, cr, cc, cv)
    return MpcInstance(packing, covering)


def random_connected_graph(seed, n_min: int = 3, n_max: int = 8,
                           edge_prob: float | None = None) -> Graph:
    """Connected graph with vertex count in [n_min, n_max].

    A random spanning tree guarantees connectivity; additional edges appear
    independently with the given probability (default drawn from
    [0.2, 0.6]).
    """
    rng = _rng(seed)
    n = int(rng.integers(n_min, n_max + 1))
    prob = edge_prob if edge_prob is not None else float(rng.uniform(0.2, 0.6))
    edges = set()
    order = rng.permutation(n)
    for k in range(1, n):
        attach = int(order[rng.integers(0, k)])
        edges.add((min(attach, int(order[k])), max(attach, int(order[k]))))
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < prob:
                edges.add((u, v))
    return Graph(vertex_count=n, edges=tuple(sorted(edges)))
