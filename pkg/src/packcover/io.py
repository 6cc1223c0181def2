"""File formats and canonical serialization.

Instance files are line-oriented text: a header `MPC <n> <p> <c> <nnzP>
<nnzC>[ rhs]` followed by one `P <row> <col> <value>` or `C <row> <col>
<value>` triplet per line (0-indexed, `#` starts a comment).  With the
optional `rhs` header token every triplet carries a fifth field, the row's
right-hand side, which is divided out at load so instances always have unit
right-hand sides in memory.  Duplicate cells sum; zeros are dropped.

Graph files are `<u> <v>` edge lines with `#` comments; self-loops are
dropped with a warning.

JSON and CSV emission is canonical: fixed key order and floats printed with
17 significant digits, so identical runs produce byte-identical artifacts.
"""

from __future__ import annotations

import math

from .densest import Graph
from .errors import ParseError
from .instance import MpcInstance, NormalizedInstance
from .solver import SolveReport
from .sparse import SparseMatrix

__all__ = ["load_instance", "save_instance", "load_graph", "format_float",
           "to_canonical_json", "report_document", "trace_csv_lines",
           "column_map_document"]


def format_float(v: float) -> str:
    """Canonical float formatting: 17 significant digits round-trip."""
    if math.isnan(v) or math.isinf(v):
        raise ValueError(f"non-finite value not serializable: {v}")
    return format(float(v), ".17g")


# -- instance files ----------------------------------------------------------

def _strip(line: str) -> str:
    cut = line.find("#")
    if cut >= 0:
        line = line[:cut]
    return line.strip()


def load_instance(path) -> MpcInstance:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.readlines()

    header = None
    header_line = 0
    body_start = 0
    for lineno, raw in enumerate(lines, start=1):
        text = _strip(raw)
        if not text:
            continue
        header = text.split()
        header_line = lineno
        body_start = lineno
        break
    if header is None:
        raise ParseError("empty instance file")
    if header[0] != "MPC" or len(header) not in (6, 7):
        raise ParseError("header must be 'MPC <n> <p> <c> <nnzP> <nnzC>[ rhs]'",
                         line=header_line)
    with_rhs = len(header) == 7
    if with_rhs and header[6] != "rhs":
        raise ParseError(f"unknown header token {header[6]!r}", line=header_line)
    try:
        n, p, c, nnz_p, nnz_c = (int(tok) for tok in header[1:6])
    except ValueError:
        raise ParseError("header counts must be integers", line=header_line) from None
    if min(n, p, c, nnz_p, nnz_c) < 0:
        raise ParseError("header counts must be nonnegative", line=header_line)

    fields = 5 if with_rhs else 4
    trips = {"P": ([], [], []), "C": ([], [], [])}
    rhs_seen: dict[tuple[str, int], float] = {}
    for lineno, raw in enumerate(lines[body_start:], start=body_start + 1):
        text = _strip(raw)
        if not text:
            continue
        toks = text.split()
        if len(toks) != fields:
            raise ParseError(f"expected {fields} fields, got {len(toks)}", line=lineno)
        kind = toks[0]
        if kind not in ("P", "C"):
            raise ParseError(f"triplet must start with P or C, got {kind!r}", line=lineno)
        try:
            i, j = int(toks[1]), int(toks[2])
            v = float(toks[3])
            b = float(toks[4]) if with_rhs else 1.0
        except ValueError:
            raise ParseError("malformed triplet numbers", line=lineno) from None
        rows = p if kind == "P" else c
        if not 0 <= i < rows:
            raise ParseError(f"row index {i} out of range for {kind} ({rows} rows)",
                             line=lineno)
        if not 0 <= j < n:
            raise ParseError(f"column index {j} out of range ({n} columns)", line=lineno)
        if not math.isfinite(v) or v < 0.0:
            raise ParseError(f"value must be finite and nonnegative, got {toks[3]}",
                             line=lineno)
        if with_rhs:
            if not math.isfinite(b) or b <= 0.0:
                raise ParseError(f"rhs must be finite and positive, got {toks[4]}",
                                 line=lineno)
            prev = rhs_seen.setdefault((kind, i), b)
            if prev != b:
                raise ParseError(f"inconsistent rhs for {kind} row {i}: {prev} vs {b}",
                                 line=lineno)
            v = v / b
        tr = trips[kind]
        tr[0].append(i)
        tr[1].append(j)
        tr[2].append(v)

    if len(trips["P"][0]) != nnz_p:
        raise ParseError(f"header promises {nnz_p} packing triplets, "
                         f"found {len(trips['P'][0])}", line=header_line)
    if len(trips["C"][0]) != nnz_c:
        raise ParseError(f"header promises {nnz_c} covering triplets, "
                         f"found {len(trips['C'][0])}", line=header_line)
    packing = SparseMatrix.from_triplets(p, n, *trips["P"])
    covering = SparseMatrix.from_triplets(c, n, *trips["C"])
    return MpcInstance(packing, covering)


def save_instance(inst: MpcInstance, path) -> None:
    """Write the canonical form: sorted triplets, 17-digit values, no rhs."""
    out = [f"MPC {inst.n} {inst.num_packing} {inst.num_covering} "
           f"{inst.packing.nnz} {inst.covering.nnz}"]
    for tag, mat in (("P", inst.packing), ("C", inst.covering)):
        rows, cols, vals = mat.triplets()
        for i, j, v in zip(rows, cols, vals):
            out.append(f"{tag} {i} {j} {format_float(v)}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(out) + "\n")


# -- graph files -------------------------------------------------------------

def load_graph(path, warn=None) -> Graph:
    pairs = []
    max_vertex = -1
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = _strip(raw)
            if not text:
                continue
            toks = text.split()
            if len(toks) != 2:
                raise ParseError(f"expected '<u> <v>', got {text!r}", line=lineno)
            try:
                u, v = int(toks[0]), int(toks[1])
            except ValueError:
                raise ParseError("vertex ids must be integers", line=lineno) from None
            if u < 0 or v < 0:
                raise ParseError("vertex ids must be nonnegative", line=lineno)
            pairs.append((u, v))
            max_vertex = max(max_vertex, u, v)
    return Graph.from_edges(max_vertex + 1, pairs, on_drop=warn)


# -- canonical JSON ----------------------------------------------------------

def _json_value(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format_float(v)
    if isinstance(v, str):
        escaped = v.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
        return f'"{escaped}"'
    if isinstance(v, dict):
        items = ", ".join(f"{_json_value(str(k))}: {_json_value(val)}"
                          for k, val in v.items())
        return "{" + items + "}"
    if hasattr(v, "tolist"):
        return _json_value(v.tolist())
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_json_value(item) for item in v) + "]"
    raise TypeError(f"not JSON-serializable: {type(v)!r}")


def to_canonical_json(obj) -> str:
    """Deterministic JSON: insertion-ordered keys, 17-digit floats."""
    return _json_value(obj) + "\n"


def report_document(report: SolveReport, *, include_timings: bool = False) -> dict:
    """Schema-stable report mapping; timings are opt-in for reproducibility."""
    norm = report.normalized
    doc = {
        "status": report.status.value,
        "eps": report.eps,
        "iterations": report.iterations,
        "gap_final": report.gap_final,
        "x": None if report.x is None else [float(v) for v in report.x],
        "certificate": None,
        "instance": None,
        "reason": report.reason,
    }
    if report.certificate is not None:
        y, z = report.certificate
        doc["certificate"] = {
            "y": [float(v) for v in y],
            "z": [float(v) for v in z],
            "space": report.certificate_space,
        }
    stats = {
        "delta": report.delta,
        "rho": report.rho,
        "budget": report.budget,
        "oracle_rounds": report.oracle_rounds,
        "matvec_calls": report.matvec_calls,
        "work_units": report.work_units,
    }
    if report.validation is not None:
        orig = report.validation.instance
        doc["instance"] = {
            "n": orig.n, "p": orig.num_packing, "c": orig.num_covering,
            "nnz": orig.nnz, "width": orig.width(), "rho": report.rho,
        }
    if norm is not None and norm.trivially_feasible is None \
            and not norm.trivially_infeasible:
        inner = norm.instance
        stats["normalized"] = {
            "n": inner.n, "p": inner.num_packing, "c": inner.num_covering,
            "nnz": inner.nnz, "width": inner.width(),
        }
    doc["stats"] = stats
    if include_timings:
        doc["timings"] = {"wall_time_s": report.wall_time}
    return doc


def trace_csv_lines(report: SolveReport) -> list[str]:
    """CSV rows `t,gap,envelope` with envelope = delta + rho/t."""
    lines = ["t,gap,envelope"]
    delta = report.delta or 0.0
    rho = report.rho or 0.0
    for t, gap in report.gap_trace:
        lines.append(f"{t},{format_float(gap)},{format_float(delta + rho / t)}")
    return lines


def column_map_document(norm: NormalizedInstance) -> dict:
    doc = {
        "n_original": norm.n_original,
        "columns": [{"original": int(cc), "scale": float(s)}
                    for cc, s in zip(norm.column_map.cols, norm.column_map.scales)],
        "eliminated": {str(k): float(v)
                       for k, v in sorted(norm.column_map.eliminated.items())},
        "trivially_feasible": None if norm.trivially_feasible is None
        else [float(v) for v in norm.trivially_feasible],
        "trivially_infeasible": norm.trivially_infeasible,
        "reason": norm.infeasible_reason,
        "box_packing_rows": list(norm.box_packing_rows),
        "notes": list(norm.notes),
    }
    return doc
