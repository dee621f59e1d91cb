"""
Sparse SDPA (.dat-s) export of SdpProblem, and an independent reader.

The file encodes  max <F_0, Y>  s.t.  <F_k, Y> = c_k,  Y = diag(G_1, ..., G_p, D) >= 0,
where D is a nonnegative diagonal block holding f^+ and f^- for every value
symbol (f = f^+ - f^-) followed by one slack per inequality. Minimization problems
are written with F_0 negated and flagged in the header comments.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import cvxpy as cp
import numpy as np
from scipy import sparse

from pepbcd.core.errors import ConstructionError, StructuralError
from pepbcd.core.utils import logger
from pepbcd.pep.problem import SdpProblem, Sense
from pepbcd.pep.solver import _STATUS, RETRYABLE, SolverOptions, SolverStatus


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def _gram_entries(matno: int, expr, problem: SdpProblem) -> list:
    entries = []
    for block in problem.structure.labels:
        idx = problem.index(block)
        for (a, b), coef in expr.gram(block).items():
            i, j = idx[a] + 1, idx[b] + 1
            if i <= j:
                entries.append((matno, block, i, j, coef))
    return entries


def sdpa_layout(problem: SdpProblem) -> tuple[list[int], int]:
    """Signed block sizes and the size of the diagonal block."""
    n_ineq = problem.count(sense=Sense.GEQ)
    diag = 2 * len(problem.symbols) + n_ineq
    sizes = list(problem.gram_dims)
    if diag:
        sizes.append(-diag)
    return sizes, diag


def export_sdpa(problem: SdpProblem, path: Union[str, Path]) -> Path:
    path = Path(path)
    if path.suffix not in (".dat-s", ".dats", ".sdpa") and not path.name.endswith(".dat-s"):
        raise ConstructionError(f"SDPA sparse files use the .dat-s suffix, got {path.name}")
    sizes, diag = sdpa_layout(problem)
    diag_block = problem.structure.p + 1
    sym_pos = {s: k for k, s in enumerate(problem.symbols)}
    sign = 1.0 if problem.maximize else -1.0

    def value_entries(matno, expr, scale):
        out = []
        for symbol, coef in expr.fvals.items():
            k = sym_pos[symbol]
            out.append((matno, diag_block, 2 * k + 1, 2 * k + 1, scale * coef))
            out.append((matno, diag_block, 2 * k + 2, 2 * k + 2, -scale * coef))
        return out

    entries = [(m, b, i, j, sign * v) for m, b, i, j, v in _gram_entries(0, problem.objective, problem)]
    entries += value_entries(0, problem.objective, sign)

    rhs = []
    slack = 2 * len(problem.symbols)
    for matno, c in enumerate(problem.constraints, start=1):
        entries += _gram_entries(matno, c.expr, problem)
        entries += value_entries(matno, c.expr, 1.0)
        if c.sense is Sense.GEQ:
            slack += 1
            entries.append((matno, diag_block, slack, slack, -1.0))
        rhs.append(-c.expr.constant)

    entries = sorted(e for e in entries if e[4] != 0.0)
    meta = problem.metadata
    lines = [
        "* pepbcd sparse SDPA export",
        f"* method={meta.get('method', '')} setting={meta.get('setting', '')} criterion={meta.get('criterion', '')}",
        f"* sense={'max' if problem.maximize else 'min'}",
        f"* offset={_fmt(problem.objective.constant)}",
        str(len(problem.constraints)),
        str(len(sizes)),
        " ".join(str(s) for s in sizes),
        " ".join(_fmt(v) for v in rhs) if rhs else "",
    ]
    lines += [f"{m} {b} {i} {j} {_fmt(v)}" for m, b, i, j, v in entries]

    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")
    logger.info(f"Wrote SDPA file {path} ({len(problem.constraints)} constraints, blocks {sizes})")
    return path


@dataclass
class SdpaData:
    m: int
    block_sizes: list[int]
    c: np.ndarray
    entries: list = field(repr=False)
    maximize: bool = True
    offset: float = 0.0


def read_sdpa(path: Union[str, Path]) -> SdpaData:
    """Parse a sparse SDPA file; header comments carry sense and objective offset."""
    maximize, offset = True, 0.0
    tokens: list[str] = []
    entries = []
    header_done = False
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not header_done and (line.startswith("*") or line.startswith('"')):
            for item in line.lstrip('*"').split():
                if item.startswith("sense="):
                    maximize = item.split("=", 1)[1] != "min"
                elif item.startswith("offset="):
                    offset = float(item.split("=", 1)[1])
            continue
        header_done = True
        cleaned = line.replace("{", " ").replace("}", " ").replace(",", " ").replace("(", " ").replace(")", " ")
        tokens.extend(cleaned.split())

    try:
        m = int(tokens[0])
        nblocks = int(tokens[1])
        sizes = [int(float(t)) for t in tokens[2:2 + nblocks]]
        c = np.array([float(t) for t in tokens[2 + nblocks:2 + nblocks + m]])
        rest = tokens[2 + nblocks + m:]
        if len(rest) % 5:
            raise StructuralError("Entry section is not a list of 5-tuples")
        for k in range(0, len(rest), 5):
            entries.append((int(rest[k]), int(rest[k + 1]), int(rest[k + 2]), int(rest[k + 3]), float(rest[k + 4])))
    except (IndexError, ValueError) as e:
        raise StructuralError(f"Malformed SDPA file {path}: {e}") from e
    return SdpaData(m, sizes, c, entries, maximize, offset)


def solve_sdpa(data: SdpaData, options: Optional[SolverOptions] = None) -> tuple[SolverStatus, float]:
    """Solve the block form directly: PSD blocks for positive sizes, nonnegative vectors otherwise."""
    options = options or SolverOptions()
    variables, widths = [], []
    for size in data.block_sizes:
        if size > 0:
            variables.append(cp.Variable((size, size), PSD=True))
            widths.append(size * size)
        else:
            variables.append(cp.Variable(-size, nonneg=True))
            widths.append(-size)

    rows = {b: ([], [], []) for b in range(len(data.block_sizes))}
    for mat, blk, i, j, v in data.entries:
        b = blk - 1
        size = data.block_sizes[b]
        r, cidx, vals = rows[b]
        if size > 0:
            r.append(mat)
            cidx.append((i - 1) * size + (j - 1))
            vals.append(v)
            if i != j:
                r.append(mat)
                cidx.append((j - 1) * size + (i - 1))
                vals.append(v)
        else:
            r.append(mat)
            cidx.append(i - 1)
            vals.append(v)

    total = None
    for b, var in enumerate(variables):
        r, cidx, vals = rows[b]
        if not vals:
            continue
        A = sparse.csr_matrix((vals, (r, cidx)), shape=(data.m + 1, widths[b]))
        flat = cp.reshape(var, (widths[b],), order="F") if data.block_sizes[b] > 0 else var
        term = cp.Constant(A) @ flat
        total = term if total is None else total + term
    if total is None:
        return SolverStatus.FAILED, float("nan")

    cons = [total[1:] == data.c] if data.m else []
    prob = cp.Problem(cp.Maximize(total[0]), cons)
    status = SolverStatus.FAILED
    for attempt in options.attempts():
        try:
            prob.solve(solver=attempt.solver, verbose=attempt.verbose, **attempt.solver_kwargs())
            status = _STATUS.get(prob.status, SolverStatus.FAILED)
        except cp.error.SolverError as e:
            logger.error(f"SDPA re-solve with {attempt.solver} failed: {e}")
            status = SolverStatus.FAILED
        if status not in RETRYABLE:
            break
        logger.warning(f"SDPA re-solve ended {status.value} with {attempt.solver} at tol {attempt.tol:g}")
    if status not in (SolverStatus.OPTIMAL, SolverStatus.INACCURATE):
        return status, float("nan")
    value = float(prob.value)
    return status, (value if data.maximize else -value) + data.offset
