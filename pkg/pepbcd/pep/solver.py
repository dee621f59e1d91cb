"""
cvxpy backend for SdpProblem.

Multiplier convention: every constraint k gets y_k with y_k >= 0 for inequalities,
such that, for a maximization, objective + sum_k y_k expr_k is constant up to a
negative semidefinite form in the Gram blocks (signs flip for a minimization).
"""

import time
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterator, Optional

import cvxpy as cp
import numpy as np

from pepbcd.config import settings
from pepbcd.core.utils import logger
from pepbcd.pep.problem import SdpProblem, Sense

SAFE_BOUND_FACTOR = 10.0
# tolerance multipliers for the retries of an inaccurate solve
RELAXATION = (10.0, 100.0)
SCS_TOL_FLOOR = 1e-7


class SolverStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    INACCURATE = "inaccurate"
    FAILED = "failed"


_STATUS = {
    cp.OPTIMAL: SolverStatus.OPTIMAL,
    cp.OPTIMAL_INACCURATE: SolverStatus.INACCURATE,
    cp.INFEASIBLE: SolverStatus.INFEASIBLE,
    cp.INFEASIBLE_INACCURATE: SolverStatus.INFEASIBLE,
    cp.UNBOUNDED: SolverStatus.UNBOUNDED,
    cp.UNBOUNDED_INACCURATE: SolverStatus.UNBOUNDED,
}


@dataclass(frozen=True)
class SolverOptions:
    solver: str = field(default_factory=lambda: settings.SOLVER)
    tol: float = field(default_factory=lambda: settings.SOLVER_TOL)
    verbose: bool = False
    max_iters: Optional[int] = None
    retry: bool = field(default_factory=lambda: settings.SOLVER_RETRY)

    def fallbacks(self) -> list["SolverOptions"]:
        """Relaxed tolerances on the same solver, then SCS unless it is already the solver."""
        out = [replace(self, tol=self.tol * factor) for factor in RELAXATION]
        if self.solver.upper() != "SCS":
            out.append(replace(self, solver="SCS", tol=max(self.tol * RELAXATION[0], SCS_TOL_FLOOR)))
        return out

    def attempts(self) -> Iterator["SolverOptions"]:
        yield self
        if self.retry:
            yield from self.fallbacks()

    def solver_kwargs(self) -> dict:
        name = self.solver.upper()
        if name == "CLARABEL":
            opts = {"tol_gap_abs": self.tol, "tol_gap_rel": self.tol, "tol_feas": self.tol}
            if self.max_iters:
                opts["max_iter"] = self.max_iters
            return opts
        if name == "SCS":
            return {"eps_abs": self.tol, "eps_rel": self.tol, "max_iters": self.max_iters or 200_000}
        return {}


@dataclass
class SolverResult:
    status: SolverStatus
    value: float
    gram_blocks: tuple = ()
    fvals: dict = field(default_factory=dict)
    duals: Optional[np.ndarray] = None
    tol: float = 0.0
    solver: str = ""
    solve_seconds: float = 0.0
    primal_residual: float = float("nan")
    min_eigenvalue: float = float("nan")
    problem: Optional[SdpProblem] = None
    attempts: int = 1

    @property
    def optimal(self) -> bool:
        return self.status is SolverStatus.OPTIMAL

    @property
    def safe_bound(self) -> float:
        """Value pushed outward by 10 tolerances: a bound valid up to solver accuracy."""
        if self.problem is not None and not self.problem.maximize:
            return self.value - SAFE_BOUND_FACTOR * self.tol
        return self.value + SAFE_BOUND_FACTOR * self.tol

    def diagnostics(self) -> dict:
        return {
            "solver_status": self.status.value,
            "solver": self.solver,
            "solver_tol": self.tol,
            "solve_seconds": round(self.solve_seconds, 4),
            "primal_residual": self.primal_residual,
            "min_eigenvalue": self.min_eigenvalue,
            "solver_attempts": self.attempts,
        }


def _affine(data, grams, fvar):
    """cvxpy expression for the rows of a LinearData object."""
    terms = []
    for A, G in zip(data.gram, grams):
        if G is not None and A.nnz:
            n = G.shape[0]
            terms.append(cp.Constant(A) @ cp.reshape(G, (n * n,), order="F"))
    if fvar is not None and data.fvals.nnz:
        terms.append(cp.Constant(data.fvals) @ fvar)
    if not terms:
        return cp.Constant(data.constant)
    return cp.sum(terms) + data.constant if len(terms) > 1 else terms[0] + data.constant


def _residual(data, grams, fvals, senses) -> float:
    """Largest primal violation of the rows at a numeric point."""
    if data.n_rows == 0:
        return 0.0
    values = data.constant.copy()
    for A, G in zip(data.gram, grams):
        if G.size:
            values = values + A @ G.reshape(-1)
    if fvals.size:
        values = values + data.fvals @ fvals
    viol = np.where(senses == Sense.GEQ.value, np.maximum(-values, 0.0), np.abs(values))
    return float(viol.max())


RETRYABLE = (SolverStatus.INACCURATE, SolverStatus.FAILED)


def solve(problem: SdpProblem, options: Optional[SolverOptions] = None) -> SolverResult:
    """
    Solve with a cvxpy conic solver; solver trouble is reported as a status.
    Inaccurate or failed solves are retried along `options.fallbacks()`; the
    result carries the tolerance and solver of the attempt that produced it.
    """
    options = options or SolverOptions()
    result = None
    for count, attempt in enumerate(options.attempts(), start=1):
        if result is not None:
            logger.warning(
                f"{problem.metadata.get('method', 'problem')}: {result.solver} ended {result.status.value} "
                f"at tol {result.tol:g}; retrying with {attempt.solver} at tol {attempt.tol:g}"
            )
        result = _solve_once(problem, attempt)
        result.attempts = count
        if result.status not in RETRYABLE:
            break
    return result


def _solve_once(problem: SdpProblem, options: SolverOptions) -> SolverResult:
    started = time.perf_counter()

    def finish(status, value, **kw):
        return SolverResult(status, value, tol=options.tol, solver=options.solver,
                            solve_seconds=time.perf_counter() - started, problem=problem, **kw)

    ineq, eq = [], []
    for k, c in enumerate(problem.constraints):
        if c.expr.is_constant():
            v = c.expr.constant
            if (c.sense is Sense.GEQ and v < -options.tol) or (c.sense is Sense.EQ and abs(v) > options.tol):
                logger.warning(f"Constraint {c.name} reduces to the false statement {v:g} {c.sense.value}")
                return finish(SolverStatus.INFEASIBLE, float("nan"))
            continue
        (ineq if c.sense is Sense.GEQ else eq).append(k)

    grams = [cp.Variable((n, n), PSD=True) if n else None for n in problem.gram_dims]
    fvar = cp.Variable(len(problem.symbols)) if problem.symbols else None

    cons = []
    ineq_con = eq_con = None
    if ineq:
        ineq_con = _affine(problem.lower(problem.constraints[k].expr for k in ineq), grams, fvar) >= 0
        cons.append(ineq_con)
    if eq:
        eq_con = _affine(problem.lower(problem.constraints[k].expr for k in eq), grams, fvar) == 0
        cons.append(eq_con)
    objective = cp.sum(_affine(problem.lower([problem.objective]), grams, fvar))
    sense = cp.Maximize(objective) if problem.maximize else cp.Minimize(objective)
    prob = cp.Problem(sense, cons)

    try:
        prob.solve(solver=options.solver, verbose=options.verbose, **options.solver_kwargs())
    except cp.error.SolverError as e:
        logger.error(f"Solver {options.solver} failed: {e}")
        return finish(SolverStatus.FAILED, float("nan"))

    status = _STATUS.get(prob.status, SolverStatus.FAILED)
    if status is SolverStatus.UNBOUNDED:
        return finish(status, float("inf") if problem.maximize else float("-inf"))
    if status not in (SolverStatus.OPTIMAL, SolverStatus.INACCURATE):
        logger.warning(f"Solver {options.solver} returned status {prob.status}")
        return finish(status, float("nan"))

    gram_values = tuple(
        (lambda G: (G + G.T) / 2.0)(np.asarray(G.value, dtype=float)) if G is not None else np.zeros((0, 0))
        for G in grams
    )
    fvals_vec = np.asarray(fvar.value, dtype=float).reshape(-1) if fvar is not None else np.zeros(0)
    duals = np.zeros(len(problem.constraints))
    if ineq_con is not None:
        duals[ineq] = np.asarray(ineq_con.dual_value, dtype=float).reshape(-1)
    if eq_con is not None:
        # cvxpy pairs `e == 0` with a term +nu * e in the Lagrangian of the minimized objective
        duals[eq] = -np.asarray(eq_con.dual_value, dtype=float).reshape(-1)

    all_rows = problem.lower(c.expr for c in problem.constraints)
    senses = np.array([c.sense.value for c in problem.constraints])
    eigs = [np.linalg.eigvalsh(G).min() for G in gram_values if G.size]

    result = finish(
        status,
        float(prob.value),
        gram_blocks=gram_values,
        fvals=dict(zip(problem.symbols, fvals_vec.tolist())),
        duals=duals,
        primal_residual=_residual(all_rows, gram_values, fvals_vec, senses),
        min_eigenvalue=float(min(eigs)) if eigs else 0.0,
    )
    logger.debug(f"{problem.metadata.get('method', 'problem')}: {status.value} value={result.value:.8g}")
    return result
