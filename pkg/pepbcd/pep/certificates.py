"""Post-processing of optimal PEP solutions: explicit worst cases and dual certificates."""

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy import linalg

from pepbcd.algos.spec import Trajectory
from pepbcd.algos.tree import SequenceTree
from pepbcd.core.errors import ExtractionError
from pepbcd.core.expr import LipschitzVector, Triplet
from pepbcd.core.interp import InterpReport, NumericTriplet, check_finite_set
from pepbcd.core.utils import logger
from pepbcd.pep.problem import SdpProblem, Sense
from pepbcd.pep.solver import SolverResult, SolverStatus

RANK_TOL = 1e-9
INDEFINITE_TOL = 1e-7
CERTIFICATE_TOL = 1e-6
MULTIPLIER_FLOOR = -1e-8


@dataclass
class WorstCaseInstance:
    """Explicit points, gradients and values recovered from optimal Gram blocks."""

    triplets: tuple[NumericTriplet, ...]
    dims: tuple[int, ...]
    L: LipschitzVector
    value: float
    objective_value: float
    vectors: dict = field(repr=False, default_factory=dict)
    fvals: dict = field(repr=False, default_factory=dict)

    def triplet(self, name: str) -> NumericTriplet:
        for t in self.triplets:
            if t.name == name:
                return t
        raise KeyError(name)

    def check(self, tol: float = 1e-6) -> InterpReport:
        return check_finite_set(self.triplets, self.L, tol=tol)

    def lookup(self, x, tol: float = 1e-6) -> Optional[NumericTriplet]:
        """Triplet whose point matches x up to tol * (1 + ||x_i||), closest first."""
        flat = np.concatenate([np.asarray(b, dtype=float) for b in x])
        best, best_dist = None, float("inf")
        for t in self.triplets:
            ref = np.concatenate(t.x)
            dist = float(np.linalg.norm(flat - ref))
            if dist <= tol * (1.0 + float(np.linalg.norm(ref))) and dist < best_dist:
                best, best_dist = t, dist
        return best


def _source_triplets(source: Union[Trajectory, SequenceTree]):
    if isinstance(source, SequenceTree):
        return source.triplets() + (Triplet.optimal(source.structure),)
    return source.triplets


def _factor(G: np.ndarray, block: int) -> np.ndarray:
    """V (rank x n) with V^T V = G after dropping eigenvalues below 1e-9 trace."""
    w, V = linalg.eigh((G + G.T) / 2.0)
    scale = max(float(np.trace(G)), 0.0)
    if w.size and w.min() < -INDEFINITE_TOL * max(1.0, scale):
        raise ExtractionError(
            f"Gram block {block} is indefinite: smallest eigenvalue {w.min():.3e} (trace {scale:.3e})"
        )
    keep = w > RANK_TOL * scale
    return (V[:, keep] * np.sqrt(w[keep])).T


def extract_worst_case(
    result: SolverResult, source: Union[Trajectory, SequenceTree], L: Optional[LipschitzVector] = None
) -> WorstCaseInstance:
    """
    Factor every Gram block, assign a column to each basis label and evaluate the
    symbolic triplets. Block dimensions equal the numerical ranks.
    """
    if result.status is not SolverStatus.OPTIMAL or result.problem is None:
        raise ExtractionError(f"Cannot extract a worst case from a {result.status.value} result")
    problem = result.problem
    if L is None:
        L = LipschitzVector(problem.metadata["lipschitz"])

    vectors, dims = {}, []
    for block, (labels, G) in enumerate(zip(problem.blocks, result.gram_blocks), start=1):
        V = _factor(G, block) if G.size else np.zeros((0, 0))
        dims.append(V.shape[0])
        for k, label in enumerate(labels):
            vectors[label] = V[:, k]

    triplets = _source_triplets(source)
    # columns pruned from the layout (never referenced) are placed at the origin
    for t in triplets:
        for expr in (t.point, t.gradient):
            for label in expr.labels():
                vectors.setdefault(label, np.zeros(dims[label.block - 1]))

    fvals = dict(problem.pinned)
    fvals.update(result.fvals)
    numeric = []
    for t in triplets:
        x = t.point.evaluate(vectors, dims)
        g = t.gradient.evaluate(vectors, dims)
        f = 0.0 if t.value is None else fvals.get(t.value, 0.0)
        numeric.append(NumericTriplet(tuple(x), tuple(g), f, t.name))

    objective_value = problem.objective.evaluate(vectors, fvals)
    logger.debug(f"Extracted worst case with block dimensions {dims}")
    return WorstCaseInstance(tuple(numeric), tuple(dims), L, result.value, objective_value, vectors, fvals)


@dataclass
class CertificateReport:
    passed: bool
    multipliers: dict
    min_inequality_multiplier: float
    psd_residual: float
    stationarity_residual: float
    dual_value: float
    duality_gap: float
    residual: float
    tol: float

    def active(self, threshold: float = 1e-7) -> dict:
        return {k: v for k, v in self.multipliers.items() if abs(v) > threshold}

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "min_inequality_multiplier": self.min_inequality_multiplier,
            "psd_residual": self.psd_residual,
            "stationarity_residual": self.stationarity_residual,
            "dual_value": self.dual_value,
            "duality_gap": self.duality_gap,
            "residual": self.residual,
            "tol": self.tol,
            "active_multipliers": self.active(),
        }


def dual_certificate(
    result: SolverResult, problem: Optional[SdpProblem] = None, tol: float = CERTIFICATE_TOL
) -> CertificateReport:
    """
    Aggregate sigma * objective + sum_k y_k expr_k (sigma = +1 maximize, -1 minimize).
    A valid certificate leaves a negative semidefinite form in every Gram block, no
    value-symbol terms, and a constant equal to the optimal value.
    """
    problem = problem or result.problem
    if result.status is not SolverStatus.OPTIMAL or result.duals is None:
        raise ExtractionError(f"No dual certificate for a {result.status.value} result")
    y = np.asarray(result.duals, dtype=float)
    sigma = 1.0 if problem.maximize else -1.0

    rows = problem.lower(c.expr for c in problem.constraints)
    obj = problem.lower([problem.objective])

    psd_residual = 0.0
    for block, (A, C) in enumerate(zip(rows.gram, obj.gram), start=1):
        n = problem.gram_dims[block - 1]
        if n == 0:
            continue
        agg = -(sigma * C.toarray().reshape(-1) + A.T @ y)
        S = agg.reshape(n, n)
        lam = float(linalg.eigvalsh((S + S.T) / 2.0).min())
        psd_residual = max(psd_residual, max(-lam, 0.0))

    fval_terms = sigma * obj.fvals.toarray().reshape(-1) + rows.fvals.T @ y
    stationarity = float(np.abs(fval_terms).max()) if fval_terms.size else 0.0

    dual_value = float(obj.constant[0] + sigma * float(np.dot(y, rows.constant)))
    gap = abs(dual_value - result.value)

    ineq = np.array([c.sense is Sense.GEQ for c in problem.constraints], dtype=bool)
    min_mult = float(y[ineq].min()) if ineq.any() else 0.0
    residual = max(psd_residual, stationarity, gap)
    passed = residual <= tol and min_mult >= MULTIPLIER_FLOOR
    if not passed:
        logger.warning(
            f"Dual certificate residual {residual:.3e} (psd {psd_residual:.1e}, "
            f"stationarity {stationarity:.1e}, gap {gap:.1e}), min multiplier {min_mult:.1e}"
        )
    return CertificateReport(
        passed=passed,
        multipliers={c.name: float(v) for c, v in zip(problem.constraints, y)},
        min_inequality_multiplier=min_mult,
        psd_residual=psd_residual,
        stationarity_residual=stationarity,
        dual_value=dual_value,
        duality_gap=gap,
        residual=residual,
        tol=tol,
    )
