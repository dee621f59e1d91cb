"""
Worst-case studies built on single PEP solves: bound reports with their closed-form
comparators, the p x GD lower bound, the optimal descent constant, step-size
searches and the comparison of every deterministic block sequence with the
randomized method.
"""

import itertools
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
import pandas as pd

from pepbcd.algos import MethodKind, MethodSpec, StepSchedule, build_sequence_tree, run_method
from pepbcd.analysis.closed_form import am_bound, beck_ccd_bound, racd_init_bound
from pepbcd.config import settings
from pepbcd.core.errors import CapExceededError, ConstructionError, SolverFailure
from pepbcd.core.expr import LipschitzVector
from pepbcd.core.utils import logger
from pepbcd.pep import (
    Criterion,
    CriterionKind,
    Setting,
    SettingKind,
    SolverOptions,
    SolverResult,
    SolverStatus,
    assemble_pep,
    assemble_random_pep,
    export_sdpa,
    solve,
)

SANDWICH_TOL = 1e-6
DEFAULT_GRID = tuple(round(0.1 + 0.05 * k, 2) for k in range(39))

ROW_COLUMNS = [
    "method", "p", "K", "N", "L", "gamma", "setting", "R", "criterion", "bound", "safe_bound",
    "beck_bound", "am_bound", "racd_bound", "lower_bound", "solver_status", "solver_tol", "solve_seconds",
]


@dataclass
class BoundReport:
    """
    One PEP bound with the closed-form comparators whose hypotheses hold for it:
    beck_bound (CCD, steps 1/L, setting all), am_bound (AM, p=2, K>=2, setting all),
    racd_bound (random accelerated tree, uniform choice, steps 1/L, setting init) and
    lower_bound (CCD, setting init, p times the GD bound over pK steps).
    """

    method: str
    kind: str
    p: int
    N: int
    K: Optional[int]
    L: tuple
    gamma: Optional[tuple]
    setting: str
    radius: float
    criterion: str
    value: float
    status: str
    solver_tol: float
    solve_seconds: float = 0.0
    safe_bound: float = float("nan")
    beck_bound: Optional[float] = None
    am_bound: Optional[float] = None
    racd_bound: Optional[float] = None
    lower_bound: Optional[float] = None
    diagnostics: dict = field(default_factory=dict)
    problem: dict = field(default_factory=dict)
    order: Optional[tuple] = None
    multiplicity: int = 1

    @property
    def ok(self) -> bool:
        return self.status in (SolverStatus.OPTIMAL.value, SolverStatus.INACCURATE.value)

    def sandwich(self, tol: float = SANDWICH_TOL) -> dict:
        """Which attached comparators the value respects (None where none is attached)."""
        upper = [b for b in (self.beck_bound, self.am_bound, self.racd_bound) if b is not None]
        return {
            "upper": None if not upper else all(self.value <= b + tol for b in upper),
            "lower": None if self.lower_bound is None else self.value >= self.lower_bound - tol,
        }

    def to_row(self) -> dict:
        return {
            "method": self.method,
            "p": self.p,
            "K": self.K,
            "N": self.N,
            "L": ",".join(f"{v:g}" for v in self.L),
            "gamma": "" if self.gamma is None else ",".join(f"{g:g}" for g in self.gamma),
            "setting": self.setting,
            "R": self.radius,
            "criterion": self.criterion,
            "bound": self.value,
            "safe_bound": self.safe_bound,
            "beck_bound": self.beck_bound,
            "am_bound": self.am_bound,
            "racd_bound": self.racd_bound,
            "lower_bound": self.lower_bound,
            "solver_status": self.status,
            "solver_tol": self.solver_tol,
            "solve_seconds": round(self.solve_seconds, 4),
        }

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["L"] = list(self.L)
        doc["gamma"] = None if self.gamma is None else list(self.gamma)
        doc["sandwich"] = self.sandwich()
        return doc


def reports_frame(reports: Sequence[BoundReport]) -> pd.DataFrame:
    return pd.DataFrame([r.to_row() for r in reports], columns=ROW_COLUMNS)


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r2: float
    # the fitted quantity is 1/bound when set
    reciprocal: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def linear_fit(xs: Sequence[float], values: Sequence[float], reciprocal: bool = False) -> LinearFit:
    """
    Least-squares line through (x, value), or through (x, 1/value) with
    `reciprocal`: an O(1/K) rate shows as 1/bound affine in K.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(values, dtype=float)
    if xs.size != ys.size or xs.size < 2:
        raise ConstructionError(f"A linear fit needs at least two (x, value) pairs, got {xs.size} and {ys.size}")
    if reciprocal:
        if np.any(ys <= 0):
            raise ConstructionError("A reciprocal fit needs positive values")
        ys = 1.0 / ys
    slope, intercept = np.polyfit(xs, ys, 1)
    residual = ys - (slope * xs + intercept)
    spread = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 - float(residual @ residual) / spread if spread > 0 else 1.0
    return LinearFit(float(slope), float(intercept), r2, reciprocal)


def _check(result: SolverResult, what: str, strict: bool):
    if result.status in (SolverStatus.OPTIMAL, SolverStatus.INACCURATE):
        if result.status is SolverStatus.INACCURATE:
            logger.warning(f"{what}: solver finished inaccurately, value {result.value:.6g}")
        return
    if strict:
        raise SolverFailure(f"{what}: solver status {result.status.value}", result.status.value)
    logger.warning(f"{what}: solver status {result.status.value}")


def _report(result: SolverResult, method: str, kind: str, p: int, N: int, K, L, gamma, setting, criterion):
    return BoundReport(
        method=method,
        kind=kind,
        p=p,
        N=N,
        K=K,
        L=L.values,
        gamma=gamma,
        setting=setting.kind.value,
        radius=setting.radius,
        criterion=criterion.kind.value,
        value=result.value,
        status=result.status.value,
        solver_tol=result.tol,
        solve_seconds=result.solve_seconds,
        safe_bound=result.safe_bound,
        diagnostics=result.diagnostics(),
        problem=result.problem.describe() if result.problem is not None else {},
    )


def solve_method(
    method: MethodSpec,
    setting: Setting,
    L: Optional[LipschitzVector] = None,
    criterion: Optional[Criterion] = None,
    options: Optional[SolverOptions] = None,
    export_path=None,
) -> SolverResult:
    """Run, assemble and solve one PEP; the result keeps its problem."""
    problem = assemble_pep(run_method(method), setting, criterion, L)
    if export_path is not None:
        export_sdpa(problem, export_path)
    return solve(problem, options)


def worst_case(
    method: MethodSpec,
    setting: Setting,
    L: Optional[LipschitzVector] = None,
    criterion: Optional[Criterion] = None,
    options: Optional[SolverOptions] = None,
    *,
    lower_bound: bool = False,
    strict: bool = True,
    export_path=None,
) -> BoundReport:
    """
    Worst-case value of `criterion` for `method` under `setting`.

    The p x GD lower bound costs one extra solve and is only computed on request.
    With strict=False a failed solve yields a report carrying the solver status.
    """
    L = L or LipschitzVector.unit(method.p)
    criterion = criterion or Criterion.final_gap()
    result = solve_method(method, setting, L, criterion, options, export_path)
    _check(result, method.describe(), strict)

    gamma = method.schedule.gamma if method.schedule is not None else None
    report = _report(result, method.describe(), method.kind.value, method.p, method.n_steps,
                     method.cycles, L, gamma, setting, criterion)
    report.order = method.order
    if not report.ok:
        return report

    gap = criterion.kind is CriterionKind.FINAL_VALUE_GAP
    if gap and method.cycle_aligned and setting.kind is SettingKind.ALL:
        if method.kind is MethodKind.CCD and method.schedule.is_inverse_of(L):
            report.beck_bound = beck_ccd_bound(method.p, method.cycles, L, setting.radius)
        if method.kind is MethodKind.AM and method.p == 2 and method.cycles >= 2:
            report.am_bound = am_bound(method.cycles, L, setting.radius)
    if lower_bound and gap and method.kind is MethodKind.CCD and method.cycle_aligned \
            and setting.kind is SettingKind.INIT:
        report.lower_bound = lower_bound_ccd(
            method.p, method.cycles, method.schedule.relative_to(L), setting.radius, options
        )

    flags = report.sandwich()
    if flags["upper"] is False:
        logger.warning(f"{report.method}: PEP value {report.value:.6g} exceeds a closed-form upper bound")
    if flags["lower"] is False:
        logger.warning(f"{report.method}: PEP value {report.value:.6g} is below the p x GD lower bound")
    return report


def worst_case_random(
    p: int,
    N: int,
    L: Optional[LipschitzVector] = None,
    radius: float = 1.0,
    probabilities=None,
    kind: Union[str, MethodKind] = MethodKind.CACD,
    gamma_rel: Union[float, Sequence[float]] = 1.0,
    options: Optional[SolverOptions] = None,
    *,
    strict: bool = True,
    export_path=None,
) -> BoundReport:
    """Expected final gap of the randomized method over its whole sequence tree (setting init)."""
    L = L or LipschitzVector.unit(p)
    kind = MethodKind(kind)
    schedule = StepSchedule.relative(gamma_rel, L)
    tree = build_sequence_tree(p, N, probabilities, kind=kind, schedule=schedule)
    setting, criterion = Setting.init(radius), Criterion.final_gap()
    problem = assemble_random_pep(tree, setting, criterion, L)
    if export_path is not None:
        export_sdpa(problem, export_path)
    result = solve(problem, options)
    name = problem.metadata["method"]
    _check(result, name, strict)

    report = _report(result, name, f"random-{kind.value}", p, N, None, L, schedule.gamma, setting, criterion)
    uniform = probabilities is None
    if report.ok and kind is MethodKind.CACD and uniform and schedule.is_inverse_of(L):
        report.racd_bound = racd_init_bound(p, N, radius)
    return report


def lower_bound_ccd(
    p: int,
    K: int,
    gamma_rel: Union[float, Sequence[float]] = 1.0,
    radius: float = 1.0,
    options: Optional[SolverOptions] = None,
) -> float:
    """
    p * W_GD, where W_GD is the worst-case gap of pK gradient steps on a 1-smooth
    function with step i equal to gamma_rel[(i mod p)] (setting init, radius R).
    """
    if isinstance(gamma_rel, (int, float)):
        gamma_rel = (float(gamma_rel),) * p
    gamma_rel = tuple(gamma_rel)
    if len(gamma_rel) != p:
        raise ConstructionError(f"Expected {p} relative steps, got {len(gamma_rel)}")
    n = p * K
    steps = [gamma_rel[i % p] for i in range(n)]
    alpha = [steps[:i] for i in range(1, n + 1)]
    gd = MethodSpec.custom(1, (1,) * n, alpha)
    result = solve_method(gd, Setting.init(radius), LipschitzVector.unit(1), Criterion.final_gap(), options)
    _check(result, f"gd(N={n})", strict=True)
    return p * result.value


def descent_lemma_constant(
    p: int, L: Optional[LipschitzVector] = None, options: Optional[SolverOptions] = None
) -> float:
    """
    Smallest decrease f(x_0) - f(x_p) over one CCD cycle with steps 1/L_l among
    functions with ||grad f(x_0)||^2 = 1.
    """
    L = L or LipschitzVector.unit(p)
    method = MethodSpec.cyclic(MethodKind.CCD, p, 1, StepSchedule.relative(1.0, L))
    result = solve_method(method, Setting.grad_normalized(1.0), L, Criterion.cycle_decrease(), options)
    _check(result, f"descent constant (p={p}, L={L})", strict=True)
    logger.info(f"Optimal descent constant for p={p}, L={L}: {result.value:.6f}")
    return result.value


@dataclass
class StepSearchResult:
    p: int
    K: int
    gamma_star: float
    value_star: float
    table: pd.DataFrame
    direction: tuple = ()

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "K": self.K,
            "gamma_star": self.gamma_star,
            "value_star": self.value_star,
            "direction": list(self.direction),
            "table": self.table.to_dict(orient="records"),
        }


def _step_value(p: int, K: int, gamma: float, direction, radius: float, options) -> tuple[float, str]:
    L = LipschitzVector.unit(p)
    schedule = StepSchedule(tuple(gamma * d for d in direction))
    method = MethodSpec.cyclic(MethodKind.CCD, p, K, schedule)
    result = solve_method(method, Setting.init(radius), L, Criterion.final_gap(), options)
    ok = result.status in (SolverStatus.OPTIMAL, SolverStatus.INACCURATE)
    return (result.value if ok else math.nan), result.status.value


def parabolic_vertex(xs: Sequence[float], ys: Sequence[float]) -> Optional[float]:
    """
    Minimizer of the parabola through three points, or None when the fit is not
    convex or its vertex leaves [min(xs), max(xs)].
    """
    if len(xs) != 3 or len(ys) != 3:
        raise ConstructionError(f"A parabolic fit takes three points, got {len(xs)}")
    a, b, _ = np.polyfit(np.asarray(xs, dtype=float), np.asarray(ys, dtype=float), 2)
    if not a > 0:
        return None
    vertex = float(-b / (2.0 * a))
    if not min(xs) <= vertex <= max(xs):
        return None
    return vertex


def optimal_step_search(
    p: int,
    K: int,
    grid: Optional[Sequence[float]] = None,
    *,
    direction: Optional[Sequence[float]] = None,
    radius: float = 1.0,
    refine: bool = True,
    options: Optional[SolverOptions] = None,
    mapper: Callable = map,
) -> StepSearchResult:
    """
    Minimizes the CCD worst case (setting init, unit L) over a common step factor
    gamma, the per-block steps being gamma * direction. Grid points are solved
    through `mapper`; with `refine`, a parabola through the best interior grid point
    and its two neighbours proposes gamma*, kept when its solve improves the grid minimum.
    """
    grid = sorted(float(g) for g in (grid or DEFAULT_GRID))
    direction = tuple(float(d) for d in (direction or (1.0,) * p))
    if len(direction) != p:
        raise ConstructionError(f"Step direction has {len(direction)} entries for p={p}")
    jobs = [(p, K, g, direction, radius, options) for g in grid]
    values = list(mapper(_step_job, jobs))
    table = pd.DataFrame(
        {"gamma": grid, "bound": [v for v, _ in values], "solver_status": [s for _, s in values]}
    )
    finite = table["bound"].notna()
    if not finite.any():
        raise SolverFailure(f"Every step-size solve failed for p={p}, K={K}")
    for g, status in zip(table.loc[~finite, "gamma"], table.loc[~finite, "solver_status"]):
        logger.warning(f"Step search p={p} K={K}: gamma={g:g} failed ({status})")

    best = int(table.loc[finite, "bound"].idxmin())
    gamma_star, value_star = grid[best], float(table.loc[best, "bound"])
    if refine and 0 < best < len(grid) - 1 and finite.iloc[best - 1] and finite.iloc[best + 1]:
        vertex = parabolic_vertex(grid[best - 1:best + 2], table["bound"].iloc[best - 1:best + 2].tolist())
        if vertex is not None:
            value, _ = _step_value(p, K, vertex, direction, radius, options)
            if np.isfinite(value) and value <= value_star:
                gamma_star, value_star = vertex, float(value)
    logger.info(f"Step search p={p} K={K}: gamma*={gamma_star:.4f}, bound {value_star:.6g}")
    return StepSearchResult(p, K, gamma_star, value_star, table, direction)


def _step_job(job) -> tuple[float, str]:
    return _step_value(*job)


def canonical_sequence(sequence: Sequence[int]) -> tuple[int, ...]:
    """Relabels blocks by order of first appearance: (2,1,1,2) -> (1,2,2,1)."""
    labels: dict[int, int] = {}
    for b in sequence:
        labels.setdefault(b, len(labels) + 1)
    return tuple(labels[b] for b in sequence)


def enumerate_sequences(
    p: int, N: int, dedup: bool = True, L: Optional[LipschitzVector] = None, cap: Optional[int] = None
) -> list[tuple[tuple[int, ...], int]]:
    """
    Every block sequence of length N with its multiplicity. Relabeling blocks is a
    symmetry only when all L_l agree; otherwise deduplication is switched off.
    """
    cap = settings.RACD_CAP if cap is None else cap
    total = p ** N
    if total > cap:
        raise CapExceededError(
            f"{p}^{N} = {total} sequences exceed the cap of {cap}; "
            f"lower N or p, or raise the cap with --cap or PEPBCD_RACD_CAP"
        )
    if dedup and L is not None and len(set(L.values)) > 1:
        logger.warning(f"Block relabeling is not a symmetry for L={L}; listing every sequence")
        dedup = False
    counts: dict[tuple[int, ...], int] = {}
    for seq in itertools.product(range(1, p + 1), repeat=N):
        key = canonical_sequence(seq) if dedup else seq
        counts[key] = counts.get(key, 0) + 1
    return sorted(counts.items())


def _sequence_job(job) -> BoundReport:
    p, seq, count, L, radius, options = job
    method = MethodSpec.sequence(MethodKind.CACD, p, seq, StepSchedule.relative(1.0, L))
    report = worst_case(method, Setting.init(radius), L, Criterion.final_gap(), options, strict=False)
    report.multiplicity = count
    return report


def racd_compare(
    p: int,
    N: int,
    L: Optional[LipschitzVector] = None,
    radius: float = 1.0,
    dedup: bool = True,
    cap: Optional[int] = None,
    options: Optional[SolverOptions] = None,
    mapper: Callable = map,
) -> list[BoundReport]:
    """
    Accelerated coordinate descent along every deterministic block sequence and the
    expectation of its uniformly random version; sorted by bound, failures last.
    """
    L = L or LipschitzVector.unit(p)
    sequences = enumerate_sequences(p, N, dedup, L, cap)
    jobs = [(p, seq, count, L, radius, options) for seq, count in sequences]
    reports = list(mapper(_sequence_job, jobs))
    reports.append(worst_case_random(p, N, L, radius, options=options, strict=False))
    return sorted(reports, key=lambda r: (not r.ok, r.value if r.ok else math.inf))
