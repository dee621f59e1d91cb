"""Executable checks of the structural results behind the PEP bounds."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

from pepbcd.algos import MethodKind, MethodSpec, StepSchedule
from pepbcd.analysis.closed_form import beck_ccd_bound
from pepbcd.analysis.studies import lower_bound_ccd, solve_method
from pepbcd.core.errors import ConstructionError, PepBcdError
from pepbcd.core.expr import LipschitzVector
from pepbcd.core.interp import check_finite_set, counterexample_set, load_triplet_set
from pepbcd.core.utils import logger
from pepbcd.pep import Criterion, Setting, SolverOptions, SolverStatus

CHECK_TOL = 1e-6

SCALE_CASES = {2: (1.0, 4.0), 3: (1.0, 3.0, 5.0)}


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float = float("nan")
    threshold: float = float("nan")
    detail: dict = field(default_factory=dict)
    scope: Optional[str] = None

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "passed": self.passed,
            "value": self.value,
            "threshold": self.threshold,
            "detail": self.detail,
        }
        if self.scope:
            out["scope"] = self.scope
        return out


def _value(method, setting, L, criterion, options) -> float:
    result = solve_method(method, setting, L, criterion, options)
    if result.status is not SolverStatus.OPTIMAL:
        raise PepBcdError(f"{method.describe()}: solver status {result.status.value}")
    return result.value


def verify_scale_invariance(
    p: int,
    K: int,
    gamma_rel: Union[float, Sequence[float]],
    L: LipschitzVector,
    reference_L: Optional[LipschitzVector] = None,
    radius: float = 1.0,
    rtol: float = CHECK_TOL,
    options: Optional[SolverOptions] = None,
) -> CheckResult:
    """
    Steps gamma_l / L_l on L and steps gamma_l on unit L give the same worst case
    under setting init in the L-weighted norm. `reference_L` replaces the unit
    vector of the second solve.
    """
    reference_L = reference_L or LipschitzVector.unit(p)
    name = f"scale-invariance(p={p},K={K},L={L})"
    scaled = _value(
        MethodSpec.cyclic(MethodKind.CCD, p, K, StepSchedule.relative(gamma_rel, L)),
        Setting.init(radius), L, Criterion.final_gap(), options,
    )
    unit = _value(
        MethodSpec.cyclic(MethodKind.CCD, p, K, StepSchedule.relative(gamma_rel, LipschitzVector.unit(p))),
        Setting.init(radius), reference_L, Criterion.final_gap(), options,
    )
    gap = abs(scaled - unit) / max(1.0, abs(unit))
    return CheckResult(name, gap <= rtol, gap, rtol, {"value_L": scaled, "value_unit": unit})


def verify_two_block_descent(
    L: LipschitzVector, blocks: Sequence[int] = (1, 2), options: Optional[SolverOptions] = None
) -> list[CheckResult]:
    """
    One step on block l with step 1/L_l decreases f by at least
    (||g_0^(l)||^2 + ||g_1^(l)||^2) / (2 L_l).
    """
    out = []
    for block in blocks:
        method = MethodSpec.sequence(MethodKind.CCD, L.p, (block,), StepSchedule.relative(1.0, L))
        setting = Setting.grad_normalized(1.0, block=block, points=("x0", "x1"))
        value = _value(method, setting, L, Criterion.cycle_decrease(), options)
        threshold = 1.0 / (2.0 * L.block(block)) - CHECK_TOL
        out.append(CheckResult(f"two-block-descent(block={block},L={L})", value >= threshold, value, threshold))
    return out


def verify_residual_bound(
    K: int, L: Optional[LipschitzVector] = None, options: Optional[SolverOptions] = None
) -> CheckResult:
    """min_{1<=i<2K} ||grad f(x_i)||_{L,*}^2 <= 2 (f(x_0) - f(x_2K)) / (2K - 1) for two blocks."""
    L = L or LipschitzVector.unit(2)
    method = MethodSpec.cyclic(MethodKind.CCD, 2, K, StepSchedule.relative(1.0, L))
    value = _value(method, Setting.function_decrease(1.0), L, Criterion.min_grad(), options)
    threshold = 2.0 / (2 * K - 1) + CHECK_TOL
    return CheckResult(f"residual-bound(K={K},L={L})", value <= threshold, value, threshold)


def verify_sandwich(
    p: int, K: int, L: Optional[LipschitzVector] = None, options: Optional[SolverOptions] = None
) -> CheckResult:
    """Steps 1/L_l: p x GD lower bound <= PEP (setting init) and PEP (setting all) <= closed form."""
    L = L or LipschitzVector.unit(p)
    method = MethodSpec.cyclic(MethodKind.CCD, p, K, StepSchedule.relative(1.0, L))
    init_value = _value(method, Setting.init(), L, Criterion.final_gap(), options)
    all_value = _value(method, Setting.all_cycles(), L, Criterion.final_gap(), options)
    lower = lower_bound_ccd(p, K, 1.0, 1.0, options)
    upper = beck_ccd_bound(p, K, L, 1.0)
    passed = init_value >= lower - CHECK_TOL and all_value <= upper + CHECK_TOL
    return CheckResult(
        f"sandwich(p={p},K={K})",
        passed,
        init_value,
        lower,
        {"init_value": init_value, "lower_bound": lower, "all_value": all_value, "beck_bound": upper},
    )


def verify_counterexample(path: Optional[Union[str, Path]] = None, tol: float = CHECK_TOL) -> CheckResult:
    """The pairwise conditions accept the non-interpolable three-point set."""
    L, points = load_triplet_set(path) if path else counterexample_set()
    report = check_finite_set(points, L, tol=tol)
    return CheckResult(
        "counterexample",
        report.passed,
        report.worst_residual,
        -tol,
        report.to_dict(),
        scope=report.scope,
    )


@dataclass
class VerifySummary:
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failed(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "n_checks": len(self.checks),
            "failed": self.failed,
            "checks": [c.to_dict() for c in self.checks],
        }


FAULTS = ("scale-invariance",)


def run_verify_suite(
    blocks: Sequence[int] = (2, 3),
    cycles: Sequence[int] = (1, 2),
    fault: Optional[str] = None,
    counterexample: Optional[Union[str, Path]] = None,
    options: Optional[SolverOptions] = None,
) -> VerifySummary:
    """
    Scale invariance, sandwich, two-block descent, residual bound and
    counterexample checks. `fault` feeds a wrong L to the named check.
    """
    if fault is not None and fault not in FAULTS:
        raise ConstructionError(f"Unknown fault {fault!r}; choose from {FAULTS}")
    summary = VerifySummary()

    def run(name, fn, *args):
        try:
            found = fn(*args)
        except PepBcdError as e:
            logger.error(f"Check {name} errored: {e}")
            found = CheckResult(name, False, detail={"error": str(e)})
        summary.checks.extend(found if isinstance(found, list) else [found])

    for p in blocks:
        L = LipschitzVector(SCALE_CASES.get(p, tuple(float(2 * k + 1) for k in range(p))))
        reference = L if fault == "scale-invariance" else None
        for K in cycles:
            run(f"scale-invariance(p={p},K={K})", verify_scale_invariance, p, K, 1.0, L, reference, 1.0,
                CHECK_TOL, options)
            run(f"sandwich(p={p},K={K})", verify_sandwich, p, K, None, options)
    run("two-block-descent", verify_two_block_descent, LipschitzVector((1.0, 2.0)), (1, 2), options)
    for K in cycles:
        run(f"residual-bound(K={K})", verify_residual_bound, K, None, options)
    run("counterexample", verify_counterexample, counterexample)

    for c in summary.checks:
        (logger.info if c.passed else logger.error)(f"{'PASS' if c.passed else 'FAIL'} {c.name}")
    return summary
