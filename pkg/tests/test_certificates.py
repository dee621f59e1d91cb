import numpy as np
import pytest

from pepbcd.algos import MethodSpec, StepSchedule, build_sequence_tree, run_method
from pepbcd.core.errors import ExtractionError
from pepbcd.core.expr import LipschitzVector
from pepbcd.pep import (
    Criterion,
    Setting,
    SolverResult,
    SolverStatus,
    assemble_pep,
    assemble_random_pep,
    dual_certificate,
    extract_worst_case,
    solve,
)
from pepbcd.pep.certificates import _factor

L14 = LipschitzVector((1.0, 4.0))


def solved(spec, setting, L=None, criterion=None, options=None):
    traj = run_method(spec)
    return traj, solve(assemble_pep(traj, setting, criterion, L), options)


@pytest.mark.parametrize("spec,setting,L", [
    (MethodSpec.cyclic("ccd", 1, 2, StepSchedule.unit(1)), Setting.init(), None),
    (MethodSpec.cyclic("ccd", 2, 1, StepSchedule.relative(1.0, L14)), Setting.init(), L14),
    (MethodSpec.cyclic("ccd", 2, 2, StepSchedule.unit(2)), Setting.all_cycles(), None),
    (MethodSpec.cyclic("cacd", 2, 1, StepSchedule.unit(2)), Setting.init(), None),
])
def test_extracted_instance_passes_the_conditions(spec, setting, L, options):
    traj, result = solved(spec, setting, L, options=options)
    instance = extract_worst_case(result, traj)
    assert instance.check(tol=1e-6).passed
    assert instance.objective_value == pytest.approx(result.value, abs=1e-6)
    assert instance.triplet(traj.final).f == pytest.approx(result.value, abs=1e-6)


def test_extracted_optimum_sits_at_the_origin(options):
    traj, result = solved(MethodSpec.cyclic("ccd", 2, 1, StepSchedule.unit(2)), Setting.init(), options=options)
    optimum = extract_worst_case(result, traj).triplet("*")
    assert np.allclose(np.concatenate(optimum.x), 0.0)
    assert optimum.f == 0.0


def test_extraction_from_a_sequence_tree(options):
    tree = build_sequence_tree(2, 2)
    result = solve(assemble_random_pep(tree, Setting.init()), options)
    instance = extract_worst_case(result, tree)
    assert len(instance.triplets) == len(tree.nodes) + 1
    assert instance.check(tol=1e-6).passed


def test_extraction_refuses_non_optimal_results():
    with pytest.raises(ExtractionError):
        extract_worst_case(SolverResult(SolverStatus.INFEASIBLE, float("nan")), None)


def test_indefinite_gram_block_is_refused():
    with pytest.raises(ExtractionError):
        _factor(np.diag([1.0, -0.5]), 1)


def test_factor_drops_negligible_directions():
    V = _factor(np.diag([2.0, 1e-14]), 1)
    assert V.shape == (1, 2)
    assert V.T @ V == pytest.approx(np.diag([2.0, 0.0]), abs=1e-12)


@pytest.mark.parametrize("spec,setting,criterion", [
    (MethodSpec.cyclic("ccd", 1, 2, StepSchedule.unit(1)), Setting.init(), None),
    (MethodSpec.cyclic("ccd", 2, 1, StepSchedule.unit(2)), Setting.all_cycles(), None),
    (MethodSpec.cyclic("ccd", 2, 1, StepSchedule.unit(2)), Setting.grad_normalized(1.0), Criterion.cycle_decrease()),
    (MethodSpec.cyclic("am", 2, 2), Setting.all_cycles(), None),
])
def test_dual_certificate_aggregates(spec, setting, criterion, options):
    _, result = solved(spec, setting, criterion=criterion, options=options)
    report = dual_certificate(result, tol=1e-5)
    assert report.passed, report.to_dict()
    assert report.min_inequality_multiplier >= -1e-8
    assert report.dual_value == pytest.approx(result.value, abs=1e-5)
    assert report.active()


def test_gradient_descent_certificate_uses_the_radius(options):
    _, result = solved(MethodSpec.cyclic("ccd", 1, 1, StepSchedule.unit(1)), Setting.init(), options=options)
    report = dual_certificate(result, tol=1e-5)
    # the radius constraint carries the whole bound: y * R^2 = 1/6
    assert report.multipliers["setting-init"] == pytest.approx(1.0 / 6.0, abs=1e-5)
