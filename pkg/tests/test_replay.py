import numpy as np
import pytest

from pepbcd.algos import MethodSpec, StepSchedule, run_method
from pepbcd.analysis import QuadraticOracle, blowup_example, numeric_replay
from pepbcd.analysis.replay import run_ccd_numeric
from pepbcd.core.errors import ConstructionError, StructuralError
from pepbcd.core.expr import LipschitzVector
from pepbcd.pep import Setting, assemble_pep, extract_worst_case, solve


def instance_for(spec, setting, options):
    traj = run_method(spec)
    result = solve(assemble_pep(traj, setting), options)
    return extract_worst_case(result, traj)


def test_gradient_descent_replay(options):
    spec = MethodSpec.cyclic("ccd", 1, 1, StepSchedule.unit(1))
    report = numeric_replay(spec, instance_for(spec, Setting.init(), options))
    assert report.passed, report.to_dict()
    assert report.final_value == pytest.approx(1.0 / 6.0, abs=1e-6)


def test_ccd_replay_reaches_the_pep_value(options):
    spec = MethodSpec.cyclic("ccd", 2, 1, StepSchedule.unit(2))
    instance = instance_for(spec, Setting.init(), options)
    report = numeric_replay(spec, instance)
    assert report.passed, report.to_dict()
    assert report.deviation <= 1e-6
    assert len(report.values) == 3


def test_cacd_replay(options):
    spec = MethodSpec.cyclic("cacd", 2, 1, StepSchedule.unit(2))
    report = numeric_replay(spec, instance_for(spec, Setting.init(), options))
    assert report.passed, report.to_dict()


def test_am_instance_is_exact_minimization(options):
    spec = MethodSpec.cyclic("am", 2, 2)
    report = numeric_replay(spec, instance_for(spec, Setting.all_cycles(), options))
    assert report.passed, report.to_dict()
    assert report.extra["immobile"] <= 1e-6
    assert report.extra["stationary"] <= 1e-6


def test_replay_off_the_instance_reports_an_error(options):
    spec = MethodSpec.cyclic("ccd", 2, 1, StepSchedule.unit(2))
    instance = instance_for(spec, Setting.init(), options)
    far = tuple(b + 100.0 for b in instance.triplet("x0").x)
    report = numeric_replay(spec, instance, x0=far)
    assert not report.passed
    assert "not among the reconstructed points" in report.error


def test_separable_quadratic_is_solved_in_one_cycle():
    oracle = QuadraticOracle(np.eye(2), (1, 1))
    spec = MethodSpec.cyclic("ccd", 2, 1, StepSchedule.unit(2))
    report = numeric_replay(spec, oracle, x0=([1.0], [1.0]), expected=0.0)
    assert report.values == pytest.approx([1.0, 0.5, 0.0])
    assert report.passed


def test_quadratic_oracle_validation():
    with pytest.raises(StructuralError):
        QuadraticOracle(np.eye(2), (1, 2))
    with pytest.raises(StructuralError):
        QuadraticOracle(np.array([[1.0, 1.0], [0.0, 1.0]]), (1, 1))
    assert QuadraticOracle(np.diag([2.0, 3.0]), (1, 1)).block_lipschitz() == pytest.approx((2.0, 3.0))


def test_oracle_replay_needs_a_start():
    spec = MethodSpec.cyclic("ccd", 2, 1, StepSchedule.unit(2))
    with pytest.raises(ConstructionError):
        numeric_replay(spec, QuadraticOracle(np.eye(2), (1, 1)))


@pytest.mark.parametrize("eps", [0.1, 0.5])
def test_blowup_iterates_match_numeric_ccd(eps):
    report = blowup_example(eps, 3)
    A = np.array([[2 + 2 * eps, -2.0], [-2.0, 2 + 2 * eps]])
    oracle = QuadraticOracle(A, (1, 1))
    assert oracle.block_lipschitz() == pytest.approx(report.L)
    spec = MethodSpec.cyclic("ccd", 2, 3, StepSchedule.relative(1.0, LipschitzVector(report.L)))
    visited = run_ccd_numeric(spec, oracle, ([1.0], [-1.0]))
    ends = [np.concatenate(t.x) for t in visited[::2]]
    assert np.allclose(ends, report.iterates)
    assert visited[-1].f == pytest.approx(report.final_gap)


def test_quadratic_oracle_minimum():
    oracle = QuadraticOracle(np.diag([2.0, 4.0]), (1, 1), b=[-2.0, 4.0], c=1.0)
    # minimizer (1, -1)
    assert oracle.minimum() == pytest.approx(1.0 - 1.0 - 2.0)
    value, grad = oracle(([1.0], [-1.0]))
    assert value == pytest.approx(oracle.minimum())
    assert np.allclose(np.concatenate(grad), 0.0)
