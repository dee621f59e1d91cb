import math

import pytest

from pepbcd.algos import (
    MethodKind,
    MethodSpec,
    StepSchedule,
    build_sequence_tree,
    cyclic_order,
    run_method,
    theta_schedule,
)
from pepbcd.core.errors import ConstructionError
from pepbcd.core.expr import BasisLabel, LipschitzVector


def test_cyclic_order():
    assert cyclic_order(2, 4) == (1, 2, 1, 2)
    assert cyclic_order(3, 5) == (1, 2, 3, 1, 2)


def test_relative_schedule():
    L = LipschitzVector((1.0, 4.0))
    schedule = StepSchedule.relative(1.0, L)
    assert schedule.gamma == (1.0, 0.25)
    assert schedule.is_inverse_of(L)
    assert not StepSchedule.unit(2).is_inverse_of(L)
    assert StepSchedule.relative((0.5, 2.0), L).relative_to(L) == pytest.approx((0.5, 2.0))
    with pytest.raises(ConstructionError):
        StepSchedule((1.0, 0.0))
    with pytest.raises(ConstructionError):
        StepSchedule.relative((1.0, 1.0, 1.0), L)


def test_spec_validation():
    with pytest.raises(ConstructionError):
        MethodSpec.sequence("ccd", 2, (1, 3), StepSchedule.unit(2))
    with pytest.raises(ConstructionError):
        MethodSpec.cyclic("ccd", 2, 1)
    with pytest.raises(ConstructionError):
        MethodSpec.cyclic("ccd", 2, 0, StepSchedule.unit(2))
    with pytest.raises(ConstructionError):
        MethodSpec.custom(1, (1, 1), [[1.0]])


def test_sequence_detects_cycles():
    assert MethodSpec.sequence("cacd", 2, (1, 2, 1, 2), StepSchedule.unit(2)).cycles == 2
    assert MethodSpec.sequence("cacd", 2, (1, 1, 2, 2), StepSchedule.unit(2)).cycles is None


def test_ccd_iterates():
    traj = run_method(MethodSpec.cyclic("ccd", 2, 1, StepSchedule((0.5, 0.25))))
    x1 = traj.iterates["x1"]
    assert dict(x1.block(1)) == {BasisLabel(1, "x", 0): 1.0, BasisLabel(1, "g", 0): -0.5}
    assert dict(x1.block(2)) == {BasisLabel(2, "x", 0): 1.0}
    x2 = traj.iterates["x2"]
    assert dict(x2.block(2)) == {BasisLabel(2, "x", 0): 1.0, BasisLabel(2, "g", 1): -0.25}
    assert traj.cycle_ends == ("x0", "x2")
    assert [t.name for t in traj.triplets] == ["x0", "x1", "x2", "*"]
    assert [len(b) for b in traj.basis] == [4, 4]


def test_custom_matches_ccd():
    ccd = run_method(MethodSpec.cyclic("ccd", 2, 1, StepSchedule.unit(2)))
    custom = run_method(MethodSpec.custom(2, (1, 2), [[1.0], [1.0, 1.0]]))
    for name in ("x0", "x1", "x2"):
        assert ccd.iterates[name] == custom.iterates[name]


def test_theta_recursion():
    thetas = theta_schedule(2, 2)
    assert thetas[0] == 0.5
    assert thetas[1] == pytest.approx((math.sqrt(17) - 1) / 8, abs=1e-7)
    assert thetas[2] == pytest.approx(0.3215542, abs=1e-6)


def test_theta_satisfies_the_coupling_identity():
    thetas = theta_schedule(3, 8)
    for prev, nxt in zip(thetas, thetas[1:]):
        assert nxt ** 2 == pytest.approx((1.0 - nxt) * prev ** 2, rel=1e-12)
        assert 0.0 < nxt < prev


def test_cacd_points():
    traj = run_method(MethodSpec.cyclic("cacd", 2, 2, StepSchedule.unit(2)))
    assert [t.name for t in traj.triplets] == ["x0", "y1", "y2", "y3", "x4", "*"]
    # z_0 = x_0, so y_0 coincides with the start point
    assert traj.iterates["y0"] == traj.iterates["x0"]


def test_am_structural_equalities():
    traj = run_method(MethodSpec.cyclic("am", 2, 1))
    names = [name for name, _ in traj.structural]
    assert names == ["am-immobile[1;2]", "am-stationary[1;1]", "am-immobile[2;1]", "am-stationary[2;2]"]
    assert [len(b) for b in traj.basis] == [6, 6]


def test_tree_size_and_probabilities():
    tree = build_sequence_tree(2, 4)
    assert len(tree.nodes) == 31
    assert len(tree.leaves) == 16
    assert sum(leaf.probability for leaf in tree.leaves) == pytest.approx(1.0)
    assert [n.prefix for n in tree.path((1, 2, 1, 2))][-1] == (1, 2, 1, 2)


def test_tree_prunes_zero_probability_branches():
    tree = build_sequence_tree(2, 3, probabilities=[1.0, 0.0])
    assert len(tree.leaves) == 1
    assert tree.leaves[0].prefix == (1, 1, 1)


def test_tree_rejects_bad_distributions():
    with pytest.raises(ConstructionError):
        build_sequence_tree(2, 2, probabilities=[0.7, 0.7])
    with pytest.raises(ConstructionError):
        build_sequence_tree(2, 2, probabilities=[[0.5, 0.5]])
    with pytest.raises(ConstructionError):
        build_sequence_tree(2, 2, kind=MethodKind.AM)
