import json

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra import numpy as hnp

from pepbcd.algos import MethodSpec, StepSchedule, run_method
from pepbcd.core.errors import InterpolationError, StructuralError
from pepbcd.core.expr import LipschitzVector
from pepbcd.core.interp import (
    NumericTriplet,
    TwoPointInterpolant,
    check_finite_set,
    counterexample_set,
    generate_interp_constraints,
    interpolate_two_points,
    load_triplet_set,
)

UNIT = LipschitzVector.unit(2)
points = hnp.arrays(np.float64, 2, elements=st.floats(-5, 5, allow_nan=False))


def half_norm(x) -> NumericTriplet:
    """Sample of f(x) = 1/2 ||x||^2 with one coordinate per block."""
    x = np.asarray(x, dtype=float)
    return NumericTriplet(([x[0]], [x[1]]), ([x[0]], [x[1]]), 0.5 * float(x @ x))


@pytest.mark.parametrize("p,K", [(1, 1), (2, 1), (2, 2), (3, 1)])
def test_constraint_count(p, K):
    L = LipschitzVector.unit(p)
    traj = run_method(MethodSpec.cyclic("ccd", p, K, StepSchedule.relative(1.0, L)))
    n = len(traj.triplets)
    assert len(generate_interp_constraints(traj.triplets, L)) == p * n * (n - 1)


def test_duplicate_triplet_names_are_refused():
    traj = run_method(MethodSpec.cyclic("ccd", 2, 1, StepSchedule.unit(2)))
    with pytest.raises(StructuralError):
        generate_interp_constraints(traj.triplets + traj.triplets[:1], UNIT)


def test_quadratic_samples_pass():
    report = check_finite_set([half_norm([0.0, 0.0]), half_norm([1.0, 0.0])], UNIT)
    assert report.passed
    assert report.n_checked == 4


@given(xs=st.lists(points, min_size=2, max_size=5))
def test_any_quadratic_sample_set_passes(xs):
    assert check_finite_set([half_norm(x) for x in xs], UNIT, tol=1e-9).passed


def test_shifted_value_fails():
    bad = NumericTriplet(([1.0], [0.0]), ([1.0], [0.0]), 0.3)
    report = check_finite_set([half_norm([0.0, 0.0]), bad], UNIT)
    assert not report.passed
    assert report.worst_residual < 0
    assert report.violations


def test_layout_mismatch():
    one_block = NumericTriplet(([0.0],), ([0.0],), 0.0)
    with pytest.raises(StructuralError):
        check_finite_set([one_block, one_block], UNIT)
    with pytest.raises(StructuralError):
        NumericTriplet(([0.0], [0.0]), ([0.0],), 0.0)


def test_counterexample_passes_pairwise():
    L, pts = counterexample_set()
    report = check_finite_set(pts, L)
    assert report.passed
    assert report.scope == "necessary-only"
    assert report.to_dict()["scope"] == "necessary-only"


def test_counterexample_fixture_matches_builtin(counterexample_path):
    L, pts = load_triplet_set(counterexample_path)
    ref_L, ref = counterexample_set()
    assert L == ref_L
    assert [t.f for t in pts] == [t.f for t in ref]
    assert check_finite_set(pts, L).passed


def test_malformed_triplet_document(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"L": [1.0, 1.0], "points": [{"x": [[0.0], [0.0]]}]}))
    with pytest.raises(StructuralError):
        load_triplet_set(path)


def test_two_point_interpolant_reproduces_samples():
    t1, t2 = half_norm([0.0, 0.0]), half_norm([1.0, 0.0])
    oracle = interpolate_two_points(t1, t2, UNIT)
    assert oracle.value(t1.x) == pytest.approx(0.0, abs=1e-12)
    assert oracle.value(t2.x) == pytest.approx(0.5, abs=1e-12)
    assert np.concatenate(oracle.gradient(t2.x)) == pytest.approx([1.0, 0.0])


def test_two_point_interpolant_refuses_bad_pair():
    bad = NumericTriplet(([1.0], [0.0]), ([1.0], [0.0]), 0.3)
    with pytest.raises(InterpolationError):
        interpolate_two_points(half_norm([0.0, 0.0]), bad, UNIT)


def test_two_point_interpolant_samples_are_consistent():
    t1 = half_norm([0.0, 0.0])
    t2 = half_norm([1.0, 2.0])
    oracle = TwoPointInterpolant(t1, t2, UNIT)
    rng = np.random.default_rng(7)
    samples = [oracle.triplet(([a], [b]), f"q{k}") for k, (a, b) in enumerate(rng.uniform(-3, 3, (100, 2)))]
    assert check_finite_set(samples + [t1, t2], UNIT, tol=1e-8).passed


coupling = st.floats(-1.0, 1.0, allow_nan=False)


def coupled(c, x) -> NumericTriplet:
    """Sample of f(x) = 1/2 x^T [[1, c], [c, 1]] x, convex with unit block constants."""
    A = np.array([[1.0, c], [c, 1.0]])
    x = np.asarray(x, dtype=float)
    g = A @ x
    return NumericTriplet(([x[0]], [x[1]]), ([g[0]], [g[1]]), 0.5 * float(x @ g))


def blocks(x):
    return ([x[0]], [x[1]])


@given(c=coupling, x1=points, x2=points, u=points, v=points)
def test_two_point_interpolant_is_convex(c, x1, x2, u, v):
    oracle = interpolate_two_points(coupled(c, x1), coupled(c, x2), UNIT, tol=1e-9)
    fu, gu = oracle(blocks(u))
    fv, _ = oracle(blocks(v))
    gap = fv - fu - float(np.concatenate(gu) @ (v - u))
    assert gap >= -1e-8 * (1.0 + abs(fu) + abs(fv))


@given(
    c=coupling, x1=points, x2=points, x=points,
    h=st.floats(-3.0, 3.0, allow_nan=False), block=st.sampled_from([1, 2]),
)
def test_two_point_interpolant_is_smooth_along_each_block(c, x1, x2, x, h, block):
    oracle = interpolate_two_points(coupled(c, x1), coupled(c, x2), UNIT, tol=1e-9)
    moved = x.copy()
    moved[block - 1] += h
    before = oracle.gradient(blocks(x))[block - 1]
    after = oracle.gradient(blocks(moved))[block - 1]
    assert np.linalg.norm(after - before) <= UNIT.values[block - 1] * abs(h) + 1e-8


def test_pair_with_equal_gradients_gives_the_affine_function():
    g = ([1.0], [-2.0])
    t1 = NumericTriplet(([0.0], [0.0]), g, 3.0)
    t2 = NumericTriplet(([2.0], [1.0]), g, 3.0)
    oracle = interpolate_two_points(t1, t2, UNIT)
    for q in [(-1.0, 4.0), (0.5, 0.5), (10.0, -3.0)]:
        value, grad = oracle(blocks(q))
        assert value == pytest.approx(3.0 + q[0] - 2.0 * q[1])
        assert np.concatenate(grad) == pytest.approx([1.0, -2.0])
