import numpy as np
import pytest
from hypothesis import given, strategies as st

from pepbcd.core.errors import StructuralError
from pepbcd.core.expr import (
    BasisLabel,
    BlockStructure,
    BlockVectorExpr,
    LipschitzVector,
    ScalarExpr,
    inner_product,
    weighted_norm_sq,
)

P = BlockStructure(2)
coefs = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def vec(a, b, c):
    """a*g0 + b*g1 + c*x0 on both blocks."""
    return (a * BlockVectorExpr.basis(P, "g", 0) + b * BlockVectorExpr.basis(P, "g", 1)
            + c * BlockVectorExpr.basis(P, "x", 0))


def columns(seed=0, dim=3):
    rng = np.random.default_rng(seed)
    return {
        BasisLabel(block, kind, index): rng.standard_normal(dim)
        for block in (1, 2) for kind, index in (("g", 0), ("g", 1), ("x", 0))
    }


def numeric_inner(u, v, vectors, block=None):
    us, vs = u.evaluate(vectors, (3, 3)), v.evaluate(vectors, (3, 3))
    blocks = range(2) if block is None else [block - 1]
    return sum(float(np.dot(us[k], vs[k])) for k in blocks)


def test_block_structure_rejects_bad_counts():
    with pytest.raises(StructuralError):
        BlockStructure(0)
    with pytest.raises(StructuralError):
        BlockStructure(True)


def test_lipschitz_vector():
    L = LipschitzVector((1, 4))
    assert L.values == (1.0, 4.0)
    assert (L.L_min, L.L_max) == (1.0, 4.0)
    assert L.inverse() == (1.0, 0.25)
    assert str(L) == "1,4"
    assert LipschitzVector.unit(3).values == (1.0, 1.0, 1.0)
    with pytest.raises(StructuralError):
        LipschitzVector((1.0, 0.0))
    with pytest.raises(StructuralError):
        LipschitzVector(())


def test_restrict_keeps_one_block():
    v = vec(1.0, 2.0, 3.0)
    r = v.restrict(2)
    assert not r.block(1)
    assert dict(r.block(2)) == dict(v.block(2))
    with pytest.raises(StructuralError):
        v.restrict(3)


def test_zero_coefficients_are_dropped():
    v = vec(1.0, 0.0, 0.0) - BlockVectorExpr.basis(P, "g", 0)
    assert v.is_zero()
    assert v == BlockVectorExpr.zero(P)


def test_mixed_structures_are_refused():
    other = BlockVectorExpr.basis(BlockStructure(3), "g", 0)
    with pytest.raises(StructuralError):
        _ = vec(1, 0, 0) + other
    with pytest.raises(StructuralError):
        inner_product(vec(1, 0, 0), other)


def test_labels_must_sit_on_their_block():
    with pytest.raises(StructuralError):
        BlockVectorExpr(P, [{BasisLabel(2, "g", 0): 1.0}, {}])


@given(a=coefs, b=coefs, c=coefs, d=coefs, e=coefs, f=coefs)
def test_inner_product_matches_numeric_values(a, b, c, d, e, f):
    u, v = vec(a, b, c), vec(d, e, f)
    vectors = columns()
    expr = inner_product(u, v)
    assert expr.evaluate(vectors, {}) == pytest.approx(numeric_inner(u, v, vectors), rel=1e-9, abs=1e-9)


@given(a=coefs, b=coefs, c=coefs, d=coefs, e=coefs, f=coefs)
def test_inner_product_is_symmetric(a, b, c, d, e, f):
    u, v = vec(a, b, c), vec(d, e, f)
    vectors = columns(1)
    assert inner_product(u, v).evaluate(vectors, {}) == pytest.approx(
        inner_product(v, u).evaluate(vectors, {}), rel=1e-9, abs=1e-9
    )


@given(a=coefs, b=coefs, c=coefs)
def test_inner_product_splits_over_blocks(a, b, c):
    u = vec(a, b, c)
    vectors = columns(2)
    full = inner_product(u, u).evaluate(vectors, {})
    parts = sum(inner_product(u, u, block).evaluate(vectors, {}) for block in (1, 2))
    assert full == pytest.approx(parts, rel=1e-9, abs=1e-9)


@given(a=coefs, b=coefs, c=coefs, s=coefs)
def test_inner_product_is_linear(a, b, c, s):
    u, w = vec(a, b, c), vec(1.0, -1.0, 0.5)
    vectors = columns(3)
    lhs = inner_product(s * u + w, w).evaluate(vectors, {})
    rhs = s * inner_product(u, w).evaluate(vectors, {}) + inner_product(w, w).evaluate(vectors, {})
    assert lhs == pytest.approx(rhs, rel=1e-8, abs=1e-8)


def test_gram_maps_are_symmetric():
    expr = inner_product(vec(1.0, 2.0, 0.0), vec(0.0, 0.0, 1.0), 1)
    for (a, b), coef in expr.gram(1).items():
        assert expr.gram(1)[(b, a)] == coef
    index = {BasisLabel(1, "g", 0): 0, BasisLabel(1, "g", 1): 1, BasisLabel(1, "x", 0): 2}
    M = expr.gram_matrix(1, index)
    assert np.allclose(M, M.T)
    assert M[0, 2] == pytest.approx(0.5)


def test_weighted_norm_uses_block_weights():
    u = vec(1.0, 0.0, 0.0)
    vectors = columns(4)
    expr = weighted_norm_sq(u, (1.0, 4.0))
    g0 = [vectors[BasisLabel(1, "g", 0)], vectors[BasisLabel(2, "g", 0)]]
    assert expr.evaluate(vectors, {}) == pytest.approx(g0[0] @ g0[0] + 4.0 * g0[1] @ g0[1])
    with pytest.raises(StructuralError):
        weighted_norm_sq(u, (1.0,))


def test_scalar_arithmetic_and_substitution():
    f = ScalarExpr.value(P, "f1", 2.0) - ScalarExpr.value(P, "f0") + 3.0
    assert f.symbols() == {"f0", "f1"}
    g = f.substitute({"f0": 1.0})
    assert g.symbols() == {"f1"}
    assert g.constant == pytest.approx(2.0)
    assert (1.0 - ScalarExpr.value(P, "f1")).constant == 1.0
    assert ScalarExpr.value(P, None).is_constant()
