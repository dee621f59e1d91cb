"""
Interpolation conditions for block coordinate-wise smooth convex functions.

For triplets (x_i, g_i, f_i) and every ordered pair i != j and block l:

    f_i - f_j - <g_j, x_i - x_j> - 1/(2 L_l) ||g_i^(l) - g_j^(l)||^2 >= 0

These conditions are necessary for a finite set to be sampled from such a
function. They are sufficient for two points only; `check_finite_set` reports a
pairwise pass, never interpolability.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from pepbcd.core.errors import InterpolationError, StructuralError
from pepbcd.core.expr import LipschitzVector, ScalarExpr, Triplet, inner_product
from pepbcd.core.utils import logger

DEFAULT_TOL = 1e-8


@dataclass(frozen=True)
class InterpConstraint:
    i: str
    j: str
    block: int
    expr: ScalarExpr

    @property
    def name(self) -> str:
        return f"interp[{self.i},{self.j};{self.block}]"


def generate_interp_constraints(triplets: Sequence[Triplet], L: LipschitzVector) -> list[InterpConstraint]:
    """
    One constraint per ordered pair and block: p * n * (n - 1) in total.
    """
    names = [t.name for t in triplets]
    if len(set(names)) != len(names):
        dupes = sorted({n for n in names if names.count(n) > 1})
        raise StructuralError(f"Duplicate triplet indices: {dupes}")
    if triplets and triplets[0].point.structure.p != L.p:
        raise StructuralError(f"Triplets have {triplets[0].point.structure.p} blocks but L has {L.p}")

    constraints = []
    for ti in triplets:
        for tj in triplets:
            if ti is tj:
                continue
            # shared part: f_i - f_j - <g_j, x_i - x_j>
            base = ti.value_expr() - tj.value_expr() - inner_product(tj.gradient, ti.point - tj.point)
            diff = ti.gradient - tj.gradient
            for block in L.structure.labels:
                curvature = inner_product(diff, diff, block) * (1.0 / (2.0 * L.block(block)))
                constraints.append(InterpConstraint(ti.name, tj.name, block, base - curvature))
    return constraints


@dataclass(frozen=True)
class NumericTriplet:
    """Explicit (x, g, f) with x and g split into per-block arrays."""

    x: tuple
    g: tuple
    f: float
    name: str = ""

    def __post_init__(self):
        x = tuple(np.atleast_1d(np.asarray(b, dtype=float)) for b in self.x)
        g = tuple(np.atleast_1d(np.asarray(b, dtype=float)) for b in self.g)
        if len(x) != len(g):
            raise StructuralError(f"x has {len(x)} blocks but g has {len(g)}")
        for bx, bg in zip(x, g):
            if bx.ndim != 1 or bx.shape != bg.shape:
                raise StructuralError(f"Block shapes differ between x and g: {bx.shape} vs {bg.shape}")
        if not all(np.all(np.isfinite(b)) for b in x + g) or not np.isfinite(self.f):
            raise StructuralError("Numeric triplet entries must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "f", float(self.f))

    @property
    def p(self) -> int:
        return len(self.x)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(b.size for b in self.x)


@dataclass
class InterpReport:
    passed: bool
    tol: float
    n_checked: int
    worst_residual: float
    violations: list = field(default_factory=list)
    # pairwise conditions are necessary only; a pass never certifies interpolability
    scope: str = "necessary-only"

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "tol": self.tol,
            "n_checked": self.n_checked,
            "worst_residual": self.worst_residual,
            "violations": [
                {"i": i, "j": j, "block": b, "residual": r} for i, j, b, r in self.violations
            ],
            "scope": self.scope,
        }


def pair_residual(ti: NumericTriplet, tj: NumericTriplet, L: LipschitzVector, block: int) -> float:
    pos = block - 1
    linear = sum(float(np.dot(gj, xi - xj)) for gj, xi, xj in zip(tj.g, ti.x, tj.x))
    dg = ti.g[pos] - tj.g[pos]
    return ti.f - tj.f - linear - float(np.dot(dg, dg)) / (2.0 * L.values[pos])


def _check_layout(triplets: Sequence[NumericTriplet], L: LipschitzVector):
    if not triplets:
        return
    dims = triplets[0].dims
    for t in triplets:
        if t.dims != dims:
            raise StructuralError(f"Block dimensions differ across triplets: {dims} vs {t.dims}")
    if len(dims) != L.p:
        raise StructuralError(f"Triplets have {len(dims)} blocks but L has {L.p}")


def check_finite_set(
    triplets: Sequence[NumericTriplet], L: LipschitzVector, tol: float = DEFAULT_TOL
) -> InterpReport:
    """Evaluate every pairwise condition; pass iff all residuals are >= -tol."""
    _check_layout(triplets, L)
    worst = float("inf")
    violations = []
    n_checked = 0
    for a, ti in enumerate(triplets):
        for b, tj in enumerate(triplets):
            if a == b:
                continue
            for block in L.structure.labels:
                r = pair_residual(ti, tj, L, block)
                n_checked += 1
                worst = min(worst, r)
                if r < -tol:
                    violations.append((ti.name or a, tj.name or b, block, r))
    if n_checked == 0:
        worst = 0.0
    violations.sort(key=lambda v: v[3])
    return InterpReport(not violations, tol, n_checked, worst, violations)


def _flat(blocks) -> np.ndarray:
    return np.concatenate([np.asarray(b, dtype=float) for b in blocks])


class TwoPointInterpolant:
    """
    f(x) = max_{lam in [0,1]} <x, g_1 + lam (g_2 - g_1)> - phi(lam), the biconjugate of a
    conjugate supported on the segment [g_1, g_2] with phi quadratic in lam.

    With a = f_1 - f_2 - <g_2, x_1 - x_2> and s(x) = <x - x_1, g_2 - g_1>, the value is
    f_1 + <g_1, x - x_1> + lam* s(x) - a lam*^2 where lam* = clip(s(x) / (2a), 0, 1),
    and g_1 + lam* (g_2 - g_1) is a gradient at x.
    """

    def __init__(self, t1: NumericTriplet, t2: NumericTriplet, L: LipschitzVector):
        self.L = L
        self.dims = t1.dims
        self._splits = np.cumsum(self.dims)[:-1]
        self.t1, self.t2 = t1, t2
        x1, g1, x2, g2 = _flat(t1.x), _flat(t1.g), _flat(t2.x), _flat(t2.g)
        gap_12 = t1.f - t2.f - float(np.dot(g2, x1 - x2))
        gap_21 = t2.f - t1.f - float(np.dot(g1, x2 - x1))
        # endpoint subgradient conditions need the smaller gap as quadratic weight
        if gap_12 > gap_21:
            t1, t2 = t2, t1
            x1, g1, x2, g2 = x2, g2, x1, g1
            gap_12, gap_21 = gap_21, gap_12
        self._x1, self._g1, self._f1 = x1, g1, t1.f
        self._dg = g2 - g1
        self._a = max(gap_12, 0.0)

    def _lam(self, x: np.ndarray) -> float:
        slope = float(np.dot(x - self._x1, self._dg))
        if self._a > 0.0:
            return min(max(slope / (2.0 * self._a), 0.0), 1.0)
        return 1.0 if slope > 0.0 else 0.0

    def _split(self, flat: np.ndarray) -> tuple:
        return tuple(np.split(flat, self._splits))

    def __call__(self, x) -> tuple[float, tuple]:
        xf = _flat(x)
        if xf.size != sum(self.dims):
            raise StructuralError(f"Query has {xf.size} coordinates, expected {sum(self.dims)}")
        lam = self._lam(xf)
        value = self._f1 + float(np.dot(self._g1, xf - self._x1)) + lam * float(
            np.dot(xf - self._x1, self._dg)
        ) - self._a * lam * lam
        return value, self._split(self._g1 + lam * self._dg)

    def value(self, x) -> float:
        return self(x)[0]

    def gradient(self, x) -> tuple:
        return self(x)[1]

    def triplet(self, x, name: str = "") -> NumericTriplet:
        value, grad = self(x)
        return NumericTriplet(tuple(x), grad, value, name)


def interpolate_two_points(
    t1: NumericTriplet, t2: NumericTriplet, L: LipschitzVector, tol: float = 0.0
) -> TwoPointInterpolant:
    """Explicit member of the function class through two compatible triplets."""
    report = check_finite_set([t1, t2], L, tol=tol)
    if not report.passed:
        logger.warning(f"Two-point construction refused, worst residual {report.worst_residual:.3e}")
        raise InterpolationError(
            f"Pair violates the interpolation conditions (worst residual {report.worst_residual:.3e})"
        )
    return TwoPointInterpolant(t1, t2, L)


def counterexample_set() -> tuple[LipschitzVector, list[NumericTriplet]]:
    """Three triplets passing every pairwise condition that no member of the class interpolates."""
    L = LipschitzVector((1.0, 1.0))
    points = [
        NumericTriplet(([-1.0], [0.0]), ([-1.0], [0.0]), 0.5, "a"),
        NumericTriplet(([0.0], [0.0]), ([0.0], [-1.0]), 0.0, "b"),
        NumericTriplet(([1.0], [0.0]), ([1.0], [0.0]), 0.5, "c"),
    ]
    return L, points


def load_triplet_set(path: Union[str, Path]) -> tuple[LipschitzVector, list[NumericTriplet]]:
    """
    Reads {"L": [...], "points": [{"x": [[..],[..]], "g": [[..],[..]], "f": v}, ...]}.
    """
    with open(path) as f:
        doc = json.load(f)
    try:
        L = LipschitzVector(tuple(doc["L"]))
        points = [
            NumericTriplet(tuple(pt["x"]), tuple(pt["g"]), pt["f"], str(pt.get("name", k)))
            for k, pt in enumerate(doc["points"])
        ]
    except (KeyError, TypeError) as e:
        raise StructuralError(f"Malformed triplet document {path}: {e}") from e
    _check_layout(points, L)
    return L, points
