"""
Symbolic linear algebra over per-block Gram bases.

Every point, gradient and scalar quantity of a performance estimation problem is
written here before it is lowered to a semidefinite program. A vector never has
explicit coordinates: on each coordinate block it is a linear combination of
basis columns (gradients g_0..g_N, the starting point x_0 and, for exact
minimization methods, the iterates x_1..x_N). A scalar is an affine function of
the per-block Gram entries <u, v> and of function-value symbols.
"""

import math
from dataclasses import dataclass
from numbers import Real
from types import MappingProxyType
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from pepbcd.core.errors import StructuralError

GRADIENT = "g"
POINT = "x"


@dataclass(frozen=True)
class BlockStructure:
    """Number of coordinate blocks. Block dimensions are never stored."""

    p: int

    def __post_init__(self):
        if isinstance(self.p, bool) or not isinstance(self.p, int) or self.p < 1:
            raise StructuralError(f"Block count must be a positive integer, got {self.p!r}")

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(range(1, self.p + 1))

    def position(self, block: int) -> int:
        """Zero-based storage position of a 1-based block id."""
        if not isinstance(block, (int, np.integer)) or not 1 <= block <= self.p:
            raise StructuralError(f"Block id {block!r} outside 1..{self.p}")
        return int(block) - 1


@dataclass(frozen=True)
class LipschitzVector:
    """Per-block smoothness constants L = (L_1, ..., L_p)."""

    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise StructuralError("Lipschitz vector must have at least one entry")
        for v in vals:
            if not math.isfinite(v) or v <= 0:
                raise StructuralError(f"Lipschitz constants must be positive and finite, got {vals}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def unit(cls, p: int) -> "LipschitzVector":
        return cls((1.0,) * p)

    @property
    def p(self) -> int:
        return len(self.values)

    @property
    def structure(self) -> BlockStructure:
        return BlockStructure(self.p)

    @property
    def L_max(self) -> float:
        return max(self.values)

    @property
    def L_min(self) -> float:
        return min(self.values)

    def block(self, block: int) -> float:
        return self.values[self.structure.position(block)]

    def inverse(self) -> tuple[float, ...]:
        return tuple(1.0 / v for v in self.values)

    def scaled(self, factor: float) -> "LipschitzVector":
        return LipschitzVector(tuple(factor * v for v in self.values))

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __str__(self) -> str:
        return ",".join(f"{v:g}" for v in self.values)


@dataclass(frozen=True, order=True)
class BasisLabel:
    """
    One Gram column of one block.

    Ordering is (block, kind, index) with kind "g" sorting before "x", which gives
    the layout g_0..g_N, x_0, x_1..x_N inside every block.
    """

    block: int
    kind: str
    index: int

    def __post_init__(self):
        if self.kind not in (GRADIENT, POINT):
            raise StructuralError(f"Unknown basis kind {self.kind!r}")

    def __str__(self) -> str:
        return f"{self.kind}{self.index}^({self.block})"


def _clean(mapping: Mapping) -> dict:
    return {k: float(v) for k, v in mapping.items() if v != 0.0}


class BlockVectorExpr:
    """
    Symbolic block vector: for each block, a sparse map BasisLabel -> coefficient.

    Instances are immutable; arithmetic returns new objects. Coefficients equal to
    0.0 are dropped, nothing else is pruned.
    """

    __slots__ = ("_structure", "_coeffs")

    def __init__(self, structure: BlockStructure, coeffs: Optional[Sequence[Mapping[BasisLabel, float]]] = None):
        if coeffs is None:
            coeffs = [{} for _ in range(structure.p)]
        if len(coeffs) != structure.p:
            raise StructuralError(f"Expected {structure.p} block maps, got {len(coeffs)}")
        blocks = []
        for pos, mapping in enumerate(coeffs):
            for label in mapping:
                if not isinstance(label, BasisLabel) or label.block != pos + 1:
                    raise StructuralError(f"Label {label} stored on block {pos + 1}")
            blocks.append(MappingProxyType(_clean(mapping)))
        self._structure = structure
        self._coeffs = tuple(blocks)

    @classmethod
    def _raw(cls, structure: BlockStructure, blocks: Sequence[dict]) -> "BlockVectorExpr":
        obj = cls.__new__(cls)
        obj._structure = structure
        obj._coeffs = tuple(MappingProxyType(_clean(b)) for b in blocks)
        return obj

    @classmethod
    def zero(cls, structure: BlockStructure) -> "BlockVectorExpr":
        return cls._raw(structure, [{} for _ in range(structure.p)])

    @classmethod
    def basis(cls, structure: BlockStructure, kind: str, index: int) -> "BlockVectorExpr":
        """The full vector whose block l component is the basis column (l, kind, index)."""
        return cls._raw(
            structure, [{BasisLabel(pos + 1, kind, index): 1.0} for pos in range(structure.p)]
        )

    @property
    def structure(self) -> BlockStructure:
        return self._structure

    def block(self, block: int) -> Mapping[BasisLabel, float]:
        return self._coeffs[self._structure.position(block)]

    def restrict(self, block: int) -> "BlockVectorExpr":
        """U_l U_l^T v: keep block l, zero elsewhere."""
        pos = self._structure.position(block)
        return BlockVectorExpr._raw(
            self._structure, [dict(m) if i == pos else {} for i, m in enumerate(self._coeffs)]
        )

    def labels(self) -> set[BasisLabel]:
        return {label for m in self._coeffs for label in m}

    def is_zero(self) -> bool:
        return all(not m for m in self._coeffs)

    def evaluate(self, vectors: Mapping[BasisLabel, np.ndarray], dims: Sequence[int]) -> list[np.ndarray]:
        """Numeric block vectors given explicit columns for every basis label."""
        out = []
        for pos, mapping in enumerate(self._coeffs):
            acc = np.zeros(dims[pos])
            for label, coef in mapping.items():
                acc = acc + coef * np.asarray(vectors[label], dtype=float)
            out.append(acc)
        return out

    def _combine(self, other: "BlockVectorExpr", sign: float) -> "BlockVectorExpr":
        if not isinstance(other, BlockVectorExpr):
            return NotImplemented
        _check_structures(self._structure, other._structure)
        blocks = []
        for mine, theirs in zip(self._coeffs, other._coeffs):
            acc = dict(mine)
            for label, coef in theirs.items():
                acc[label] = acc.get(label, 0.0) + sign * coef
            blocks.append(acc)
        return BlockVectorExpr._raw(self._structure, blocks)

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __neg__(self):
        return self * -1.0

    def __mul__(self, scalar):
        if not isinstance(scalar, Real):
            return NotImplemented
        return BlockVectorExpr._raw(
            self._structure, [{k: float(scalar) * v for k, v in m.items()} for m in self._coeffs]
        )

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, BlockVectorExpr):
            return NotImplemented
        return self._structure == other._structure and all(
            dict(a) == dict(b) for a, b in zip(self._coeffs, other._coeffs)
        )

    __hash__ = None

    def __repr__(self) -> str:
        parts = []
        for pos, mapping in enumerate(self._coeffs):
            terms = " + ".join(f"{c:g}*{l.kind}{l.index}" for l, c in sorted(mapping.items()))
            parts.append(f"[{pos + 1}] {terms or '0'}")
        return "BlockVectorExpr(" + "; ".join(parts) + ")"


class ScalarExpr:
    """
    Affine functional of the Gram blocks and of the value symbols:

        sum_l sum_{a,b} M^(l)_{ab} <a, b> + sum_s c_s f_s + constant

    Each M^(l) is kept symmetric, M_{ab} = M_{ba}, so that sum_{a,b} M_{ab} G_{ab}
    equals the trace inner product <M, G>.
    """

    __slots__ = ("_structure", "_gram", "_fvals", "_constant")

    def __init__(
        self,
        structure: BlockStructure,
        gram: Optional[Sequence[Mapping[tuple[BasisLabel, BasisLabel], float]]] = None,
        fvals: Optional[Mapping[str, float]] = None,
        constant: float = 0.0,
    ):
        if gram is None:
            gram = [{} for _ in range(structure.p)]
        if len(gram) != structure.p:
            raise StructuralError(f"Expected {structure.p} gram maps, got {len(gram)}")
        blocks = []
        for pos, mapping in enumerate(gram):
            sym: dict = {}
            for (a, b), coef in mapping.items():
                if a.block != pos + 1 or b.block != pos + 1:
                    raise StructuralError(f"Pair ({a}, {b}) stored on block {pos + 1}")
                half = float(coef) / 2.0
                sym[(a, b)] = sym.get((a, b), 0.0) + half
                sym[(b, a)] = sym.get((b, a), 0.0) + half
            blocks.append(sym)
        self._init(structure, blocks, dict(fvals or {}), float(constant))

    def _init(self, structure, blocks, fvals, constant):
        self._structure = structure
        self._gram = tuple(MappingProxyType(_clean(b)) for b in blocks)
        self._fvals = MappingProxyType(_clean(fvals))
        self._constant = float(constant)

    @classmethod
    def _raw(cls, structure, blocks, fvals, constant) -> "ScalarExpr":
        obj = cls.__new__(cls)
        obj._init(structure, blocks, fvals, constant)
        return obj

    @classmethod
    def constant_expr(cls, structure: BlockStructure, value: float) -> "ScalarExpr":
        return cls._raw(structure, [{} for _ in range(structure.p)], {}, value)

    @classmethod
    def value(cls, structure: BlockStructure, symbol: Optional[str], coef: float = 1.0) -> "ScalarExpr":
        """coef * f_symbol; the symbol None stands for the pinned value 0."""
        fvals = {} if symbol is None else {symbol: coef}
        return cls._raw(structure, [{} for _ in range(structure.p)], fvals, 0.0)

    @property
    def structure(self) -> BlockStructure:
        return self._structure

    def gram(self, block: int) -> Mapping[tuple[BasisLabel, BasisLabel], float]:
        return self._gram[self._structure.position(block)]

    @property
    def fvals(self) -> Mapping[str, float]:
        return self._fvals

    @property
    def constant(self) -> float:
        return self._constant

    def symbols(self) -> set[str]:
        return set(self._fvals)

    def labels(self, block: int) -> set[BasisLabel]:
        return {label for pair in self.gram(block) for label in pair}

    def is_constant(self) -> bool:
        return not self._fvals and all(not m for m in self._gram)

    def gram_matrix(self, block: int, index: Mapping[BasisLabel, int]) -> np.ndarray:
        """Dense symmetric coefficient matrix of one block in the given column layout."""
        mat = np.zeros((len(index), len(index)))
        for (a, b), coef in self.gram(block).items():
            mat[index[a], index[b]] = coef
        return mat

    def evaluate(self, vectors: Mapping[BasisLabel, np.ndarray], fvals: Mapping[str, float]) -> float:
        total = self._constant
        for mapping in self._gram:
            for (a, b), coef in mapping.items():
                total += coef * float(np.dot(vectors[a], vectors[b]))
        for symbol, coef in self._fvals.items():
            total += coef * float(fvals[symbol])
        return total

    def substitute(self, values: Mapping[str, float]) -> "ScalarExpr":
        """Replace value symbols by constants."""
        constant = self._constant
        fvals = {}
        for symbol, coef in self._fvals.items():
            if symbol in values:
                constant += coef * float(values[symbol])
            else:
                fvals[symbol] = coef
        return ScalarExpr._raw(self._structure, [dict(m) for m in self._gram], fvals, constant)

    def _combine(self, other, sign: float) -> "ScalarExpr":
        if isinstance(other, Real):
            return ScalarExpr._raw(
                self._structure, [dict(m) for m in self._gram], dict(self._fvals),
                self._constant + sign * float(other),
            )
        if not isinstance(other, ScalarExpr):
            return NotImplemented
        _check_structures(self._structure, other._structure)
        blocks = []
        for mine, theirs in zip(self._gram, other._gram):
            acc = dict(mine)
            for pair, coef in theirs.items():
                acc[pair] = acc.get(pair, 0.0) + sign * coef
            blocks.append(acc)
        fvals = dict(self._fvals)
        for symbol, coef in other._fvals.items():
            fvals[symbol] = fvals.get(symbol, 0.0) + sign * coef
        return ScalarExpr._raw(self._structure, blocks, fvals, self._constant + sign * other._constant)

    def __add__(self, other):
        return self._combine(other, 1.0)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __rsub__(self, other):
        return (-self)._combine(other, 1.0)

    def __neg__(self):
        return self * -1.0

    def __mul__(self, scalar):
        if not isinstance(scalar, Real):
            return NotImplemented
        c = float(scalar)
        return ScalarExpr._raw(
            self._structure,
            [{k: c * v for k, v in m.items()} for m in self._gram],
            {k: c * v for k, v in self._fvals.items()},
            c * self._constant,
        )

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, ScalarExpr):
            return NotImplemented
        return (
            self._structure == other._structure
            and all(dict(a) == dict(b) for a, b in zip(self._gram, other._gram))
            and dict(self._fvals) == dict(other._fvals)
            and self._constant == other._constant
        )

    __hash__ = None

    def __repr__(self) -> str:
        n_gram = sum(len(m) for m in self._gram)
        return f"ScalarExpr(gram_terms={n_gram}, fvals={dict(self._fvals)}, constant={self._constant:g})"


@dataclass(frozen=True, eq=False)
class Triplet:
    """
    A labelled (point, gradient, value) triple of a symbolic trajectory.

    `value` is the value symbol; None pins the value to 0 (the optimal point after
    translation, or the start point of translation-free descent problems).
    """

    name: str
    point: BlockVectorExpr
    gradient: BlockVectorExpr
    value: Optional[str]
    index: object = None

    @property
    def is_optimal(self) -> bool:
        return self.name == OPTIMAL_NAME

    def value_expr(self) -> ScalarExpr:
        return ScalarExpr.value(self.point.structure, self.value)

    @classmethod
    def optimal(cls, structure: BlockStructure) -> "Triplet":
        zero = BlockVectorExpr.zero(structure)
        return cls(OPTIMAL_NAME, zero, zero, None, index="*")


OPTIMAL_NAME = "*"


def _check_structures(a: BlockStructure, b: BlockStructure):
    if a != b:
        raise StructuralError(f"Block structures differ: p={a.p} vs p={b.p}")


def inner_product(a: BlockVectorExpr, b: BlockVectorExpr, block: Optional[int] = None) -> ScalarExpr:
    """
    Exact bilinear expansion of <a, b>, or of <a^(l), b^(l)> when a block is given.
    """
    if not isinstance(a, BlockVectorExpr) or not isinstance(b, BlockVectorExpr):
        raise StructuralError("inner_product expects two BlockVectorExpr operands")
    _check_structures(a.structure, b.structure)
    structure = a.structure
    positions = range(structure.p) if block is None else [structure.position(block)]
    blocks: list[dict] = [{} for _ in range(structure.p)]
    for pos in positions:
        out = blocks[pos]
        for la, ca in a._coeffs[pos].items():
            for lb, cb in b._coeffs[pos].items():
                half = ca * cb / 2.0
                out[(la, lb)] = out.get((la, lb), 0.0) + half
                out[(lb, la)] = out.get((lb, la), 0.0) + half
    return ScalarExpr._raw(structure, blocks, {}, 0.0)


def weighted_norm_sq(a: BlockVectorExpr, weights: Iterable[float]) -> ScalarExpr:
    """sum_l w_l ||a^(l)||^2; weights L give ||.||_L^2, weights 1/L the dual norm."""
    weights = tuple(float(w) for w in weights)
    if len(weights) != a.structure.p:
        raise StructuralError(f"Expected {a.structure.p} weights, got {len(weights)}")
    total = ScalarExpr.constant_expr(a.structure, 0.0)
    for block, w in zip(a.structure.labels, weights):
        total = total + w * inner_product(a, a, block)
    return total
