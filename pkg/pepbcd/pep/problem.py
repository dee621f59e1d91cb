"""Solver-facing description of a performance estimation problem."""

from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Mapping, Optional

import numpy as np
from scipy import sparse

from pepbcd.core.errors import ConstructionError, StructuralError
from pepbcd.core.expr import BasisLabel, BlockStructure, ScalarExpr


class SettingKind(str, Enum):
    ALL = "all"
    INIT = "init"
    GRAD_NORMALIZED = "gradnorm"
    FUNCTION_DECREASE = "decrease"


@dataclass(frozen=True)
class Setting:
    """
    Initial-condition regime.

    ALL: ||x_{pk} - x_*||^2 <= R^2 at every cycle end k = 1..K (k = 0 too with
    include_start). INIT: ||x_0 - x_*||_L^2 <= R^2. GRAD_NORMALIZED: the squared
    gradient norms of `points` (start point by default), optionally on one block,
    sum to `radius`. FUNCTION_DECREASE: f(x_0) - f(x_N) <= radius.
    """

    kind: SettingKind
    radius: float = 1.0
    include_start: bool = False
    block: Optional[int] = None
    points: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", SettingKind(self.kind))
        if not self.radius > 0:
            raise ConstructionError(f"Setting radius must be positive, got {self.radius}")
        if self.points is not None:
            object.__setattr__(self, "points", tuple(self.points))

    @classmethod
    def all_cycles(cls, radius: float = 1.0, include_start: bool = False) -> "Setting":
        return cls(SettingKind.ALL, radius, include_start)

    @classmethod
    def init(cls, radius: float = 1.0) -> "Setting":
        return cls(SettingKind.INIT, radius)

    @classmethod
    def grad_normalized(cls, level: float = 1.0, block: Optional[int] = None, points=None) -> "Setting":
        return cls(SettingKind.GRAD_NORMALIZED, level, block=block, points=points)

    @classmethod
    def function_decrease(cls, budget: float = 1.0) -> "Setting":
        return cls(SettingKind.FUNCTION_DECREASE, budget)

    @property
    def translation_free(self) -> bool:
        """Descent-type settings carry no optimal point."""
        return self.kind in (SettingKind.GRAD_NORMALIZED, SettingKind.FUNCTION_DECREASE)

    def scaled(self, factor: float) -> "Setting":
        return Setting(self.kind, self.radius * factor, self.include_start, self.block, self.points)

    def __str__(self) -> str:
        return self.kind.value


class CriterionKind(str, Enum):
    FINAL_VALUE_GAP = "gap"
    CYCLE_DECREASE = "decrease"
    MIN_GRAD_DUAL_NORM = "min-grad"


@dataclass(frozen=True)
class Criterion:
    kind: CriterionKind = CriterionKind.FINAL_VALUE_GAP
    # iterate indices covered by the min-grad epigraph; interior 1..N-1 when None
    indices: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", CriterionKind(self.kind))

    @classmethod
    def final_gap(cls) -> "Criterion":
        return cls(CriterionKind.FINAL_VALUE_GAP)

    @classmethod
    def cycle_decrease(cls) -> "Criterion":
        return cls(CriterionKind.CYCLE_DECREASE)

    @classmethod
    def min_grad(cls, indices=None) -> "Criterion":
        return cls(CriterionKind.MIN_GRAD_DUAL_NORM, None if indices is None else tuple(indices))

    @property
    def maximize(self) -> bool:
        return self.kind is not CriterionKind.CYCLE_DECREASE

    def __str__(self) -> str:
        return self.kind.value


class Sense(str, Enum):
    GEQ = ">=0"
    EQ = "==0"


@dataclass(frozen=True)
class Constraint:
    name: str
    expr: ScalarExpr
    sense: Sense
    group: str


@dataclass(frozen=True)
class LinearData:
    """
    Rows expr_k = A_l[k] . vec(G_l) + B[k] . F + c[k], with vec index a*n + b for
    the Gram entry (a, b).
    """

    gram: tuple
    fvals: sparse.csr_matrix
    constant: np.ndarray

    @property
    def n_rows(self) -> int:
        return self.constant.size


@dataclass(frozen=True)
class SdpProblem:
    """
    p PSD Gram blocks (columns `blocks[l]`), a free vector of value symbols,
    linear constraints and a linear objective.

    `pinned` lists value symbols fixed to constants during assembly.
    """

    blocks: tuple[tuple[BasisLabel, ...], ...]
    symbols: tuple[str, ...]
    constraints: tuple[Constraint, ...]
    objective: ScalarExpr
    maximize: bool = True
    metadata: Mapping = field(default_factory=dict)
    pinned: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "metadata", MappingProxyType(dict(self.metadata)))
        object.__setattr__(self, "pinned", MappingProxyType(dict(self.pinned)))
        self.validate()

    @property
    def structure(self) -> BlockStructure:
        return BlockStructure(len(self.blocks))

    @property
    def gram_dims(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)

    def index(self, block: int) -> dict[BasisLabel, int]:
        return {label: k for k, label in enumerate(self.blocks[block - 1])}

    def validate(self):
        declared = [set(b) for b in self.blocks]
        symbols = set(self.symbols)
        for expr, where in [(c.expr, c.name) for c in self.constraints] + [(self.objective, "objective")]:
            if expr.structure.p != len(self.blocks):
                raise StructuralError(f"{where} has {expr.structure.p} blocks, problem has {len(self.blocks)}")
            for block in expr.structure.labels:
                unknown = expr.labels(block) - declared[block - 1]
                if unknown:
                    raise StructuralError(f"{where} references undeclared columns {sorted(map(str, unknown))}")
            if expr.symbols() - symbols:
                raise StructuralError(f"{where} references undeclared symbols {sorted(expr.symbols() - symbols)}")

    def count(self, group: Optional[str] = None, sense: Optional[Sense] = None) -> int:
        return sum(
            1 for c in self.constraints
            if (group is None or c.group == group) and (sense is None or c.sense is sense)
        )

    def lower(self, exprs) -> LinearData:
        """Sparse row data of a list of scalar expressions in this problem's layout."""
        exprs = list(exprs)
        m = len(exprs)
        grams = []
        for block in self.structure.labels:
            idx = self.index(block)
            n = len(idx)
            rows, cols, vals = [], [], []
            for k, expr in enumerate(exprs):
                for (a, b), coef in expr.gram(block).items():
                    rows.append(k)
                    cols.append(idx[a] * n + idx[b])
                    vals.append(coef)
            grams.append(sparse.csr_matrix((vals, (rows, cols)), shape=(m, n * n)))
        sym_index = {s: k for k, s in enumerate(self.symbols)}
        rows, cols, vals = [], [], []
        for k, expr in enumerate(exprs):
            for symbol, coef in expr.fvals.items():
                rows.append(k)
                cols.append(sym_index[symbol])
                vals.append(coef)
        fvals = sparse.csr_matrix((vals, (rows, cols)), shape=(m, len(self.symbols)))
        constant = np.array([e.constant for e in exprs], dtype=float)
        return LinearData(tuple(grams), fvals, constant)

    def describe(self) -> dict:
        return {
            "gram_dims": list(self.gram_dims),
            "symbols": len(self.symbols),
            "constraints": len(self.constraints),
            "inequalities": self.count(sense=Sense.GEQ),
            "equalities": self.count(sense=Sense.EQ),
            "sense": "max" if self.maximize else "min",
            **{k: v for k, v in self.metadata.items() if isinstance(v, (str, int, float))},
        }
