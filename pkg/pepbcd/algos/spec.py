"""Method descriptions and the symbolic trajectories built from them."""

from dataclasses import dataclass, field
from enum import Enum
from numbers import Real
from types import MappingProxyType
from typing import Mapping, Optional, Sequence, Union

from pepbcd.core.errors import ConstructionError
from pepbcd.core.expr import (
    BasisLabel,
    BlockStructure,
    BlockVectorExpr,
    LipschitzVector,
    ScalarExpr,
    Triplet,
)


class MethodKind(str, Enum):
    CCD = "ccd"
    CACD = "cacd"
    AM = "am"
    CUSTOM = "custom"


@dataclass(frozen=True)
class StepSchedule:
    """Per-block step sizes gamma_l."""

    gamma: tuple[float, ...]

    def __post_init__(self):
        gamma = tuple(float(g) for g in self.gamma)
        if not gamma or any(not g > 0 for g in gamma):
            raise ConstructionError(f"Step sizes must be positive, got {gamma}")
        object.__setattr__(self, "gamma", gamma)

    @classmethod
    def relative(cls, gamma_rel: Union[float, Sequence[float]], L: LipschitzVector) -> "StepSchedule":
        """gamma_l = gamma_rel_l / L_l (a scalar factor is shared by all blocks)."""
        if isinstance(gamma_rel, Real):
            gamma_rel = (float(gamma_rel),) * L.p
        gamma_rel = tuple(gamma_rel)
        if len(gamma_rel) != L.p:
            raise ConstructionError(f"Expected {L.p} relative steps, got {len(gamma_rel)}")
        return cls(tuple(g / l for g, l in zip(gamma_rel, L.values)))

    @classmethod
    def unit(cls, p: int) -> "StepSchedule":
        return cls((1.0,) * p)

    @property
    def p(self) -> int:
        return len(self.gamma)

    def block(self, block: int) -> float:
        return self.gamma[block - 1]

    def relative_to(self, L: LipschitzVector) -> tuple[float, ...]:
        return tuple(g * l for g, l in zip(self.gamma, L.values))

    def is_inverse_of(self, L: LipschitzVector, rtol: float = 1e-12) -> bool:
        return len(self.gamma) == L.p and all(abs(r - 1.0) <= rtol for r in self.relative_to(L))

    def __str__(self) -> str:
        return ",".join(f"{g:g}" for g in self.gamma)


def cyclic_order(p: int, n_steps: int) -> tuple[int, ...]:
    """t(i) = (i mod p) + 1 for steps i = 0..N-1."""
    return tuple((i % p) + 1 for i in range(n_steps))


def _aligned_cycles(p: int, order: tuple[int, ...]) -> Optional[int]:
    n = len(order)
    return n // p if n % p == 0 and order == cyclic_order(p, n) else None


@dataclass(frozen=True)
class MethodSpec:
    """
    A fixed-step block method: which block each step touches and with which step.

    `order[i]` is the block updated by step i (moving from x_i to x_{i+1}).
    `alpha` is only used by CUSTOM methods: row i-1 holds alpha_{i,0..i-1}, so that
    x_i = x_0 - sum_k alpha_{i,k} U_{t(k)} grad^{(t(k))} f(x_k).
    """

    kind: MethodKind
    structure: BlockStructure
    n_steps: int
    order: tuple[int, ...]
    schedule: Optional[StepSchedule] = None
    cycles: Optional[int] = None
    alpha: Optional[tuple[tuple[float, ...], ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", MethodKind(self.kind))
        object.__setattr__(self, "order", tuple(int(b) for b in self.order))
        p = self.structure.p
        if self.n_steps < 1:
            raise ConstructionError(f"A method needs at least one step, got N={self.n_steps}")
        if len(self.order) != self.n_steps:
            raise ConstructionError(f"Block order has {len(self.order)} entries for N={self.n_steps}")
        if any(not 1 <= b <= p for b in self.order):
            raise ConstructionError(f"Block order {self.order} uses blocks outside 1..{p}")
        if self.kind in (MethodKind.CCD, MethodKind.CACD):
            if self.schedule is None or self.schedule.p != p:
                raise ConstructionError(f"{self.kind.value} needs a step schedule of length {p}")
        if self.kind is MethodKind.CUSTOM:
            self._check_alpha()
        if self.cycles is not None and self.n_steps != p * self.cycles:
            raise ConstructionError(f"N={self.n_steps} is not p*K={p}*{self.cycles}")

    def _check_alpha(self):
        if self.alpha is None or len(self.alpha) != self.n_steps:
            raise ConstructionError("Custom methods need one alpha row per step")
        rows = tuple(tuple(float(a) for a in row) for row in self.alpha)
        for i, row in enumerate(rows, start=1):
            if len(row) != i:
                raise ConstructionError(f"alpha row {i} must have {i} entries, got {len(row)}")
        object.__setattr__(self, "alpha", rows)

    @classmethod
    def cyclic(
        cls, kind: Union[str, MethodKind], p: int, cycles: int, schedule: Optional[StepSchedule] = None
    ) -> "MethodSpec":
        n = p * cycles
        return cls(MethodKind(kind), BlockStructure(p), n, cyclic_order(p, n), schedule, cycles)

    @classmethod
    def sequence(
        cls, kind: Union[str, MethodKind], p: int, order: Sequence[int], schedule: Optional[StepSchedule] = None
    ) -> "MethodSpec":
        """Arbitrary fixed block sequence; cycle-aligned when it happens to be cyclic."""
        order = tuple(order)
        cycles = _aligned_cycles(p, order)
        return cls(MethodKind(kind), BlockStructure(p), len(order), order, schedule, cycles)

    @classmethod
    def custom(cls, p: int, order: Sequence[int], alpha: Sequence[Sequence[float]]) -> "MethodSpec":
        order = tuple(order)
        cycles = _aligned_cycles(p, order)
        return cls(MethodKind.CUSTOM, BlockStructure(p), len(order), order, None, cycles,
                   tuple(tuple(r) for r in alpha))

    @property
    def p(self) -> int:
        return self.structure.p

    @property
    def cycle_aligned(self) -> bool:
        return self.cycles is not None

    def describe(self) -> str:
        order = "".join(str(b) for b in self.order)
        steps = f"K={self.cycles}" if self.cycle_aligned else f"N={self.n_steps}"
        return f"{self.kind.value}(p={self.p},{steps},order={order})"


@dataclass(frozen=True)
class Trajectory:
    """
    Symbolic run of a method.

    `triplets` are the interpolated points (optimal point last when present);
    `iterates` maps iterate names (x0..xN, y0..) to their expressions;
    `structural` lists named equalities expr == 0 emitted by the method;
    `basis` holds the Gram column layout of every block.
    """

    method: MethodSpec
    triplets: tuple[Triplet, ...]
    basis: tuple[tuple[BasisLabel, ...], ...]
    iterates: Mapping[str, BlockVectorExpr]
    start: str
    final: str
    structural: tuple[tuple[str, ScalarExpr], ...] = ()
    cycle_ends: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "iterates", MappingProxyType(dict(self.iterates)))

    @property
    def structure(self) -> BlockStructure:
        return self.method.structure

    def triplet(self, name: str) -> Triplet:
        for t in self.triplets:
            if t.name == name:
                return t
        raise KeyError(name)

    def without_optimal(self) -> tuple[Triplet, ...]:
        return tuple(t for t in self.triplets if not t.is_optimal)


def fixed_basis(structure: BlockStructure, n_gradients: int, n_points: int = 1) -> tuple:
    """[g_0..g_{n-1}, x_0..x_{m-1}] on every block."""
    return tuple(
        tuple(BasisLabel(block, "g", i) for i in range(n_gradients))
        + tuple(BasisLabel(block, "x", i) for i in range(n_points))
        for block in structure.labels
    )
