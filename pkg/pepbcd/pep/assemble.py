"""
Lowering of symbolic trajectories into performance estimation SDPs.

The optimal point is translated to x_* = 0 with g_* = 0 and f_* = 0. Descent-type
settings have no optimal point; there the start value is pinned to 0 since only
value differences appear.
"""

from typing import Optional, Sequence

from pepbcd.algos.spec import Trajectory
from pepbcd.algos.tree import SequenceTree
from pepbcd.core.errors import ConstructionError, StructuralError
from pepbcd.core.expr import (
    BasisLabel,
    LipschitzVector,
    ScalarExpr,
    Triplet,
    inner_product,
    weighted_norm_sq,
)
from pepbcd.core.interp import generate_interp_constraints
from pepbcd.core.utils import logger
from pepbcd.pep.problem import Constraint, Criterion, CriterionKind, SdpProblem, Sense, Setting, SettingKind

EPIGRAPH = "t"


def _layout(basis, exprs) -> tuple[tuple[BasisLabel, ...], ...]:
    """Keep the basis order, dropping columns no expression references."""
    blocks = []
    for pos, labels in enumerate(basis):
        block = pos + 1
        used = set()
        for expr in exprs:
            used |= expr.labels(block)
        unknown = used - set(labels)
        if unknown:
            raise StructuralError(f"Expressions use columns outside the basis: {sorted(map(str, unknown))}")
        blocks.append(tuple(label for label in labels if label in used))
    return tuple(blocks)


def _build(
    triplets: Sequence[Triplet],
    basis,
    L: LipschitzVector,
    extra: list[Constraint],
    objective: ScalarExpr,
    maximize: bool,
    pinned: dict,
    metadata: dict,
    extra_symbols: Sequence[str] = (),
) -> SdpProblem:
    constraints = [
        Constraint(c.name, c.expr.substitute(pinned), Sense.GEQ, "interp")
        for c in generate_interp_constraints(triplets, L)
    ]
    constraints += [Constraint(c.name, c.expr.substitute(pinned), c.sense, c.group) for c in extra]
    objective = objective.substitute(pinned)

    exprs = [c.expr for c in constraints] + [objective]
    blocks = _layout(basis, exprs)
    used = set().union(*(e.symbols() for e in exprs))
    ordered = [t.value for t in triplets if t.value is not None] + list(extra_symbols)
    symbols = tuple(dict.fromkeys(s for s in ordered if s in used))

    problem = SdpProblem(blocks, symbols, tuple(constraints), objective, maximize, metadata, pinned)
    logger.debug(
        f"Assembled PEP: gram {problem.gram_dims}, {len(symbols)} symbols, {len(constraints)} constraints"
    )
    return problem


def _setting_constraints(traj: Trajectory, setting: Setting, L: LipschitzVector) -> list[Constraint]:
    structure = traj.structure
    r2 = setting.radius ** 2
    out = []
    if setting.kind is SettingKind.ALL:
        if traj.cycle_ends is None:
            raise ConstructionError(
                f"Setting all needs cycle-end iterates; {traj.method.describe()} is not cycle aligned"
            )
        ends = traj.cycle_ends if setting.include_start else traj.cycle_ends[1:]
        for name in ends:
            x = traj.iterates[name]
            out.append(Constraint(f"setting-all[{name}]", r2 - inner_product(x, x), Sense.GEQ, "setting"))
    elif setting.kind is SettingKind.INIT:
        x0 = traj.iterates[traj.start]
        out.append(Constraint("setting-init", r2 - weighted_norm_sq(x0, L.values), Sense.GEQ, "setting"))
    elif setting.kind is SettingKind.GRAD_NORMALIZED:
        names = setting.points or (traj.start,)
        total = ScalarExpr.constant_expr(structure, 0.0)
        for name in names:
            g = traj.triplet(name).gradient
            total = total + inner_product(g, g, setting.block)
        out.append(Constraint("setting-gradnorm", total - setting.radius, Sense.EQ, "setting"))
    elif setting.kind is SettingKind.FUNCTION_DECREASE:
        decrease = traj.triplet(traj.start).value_expr() - traj.triplet(traj.final).value_expr()
        out.append(Constraint("setting-decrease", setting.radius - decrease, Sense.GEQ, "setting"))
    return out


def _triplet_at(traj: Trajectory, index: int) -> Triplet:
    for t in traj.triplets:
        if t.index == index:
            return t
    raise ConstructionError(f"No gradient is evaluated at iterate {index} of {traj.method.describe()}")


def assemble_pep(
    traj: Trajectory,
    setting: Setting,
    criterion: Optional[Criterion] = None,
    L: Optional[LipschitzVector] = None,
) -> SdpProblem:
    criterion = criterion or Criterion.final_gap()
    L = L or LipschitzVector.unit(traj.structure.p)
    if L.p != traj.structure.p:
        raise StructuralError(f"L has {L.p} entries for p={traj.structure.p}")
    structure = traj.structure

    triplets = list(traj.triplets)
    pinned = {}
    if setting.translation_free:
        triplets = list(traj.without_optimal())
        start = traj.triplet(traj.start)
        if start.value is not None:
            pinned[start.value] = 0.0
    elif criterion.kind is CriterionKind.CYCLE_DECREASE:
        raise ConstructionError("The cycle-decrease criterion needs a gradnorm or decrease setting")

    extra = [Constraint(name, expr, Sense.EQ, "structural") for name, expr in traj.structural]
    extra += _setting_constraints(traj, setting, L)

    extra_symbols = []
    final = traj.triplet(traj.final)
    if criterion.kind is CriterionKind.FINAL_VALUE_GAP:
        if setting.translation_free:
            raise ConstructionError("The final value gap needs an optimal point (settings all or init)")
        objective = final.value_expr()
    elif criterion.kind is CriterionKind.CYCLE_DECREASE:
        objective = traj.triplet(traj.start).value_expr() - final.value_expr()
    else:
        indices = criterion.indices or tuple(range(1, traj.method.n_steps))
        if not indices:
            raise ConstructionError("The min-grad criterion needs at least one interior iterate")
        t = ScalarExpr.value(structure, EPIGRAPH)
        for i in indices:
            g = _triplet_at(traj, i).gradient
            extra.append(Constraint(
                f"epigraph[{i}]", weighted_norm_sq(g, L.inverse()) - t, Sense.GEQ, "criterion"
            ))
        objective = t
        extra_symbols.append(EPIGRAPH)

    metadata = {
        "method": traj.method.describe(),
        "kind": traj.method.kind.value,
        "p": structure.p,
        "N": traj.method.n_steps,
        "K": traj.method.cycles if traj.method.cycles is not None else "",
        "setting": setting.kind.value,
        "radius": setting.radius,
        "criterion": criterion.kind.value,
        "L": str(L),
        "lipschitz": L.values,
    }
    return _build(triplets, traj.basis, L, extra, objective, criterion.maximize, pinned, metadata, extra_symbols)


def assemble_random_pep(
    tree: SequenceTree,
    setting: Setting,
    criterion: Optional[Criterion] = None,
    L: Optional[LipschitzVector] = None,
) -> SdpProblem:
    """Expected final gap sum_r P_r f_{N,r} over all block sequences of the tree."""
    criterion = criterion or Criterion.final_gap()
    L = L or LipschitzVector.unit(tree.p)
    if criterion.kind is not CriterionKind.FINAL_VALUE_GAP:
        raise ConstructionError(f"Random PEPs support the final value gap only, not {criterion.kind.value}")
    if setting.kind is not SettingKind.INIT:
        raise ConstructionError(f"Random PEPs support setting init only, not {setting.kind.value}")
    if L.p != tree.p:
        raise StructuralError(f"L has {L.p} entries for p={tree.p}")
    structure = tree.structure

    triplets = list(tree.triplets()) + [Triplet.optimal(structure)]
    x0 = tree.root.triplet.point
    extra = [Constraint(
        "setting-init", setting.radius ** 2 - weighted_norm_sq(x0, L.values), Sense.GEQ, "setting"
    )]
    objective = ScalarExpr.constant_expr(structure, 0.0)
    for leaf in tree.leaves:
        objective = objective + leaf.probability * leaf.triplet.value_expr()

    metadata = {
        "method": f"random-{tree.kind.value}(p={tree.p},N={tree.n_steps})",
        "kind": f"random-{tree.kind.value}",
        "p": tree.p,
        "N": tree.n_steps,
        "K": "",
        "setting": setting.kind.value,
        "radius": setting.radius,
        "criterion": criterion.kind.value,
        "L": str(L),
        "lipschitz": L.values,
        "nodes": len(tree.nodes),
    }
    return _build(triplets, tree.basis(), L, extra, objective, True, {}, metadata)
