from pepbcd.algos.fixed_step import _cycle_ends
from pepbcd.algos.spec import MethodKind, MethodSpec, Trajectory, fixed_basis
from pepbcd.core.errors import ConstructionError
from pepbcd.core.expr import GRADIENT, POINT, BlockVectorExpr, Triplet, inner_product


def run_am(spec: MethodSpec) -> Trajectory:
    """
    Alternating (exact block) minimization.

    Iterates are free Gram columns x_0..x_N. A step on block l from x_{i-1} emits
    ||x_i^(s) - x_{i-1}^(s)||^2 = 0 for every s != l and ||g_i^(l)||^2 = 0.
    """
    if spec.kind is not MethodKind.AM:
        raise ConstructionError(f"run_am expects an AM spec, got {spec.kind.value}")
    structure = spec.structure
    n = spec.n_steps
    points = [BlockVectorExpr.basis(structure, POINT, i) for i in range(n + 1)]
    grads = [BlockVectorExpr.basis(structure, GRADIENT, i) for i in range(n + 1)]

    structural = []
    for i in range(1, n + 1):
        block = spec.order[i - 1]
        move = points[i] - points[i - 1]
        for other in structure.labels:
            if other != block:
                structural.append((f"am-immobile[{i};{other}]", inner_product(move, move, other)))
        structural.append((f"am-stationary[{i};{block}]", inner_product(grads[i], grads[i], block)))

    triplets = [Triplet(f"x{i}", points[i], grads[i], f"f{i}", index=i) for i in range(n + 1)]
    triplets.append(Triplet.optimal(structure))
    return Trajectory(
        method=spec,
        triplets=tuple(triplets),
        basis=fixed_basis(structure, n + 1, n + 1),
        iterates={f"x{i}": points[i] for i in range(n + 1)},
        start="x0",
        final=f"x{n}",
        structural=tuple(structural),
        cycle_ends=_cycle_ends(spec),
    )
