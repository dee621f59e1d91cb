from typing import Optional

from pepbcd.algos.spec import MethodKind, MethodSpec, Trajectory, fixed_basis
from pepbcd.core.errors import ConstructionError
from pepbcd.core.expr import GRADIENT, POINT, BlockVectorExpr, Triplet


def _cycle_ends(spec: MethodSpec) -> Optional[tuple[str, ...]]:
    if not spec.cycle_aligned:
        return None
    return tuple(f"x{spec.p * k}" for k in range(spec.cycles + 1))


def run_fixed_step(spec: MethodSpec) -> Trajectory:
    """
    Symbolic run of x_i = x_0 - sum_{k<i} alpha_{i,k} U_{t(k)} g_k^{(t(k))}.

    CCD uses alpha_{i,k} = gamma_{t(k)}; CUSTOM reads the alpha rows of the MethodSpec.
    Gradients are evaluated at every iterate x_0..x_N.
    """
    if spec.kind not in (MethodKind.CCD, MethodKind.CUSTOM):
        raise ConstructionError(f"run_fixed_step cannot run {spec.kind.value}")
    structure = spec.structure
    x0 = BlockVectorExpr.basis(structure, POINT, 0)
    grads = [BlockVectorExpr.basis(structure, GRADIENT, i) for i in range(spec.n_steps + 1)]

    iterates = {"x0": x0}
    x = x0
    for i in range(1, spec.n_steps + 1):
        if spec.kind is MethodKind.CCD:
            block = spec.order[i - 1]
            x = x - spec.schedule.block(block) * grads[i - 1].restrict(block)
        else:
            x = x0
            for k, a in enumerate(spec.alpha[i - 1]):
                if a != 0.0:
                    x = x - a * grads[k].restrict(spec.order[k])
        iterates[f"x{i}"] = x

    triplets = [
        Triplet(f"x{i}", iterates[f"x{i}"], grads[i], f"f{i}", index=i)
        for i in range(spec.n_steps + 1)
    ]
    triplets.append(Triplet.optimal(structure))
    return Trajectory(
        method=spec,
        triplets=tuple(triplets),
        basis=fixed_basis(structure, spec.n_steps + 1),
        iterates=iterates,
        start="x0",
        final=f"x{spec.n_steps}",
        cycle_ends=_cycle_ends(spec),
    )


def run_ccd(spec: MethodSpec) -> Trajectory:
    """Cyclic (or fixed-sequence) coordinate descent with steps gamma_l on block l."""
    if spec.kind is not MethodKind.CCD:
        raise ConstructionError(f"run_ccd expects a CCD spec, got {spec.kind.value}")
    return run_fixed_step(spec)
