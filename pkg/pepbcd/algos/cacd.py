"""Cyclic accelerated coordinate descent, run symbolically."""

import math

from pepbcd.algos.fixed_step import _cycle_ends
from pepbcd.algos.spec import MethodKind, MethodSpec, Trajectory, fixed_basis
from pepbcd.core.errors import ConstructionError
from pepbcd.core.expr import GRADIENT, POINT, BlockVectorExpr, Triplet


def theta_schedule(p: int, n_steps: int) -> list[float]:
    """theta_0 = 1/p, theta_i = (sqrt(theta^4 + 4 theta^2) - theta^2) / 2."""
    if p < 1 or n_steps < 0:
        raise ConstructionError(f"theta_schedule needs p >= 1 and N >= 0, got p={p}, N={n_steps}")
    thetas = [1.0 / p]
    for _ in range(n_steps):
        t = thetas[-1]
        thetas.append((math.sqrt(t ** 4 + 4 * t ** 2) - t ** 2) / 2.0)
    return thetas


def coupling_point(x: BlockVectorExpr, z: BlockVectorExpr, theta: float) -> BlockVectorExpr:
    """y = (1 - theta) x + theta z."""
    return (1.0 - theta) * x + theta * z


def accelerated_step(y, z, grad, block: int, gamma: float, theta: float, p: int):
    """
    One block step from y with gradient `grad` evaluated at y.
    Returns (x_next, z_next).
    """
    z_next = z - (gamma / (p * theta)) * grad.restrict(block)
    x_next = y + (p * theta) * (z_next - z)
    return x_next, z_next


def run_cacd(spec: MethodSpec) -> Trajectory:
    """
    Gradients are evaluated at y_0..y_{N-1} only (y_0 = x_0 since z_0 = x_0); the
    interpolated set is {x_0, y_1..y_{N-1}, x_N, x_*}, with a gradient at x_N for the
    final value.
    """
    if spec.kind is not MethodKind.CACD:
        raise ConstructionError(f"run_cacd expects a CACD spec, got {spec.kind.value}")
    structure = spec.structure
    n = spec.n_steps
    thetas = theta_schedule(spec.p, n)
    grads = [BlockVectorExpr.basis(structure, GRADIENT, i) for i in range(n + 1)]

    x = z = BlockVectorExpr.basis(structure, POINT, 0)
    iterates = {"x0": x}
    triplets = []
    for i in range(n):
        y = x if i == 0 else coupling_point(x, z, thetas[i])
        iterates[f"y{i}"] = y
        name = "x0" if i == 0 else f"y{i}"
        triplets.append(Triplet(name, y, grads[i], f"f{i}", index=i))
        block = spec.order[i]
        x, z = accelerated_step(y, z, grads[i], block, spec.schedule.block(block), thetas[i], spec.p)
        iterates[f"x{i + 1}"] = x
    triplets.append(Triplet(f"x{n}", x, grads[n], f"f{n}", index=n))
    triplets.append(Triplet.optimal(structure))
    return Trajectory(
        method=spec,
        triplets=tuple(triplets),
        basis=fixed_basis(structure, n + 1),
        iterates=iterates,
        start="x0",
        final=f"x{n}",
        cycle_ends=_cycle_ends(spec),
    )
