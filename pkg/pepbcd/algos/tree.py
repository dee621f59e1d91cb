"""
Prefix tree of random block choices.

A randomized method with N steps over p blocks is a mixture of p^N deterministic
sequences. Sequences that agree on their first k choices visit the same first k
points, so the tree stores each prefix once and every node carries the triplet
that all descending sequences share.
"""

from dataclasses import dataclass
from typing import Optional, Sequence

from pepbcd.algos.cacd import accelerated_step, coupling_point, theta_schedule
from pepbcd.algos.spec import MethodKind, StepSchedule
from pepbcd.core.errors import ConstructionError
from pepbcd.core.expr import GRADIENT, POINT, BasisLabel, BlockStructure, BlockVectorExpr, Triplet

PROB_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class TreeNode:
    id: int
    depth: int
    prefix: tuple[int, ...]
    parent: Optional[int]
    probability: float
    triplet: Triplet


@dataclass(frozen=True)
class SequenceTree:
    p: int
    n_steps: int
    kind: MethodKind
    schedule: StepSchedule
    nodes: tuple[TreeNode, ...]

    @property
    def structure(self) -> BlockStructure:
        return BlockStructure(self.p)

    @property
    def root(self) -> TreeNode:
        return self.nodes[0]

    @property
    def leaves(self) -> tuple[TreeNode, ...]:
        return tuple(n for n in self.nodes if n.depth == self.n_steps)

    def node(self, prefix: Sequence[int]) -> TreeNode:
        prefix = tuple(prefix)
        for n in self.nodes:
            if n.prefix == prefix:
                return n
        raise KeyError(prefix)

    def path(self, sequence: Sequence[int]) -> tuple[TreeNode, ...]:
        """Nodes visited by one full sequence, root first."""
        sequence = tuple(sequence)
        return tuple(self.node(sequence[:k]) for k in range(len(sequence) + 1))

    def triplets(self) -> tuple[Triplet, ...]:
        return tuple(n.triplet for n in self.nodes)

    def basis(self) -> tuple[tuple[BasisLabel, ...], ...]:
        return tuple(
            tuple(BasisLabel(block, GRADIENT, n.id) for n in self.nodes) + (BasisLabel(block, POINT, 0),)
            for block in self.structure.labels
        )


def _step_distributions(p: int, n_steps: int, probabilities) -> list[tuple[float, ...]]:
    if probabilities is None:
        return [(1.0 / p,) * p] * n_steps
    probabilities = list(probabilities)
    if probabilities and not isinstance(probabilities[0], (list, tuple)):
        probabilities = [tuple(probabilities)] * n_steps
    if len(probabilities) != n_steps:
        raise ConstructionError(f"Expected {n_steps} step distributions, got {len(probabilities)}")
    out = []
    for k, dist in enumerate(probabilities):
        dist = tuple(float(q) for q in dist)
        if len(dist) != p or any(q < 0 for q in dist) or abs(sum(dist) - 1.0) > PROB_TOL:
            raise ConstructionError(f"Step {k} distribution {dist} is not a probability vector over {p} blocks")
        out.append(dist)
    return out


def build_sequence_tree(
    p: int,
    n_steps: int,
    probabilities=None,
    *,
    kind: MethodKind = MethodKind.CACD,
    schedule: Optional[StepSchedule] = None,
) -> SequenceTree:
    """
    Builds the prefix tree of an N-step randomized method (RACD for kind CACD,
    plain random coordinate descent for kind CCD). Nodes are numbered breadth
    first; branches of probability zero are not created.
    """
    kind = MethodKind(kind)
    if kind not in (MethodKind.CACD, MethodKind.CCD):
        raise ConstructionError(f"Random sequence trees support ccd and cacd, not {kind.value}")
    if n_steps < 1:
        raise ConstructionError(f"Sequence tree needs N >= 1, got {n_steps}")
    structure = BlockStructure(p)
    schedule = schedule or StepSchedule.unit(p)
    if schedule.p != p:
        raise ConstructionError(f"Schedule has {schedule.p} entries for p={p}")
    dists = _step_distributions(p, n_steps, probabilities)
    thetas = theta_schedule(p, n_steps)

    x0 = BlockVectorExpr.basis(structure, POINT, 0)
    nodes: list[TreeNode] = []
    # per node: (x_k, z_k, evaluation point)
    state: dict[int, tuple] = {}

    def add(depth, prefix, parent, prob, x, z):
        node_id = len(nodes)
        grad = BlockVectorExpr.basis(structure, GRADIENT, node_id)
        if depth == 0:
            point, name = x, "x0"
        elif depth == n_steps:
            point, name = x, f"x{n_steps}.{node_id}"
        else:
            point = coupling_point(x, z, thetas[depth]) if kind is MethodKind.CACD else x
            name = f"{'y' if kind is MethodKind.CACD else 'x'}{depth}.{node_id}"
        nodes.append(TreeNode(node_id, depth, prefix, parent, prob, Triplet(name, point, grad, f"f{node_id}", index=prefix)))
        state[node_id] = (x, z, point)
        return node_id

    frontier = [add(0, (), None, 1.0, x0, x0)]
    for depth in range(n_steps):
        next_frontier = []
        for node_id in frontier:
            x, z, y = state[node_id]
            grad = nodes[node_id].triplet.gradient
            for block in structure.labels:
                prob = nodes[node_id].probability * dists[depth][block - 1]
                if prob == 0.0:
                    continue
                if kind is MethodKind.CACD:
                    x_next, z_next = accelerated_step(y, z, grad, block, schedule.block(block), thetas[depth], p)
                else:
                    x_next = x - schedule.block(block) * grad.restrict(block)
                    z_next = x_next
                prefix = nodes[node_id].prefix + (block,)
                next_frontier.append(add(depth + 1, prefix, node_id, prob, x_next, z_next))
        frontier = next_frontier

    return SequenceTree(p, n_steps, kind, schedule, tuple(nodes))
