from pepbcd.algos.am import run_am
from pepbcd.algos.cacd import run_cacd, theta_schedule
from pepbcd.algos.fixed_step import run_ccd, run_fixed_step
from pepbcd.algos.spec import MethodKind, MethodSpec, StepSchedule, Trajectory, cyclic_order
from pepbcd.algos.tree import SequenceTree, TreeNode, build_sequence_tree

_RUNNERS = {
    MethodKind.CCD: run_ccd,
    MethodKind.CACD: run_cacd,
    MethodKind.AM: run_am,
    MethodKind.CUSTOM: run_fixed_step,
}


def run_method(spec: MethodSpec) -> Trajectory:
    """Dispatch a spec to its symbolic runner."""
    return _RUNNERS[spec.kind](spec)


__all__ = [
    "MethodKind", "MethodSpec", "SequenceTree", "StepSchedule", "Trajectory", "TreeNode",
    "build_sequence_tree", "cyclic_order", "run_am", "run_cacd", "run_ccd", "run_fixed_step",
    "run_method", "theta_schedule",
]
