import pytest

from pepbcd.algos import MethodSpec, StepSchedule, build_sequence_tree, run_method
from pepbcd.core.errors import ConstructionError, StructuralError
from pepbcd.core.expr import LipschitzVector
from pepbcd.pep import (
    EPIGRAPH,
    Criterion,
    Sense,
    Setting,
    assemble_pep,
    assemble_random_pep,
)


def ccd(p, K, L=None):
    L = L or LipschitzVector.unit(p)
    return run_method(MethodSpec.cyclic("ccd", p, K, StepSchedule.relative(1.0, L)))


def test_ccd_init_layout():
    problem = assemble_pep(ccd(2, 1), Setting.init())
    n = 4  # x0, x1, x2, optimum
    assert problem.count("interp") == 2 * n * (n - 1)
    assert problem.count("setting") == 1
    assert problem.gram_dims == (4, 4)
    assert problem.symbols == ("f0", "f1", "f2")
    assert problem.maximize


def test_setting_all_bounds_every_cycle_end():
    problem = assemble_pep(ccd(2, 3), Setting.all_cycles())
    names = [c.name for c in problem.constraints if c.group == "setting"]
    assert names == ["setting-all[x2]", "setting-all[x4]", "setting-all[x6]"]
    with_start = assemble_pep(ccd(2, 3), Setting.all_cycles(include_start=True))
    assert with_start.count("setting") == 4


def test_setting_all_needs_cycle_alignment():
    traj = run_method(MethodSpec.sequence("ccd", 2, (1, 1, 2), StepSchedule.unit(2)))
    with pytest.raises(ConstructionError):
        assemble_pep(traj, Setting.all_cycles())


def test_am_gram_blocks():
    problem = assemble_pep(run_method(MethodSpec.cyclic("am", 2, 1)), Setting.all_cycles())
    assert problem.gram_dims == (6, 6)
    assert problem.count("structural", Sense.EQ) == 4


def test_descent_problem_drops_the_optimum():
    problem = assemble_pep(ccd(2, 1), Setting.grad_normalized(1.0), Criterion.cycle_decrease())
    n = 3
    assert problem.count("interp") == 2 * n * (n - 1)
    assert problem.pinned == {"f0": 0.0}
    assert "f0" not in problem.symbols
    assert not problem.maximize
    # x0 is never referenced once the optimum is gone
    assert problem.gram_dims == (3, 3)


def test_criterion_setting_mismatch():
    with pytest.raises(ConstructionError):
        assemble_pep(ccd(2, 1), Setting.init(), Criterion.cycle_decrease())
    with pytest.raises(ConstructionError):
        assemble_pep(ccd(2, 1), Setting.grad_normalized(), Criterion.final_gap())


def test_min_grad_epigraph():
    problem = assemble_pep(ccd(2, 2), Setting.function_decrease(), Criterion.min_grad())
    assert EPIGRAPH in problem.symbols
    assert problem.count("criterion") == 3
    with pytest.raises(ConstructionError):
        assemble_pep(
            run_method(MethodSpec.sequence("ccd", 2, (1,), StepSchedule.unit(2))),
            Setting.function_decrease(), Criterion.min_grad(),
        )


def test_lipschitz_length_mismatch():
    with pytest.raises(StructuralError):
        assemble_pep(ccd(2, 1), Setting.init(), L=LipschitzVector.unit(3))


def test_random_tree_problem():
    tree = build_sequence_tree(2, 4)
    problem = assemble_random_pep(tree, Setting.init())
    assert problem.gram_dims == (32, 32)
    n = len(tree.nodes) + 1
    assert problem.count("interp") == 2 * n * (n - 1)
    assert problem.metadata["nodes"] == 31
    with pytest.raises(ConstructionError):
        assemble_random_pep(tree, Setting.all_cycles())


def test_describe_reports_sizes():
    stats = assemble_pep(ccd(2, 1), Setting.init()).describe()
    assert stats["gram_dims"] == [4, 4]
    assert stats["constraints"] == stats["inequalities"] + stats["equalities"]
    assert stats["sense"] == "max"
