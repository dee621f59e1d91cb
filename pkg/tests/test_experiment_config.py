import json

import pytest

from pepbcd.algos import MethodKind
from pepbcd.core.errors import ConstructionError
from pepbcd.core.utils import parse_range
from pepbcd.pep import SettingKind
from pepbcd.runs.experiment import ExperimentConfig


def write(tmp_path, doc):
    path = tmp_path / "exp.json"
    path.write_text(json.dumps(doc))
    return path


def test_from_json_accepts_flag_spellings(tmp_path):
    cfg = ExperimentConfig.from_json(write(tmp_path, {"method": "am", "gamma-rel": [0.5], "cycles": 3}))
    assert cfg.method == "am"
    assert cfg.gamma_rel == [0.5]
    assert cfg.n_steps == 6


def test_from_json_rejects_unknown_keys(tmp_path):
    with pytest.raises(ConstructionError, match="stepsize"):
        ExperimentConfig.from_json(write(tmp_path, {"stepsize": 1}))
    with pytest.raises(ConstructionError):
        ExperimentConfig.from_json(tmp_path / "missing.json")


def test_merge_skips_absent_flags():
    cfg = ExperimentConfig(blocks=3).merge(blocks=None, cycles=2, setting="all")
    assert (cfg.blocks, cfg.cycles, cfg.setting) == (3, 2, "all")


@pytest.mark.parametrize("overrides", [
    {"method": "gd"},
    {"setting": "warm"},
    {"blocks": 0},
    {"radius": -1.0},
    {"lipschitz": [1.0]},
    {"gamma": [1.0], "gamma_rel": [1.0]},
    {"cycles": 2, "steps": 3},
    {"sweep_axis": "cycles"},
    {"sweep_axis": "memory", "sweep_range": [1]},
])
def test_validate_rejects(overrides):
    with pytest.raises(ConstructionError):
        ExperimentConfig(**overrides).validate()


def test_method_spec_from_flags():
    spec = ExperimentConfig(blocks=2, cycles=2, lipschitz=[1.0, 4.0]).method_spec()
    assert spec.kind is MethodKind.CCD
    assert spec.order == (1, 2, 1, 2)
    assert spec.schedule.gamma == pytest.approx((1.0, 0.25))

    spec = ExperimentConfig(blocks=2, steps=3, gamma=[0.5]).method_spec()
    assert spec.order == (1, 2, 1)
    assert spec.cycles is None
    assert spec.schedule.gamma == (0.5, 0.5)

    assert ExperimentConfig(method="am").method_spec().schedule is None


def test_custom_method_needs_order_and_alpha():
    with pytest.raises(ConstructionError):
        ExperimentConfig(method="custom").method_spec()
    spec = ExperimentConfig(method="custom", blocks=1, order=[1, 1], alpha=[[1.0], [1.0, 1.0]]).method_spec()
    assert spec.kind is MethodKind.CUSTOM
    assert spec.cycles == 2


def test_random_method_has_no_single_sequence():
    with pytest.raises(ConstructionError):
        ExperimentConfig(method="racd").method_spec()


def test_setting_and_criterion_objects():
    assert ExperimentConfig(setting="all", include_start=True).setting_obj().kind is SettingKind.ALL
    assert ExperimentConfig(setting="gradnorm", radius=2.0).setting_obj().radius == 2.0
    assert ExperimentConfig(criterion="min-grad").criterion_obj().kind.value == "min-grad"
    assert ExperimentConfig(tol=1e-6).solver_options().tol == 1e-6


def test_parse_range():
    assert parse_range("1..4") == [1, 2, 3, 4]
    assert parse_range("0.5:1.0:0.25") == pytest.approx([0.5, 0.75, 1.0])
    assert parse_range("1,2,4") == [1, 2, 4]


@pytest.mark.parametrize("text", ["1..x", "0.5:y:0.1", "0.5:1.0", "1,two"])
def test_parse_range_errors_belong_to_the_package(text):
    with pytest.raises(ConstructionError):
        parse_range(text)
