"""
Experiment descriptions shared by every command.

A config is read from a JSON document and overlaid with the command-line flags
that were actually given.
"""

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional, Union

from pepbcd.algos import MethodKind, MethodSpec, StepSchedule, cyclic_order
from pepbcd.config import settings
from pepbcd.core.errors import ConstructionError
from pepbcd.core.expr import LipschitzVector
from pepbcd.pep import Criterion, Setting, SolverOptions

RANDOM_METHODS = {"racd": MethodKind.CACD, "rcd": MethodKind.CCD}
METHODS = tuple(k.value for k in MethodKind) + tuple(RANDOM_METHODS)
SETTINGS = ("all", "init", "gradnorm", "decrease")
CRITERIA = ("gap", "min-grad", "decrease")
SWEEP_AXES = ("cycles", "blocks", "step-size", "sequence")
FORMATS = ("csv", "json")


@dataclass
class ExperimentConfig:
    command: str = "bound"
    method: str = "ccd"
    blocks: int = 2
    cycles: Optional[int] = None
    steps: Optional[int] = None
    lipschitz: Optional[list] = None
    gamma: Optional[list] = None
    gamma_rel: Optional[list] = None
    order: Optional[list] = None
    alpha: Optional[list] = None
    probabilities: Optional[list] = None
    setting: str = "init"
    radius: float = 1.0
    include_start: bool = False
    criterion: str = "gap"
    sweep_axis: Optional[str] = None
    sweep_range: Optional[list] = None
    solver: str = field(default_factory=lambda: settings.SOLVER)
    tol: float = field(default_factory=lambda: settings.SOLVER_TOL)
    out: Optional[str] = None
    format: str = "csv"
    export_sdpa: Optional[str] = None
    jobs: int = 1
    dedup: bool = True
    cap: int = field(default_factory=lambda: settings.RACD_CAP)
    lower_bound: bool = False

    @classmethod
    def from_json(cls, path: Union[str, Path]) -> "ExperimentConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConstructionError(f"Cannot read config {path}: {e}") from e
        known = {f.name for f in fields(cls)}
        # flag spellings with dashes are accepted in documents too
        doc = {k.replace("-", "_"): v for k, v in doc.items()}
        unknown = set(doc) - known
        if unknown:
            raise ConstructionError(f"Unknown config keys: {sorted(unknown)}")
        return cls(**doc)

    def merge(self, **overrides) -> "ExperimentConfig":
        """Copy with every override that is not None applied."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def is_random(self) -> bool:
        return self.method in RANDOM_METHODS

    @property
    def n_steps(self) -> int:
        if self.order:
            return len(self.order)
        if self.steps is not None:
            return self.steps
        return self.blocks * (self.cycles or 1)

    def validate(self) -> "ExperimentConfig":
        if self.method not in METHODS:
            raise ConstructionError(f"Unknown method {self.method!r}; choose from {METHODS}")
        if self.setting not in SETTINGS:
            raise ConstructionError(f"Unknown setting {self.setting!r}; choose from {SETTINGS}")
        if self.criterion not in CRITERIA:
            raise ConstructionError(f"Unknown criterion {self.criterion!r}; choose from {CRITERIA}")
        if self.format not in FORMATS:
            raise ConstructionError(f"Unknown format {self.format!r}; choose from {FORMATS}")
        for name in ("blocks", "jobs", "cap"):
            if int(getattr(self, name)) < 1:
                raise ConstructionError(f"{name} must be a positive integer, got {getattr(self, name)}")
        for name in ("cycles", "steps"):
            value = getattr(self, name)
            if value is not None and int(value) < 1:
                raise ConstructionError(f"{name} must be a positive integer, got {value}")
        if self.cycles is not None and self.steps is not None and self.steps != self.blocks * self.cycles:
            raise ConstructionError(f"--steps {self.steps} contradicts --cycles {self.cycles} with p={self.blocks}")
        for name in ("radius", "tol"):
            if not float(getattr(self, name)) > 0:
                raise ConstructionError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("lipschitz", "gamma", "gamma_rel"):
            value = getattr(self, name)
            if value is not None and any(not float(v) > 0 for v in value):
                raise ConstructionError(f"{name} entries must be positive, got {value}")
        if self.lipschitz is not None and len(self.lipschitz) != self.blocks:
            raise ConstructionError(f"--lipschitz has {len(self.lipschitz)} entries for p={self.blocks}")
        if self.gamma is not None and self.gamma_rel is not None:
            raise ConstructionError("Give either --gamma or --gamma-rel, not both")
        if self.sweep_axis is not None:
            if self.sweep_axis not in SWEEP_AXES:
                raise ConstructionError(f"Unknown sweep axis {self.sweep_axis!r}; choose from {SWEEP_AXES}")
            if self.sweep_axis != "sequence" and not self.sweep_range:
                raise ConstructionError(f"Sweep over {self.sweep_axis} needs a range")
        return self

    def lipschitz_vector(self) -> LipschitzVector:
        if self.lipschitz is None:
            return LipschitzVector.unit(self.blocks)
        return LipschitzVector(tuple(float(v) for v in self.lipschitz))

    def schedule(self, L: Optional[LipschitzVector] = None) -> StepSchedule:
        L = L or self.lipschitz_vector()
        if self.gamma is not None:
            gamma = [float(g) for g in self.gamma]
            return StepSchedule(tuple(gamma * L.p if len(gamma) == 1 else gamma))
        rel = [float(g) for g in (self.gamma_rel or [1.0])]
        return StepSchedule.relative(rel[0] if len(rel) == 1 else rel, L)

    def method_spec(self) -> MethodSpec:
        if self.is_random:
            raise ConstructionError(f"{self.method} is a randomized method; it has no single block sequence")
        kind = MethodKind(self.method)
        p = self.blocks
        if kind is MethodKind.CUSTOM:
            if not self.alpha or not self.order:
                raise ConstructionError("Custom methods need 'order' and 'alpha' in the config document")
            return MethodSpec.custom(p, self.order, self.alpha)
        schedule = None if kind is MethodKind.AM else self.schedule()
        if self.order:
            return MethodSpec.sequence(kind, p, [int(b) for b in self.order], schedule)
        if self.cycles is not None or self.steps is None:
            return MethodSpec.cyclic(kind, p, self.cycles or 1, schedule)
        return MethodSpec.sequence(kind, p, cyclic_order(p, self.steps), schedule)

    def setting_obj(self) -> Setting:
        if self.setting == "all":
            return Setting.all_cycles(self.radius, self.include_start)
        if self.setting == "gradnorm":
            return Setting.grad_normalized(self.radius)
        if self.setting == "decrease":
            return Setting.function_decrease(self.radius)
        return Setting.init(self.radius)

    def criterion_obj(self) -> Criterion:
        return {
            "gap": Criterion.final_gap,
            "min-grad": Criterion.min_grad,
            "decrease": Criterion.cycle_decrease,
        }[self.criterion]()

    def solver_options(self) -> SolverOptions:
        return SolverOptions(solver=self.solver, tol=float(self.tol))
