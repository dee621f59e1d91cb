import re
from pathlib import Path

from rich.console import Console

from pepbcd.algos import StepSchedule, build_sequence_tree, run_method
from pepbcd.config import settings
from pepbcd.core.theme import print_status_line
from pepbcd.pep import SdpProblem, assemble_pep, assemble_random_pep, export_sdpa
from pepbcd.pep.sdpa import sdpa_layout
from pepbcd.runs.experiment import RANDOM_METHODS, ExperimentConfig

console = Console()


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "-", text).strip("-").lower()


class ExportManager:
    """Writes the assembled PEP of a config as a sparse SDPA file."""

    def __init__(self, config: ExperimentConfig):
        self.config = config.validate()

    def build(self) -> SdpProblem:
        config = self.config
        L = config.lipschitz_vector()
        if config.is_random:
            rel = [float(g) for g in (config.gamma_rel or [1.0])]
            schedule = StepSchedule.relative(rel[0] if len(rel) == 1 else rel, L)
            tree = build_sequence_tree(config.blocks, config.n_steps, config.probabilities,
                                       kind=RANDOM_METHODS[config.method], schedule=schedule)
            return assemble_random_pep(tree, config.setting_obj(), config.criterion_obj(), L)
        return assemble_pep(run_method(config.method_spec()), config.setting_obj(), config.criterion_obj(), L)

    def run(self) -> Path:
        problem = self.build()
        target = self.config.export_sdpa or self.config.out
        path = Path(target) if target else settings.EXPORT_DIR / f"{_slug(problem.metadata['method'])}.dat-s"
        if not path.name.endswith(".dat-s"):
            path = path.with_name(path.name + ".dat-s")
        export_sdpa(problem, path)

        sizes, _ = sdpa_layout(problem)
        stats = problem.describe()
        print_status_line("Problem", problem.metadata["method"])
        print_status_line("Constraints", f"{stats['constraints']} ({stats['inequalities']} ineq, "
                                         f"{stats['equalities']} eq)")
        print_status_line("Gram block sizes", str(stats["gram_dims"]))
        print_status_line("SDPA block structure", " ".join(str(s) for s in sizes))
        print_status_line("File", str(path))
        return path
