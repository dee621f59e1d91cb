import pandas as pd
from rich.console import Console

from pepbcd.analysis.studies import BoundReport, racd_compare
from pepbcd.core.theme import create_bound_table
from pepbcd.database import SessionLocal, init_db, record_report
from pepbcd.runs.bound import pool
from pepbcd.runs.experiment import ExperimentConfig
from pepbcd.runs.output import write_table

console = Console()

DEFAULT_STEPS = 4


def sequence_label(report: BoundReport) -> str:
    if report.order is None:
        return "random"
    return "(" + ",".join(str(b) for b in report.order) + ")"


class RacdCompareManager:
    """Deterministic block sequences against the randomized accelerated method."""

    def __init__(self, config: ExperimentConfig):
        self.config = config.validate()
        init_db()
        self.db = SessionLocal()

    @property
    def steps(self) -> int:
        config = self.config
        return config.n_steps if (config.steps or config.cycles or config.order) else DEFAULT_STEPS

    def run(self) -> tuple[list[BoundReport], pd.DataFrame]:
        config = self.config
        N = self.steps
        console.print(f"[cyan]Comparing every block sequence of length {N} over {config.blocks} blocks "
                      f"(dedup {'on' if config.dedup else 'off'})...[/cyan]")
        with console.status("[bold]Solving sequence PEPs..."), pool(config.jobs) as mapper:
            reports = racd_compare(
                config.blocks, N, config.lipschitz_vector(), config.radius,
                dedup=config.dedup, cap=config.cap, options=config.solver_options(), mapper=mapper,
            )

        for report in reports:
            record_report(self.db, report, "racd-compare")
        self.db.commit()

        rows = []
        for report in reports:
            row = report.to_row()
            rows.append({"sequence": sequence_label(report), "multiplicity": report.multiplicity, **row})
        df = pd.DataFrame(rows)
        write_table(df, config.out, "racd-compare", config.format)
        console.print(create_bound_table([r.to_row() for r in reports], title="═══ SEQUENCE COMPARISON ═══"))
        return reports, df
