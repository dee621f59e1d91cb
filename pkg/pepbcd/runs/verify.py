from typing import Optional

from rich.console import Console

from pepbcd.analysis.theorems import VerifySummary, run_verify_suite
from pepbcd.core.theme import create_check_table
from pepbcd.runs.experiment import ExperimentConfig
from pepbcd.runs.output import output_path, write_json

console = Console()


class VerifyManager:
    def __init__(self, config: ExperimentConfig, blocks=(2, 3), cycles=(1, 2),
                 fault: Optional[str] = None, counterexample: Optional[str] = None):
        self.config = config.validate()
        self.blocks = tuple(blocks)
        self.cycles = tuple(cycles)
        self.fault = fault
        self.counterexample = counterexample

    def run(self) -> VerifySummary:
        console.print(f"[cyan]Running the verification suite on p in {list(self.blocks)}, "
                      f"K in {list(self.cycles)}...[/cyan]")
        with console.status("[bold]Solving check PEPs..."):
            summary = run_verify_suite(
                self.blocks, self.cycles, self.fault, self.counterexample, self.config.solver_options()
            )
        console.print(create_check_table(summary.checks))
        write_json(summary.to_dict(), output_path(self.config.out, "verify", ".json"))
        if summary.passed:
            console.print(f"[bold green]✓ All {len(summary.checks)} checks passed.[/bold green]")
        else:
            console.print(f"[bold red]✗ Failed checks: {', '.join(summary.failed)}[/bold red]")
        return summary
