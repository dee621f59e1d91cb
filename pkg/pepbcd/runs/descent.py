import pandas as pd
from rich.console import Console
from rich.table import Table

from pepbcd.analysis.closed_form import beck_descent_constant, semi_analytic_bound
from pepbcd.analysis.studies import descent_lemma_constant
from pepbcd.core.theme import print_status_line
from pepbcd.runs.experiment import ExperimentConfig
from pepbcd.runs.output import output_path, write_json, write_table

console = Console()


class DescentManager:
    """Optimal one-cycle descent constant and the per-cycle bounds it implies."""

    def __init__(self, config: ExperimentConfig):
        self.config = config.validate()

    def run(self) -> tuple[float, pd.DataFrame]:
        config = self.config
        L = config.lipschitz_vector()
        K = config.cycles or 10
        with console.status(f"[bold]Solving the descent PEP for p={config.blocks}, L={L}..."):
            c_opt = descent_lemma_constant(config.blocks, L, config.solver_options())
        c_beck = beck_descent_constant(config.blocks, L)

        table = pd.DataFrame({
            "k": list(range(1, K + 1)),
            "bound": semi_analytic_bound(c_opt, config.blocks, K, L, config.radius),
            "bound_beck_constant": semi_analytic_bound(c_beck, config.blocks, K, L, config.radius),
        })

        print_status_line("Optimal descent constant C_opt", f"{c_opt:.6f}")
        print_status_line("Closed-form constant", f"{c_beck:.6f}")
        view = Table(title="═══ PER-CYCLE BOUNDS ═══", title_style="bold cyan", border_style="cyan")
        for col in table.columns:
            view.add_column(col, justify="right")
        for row in table.itertuples(index=False):
            view.add_row(str(row.k), f"{row.bound:.6g}", f"{row.bound_beck_constant:.6g}")
        console.print(view)

        write_table(table, config.out, "descent-lemma", config.format)
        write_json(
            {"p": config.blocks, "L": list(L.values), "R": config.radius, "C_opt": c_opt, "C_closed_form": c_beck},
            output_path(config.out, "descent-lemma", ".summary.json"),
        )
        return c_opt, table
