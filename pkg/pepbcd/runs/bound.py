from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import replace
from typing import Optional

import numpy as np
from rich.console import Console
from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn

from pepbcd.analysis.studies import (
    BoundReport,
    LinearFit,
    StepSearchResult,
    enumerate_sequences,
    linear_fit,
    optimal_step_search,
    reports_frame,
    worst_case,
    worst_case_random,
)
from pepbcd.core.errors import ConstructionError
from pepbcd.core.theme import create_bound_table, print_status_line
from pepbcd.core.utils import logger
from pepbcd.database import SessionLocal, init_db, record_report
from pepbcd.runs.experiment import RANDOM_METHODS, ExperimentConfig
from pepbcd.runs.output import output_path, write_json, write_table

console = Console()


def solve_config(config: ExperimentConfig, export_path=None) -> BoundReport:
    """One bound for one config; solver trouble comes back as the report status."""
    L = config.lipschitz_vector()
    options = config.solver_options()
    if config.is_random:
        rel = [float(g) for g in (config.gamma_rel or [1.0])]
        return worst_case_random(
            config.blocks, config.n_steps, L, config.radius, config.probabilities,
            RANDOM_METHODS[config.method], rel[0] if len(rel) == 1 else rel,
            options, strict=False, export_path=export_path,
        )
    return worst_case(
        config.method_spec(), config.setting_obj(), L, config.criterion_obj(), options,
        lower_bound=config.lower_bound, strict=False, export_path=export_path,
    )


@contextmanager
def pool(jobs: int):
    """executor.map when jobs > 1 (results keep input order), plain map otherwise."""
    if jobs <= 1:
        yield map
        return
    with ProcessPoolExecutor(max_workers=jobs) as executor:
        yield executor.map


class BoundManager:
    def __init__(self, config: ExperimentConfig):
        self.config = config.validate()
        init_db()
        self.db = SessionLocal()

    def _record(self, reports, command: str):
        for report in reports:
            record_report(self.db, report, command)
        self.db.commit()

    def run_bound(self) -> BoundReport:
        config = self.config
        console.print(f"[cyan]Solving {config.method} PEP (p={config.blocks}, N={config.n_steps}, "
                      f"setting {config.setting})...[/cyan]")
        with console.status("[bold]Solving..."):
            report = solve_config(config, export_path=config.export_sdpa)
        if config.export_sdpa:
            console.print(f"[dim]SDPA export: {config.export_sdpa}[/dim]")
        self._record([report], "bound")

        write_json(report.to_dict(), output_path(config.out, "bound", ".json"))
        write_table(reports_frame([report]), config.out, "bound", "csv")
        console.print(create_bound_table([report.to_row()]))
        if not report.ok:
            console.print(f"[red]Solver finished with status {report.status}.[/red]")
        return report

    def sweep_configs(self) -> list[ExperimentConfig]:
        config = self.config
        axis, values = config.sweep_axis, config.sweep_range or []
        if axis == "cycles":
            return [replace(config, cycles=int(v), steps=None, order=None) for v in values]
        if axis == "blocks":
            # lipschitz and step vectors are per block; the sweep falls back to unit L
            rel = config.gamma_rel if config.gamma_rel and len(config.gamma_rel) == 1 else None
            return [replace(config, blocks=int(v), lipschitz=None, gamma=None, gamma_rel=rel, order=None)
                    for v in values]
        if axis == "step-size":
            return [replace(config, gamma_rel=[float(v)], gamma=None) for v in values]
        if axis == "sequence":
            sequences = enumerate_sequences(
                config.blocks, config.n_steps, config.dedup, config.lipschitz_vector(), config.cap
            )
            return [config.merge(order=list(seq)) for seq, _ in sequences]
        raise ConstructionError(f"No sweep axis configured (got {axis!r})")

    def run_sweep(self) -> list[BoundReport]:
        configs = self.sweep_configs()
        console.print(f"[cyan]Sweeping {self.config.sweep_axis} over {len(configs)} points "
                      f"with {self.config.jobs} worker(s)...[/cyan]")
        reports = []
        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            BarColumn(),
            TextColumn("{task.completed}/{task.total}"),
            console=console,
        ) as progress:
            task = progress.add_task("[blue]Solving PEPs...", total=len(configs))
            with pool(self.config.jobs) as mapper:
                for report in mapper(solve_config, configs):
                    reports.append(report)
                    progress.advance(task)

        self._record(reports, "sweep")
        df = reports_frame(reports)
        if self.config.sweep_axis == "cycles":
            df["K_times_bound"] = df["K"] * df["bound"]
        write_table(df, self.config.out, f"sweep-{self.config.sweep_axis}", self.config.format)
        console.print(create_bound_table([r.to_row() for r in reports], title="═══ SWEEP ═══"))
        self._write_fit(reports)

        failed = [r for r in reports if not r.ok]
        if failed:
            logger.warning(f"{len(failed)} of {len(reports)} sweep points did not solve")
        return reports

    def _write_fit(self, reports: list[BoundReport]) -> Optional[LinearFit]:
        """Rate fit of a cycles or blocks sweep: 1/bound against K, bound against p."""
        axis = self.config.sweep_axis
        if axis not in ("cycles", "blocks"):
            return None
        solved = [r for r in reports if r.ok and np.isfinite(r.value)]
        if len(solved) < 2:
            logger.warning(f"Not enough solved points to fit the {axis} sweep")
            return None
        xs = [r.K if axis == "cycles" else r.p for r in solved]
        fit = linear_fit(xs, [r.value for r in solved], reciprocal=axis == "cycles")
        write_json(
            {"axis": axis, "fit": fit.to_dict(), "points": len(solved)},
            output_path(self.config.out, f"sweep-{axis}", ".summary.json"),
        )
        label = "1/bound vs K" if fit.reciprocal else "bound vs p"
        print_status_line(f"Fit {label}", f"slope {fit.slope:.4g}, R² {fit.r2:.4f}")
        return fit

    def run_step_search(self) -> StepSearchResult:
        """
        CCD step-size sweep under setting init with a refined minimizer. By scale
        invariance the search runs on unit L; relative step vectors give the direction.
        """
        config = self.config
        if config.method != "ccd" or config.setting != "init" or config.criterion != "gap":
            raise ConstructionError("The refined step search needs --method ccd --setting init --criterion gap")
        direction = config.gamma_rel if config.gamma_rel and len(config.gamma_rel) == config.blocks else None
        K = config.cycles or 1
        console.print(f"[cyan]Searching the best relative step for p={config.blocks}, K={K} "
                      f"over {len(config.sweep_range)} grid points...[/cyan]")
        with console.status("[bold]Solving step-size PEPs..."), pool(config.jobs) as mapper:
            result = optimal_step_search(
                config.blocks, K, config.sweep_range, direction=direction, radius=config.radius,
                options=config.solver_options(), mapper=mapper,
            )
        write_table(result.table, config.out, "step-search", config.format)
        write_json(result.to_dict(), output_path(config.out, "step-search", ".summary.json"))
        print_status_line("gamma*", f"{result.gamma_star:.4f}")
        print_status_line("Bound at gamma*", f"{result.value_star:.6g}")
        return result
