import typer
import os
from contextlib import contextmanager
from typing import Optional
from rich.console import Console

# Internal Imports
from pepbcd.config import settings
from pepbcd.core.errors import ConstructionError, PepBcdError
from pepbcd.core.theme import print_banner, print_header, create_bound_table
from pepbcd.core.utils import parse_float_list, parse_int_list, parse_range
from pepbcd.database import init_db, engine, SessionLocal, BoundRecord
from pepbcd.runs.experiment import ExperimentConfig
from pepbcd.runs.bound import BoundManager
from pepbcd.runs.descent import DescentManager
from pepbcd.runs.racd import RacdCompareManager
from pepbcd.runs.verify import VerifyManager
from pepbcd.runs.export import ExportManager


app = typer.Typer(help="pepbcd - worst-case analysis of block coordinate descent", rich_markup_mode="rich")
console = Console()

# --- SHARED OPTIONS ---
OPT_CONFIG = typer.Option(None, "--config", "-c", help="JSON experiment config; flags override its values")
OPT_METHOD = typer.Option(None, "--method", "-m", help="ccd, cacd, am, custom, racd or rcd")
OPT_BLOCKS = typer.Option(None, "--blocks", "-p", help="Number of blocks p")
OPT_CYCLES = typer.Option(None, "--cycles", "-K", help="Number of cycles K (N = pK)")
OPT_STEPS = typer.Option(None, "--steps", "-N", help="Number of block steps N")
OPT_LIPSCHITZ = typer.Option(None, "--lipschitz", "-L", help="Block constants, e.g. 1,4")
OPT_GAMMA = typer.Option(None, "--gamma", help="Absolute block steps, e.g. 1,0.25")
OPT_GAMMA_REL = typer.Option(None, "--gamma-rel", help="Relative steps gamma_l * L_l (one value or one per block)")
OPT_ORDER = typer.Option(None, "--order", help="Block sequence, e.g. 1,2,1,2")
OPT_SETTING = typer.Option(None, "--setting", "-s", help="all, init, gradnorm or decrease")
OPT_RADIUS = typer.Option(None, "--radius", "-R", help="Setting radius (gradient level or budget for descent settings)")
OPT_CRITERION = typer.Option(None, "--criterion", help="gap, min-grad or decrease")
OPT_TOL = typer.Option(None, "--tol", help="Solver tolerance (default PEPBCD_SOLVER_TOL)")
OPT_SOLVER = typer.Option(None, "--solver", help="cvxpy solver name (default PEPBCD_SOLVER)")
OPT_OUT = typer.Option(None, "--out", "-o", help="Output path (suffix chosen by format)")
OPT_FORMAT = typer.Option(None, "--format", "-f", help="csv or json")
OPT_JOBS = typer.Option(None, "--jobs", "-j", help="Worker processes")


def _list(text, parse):
    return parse(text) if text else None


def build_config(config_path: Optional[str], command: str, **flags) -> ExperimentConfig:
    """Config document (or defaults) overlaid with the flags that were given."""
    base = ExperimentConfig.from_json(config_path) if config_path else ExperimentConfig()
    for name, parse in (("lipschitz", parse_float_list), ("gamma", parse_float_list),
                        ("gamma_rel", parse_float_list), ("order", parse_int_list)):
        if name in flags:
            flags[name] = _list(flags[name], parse)
    return base.merge(command=command, **flags).validate()


@contextmanager
def guard():
    """Known failures end the command with a red message and exit code 1."""
    try:
        yield
    except PepBcdError as e:
        console.print(f"[bold red]Error:[/bold red] {e}")
        raise typer.Exit(code=1)


# --- GLOBAL COMMANDS ---

@app.command()
def init():
    """Create the bound ledger."""
    print_banner()
    init_db()
    console.print(f"[bold green]Ledger ready at {settings.DATA_DIR / settings.DB_NAME}.[/bold green]")


@app.command()
def reset(
    force: bool = typer.Option(False, "--force", "-f", help="Skip confirmation prompt")
):
    """
    Wipe the bound ledger and start fresh.
    """
    db_path = settings.DATA_DIR / settings.DB_NAME

    if not force:
        delete = typer.confirm(f"This will permanently delete every recorded bound in {db_path}. Continue?")
        if not delete:
            console.print("[bold red]Aborted.[/bold red]")
            raise typer.Abort()

    if db_path.exists():
        engine.dispose()
        os.remove(db_path)
        console.print(f"[yellow]Deleted ledger: {db_path}[/yellow]")
    else:
        console.print("[yellow]No ledger found to delete.[/yellow]")

    init_db()
    console.print("[bold green]Reset complete. New ledger ready.[/bold green]")


@app.command()
def bound(
    config: str = OPT_CONFIG,
    method: str = OPT_METHOD,
    blocks: int = OPT_BLOCKS,
    cycles: int = OPT_CYCLES,
    steps: int = OPT_STEPS,
    lipschitz: str = OPT_LIPSCHITZ,
    gamma: str = OPT_GAMMA,
    gamma_rel: str = OPT_GAMMA_REL,
    order: str = OPT_ORDER,
    setting: str = OPT_SETTING,
    radius: float = OPT_RADIUS,
    criterion: str = OPT_CRITERION,
    include_start: Optional[bool] = typer.Option(None, "--include-start/--no-include-start",
                                                 help="Setting all: also bound the start point"),
    lower_bound: Optional[bool] = typer.Option(None, "--lower-bound/--no-lower-bound",
                                               help="Also solve the p x GD lower bound (setting init)"),
    tol: float = OPT_TOL,
    solver: str = OPT_SOLVER,
    out: str = OPT_OUT,
    export_sdpa: str = typer.Option(None, "--export-sdpa", help="Also write the problem as a .dat-s file"),
):
    """
    Compute one worst-case bound.

    Writes a JSON report and a CSV row, and appends the bound to the ledger.

    [bold]Examples:[/bold]
    pepbcd bound --method ccd --blocks 2 --cycles 1 --lipschitz 1,1 --setting init --radius 1
    pepbcd bound --method cacd --blocks 2 --order 1,2,1,2
    pepbcd bound --method racd --blocks 2 --steps 4
    """
    with guard():
        cfg = build_config(
            config, "bound", method=method, blocks=blocks, cycles=cycles, steps=steps, lipschitz=lipschitz,
            gamma=gamma, gamma_rel=gamma_rel, order=order, setting=setting, radius=radius, criterion=criterion,
            include_start=include_start, lower_bound=lower_bound, tol=tol, solver=solver, out=out,
            export_sdpa=export_sdpa,
        )
        report = BoundManager(cfg).run_bound()
    if not report.ok:
        raise typer.Exit(code=1)


@app.command()
def sweep(
    axis: str = typer.Option(None, "--axis", "-a", help="cycles, blocks, step-size or sequence"),
    values: str = typer.Option(None, "--range", "-r", help="1..6, 0.5:1.5:0.1 or a list 1,2,4"),
    config: str = OPT_CONFIG,
    method: str = OPT_METHOD,
    blocks: int = OPT_BLOCKS,
    cycles: int = OPT_CYCLES,
    steps: int = OPT_STEPS,
    lipschitz: str = OPT_LIPSCHITZ,
    gamma: str = OPT_GAMMA,
    gamma_rel: str = OPT_GAMMA_REL,
    setting: str = OPT_SETTING,
    radius: float = OPT_RADIUS,
    criterion: str = OPT_CRITERION,
    no_dedup: bool = typer.Option(False, "--no-dedup", help="Sequence axis: keep relabeled duplicates"),
    cap: int = typer.Option(None, "--cap", help="Sequence axis: largest p^N to enumerate"),
    refine: bool = typer.Option(False, "--refine", help="Step-size axis: refine the best CCD step (setting init)"),
    tol: float = OPT_TOL,
    solver: str = OPT_SOLVER,
    out: str = OPT_OUT,
    format: str = OPT_FORMAT,
    jobs: int = OPT_JOBS,
):
    """
    Sweep bounds along one axis.

    Points are solved in a worker pool and written in input order; failed points keep
    their solver status in the table.

    [bold]Examples:[/bold]
    pepbcd sweep --axis cycles --range 1..6 --method ccd --blocks 2 --setting init
    pepbcd sweep --axis step-size --range 0.5:1.5:0.1 --blocks 3 --cycles 1 --jobs 4
    pepbcd sweep --axis step-size --range 0.5:1.2:0.05 --blocks 2 --cycles 3 --refine
    """
    with guard():
        cfg = build_config(
            config, "sweep", sweep_axis=axis, sweep_range=parse_range(values) if values else None,
            method=method, blocks=blocks, cycles=cycles, steps=steps, lipschitz=lipschitz, gamma=gamma,
            gamma_rel=gamma_rel, setting=setting, radius=radius, criterion=criterion,
            dedup=False if no_dedup else None, cap=cap, tol=tol, solver=solver, out=out, format=format, jobs=jobs,
        )
        if cfg.sweep_axis is None:
            raise ConstructionError("Choose a sweep axis with --axis")
        if refine and cfg.sweep_axis == "step-size":
            BoundManager(cfg).run_step_search()
            return
        reports = BoundManager(cfg).run_sweep()
    if any(not r.ok for r in reports):
        raise typer.Exit(code=1)


@app.command("descent-lemma")
def descent_lemma(
    config: str = OPT_CONFIG,
    blocks: int = OPT_BLOCKS,
    lipschitz: str = OPT_LIPSCHITZ,
    cycles: int = typer.Option(None, "--cycles", "-K", help="Length of the per-cycle bound table (default 10)"),
    radius: float = OPT_RADIUS,
    tol: float = OPT_TOL,
    solver: str = OPT_SOLVER,
    out: str = OPT_OUT,
    format: str = OPT_FORMAT,
):
    """
    Optimal one-cycle descent constant and the per-cycle bounds it yields.

    [bold]Example:[/bold]
    pepbcd descent-lemma --blocks 2 --lipschitz 1,1 --cycles 10
    """
    with guard():
        cfg = build_config(
            config, "descent-lemma", method="ccd", blocks=blocks, lipschitz=lipschitz, cycles=cycles,
            radius=radius, tol=tol, solver=solver, out=out, format=format,
        )
        print_header("Descent lemma", f"p={cfg.blocks}, L={cfg.lipschitz_vector()}")
        DescentManager(cfg).run()


@app.command("racd-compare")
def racd_compare(
    config: str = OPT_CONFIG,
    blocks: int = OPT_BLOCKS,
    steps: int = typer.Option(None, "--steps", "-N", help="Sequence length N (default 4)"),
    lipschitz: str = OPT_LIPSCHITZ,
    radius: float = OPT_RADIUS,
    no_dedup: bool = typer.Option(False, "--no-dedup", help="Keep sequences that only differ by relabeling blocks"),
    cap: int = typer.Option(None, "--cap", help="Largest p^N to enumerate (default PEPBCD_RACD_CAP)"),
    tol: float = OPT_TOL,
    solver: str = OPT_SOLVER,
    out: str = OPT_OUT,
    format: str = OPT_FORMAT,
    jobs: int = OPT_JOBS,
):
    """
    Every deterministic accelerated block sequence against the random choice.

    [bold]Example:[/bold]
    pepbcd racd-compare --blocks 2 --steps 4
    """
    with guard():
        cfg = build_config(
            config, "racd-compare", method="cacd", blocks=blocks, steps=steps, lipschitz=lipschitz,
            radius=radius, dedup=False if no_dedup else None, cap=cap, tol=tol, solver=solver, out=out,
            format=format, jobs=jobs,
        )
        manager = RacdCompareManager(cfg)
        print_header("Sequence comparison", f"p={cfg.blocks}, N={manager.steps}")
        reports, _ = manager.run()
    if any(not r.ok for r in reports):
        raise typer.Exit(code=1)


@app.command()
def verify(
    config: str = OPT_CONFIG,
    blocks: str = typer.Option("2,3", "--blocks", "-p", help="Block counts to check"),
    cycles: str = typer.Option("1,2", "--cycles", "-K", help="Cycle counts to check"),
    counterexample: str = typer.Option(None, "--counterexample", help="JSON triplet set for the pairwise check"),
    inject_fault: str = typer.Option(None, "--inject-fault", hidden=True),
    tol: float = OPT_TOL,
    solver: str = OPT_SOLVER,
    out: str = OPT_OUT,
):
    """
    Run the verification suite: scale invariance, sandwich, two-block descent,
    residual bound and the counterexample check. Exits 1 on any failure.

    [bold]Example:[/bold]
    pepbcd verify --blocks 2,3 --cycles 1,2
    """
    with guard():
        cfg = build_config(config, "verify", tol=tol, solver=solver, out=out)
        summary = VerifyManager(
            cfg, parse_int_list(blocks), parse_int_list(cycles), inject_fault, counterexample
        ).run()
    if not summary.passed:
        raise typer.Exit(code=1)


@app.command()
def export(
    config: str = OPT_CONFIG,
    method: str = OPT_METHOD,
    blocks: int = OPT_BLOCKS,
    cycles: int = OPT_CYCLES,
    steps: int = OPT_STEPS,
    lipschitz: str = OPT_LIPSCHITZ,
    gamma: str = OPT_GAMMA,
    gamma_rel: str = OPT_GAMMA_REL,
    order: str = OPT_ORDER,
    setting: str = OPT_SETTING,
    radius: float = OPT_RADIUS,
    criterion: str = OPT_CRITERION,
    out: str = OPT_OUT,
    export_sdpa: str = typer.Option(None, "--export-sdpa", help="Target .dat-s file"),
):
    """
    Write the PEP of a method as a sparse SDPA file.

    [bold]Examples:[/bold]
    pepbcd export --method ccd --blocks 2 --cycles 1
    pepbcd export --method am --blocks 2 --cycles 1 --setting all
    pepbcd export --method racd --blocks 2 --steps 4 --export-sdpa racd.dat-s
    """
    with guard():
        cfg = build_config(
            config, "export", method=method, blocks=blocks, cycles=cycles, steps=steps, lipschitz=lipschitz,
            gamma=gamma, gamma_rel=gamma_rel, order=order, setting=setting, radius=radius, criterion=criterion,
            out=out, export_sdpa=export_sdpa,
        )
        ExportManager(cfg).run()


@app.command()
def status():
    """
    Show ledger statistics and the most recent bounds.
    """
    from rich.table import Table
    from sqlalchemy import func

    print_banner()
    init_db()
    db = SessionLocal()

    stats = db.query(
        BoundRecord.kind,
        func.count(BoundRecord.id),
        func.avg(BoundRecord.solve_seconds)
    ).group_by(BoundRecord.kind).all()

    if not stats:
        console.print("[yellow]The ledger is empty. Run [green]pepbcd bound[/green] first.[/yellow]")
        return

    table = Table(title="═══ BOUNDS BY METHOD ═══", border_style="cyan", header_style="bold cyan")
    table.add_column("METHOD", style="cyan")
    table.add_column("COUNT", style="green", justify="right")
    table.add_column("AVG SECONDS", style="dim", justify="right")
    for kind, count, seconds in stats:
        table.add_row(kind or "-", str(count), f"{seconds or 0.0:.3f}")
    console.print(table)

    recent = db.query(BoundRecord).order_by(BoundRecord.timestamp.desc()).limit(5).all()
    console.print("\n[bold cyan]>>> RECENT BOUNDS[/bold cyan]")
    for r in recent:
        style = "dim" if r.solver_status == "optimal" else "red"
        value = f"{r.value:.6g}" if r.value is not None else "-"
        console.print(f"  [{r.command}] {r.method} {r.setting} -> {value} ({r.solver_status})", style=style,
                      markup=False)


@app.command()
def history(
    limit: int = typer.Option(20, help="Rows to show"),
    method: str = typer.Option(None, "--method", "-m", help="Filter by method kind"),
    format: str = typer.Option(None, "--format", "-f", help="Export all matching rows as csv or json"),
    output: str = typer.Option(None, "--output", help="Export file path"),
):
    """
    List or export recorded bounds.

    [bold]Examples:[/bold]
    pepbcd history --limit 10
    pepbcd history --method ccd --format csv --output ccd.csv
    """
    import pandas as pd
    from pathlib import Path
    from datetime import datetime

    init_db()
    db = SessionLocal()
    query = db.query(BoundRecord)
    if method:
        query = query.filter(BoundRecord.kind == method)
    query = query.order_by(BoundRecord.timestamp.desc())

    if format:
        if format not in ("csv", "json"):
            console.print(f"[red]Unknown format '{format}'. Use csv or json.[/red]")
            raise typer.Exit(code=1)
        rows = [r.to_dict() for r in query.all()]
        if not rows:
            console.print("[yellow]No data to export.[/yellow]")
            return
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        path = Path(output) if output else settings.DATA_DIR / f"history_{timestamp}.{format}"
        df = pd.DataFrame(rows)
        if format == "json":
            df.to_json(path, orient="records", indent=2)
        else:
            df.to_csv(path, index=False)
        console.print(f"[green]Exported {len(rows)} bounds to {path}[/green]")
        return

    records = query.limit(limit).all()
    if not records:
        console.print("[yellow]No bounds recorded yet.[/yellow]")
        return
    rows = [{
        "method": r.method,
        "setting": r.setting,
        "L": r.L,
        "bound": r.value if r.value is not None else float("nan"),
        "solver_status": r.solver_status,
        "solve_seconds": r.solve_seconds or 0.0,
    } for r in records]
    console.print(create_bound_table(rows, title="═══ LEDGER ═══"))


if __name__ == "__main__":
    app()
