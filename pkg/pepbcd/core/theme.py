"""
Console presentation helpers: banner, section headers, status lines and tables.
"""

import math
from datetime import datetime

from rich.console import Console
from rich.table import Table

console = Console()

PEPBCD_BANNER = """
╔═══════════════════════════════════════════════════════════════════════════════╗
║                                                                               ║
║   ██████╗ ███████╗██████╗       ██████╗  ██████╗██████╗                       ║
║   ██╔══██╗██╔════╝██╔══██╗      ██╔══██╗██╔════╝██╔══██╗                      ║
║   ██████╔╝█████╗  ██████╔╝█████╗██████╔╝██║     ██║  ██║                      ║
║   ██╔═══╝ ██╔══╝  ██╔═══╝ ╚════╝██╔══██╗██║     ██║  ██║                      ║
║   ██║     ███████╗██║           ██████╔╝╚██████╗██████╔╝                      ║
║   ╚═╝     ╚══════╝╚═╝           ╚═════╝  ╚═════╝╚═════╝                       ║
║                                                                               ║
║          W O R S T - C A S E   B C D   A N A L Y S I S                        ║
║                                                                               ║
╚═══════════════════════════════════════════════════════════════════════════════╝
"""


def print_banner():
    console.print(PEPBCD_BANNER, style="bold cyan")


def print_header(title: str, subtitle: str = None):
    """Boxed section header; the subtitle defaults to the current time."""
    timestamp = datetime.now().strftime("%Y-%m-%d %H:%M:%S")
    header = f"""
╔{'═' * 78}╗
║  {title.upper():<74}  ║
║  {'─' * 74}  ║
║  {(subtitle or timestamp)[:74]:<74}  ║
╚{'═' * 78}╝
"""
    console.print(header, style="cyan")


def print_status_line(label: str, value: str, status: str = "OK"):
    """Status line like old terminals: [  OK  ] label  value."""
    status_style = "green" if status == "OK" else "yellow" if status == "WARN" else "red"
    console.print(f"  [{status:^6}] {label:<40} {value}", style=status_style, markup=False, highlight=False)


def _fmt(value, digits: int = 6) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "-"
    if isinstance(value, float):
        return f"{value:.{digits}g}"
    return str(value)


def create_bound_table(rows: list, title: str = "═══ WORST-CASE BOUNDS ═══") -> Table:
    """Table of BoundReport rows (dicts from BoundReport.to_row)."""
    table = Table(
        title=title,
        title_style="bold cyan",
        border_style="cyan",
        header_style="bold cyan",
        show_lines=False,
    )
    table.add_column("METHOD", style="white")
    table.add_column("SETTING", style="dim")
    table.add_column("L", style="dim")
    table.add_column("BOUND", style="bold green", justify="right")
    table.add_column("COMPARATOR", style="yellow", justify="right")
    table.add_column("STATUS")
    table.add_column("SECONDS", style="dim", justify="right")

    for row in rows:
        comparator = next(
            (f"{name}={_fmt(row[name], 5)}" for name in ("beck_bound", "am_bound", "racd_bound", "lower_bound")
             if row.get(name) is not None and not _isnan(row.get(name))),
            "-",
        )
        ok = row["solver_status"] in ("optimal", "inaccurate")
        table.add_row(
            row["method"],
            row["setting"],
            row["L"],
            _fmt(row["bound"]),
            comparator,
            row["solver_status"],
            _fmt(row["solve_seconds"], 3),
            style=None if ok else "red",
        )
    return table


def _isnan(value) -> bool:
    return isinstance(value, float) and math.isnan(value)


def create_check_table(checks: list) -> Table:
    """Verification suite results."""
    table = Table(title="═══ VERIFICATION ═══", title_style="bold cyan", border_style="cyan",
                  header_style="bold cyan")
    table.add_column("CHECK")
    table.add_column("VALUE", justify="right")
    table.add_column("THRESHOLD", justify="right", style="dim")
    table.add_column("RESULT")
    for check in checks:
        result = "[green]PASS[/green]" if check.passed else "[red]FAIL[/red]"
        if check.scope:
            result += f" [dim]({check.scope})[/dim]"
        table.add_row(check.name, _fmt(check.value), _fmt(check.threshold), result)
    return table
