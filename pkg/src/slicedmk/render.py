"""Rich tables and panels for suite results, experiments and the run history."""

from rich.console import Console, Group
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

from .barycenter import BarycenterResult
from .empirics import RateRecord, SeparationTable, SlopeFit
from .ledger import RunLedger
from .smk import SlicedDistanceReport
from .sphere import format_q
from .suites import SuiteResult


def _verdict(passed: bool | None) -> str:
    if passed is None:
        return "[dim]-[/]"
    return "[green]✓ PASS[/]" if passed else "[red]✗ FAIL[/]"


def _number(value: float | None) -> str:
    return "-" if value is None else f"{value:.6g}"


def render_suite(result: SuiteResult) -> Panel:
    """Render one verification suite as a table of checks.

    Returns:
        Panel titled with the suite name and overall verdict
    """
    table = Table(show_header=True, header_style="bold cyan")
    table.add_column("Check")
    table.add_column("Value", justify="right")
    table.add_column("Threshold", style="dim")
    table.add_column("Status")

    for row in result.rows:
        status = "[dim]info[/]" if row.threshold == "info" else _verdict(row.passed)
        table.add_row(row.check, _number(float(row.value)), row.threshold, status)

    border = "green" if result.passed else "red"
    title = f"[bold]{result.name}[/] {_verdict(result.passed)}"
    return Panel(table, title=title, border_style=border)


def render_distance(report: SlicedDistanceReport) -> Panel:
    table = Table(show_header=False, box=None, padding=(0, 1))
    table.add_column("Metric", style="cyan")
    table.add_column("Value", justify="right", style="green bold")
    table.add_row("MK_{p,q}", f"{report.aggregate:.10g}")
    table.add_row("p", f"{report.p:g}")
    table.add_row("q", str(format_q(report.q)))
    table.add_row("directions", report.dirset_id)
    if report.standard_error:
        table.add_row("MC std. error", f"{report.standard_error:.3g}")
    if report.refined:
        table.add_row("refined", "golden-section")
    return Panel(table, title="[bold]Sliced distance", border_style="blue")


def render_rates(records: list[RateRecord], fits: dict[str, SlopeFit]) -> Panel:
    table = Table(show_header=True, header_style="bold cyan")
    table.add_column("N", justify="right")
    table.add_column("Statistic", style="dim")
    table.add_column("Mean", justify="right")
    table.add_column("Std. error", justify="right")
    table.add_column("Bound", justify="right")
    table.add_column("Status")
    for r in records:
        table.add_row(str(r.N), r.statistic_id, _number(r.mean), _number(r.std_error),
                      _number(r.bound), _verdict(r.passed))

    lines = [
        Text(f"{name}: slope {fit.slope:.3f} ± {fit.stderr:.3f}, constant {fit.constant:.3g}")
        for name, fit in fits.items()
    ]
    return Panel(Group(table, *lines), title="[bold]Sampling rates", border_style="magenta")


def render_separation(result: SeparationTable) -> Panel:
    table = Table(show_header=True, header_style="bold cyan")
    table.add_column("N", justify="right")
    table.add_column("Classical", justify="right")
    table.add_column("Sliced", justify="right")
    table.add_column("Ratio", justify="right", style="yellow")
    for row in result.rows:
        table.add_row(str(row.N), _number(row.classical.mean), _number(row.sliced.mean),
                      _number(row.ratio))
    summary = Text.assemble(
        f"classical slope {result.classical_fit.slope:.3f}, ",
        f"sliced slope {result.sliced_fit.slope:.3f}, ",
        f"ratio increasing: {result.ratio_increasing}\n",
        ("Numerical evidence only.", "dim"),
    )
    return Panel(Group(table, summary), title="[bold]Rate separation", border_style="magenta")


def render_barycenter(result: BarycenterResult) -> Panel:
    table = Table(show_header=True, header_style="bold cyan")
    table.add_column("#", justify="right", style="dim")
    table.add_column("Atom")
    for index, point in enumerate(result.measure.points):
        table.add_row(str(index), "(" + ", ".join(f"{x:.6g}" for x in point) + ")")
    footer = Text(
        f"objective {result.objective:.8g} after {len(result.trace)} iterations"
        + (" (plateau)" if result.converged else "")
    )
    return Panel(Group(table, footer), title="[bold]Barycenter", border_style="green")


class HistoryView:
    """Snapshot of the run ledger: recent runs and recent errors."""

    def __init__(self, ledger: RunLedger, console: Console | None = None):
        self.ledger = ledger
        self.console = console or Console()

    def render_runs(self, limit: int = 20) -> Panel:
        runs = self.ledger.get_recent_runs(limit)

        table = Table(show_header=True, header_style="bold cyan")
        table.add_column("Run", justify="right", style="dim")
        table.add_column("Started", style="dim")
        table.add_column("Command")
        table.add_column("Seed", justify="right")
        table.add_column("Exit", justify="right")

        for run in runs:
            code = run["exit_code"]
            style = "green" if code == 0 else ("yellow" if code is None else "red")
            table.add_row(str(run["id"]), str(run["started_at"]), run["command"],
                          str(run["seed"]), f"[{style}]{'-' if code is None else code}[/]")

        if not runs:
            table.add_row("", "", "[dim]No runs recorded[/]", "", "")

        return Panel(table, title="[bold]Recent Runs", border_style="blue")

    def render_errors(self, limit: int = 5) -> Panel:
        errors = self.ledger.get_recent_errors(limit)

        table = Table(show_header=True, header_style="bold cyan")
        table.add_column("Time", style="dim")
        table.add_column("Type", style="yellow")
        table.add_column("Message", style="red", no_wrap=False)

        for error in errors:
            message = error["error_message"]
            if len(message) > 60:
                message = message[:60] + "..."
            table.add_row(str(error["timestamp"]), error["error_type"], message)

        if not errors:
            table.add_row("", "[dim green]No recent errors[/]", "")

        return Panel(table, title="[bold]Recent Errors", border_style="red")

    def show(self, limit: int = 20, errors: bool = True) -> None:
        self.console.print(self.render_runs(limit))
        if errors:
            self.console.print(self.render_errors())
