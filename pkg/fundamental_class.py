import argparse
import logging
import sys
from typing import List, Optional

from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.table import Table
from rich import box

from src import __version__
from src.errors import FundamentalClassError, Inconsistent, ParseError, ScenarioError
from src.geometry.connections import chern_form_top, curvature_R
from src.geometry.twisted import (
    RealSection,
    build_dbar_connection,
    build_twist,
    psi_and_trace,
    superconnection_A,
)
from src.verification import (
    ScenarioCatalog,
    build_report,
    exit_code,
    load_scenario,
    render_summary,
    run,
    write_report,
)
from src.verification.scenario import ALLOWED_CHECKS, Scenario

console = Console()
logger = logging.getLogger("fundamental_class")

EXIT_ERROR = 2


def configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), rich_tracebacks=True, show_path=False)],
        force=True,
    )


def banner() -> None:
    console.print(Panel.fit(
        f"[bold cyan]FUNDAMENTAL CLASS VERIFIER[/bold cyan]\n[dim]v{__version__}[/dim]",
        subtitle="exact arithmetic over truncated series", border_style="cyan"
    ))


def load(config: str, truncation: Optional[int], checks: Optional[List[str]] = None) -> Scenario:
    return load_scenario(ScenarioCatalog.resolve(config), truncation, checks)


def report_load_error(exc: FundamentalClassError) -> int:
    if isinstance(exc, ScenarioError):
        console.print("[bold red]Scenario rejected:[/bold red]")
        for problem in exc.problems:
            console.print(f"  [red]-[/red] {problem}")
    else:
        console.print(f"[bold red]ERROR:[/bold red] {exc}")
    return EXIT_ERROR


def command_verify(args: argparse.Namespace) -> int:
    try:
        scenario = load(args.config, args.truncation, args.check)
    except (ScenarioError, ParseError) as exc:
        return report_load_error(exc)

    banner()
    console.print(f"[dim]{scenario.name}: n={scenario.ring.num_vars}, D={scenario.ring.truncation}, "
                  f"rank={scenario.bundle.rank}[/dim]")
    records = run(scenario, args.check, timings=args.timings, console=console)
    report = build_report(scenario, records)
    render_summary(report, console)

    destination = args.report or scenario.report
    if destination:
        path = write_report(report, destination)
        console.print(f"[dim]Report written to {path}[/dim]")
    return exit_code(report)


def emit_chern(scenario: Scenario) -> List[str]:
    """det R and, when the twisted pipeline applies, tr_s(ψ).

    Raises:
        NotFlat: the connection is not flat
    """
    lines = [f"det R = {chern_form_top(curvature_R(scenario.connection))}"]
    if len(scenario.ideal.vars) != scenario.bundle.rank:
        return lines
    try:
        section = RealSection.build(scenario.bundle, scenario.tau, scenario.ideal, scenario.certificate)
        twist = build_twist(section, build_dbar_connection(section))
    except Inconsistent as exc:
        logger.warning("twisted pipeline unavailable: %s", exc)
        return lines
    trace = psi_and_trace(superconnection_A(twist, scenario.connection))
    lines.append(f"tr_s(psi) = {trace.psi.supertrace()}")
    return lines


def command_chern(args: argparse.Namespace) -> int:
    try:
        scenario = load(args.config, args.truncation)
        lines = emit_chern(scenario)
    except FundamentalClassError as exc:
        return report_load_error(exc)
    for line in lines:
        console.print(line, markup=False, highlight=False, soft_wrap=True)
    return 0


def command_list(args: argparse.Namespace) -> int:
    entries = ScenarioCatalog.get_scenarios_by_tag(args.tag) if args.tag else ScenarioCatalog.list_all_scenarios()
    table = Table(title="Bundled scenarios", box=box.ROUNDED)
    table.add_column("Id", style="cyan")
    table.add_column("Checks", style="magenta")
    table.add_column("Tags", style="dim")
    table.add_column("Description")
    for entry in entries:
        table.add_row(entry["id"], ", ".join(entry["checks"]), ", ".join(entry["tags"]), entry["description"])
    console.print(table)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fundamental_class",
        description="Verify Koszul and twisted representatives of the fundamental class of Z = {tau = 0}.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG logging")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    verify = commands.add_parser("verify", help="run check groups and write a report")
    verify.add_argument("--config", required=True, help="scenario file or bundled scenario id")
    verify.add_argument("--check", action="append", choices=ALLOWED_CHECKS,
                        help="check group to run (repeatable); defaults to the scenario's list")
    verify.add_argument("--report", help="report path; overrides scenario.report")
    verify.add_argument("--truncation", type=int, help="override ring.truncation")
    verify.add_argument("--timings", action="store_true", help="add wall time and memory to every record")
    verify.set_defaults(handler=command_verify)

    chern = commands.add_parser("chern", help="print det R and tr_s(psi)")
    chern.add_argument("--config", required=True, help="scenario file or bundled scenario id")
    chern.add_argument("--truncation", type=int, help="override ring.truncation")
    chern.set_defaults(handler=command_chern)

    listing = commands.add_parser("list", help="show the bundled scenarios")
    listing.add_argument("--tag", help="only scenarios with this tag")
    listing.set_defaults(handler=command_list)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    if getattr(args, "truncation", None) is not None and args.truncation < 0:
        console.print("[bold red]ERROR: --truncation must be >= 0[/bold red]")
        return EXIT_ERROR
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
