"""Report assembly, JSON output and the console summary."""

import json
from collections import Counter
from pathlib import Path
from typing import Dict, List, Union

from rich import box
from rich.console import Console
from rich.table import Table

from src import __version__
from src.verification.scenario import Scenario

Record = Dict[str, object]

STATUS_STYLES = {"pass": "bold green", "fail": "bold red", "error": "bold yellow"}


def build_report(scenario: Scenario, records: List[Record]) -> Dict[str, object]:
    counts = Counter(record["status"] for record in records)
    if counts["error"]:
        status = "error"
    elif counts["fail"]:
        status = "fail"
    else:
        status = "pass"
    return {
        "scenario": scenario.name,
        "version": __version__,
        "ring": {"num_vars": scenario.ring.num_vars, "truncation": scenario.ring.truncation},
        "rank": scenario.bundle.rank,
        "checks": records,
        "summary": {"passed": counts["pass"], "failed": counts["fail"], "errors": counts["error"]},
        "status": status,
    }


def dump_report(report: Dict[str, object]) -> str:
    return json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_report(report: Dict[str, object], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_report(report), encoding="utf-8")
    return path


def exit_code(report: Dict[str, object]) -> int:
    """0 when everything passed, 1 on a failed check, 2 on an error."""
    return {"pass": 0, "fail": 1}.get(report["status"], 2)


def render_summary(report: Dict[str, object], console: Console) -> None:
    table = Table(title=f"Scenario {report['scenario']}", box=box.ROUNDED)
    table.add_column("Check", style="cyan")
    table.add_column("Status", justify="center")
    table.add_column("Order", justify="right")
    table.add_column("Witness", style="dim", overflow="fold")

    for record in report["checks"]:
        witness = record.get("witness")
        shown = ", ".join(f"{k}={v}" for k, v in sorted(witness.items())) if witness else ""
        style = STATUS_STYLES.get(record["status"], "white")
        table.add_row(
            record["name"],
            f"[{style}]{record['status'].upper()}[/{style}]",
            str(record["verified_order"]),
            shown,
        )

    console.print(table)
    summary = report["summary"]
    style = STATUS_STYLES.get(report["status"], "white")
    console.print(
        f"[{style}]{report['status'].upper()}[/{style}]  "
        f"{summary['passed']} passed, {summary['failed']} failed, {summary['errors']} errors"
    )
