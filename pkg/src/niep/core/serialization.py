"""
JSON and rich text rendering of reports.

JSON keeps the model field order and never sorts keys, so identical runs
give byte-identical output. The text form draws each matrix and block as a
rich table.
"""

import json
from typing import Any, Optional, Sequence

from rich.console import Console, Group
from rich.panel import Panel
from rich.table import Table

from niep.core.result_models import (
    ConditionReport,
    CorpusSummary,
    RunReport,
    VerificationReport,
)


def report_to_dict(report: RunReport) -> dict[str, Any]:
    """Plain dict of a run report in its fixed key order."""
    return report.model_dump(exclude_none=True)


def to_json(payload: Any) -> str:
    """Serialize a report or plain data deterministically (two-space indent, unsorted keys)."""
    if hasattr(payload, "model_dump"):
        payload = payload.model_dump(exclude_none=True)
    return json.dumps(payload, indent=2, sort_keys=False, ensure_ascii=False)


# ===== Tables =====


def matrix_table(title: str, rows: Sequence[Sequence[str]]) -> Table:
    table = Table(title=title, show_header=False, box=None, pad_edge=False)
    for _ in range(len(rows[0]) if rows else 0):
        table.add_column(justify="right")
    for row in rows:
        table.add_row(*row)
    return table


def _mark(value: Optional[bool]) -> str:
    if value is None:
        return "[dim]n/a[/dim]"
    return "[green]✓[/green]" if value else "[red]✗[/red]"


def conditions_table(conditions: ConditionReport) -> Table:
    table = Table(title="Necessary conditions", show_header=True, header_style="bold cyan")
    table.add_column("Check")
    table.add_column("Result", justify="center")
    table.add_column("Detail")
    table.add_row("Perron", _mark(conditions.perron_ok), conditions.perron_witness or "")
    power_detail = ", ".join(conditions.power_sums)
    if conditions.power_sum_failure is not None:
        power_detail = f"s{conditions.power_sum_failure} < 0"
    table.add_row("Power sums", _mark(conditions.power_sums_ok), power_detail)
    jll_detail = ""
    if conditions.jll_failure is not None:
        k, m = conditions.jll_failure
        jll_detail = f"fails at k={k}, m={m}"
    table.add_row("JLL", _mark(conditions.jll_ok), jll_detail)
    return table


def verification_table(verification: VerificationReport) -> Table:
    table = Table(title="Verification", show_header=True, header_style="bold cyan")
    table.add_column("Check")
    table.add_column("Result", justify="center")
    table.add_column("Detail")
    table.add_row("C ≥ 0", _mark(verification.nonnegative), verification.violation or "")
    table.add_row("L·A·L⁻¹ = C", _mark(verification.reconstruction_ok), "")
    if verification.exact:
        table.add_row("char poly", _mark(verification.char_poly_ok), "exact")
    residual = verification.eigen_residual
    table.add_row(
        "eigenvalues",
        _mark(verification.eigen_ok),
        "" if residual is None else f"residual {residual:.3e}",
    )
    table.add_row(
        "power sums", "", ", ".join(verification.power_sum_residuals) or "[dim]-[/dim]"
    )
    table.add_row("certificate", _mark(verification.certificate_ok), "")
    return table


def _params_table(params: dict[str, Any]) -> Table:
    table = Table(title="Parameters", show_header=True, header_style="bold cyan")
    table.add_column("Name")
    table.add_column("Value")
    for name, value in params.items():
        if isinstance(value, dict):
            for key, item in value.items():
                shown = " .. ".join(str(v) for v in item) if isinstance(item, list) else item
                table.add_row(f"{name}.{key}", str(shown))
        elif isinstance(value, list):
            table.add_row(name, ", ".join(str(v) for v in value))
        else:
            table.add_row(name, str(value))
    return table


def _certificate_table(entries: Sequence[dict[str, str]]) -> Table:
    table = Table(title="Certificate", show_header=True, header_style="bold cyan")
    table.add_column("Inequality")
    table.add_column("Margin", justify="right")
    for entry in entries:
        table.add_row(entry["inequality"], entry["margin"])
    return table


def render_report(report: RunReport, console: Console) -> None:
    """Print a run report as rich tables."""
    header = f"[bold]σ[/bold] = ({', '.join(report.spectrum)})  [dim]{report.mode}[/dim]"
    console.print(Panel.fit(header, title="niep", border_style="cyan"))
    if report.conditions is not None:
        console.print(conditions_table(report.conditions))

    if report.failure is not None:
        failure = report.failure
        console.print(
            Panel.fit(
                f"[red]{failure.error}[/red]: {failure.message}\n"
                f"exit code [yellow]{failure.exit_code}[/yellow]",
                title="No realization",
                border_style="red",
            )
        )
    else:
        console.print(f"[bold green]strategy:[/bold green] {report.strategy}")
        matrices = [
            matrix_table(name, rows)
            for name, rows in (("A", report.A), ("L", report.L), ("C", report.C))
            if rows is not None
        ]
        console.print(Panel(Group(*matrices), title="Realization", border_style="green"))
        if report.params:
            console.print(_params_table(report.params))
        if report.certificate:
            console.print(_certificate_table(report.certificate))
        if report.verification is not None:
            console.print(verification_table(report.verification))

    for line in report.diagnostics:
        console.print(f"[dim]• {line}[/dim]")


def corpus_table(summary: CorpusSummary) -> Table:
    table = Table(
        title=f"Corpus: {summary.directory}", show_header=True, header_style="bold cyan"
    )
    table.add_column("Fixture")
    table.add_column("Expect")
    table.add_column("Strategy")
    table.add_column("Result", justify="center")
    table.add_column("Detail")
    table.add_column("Time", justify="right")
    for result in summary.results:
        table.add_row(
            result.name,
            result.expectation,
            result.strategy or "",
            "[green]PASS[/green]" if result.passed else "[red]FAIL[/red]",
            result.message,
            f"{result.duration:.2f}s",
        )
    return table


def render_corpus(summary: CorpusSummary, console: Console) -> None:
    console.print(corpus_table(summary))
    colour = "green" if summary.failed == 0 else "red"
    console.print(
        f"[{colour}]{summary.passed}/{summary.total} fixtures passed[/{colour}]"
    )


def corpus_to_dict(summary: CorpusSummary) -> dict[str, Any]:
    return {
        "directory": summary.directory,
        "total": summary.total,
        "passed": summary.passed,
        "failed": summary.failed,
        "results": [r.model_dump(exclude={"duration"}) for r in summary.results],
    }
