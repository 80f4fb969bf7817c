"""
niep - Main CLI Entry Point

Command-line interface for the NIEP constructive solver using Typer.
Commands: realize, check, verify, corpus and version.
"""

import sys
from pathlib import Path
from typing import NoReturn, Optional

import typer
from pydantic import ValidationError
from rich.console import Console
from rich.panel import Panel

from niep import __version__, config
from niep.config import OutputFormat
from niep.core.corpus import run_corpus
from niep.core.dispatcher import AUTO, RunConfig, get_supported_strategies, run
from niep.core.errors import (
    InputError,
    NiepError,
    NoPerronError,
    ParameterError,
    exit_code_for,
)
from niep.core.matrix import parse_matrix
from niep.core.scalar import Mode
from niep.core.serialization import (
    conditions_table,
    corpus_to_dict,
    render_corpus,
    render_report,
    to_json,
    verification_table,
)
from niep.core.spectrum import (
    classify,
    necessary_conditions,
    parse_spectrum,
    perron_failure_report,
)
from niep.core.verification import verify_matrix
from niep.logging_setup import configure_logging

app = typer.Typer(
    name="niep",
    help="Constructive solver for the nonnegative inverse eigenvalue problem",
    add_completion=False,
    rich_markup_mode="rich",
    no_args_is_help=True,
)

console = Console()
err_console = Console(stderr=True)


class GlobalState:
    """Global state to share across commands."""

    verbose: bool = False
    debug: bool = False


state = GlobalState()


def version_callback(value: bool):
    """Callback for version flag."""
    if value:
        console.print(
            Panel.fit(
                f"[bold cyan]niep[/bold cyan]\n"
                f"Version: [green]{__version__}[/green]\n"
                f"Python: [yellow]{sys.version.split()[0]}[/yellow]",
                title="Version Info",
                border_style="cyan",
            )
        )
        raise typer.Exit()


@app.callback()
def main(
    verbose: bool = typer.Option(
        False, "--verbose", "-v", help="Log strategy selection and fallbacks"
    ),
    debug: bool = typer.Option(
        False, "--debug", help="Log solver phases and show full stack traces"
    ),
    version: Optional[bool] = typer.Option(
        None,
        "--version",
        callback=version_callback,
        is_eager=True,
        help="Show version information and exit",
    ),
):
    """
    niep - nonnegative matrices with a prescribed spectrum

    Quick Start:
        niep realize --spectrum "7,3,-5,-5"
        niep check --spectrum "6,1,1,-4,-4"
        niep corpus ./corpus
    """
    state.verbose = verbose
    state.debug = debug

    if verbose or debug:
        config.verbose = True
        config.log_level = "DEBUG" if debug else "INFO"
    configure_logging(config.log_level, err_console)


def _fail(exc: BaseException, prefix: str = "Error") -> NoReturn:
    err_console.print(f"[red]❌ {prefix}: {exc}[/red]")
    if state.debug:
        err_console.print_exception()
    raise typer.Exit(exit_code_for(exc))


def _parse_order(text: Optional[str]) -> Optional[list[int]]:
    if text is None:
        return None
    try:
        return [int(p) for p in text.replace(",", " ").split()]
    except ValueError as exc:
        raise ParameterError(f"--order takes 1-based positions, got {text!r}") from exc


def _parse_sets(items: Optional[list[str]]) -> dict[str, str]:
    overrides: dict[str, str] = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ParameterError(f"--set expects key=value, got {item!r}")
        overrides[key.strip()] = value.strip()
    return overrides


def _spectrum_text(spectrum: Optional[str], file: Optional[Path]) -> str:
    return RunConfig(spectrum=spectrum, file=file).spectrum_text()


SPECTRUM_OPTION = typer.Option(
    None, "--spectrum", "-s", help='Eigenvalues, e.g. "6,1,1,-4,-4" or "6 -2 -2-i -2+i"'
)
FILE_OPTION = typer.Option(
    None, "--file", "-f", help="Read the spectrum from a file", exists=True, dir_okay=False
)
MODE_OPTION = typer.Option(None, "--mode", help="Arithmetic mode (default: exact when possible)")
FORMAT_OPTION = typer.Option(None, "--format", help="Output format (json, text)")


@app.command()
def version():
    """Display version information."""
    console.print(
        Panel.fit(
            f"[bold cyan]niep[/bold cyan]\n"
            f"Version: [green]{__version__}[/green]\n"
            f"Python: [yellow]{sys.version.split()[0]}[/yellow]\n"
            f"Platform: [magenta]{sys.platform}[/magenta]",
            title="Version Information",
            border_style="cyan",
        )
    )


@app.command()
def realize(
    spectrum: Optional[str] = SPECTRUM_OPTION,
    file: Optional[Path] = FILE_OPTION,
    strategy: str = typer.Option(
        AUTO,
        "--strategy",
        help=f"auto or one of: {', '.join(get_supported_strategies())}",
    ),
    mode: Optional[Mode] = MODE_OPTION,
    tol: Optional[float] = typer.Option(
        None, "--tol", help="Float-mode nonnegativity tolerance (default 1e-9)"
    ),
    order: Optional[str] = typer.Option(
        None, "--order", help="1-based positions into the descending reals, e.g. 1,2,3,4,6,7,5"
    ),
    sets: Optional[list[str]] = typer.Option(
        None, "--set", help="Parameter override key=value (repeatable), e.g. betas.2.4=1"
    ),
    output_format: Optional[OutputFormat] = FORMAT_OPTION,
    jll_k: Optional[int] = typer.Option(None, "--jll-k", help="Largest k of the JLL check"),
    jll_m: Optional[int] = typer.Option(None, "--jll-m", help="Largest m of the JLL check"),
    diagonal: Optional[str] = typer.Option(
        None, "--diagonal", help="Prescribed diagonal of C (one-positive spectra)"
    ),
    no_permute: bool = typer.Option(
        False, "--no-permute", help="Do not search permuted layouts after a failure"
    ),
    tail_search: bool = typer.Option(
        False, "--tail-search", help="Let the permuted search move positives to 1x1 blocks"
    ),
):
    """
    Build A, L and a nonnegative C = L·A·L⁻¹ for a spectrum.

    Exit code 0 on a verified realization, 2 when no construction applies,
    1 on input or condition errors.

    Examples:
        niep realize --spectrum "7,3,-5,-5" --format json
        niep realize --spectrum "6,1,1,-4,-4" --set couplers.3.4=-3
        niep realize --spectrum "6,1,1,1,1,-4,-4" --order 1,2,3,4,6,7,5
    """
    try:
        settings = {
            "spectrum": spectrum,
            "file": file,
            "strategy": strategy,
            "mode": mode,
            "order": _parse_order(order),
            "overrides": _parse_sets(sets),
            "diagonal": diagonal,
            "output_format": output_format or config.output_format,
            "jll_k_max": jll_k,
            "jll_m_max": jll_m,
            "permutation_search": config.permutation_search and not no_permute,
            "tail_search": tail_search or config.tail_search,
        }
        if tol is not None:
            settings["tolerance"] = tol
        cfg = RunConfig(**settings)
    except ValidationError as exc:
        _fail(InputError(str(exc.errors()[0]["msg"])), "Invalid option")
    except NiepError as exc:
        _fail(exc, "Invalid option")

    report = run(cfg)
    if OutputFormat(cfg.output_format) == OutputFormat.JSON:
        typer.echo(to_json(report))
    else:
        render_report(report, console)
    if report.exit_code:
        if state.debug and report.failure is not None:
            err_console.print(f"[dim]{report.failure.error}: {report.failure.message}[/dim]")
        raise typer.Exit(report.exit_code)


@app.command()
def check(
    spectrum: Optional[str] = SPECTRUM_OPTION,
    file: Optional[Path] = FILE_OPTION,
    mode: Optional[Mode] = MODE_OPTION,
    jll_k: Optional[int] = typer.Option(None, "--jll-k", help="Largest k of the JLL check"),
    jll_m: Optional[int] = typer.Option(None, "--jll-m", help="Largest m of the JLL check"),
    output_format: Optional[OutputFormat] = FORMAT_OPTION,
):
    """
    Evaluate the Perron, power-sum and JLL necessary conditions.

    Exit code 1 when the Perron or a power-sum condition fails; a JLL
    failure is reported but does not change the exit code.

    Examples:
        niep check --spectrum "6,1,1,-4,-4"
        niep check --spectrum "1,-1,-1" --format json
    """
    try:
        parsed = parse_spectrum(_spectrum_text(spectrum, file), mode)
        try:
            conditions = necessary_conditions(classify(parsed), jll_k, jll_m)
        except NoPerronError as exc:
            conditions = perron_failure_report(exc)
    except NiepError as exc:
        _fail(exc)
    except ValueError as exc:
        _fail(InputError(str(exc)))

    if (output_format or OutputFormat(config.output_format)) == OutputFormat.JSON:
        typer.echo(to_json(conditions))
    else:
        console.print(conditions_table(conditions))
        if conditions.witness:
            console.print(f"[yellow]witness:[/yellow] {conditions.witness}")
    if not (conditions.perron_ok and conditions.power_sums_ok):
        raise typer.Exit(1)


@app.command()
def verify(
    matrix_file: Path = typer.Argument(
        ..., help="Matrix file, one row per line", exists=True, dir_okay=False
    ),
    spectrum: Optional[str] = SPECTRUM_OPTION,
    file: Optional[Path] = FILE_OPTION,
    mode: Optional[Mode] = MODE_OPTION,
    tol: Optional[float] = typer.Option(None, "--tol", help="Float-mode tolerance"),
    output_format: Optional[OutputFormat] = FORMAT_OPTION,
):
    """
    Check that a matrix is nonnegative and has the given spectrum.

    Examples:
        niep verify C.txt --spectrum "7,3,-5,-5"
    """
    try:
        parsed = parse_spectrum(_spectrum_text(spectrum, file), mode)
        matrix_mode = Mode.FLOAT if parsed.mode == Mode.FLOAT else mode
        matrix = parse_matrix(matrix_file.read_text(encoding="utf-8"), matrix_mode)
        values = parsed.values
        if matrix.mode != parsed.mode:
            parsed = parse_spectrum(parsed.source, Mode.FLOAT)
            values = parsed.values
        report = verify_matrix(matrix, values, tol)
    except NiepError as exc:
        _fail(exc)

    if (output_format or OutputFormat(config.output_format)) == OutputFormat.JSON:
        typer.echo(to_json(report))
    else:
        console.print(verification_table(report))
    if not report.verified:
        raise typer.Exit(1)


@app.command()
def corpus(
    directory: Path = typer.Argument(Path("corpus"), help="Directory of *.txt fixtures"),
    output_format: Optional[OutputFormat] = FORMAT_OPTION,
):
    """
    Run every fixture in a corpus directory and print a pass/fail table.

    Exit code 0 iff every fixture passes; an empty directory passes.

    Examples:
        niep corpus ./corpus
        niep corpus ./corpus --format json
    """
    summary = run_corpus(directory)
    if (output_format or OutputFormat(config.output_format)) == OutputFormat.JSON:
        typer.echo(to_json(corpus_to_dict(summary)))
    else:
        render_corpus(summary, console)
    raise typer.Exit(summary.exit_code)


def cli():
    """Main entry point for the CLI."""
    try:
        app()
    except KeyboardInterrupt:
        err_console.print("\n[yellow]⚠️  Operation cancelled by user[/yellow]")
        sys.exit(130)


if __name__ == "__main__":
    cli()
