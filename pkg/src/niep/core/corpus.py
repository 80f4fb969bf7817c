"""
Fixture corpus runner.

A fixture is a text file: the spectrum on its first line, optional
directives, then an expectation::

    6,1,1,-4,-4
    set: couplers.3.4=-3
    expect:
    0 4 0 0 0
    ...

Directives are ``strategy:``, ``mode:``, ``order:``, ``set: key=value``
(repeatable), ``diagonal:`` and ``tol:``. The expectation is ``expect:``
followed by the rows of C, ``expect: inapplicable`` (the run must end in a
construction error) or ``expect: verified`` (any verified realization).
Lines starting with ``#`` are comments.
"""

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from niep.core.dispatcher import RunConfig, run
from niep.core.errors import NiepError, ParseError
from niep.core.result_models import CorpusSummary, FixtureResult, RunReport
from niep.core.scalar import Mode, format_scalar, parse_scalar, to_complex

logger = logging.getLogger(__name__)

INAPPLICABLE = "inapplicable"
VERIFIED = "verified"
MATRIX = "matrix"

_DIRECTIVES = ("strategy", "mode", "order", "set", "diagonal", "tol")


@dataclass
class Fixture:
    """A parsed fixture file."""

    name: str
    spectrum: str
    expectation: str
    rows: list[list[str]] = field(default_factory=list)
    strategy: str = "auto"
    mode: Optional[Mode] = None
    order: Optional[list[int]] = None
    overrides: dict[str, str] = field(default_factory=dict)
    diagonal: Optional[str] = None
    tolerance: Optional[float] = None

    def run_config(self) -> RunConfig:
        settings: dict[str, Any] = {
            "spectrum": self.spectrum,
            "strategy": self.strategy,
            "mode": self.mode,
            "order": self.order,
            "overrides": self.overrides,
            "diagonal": self.diagonal,
        }
        if self.tolerance is not None:
            settings["tolerance"] = self.tolerance
        return RunConfig(**settings)


def _bad(name: str, line: int, text: str, reason: str) -> ParseError:
    return ParseError(line, text, f"{name}: {reason}")


def parse_fixture(text: str, name: str = "<fixture>") -> Fixture:
    """
    Parse fixture text.

    Raises:
        ParseError: On a missing spectrum or expectation, an unknown
            directive or a ragged expected matrix
    """
    lines = [
        (number, line.strip())
        for number, line in enumerate(text.splitlines(), start=1)
        if line.strip() and not line.strip().startswith("#")
    ]
    if not lines:
        raise _bad(name, 0, "", "empty fixture")
    fixture = Fixture(name=name, spectrum=lines[0][1], expectation="")

    index = 1
    while index < len(lines):
        number, line = lines[index]
        key, _, value = line.partition(":")
        key, value = key.strip().lower(), value.strip()
        index += 1
        if key == "expect":
            if value:
                if value.lower() not in (INAPPLICABLE, VERIFIED):
                    raise _bad(name, number, value, "unknown expectation")
                fixture.expectation = value.lower()
            else:
                fixture.expectation = MATRIX
                fixture.rows = [line.replace(",", " ").split() for _, line in lines[index:]]
                widths = {len(row) for row in fixture.rows}
                if not fixture.rows or widths != {len(fixture.rows)}:
                    raise _bad(name, number, line, "expected matrix must be square")
            break
        if key not in _DIRECTIVES:
            raise _bad(name, number, line, "unknown directive")
        if key == "strategy":
            fixture.strategy = value
        elif key == "mode":
            fixture.mode = Mode(value.lower())
        elif key == "order":
            fixture.order = [int(p) for p in value.replace(",", " ").split()]
        elif key == "set":
            name_part, sep, raw = value.partition("=")
            if not sep:
                raise _bad(name, number, value, "set needs key=value")
            fixture.overrides[name_part.strip()] = raw.strip()
        elif key == "diagonal":
            fixture.diagonal = value
        else:
            fixture.tolerance = float(value)

    if not fixture.expectation:
        raise _bad(name, len(text.splitlines()), "", "missing expect line")
    return fixture


def _entry_matches(expected: str, actual: Any, mode: Mode, tolerance: float) -> bool:
    value, _ = parse_scalar(expected)
    if mode == Mode.EXACT:
        return value == actual
    a, b = to_complex(actual), to_complex(value)
    return abs(a - b) <= tolerance * max(1.0, abs(b))


def compare_matrix(fixture: Fixture, report: RunReport, tolerance: float) -> Optional[str]:
    """First mismatching entry of C as a message, or None if C matches."""
    C = report.realization.C
    if C.n != len(fixture.rows):
        return f"C is {C.n}x{C.n}, expected {len(fixture.rows)}x{len(fixture.rows)}"
    for i, row in enumerate(fixture.rows):
        for j, expected in enumerate(row):
            try:
                matches = _entry_matches(expected, C[i, j], C.mode, tolerance)
            except NiepError as exc:
                return f"expected entry ({i + 1},{j + 1}): {exc}"
            if not matches:
                return f"C[{i + 1},{j + 1}] = {format_scalar(C[i, j])}, expected {expected}"
    return None


class CorpusRunner:
    """
    Runs every ``*.txt`` fixture of a directory.

    Example:
        >>> summary = CorpusRunner("corpus").run()
        >>> summary.exit_code
        0
    """

    def __init__(self, directory: "str | Path"):
        self.directory = Path(directory)

    def discover_fixtures(self) -> list[Path]:
        return sorted(self.directory.glob("*.txt"))

    def run_fixture(self, path: Path) -> FixtureResult:
        start = time.perf_counter()
        name = path.stem
        try:
            fixture = parse_fixture(path.read_text(encoding="utf-8"), name)
            cfg = fixture.run_config()
        except (OSError, ValueError, NiepError) as exc:
            logger.warning("fixture %s unreadable: %s", name, exc)
            return FixtureResult(
                name=name,
                passed=False,
                expectation="?",
                message=f"{type(exc).__name__}: {exc}",
                duration=time.perf_counter() - start,
            )

        report = run(cfg)
        passed, message = self._judge(fixture, report, cfg.tolerance)
        return FixtureResult(
            name=name,
            passed=passed,
            expectation=fixture.expectation,
            strategy=report.strategy,
            message=message,
            duration=time.perf_counter() - start,
        )

    def _judge(self, fixture: Fixture, report: RunReport, tolerance: float) -> tuple[bool, str]:
        failure = report.failure
        if fixture.expectation == INAPPLICABLE:
            if failure is not None and report.exit_code == 2:
                return True, failure.error
            return False, f"expected a construction failure, got exit {report.exit_code}"
        if failure is not None:
            return False, f"{failure.error}: {failure.message}"
        if fixture.expectation == VERIFIED:
            return True, "verified"
        mismatch = compare_matrix(fixture, report, tolerance)
        return mismatch is None, mismatch or "C matches"

    def run(self) -> CorpusSummary:
        summary = CorpusSummary(directory=str(self.directory))
        if not self.directory.is_dir():
            logger.error("corpus directory %s does not exist", self.directory)
            summary.results.append(
                FixtureResult(
                    name=self.directory.name,
                    passed=False,
                    expectation="?",
                    message="not a directory",
                )
            )
            return summary
        for path in self.discover_fixtures():
            result = self.run_fixture(path)
            logger.info("%s: %s", result.name, "pass" if result.passed else "fail")
            summary.results.append(result)
        return summary


def run_corpus(directory: "str | Path") -> CorpusSummary:
    """Run the fixture corpus in ``directory``; the summary's exit code is 0 iff all pass."""
    return CorpusRunner(directory).run()
