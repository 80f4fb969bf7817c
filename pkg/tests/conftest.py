"""
Shared fixtures for the niep test suite.
"""

from fractions import Fraction
from pathlib import Path

import pytest

from niep.core.complex_realizer import complex_layout
from niep.core.result_models import Strategy
from niep.core.scalar import Mode
from niep.core.spectrum import ClassifiedSpectrum, Pair, classify, parse_spectrum

CORPUS_DIR = Path(__file__).resolve().parent.parent / "corpus"


def classified(text: str) -> ClassifiedSpectrum:
    """Parse and classify a spectrum string."""
    return classify(parse_spectrum(text))


def rendered(matrix) -> list[list[str]]:
    """Rows of a matrix as display strings."""
    return [[str(v) for v in row] for row in matrix.rows]


def cell_layout(**pins):
    """Complex cell for (6, -2 ± 2i); C = [[6-2l, 2, 0], [-2l²+10l-4, 2l-4, 2], [12, 0, 0]]."""
    layout = complex_layout(
        Fraction(6), [], [Pair(Fraction(-2), Fraction(2))], Mode.EXACT, Strategy.COMPLEX_3
    )
    layout.apply_overrides(pins)
    return layout


@pytest.fixture
def corpus_dir() -> Path:
    return CORPUS_DIR


@pytest.fixture
def fixture_dir(tmp_path: Path) -> Path:
    """Empty directory for throwaway corpus fixtures."""
    directory = tmp_path / "corpus"
    directory.mkdir()
    return directory
