"""
Unit tests for fixture parsing and the corpus runner.
"""

from pathlib import Path

import pytest

from niep.core.corpus import (
    INAPPLICABLE,
    MATRIX,
    VERIFIED,
    CorpusRunner,
    compare_matrix,
    parse_fixture,
    run_corpus,
)
from niep.core.dispatcher import run
from niep.core.errors import ParseError
from niep.core.scalar import Mode

from conftest import CORPUS_DIR

SQUARE = "7,3,-5,-5\nexpect:\n0 2 5 0\n2 0 0 5\n5 2 0 0\n2 5 0 0\n"


class TestParseFixture:
    """Tests for parse_fixture."""

    def test_matrix_expectation(self):
        """Test a fixture with expected rows."""
        fixture = parse_fixture(SQUARE, "square")
        assert fixture.spectrum == "7,3,-5,-5"
        assert fixture.expectation == MATRIX
        assert fixture.rows[3] == ["2", "5", "0", "0"]

    def test_directives(self):
        """Test every directive."""
        text = (
            "# comment\n6,1,1,1,1,-4,-4\nstrategy: two-negative\nmode: exact\n"
            "order: 1,2,3,4,6,7,5\nset: l.3.1 = 1/2\ntol: 1e-6\nexpect: inapplicable\n"
        )
        fixture = parse_fixture(text)
        assert fixture.strategy == "two-negative"
        assert fixture.mode == Mode.EXACT
        assert fixture.order == [1, 2, 3, 4, 6, 7, 5]
        assert fixture.overrides == {"l.3.1": "1/2"}
        assert fixture.tolerance == 1e-6
        assert fixture.expectation == INAPPLICABLE

    def test_verified_expectation(self):
        """Test the bare verified expectation."""
        assert parse_fixture("6,1,1,-4,-4\nexpect: verified\n").expectation == VERIFIED

    @pytest.mark.parametrize(
        "text",
        [
            "",
            "7,3,-5,-5\n",
            "7,3,-5,-5\nwidth: 4\nexpect: verified\n",
            "7,3,-5,-5\nexpect: maybe\n",
            "7,3,-5,-5\nexpect:\n0 2 5\n2 0 0\n",
            "7,3,-5,-5\nset: betas.2.3\nexpect: verified\n",
        ],
    )
    def test_malformed(self, text):
        """Test fixtures that cannot be parsed."""
        with pytest.raises(ParseError):
            parse_fixture(text)


class TestCompareMatrix:
    """Tests for compare_matrix."""

    def test_match(self):
        """Test that the realized square matches its fixture."""
        fixture = parse_fixture(SQUARE)
        assert compare_matrix(fixture, run(fixture.run_config()), 1e-9) is None

    def test_size_mismatch(self):
        """Test a fixture of the wrong size."""
        fixture = parse_fixture("7,3,-5,-5\nexpect:\n0 1\n1 0\n")
        message = compare_matrix(fixture, run(fixture.run_config()), 1e-9)
        assert message == "C is 4x4, expected 2x2"


class TestCorpusRunner:
    """Tests for CorpusRunner."""

    def test_mixed_results(self, fixture_dir: Path):
        """Test pass, fail and unreadable fixtures in one run."""
        (fixture_dir / "a_square.txt").write_text(SQUARE, encoding="utf-8")
        (fixture_dir / "b_inapplicable.txt").write_text(
            "6,1,1,1,1,-4,-4\nstrategy: two-negative\nexpect: inapplicable\n", encoding="utf-8"
        )
        (fixture_dir / "c_wrong.txt").write_text(
            "6,1,1,-4,-4\nexpect: inapplicable\n", encoding="utf-8"
        )
        (fixture_dir / "d_broken.txt").write_text("7,3,-5,-5\n", encoding="utf-8")
        (fixture_dir / "notes.md").write_text("ignored", encoding="utf-8")

        summary = CorpusRunner(fixture_dir).run()
        assert [r.name for r in summary.results] == [
            "a_square",
            "b_inapplicable",
            "c_wrong",
            "d_broken",
        ]
        assert [r.passed for r in summary.results] == [True, True, False, False]
        assert summary.exit_code == 1

    def test_empty_directory(self, fixture_dir: Path):
        """Test that an empty corpus passes."""
        summary = run_corpus(fixture_dir)
        assert summary.total == 0
        assert summary.exit_code == 0

    def test_missing_directory(self, tmp_path: Path):
        """Test that a missing directory fails."""
        assert run_corpus(tmp_path / "nowhere").exit_code == 1


@pytest.mark.slow
class TestShippedCorpus:
    """Every shipped fixture, one test each."""

    @pytest.mark.parametrize(
        "path", sorted(CORPUS_DIR.glob("*.txt")), ids=lambda path: path.stem
    )
    def test_fixture_passes(self, path: Path):
        """Test that the fixture meets its expectation."""
        result = CorpusRunner(CORPUS_DIR).run_fixture(path)
        assert result.passed, result.message
