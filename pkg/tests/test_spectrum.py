"""
Unit tests for spectrum parsing, classification and necessary conditions.
"""

from fractions import Fraction

import pytest

from niep.core.errors import ConjugateClosureError, ModeError, NoPerronError, ParseError
from niep.core.scalar import ExactScalar, Mode
from niep.core.spectrum import (
    Pair,
    classify,
    classify_reals,
    format_spectrum,
    necessary_conditions,
    parse_spectrum,
    perron_failure_report,
    power_sum,
)

from conftest import classified


class TestParseSpectrum:
    """Tests for parse_spectrum."""

    def test_commas_and_spaces(self):
        """Test both separators."""
        s = parse_spectrum("6, 1 1,-4  -4")
        assert s.n == 5
        assert s.mode == Mode.EXACT

    def test_irrational_goes_float(self):
        """Test that a root switches the whole spectrum to float mode."""
        s = parse_spectrum("12,sqrt(3)i,-sqrt(3)i,4+3i,4-3i")
        assert s.mode == Mode.FLOAT
        assert all(isinstance(v, complex) for v in s.values)

    def test_forced_float(self):
        """Test --mode float on a rational spectrum."""
        assert parse_spectrum("1,-1", Mode.FLOAT).mode == Mode.FLOAT

    def test_forced_exact_on_irrational(self):
        """Test that exact mode cannot be forced on irrational input."""
        with pytest.raises(ModeError):
            parse_spectrum("2,-sqrt(2)", Mode.EXACT)

    def test_missing_conjugate(self):
        """Test that an unmatched complex value is rejected."""
        with pytest.raises(ConjugateClosureError):
            parse_spectrum("6,-2+i,-2+i")

    def test_empty(self):
        """Test that an empty list is rejected."""
        with pytest.raises(ParseError):
            parse_spectrum(" , ")

    def test_format_round_trip(self):
        """Test that format_spectrum output parses back."""
        s = parse_spectrum("6,-2-i,-2+i,1/2")
        assert parse_spectrum(format_spectrum(s.values)).values == s.values


class TestClassify:
    """Tests for classify."""

    def test_real_spectrum(self):
        """Test Perron value, counts and power sums."""
        c = classified("6,1,1,-4,-4")
        assert c.perron == 6
        assert (c.n, c.k_pos, c.k_neg) == (5, 3, 2)
        assert c.s1 == 0
        assert c.diagonal == (6, 1, 1, -4, -4)

    def test_reals_sorted_descending(self):
        """Test that the default diagonal is descending."""
        assert classified("-1,10,-2,-2").diagonal == (10, -1, -2, -2)

    def test_pairs(self):
        """Test conjugate pair grouping and the pair cell order."""
        c = classified("6,-2-3i,-2+3i,-1-i,-1+i")
        assert c.is_complex
        assert c.pair_order == (Pair(Fraction(-2), Fraction(3)), Pair(Fraction(-1), Fraction(1)))
        assert c.reals == (6,)

    def test_repeated_pair(self):
        """Test that a repeated pair gets one cell per copy."""
        c = classified("10,1+i,1-i,1+i,1-i")
        assert len(c.pair_order) == 2
        assert c.pairs[0].multiplicity == 2

    def test_no_perron_negative(self):
        """Test a spectrum whose largest real is negative."""
        with pytest.raises(NoPerronError):
            classified("-1,-2")

    def test_no_perron_modulus(self):
        """Test a complex value that outgrows the largest real."""
        with pytest.raises(NoPerronError):
            classified("1,2i,-2i")

    def test_classify_reals_keeps_order(self):
        """Test that classify_reals keeps the given diagonal order."""
        c = classify_reals([Fraction(6), Fraction(-4), Fraction(1)])
        assert c.diagonal == (6, -4, 1)
        assert c.reals == (6, 1, -4)


class TestNecessaryConditions:
    """Tests for necessary_conditions."""

    def test_realizable_spectrum_passes(self):
        """Test a spectrum that satisfies every check."""
        report = necessary_conditions(classified("7,3,-5,-5"))
        assert report.overall
        assert report.power_sums[0] == "0"

    def test_negative_trace(self):
        """Test that s1 < 0 is reported with its witness."""
        report = necessary_conditions(classified("1,-1,-1"))
        assert not report.power_sums_ok
        assert report.power_sum_failure == 1
        assert report.witness == "s1 = -1"

    def test_jll_failure(self):
        """Test a spectrum with nonnegative power sums but a failing JLL inequality."""
        report = necessary_conditions(classified("1,3/10+7/10i,3/10-7/10i"))
        assert report.power_sums_ok
        assert not report.jll_ok
        assert report.jll_failure == (1, 2)
        assert not report.overall

    def test_bad_bounds(self):
        """Test that zero bounds are rejected."""
        with pytest.raises(ValueError):
            necessary_conditions(classified("1,-1"), jll_k_max=0)

    def test_perron_failure_report(self):
        """Test the report built from a NoPerronError."""
        with pytest.raises(NoPerronError) as info:
            classified("-1,-2")
        report = perron_failure_report(info.value)
        assert not report.perron_ok
        assert not report.overall


def test_power_sum_exact():
    """Test power sums of a complex spectrum stay real."""
    values = parse_spectrum("2,i,-i").values
    assert power_sum(values, 2, Mode.EXACT) == 2
    assert isinstance(ExactScalar.of(1), ExactScalar)
