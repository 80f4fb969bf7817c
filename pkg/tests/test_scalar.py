"""
Unit tests for exact scalars and entry parsing.
"""

from fractions import Fraction

import pytest

from niep.core.errors import ModeError, ParseError
from niep.core.scalar import I, ExactScalar, Mode, format_scalar, parse_scalar, to_complex


class TestExactScalar:
    """Tests for Gaussian rational arithmetic."""

    def test_multiplication_by_i(self):
        """Test that i·i = -1."""
        assert I * I == ExactScalar(-1)

    def test_division(self):
        """Test division by a complex value."""
        z = ExactScalar(1, 1) / ExactScalar(1, -1)
        assert z == I

    def test_division_by_zero(self):
        """Test that dividing by an exact zero raises."""
        with pytest.raises(ZeroDivisionError):
            ExactScalar(1) / ExactScalar(0)

    def test_integer_power(self):
        """Test repeated squaring and negative exponents."""
        assert ExactScalar(2) ** 10 == ExactScalar(1024)
        assert ExactScalar(2) ** -2 == ExactScalar(Fraction(1, 4))

    def test_mixed_with_fraction(self):
        """Test arithmetic with plain rationals."""
        assert ExactScalar(Fraction(1, 2)) + Fraction(1, 2) == 1
        assert 3 - ExactScalar(1) == ExactScalar(2)

    def test_ordering_of_reals(self):
        """Test comparisons between real scalars."""
        assert ExactScalar(-1) < ExactScalar(Fraction(1, 3))
        assert ExactScalar(2) >= 2

    def test_ordering_complex_raises(self):
        """Test that complex values cannot be ordered."""
        with pytest.raises(ModeError):
            _ = I < ExactScalar(1)

    def test_hash_matches_fraction(self):
        """Test that real scalars hash like their Fraction."""
        assert hash(ExactScalar(Fraction(3, 4))) == hash(Fraction(3, 4))

    def test_of_rejects_irrational(self):
        """Test that an irrational string is refused in exact form."""
        with pytest.raises(ModeError):
            ExactScalar.of("sqrt(2)")

    def test_real_part_of_complex_raises(self):
        """Test real() on a complex value."""
        with pytest.raises(ModeError):
            ExactScalar(1, 2).real()


class TestParseScalar:
    """Tests for parse_scalar."""

    @pytest.mark.parametrize(
        "token, expected",
        [
            ("-5/2", ExactScalar(Fraction(-5, 2))),
            ("4+3i", ExactScalar(4, 3)),
            ("-2-i", ExactScalar(-2, -1)),
            ("i", ExactScalar(0, 1)),
            ("-i", ExactScalar(0, -1)),
            ("0.5", ExactScalar(Fraction(1, 2))),
            ("sqrt(4)", ExactScalar(2)),
            ("3/2-1/2i", ExactScalar(Fraction(3, 2), Fraction(-1, 2))),
        ],
    )
    def test_exact_tokens(self, token, expected):
        """Test tokens that stay exact."""
        value, exact = parse_scalar(token)
        assert exact
        assert value == expected

    def test_irrational_token_is_float(self):
        """Test that an irrational root gives a float complex."""
        value, exact = parse_scalar("sqrt(3)i")
        assert not exact
        assert value == pytest.approx(complex(0, 3**0.5))

    @pytest.mark.parametrize("token", ["abc", "1//2", "2+", "", "3ii"])
    def test_bad_tokens(self, token):
        """Test that malformed tokens raise ParseError."""
        with pytest.raises(ParseError):
            parse_scalar(token)

    def test_error_carries_position(self):
        """Test that the reported position is the one passed in."""
        with pytest.raises(ParseError) as info:
            parse_scalar("x", position=7)
        assert info.value.position == 7


class TestFormatScalar:
    """Tests for format_scalar."""

    @pytest.mark.parametrize(
        "value, text",
        [
            (ExactScalar(Fraction(-3, 4), 2), "-3/4+2i"),
            (ExactScalar(0, -1), "-i"),
            (ExactScalar(5), "5"),
            (Fraction(7, 3), "7/3"),
            (complex(2.0, 0.0), "2"),
            (complex(0.0, 1.5), "1.5i"),
        ],
    )
    def test_rendering(self, value, text):
        """Test the p/q and a+bi renderings."""
        assert format_scalar(value) == text

    def test_round_trip_through_parse(self):
        """Test that a formatted exact value parses back to itself."""
        value = ExactScalar(Fraction(-7, 9), Fraction(2, 3))
        parsed, _ = parse_scalar(format_scalar(value))
        assert parsed == value


def test_to_complex_accepts_both_modes():
    """Test to_complex on exact and float inputs."""
    assert to_complex(ExactScalar(1, -1)) == complex(1, -1)
    assert to_complex(Fraction(1, 2)) == 0.5
    assert Mode("exact") is Mode.EXACT
