"""
Unit tests for the staged free-parameter search.
"""

from fractions import Fraction

import numpy as np
import pytest

from niep.core.complex_realizer import complex_layout
from niep.core.errors import EmptyInterval
from niep.core.result_models import Strategy
from niep.core.scalar import Mode
from niep.core.solver import LayoutSolver, _intersect, _nonnegative_set, solve_layout
from niep.core.spectrum import Pair

from conftest import cell_layout


def two_cell_layout(**pins):
    """Two cells for (6, -2 ± 3i, -1 ± i); the affine entries leave one feasible point."""
    layout = complex_layout(
        Fraction(6),
        [],
        [Pair(Fraction(-2), Fraction(3)), Pair(Fraction(-1), Fraction(1))],
        Mode.EXACT,
        Strategy.COMPLEX_GENERAL,
    )
    layout.apply_overrides(pins)
    return layout


class TestStages:
    """Tests for the stage that settles a layout."""

    def test_all_pinned_is_constant(self):
        """Test that a layout without free parameters stops at the constant stage."""
        outcome = solve_layout(cell_layout(**{"l.2.1": "2"}))
        assert outcome.stage == "constant"
        assert outcome.values == {}

    def test_negative_constant_entry(self):
        """Test that a negative constant entry is reported with its position."""
        with pytest.raises(EmptyInterval) as info:
            solve_layout(cell_layout(**{"l.2.1": "7"}))
        assert info.value.parameter == "C[1,1]"

    def test_interval_midpoint(self):
        """Test that the affine entries bound l to [2, 3] and the midpoint is chosen."""
        outcome = solve_layout(cell_layout())
        assert outcome.stage == "interval"
        assert outcome.values["l.2.1"] == Fraction(5, 2)
        assert outcome.intervals["l.2.1"] == ("2", "3")

    def test_preferred_value_is_clamped(self):
        """Test that a preferred value outside the interval is pulled onto its edge."""
        outcome = solve_layout(cell_layout(), {"l.2.1": Fraction(100)})
        assert outcome.values["l.2.1"] == 3

    def test_certificate_margins(self):
        """Test that the certificate lists every variable entry with a nonnegative margin."""
        outcome = solve_layout(cell_layout())
        assert outcome.certificate
        assert all(entry.description.startswith("C[") for entry in outcome.certificate)
        assert all(entry.holds() for entry in outcome.certificate)

    def test_single_point_intervals(self):
        """Test that one-point intervals with non-dyadic endpoints are found in exact mode."""
        outcome = solve_layout(two_cell_layout())
        assert outcome.stage == "interval"
        assert outcome.values == {"l.2.1": Fraction(4, 3), "l.4.1": Fraction(2)}
        assert outcome.intervals["l.2.1"] == ("4/3", "4/3")
        assert outcome.intervals["l.4.1"] == ("2", "2")

    def test_single_point_with_one_pin(self):
        """Test the remaining one-point interval when the other parameter is pinned."""
        outcome = solve_layout(two_cell_layout(**{"l.4.1": "2"}))
        assert outcome.values == {"l.2.1": Fraction(4, 3)}
        assert outcome.intervals["l.2.1"] == ("4/3", "4/3")

    def test_exact_tolerance_stays_rational(self):
        """Test that exact layouts compare against an exact zero."""
        solver = LayoutSolver(two_cell_layout())
        assert solver.tolerance == 0
        assert isinstance(solver.tolerance, Fraction)

    def test_settings_override_config(self):
        """Test that search budgets can be passed per solver."""
        solver = LayoutSolver(cell_layout(), grid_points=5, descent_iterations=3)
        assert solver.grid_points == 5
        assert solver.descent_iterations == 3
        assert solver.dimension == 1


class TestNonnegativeSet:
    """Tests for the univariate helpers."""

    def test_quadratic(self):
        """Test x² - 1 ≥ 0 outside (-1, 1)."""
        pieces, roots = _nonnegative_set([-1.0, 0.0, 1.0])
        assert roots == pytest.approx([-1.0, 1.0])
        assert len(pieces) == 2
        assert pieces[0][0] == -np.inf
        assert pieces[0][1] == pytest.approx(-1.0)
        assert pieces[1][0] == pytest.approx(1.0)
        assert pieces[1][1] == np.inf

    def test_constants(self):
        """Test constant polynomials."""
        assert _nonnegative_set([2.0]) == ([(-np.inf, np.inf)], [])
        assert _nonnegative_set([-2.0]) == ([], [])

    def test_trailing_zeros_dropped(self):
        """Test that zero leading coefficients do not change the degree."""
        pieces, roots = _nonnegative_set([-1.0, 1.0, 0.0, 0.0])
        assert roots == pytest.approx([1.0])
        assert pieces[-1][1] == np.inf

    def test_intersect(self):
        """Test interval intersection."""
        assert _intersect([(0.0, 5.0)], [(3.0, 8.0)]) == [(3.0, 5.0)]
        assert _intersect([(0.0, 1.0)], [(2.0, 3.0)]) == []
