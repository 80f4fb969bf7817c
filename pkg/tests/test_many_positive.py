"""
Unit tests for the chained and split layouts (more positive than negative eigenvalues).
"""

from fractions import Fraction

import pytest

from niep.core.errors import ConstructionError, ParameterError, ShapeConflict, WrongShape
from niep.core.layout import EntryKind
from niep.core.many_positive import (
    chained_layout,
    realize_k_negative,
    realize_three_negative,
    realize_two_negative,
    split_layout,
)
from niep.core.result_models import Strategy
from niep.core.verification import verify_realization

from conftest import classified, rendered

TWO_NEGATIVE = "6,1,1,-4,-4"
THREE_NEGATIVE = "8,2,2,2,1,-5,-5,-5"


class TestChainedLayout:
    """Tests for chained_layout."""

    def test_free_entries(self):
        """Test the free couplers and L entries of the two-negative layout."""
        layout = chained_layout(classified(TWO_NEGATIVE), Strategy.TWO_NEGATIVE)
        assert [p.name for p in layout.parameters] == ["couplers.3.4", "l.3.1", "l.5.1"]

    def test_owners_and_couplers(self):
        """Test owner rows and the coupler chain."""
        layout = chained_layout(classified(TWO_NEGATIVE), Strategy.TWO_NEGATIVE)
        assert layout.alpha_rows == {4: 2, 5: 3}
        assert layout.a_entries[(1, 2)] == 6
        assert layout.a_entries[(2, 3)] == 3
        assert layout.a_kinds[(2, 4)] == EntryKind.ALPHA

    def test_three_negative_free_entries(self):
        """Test the free entries with three negatives."""
        layout = chained_layout(classified(THREE_NEGATIVE), Strategy.THREE_NEGATIVE)
        names = {p.name for p in layout.parameters}
        assert {"couplers.4.6", "couplers.5.6", "couplers.5.7"} <= names
        assert {"l.4.1", "l.4.2", "l.5.1", "l.5.2", "l.8.1", "l.8.2"} <= names

    def test_needs_more_positives(self):
        """Test that k must exceed m."""
        with pytest.raises(ShapeConflict):
            chained_layout(classified("3,1,-2,-2"), Strategy.TWO_NEGATIVE)


class TestSplitLayout:
    """Tests for split_layout."""

    def test_chain_owners(self):
        """Test that row 1 and the two chain ends own the negatives."""
        layout = split_layout(classified(THREE_NEGATIVE), Strategy.THREE_NEGATIVE)
        assert layout.alpha_rows == {6: 1, 7: 3, 8: 5}
        assert layout.a_entries[(1, 2)] == 1
        assert layout.a_entries[(1, 4)] == 2

    def test_needs_three_negatives(self):
        """Test the shape requirement."""
        with pytest.raises(ShapeConflict):
            split_layout(classified(TWO_NEGATIVE), Strategy.TWO_NEGATIVE)


class TestTwoNegative:
    """Tests for realize_two_negative."""

    def test_pinned_parameters(self):
        """Test C at a fully pinned parameter point."""
        overrides = {"couplers.3.4": "-4", "l.3.1": "1/2", "l.5.1": "1/2"}
        r = realize_two_negative(classified(TWO_NEGATIVE), overrides)
        assert rendered(r.C) == [
            ["0", "6", "0", "0", "0"],
            ["1/2", "0", "3", "4", "0"],
            ["1", "0", "0", "0", "4"],
            ["1/2", "4", "3", "0", "0"],
            ["1", "0", "4", "0", "0"],
        ]

    def test_upper_ends(self):
        """Test C with l.3.1 and l.5.1 at the top of their bands."""
        c = classified(TWO_NEGATIVE)
        overrides = {"couplers.3.4": "-4", "l.3.1": "2/3", "l.5.1": "3/4"}
        r = realize_two_negative(c, overrides)
        assert rendered(r.C) == [
            ["0", "6", "0", "0", "0"],
            ["0", "0", "3", "4", "0"],
            ["0", "1", "0", "0", "4"],
            ["0", "4", "3", "0", "0"],
            ["1/3", "3/2", "4", "0", "0"],
        ]
        assert verify_realization(r, c.values).verified

    @pytest.mark.parametrize(
        "l31,l51",
        [("203/300", "3/4"), ("49/100", "1/2"), ("2/3", "19/25"), ("1/2", "49/100")],
    )
    def test_past_band_ends(self, l31, l51):
        """Test that moving either L entry 1/100 outside its band fails."""
        overrides = {"couplers.3.4": "-4", "l.3.1": l31, "l.5.1": l51}
        with pytest.raises(ConstructionError):
            realize_two_negative(classified(TWO_NEGATIVE), overrides)

    def test_search_finds_a_point(self):
        """Test the free search and the coupler interval."""
        c = classified(TWO_NEGATIVE)
        r = realize_two_negative(c)
        assert Fraction(-4) <= r.params.couplers[(3, 4)] <= Fraction(-3)
        assert r.C[0, 1] == 6
        assert verify_realization(r, c.values).verified

    def test_coupler_out_of_range(self):
        """Test that a pinned coupler outside its interval fails."""
        with pytest.raises(ConstructionError):
            realize_two_negative(classified(TWO_NEGATIVE), {"couplers.3.4": "-2"})

    def test_wrong_shape(self):
        """Test that exactly two negatives are required."""
        with pytest.raises(WrongShape):
            realize_two_negative(classified(THREE_NEGATIVE))

    def test_split_variant_rejected(self):
        """Test that the split layout needs three negatives."""
        with pytest.raises(ShapeConflict):
            realize_two_negative(classified(TWO_NEGATIVE), {"variant": "split"})

    def test_unknown_variant(self):
        """Test that an unknown variant is a parameter error."""
        with pytest.raises(ParameterError):
            realize_two_negative(classified(TWO_NEGATIVE), {"variant": "zigzag"})

    def test_alpha_override(self):
        """Test that an alpha below -λ_j is rejected."""
        with pytest.raises(ConstructionError):
            realize_two_negative(classified(TWO_NEGATIVE), {"alphas.4": "3"})


class TestThreeNegative:
    """Tests for realize_three_negative."""

    def test_split_pinned(self):
        """Test the two-chain layout at a fully pinned point."""
        overrides = {
            "variant": "split",
            "couplers.2.4": "-2",
            "couplers.2.6": "-5",
            "couplers.3.6": "-5",
            "couplers.4.6": "-5",
            "couplers.5.6": "-2",
            "l.3.1": "2",
            "l.5.1": "2",
            "l.5.2": "1/4",
            "l.7.1": "4/3",
            "l.7.2": "-2/3",
            "l.8.1": "2",
        }
        r = realize_three_negative(classified(THREE_NEGATIVE), overrides)
        assert rendered(r.C)[4] == ["1/2", "7/4", "3/4", "1/2", "0", "7/4", "0", "5"]
        assert rendered(r.C)[3] == ["0", "0", "0", "0", "4", "0", "0", "0"]

    def test_chained_search(self):
        """Test that the default chained layout finds a verified point."""
        c = classified(THREE_NEGATIVE)
        r = realize_three_negative(c)
        assert verify_realization(r, c.values).verified
        assert "chained layout: k=5, m=3" in r.params.notes

    def test_wrong_shape(self):
        """Test that exactly three negatives are required."""
        with pytest.raises(WrongShape):
            realize_three_negative(classified(TWO_NEGATIVE))


class TestKNegative:
    """Tests for realize_k_negative."""

    def test_delegates(self):
        """Test that two negatives use the two-negative realizer."""
        assert realize_k_negative(classified(TWO_NEGATIVE)).strategy == "two-negative"

    def test_too_few_negatives(self):
        """Test that one negative is refused."""
        with pytest.raises(WrongShape):
            realize_k_negative(classified("3,1,1,-4"))
