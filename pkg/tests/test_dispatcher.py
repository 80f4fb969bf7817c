"""
Unit tests for strategy routing, diagonal orders and the run pipeline.
"""

import pytest
from pydantic import ValidationError

from niep.config import config
from niep.core.dispatcher import (
    REALIZERS,
    RunConfig,
    StrategyDispatcher,
    apply_order,
    dispatch,
    get_supported_strategies,
    permuted_layouts,
    run,
    split_tail,
)
from niep.core.errors import (
    ConstructionError,
    NumericalError,
    ParameterError,
    UnknownStrategy,
)
from niep.core.result_models import Strategy
from niep.core.serialization import to_json

from conftest import classified


class TestDispatch:
    """Tests for automatic routing."""

    @pytest.mark.parametrize(
        "spectrum,expected",
        [
            ("10,-2,-2,-2,-1,-1", Strategy.ONE_POSITIVE),
            ("7,3,-5,-5", Strategy.TWO_POSITIVE),
            ("6,2,2,-3,-3,-4", Strategy.K_POSITIVE),
            ("6,1,1,-4,-4", Strategy.TWO_NEGATIVE),
            ("8,2,2,2,1,-5,-5,-5", Strategy.THREE_NEGATIVE),
            ("6,-2+2i,-2-2i", Strategy.COMPLEX_3),
            ("6,-2,-2-i,-2+i", Strategy.COMPLEX_4),
            ("6,-2-3i,-2+3i,-1-i,-1+i", Strategy.COMPLEX_GENERAL),
        ],
    )
    def test_routing(self, spectrum, expected):
        """Test the strategy chosen for each spectrum shape."""
        assert dispatch(classified(spectrum)) == expected

    def test_named_strategy_wins(self):
        """Test that a named strategy bypasses routing."""
        cfg = RunConfig(spectrum="6,1,1,-4,-4", strategy="k-negative")
        assert dispatch(classified("6,1,1,-4,-4"), cfg) == Strategy.K_NEGATIVE

    def test_diagonal_routes_to_prescribed(self):
        """Test that a prescribed diagonal selects its own construction."""
        cfg = RunConfig(spectrum="10,-2,-2,-2,-1,-1", diagonal="2,2,2,2,1,1")
        assert dispatch(classified("10,-2,-2,-2,-1,-1"), cfg) == Strategy.PRESCRIBED_DIAGONAL

    def test_unknown_strategy(self):
        """Test that an unknown strategy id is refused."""
        with pytest.raises((UnknownStrategy, ValidationError)):
            RunConfig(spectrum="7,3,-5,-5", strategy="zigzag")

    def test_supported_strategies(self):
        """Test the list offered by --strategy."""
        names = get_supported_strategies()
        assert "two-negative" in names
        assert "permuted" not in names


class TestOrders:
    """Tests for diagonal orders and the permuted search."""

    def test_split_tail(self):
        """Test the trailing positive tail."""
        assert split_tail([6, 1, -4, -4, 1]) == ([6, 1, -4, -4], [1])
        assert split_tail([6, 1, -4, -4]) == ([6, 1, -4, -4], [])

    def test_apply_order(self):
        """Test that positions index the descending reals."""
        c = apply_order(classified("6,1,1,1,1,-4,-4"), [1, 2, 3, 4, 6, 7, 5])
        assert [str(x) for x in c.diagonal] == ["6", "1", "1", "1", "-4", "-4", "1"]

    @pytest.mark.parametrize("order", [[1, 2], [1, 1, 3, 4], [2, 1, 3, 4]])
    def test_bad_orders(self, order):
        """Test orders that are not permutations or move the Perron value."""
        with pytest.raises(ParameterError):
            apply_order(classified("7,3,-5,-5"), order)

    def test_negative_orderings(self):
        """Test that the default order is skipped."""
        layouts = list(permuted_layouts(classified("6,1,1,-3,-4")))
        assert [[str(x) for x in c.diagonal] for c in layouts] == [["6", "1", "1", "-4", "-3"]]

    def test_tail_search_and_cap(self):
        """Test that tail subsets add layouts and the cap bounds them."""
        c = classified("6,1,1,-3,-4")
        assert len(list(permuted_layouts(c, tail_search=True))) == 5
        assert len(list(permuted_layouts(c, tail_search=True, cap=2))) == 2

    def test_pair_orderings(self):
        """Test that complex spectra permute their cells."""
        c = classified("6,-1+i,-1-i,-2+i,-2-i")
        layouts = list(permuted_layouts(c))
        assert len(layouts) == 1
        assert layouts[0].pair_order == tuple(reversed(c.pair_order))


class TestStrategyDispatcher:
    """Tests for the fallback chain."""

    def test_named_strategy_fails_directly(self):
        """Test that a named strategy does not fall back."""
        cfg = RunConfig(spectrum="6,1,1,1,1,-4,-4", strategy="two-negative")
        dispatcher = StrategyDispatcher(cfg)
        with pytest.raises(ConstructionError):
            dispatcher.realize(classified(cfg.spectrum))
        assert len(dispatcher.diagnostics) == 1

    def test_verified_attempt(self):
        """Test that a successful attempt carries its verification."""
        attempt = StrategyDispatcher(RunConfig(spectrum="7,3,-5,-5")).realize(
            classified("7,3,-5,-5")
        )
        assert attempt.strategy == Strategy.TWO_POSITIVE
        assert attempt.verification.verified


class TestRun:
    """Tests for the full pipeline."""

    def test_success(self):
        """Test a realized spectrum end to end."""
        report = run(RunConfig(spectrum="7,3,-5,-5"))
        assert report.exit_code == 0
        assert report.strategy == "two-positive"
        assert report.C == [
            ["0", "2", "5", "0"],
            ["2", "0", "0", "5"],
            ["5", "2", "0", "0"],
            ["2", "5", "0", "0"],
        ]
        assert report.params["order"] == ["7", "3", "-5", "-5"]
        assert report.verification.verified

    def test_power_sum_failure(self):
        """Test that a negative trace stops the run with exit code 1."""
        report = run(RunConfig(spectrum="1,-1,-1"))
        assert report.exit_code == 1
        assert report.failure.error == "NecessaryConditionError"
        assert report.C is None

    def test_no_perron_value(self):
        """Test a spectrum without a Perron value."""
        report = run(RunConfig(spectrum="-1,-2"))
        assert report.exit_code == 1
        assert report.failure.kind == "condition"
        assert report.conditions is not None
        assert not report.conditions.perron_ok

    def test_construction_failure(self):
        """Test that a failed construction exits with code 2."""
        report = run(RunConfig(spectrum="6,1,1,1,1,-4,-4", strategy="two-negative"))
        assert report.exit_code == 2
        assert report.failure.kind == "construction"
        assert report.diagnostics

    def test_default_search_keeps_positives(self):
        """Test that six positives over two negatives stay inapplicable without tail search."""
        report = run(RunConfig(spectrum="6,1,1,1,1,-4,-4", tail_search=False))
        assert report.exit_code == 2

    def test_tail_search_finds_layout(self):
        """Test that moving one positive to a tail block realizes the spectrum."""
        report = run(RunConfig(spectrum="6,1,1,1,1,-4,-4", tail_search=True))
        assert report.exit_code == 0
        assert report.strategy == "permuted"
        assert report.params["order"] == ["6", "1", "1", "1", "-4", "-4", "1"]
        assert any(note.startswith("permuted from") for note in report.params["notes"])

    def test_reordered_tail(self):
        """Test an explicit order that leaves a positive behind the negatives."""
        report = run(RunConfig(spectrum="6,1,1,1,1,-4,-4", order=[1, 2, 3, 4, 6, 7, 5]))
        assert report.exit_code == 0
        assert report.C[6] == ["0", "0", "0", "0", "0", "0", "1"]

    def test_parse_error(self):
        """Test that malformed input is an input failure."""
        report = run(RunConfig(spectrum="6,abc"))
        assert report.exit_code == 1
        assert report.failure.kind == "input"

    def test_tolerance_restored(self):
        """Test that a per-run tolerance does not leak into the config."""
        saved = config.tolerance
        run(RunConfig(spectrum="7,3,-5,-5", tolerance=1e-6))
        assert config.tolerance == saved

    def test_json_is_deterministic(self):
        """Test that two identical runs serialize identically."""
        cfg = RunConfig(spectrum="6,1,1,-4,-4")
        assert to_json(run(cfg)) == to_json(run(cfg))


def _divide_by_zero(c, overrides):
    return 1 / 0


class TestStrayErrors:
    """Tests for arithmetic errors escaping a realizer."""

    def test_attempt_wraps_arithmetic_error(self, monkeypatch):
        """Test that a ZeroDivisionError becomes a NumericalError."""
        monkeypatch.setitem(REALIZERS, Strategy.TWO_POSITIVE, _divide_by_zero)
        dispatcher = StrategyDispatcher(RunConfig(spectrum="7,3,-5,-5", strategy="two-positive"))
        with pytest.raises(NumericalError) as info:
            dispatcher.attempt(classified("7,3,-5,-5"), Strategy.TWO_POSITIVE)
        assert isinstance(info.value.__cause__, ZeroDivisionError)

    def test_run_reports_numerical_failure(self, monkeypatch):
        """Test that the run exits with code 1 instead of a traceback."""
        monkeypatch.setitem(REALIZERS, Strategy.TWO_POSITIVE, _divide_by_zero)
        report = run(RunConfig(spectrum="7,3,-5,-5", strategy="two-positive"))
        assert report.exit_code == 1
        assert report.failure.kind == "numerical"
        assert report.failure.error == "NumericalError"
        assert "ZeroDivisionError" in report.failure.message
