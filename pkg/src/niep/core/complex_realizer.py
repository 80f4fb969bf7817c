"""
Realizers for spectra with complex conjugate pairs.

Every construction uses one layout. Row 1 carries the Perron value; each
nonpositive real λ_j gets a Suleimanova cell (``A[1,j] = -λ_j``, a one in
the first column of L); each pair ``λ ± iμ`` gets a 2x2 cell at columns
(c, c+1)::

    A[1,c] = iμ    A[c,c] = λ - iμ    A[c,c+1] = -iμ    A[c+1,c+1] = λ + iμ
    L[c,1] = l (free)    L[c,c] = i
    L[c+1,1] = (λ/μ)² + 1    L[c+1,c] = 1 - (λ/μ)i

For λ > 0 row c+1 of L is plain ones instead. Further positive reals are
appended as 1x1 tail blocks.
"""

import logging
from fractions import Fraction
from typing import Any, Mapping, Optional, Sequence

from niep.core.errors import MethodInapplicable, WrongShape
from niep.core.layout import (
    EntryKind,
    Layout,
    append_tail,
    first_violation,
    parameter_name,
    realize_layout,
)
from niep.core.result_models import Realization, Strategy
from niep.core.scalar import I, ExactScalar, Mode, format_scalar
from niep.core.solver import solve_layout
from niep.core.spectrum import ClassifiedSpectrum, Pair

logger = logging.getLogger(__name__)


def _unit(mode: Mode) -> Any:
    return I if mode == Mode.EXACT else 1j


def _complex(re: Any, im: Any, mode: Mode) -> Any:
    if mode == Mode.EXACT:
        return ExactScalar(re, im)
    return complex(float(re), float(im))


def complex_layout(
    perron: Any,
    negatives: Sequence[Any],
    cells: Sequence[Pair],
    mode: Mode,
    strategy: Strategy,
) -> Layout:
    """Layout with the Perron row, Suleimanova cells and one 2x2 cell per pair copy."""
    n = 1 + len(negatives) + 2 * len(cells)
    diagonal: list[Any] = [perron, *negatives]
    for pair in cells:
        diagonal += [_complex(pair.re, -pair.mu, mode), _complex(pair.re, pair.mu, mode)]
    layout = Layout(n=n, mode=mode, strategy=strategy.value, diagonal=diagonal)
    i = _unit(mode)

    for col, value in enumerate(negatives, start=2):
        layout.set_a(1, col, -value, EntryKind.ALPHA)
        layout.alpha_rows[col] = 1
        layout.l_entries[(col, 1)] = 1

    col = 2 + len(negatives)
    for pair in cells:
        layout.set_a(1, col, i * pair.mu, EntryKind.COUPLER)
        layout.set_a(col, col + 1, -(i * pair.mu), EntryKind.COUPLER)
        layout.l_diagonal[col] = i
        layout.add_parameter("L", col, 1, EntryKind.L, Fraction(1))
        if pair.re > 0:
            layout.l_entries[(col + 1, 1)] = 1
            layout.l_entries[(col + 1, col)] = 1
        else:
            ratio = pair.re / pair.mu
            layout.l_entries[(col + 1, 1)] = ratio * ratio + 1
            layout.l_entries[(col + 1, col)] = 1 - i * ratio
        col += 2
    return layout


def _pieces(c: ClassifiedSpectrum) -> tuple[Any, list[Any], list[Any]]:
    """Perron value, nonpositive reals and tail positives in diagonal order."""
    if not c.is_complex:
        raise WrongShape("complex layouts need at least one conjugate pair")
    diagonal = list(c.diagonal)
    perron = diagonal[0]
    negatives = [x for x in diagonal[1:] if x <= 0]
    tail = [x for x in diagonal[1:] if x > 0]
    return perron, negatives, tail


def _preferred(perron: Any, cells: Sequence[Pair], offset: int) -> dict[str, Any]:
    """Three-by-three starting point: the centre of the l-interval of each cell."""
    preferred = {}
    col = offset
    for pair in cells:
        spread = perron - pair.re if pair.re > 0 else perron - 2 * pair.re
        preferred[parameter_name(EntryKind.L, col, 1)] = spread / (2 * pair.mu)
        col += 2
    return preferred


def _realize(
    layout: Layout,
    tail: Sequence[Any],
    overrides: Optional[Mapping[str, Any]],
    preferred: Optional[dict[str, Any]] = None,
) -> Realization:
    layout.apply_overrides(overrides or {})
    outcome = solve_layout(layout, preferred)
    realization = realize_layout(layout, outcome.values, outcome.certificate, outcome.intervals)
    violation = first_violation(realization.C)
    if violation is not None:
        i, j, value = violation
        raise MethodInapplicable(f"entry ({i},{j}) of C is {format_scalar(value)} < 0")
    logger.info("%s solved by %s stage", layout.strategy, outcome.stage)
    return append_tail(realization, tail)


# ===== Public operations =====


def realize_complex_3(
    perron: Any,
    pair: Pair,
    mode: Optional[Mode] = None,
    overrides: Optional[Mapping[str, Any]] = None,
    strategy: Strategy = Strategy.COMPLEX_3,
    tail: Sequence[Any] = (),
) -> Realization:
    """
    Realize ``(λ₁, λ ± iμ)``.

    For λ > 0 the free ``l.2.1`` must lie between the roots of
    ``μl² - (λ₁-λ)l + μ``; the search starts at ``(λ₁-λ)/(2μ)``. For λ ≤ 0
    row 3 of L is fixed to ``((λ/μ)²+1, 1-(λ/μ)i, 1)`` and the search
    starts at ``(λ₁-2λ)/(2μ)``. Either start is clamped into the interval
    the affine entries of C allow.

    Args:
        perron: Real Perron value λ₁
        pair: The pair ``(λ, μ)`` with μ > 0
        mode: Arithmetic mode; inferred from the values if None

    Raises:
        WrongShape: If μ ≤ 0
        EmptyInterval: If no l makes C nonnegative

    Example:
        >>> pair = Pair(Fraction(-2), Fraction(2))
        >>> r = realize_complex_3(Fraction(6), pair, overrides={"l.2.1": "2"})
        >>> [[str(v) for v in row] for row in r.C.rows]
        [['2', '2', '0'], ['8', '0', '2'], ['12', '0', '0']]
    """
    if pair.mu <= 0:
        raise WrongShape("the imaginary part of a pair must be positive")
    if mode is None:
        exact = all(isinstance(v, (int, Fraction)) for v in (perron, pair.re, pair.mu))
        mode = Mode.EXACT if exact else Mode.FLOAT
    if mode == Mode.EXACT:
        perron, pair = Fraction(perron), Pair(Fraction(pair.re), Fraction(pair.mu))
    cells = [pair]
    layout = complex_layout(perron, [], cells, mode, strategy)
    return _realize(layout, tail, overrides, _preferred(perron, cells, 2))


def realize_complex_4(
    c: ClassifiedSpectrum, overrides: Optional[Mapping[str, Any]] = None
) -> Realization:
    """
    Realize two reals and one conjugate pair.

    A positive λ₂ goes to a 1x1 tail block after the three-by-three
    construction; a nonpositive λ₂ gets a Suleimanova cell in row 1.

    Raises:
        WrongShape: Unless n = 4 with exactly one pair
        EmptyInterval: If no value of the free L entry works
    """
    if c.n != 4 or len(c.pair_order) != 1:
        raise WrongShape("complex-4 needs two real eigenvalues and one conjugate pair")
    perron, negatives, tail = _pieces(c)
    pair = c.pair_order[0]
    if tail:
        return realize_complex_3(
            perron, pair, c.mode, overrides, strategy=Strategy.COMPLEX_4, tail=tail
        )
    layout = complex_layout(perron, negatives, [pair], c.mode, Strategy.COMPLEX_4)
    return _realize(layout, tail, overrides)


def realize_complex_general(
    c: ClassifiedSpectrum, overrides: Optional[Mapping[str, Any]] = None
) -> Realization:
    """
    Realize any conjugate-closed spectrum with a Perron value by stacking cells.

    Every copy of a repeated pair gets its own cell, in order of first
    appearance. The free entries are the first-column L entries of the cell
    rows.

    Raises:
        WrongShape: If there is no conjugate pair
        EmptyInterval, MethodInapplicable: When the search fails
    """
    perron, negatives, tail = _pieces(c)
    layout = complex_layout(
        perron, negatives, list(c.pair_order), c.mode, Strategy.COMPLEX_GENERAL
    )
    layout.notes.append("example-derived")
    return _realize(layout, tail, overrides)
