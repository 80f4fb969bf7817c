"""
Realizers for real spectra with more positive than negative eigenvalues.

Both layouts keep the staircase idea of owner rows and couplers but leave a
handful of A and L entries free; ``niep.core.solver`` picks them.

Chained layout (m negatives, k positives): the negatives are owned in order
by the last m positive rows, couplers chain every positive row to the next,
and the free entries are the couplers below each owner together with the
first ``k - m`` entries of the last m-1 positive rows of L and of its last
row. Every entry of C is affine in these, so interval propagation is exact.

Split layout (three negatives, ``variant=split``): row 1 owns the first
negative and the remaining positives form two chains whose ends own the
other two. L is fixed and the free entries sit in A, so C is linear.
"""

import logging
import math
from fractions import Fraction
from typing import Any, Mapping, Optional

from niep.config import config
from niep.core.errors import MethodInapplicable, ParameterError, ShapeConflict, WrongShape
from niep.core.layout import EntryKind, Layout, coerce_value, first_violation, realize_layout
from niep.core.result_models import CertificateEntry, Realization, Strategy
from niep.core.scalar import Mode, format_scalar, real_part
from niep.core.solver import solve_layout
from niep.core.spectrum import ClassifiedSpectrum

logger = logging.getLogger(__name__)

CHAINED = "chained"
SPLIT = "split"


def _tolerance(mode: Mode) -> Any:
    return Fraction(0) if mode == Mode.EXACT else config.tolerance


def _shape(c: ClassifiedSpectrum) -> tuple[list[Any], int, int]:
    if c.is_complex:
        raise WrongShape("many-positive layouts need a real spectrum")
    lam = list(c.diagonal)
    k = 0
    while k < len(lam) and lam[k] > 0:
        k += 1
    if any(x > 0 for x in lam[k:]):
        raise WrongShape("positive eigenvalues must precede the nonpositive ones on the diagonal")
    return lam, k, len(lam) - k


def _take_overrides(
    overrides: Optional[Mapping[str, Any]], mode: Mode, n: int
) -> tuple[dict[int, Any], Optional[str], dict[str, Any]]:
    alphas: dict[int, Any] = {}
    variant: Optional[str] = None
    rest: dict[str, Any] = {}
    for key, raw in (overrides or {}).items():
        if key == "variant":
            variant = str(raw).strip().lower()
            if variant not in (CHAINED, SPLIT):
                raise ParameterError(f"unknown layout variant {raw!r}")
        elif key.startswith("alphas."):
            try:
                j = int(key.split(".", 1)[1])
            except ValueError as exc:
                raise ParameterError(f"malformed parameter key {key!r}") from exc
            if not 2 <= j <= n:
                raise ParameterError(f"{key} is outside columns 2..{n}")
            alphas[j] = coerce_value(raw, mode)
        else:
            rest[key] = raw
    return alphas, variant, rest


def _alpha_certificate(lam: list[Any], alphas: Mapping[int, Any]) -> list[CertificateEntry]:
    return [
        CertificateEntry(description=f"alpha_{j} + lambda_{j} >= 0", margin=a + lam[j - 1])
        for j, a in sorted(alphas.items())
    ]


def _check_alpha_margins(entries: list[CertificateEntry], tolerance: Any) -> None:
    for entry in entries:
        if not entry.holds(tolerance):
            raise MethodInapplicable(f"{entry.description} fails: {format_scalar(entry.margin)}")


# ===== Layouts =====


def chained_layout(
    c: ClassifiedSpectrum, strategy: Strategy, alphas: Optional[Mapping[int, Any]] = None
) -> Layout:
    """
    Chained layout for m negatives and k = n - m positives.

    Raises:
        ShapeConflict: If there are not more positives than negatives
    """
    lam, k, m = _shape(c)
    n = len(lam)
    if m < 1 or k - m < 1:
        raise ShapeConflict(f"chained layout needs k > m, got k={k}, m={m}")
    alpha = {j: (alphas or {}).get(j, -lam[j - 1]) for j in range(2, n + 1)}
    owner = {k + 1 + i: k - m + 1 + i for i in range(m)}

    layout = Layout(n=n, mode=c.mode, strategy=strategy.value, diagonal=lam)
    coupler = lam[0] * 0
    owned = {row: col for col, row in owner.items()}
    for row in range(k, 1, -1):
        coupler = coupler + alpha[row] + (alpha[owned[row]] if row in owned else 0)
        layout.set_a(row - 1, row, coupler, EntryKind.COUPLER)
    for col, row in owner.items():
        layout.set_a(row, col, alpha[col], EntryKind.ALPHA)
        layout.alpha_rows[col] = row

    for row in range(2, k + 1):
        for col in range(1, row):
            layout.l_entries[(row, col)] = 1
    for col, row in owner.items():
        for j in range(1, row + 1):
            layout.l_entries[(col, j)] = 1

    for col, row in sorted(owner.items()):
        for below in range(row + 1, k + 1):
            layout.add_parameter("A", below, col, EntryKind.COUPLER, Fraction(0))
    for row in list(range(k - m + 2, k + 1)) + [n]:
        for col in range(1, k - m + 1):
            layout.add_parameter("L", row, col, EntryKind.L, Fraction(1))
    layout.notes.append(f"chained layout: k={k}, m={m}")
    return layout


def split_layout(
    c: ClassifiedSpectrum, strategy: Strategy, alphas: Optional[Mapping[int, Any]] = None
) -> Layout:
    """
    Split layout for three negatives.

    Row 1 owns column k+1. Positives 2..h and h+1..k, with
    ``h = 1 + ceil((k-1)/2)``, form two chains hanging off row 1; their ends
    own columns k+2 and k+3.

    Raises:
        ShapeConflict: Unless there are exactly three negatives and at least three positives
    """
    lam, k, m = _shape(c)
    n = len(lam)
    if m != 3 or k < 3:
        raise ShapeConflict(f"split layout needs three negatives and k >= 3, got k={k}, m={m}")
    alpha = {j: (alphas or {}).get(j, -lam[j - 1]) for j in range(2, n + 1)}
    h = 1 + math.ceil((k - 1) / 2)
    chains = [list(range(2, h + 1)), list(range(h + 1, k + 1))]
    owner = {k + 1: 1, k + 2: chains[0][-1], k + 3: chains[1][-1]}
    parent = {}
    for chain in chains:
        for index, row in enumerate(chain):
            parent[row] = chain[index - 1] if index else 1

    layout = Layout(n=n, mode=c.mode, strategy=strategy.value, diagonal=lam)
    owned = {row: col for col, row in owner.items()}
    for chain in chains:
        coupler = lam[0] * 0
        for row in reversed(chain):
            coupler = coupler + alpha[row] + (alpha[owned[row]] if row in owned else 0)
            layout.set_a(parent[row], row, coupler, EntryKind.COUPLER)
    for col, row in owner.items():
        layout.set_a(row, col, alpha[col], EntryKind.ALPHA)
        layout.alpha_rows[col] = row

    def ancestors(row: int) -> list[int]:
        path = []
        while row != 1:
            row = parent[row]
            path.append(row)
        return path

    for row in range(2, k + 1):
        for col in ancestors(row):
            layout.l_entries[(row, col)] = 1
    for col, row in owner.items():
        for j in [row] + ancestors(row):
            layout.l_entries[(col, j)] = 1

    layout.add_parameter("A", 2, h + 1, EntryKind.COUPLER, Fraction(0))
    for row in range(2, k + 1):
        layout.add_parameter("A", row, k + 1, EntryKind.COUPLER, Fraction(0))
    layout.parameters.sort(key=lambda p: (p.row, p.col))
    layout.notes.append(f"split layout: chains {chains[0]} and {chains[1]}")
    return layout


# ===== Solving =====


def _solve(
    layout: Layout,
    lam: list[Any],
    alphas: Mapping[int, Any],
    rest: Mapping[str, Any],
) -> Realization:
    tolerance = _tolerance(layout.mode)
    owned = {j: a for j, a in alphas.items() if j in layout.alpha_rows}
    certificate = _alpha_certificate(lam, owned)
    _check_alpha_margins(certificate, tolerance)
    layout.apply_overrides(rest)
    outcome = solve_layout(layout)
    certificate.extend(outcome.certificate)
    realization = realize_layout(layout, outcome.values, certificate, outcome.intervals)
    violation = first_violation(realization.C)
    if violation is not None:
        i, j, value = violation
        raise MethodInapplicable(f"entry ({i},{j}) of C is {format_scalar(value)} < 0")
    logger.info(
        "%s solved %d free parameter(s) by %s",
        layout.strategy,
        len(outcome.values),
        outcome.stage,
    )
    return realization


def _realize(
    c: ClassifiedSpectrum,
    strategy: Strategy,
    overrides: Optional[Mapping[str, Any]],
    default_variant: str = CHAINED,
) -> Realization:
    lam = list(c.diagonal)
    given, variant, rest = _take_overrides(overrides, c.mode, c.n)
    alphas = {j: given.get(j, -lam[j - 1]) for j in range(2, c.n + 1)}
    variant = variant or default_variant
    if variant == SPLIT:
        layout = split_layout(c, strategy, alphas)
    else:
        layout = chained_layout(c, strategy, alphas)
    return _solve(layout, lam, alphas, rest)


def realize_two_negative(
    c: ClassifiedSpectrum, overrides: Optional[Mapping[str, Any]] = None
) -> Realization:
    """
    Realize a real spectrum with exactly two nonpositive eigenvalues.

    For ``(6,1,1,-4,-4)`` the free entries are ``couplers.3.4``, ``l.3.1``
    and ``l.5.1``; their intervals are ``[-4,-3]``, then ``l.3.1`` and
    ``l.5.1`` in ranges that depend on the earlier choices.

    Raises:
        WrongShape: Unless exactly two eigenvalues are nonpositive
        EmptyInterval: Naming the first empty feasibility interval
        MethodInapplicable: If the search finds no point, or if C[1,2]
            differs from ``λ₁ - s₁``
    """
    _, k, m = _shape(c)
    if m != 2:
        raise WrongShape(f"two-negative needs exactly two nonpositive eigenvalues, got {m}")
    realization = _realize(c, Strategy.TWO_NEGATIVE, overrides)
    expected = c.diagonal[0] - c.s1
    corner = real_part(realization.C[0, 1])
    if abs(corner - expected) > _tolerance(c.mode):
        raise MethodInapplicable(
            f"C[1,2] = {format_scalar(corner)} differs from "
            f"lambda_1 - s_1 = {format_scalar(expected)}"
        )
    realization.certificate.append(
        CertificateEntry(description="C[1,2] = lambda_1 - s_1 >= 0", margin=expected)
    )
    return realization


def realize_three_negative(
    c: ClassifiedSpectrum, overrides: Optional[Mapping[str, Any]] = None
) -> Realization:
    """
    Realize a real spectrum with exactly three nonpositive eigenvalues.

    ``--set variant=split`` selects the two-chain layout; the default is the
    chained one.

    Raises:
        WrongShape: Unless exactly three eigenvalues are nonpositive
        ShapeConflict: If the chosen layout does not fit the spectrum size
        EmptyInterval, MethodInapplicable: When the search fails
    """
    _, _, m = _shape(c)
    if m != 3:
        raise WrongShape(f"three-negative needs exactly three nonpositive eigenvalues, got {m}")
    return _realize(c, Strategy.THREE_NEGATIVE, overrides)


def realize_k_negative(
    c: ClassifiedSpectrum, overrides: Optional[Mapping[str, Any]] = None
) -> Realization:
    """Chained layout for any m ≥ 2 negatives; delegates for m ∈ {2, 3}."""
    _, k, m = _shape(c)
    if m == 2:
        return realize_two_negative(c, overrides)
    if m == 3:
        return realize_three_negative(c, overrides)
    if m < 2:
        raise WrongShape(f"k-negative needs at least two nonpositive eigenvalues, got {m}")
    return _realize(c, Strategy.K_NEGATIVE, overrides)
