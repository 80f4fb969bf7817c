"""
Spectrum parsing, classification and necessary conditions.

A spectrum is read from text, checked for conjugate closure, then classified
into its Perron value, real part and conjugate pairs. ``necessary_conditions``
evaluates the Perron, power-sum and JLL conditions without constructing
anything.
"""

import logging
import re
from collections import Counter
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional, Sequence, Union

from niep.config import config
from niep.core.errors import (
    ConjugateClosureError,
    ModeError,
    NoPerronError,
    ParseError,
    WrongShape,
)
from niep.core.result_models import ConditionReport
from niep.core.scalar import ExactScalar, Mode, Scalar, format_scalar, parse_scalar, to_complex

logger = logging.getLogger(__name__)

Real = Union[Fraction, float]

_TOKENS = re.compile(r"[^,\s]+")
_FLOAT_CONJUGATE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class SpectrumInput:
    """A prescribed spectrum as typed, in input order."""

    values: tuple[Scalar, ...]
    mode: Mode
    source: str = ""

    @property
    def n(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class Pair:
    """A conjugate pair ``re ± i·mu`` with ``mu > 0``."""

    re: Real
    mu: Real
    multiplicity: int = 1


@dataclass(frozen=True)
class ClassifiedSpectrum:
    """
    Classified view of a spectrum.

    ``reals`` is sorted descending; ``diagonal`` is the order the real
    eigenvalues take on the diagonal of A (descending unless a permuted
    layout asked otherwise). ``pair_order`` lists one entry per pair copy in
    order of first appearance and is the order of the complex cells.
    """

    n: int
    mode: Mode
    values: tuple[Scalar, ...]
    reals: tuple[Real, ...]
    pairs: tuple[Pair, ...]
    pair_order: tuple[Pair, ...]
    perron: Real
    k_pos: int
    s1: Real
    power_sums: tuple[Real, ...]
    diagonal: tuple[Real, ...] = field(default=())

    @property
    def k_neg(self) -> int:
        return sum(1 for x in self.reals if x <= 0)

    @property
    def is_complex(self) -> bool:
        return bool(self.pairs)

    @property
    def positives(self) -> tuple[Real, ...]:
        return tuple(x for x in self.diagonal if x > 0)

    @property
    def negatives(self) -> tuple[Real, ...]:
        """Nonpositive reals, in diagonal order."""
        return tuple(x for x in self.diagonal if x <= 0)

    def with_diagonal(self, diagonal: Sequence[Real]) -> "ClassifiedSpectrum":
        if sorted(diagonal, reverse=True) != list(self.reals):
            raise WrongShape("a diagonal order must permute the real eigenvalues")
        return replace(self, diagonal=tuple(diagonal))

    def with_pair_order(self, pair_order: Sequence[Pair]) -> "ClassifiedSpectrum":
        return replace(self, pair_order=tuple(pair_order))


# ===== Parsing =====


def _conjugate_key(value: Scalar) -> Scalar:
    return value.conjugate()


def _check_closure(values: Sequence[Scalar], mode: Mode) -> None:
    if mode == Mode.EXACT:
        counts = Counter(values)
        for value in values:
            if counts[value] != counts[_conjugate_key(value)]:
                raise ConjugateClosureError(format_scalar(value))
        return

    unmatched = [to_complex(v) for v in values]
    while unmatched:
        z = unmatched.pop(0)
        if abs(z.imag) <= _FLOAT_CONJUGATE_TOLERANCE * max(1.0, abs(z)):
            continue
        target = z.conjugate()
        best = min(range(len(unmatched)), key=lambda k: abs(unmatched[k] - target), default=None)
        if best is None or abs(unmatched[best] - target) > _FLOAT_CONJUGATE_TOLERANCE * max(
            1.0, abs(z)
        ):
            raise ConjugateClosureError(format_scalar(z))
        unmatched.pop(best)


def parse_spectrum(text: str, mode: Optional[Mode] = None) -> SpectrumInput:
    """
    Parse a comma and/or whitespace separated list of eigenvalues.

    Args:
        text: Spectrum text, e.g. ``"10,-2,-2,-2,-1,-1"`` or ``"6 -2 -2-i -2+i"``
        mode: Force a mode; irrational entries force float mode regardless

    Returns:
        SpectrumInput in exact mode if every entry is a Gaussian rational

    Raises:
        ParseError: On an unrecognised token or an empty list
        ConjugateClosureError: If a complex value has no conjugate partner
        ModeError: If exact mode is forced on irrational input

    Example:
        >>> parse_spectrum("4+3i, 4-3i, 12").mode
        <Mode.EXACT: 'exact'>
    """
    parsed: list[Scalar] = []
    exact = True
    for match in _TOKENS.finditer(text):
        value, token_exact = parse_scalar(match.group(0), match.start())
        parsed.append(value)
        exact = exact and token_exact
    if not parsed:
        raise ParseError(0, text, "empty spectrum")

    if mode == Mode.EXACT and not exact:
        raise ModeError("exact mode requested for an irrational spectrum")
    chosen = Mode.EXACT if exact and mode != Mode.FLOAT else Mode.FLOAT
    values = tuple(parsed) if chosen == Mode.EXACT else tuple(to_complex(v) for v in parsed)
    _check_closure(values, chosen)
    return SpectrumInput(values=values, mode=chosen, source=text)


def format_spectrum(values: Sequence[Scalar]) -> str:
    """Render a spectrum so that ``parse_spectrum`` reads it back."""
    return ", ".join(format_scalar(v) for v in values)


# ===== Classification =====


def _real(value: Scalar, mode: Mode) -> Real:
    if mode == Mode.EXACT:
        assert isinstance(value, ExactScalar)
        return value.re
    return to_complex(value).real


def _imag(value: Scalar, mode: Mode) -> Real:
    if mode == Mode.EXACT:
        assert isinstance(value, ExactScalar)
        return value.im
    return to_complex(value).imag


def _is_real(value: Scalar, mode: Mode) -> bool:
    if mode == Mode.EXACT:
        return value.im == 0  # type: ignore[union-attr]
    z = to_complex(value)
    return abs(z.imag) <= _FLOAT_CONJUGATE_TOLERANCE * max(1.0, abs(z))


def power_sum(values: Sequence[Scalar], k: int, mode: Mode) -> Real:
    """``Σ λᵢᵏ``, real for a conjugate-closed list."""
    if mode == Mode.EXACT:
        total = ExactScalar(0)
        for v in values:
            total = total + v**k  # type: ignore[operator]
        return total.re
    return sum(to_complex(v) ** k for v in values).real


def classify(s: SpectrumInput) -> ClassifiedSpectrum:
    """
    Split a spectrum into its Perron value, reals and conjugate pairs.

    Raises:
        NoPerronError: If no real eigenvalue is nonnegative and dominates every modulus

    Example:
        >>> c = classify(parse_spectrum("6,1,1,-4,-4"))
        >>> (c.n, c.k_pos, c.s1)
        (5, 3, Fraction(0, 1))
    """
    mode = s.mode
    reals: list[Real] = []
    pair_order: list[Pair] = []
    cells: Counter = Counter()
    seen: dict[bool, Counter] = {True: Counter(), False: Counter()}
    for value in s.values:
        if _is_real(value, mode):
            reals.append(_real(value, mode))
            continue
        im = _imag(value, mode)
        key = (_real(value, mode), abs(im))
        side = seen[im > 0]
        side[key] += 1
        if side[key] > cells[key]:
            cells[key] += 1
            pair_order.append(Pair(*key))
    reals.sort(reverse=True)

    if not reals:
        raise NoPerronError("spectrum has no real eigenvalue to serve as Perron value")
    perron = reals[0]
    if perron < 0:
        raise NoPerronError(f"largest real eigenvalue {format_scalar(perron)} is negative", perron)

    bound = perron * perron
    for value in s.values:
        modulus2 = value.abs2() if mode == Mode.EXACT else abs(to_complex(value)) ** 2  # type: ignore[union-attr]
        slack = 0 if mode == Mode.EXACT else 1e-12 * max(1.0, float(bound))
        if modulus2 > bound + slack:
            raise NoPerronError(
                f"|{format_scalar(value)}| exceeds the largest real eigenvalue "
                f"{format_scalar(perron)}",
                format_scalar(value),
            )

    grouped: dict[tuple[Real, Real], int] = {}
    for pair in pair_order:
        key = (pair.re, pair.mu)
        grouped[key] = grouped.get(key, 0) + 1
    pairs = tuple(
        Pair(re, mu, count)
        for (re, mu), count in sorted(grouped.items(), key=lambda item: -item[0][0])
    )

    n = s.n
    sums = tuple(power_sum(s.values, k, mode) for k in range(1, n + 1))
    return ClassifiedSpectrum(
        n=n,
        mode=mode,
        values=s.values,
        reals=tuple(reals),
        pairs=pairs,
        pair_order=tuple(pair_order),
        perron=perron,
        k_pos=sum(1 for x in reals if x > 0),
        s1=sums[0],
        power_sums=sums,
        diagonal=tuple(reals),
    )


def classify_reals(reals: Sequence[Real], mode: Mode = Mode.EXACT) -> ClassifiedSpectrum:
    """Classify a real list given directly, keeping its order as the diagonal."""
    values = tuple(ExactScalar(x) if mode == Mode.EXACT else complex(x) for x in reals)
    classified = classify(SpectrumInput(values=values, mode=mode))
    return classified.with_diagonal(reals)


# ===== Necessary conditions =====


def necessary_conditions(
    c: ClassifiedSpectrum,
    jll_k_max: Optional[int] = None,
    jll_m_max: Optional[int] = None,
) -> ConditionReport:
    """
    Evaluate the Perron, power-sum and JLL necessary conditions.

    The JLL family ``s_k^m ≤ n^(m-1)·s_(km)`` is checked for
    ``1 ≤ k ≤ jll_k_max`` and ``1 ≤ m ≤ jll_m_max``. Failures are reported,
    never raised.

    Args:
        c: Classified spectrum
        jll_k_max: Largest k (default ``config.jll_k_max`` or n)
        jll_m_max: Largest m (default ``config.jll_m_max``)

    Returns:
        ConditionReport whose ``overall`` is the conjunction of the three checks
    """
    k_max = jll_k_max if jll_k_max is not None else (config.jll_k_max or c.n)
    m_max = jll_m_max if jll_m_max is not None else config.jll_m_max
    if k_max < 1 or m_max < 1:
        raise ValueError("JLL bounds must be at least 1")

    exact = c.mode == Mode.EXACT
    slack = 0.0 if exact else 1e-9

    cache: dict[int, Real] = {k + 1: s for k, s in enumerate(c.power_sums)}

    def s(k: int) -> Real:
        if k not in cache:
            cache[k] = power_sum(c.values, k, c.mode)
        return cache[k]

    power_failure = None
    for k in range(1, c.n + 1):
        if s(k) < -slack * max(1.0, abs(float(c.perron)) ** k):
            power_failure = k
            break

    jll_failure = None
    for k in range(1, k_max + 1):
        for m in range(1, m_max + 1):
            lhs = s(k) ** m
            rhs = c.n ** (m - 1) * s(k * m)
            if lhs > rhs + slack * max(1.0, abs(float(rhs))):
                jll_failure = (k, m)
                break
        if jll_failure:
            break
    if jll_failure:
        logger.warning("JLL inequality fails at k=%d, m=%d", *jll_failure)

    witness = None
    if power_failure is not None:
        witness = f"s{power_failure} = {format_scalar(s(power_failure))}"
    elif jll_failure is not None:
        k, m = jll_failure
        witness = f"s{k}^{m} > {c.n}^{m - 1}·s{k * m}"

    return ConditionReport(
        perron_ok=True,
        perron_witness=format_scalar(c.perron),
        power_sums_ok=power_failure is None,
        power_sum_failure=power_failure,
        jll_ok=jll_failure is None,
        jll_failure=jll_failure,
        power_sums=[format_scalar(x) for x in c.power_sums],
        witness=witness,
    )


def perron_failure_report(error: NoPerronError) -> ConditionReport:
    """Condition report for a spectrum rejected during classification."""
    return ConditionReport(
        perron_ok=False,
        perron_witness=None if error.witness is None else str(error.witness),
        power_sums_ok=True,
        jll_ok=True,
        witness=str(error),
    )
