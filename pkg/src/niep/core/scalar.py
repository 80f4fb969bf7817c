"""
Exact scalar arithmetic.

ExactScalar is a Gaussian rational ``re + im·i`` with both parts held as
``fractions.Fraction``. Float mode uses the builtin ``complex`` instead; the
helpers at the bottom of this module accept either kind.
"""

import math
import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Union

from niep.core.errors import ModeError, ParseError

Rational = Union[int, Fraction]


class Mode(str, Enum):
    """Arithmetic mode shared by a spectrum and every matrix built from it."""

    EXACT = "exact"
    FLOAT = "float"


@dataclass(frozen=True, slots=True)
class ExactScalar:
    """
    Gaussian rational in canonical form.

    Example:
        >>> ExactScalar(Fraction(1, 2), 3) * ExactScalar(0, 1)
        ExactScalar(re=Fraction(-3, 1), im=Fraction(1, 2))
    """

    re: Fraction
    im: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))

    # ----- construction -----

    @classmethod
    def of(cls, value: "ExactScalar | Rational | str") -> "ExactScalar":
        if isinstance(value, ExactScalar):
            return value
        if isinstance(value, str):
            parsed, exact = parse_scalar(value)
            if not exact:
                raise ModeError(f"{value!r} is irrational")
            assert isinstance(parsed, ExactScalar)
            return parsed
        return cls(Fraction(value))

    # ----- predicates -----

    @property
    def is_real(self) -> bool:
        return self.im == 0

    @property
    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def conjugate(self) -> "ExactScalar":
        return ExactScalar(self.re, -self.im)

    def abs2(self) -> Fraction:
        """Squared modulus, kept rational."""
        return self.re * self.re + self.im * self.im

    def real(self) -> Fraction:
        """Real part, asserting the imaginary part vanishes."""
        if self.im != 0:
            raise ModeError(f"{self} is not real")
        return self.re

    def to_complex(self) -> complex:
        return complex(float(self.re), float(self.im))

    # ----- arithmetic -----

    @staticmethod
    def _coerce(other: object) -> "ExactScalar | None":
        if isinstance(other, ExactScalar):
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return ExactScalar(Fraction(other))
        return None

    def __add__(self, other: object) -> "ExactScalar":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return ExactScalar(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other: object) -> "ExactScalar":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return ExactScalar(self.re - o.re, self.im - o.im)

    def __rsub__(self, other: object) -> "ExactScalar":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other: object) -> "ExactScalar":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.im == 0 and o.im == 0:
            return ExactScalar(self.re * o.re)
        return ExactScalar(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other: object) -> "ExactScalar":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.is_zero:
            raise ZeroDivisionError("division by an exact zero")
        if o.im == 0:
            return ExactScalar(self.re / o.re, self.im / o.re)
        return self * o.conjugate() / o.abs2()

    def __rtruediv__(self, other: object) -> "ExactScalar":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __neg__(self) -> "ExactScalar":
        return ExactScalar(-self.re, -self.im)

    def __pos__(self) -> "ExactScalar":
        return self

    def __pow__(self, exponent: int) -> "ExactScalar":
        if not isinstance(exponent, int):
            return NotImplemented
        if exponent < 0:
            return ExactScalar(1) / (self ** (-exponent))
        result = ExactScalar(1)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    # ----- comparisons (reals only) -----

    def __eq__(self, other: object) -> bool:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self) -> int:
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def _ordered(self, other: object) -> "tuple[Fraction, Fraction] | None":
        o = self._coerce(other)
        if o is None:
            return None
        if self.im != 0 or o.im != 0:
            raise ModeError(f"cannot order complex values {self} and {o}")
        return self.re, o.re

    def __lt__(self, other: object) -> bool:
        pair = self._ordered(other)
        if pair is None:
            return NotImplemented
        return pair[0] < pair[1]

    def __le__(self, other: object) -> bool:
        pair = self._ordered(other)
        if pair is None:
            return NotImplemented
        return pair[0] <= pair[1]

    def __gt__(self, other: object) -> bool:
        pair = self._ordered(other)
        if pair is None:
            return NotImplemented
        return pair[0] > pair[1]

    def __ge__(self, other: object) -> bool:
        pair = self._ordered(other)
        if pair is None:
            return NotImplemented
        return pair[0] >= pair[1]

    def __str__(self) -> str:
        return format_scalar(self)


Scalar = Union[ExactScalar, complex]

ZERO = ExactScalar(0)
ONE = ExactScalar(1)
I = ExactScalar(0, 1)


# ===== Generic helpers over exact and float scalars =====


def to_complex(value: object) -> complex:
    if isinstance(value, ExactScalar):
        return value.to_complex()
    if isinstance(value, (int, float, complex, Fraction)):
        return complex(value)
    raise TypeError(f"not a scalar: {value!r}")


def real_part(value: object) -> "Fraction | float":
    if isinstance(value, ExactScalar):
        return value.re
    if isinstance(value, Fraction):
        return value
    return complex(value).real  # type: ignore[arg-type]


def imag_part(value: object) -> "Fraction | float":
    if isinstance(value, ExactScalar):
        return value.im
    if isinstance(value, (int, Fraction)):
        return Fraction(0)
    return complex(value).imag  # type: ignore[arg-type]


def conjugate(value: Scalar) -> Scalar:
    return value.conjugate()


def is_exact(value: object) -> bool:
    return isinstance(value, (ExactScalar, int, Fraction))


def _format_fraction(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def _format_float(value: float) -> str:
    if value == 0:
        return "0"
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def format_scalar(value: object) -> str:
    """
    Render a scalar as ``p/q`` or ``a+bi``.

    Example:
        >>> format_scalar(ExactScalar(Fraction(-3, 4), 2))
        '-3/4+2i'
    """
    if isinstance(value, (int, Fraction)):
        return _format_fraction(Fraction(value))
    if isinstance(value, ExactScalar):
        re_part, im_part = value.re, value.im
        fmt = _format_fraction
    else:
        z = complex(value)  # type: ignore[arg-type]
        re_part, im_part = z.real, z.imag  # type: ignore[assignment]
        fmt = _format_float  # type: ignore[assignment]

    if im_part == 0:
        return fmt(re_part)  # type: ignore[arg-type]
    magnitude = abs(im_part)
    imag = "i" if magnitude == 1 else f"{fmt(magnitude)}i"  # type: ignore[arg-type]
    if re_part == 0:
        return f"-{imag}" if im_part < 0 else imag
    sign = "-" if im_part < 0 else "+"
    return f"{fmt(re_part)}{sign}{imag}"  # type: ignore[arg-type]


# ===== Text parsing =====

_NUMBER = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_RATIONAL = rf"{_NUMBER}(?:/\d+)?"
_ROOT = rf"(?:sqrt\(\s*{_RATIONAL}\s*\)|√\(?{_RATIONAL}\)?)"
_MAGNITUDE = rf"(?:{_RATIONAL}(?:\*?{_ROOT})?|{_ROOT})"
_IMAG = rf"(?:(?:{_MAGNITUDE})?\*?i|i\*?{_MAGNITUDE})"

_TOKEN_RE = re.compile(
    rf"^(?:(?P<re>[+-]?{_MAGNITUDE})(?P<im>[+-]{_IMAG})?|(?P<imonly>[+-]?{_IMAG}))$"
)
_MAGNITUDE_RE = re.compile(
    rf"^(?P<coef>{_RATIONAL})?\*?(?:sqrt\(\s*(?P<rad>{_RATIONAL})\s*\)|√\(?(?P<rad2>{_RATIONAL})\)?)?$"
)


def _rational(text: str) -> Fraction:
    head, _, tail = text.partition("/")
    value = Fraction(head)
    if tail:
        value /= int(tail)
    return value


def _exact_sqrt(value: Fraction) -> "Fraction | None":
    if value < 0:
        return None
    num_root = math.isqrt(value.numerator)
    den_root = math.isqrt(value.denominator)
    if num_root * num_root == value.numerator and den_root * den_root == value.denominator:
        return Fraction(num_root, den_root)
    return None


def _magnitude(text: str, position: int, token: str) -> "tuple[Fraction | float, bool]":
    """Value of an unsigned magnitude and whether it stayed rational."""
    text = text.replace("*", "")
    if text in ("", "i"):
        return Fraction(1), True
    match = _MAGNITUDE_RE.match(text)
    if match is None:
        raise ParseError(position, token)
    coef = _rational(match.group("coef")) if match.group("coef") else Fraction(1)
    radicand_text = match.group("rad") or match.group("rad2")
    if radicand_text is None:
        return coef, True
    radicand = _rational(radicand_text)
    root = _exact_sqrt(radicand)
    if root is not None:
        return coef * root, True
    return float(coef) * math.sqrt(float(radicand)), False


def _signed(text: str, position: int, token: str) -> "tuple[Fraction | float, bool]":
    sign = -1 if text.startswith("-") else 1
    value, exact = _magnitude(text.lstrip("+-").replace("i", ""), position, token)
    return sign * value, exact


def parse_scalar(token: str, position: int = 0) -> "tuple[Scalar, bool]":
    """
    Parse one spectrum entry.

    Args:
        token: Entry text such as ``-5/2``, ``4+3i``, ``2-0.5i`` or ``sqrt(3)i``
        position: Character offset of the token, used in error messages

    Returns:
        The parsed value and whether it is exact. Exact values are
        ExactScalar; irrational ones are complex.

    Raises:
        ParseError: If the token does not follow the grammar
    """
    cleaned = token.strip()
    match = _TOKEN_RE.match(cleaned)
    if match is None:
        raise ParseError(position, token)

    if match.group("imonly") is not None:
        re_value: "Fraction | float" = Fraction(0)
        re_exact = True
        im_value, im_exact = _signed(match.group("imonly"), position, token)
    else:
        re_value, re_exact = _signed(match.group("re"), position, token)
        if match.group("im") is not None:
            im_value, im_exact = _signed(match.group("im"), position, token)
        else:
            im_value, im_exact = Fraction(0), True

    if re_exact and im_exact:
        return ExactScalar(re_value, im_value), True  # type: ignore[arg-type]
    return complex(float(re_value), float(im_value)), False
