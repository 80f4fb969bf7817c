"""
C = L·A·L⁻¹ as polynomials in a layout's free parameters.

Free parameters become real sympy symbols. The similarity is formed over a
sympy ``Matrix`` and every entry is expanded, split into real and imaginary
parts and wrapped in a ``PolynomialEntry``, from which the solver reads
constant, affine and univariate structure. Exact layouts keep rational
coefficients end to end; float layouts carry sympy Floats.
"""

from fractions import Fraction
from typing import Any, Callable, Optional, Sequence

import numpy as np
import sympy as sp

from niep.core.errors import ImaginaryResidue
from niep.core.scalar import ExactScalar, Mode, to_complex


def parameter_symbols(names: Sequence[str]) -> list[sp.Symbol]:
    return [sp.Symbol(name, real=True) for name in names]


def _rational(value: Fraction) -> sp.Rational:
    return sp.Rational(value.numerator, value.denominator)


def to_sympy(value: Any) -> sp.Expr:
    """
    Convert a scalar of either mode (or a sympy expression) to sympy.

    ExactScalar, int and Fraction map to exact Gaussian rationals; float and
    complex map to Floats.
    """
    if isinstance(value, sp.Basic):
        return value
    if isinstance(value, ExactScalar):
        return _rational(value.re) + sp.I * _rational(value.im)
    if isinstance(value, (int, Fraction)):
        return _rational(Fraction(value))
    z = to_complex(value)
    if z.imag == 0:
        return sp.Float(z.real)
    return sp.Float(z.real) + sp.I * sp.Float(z.imag)


def from_sympy(value: sp.Expr, exact: bool) -> Any:
    """A real sympy number as a Fraction (exact) or float."""
    if exact:
        rational = sp.nsimplify(value, rational=True) if value.is_Float else value
        return Fraction(int(rational.p), int(rational.q))
    return float(value)


class PolynomialEntry:
    """
    One entry of C as a real polynomial in the free parameters.

    Example:
        >>> x = parameter_symbols(["x"])
        >>> PolynomialEntry(6 - 2 * x[0], x).affine_coefficients()
        (Fraction(6, 1), [Fraction(-2, 1)])
    """

    __slots__ = ("expr", "symbols", "exact", "degree", "_terms", "_function")

    def __init__(self, expr: sp.Expr, symbols: Sequence[sp.Symbol], exact: bool = True):
        self.expr = sp.expand(expr)
        self.symbols = tuple(symbols)
        self.exact = exact
        self._function: Optional[Callable[..., Any]] = None
        if self.symbols:
            poly = sp.Poly(self.expr, *self.symbols)
            self.degree = poly.total_degree() if not poly.is_zero else 0
            self._terms = [
                (from_sympy(c, exact), monomial) for monomial, c in poly.terms() if c != 0
            ]
        else:
            self.degree = 0
            self._terms = [] if self.expr == 0 else [(from_sympy(self.expr, exact), ())]

    @property
    def is_constant(self) -> bool:
        return all(not any(monomial) for _, monomial in self._terms)

    @property
    def is_affine(self) -> bool:
        return self.degree <= 1

    def affine_coefficients(self) -> tuple[Any, list[Any]]:
        """``(constant, [coefficient of each symbol])`` of an affine entry."""
        if not self.is_affine:
            raise ValueError(f"{self.expr} is not affine")
        zero: Any = Fraction(0) if self.exact else 0.0
        constant = zero
        linear = [zero] * len(self.symbols)
        for coefficient, monomial in self._terms:
            if any(monomial):
                linear[monomial.index(1)] = coefficient
            else:
                constant = coefficient
        return constant, linear

    def univariate_coefficients(self) -> list[float]:
        """Float coefficients, constant term first, of an entry in one symbol."""
        if len(self.symbols) != 1:
            raise ValueError("entry depends on more than one parameter")
        coefficients = [0.0] * (self.degree + 1)
        for coefficient, (power,) in self._terms:
            coefficients[power] += float(coefficient)
        return coefficients

    def evaluate(self, point: Sequence[Any]) -> Any:
        """
        Value at ``point``: a Fraction for an exact entry at Fractions, otherwise a float.
        """
        total: Any = Fraction(0) if self.exact else 0.0
        for coefficient, monomial in self._terms:
            term = coefficient
            for k, power in enumerate(monomial):
                if power:
                    term = term * point[k] ** power
            total = total + term
        return total

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        """Vectorised float evaluation over an ``(N, d)`` array of points."""
        if self._function is None:
            self._function = sp.lambdify(self.symbols, sp.N(self.expr), "numpy")
        values = self._function(*points.T) if self.symbols else self._function()
        return np.broadcast_to(np.asarray(values, dtype=float), (points.shape[0],))

    def render(self) -> str:
        return sp.sstr(self.expr)

    def __repr__(self) -> str:
        return f"PolynomialEntry({self.render()})"


def _real_part(
    expr: sp.Expr, symbols: Sequence[sp.Symbol], mode: Mode, tolerance: float, row: int, col: int
) -> sp.Expr:
    re, im = (sp.expand(part) for part in expr.as_real_imag())
    if im == 0:
        return re
    if symbols:
        coefficients = sp.Poly(im, *symbols).coeffs()
    else:
        coefficients = [im]
    worst = max(coefficients, key=lambda c: abs(float(c)))
    if mode == Mode.EXACT or abs(float(worst)) > tolerance:
        raise ImaginaryResidue(row, col, worst)
    return re


def symbolic_similarity(
    a_rows: Sequence[Sequence[Any]],
    l_rows: Sequence[Sequence[Any]],
    symbols: Sequence[sp.Symbol],
    mode: Mode,
    tolerance: float = 1e-12,
) -> list[list[PolynomialEntry]]:
    """
    Expand C = L·A·L⁻¹ entry by entry.

    Args:
        a_rows: Rows of A; entries are scalars or expressions in ``symbols``
        l_rows: Rows of the lower triangular L, diagonal 1 or i
        symbols: The free parameters, in solver order
        mode: Exact entries must lose their imaginary part identically
        tolerance: Imaginary coefficient allowed in float mode

    Raises:
        ImaginaryResidue: If an entry keeps an imaginary part
    """
    A = sp.Matrix([[to_sympy(v) for v in row] for row in a_rows])
    L = sp.Matrix([[to_sympy(v) for v in row] for row in l_rows])
    inverse = L.lower_triangular_solve(sp.eye(L.rows))
    C = L * A * inverse
    exact = mode == Mode.EXACT
    return [
        [
            PolynomialEntry(
                _real_part(C[i, j], symbols, mode, tolerance, i + 1, j + 1), symbols, exact
            )
            for j in range(C.cols)
        ]
        for i in range(C.rows)
    ]
