"""
Dense square matrices over exact or float scalars.

Entries are ExactScalar in exact mode and ``complex`` in float mode. C as a
function of free layout parameters lives in ``niep.core.symbolic``.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Iterable, Optional, Sequence

import numpy as np

from niep.core.errors import ImaginaryResidue, ModeError, ParseError
from niep.core.scalar import (
    I,
    ONE,
    ZERO,
    ExactScalar,
    Mode,
    format_scalar,
    parse_scalar,
    to_complex,
)

Violation = tuple[int, int, Any]


def _zero(mode: Mode) -> Any:
    return ZERO if mode == Mode.EXACT else 0j


def _one(mode: Mode) -> Any:
    return ONE if mode == Mode.EXACT else 1 + 0j


def _is_zero(value: Any) -> bool:
    if isinstance(value, ExactScalar):
        return value.is_zero
    return value == 0


def _is_one(value: Any) -> bool:
    if isinstance(value, (ExactScalar, int, Fraction)):
        return value == 1
    return abs(to_complex(value) - 1) <= 1e-15


def _is_i(value: Any, sign: int = 1) -> bool:
    if isinstance(value, ExactScalar):
        return value == I * sign
    return abs(to_complex(value) - sign * 1j) <= 1e-15


def coerce_entry(value: Any, mode: Mode) -> Any:
    """Bring an int, Fraction, string or scalar into the given mode."""
    if mode == Mode.EXACT:
        if isinstance(value, (float, complex)):
            raise ModeError(f"float entry {value!r} in an exact matrix")
        if isinstance(value, (ExactScalar, int, Fraction, str)):
            return ExactScalar.of(value)
        return value
    if isinstance(value, (ExactScalar, int, float, complex, Fraction)):
        return to_complex(value)
    return value


class Matrix:
    """
    Square matrix stored as a tuple of row tuples.

    Example:
        >>> m = Matrix.from_rows([[0, 1], [1, 0]])
        >>> (m @ m).trace()
        ExactScalar(re=Fraction(2, 1), im=Fraction(0, 1))
    """

    __slots__ = ("rows", "mode")

    def __init__(self, rows: Sequence[Sequence[Any]], mode: Mode = Mode.EXACT):
        n = len(rows)
        if any(len(row) != n for row in rows):
            raise ValueError("matrix must be square")
        self.rows: tuple[tuple[Any, ...], ...] = tuple(tuple(row) for row in rows)
        self.mode = mode

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[Any]], mode: Mode = Mode.EXACT) -> "Matrix":
        return cls([[coerce_entry(v, mode) for v in row] for row in rows], mode)

    @classmethod
    def identity(cls, n: int, mode: Mode = Mode.EXACT) -> "Matrix":
        zero, one = _zero(mode), _one(mode)
        return cls([[one if i == j else zero for j in range(n)] for i in range(n)], mode)

    @classmethod
    def zeros(cls, n: int, mode: Mode = Mode.EXACT) -> "Matrix":
        zero = _zero(mode)
        return cls([[zero] * n for _ in range(n)], mode)

    @property
    def n(self) -> int:
        return len(self.rows)

    def __getitem__(self, index: tuple[int, int]) -> Any:
        i, j = index
        return self.rows[i][j]

    def __iter__(self):
        return iter(self.rows)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.rows == other.rows

    def __hash__(self) -> int:
        return hash(self.rows)

    def __repr__(self) -> str:
        body = "; ".join(" ".join(format_scalar(v) for v in row) for row in self.rows)
        return f"Matrix([{body}])"

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.n != other.n:
            raise ValueError("cannot multiply matrices of different sizes")
        columns = list(zip(*other.rows))
        zero = _zero(self.mode)
        return Matrix(
            [[_dot(row, col, zero) for col in columns] for row in self.rows],
            self.mode,
        )

    def __add__(self, other: "Matrix") -> "Matrix":
        return Matrix(
            [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)],
            self.mode,
        )

    def __sub__(self, other: "Matrix") -> "Matrix":
        return Matrix(
            [[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)],
            self.mode,
        )

    def scale(self, factor: Any) -> "Matrix":
        return self.map(lambda v: v * factor)

    def map(self, fn: Callable[[Any], Any], mode: Optional[Mode] = None) -> "Matrix":
        return Matrix([[fn(v) for v in row] for row in self.rows], mode or self.mode)

    def transpose(self) -> "Matrix":
        return Matrix([list(col) for col in zip(*self.rows)], self.mode)

    def diagonal(self) -> list[Any]:
        return [self.rows[i][i] for i in range(self.n)]

    def trace(self) -> Any:
        return _dot(self.diagonal(), [_one(self.mode)] * self.n, _zero(self.mode))

    def direct_sum(self, other: "Matrix") -> "Matrix":
        """Block diagonal ``[[self, 0], [0, other]]``."""
        zero = _zero(self.mode)
        n, m = self.n, other.n
        rows = [list(row) + [zero] * m for row in self.rows]
        rows += [[zero] * n + list(row) for row in other.rows]
        return Matrix(rows, self.mode)

    def permuted(self, order: Sequence[int]) -> "Matrix":
        """``P·M·Pᵀ`` for the permutation sending position k to ``order[k]``."""
        return Matrix([[self.rows[i][j] for j in order] for i in order], self.mode)

    def to_float(self) -> "Matrix":
        return self.map(to_complex, Mode.FLOAT)

    def to_numpy(self) -> np.ndarray:
        return np.array([[to_complex(v) for v in row] for row in self.rows], dtype=complex)

    def is_upper_triangular(self) -> bool:
        return all(_is_zero(self.rows[i][j]) for i in range(self.n) for j in range(i))


def _dot(left: Sequence[Any], right: Sequence[Any], zero: Any) -> Any:
    total = None
    for a, b in zip(left, right):
        if _is_zero(a) or _is_zero(b):
            continue
        term = a * b
        total = term if total is None else total + term
    return zero if total is None else total


class UnitLowerTriangular(Matrix):
    """
    Lower triangular matrix whose diagonal entries are 1, or 1 and i in complex mode.

    Inverses carry -i where the original carries i. Construction rejects any
    other diagonal, so an instance is always invertible.
    """

    __slots__ = ("complex_diagonal",)

    def __init__(self, rows: Sequence[Sequence[Any]], mode: Mode = Mode.EXACT):
        super().__init__(rows, mode)
        for i in range(self.n):
            for j in range(i + 1, self.n):
                if not _is_zero(self.rows[i][j]):
                    raise ValueError(f"entry ({i + 1},{j + 1}) above the diagonal is nonzero")
        diagonal = self.diagonal()
        if not all(_is_one(d) or _is_i(d) or _is_i(d, -1) for d in diagonal):
            raise ValueError("diagonal entries must be 1 or i")
        self.complex_diagonal = not all(_is_one(d) for d in diagonal)

    @classmethod
    def from_rows(
        cls, rows: Iterable[Iterable[Any]], mode: Mode = Mode.EXACT
    ) -> "UnitLowerTriangular":
        return cls([[coerce_entry(v, mode) for v in row] for row in rows], mode)

    @classmethod
    def from_matrix(cls, matrix: Matrix) -> "UnitLowerTriangular":
        return cls(matrix.rows, matrix.mode)


@dataclass(frozen=True)
class Polynomial:
    """Monic polynomial with coefficients listed from the constant term up."""

    coefficients: tuple[Any, ...]

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @classmethod
    def from_roots(cls, roots: Iterable[Any], mode: Mode = Mode.EXACT) -> "Polynomial":
        coefficients: list[Any] = [_one(mode)]
        for root in roots:
            root = coerce_entry(root, mode)
            shifted = [_zero(mode)] + coefficients
            for k in range(len(coefficients)):
                shifted[k] = shifted[k] - root * coefficients[k]
            coefficients = shifted
        return cls(tuple(coefficients))

    def __str__(self) -> str:
        terms = []
        for power in range(self.degree, -1, -1):
            c = self.coefficients[power]
            if _is_zero(c):
                continue
            text = format_scalar(c)
            if power == 0:
                terms.append(text)
            else:
                head = "" if _is_one(c) else f"({text})"
                terms.append(f"{head}x" + (f"^{power}" if power > 1 else ""))
        return " + ".join(terms) or "0"


# ===== Operations =====


def unit_lower_inverse(L: UnitLowerTriangular) -> UnitLowerTriangular:
    """
    Invert a unit lower triangular matrix by forward substitution.

    Row i of the inverse is ``(e_i - Σ_{k<i} L[i][k]·M_k) / L[i][i]``; dividing by
    a diagonal 1 or i is multiplication by 1 or -i.
    """
    n, mode = L.n, L.mode
    zero, one = _zero(mode), _one(mode)
    minus_i = -I if mode == Mode.EXACT else -1j
    inverse: list[list[Any]] = []
    for i in range(n):
        row = [one if j == i else zero for j in range(n)]
        for k in range(i):
            factor = L.rows[i][k]
            if _is_zero(factor):
                continue
            for j in range(k + 1):
                if not _is_zero(inverse[k][j]):
                    row[j] = row[j] - factor * inverse[k][j]
        if not _is_one(L.rows[i][i]):
            factor = minus_i if _is_i(L.rows[i][i]) else -minus_i
            row = [v * factor if not _is_zero(v) else v for v in row]
        inverse.append(row)
    return UnitLowerTriangular(inverse, mode)


def strip_imaginary(C: Matrix, tolerance: float = 1e-12) -> Matrix:
    """
    Drop vanishing imaginary parts of a similarity result.

    Raises:
        ImaginaryResidue: On the first entry whose imaginary part is nonzero
            (exact mode) or above ``tolerance`` (float mode)
    """
    rows = []
    for i, row in enumerate(C.rows):
        new_row = []
        for j, value in enumerate(row):
            if isinstance(value, ExactScalar):
                if value.im != 0:
                    raise ImaginaryResidue(i + 1, j + 1, value.im)
                new_row.append(ExactScalar(value.re))
            else:
                z = to_complex(value)
                if abs(z.imag) > tolerance:
                    raise ImaginaryResidue(i + 1, j + 1, z.imag)
                new_row.append(complex(z.real, 0.0))
        rows.append(new_row)
    return Matrix(rows, C.mode)


def similarity_transform(
    L: UnitLowerTriangular, A: Matrix, tolerance: float = 1e-12
) -> Matrix:
    """
    Compute ``C = L·A·L⁻¹`` and strip its (vanishing) imaginary part.

    Args:
        L: Unit lower triangular similarity
        A: Upper triangular matrix carrying the spectrum
        tolerance: Imaginary residue allowed in float mode

    Returns:
        The real matrix C

    Raises:
        ImaginaryResidue: If the L pattern does not suit the spectrum
    """
    if L.n != A.n:
        raise ValueError(f"size mismatch: L is {L.n}x{L.n}, A is {A.n}x{A.n}")
    if L.mode != A.mode:
        raise ModeError("L and A must share one mode")
    product = L @ A @ unit_lower_inverse(L)
    return strip_imaginary(product, tolerance)


def char_poly(M: Matrix) -> Polynomial:
    """
    Characteristic polynomial ``det(xI - M)`` by Faddeev–LeVerrier.

    Raises:
        ModeError: In float mode; use ``numeric_eigenvalues`` there
    """
    if M.mode != Mode.EXACT:
        raise ModeError("char_poly needs exact entries")
    n = M.n
    coefficients: list[Any] = [ZERO] * (n + 1)
    coefficients[n] = ONE
    identity = Matrix.identity(n)
    running = Matrix.zeros(n)
    for k in range(1, n + 1):
        running = (M @ running) + identity.scale(coefficients[n - k + 1])
        coefficients[n - k] = -(M @ running).trace() / k
    return Polynomial(tuple(coefficients))


def power_sums_matrix(M: Matrix, k_max: int) -> list[Any]:
    """Traces of ``M, M², …, M^k_max``."""
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    sums = []
    power = M
    for k in range(1, k_max + 1):
        if k > 1:
            power = power @ M
        sums.append(power.trace())
    return sums


def is_nonnegative(M: Matrix, tolerance: float = 0.0) -> tuple[bool, Optional[Violation]]:
    """
    Entrywise nonnegativity with the first violation in row-major order.

    Exact entries must be real and ≥ 0. Float entries may dip to ``-tolerance``
    and carry at most ``tolerance`` of imaginary part.

    Returns:
        ``(True, None)`` or ``(False, (row, col, value))`` with 1-based indices
    """
    for i, row in enumerate(M.rows):
        for j, value in enumerate(row):
            if isinstance(value, ExactScalar):
                bad = value.im != 0 or value.re < 0
            else:
                z = to_complex(value)
                bad = z.real < -tolerance or abs(z.imag) > max(tolerance, 1e-12)
            if bad:
                return False, (i + 1, j + 1, value)
    return True, None


def parse_matrix(text: str, mode: Optional[Mode] = None) -> Matrix:
    """
    Read a square matrix, one row per line, entries separated by spaces or commas.

    Blank lines and ``#`` comments are skipped. The matrix is exact when every
    entry is a Gaussian rational and ``mode`` does not ask for floats.

    Raises:
        ParseError: On a bad entry or a non-square shape
    """
    rows: list[list[Any]] = []
    exact = True
    for number, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].replace(",", " ").split()
        if not content:
            continue
        row = []
        for token in content:
            value, token_exact = parse_scalar(token, number)
            exact = exact and token_exact
            row.append(value)
        rows.append(row)
    if not rows or any(len(row) != len(rows) for row in rows):
        raise ParseError(0, f"{len(rows)} rows", "matrix is not square:")
    if mode == Mode.EXACT and not exact:
        raise ModeError("exact mode requested for a matrix with irrational entries")
    chosen = Mode.EXACT if exact and mode != Mode.FLOAT else Mode.FLOAT
    if chosen == Mode.FLOAT:
        rows = [[to_complex(v) for v in row] for row in rows]
    return Matrix(rows, chosen)
