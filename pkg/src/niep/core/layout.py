"""
Parameterised (A, L) layouts.

A layout fixes the diagonal of A, the shape of both triangles and a list of
free parameters with nominal values. Overrides from the command line either
pin a free parameter or replace a fixed entry. Instantiating a layout at a
parameter point gives concrete matrices; ``symbolic_c`` gives C as
polynomials in the parameters that are still free.
"""

import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Mapping, Optional, Sequence

from niep.config import config
from niep.core.errors import ParameterError
from niep.core.matrix import (
    Matrix,
    UnitLowerTriangular,
    is_nonnegative,
    similarity_transform,
)
from niep.core.result_models import CertificateEntry, Realization, RealizationParams
from niep.core.scalar import ExactScalar, Mode, format_scalar, parse_scalar, to_complex
from niep.core.symbolic import PolynomialEntry, parameter_symbols, symbolic_similarity

logger = logging.getLogger(__name__)

_KEY_RE = re.compile(r"^(?P<group>alphas|betas|couplers|l)\.(?P<i>\d+)(?:\.(?P<j>\d+))?$")


class EntryKind(str, Enum):
    """Role of an off-diagonal entry of A or L."""

    ALPHA = "alpha"
    BETA = "beta"
    COUPLER = "coupler"
    L = "l"


@dataclass(frozen=True)
class Parameter:
    """A free entry of A or L. ``row`` and ``col`` are 1-based."""

    name: str
    matrix: str
    row: int
    col: int
    kind: EntryKind
    nominal: Any = Fraction(1)

    @property
    def position(self) -> tuple[int, int]:
        return self.row, self.col


def parameter_name(kind: EntryKind, row: int, col: int) -> str:
    if kind == EntryKind.ALPHA:
        return f"alphas.{col}"
    prefix = {
        EntryKind.BETA: "betas",
        EntryKind.COUPLER: "couplers",
        EntryKind.L: "l",
    }[kind]
    return f"{prefix}.{row}.{col}"


def coerce_value(value: Any, mode: Mode) -> Any:
    """
    Read an override value as a real Fraction (exact mode) or float.

    Raises:
        ParameterError: If the value is not a real number
    """
    if isinstance(value, str):
        try:
            parsed, exact = parse_scalar(value)
        except Exception as exc:
            raise ParameterError(f"cannot read parameter value {value!r}") from exc
        z = to_complex(parsed)
        if z.imag != 0:
            raise ParameterError(f"parameter value {value!r} is not real")
        if exact and mode == Mode.EXACT:
            return parsed.re  # type: ignore[union-attr]
        return z.real
    if isinstance(value, ExactScalar):
        if not value.is_real:
            raise ParameterError(f"parameter value {value} is not real")
        value = value.re
    if mode == Mode.EXACT:
        if isinstance(value, float):
            raise ParameterError(f"float value {value!r} in an exact layout")
        return Fraction(value)
    return float(to_complex(value).real)


@dataclass
class Layout:
    """
    Shape of a construction.

    Entries are keyed by 1-based ``(row, col)``. ``a_entries`` holds strictly
    upper entries of A and ``l_entries`` strictly lower entries of L; any
    position missing from both and from ``parameters`` is zero. ``l_diagonal``
    lists the rows whose L diagonal is i rather than 1.
    """

    n: int
    mode: Mode
    strategy: str
    diagonal: list[Any]
    a_entries: dict[tuple[int, int], Any] = field(default_factory=dict)
    a_kinds: dict[tuple[int, int], EntryKind] = field(default_factory=dict)
    l_entries: dict[tuple[int, int], Any] = field(default_factory=dict)
    l_diagonal: dict[int, Any] = field(default_factory=dict)
    parameters: list[Parameter] = field(default_factory=list)
    alpha_rows: dict[int, int] = field(default_factory=dict)
    pins: dict[str, Any] = field(default_factory=dict)
    overridden: set[str] = field(default_factory=set)
    notes: list[str] = field(default_factory=list)

    # ----- building -----

    def scalar(self, value: Any) -> Any:
        if self.mode == Mode.EXACT:
            return ExactScalar.of(value) if not isinstance(value, ExactScalar) else value
        return to_complex(value)

    def set_a(self, row: int, col: int, value: Any, kind: EntryKind) -> None:
        self.a_entries[(row, col)] = value
        self.a_kinds[(row, col)] = kind

    def add_parameter(
        self, matrix: str, row: int, col: int, kind: EntryKind, nominal: Any
    ) -> Parameter:
        name = parameter_name(kind, row, col)
        parameter = Parameter(name, matrix, row, col, kind, nominal)
        self.parameters.append(parameter)
        if matrix == "A":
            self.a_entries.pop((row, col), None)
            self.a_kinds[(row, col)] = kind
        else:
            self.l_entries.pop((row, col), None)
        return parameter

    def parameter_at(self, matrix: str, row: int, col: int) -> Optional[Parameter]:
        for parameter in self.parameters:
            if parameter.matrix == matrix and parameter.position == (row, col):
                return parameter
        return None

    # ----- overrides -----

    def resolve_key(self, key: str) -> tuple[str, int, int, EntryKind]:
        """
        Map an override key to ``(matrix, row, col, kind)``.

        Raises:
            ParameterError: On an unknown key or a position outside the triangle
        """
        match = _KEY_RE.match(key)
        if match is None:
            raise ParameterError(f"unknown parameter key {key!r}")
        group, i = match.group("group"), int(match.group("i"))
        j = match.group("j")
        if group == "alphas":
            if j is not None:
                raise ParameterError(f"alpha keys take one index: {key!r}")
            if i not in self.alpha_rows:
                raise ParameterError(f"column {i} carries no alpha in this layout")
            return "A", self.alpha_rows[i], i, EntryKind.ALPHA
        if j is None:
            raise ParameterError(f"{key!r} needs a row and a column")
        row, col = i, int(j)
        if not (1 <= row <= self.n and 1 <= col <= self.n):
            raise ParameterError(f"{key!r} is outside a {self.n}x{self.n} matrix")
        if group == "l":
            if col >= row:
                raise ParameterError(f"{key!r} is not strictly below the diagonal")
            return "L", row, col, EntryKind.L
        if col <= row:
            raise ParameterError(f"{key!r} is not strictly above the diagonal")
        kind = EntryKind.BETA if group == "betas" else EntryKind.COUPLER
        return "A", row, col, self.a_kinds.get((row, col), kind)

    def apply_overrides(self, overrides: Mapping[str, Any]) -> None:
        for key, raw in overrides.items():
            matrix, row, col, kind = self.resolve_key(key)
            value = coerce_value(raw, self.mode)
            parameter = self.parameter_at(matrix, row, col)
            if parameter is not None:
                self.pins[parameter.name] = value
            elif matrix == "A":
                self.set_a(row, col, value, kind)
            else:
                self.l_entries[(row, col)] = value
            self.overridden.add(key)
            logger.debug("override %s = %s", key, format_scalar(value))

    @property
    def free(self) -> list[Parameter]:
        return [p for p in self.parameters if p.name not in self.pins]

    # ----- instantiation -----

    def _value_of(self, parameter: Parameter, values: Mapping[str, Any]) -> Any:
        if parameter.name in self.pins:
            return self.pins[parameter.name]
        if parameter.name in values:
            return values[parameter.name]
        raise ParameterError(f"no value for free parameter {parameter.name}")

    def _entry_rows(
        self, lookup: Mapping[tuple[str, int, int], Any]
    ) -> tuple[list[list[Any]], list[list[Any]]]:
        n = self.n
        a_rows: list[list[Any]] = [[0] * n for _ in range(n)]
        l_rows: list[list[Any]] = [[0] * n for _ in range(n)]
        for i in range(n):
            a_rows[i][i] = self.diagonal[i]
            l_rows[i][i] = self.l_diagonal.get(i + 1, 1)
        for (row, col), value in self.a_entries.items():
            a_rows[row - 1][col - 1] = value
        for (row, col), value in self.l_entries.items():
            l_rows[row - 1][col - 1] = value
        for (matrix, row, col), value in lookup.items():
            target = a_rows if matrix == "A" else l_rows
            target[row - 1][col - 1] = value
        return a_rows, l_rows

    def _matrices(self, lookup: Mapping[tuple[str, int, int], Any]) -> tuple[Matrix, Matrix]:
        a_rows, l_rows = self._entry_rows(lookup)
        A = Matrix([[self.scalar(v) for v in row] for row in a_rows], self.mode)
        L = Matrix([[self.scalar(v) for v in row] for row in l_rows], self.mode)
        return A, L

    def instantiate(self, values: Mapping[str, Any]) -> tuple[Matrix, UnitLowerTriangular]:
        """Concrete ``(A, L)`` at a full assignment of the free parameters."""
        lookup = {
            (p.matrix, p.row, p.col): self._value_of(p, values) for p in self.parameters
        }
        A, L = self._matrices(lookup)
        return A, UnitLowerTriangular.from_matrix(L)

    def symbolic_c(self) -> list[list[PolynomialEntry]]:
        """C = L·A·L⁻¹ as polynomials in the parameters of ``self.free``, in that order."""
        free = self.free
        symbols = parameter_symbols([p.name for p in free])
        lookup: dict[tuple[str, int, int], Any] = {
            (p.matrix, p.row, p.col): s for p, s in zip(free, symbols)
        }
        for parameter in self.parameters:
            if parameter.name in self.pins:
                lookup[(parameter.matrix, parameter.row, parameter.col)] = self.pins[
                    parameter.name
                ]
        a_rows, l_rows = self._entry_rows(lookup)
        return symbolic_similarity(
            a_rows, l_rows, symbols, self.mode, config.imaginary_tolerance
        )

    # ----- results -----

    def params(self, values: Mapping[str, Any], **extra: Any) -> RealizationParams:
        """Collect alphas, betas, couplers and non-default L entries at a point."""
        A, L = self.instantiate(values)
        record = RealizationParams(strategy=self.strategy, notes=list(self.notes), **extra)
        for (row, col), kind in sorted(self.a_kinds.items()):
            value = _real(A[row - 1, col - 1])
            if kind == EntryKind.ALPHA:
                record.alphas[col] = value
            elif kind == EntryKind.BETA:
                record.betas[(row, col)] = value
            else:
                record.couplers[(row, col)] = value
        free_positions = {p.position for p in self.parameters if p.matrix == "L"}
        for i in range(L.n):
            for j in range(i):
                value = L[i, j]
                if (i + 1, j + 1) in free_positions or not _is_zero_or_one(value):
                    record.l_free[(i + 1, j + 1)] = _real(value)
        return record


def _real(value: Any) -> Any:
    if isinstance(value, ExactScalar):
        return value.re if value.is_real else value
    z = to_complex(value)
    return z.real if z.imag == 0 else z


def _is_zero_or_one(value: Any) -> bool:
    if isinstance(value, ExactScalar):
        return value == 0 or value == 1
    return to_complex(value) in (0, 1)


def realize_layout(
    layout: Layout,
    values: Mapping[str, Any],
    certificate: Sequence[CertificateEntry] = (),
    intervals: Optional[Mapping[str, tuple[Optional[str], Optional[str]]]] = None,
    **extra: Any,
) -> Realization:
    """
    Instantiate a layout and compute C.

    Appends the entrywise nonnegativity of C to the certificate; the caller
    decides what a negative entry means for its construction.
    """
    A, L = layout.instantiate(values)
    C = similarity_transform(L, A, config.imaginary_tolerance)
    params = layout.params(values, **extra)
    if intervals:
        params.intervals.update(intervals)
    entries = list(certificate)
    entries.append(CertificateEntry(description="min entry of C", margin=min_entry(C)))
    return Realization(A=A, L=L, C=C, params=params, certificate=entries)


def min_entry(C: Matrix) -> Any:
    values = [_real(v) for row in C.rows for v in row]
    if C.mode == Mode.EXACT:
        return min(values)
    return float(min(to_complex(v).real for v in values))


def first_violation(C: Matrix) -> Optional[tuple[int, int, Any]]:
    ok, violation = is_nonnegative(C, config.tolerance if C.mode == Mode.FLOAT else Fraction(0))
    return None if ok else violation


def append_tail(realization: Realization, tail: Sequence[Any]) -> Realization:
    """
    Direct-sum 1x1 blocks ``(λ)`` onto a realization.

    A and C gain the tail values on their diagonal and L gains identity rows,
    so the similarity and the certificate carry over unchanged.
    """
    if not tail:
        return realization
    A, L, C = realization.A, realization.L, realization.C
    mode = C.mode
    size = len(tail)
    block = Matrix.from_rows(
        [[value if i == j else 0 for j in range(size)] for i, value in enumerate(tail)], mode
    )
    identity = Matrix.identity(size, mode)
    params = realization.params.model_copy(deep=True)
    params.notes.append("tail blocks: " + ", ".join(format_scalar(v) for v in tail))
    return Realization(
        A=A.direct_sum(block),
        L=UnitLowerTriangular.from_matrix(L.direct_sum(identity)),
        C=C.direct_sum(block),
        params=params,
        certificate=list(realization.certificate),
    )
