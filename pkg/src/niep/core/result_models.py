"""
Report data models using Pydantic V2.

Reports carry rendered strings (``p/q``, ``a+bi``) so they serialize without
custom encoders. ``Realization`` is the in-memory result of a construction
and keeps the live matrices.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Any, Optional

from pydantic import BaseModel, ConfigDict, Field, computed_field

if TYPE_CHECKING:
    from niep.core.matrix import Matrix, UnitLowerTriangular


class Strategy(str, Enum):
    """Construction strategies known to the dispatcher."""

    ONE_POSITIVE = "one-positive"
    PRESCRIBED_DIAGONAL = "prescribed-diagonal"
    TWO_POSITIVE = "two-positive"
    K_POSITIVE = "k-positive"
    TWO_NEGATIVE = "two-negative"
    THREE_NEGATIVE = "three-negative"
    K_NEGATIVE = "k-negative"
    COMPLEX_3 = "complex-3"
    COMPLEX_4 = "complex-4"
    COMPLEX_GENERAL = "complex-general"
    PERMUTED = "permuted"


class FailureKind(str, Enum):
    """Families of pipeline failures, mirroring the error hierarchy."""

    INPUT = "input"
    CONDITION = "condition"
    CONSTRUCTION = "construction"
    NUMERICAL = "numerical"


class ConditionReport(BaseModel):
    """Outcome of the Perron, power-sum and JLL checks."""

    perron_ok: bool
    perron_witness: Optional[str] = None
    power_sums_ok: bool
    power_sum_failure: Optional[int] = None
    jll_ok: bool
    jll_failure: Optional[tuple[int, int]] = None
    power_sums: list[str] = []
    witness: Optional[str] = None

    @computed_field  # type: ignore[prop-decorator]
    @property
    def overall(self) -> bool:
        return self.perron_ok and self.power_sums_ok and self.jll_ok

    model_config = ConfigDict(use_enum_values=True)


class CertificateEntry(BaseModel):
    """One checked inequality, written as ``expression ≥ 0``, with its margin."""

    description: str
    margin: Any

    def holds(self, tolerance: float = 0.0) -> bool:
        if isinstance(self.margin, float):
            return self.margin >= -tolerance
        return self.margin >= 0

    model_config = ConfigDict(arbitrary_types_allowed=True)


class RealizationParams(BaseModel):
    """
    Every free quantity of a construction.

    Indices are 1-based. ``intervals`` maps a parameter name such as
    ``l.3.1`` to the rendered bounds found for it (``None`` for an open side).
    """

    strategy: str
    alphas: dict[int, Any] = {}
    betas: dict[tuple[int, int], Any] = {}
    couplers: dict[tuple[int, int], Any] = {}
    l_free: dict[tuple[int, int], Any] = {}
    cut_indices: list[int] = []
    t: Optional[Any] = None
    order: list[Any] = []
    intervals: dict[str, tuple[Optional[str], Optional[str]]] = {}
    notes: list[str] = []

    model_config = ConfigDict(use_enum_values=True, arbitrary_types_allowed=True)


@dataclass
class Realization:
    """The triple (A, L, C) with its parameters and certificate."""

    A: "Matrix"
    L: "UnitLowerTriangular"
    C: "Matrix"
    params: RealizationParams
    certificate: list[CertificateEntry] = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.C.n

    @property
    def strategy(self) -> str:
        return self.params.strategy


class VerificationReport(BaseModel):
    """Independent checks run on a finished realization or a supplied matrix."""

    nonnegative: bool
    violation: Optional[str] = None
    reconstruction_ok: Optional[bool] = None
    char_poly_ok: Optional[bool] = None
    eigen_residual: Optional[float] = None
    eigen_ok: bool = True
    power_sum_residuals: list[str] = []
    certificate_ok: Optional[bool] = None
    exact: bool = True

    @computed_field  # type: ignore[prop-decorator]
    @property
    def verified(self) -> bool:
        spectrum_ok = self.char_poly_ok if self.exact else self.eigen_ok
        return (
            self.nonnegative
            and self.reconstruction_ok is not False
            and self.certificate_ok is not False
            and bool(spectrum_ok)
        )

    model_config = ConfigDict(use_enum_values=True)


class FailureInfo(BaseModel):
    """Why a run produced no realization."""

    kind: FailureKind
    error: str
    message: str
    exit_code: int

    model_config = ConfigDict(use_enum_values=True)


class RunReport(BaseModel):
    """
    Outcome of one pipeline run.

    Field order is the JSON key order. Exactly one of the realization fields
    (``A``, ``L``, ``C``) and ``failure`` is populated.
    """

    spectrum: list[str]
    conditions: Optional[ConditionReport] = None
    strategy: Optional[str] = None
    params: Optional[dict[str, Any]] = None
    A: Optional[list[list[str]]] = None
    L: Optional[list[list[str]]] = None
    C: Optional[list[list[str]]] = None
    verification: Optional[VerificationReport] = None
    certificate: list[dict[str, str]] = []
    diagnostics: list[str] = []
    mode: str = "exact"
    failure: Optional[FailureInfo] = None
    exit_code: int = Field(default=0, exclude=True)
    realization: Optional[Any] = Field(default=None, exclude=True)

    @property
    def succeeded(self) -> bool:
        return self.failure is None and self.exit_code == 0

    model_config = ConfigDict(use_enum_values=True, arbitrary_types_allowed=True)


class FixtureResult(BaseModel):
    """Result of running one corpus fixture."""

    name: str
    passed: bool
    expectation: str
    strategy: Optional[str] = None
    message: str = ""
    duration: float = 0.0

    model_config = ConfigDict(use_enum_values=True)


class CorpusSummary(BaseModel):
    """Summary of a corpus run."""

    directory: str
    results: list[FixtureResult] = []

    @property
    def total(self) -> int:
        return len(self.results)

    @property
    def passed(self) -> int:
        return sum(1 for r in self.results if r.passed)

    @property
    def failed(self) -> int:
        return self.total - self.passed

    @property
    def exit_code(self) -> int:
        return 0 if self.failed == 0 else 1

    model_config = ConfigDict(use_enum_values=True)
