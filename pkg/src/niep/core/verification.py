"""
Independent checks on a finished realization.

Nothing here trusts the construction: C is rechecked entrywise, L·A·L⁻¹ is
recomputed, and the spectrum of C is compared with the prescribed one through
the characteristic polynomial (exact mode) and the numeric QR oracle.
"""

import logging
from fractions import Fraction
from typing import Any, Optional, Sequence

from niep.config import config
from niep.core.eigen import match_eigenvalues, numeric_eigenvalues
from niep.core.errors import ConvergenceFailure
from niep.core.matrix import (
    Matrix,
    Polynomial,
    char_poly,
    is_nonnegative,
    power_sums_matrix,
    similarity_transform,
)
from niep.core.result_models import CertificateEntry, Realization, VerificationReport
from niep.core.scalar import Mode, format_scalar, real_part, to_complex
from niep.core.spectrum import power_sum

logger = logging.getLogger(__name__)


def _close(left: Matrix, right: Matrix, tolerance: float) -> bool:
    if left.mode == Mode.EXACT and right.mode == Mode.EXACT:
        return left == right
    return all(
        abs(to_complex(a) - to_complex(b)) <= tolerance * max(1.0, abs(to_complex(b)))
        for row_a, row_b in zip(left.rows, right.rows)
        for a, b in zip(row_a, row_b)
    )


def _eigen_check(C: Matrix, spectrum: Sequence[Any]) -> tuple[Optional[float], bool]:
    try:
        found = numeric_eigenvalues(C)
    except ConvergenceFailure as exc:
        logger.warning("numeric eigenvalue oracle failed: %s", exc)
        return None, False
    target = [to_complex(v) for v in spectrum]
    residual = match_eigenvalues(found, target)
    scale = max([1.0] + [abs(z) for z in target])
    return residual, residual <= config.eigen_tolerance * scale


def _power_sum_residuals(C: Matrix, spectrum: Sequence[Any]) -> list[str]:
    mode = C.mode
    traces = power_sums_matrix(C, C.n)
    return [
        format_scalar(real_part(trace) - power_sum(spectrum, k, mode))
        for k, trace in enumerate(traces, start=1)
    ]


def verify_matrix(
    C: Matrix,
    spectrum: Sequence[Any],
    tolerance: Optional[float] = None,
) -> VerificationReport:
    """
    Check that a matrix is nonnegative and carries the given spectrum.

    Args:
        C: Candidate matrix
        spectrum: Prescribed eigenvalues (ExactScalar in exact mode)
        tolerance: Float-mode nonnegativity tolerance (``config.tolerance`` by default)

    Returns:
        VerificationReport without reconstruction or certificate fields
    """
    exact = C.mode == Mode.EXACT
    tol: Any = Fraction(0) if exact else (tolerance if tolerance is not None else config.tolerance)
    ok, violation = is_nonnegative(C, tol)
    rendered = None
    if violation is not None:
        i, j, value = violation
        rendered = f"C[{i},{j}] = {format_scalar(value)}"

    sized = len(spectrum) == C.n
    char_poly_ok = None
    if exact:
        char_poly_ok = sized and char_poly(C) == Polynomial.from_roots(spectrum, Mode.EXACT)
    residual, eigen_ok = _eigen_check(C, spectrum) if sized else (None, False)

    return VerificationReport(
        nonnegative=ok,
        violation=rendered,
        char_poly_ok=char_poly_ok,
        eigen_residual=residual,
        eigen_ok=eigen_ok,
        power_sum_residuals=_power_sum_residuals(C, spectrum) if sized else [],
        exact=exact,
    )


def certificate_holds(entries: Sequence[CertificateEntry], tolerance: float = 0.0) -> bool:
    return all(entry.holds(tolerance) for entry in entries)


def verify_realization(
    realization: Realization,
    spectrum: Sequence[Any],
    tolerance: Optional[float] = None,
) -> VerificationReport:
    """
    Verification block for a realization.

    Adds the reconstruction ``L·A·L⁻¹ = C`` and the certificate margins to
    ``verify_matrix``. In exact mode the characteristic polynomial decides the
    spectrum; the oracle residual is recorded alongside.
    """
    C = realization.C
    exact = C.mode == Mode.EXACT
    tol: Any = Fraction(0) if exact else (tolerance if tolerance is not None else config.tolerance)
    report = verify_matrix(C, spectrum, tolerance)
    rebuilt = similarity_transform(realization.L, realization.A, config.imaginary_tolerance)
    report.reconstruction_ok = _close(rebuilt, C, max(tol, 1e-12))
    report.certificate_ok = certificate_holds(realization.certificate, tol)
    if not report.verified:
        logger.warning("verification failed: %s", report.model_dump(exclude_none=True))
    return report
