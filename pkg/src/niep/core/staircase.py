"""
Staircase realizers for real spectra with few positive eigenvalues.

The positives λ₁..λ_k sit in rows 1..k of A and every nonpositive column j is
owned by one positive row p(j), which carries ``α_j`` at ``A[p(j), j]``.
Owners are assigned greedily from the last column: row k first, then rows
k-1 down to 2, and row 1 takes whatever is left. Consecutive positive rows
are joined by the coupler ``A[p-1, p] = U_p``, and the ``β`` entries below an
owner row let the row above it shed its surplus.

One rule covers the one-positive, two-positive and general k-positive
constructions; the public functions differ only in the shape they accept
and the strategy they report.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping, Optional, Sequence

from niep.config import BetaPlacement, config
from niep.core.errors import (
    InfeasibleAlphas,
    InfeasibleBeta,
    InfeasibleCut,
    InfeasibleDiagonal,
    MethodInapplicable,
    ParameterError,
    WrongShape,
)
from niep.core.layout import EntryKind, Layout, coerce_value, first_violation, realize_layout
from niep.core.result_models import CertificateEntry, Realization, Strategy
from niep.core.scalar import Mode, format_scalar
from niep.core.spectrum import ClassifiedSpectrum

logger = logging.getLogger(__name__)


@dataclass
class StaircasePlan:
    """Owner assignment and derived quantities, with 1-based indices."""

    lam: list[Any]
    k: int
    alphas: dict[int, Any]
    owner: dict[int, int] = field(default_factory=dict)
    sums: dict[int, Any] = field(default_factory=dict)
    couplers: dict[int, Any] = field(default_factory=dict)
    betas: dict[tuple[int, int], Any] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.lam)

    def eigenvalue(self, index: int) -> Any:
        return self.lam[index - 1]

    @property
    def t(self) -> Any:
        return sum(self.alphas.values(), self.lam[0] * 0)

    def owned(self, row: int) -> list[int]:
        return sorted(j for j, p in self.owner.items() if p == row)

    def upper_bound(self, row: int) -> Any:
        """Largest β-sum row ``row + 1`` may carry under the columns of ``row``."""
        if row == 1:
            return self.eigenvalue(1) - self.eigenvalue(2) - self.t
        return self.eigenvalue(row) + self.alphas[row] - self.eigenvalue(row + 1)

    def beta_sum(self, row: int) -> Any:
        columns = set(self.owned(row))
        return sum(
            (v for (_, j), v in self.betas.items() if j in columns), self.lam[0] * 0
        )

    def column_beta(self, col: int) -> Any:
        return sum((v for (_, j), v in self.betas.items() if j == col), self.lam[0] * 0)


# ===== Shape and overrides =====


def _tolerance(mode: Mode) -> Any:
    return Fraction(0) if mode == Mode.EXACT else config.tolerance


def _split(c: ClassifiedSpectrum) -> tuple[list[Any], int]:
    """Diagonal order and the length of its positive prefix (at least 1)."""
    lam = list(c.diagonal)
    k = 0
    while k < len(lam) and lam[k] > 0:
        k += 1
    if any(x > 0 for x in lam[k:]):
        raise WrongShape("positive eigenvalues must precede the nonpositive ones on the diagonal")
    return lam, max(k, 1)


def _split_overrides(
    overrides: Optional[Mapping[str, Any]], mode: Mode
) -> tuple[dict[int, Any], dict[tuple[int, int], Any], dict[str, Any]]:
    alphas: dict[int, Any] = {}
    betas: dict[tuple[int, int], Any] = {}
    rest: dict[str, Any] = {}
    for key, raw in (overrides or {}).items():
        parts = key.split(".")
        try:
            if parts[0] == "alphas" and len(parts) == 2:
                alphas[int(parts[1])] = coerce_value(raw, mode)
                continue
            if parts[0] == "betas" and len(parts) == 3:
                betas[(int(parts[1]), int(parts[2]))] = coerce_value(raw, mode)
                continue
        except ValueError as exc:
            raise ParameterError(f"malformed parameter key {key!r}") from exc
        rest[key] = raw
    return alphas, betas, rest


def _alphas(lam: Sequence[Any], given: Mapping[int, Any]) -> dict[int, Any]:
    n = len(lam)
    for j in given:
        if not 2 <= j <= n:
            raise ParameterError(f"alphas.{j} is outside columns 2..{n}")
    return {j: given.get(j, -lam[j - 1]) for j in range(2, n + 1)}


# ===== Plan =====


def _check_alphas(plan: StaircasePlan, tolerance: Any) -> None:
    for j, alpha in plan.alphas.items():
        if alpha + plan.eigenvalue(j) < -tolerance:
            raise InfeasibleAlphas(
                f"alpha_{j} = {format_scalar(alpha)} is below -lambda_{j} = "
                f"{format_scalar(-plan.eigenvalue(j))}",
                index=j,
            )
    if plan.eigenvalue(1) - plan.t < -tolerance:
        raise InfeasibleAlphas(
            f"t = {format_scalar(plan.t)} exceeds lambda_1 = {format_scalar(plan.eigenvalue(1))}"
        )


def assign_owners(plan: StaircasePlan, tolerance: Any = Fraction(0)) -> StaircasePlan:
    """
    Greedy owner assignment from the last column leftwards.

    Row k stops as soon as its owned mass covers ``-α_k``; rows c = k-1..2
    stop once it covers both ``-α_c - U_(c+1)`` and
    ``λ_(c+1) - λ_c - α_c``. Row 1 takes the remaining columns.

    Raises:
        InfeasibleCut: If row 2 of a two-positive layout cannot be covered
        MethodInapplicable: If some row c ≥ 2 runs out of columns
    """
    k, n = plan.k, plan.n
    zero = plan.lam[0] * 0
    columns = list(range(n, k, -1))
    position = 0
    following = zero
    for row in range(k, 1, -1):
        need = -plan.alphas[row] - following
        if row < k:
            need = max(
                need, plan.eigenvalue(row + 1) - plan.eigenvalue(row) - plan.alphas[row]
            )
        total = zero
        while total < need - tolerance:
            if position == len(columns):
                message = (
                    f"row {row} needs negative mass {format_scalar(need)} "
                    f"but only {format_scalar(total)} is left"
                )
                if k == 2:
                    raise InfeasibleCut(message)
                raise MethodInapplicable(message, stuck_index=row)
            col = columns[position]
            position += 1
            plan.owner[col] = row
            total = total + plan.alphas[col]
        plan.sums[row] = total
        following = plan.alphas[row] + total + following
        plan.couplers[row] = following
        logger.debug("row %d owns %s, coupler %s", row, plan.owned(row), format_scalar(following))

    plan.sums[1] = zero
    for col in columns[position:]:
        plan.owner[col] = 1
        plan.sums[1] = plan.sums[1] + plan.alphas[col]
    return plan


def _place_betas(
    plan: StaircasePlan, given: Mapping[tuple[int, int], Any], placement: BetaPlacement
) -> None:
    if given:
        for (row, col), value in given.items():
            owner = plan.owner.get(col)
            if owner is None or not owner < row <= plan.k:
                raise ParameterError(
                    f"betas.{row}.{col} must sit below the owner of column {col} "
                    f"and within the positive rows"
                )
            plan.betas[(row, col)] = value
        return

    for row in range(1, plan.k):
        owned = plan.owned(row)
        if not owned:
            continue
        mass = plan.sums[row]
        if placement == BetaPlacement.MIDPOINT and mass != 0:
            target = (plan.upper_bound(row) - mass) / 2
            for col in owned:
                plan.betas[(row + 1, col)] = target * plan.alphas[col] / mass
        else:
            for col in owned:
                plan.betas[(row + 1, col)] = -plan.alphas[col]


def _certificate(plan: StaircasePlan) -> list[CertificateEntry]:
    entries = [
        CertificateEntry(
            description=f"alpha_{j} + lambda_{j} >= 0", margin=alpha + plan.eigenvalue(j)
        )
        for j, alpha in plan.alphas.items()
    ]
    entries.append(
        CertificateEntry(description="lambda_1 - t >= 0", margin=plan.eigenvalue(1) - plan.t)
    )
    for row in range(2, plan.k + 1):
        entries.append(
            CertificateEntry(
                description=f"U_{row} = a[{row - 1},{row}] >= 0", margin=plan.couplers[row]
            )
        )
    for col in sorted({j for _, j in plan.betas}):
        entries.append(
            CertificateEntry(
                description=f"alpha_{col} + beta column {col} >= 0",
                margin=plan.alphas[col] + plan.column_beta(col),
            )
        )
    for row in range(1, plan.k):
        if plan.owned(row):
            entries.append(
                CertificateEntry(
                    description=f"ub_{row} - beta sum under row {row} >= 0",
                    margin=plan.upper_bound(row) - plan.beta_sum(row),
                )
            )
    if plan.n == 6 and plan.owner == {4: 1, 5: 2, 6: 3}:
        entries.extend(_six_by_six_bounds(plan))
    return entries


def _six_by_six_bounds(plan: StaircasePlan) -> list[CertificateEntry]:
    """Bounds on a[2,4], a[3,4] and a[3,5] for three positives over three negatives."""
    zero = plan.lam[0] * 0
    a24 = plan.betas.get((2, 4), zero)
    a34 = plan.betas.get((3, 4), zero)
    a35 = plan.betas.get((3, 5), zero)
    top = plan.upper_bound(1)
    bounds = [
        ("a[3,5] + alpha_5 >= 0", a35 + plan.alphas[5]),
        ("alpha_2 + lambda_2 - lambda_3 - a[3,5] >= 0", plan.upper_bound(2) - a35),
        ("a[2,4] + alpha_4 >= 0", a24 + plan.alphas[4]),
        ("lambda_1 - lambda_2 - t - a[2,4] >= 0", top - a24),
        ("a[2,4] + a[3,4] + alpha_4 >= 0", a24 + a34 + plan.alphas[4]),
        ("lambda_1 - lambda_2 - t - a[2,4] - a[3,4] >= 0", top - a24 - a34),
    ]
    return [CertificateEntry(description=text, margin=margin) for text, margin in bounds]


def _check_betas(plan: StaircasePlan, tolerance: Any) -> None:
    for col in sorted({j for _, j in plan.betas}):
        margin = plan.alphas[col] + plan.column_beta(col)
        if margin < -tolerance:
            row = max(r for r, j in plan.betas if j == col)
            raise InfeasibleBeta(
                f"beta column {col} sums to {format_scalar(plan.column_beta(col))}, "
                f"below -alpha_{col} = {format_scalar(-plan.alphas[col])}",
                row=row,
                col=col,
            )
    for row in range(1, plan.k):
        if plan.owned(row) and plan.upper_bound(row) - plan.beta_sum(row) < -tolerance:
            raise InfeasibleBeta(
                f"beta sum under row {row} is {format_scalar(plan.beta_sum(row))}, "
                f"above its bound {format_scalar(plan.upper_bound(row))}",
                row=row + 1,
            )


def _layout(plan: StaircasePlan, mode: Mode, strategy: Strategy) -> Layout:
    layout = Layout(n=plan.n, mode=mode, strategy=strategy.value, diagonal=list(plan.lam))
    for col, row in sorted(plan.owner.items()):
        layout.set_a(row, col, plan.alphas[col], EntryKind.ALPHA)
        layout.alpha_rows[col] = row
    for row in range(2, plan.k + 1):
        layout.set_a(row - 1, row, plan.couplers[row], EntryKind.COUPLER)
    for (row, col), value in sorted(plan.betas.items()):
        layout.set_a(row, col, value, EntryKind.BETA)
    for row in range(2, plan.k + 1):
        for col in range(1, row):
            layout.l_entries[(row, col)] = 1
    for col, row in plan.owner.items():
        for j in range(1, row + 1):
            layout.l_entries[(col, j)] = 1
    return layout


def build_staircase(
    c: ClassifiedSpectrum,
    strategy: Strategy,
    overrides: Optional[Mapping[str, Any]] = None,
    alphas: Optional[Mapping[int, Any]] = None,
    placement: Optional[BetaPlacement] = None,
) -> Realization:
    """
    Run the staircase construction on the diagonal order of ``c``.

    Args:
        c: Classified real spectrum; positives must lead the diagonal
        strategy: Strategy reported in the realization
        overrides: Dotted keys ``alphas.j``, ``betas.i.j``, ``couplers.i.j``, ``l.i.j``
        alphas: Explicit α values by column, applied under ``overrides``
        placement: Default β placement (``config.beta_placement`` if None)

    Returns:
        Realization with its certificate

    Raises:
        InfeasibleAlphas, InfeasibleCut, InfeasibleBeta, MethodInapplicable
    """
    if c.is_complex:
        raise WrongShape("staircase layouts need a real spectrum")
    mode = c.mode
    tolerance = _tolerance(mode)
    given_alphas, given_betas, rest = _split_overrides(overrides, mode)
    lam, k = _split(c)
    plan = StaircasePlan(lam=lam, k=k, alphas=_alphas(lam, {**(alphas or {}), **given_alphas}))

    _check_alphas(plan, tolerance)
    assign_owners(plan, tolerance)
    if k >= 2 and plan.upper_bound(1) + plan.sums[1] < -tolerance:
        raise InfeasibleBeta(
            f"beta interval of row 2 is empty: [{format_scalar(-plan.sums[1])}, "
            f"{format_scalar(plan.upper_bound(1))}]",
            row=2,
        )
    _place_betas(plan, given_betas, placement or BetaPlacement(config.beta_placement))
    _check_betas(plan, tolerance)
    certificate = _certificate(plan)

    layout = _layout(plan, mode, strategy)
    layout.apply_overrides(rest)
    cuts = [plan.owned(row)[0] for row in range(2, k + 1) if plan.owned(row)]
    realization = realize_layout(layout, {}, certificate, t=plan.t, cut_indices=cuts)
    realization.params.alphas = dict(plan.alphas)

    violation = first_violation(realization.C)
    if violation is not None:
        i, j, value = violation
        message = f"entry ({i},{j}) of C is {format_scalar(value)} < 0"
        if given_betas or rest:
            raise InfeasibleBeta(message, row=i, col=j)
        raise MethodInapplicable(message)
    logger.info("%s realization built with t = %s", strategy.value, format_scalar(plan.t))
    return realization


# ===== Public operations =====


def realize_one_positive(
    c: ClassifiedSpectrum,
    alphas: Optional[Sequence[Any]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> Realization:
    """
    Realize a spectrum with one positive eigenvalue.

    Row 1 of A is ``(λ₁, α₂, …, αₙ)`` and L has an all-ones first column.
    The default ``α_i = -λ_i`` leaves every diagonal entry of C but the
    first at zero.

    Args:
        c: Classified spectrum with at most one positive eigenvalue
        alphas: Explicit ``α₂..αₙ``
        overrides: Dotted parameter overrides

    Raises:
        WrongShape: If more than one eigenvalue is positive or ``alphas`` has the wrong length
        InfeasibleAlphas: If some ``α_i < -λ_i`` or ``t > λ₁``

    Example:
        >>> from niep.core.spectrum import classify, parse_spectrum
        >>> r = realize_one_positive(classify(parse_spectrum("1,-1")))
        >>> [[str(v) for v in row] for row in r.C.rows]
        [['0', '1'], ['1', '0']]
    """
    if c.k_pos > 1:
        raise WrongShape(f"one-positive needs at most one positive eigenvalue, got {c.k_pos}")
    explicit: dict[int, Any] = {}
    if alphas is not None:
        if len(alphas) != c.n - 1:
            raise WrongShape(f"expected {c.n - 1} alphas, got {len(alphas)}")
        explicit = {j + 2: coerce_value(v, c.mode) for j, v in enumerate(alphas)}
    return build_staircase(c, Strategy.ONE_POSITIVE, overrides, alphas=explicit)


def realize_prescribed_diagonal(c: ClassifiedSpectrum, diag: Sequence[Any]) -> Realization:
    """
    One-positive realization whose C has the prescribed diagonal.

    The diagonal of C is ``(λ₁ - t, α₂ + λ₂, …, αₙ + λₙ)``, so
    ``α_i = d_i - λ_i``. The prescribed entries must be nonnegative and sum
    to ``s₁``.

    Raises:
        WrongShape: On a length mismatch or more than one positive eigenvalue
        InfeasibleDiagonal: Naming the first negative entry, or ``index=None``
            when the sum differs from ``s₁``
    """
    if c.k_pos > 1:
        raise WrongShape("a prescribed diagonal needs at most one positive eigenvalue")
    if len(diag) != c.n:
        raise WrongShape(f"expected {c.n} diagonal entries, got {len(diag)}")
    mode = c.mode
    tolerance = _tolerance(mode)
    d = [coerce_value(v, mode) for v in diag]
    total = sum(d, d[0] * 0)
    if abs(total - c.s1) > tolerance:
        raise InfeasibleDiagonal(
            f"diagonal sums to {format_scalar(total)}, the trace is {format_scalar(c.s1)}"
        )
    for index, value in enumerate(d, start=1):
        if value < -tolerance:
            raise InfeasibleDiagonal(
                f"diagonal entry {index} is {format_scalar(value)} < 0", index=index
            )
    lam = list(c.diagonal)
    alphas = {j: d[j - 1] - lam[j - 1] for j in range(2, c.n + 1)}
    realization = build_staircase(c, Strategy.PRESCRIBED_DIAGONAL, alphas=alphas)
    realization.params.notes.append("diagonal = " + ", ".join(format_scalar(v) for v in d))
    return realization


def realize_two_positive(
    c: ClassifiedSpectrum, overrides: Optional[Mapping[str, Any]] = None
) -> Realization:
    """
    Realize a real spectrum with exactly two positive eigenvalues.

    Row 2 takes columns from the right until their α mass first reaches λ₂;
    row 1 owns the rest, and the β entries of row 2 under those columns are
    chosen inside ``[-α_j, …]`` with their sum at most ``λ₁ - λ₂ - t``.

    Raises:
        WrongShape: If the spectrum does not have two positive eigenvalues
        InfeasibleCut: If no cut gives row 2 enough mass
        InfeasibleBeta: If the β interval is empty or an override leaves it
    """
    if c.k_pos != 2:
        raise WrongShape(f"two-positive needs exactly two positive eigenvalues, got {c.k_pos}")
    return build_staircase(c, Strategy.TWO_POSITIVE, overrides)


def realize_k_positive(
    c: ClassifiedSpectrum, overrides: Optional[Mapping[str, Any]] = None
) -> Realization:
    """
    Realize a real spectrum by the general greedy staircase.

    Delegates to ``realize_one_positive`` and ``realize_two_positive`` when
    the spectrum has one or two positive eigenvalues.

    Raises:
        MethodInapplicable: With ``stuck_index`` set to the positive row that
            could not be covered
        InfeasibleBeta: If an override leaves its interval
    """
    if c.k_pos <= 1:
        return realize_one_positive(c, overrides=overrides)
    if c.k_pos == 2:
        return realize_two_positive(c, overrides)
    return build_staircase(c, Strategy.K_POSITIVE, overrides)
