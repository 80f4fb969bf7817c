"""
Strategy dispatcher and the ``run`` pipeline.

``dispatch`` picks a realizer from the shape of a classified spectrum, the
way a factory picks a runner for a project. ``run`` drives the whole
pipeline for one request: parse, classify, check the necessary conditions,
realize with the fallback chain, verify and build the ``RunReport``.
"""

import itertools
import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Callable, Iterator, Mapping, Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field, field_validator

from niep.config import OutputFormat, config
from niep.core.complex_realizer import (
    realize_complex_3,
    realize_complex_4,
    realize_complex_general,
)
from niep.core.errors import (
    ConditionFailure,
    ConstructionError,
    InputError,
    MethodInapplicable,
    NecessaryConditionError,
    NiepError,
    NoPerronError,
    NumericalError,
    ParameterError,
    UnknownStrategy,
    WrongShape,
    exit_code_for,
)
from niep.core.layout import append_tail
from niep.core.many_positive import (
    realize_k_negative,
    realize_three_negative,
    realize_two_negative,
)
from niep.core.result_models import (
    FailureInfo,
    FailureKind,
    Realization,
    RunReport,
    Strategy,
    VerificationReport,
)
from niep.core.scalar import Mode, format_scalar
from niep.core.spectrum import (
    ClassifiedSpectrum,
    Pair,
    classify,
    classify_reals,
    format_spectrum,
    necessary_conditions,
    parse_spectrum,
    perron_failure_report,
)
from niep.core.staircase import (
    realize_k_positive,
    realize_one_positive,
    realize_prescribed_diagonal,
    realize_two_positive,
)
from niep.core.verification import verify_realization

logger = logging.getLogger(__name__)

AUTO = "auto"

Realizer = Callable[[ClassifiedSpectrum, Mapping[str, Any]], Realization]


class RunConfig(BaseModel):
    """
    One request to the pipeline.

    ``strategy`` is ``auto`` or a strategy id. ``order`` lists 1-based
    positions into the descending real eigenvalues. ``overrides`` maps dotted
    parameter keys (``betas.2.4``, ``l.3.1``, ``variant``) to value text.
    """

    spectrum: Optional[str] = None
    file: Optional[Path] = None
    strategy: str = AUTO
    mode: Optional[Mode] = None
    tolerance: float = Field(default_factory=lambda: config.tolerance, gt=0.0)
    order: Optional[list[int]] = None
    overrides: dict[str, str] = Field(default_factory=dict)
    diagonal: Optional[str] = None
    output_format: OutputFormat = Field(default_factory=lambda: config.output_format)
    jll_k_max: Optional[int] = Field(default=None, ge=1)
    jll_m_max: Optional[int] = Field(default=None, ge=1)
    permutation_search: bool = Field(default_factory=lambda: config.permutation_search)
    tail_search: bool = Field(default_factory=lambda: config.tail_search)

    model_config = ConfigDict(use_enum_values=True)

    @field_validator("strategy")
    @classmethod
    def _known_strategy(cls, value: str) -> str:
        name = value.strip().lower()
        if name != AUTO and name not in _NAMED:
            raise UnknownStrategy(
                f"unknown strategy {value!r}; choose auto or one of {', '.join(_NAMED)}"
            )
        return name

    def spectrum_text(self) -> str:
        """The spectrum as typed, or the contents of ``file``."""
        if self.spectrum is not None:
            return self.spectrum
        if self.file is None:
            raise InputError("no spectrum given; use --spectrum or --file")
        try:
            lines = self.file.read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise InputError(f"cannot read {self.file}: {exc}") from exc
        return " ".join(line.split("#", 1)[0] for line in lines)


# ===== Realizer table =====


def _complex_3(c: ClassifiedSpectrum, overrides: Mapping[str, Any]) -> Realization:
    if c.n != 3 or len(c.pair_order) != 1:
        raise WrongShape("complex-3 needs one real eigenvalue and one conjugate pair")
    return realize_complex_3(c.diagonal[0], c.pair_order[0], c.mode, overrides)


REALIZERS: dict[Strategy, Realizer] = {
    Strategy.ONE_POSITIVE: lambda c, o: realize_one_positive(c, overrides=o),
    Strategy.TWO_POSITIVE: realize_two_positive,
    Strategy.K_POSITIVE: realize_k_positive,
    Strategy.TWO_NEGATIVE: realize_two_negative,
    Strategy.THREE_NEGATIVE: realize_three_negative,
    Strategy.K_NEGATIVE: realize_k_negative,
    Strategy.COMPLEX_3: _complex_3,
    Strategy.COMPLEX_4: realize_complex_4,
    Strategy.COMPLEX_GENERAL: realize_complex_general,
}

FAMILY_GENERAL: dict[Strategy, Strategy] = {
    Strategy.ONE_POSITIVE: Strategy.K_POSITIVE,
    Strategy.TWO_POSITIVE: Strategy.K_POSITIVE,
    Strategy.K_POSITIVE: Strategy.K_POSITIVE,
    Strategy.TWO_NEGATIVE: Strategy.K_NEGATIVE,
    Strategy.THREE_NEGATIVE: Strategy.K_NEGATIVE,
    Strategy.K_NEGATIVE: Strategy.K_NEGATIVE,
    Strategy.COMPLEX_3: Strategy.COMPLEX_GENERAL,
    Strategy.COMPLEX_4: Strategy.COMPLEX_GENERAL,
    Strategy.COMPLEX_GENERAL: Strategy.COMPLEX_GENERAL,
}

_NAMED = [s.value for s in Strategy if s != Strategy.PERMUTED]


def get_supported_strategies() -> list[str]:
    """Strategy ids accepted by ``--strategy`` besides ``auto``."""
    return list(_NAMED)


def dispatch(c: ClassifiedSpectrum, cfg: Optional[RunConfig] = None) -> Strategy:
    """
    Choose the strategy for a classified spectrum.

    Args:
        c: Classified spectrum (its diagonal order is the one realized)
        cfg: Request; a named strategy or a prescribed diagonal wins over routing

    Returns:
        Strategy id

    Example:
        >>> dispatch(classify(parse_spectrum("6,1,1,-4,-4"))).value
        'two-negative'
    """
    if cfg is not None and cfg.strategy != AUTO:
        return Strategy(cfg.strategy)
    if cfg is not None and cfg.diagonal is not None:
        return Strategy.PRESCRIBED_DIAGONAL
    if c.is_complex:
        if c.n == 3:
            return Strategy.COMPLEX_3
        if c.n == 4:
            return Strategy.COMPLEX_4
        return Strategy.COMPLEX_GENERAL
    k_pos = sum(1 for x in c.diagonal if x > 0)
    if 2 * k_pos <= c.n:
        if k_pos <= 1:
            return Strategy.ONE_POSITIVE
        return Strategy.TWO_POSITIVE if k_pos == 2 else Strategy.K_POSITIVE
    k_neg = c.n - k_pos
    if k_neg <= 1:
        return Strategy.K_POSITIVE
    if k_neg == 2:
        return Strategy.TWO_NEGATIVE
    return Strategy.THREE_NEGATIVE if k_neg == 3 else Strategy.K_NEGATIVE


# ===== Orders and permutations =====


def _distinct_orderings(values: Sequence[Any]) -> Iterator[tuple[Any, ...]]:
    """Distinct orderings of a multiset, starting with equal values grouped in input order."""
    distinct: list[Any] = []
    ranks: list[int] = []
    for value in values:
        if value not in distinct:
            distinct.append(value)
        ranks.append(distinct.index(value))
    current = sorted(ranks)
    while True:
        yield tuple(distinct[r] for r in current)
        # next permutation of the rank list
        i = len(current) - 2
        while i >= 0 and current[i] >= current[i + 1]:
            i -= 1
        if i < 0:
            break
        j = len(current) - 1
        while current[j] <= current[i]:
            j -= 1
        current[i], current[j] = current[j], current[i]
        current[i + 1 :] = reversed(current[i + 1 :])


def _tail_subsets(positives: Sequence[Any]) -> Iterator[tuple[Any, ...]]:
    """Distinct sub-multisets of the non-Perron positives, smallest first."""
    seen: set[tuple[Any, ...]] = set()
    for size in range(len(positives) + 1):
        for chosen in itertools.combinations(positives, size):
            if chosen not in seen:
                seen.add(chosen)
                yield chosen


def split_tail(diagonal: Sequence[Any]) -> tuple[list[Any], list[Any]]:
    """
    Split a real diagonal order into its core and the trailing positive tail.

    Example:
        >>> split_tail([6, 1, -4, -4, 1])
        ([6, 1, -4, -4], [1])
    """
    last = max((i for i, x in enumerate(diagonal) if x <= 0), default=len(diagonal) - 1)
    return list(diagonal[: last + 1]), list(diagonal[last + 1 :])


def apply_order(c: ClassifiedSpectrum, order: Sequence[int]) -> ClassifiedSpectrum:
    """
    Reorder the real diagonal by 1-based positions into the descending reals.

    Raises:
        ParameterError: If ``order`` is not a permutation or moves the Perron value
    """
    size = len(c.reals)
    if sorted(order) != list(range(1, size + 1)):
        raise ParameterError(f"--order must be a permutation of 1..{size}, got {list(order)}")
    diagonal = [c.reals[p - 1] for p in order]
    if diagonal[0] != c.perron:
        raise ParameterError("--order must keep the Perron value in first position")
    return c.with_diagonal(diagonal)


def _with_tail(c: ClassifiedSpectrum) -> tuple[ClassifiedSpectrum, list[Any]]:
    if c.is_complex:
        return c, []
    core, tail = split_tail(c.diagonal)
    if not tail:
        return c, []
    return classify_reals(core, c.mode), tail


def permuted_layouts(
    c: ClassifiedSpectrum, tail_search: bool = False, cap: Optional[int] = None
) -> Iterator[ClassifiedSpectrum]:
    """
    Alternative diagonal orders tried after the default layout fails.

    Real spectra keep their positive block and walk the distinct orderings of
    the nonpositive eigenvalues; with ``tail_search`` every distinct subset of
    the non-Perron positives is also moved behind them as 1x1 tail blocks.
    Complex spectra walk the orderings of their pair cells. The default order
    itself is skipped and at most ``cap`` layouts are produced.
    """
    cap = cap or config.permutation_cap
    produced = 0
    if c.is_complex:
        for pairs in _distinct_orderings(c.pair_order):
            if tuple(pairs) == c.pair_order:
                continue
            yield c.with_pair_order(pairs)
            produced += 1
            if produced >= cap:
                return
        return

    positives = [x for x in c.reals if x > 0]
    negatives = [x for x in c.reals if x <= 0]
    subsets = _tail_subsets(positives[1:]) if tail_search else iter([()])
    for tail in subsets:
        remaining = list(positives)
        for value in tail:
            remaining.remove(value)
        for negative_order in _distinct_orderings(negatives):
            diagonal = remaining + list(negative_order) + list(tail)
            if tuple(diagonal) == c.diagonal:
                continue
            yield c.with_diagonal(diagonal)
            produced += 1
            if produced >= cap:
                return


# ===== Realization with fallbacks =====


class RealizationAttempt(BaseModel):
    """A realization that passed verification, with the route that produced it."""

    strategy: Strategy
    realization: Any
    verification: VerificationReport
    diagnostics: list[str] = []

    model_config = ConfigDict(arbitrary_types_allowed=True)


def _describe(exc: BaseException) -> str:
    return f"{type(exc).__name__}: {exc}"


class StrategyDispatcher:
    """
    Runs realizers for one spectrum and walks the fallback chain.

    Example:
        >>> c = classify(parse_spectrum("7,3,-5,-5"))
        >>> attempt = StrategyDispatcher(RunConfig(spectrum="7,3,-5,-5")).realize(c)
        >>> attempt.strategy.value
        'two-positive'
    """

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.diagnostics: list[str] = []

    def _diagonal(self, c: ClassifiedSpectrum) -> list[Any]:
        if self.cfg.diagonal is None:
            raise ParameterError("prescribed-diagonal needs --diagonal")
        return list(parse_spectrum(self.cfg.diagonal, c.mode).values)

    def attempt(
        self,
        c: ClassifiedSpectrum,
        strategy: Strategy,
        overrides: Optional[Mapping[str, Any]] = None,
    ) -> tuple[Realization, VerificationReport]:
        """
        Realize ``c`` with one strategy and verify the result.

        Trailing positives of a real diagonal are realized as 1x1 tail blocks
        around the core construction.

        Raises:
            ConstructionError: When the construction fails, or when its result
                does not verify
            NumericalError: When the realizer stops on a stray arithmetic or
                value error
        """
        core, tail = _with_tail(c)
        try:
            if strategy == Strategy.PRESCRIBED_DIAGONAL:
                realization = realize_prescribed_diagonal(core, self._diagonal(core))
            else:
                realization = REALIZERS[strategy](core, overrides or {})
        except NiepError:
            raise
        except (ArithmeticError, ValueError) as exc:
            raise NumericalError(
                f"{strategy.value} stopped on {type(exc).__name__}: {exc}"
            ) from exc
        realization = append_tail(realization, tail)
        realization.params.order = [format_scalar(x) for x in c.diagonal]
        report = verify_realization(realization, c.values, self.cfg.tolerance)
        if not report.verified:
            raise MethodInapplicable(
                f"{strategy.value} result failed verification: "
                f"{report.model_dump_json(exclude_none=True)}"
            )
        return realization, report

    def _success(
        self, strategy: Strategy, result: tuple[Realization, VerificationReport]
    ) -> RealizationAttempt:
        realization, report = result
        return RealizationAttempt(
            strategy=strategy,
            realization=realization,
            verification=report,
            diagnostics=list(self.diagnostics),
        )

    def realize(self, c: ClassifiedSpectrum) -> RealizationAttempt:
        """
        Realize ``c``, falling back as far as the request allows.

        A named strategy is tried alone. Under ``auto`` a construction error
        sends the spectrum to the family's general operation and then to the
        permuted search, unless the request pinned the order or parameters.

        Raises:
            ConstructionError: The last construction error; when several
                attempts failed, a ``MethodInapplicable`` listing them
        """
        cfg = self.cfg
        strategy = dispatch(_with_tail(c)[0], cfg)
        logger.info("dispatching %s to %s", format_spectrum(c.values), strategy.value)
        try:
            return self._success(strategy, self.attempt(c, strategy, cfg.overrides))
        except ConstructionError as exc:
            self.diagnostics.append(f"{strategy.value}: {_describe(exc)}")
            if cfg.strategy != AUTO or strategy == Strategy.PRESCRIBED_DIAGONAL:
                raise
            first = exc

        general = FAMILY_GENERAL[strategy]
        if general != strategy:
            logger.info("falling back to %s", general.value)
            try:
                return self._success(general, self.attempt(c, general, cfg.overrides))
            except ConstructionError as exc:
                self.diagnostics.append(f"{general.value}: {_describe(exc)}")

        if cfg.permutation_search and not cfg.order and not cfg.overrides:
            found = self._permuted(c)
            if found is not None:
                return found

        if len(self.diagnostics) == 1:
            raise first
        raise MethodInapplicable(
            f"no construction applies to this spectrum ({len(self.diagnostics)} attempts)",
            getattr(first, "stuck_index", None),
        )

    def _permuted(self, c: ClassifiedSpectrum) -> Optional[RealizationAttempt]:
        tried = 0
        for candidate in permuted_layouts(c, self.cfg.tail_search):
            tried += 1
            core, _ = _with_tail(candidate)
            strategy = dispatch(core)
            try:
                result = self.attempt(candidate, strategy)
            except ConstructionError as exc:
                logger.debug("permuted order %s: %s", candidate.diagonal, exc)
                continue
            order = ", ".join(format_scalar(x) for x in candidate.diagonal)
            self.diagnostics.append(
                f"default order inapplicable; realized with order ({order}) by {strategy.value}"
            )
            if candidate.is_complex:
                self.diagnostics[-1] += " with pair cells " + ", ".join(
                    _pair_text(p) for p in candidate.pair_order
                )
            logger.info("permuted search succeeded after %d layout(s)", tried)
            attempt = self._success(Strategy.PERMUTED, result)
            attempt.realization.params.notes.append(f"permuted from {strategy.value}")
            return attempt
        self.diagnostics.append(f"permuted: {tried} layout(s) tried, none applies")
        return None


def _pair_text(pair: Pair) -> str:
    return f"{format_scalar(pair.re)}±{format_scalar(pair.mu)}i"


# ===== Pipeline =====


@contextmanager
def _tolerance(value: float) -> Iterator[None]:
    saved = config.tolerance
    config.tolerance = value
    try:
        yield
    finally:
        config.tolerance = saved


def _failure_kind(exc: BaseException) -> FailureKind:
    if isinstance(exc, ConstructionError):
        return FailureKind.CONSTRUCTION
    if isinstance(exc, ConditionFailure):
        return FailureKind.CONDITION
    if isinstance(exc, NumericalError):
        return FailureKind.NUMERICAL
    return FailureKind.INPUT


def _fail(report: RunReport, exc: BaseException) -> RunReport:
    code = exit_code_for(exc)
    report.failure = FailureInfo(
        kind=_failure_kind(exc),
        error=type(exc).__name__,
        message=str(exc),
        exit_code=code,
    )
    report.exit_code = code
    return report


def _render(matrix: Any) -> list[list[str]]:
    return [[format_scalar(v) for v in row] for row in matrix.rows]


def render_params(realization: Realization) -> dict[str, Any]:
    """Parameters of a realization with dotted ``i.j`` keys and rendered values."""
    params = realization.params

    def pairs(entries: Mapping[tuple[int, int], Any]) -> dict[str, str]:
        return {f"{i}.{j}": format_scalar(v) for (i, j), v in sorted(entries.items())}

    rendered: dict[str, Any] = {"strategy": params.strategy}
    if params.alphas:
        rendered["alphas"] = {str(j): format_scalar(v) for j, v in sorted(params.alphas.items())}
    if params.betas:
        rendered["betas"] = pairs(params.betas)
    if params.couplers:
        rendered["couplers"] = pairs(params.couplers)
    if params.l_free:
        rendered["l"] = pairs(params.l_free)
    if params.t is not None:
        rendered["t"] = format_scalar(params.t)
    if params.cut_indices:
        rendered["cut_indices"] = list(params.cut_indices)
    if params.order:
        rendered["order"] = list(params.order)
    if params.intervals:
        rendered["intervals"] = {
            name: [low, high] for name, (low, high) in sorted(params.intervals.items())
        }
    if params.notes:
        rendered["notes"] = list(params.notes)
    return rendered


def run(cfg: RunConfig) -> RunReport:
    """
    Run the full pipeline for one request.

    Never raises for a well-formed request: every ``NiepError`` becomes the
    ``failure`` block of the report, with the matching exit code. Stray
    arithmetic and value errors are reported as numerical failures.

    Example:
        >>> report = run(RunConfig(spectrum="1,-1,-1"))
        >>> (report.exit_code, report.failure.error)
        (1, 'NecessaryConditionError')
    """
    report = RunReport(spectrum=[])
    with _tolerance(cfg.tolerance):
        try:
            parsed = parse_spectrum(cfg.spectrum_text(), cfg.mode)
            report.spectrum = [format_scalar(v) for v in parsed.values]
            report.mode = parsed.mode.value
            try:
                c = classify(parsed)
            except NoPerronError as exc:
                report.conditions = perron_failure_report(exc)
                raise

            report.conditions = necessary_conditions(c, cfg.jll_k_max, cfg.jll_m_max)
            if not report.conditions.power_sums_ok:
                raise NecessaryConditionError(
                    f"power sum condition fails: {report.conditions.witness}"
                )
            if cfg.order:
                c = apply_order(c, cfg.order)

            dispatcher = StrategyDispatcher(cfg)
            try:
                attempt = dispatcher.realize(c)
            finally:
                report.diagnostics = list(dispatcher.diagnostics)
        except NiepError as exc:
            logger.info("run failed: %s", _describe(exc))
            return _fail(report, exc)
        except (ArithmeticError, ValueError) as exc:
            logger.info("run stopped on %s: %s", type(exc).__name__, exc)
            return _fail(report, NumericalError(f"{type(exc).__name__}: {exc}"))

    realization = attempt.realization
    report.strategy = attempt.strategy.value
    report.params = render_params(realization)
    report.A = _render(realization.A)
    report.L = _render(realization.L)
    report.C = _render(realization.C)
    report.verification = attempt.verification
    report.certificate = [
        {"inequality": entry.description, "margin": format_scalar(entry.margin)}
        for entry in realization.certificate
    ]
    report.diagnostics = attempt.diagnostics
    report.realization = realization
    report.exit_code = 0
    return report
