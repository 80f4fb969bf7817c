"""
Free-parameter search for layouts.

The search runs in stages and stops at the first point whose C passes an
exact (or tolerance-based, in float mode) entrywise check:

1. constant entries of C must already be nonnegative;
2. Fourier–Motzkin projection of the affine entries, choosing parameters
   one after another inside their projected intervals;
3. for a single parameter, the nonnegative set of every entry from its roots;
4. a vectorised grid over the projected box, refined once;
5. coordinate descent from the stage-2 point.

Everything is deterministic: fixed iteration orders, lowest index wins ties.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional, Sequence

import numpy as np

from niep.config import config
from niep.core.errors import EmptyInterval, MethodInapplicable
from niep.core.layout import Layout, Parameter
from niep.core.result_models import CertificateEntry
from niep.core.scalar import Mode, format_scalar
from niep.core.symbolic import PolynomialEntry

logger = logging.getLogger(__name__)

Interval = tuple[Optional[Any], Optional[Any]]

_CHUNK = 8192


@dataclass
class Constraint:
    """``constant + Σ coefficients[i]·x_i ≥ 0``."""

    constant: Any
    coefficients: tuple[Any, ...]
    label: str

    def normalized(self) -> "Constraint":
        scale = max((abs(c) for c in self.coefficients), default=0)
        if scale == 0:
            return self
        return Constraint(
            self.constant / scale, tuple(c / scale for c in self.coefficients), self.label
        )

    def key(self) -> tuple:
        return (self.constant, self.coefficients)


@dataclass
class SolveOutcome:
    """Chosen point with the intervals and certificate that justify it."""

    values: dict[str, Any]
    intervals: dict[str, tuple[Optional[str], Optional[str]]] = field(default_factory=dict)
    certificate: list[CertificateEntry] = field(default_factory=list)
    stage: str = "constant"


class _ProjectionOverflow(Exception):
    pass


class LayoutSolver:
    """
    Search the free parameters of one layout.

    Args:
        layout: Layout whose pins are already applied
        preferred: Values tried first, clamped into their projected intervals
        settings: Overrides for the search budgets in ``config``
    """

    def __init__(
        self,
        layout: Layout,
        preferred: Optional[dict[str, Any]] = None,
        **settings: Any,
    ):
        self.layout = layout
        self.preferred = dict(preferred or {})
        self.parameters: list[Parameter] = layout.free
        self.names = [p.name for p in self.parameters]
        self.dimension = len(self.parameters)
        self.exact = layout.mode == Mode.EXACT
        self.tolerance: Any = Fraction(0) if self.exact else config.tolerance
        self.grid_points = settings.get("grid_points", config.grid_points)
        self.grid_budget = settings.get("grid_budget", config.grid_budget)
        self.max_grid_dimension = settings.get("max_grid_dimension", config.max_grid_dimension)
        self.descent_iterations = settings.get("descent_iterations", config.descent_iterations)
        self.unbounded_span = settings.get("unbounded_span", config.unbounded_span)
        self.max_denominator = settings.get("max_denominator", config.max_denominator)
        self.constraint_cap = settings.get("fm_constraint_cap", config.fm_constraint_cap)

        matrix = layout.symbolic_c()
        self.entries: list[tuple[int, int, PolynomialEntry]] = [
            (i + 1, j + 1, e) for i, row in enumerate(matrix) for j, e in enumerate(row)
        ]
        self.variable_entries = [(i, j, e) for i, j, e in self.entries if not e.is_constant]

    # ===== Public entry point =====

    def solve(self) -> SolveOutcome:
        """
        Find a parameter point making C nonnegative.

        Raises:
            EmptyInterval: If a constant entry is negative or a projected
                interval (or univariate feasible set) is empty
            MethodInapplicable: If every stage fails to produce a verified point
        """
        self._check_constants()
        if self.dimension == 0:
            return self._outcome([], {}, "constant")

        constraints = self._affine_constraints()
        point, intervals = self._propagate(constraints)
        if point is not None and self._verified(point):
            return self._outcome(point, intervals, "interval")

        if self.dimension == 1:
            candidate = self._univariate(intervals)
            if candidate is not None:
                return self._outcome(candidate, intervals, "univariate")

        box = self._box(constraints)
        candidate = self._grid(box)
        if candidate is not None:
            return self._outcome(candidate, intervals, "grid")

        start = point or [self._nominal(p) for p in self.parameters]
        candidate = self._descent(start, box)
        if candidate is not None:
            return self._outcome(candidate, intervals, "descent")

        raise MethodInapplicable(
            f"no point of the {self.dimension}-parameter search makes C nonnegative"
        )

    # ===== Stage 1: constants =====

    def _check_constants(self) -> None:
        for i, j, e in self.entries:
            if e.is_constant:
                value = e.evaluate([])
                if value < -self.tolerance:
                    raise EmptyInterval(
                        f"entry ({i},{j}) of C is the constant {format_scalar(value)} < 0",
                        parameter=f"C[{i},{j}]",
                    )

    # ===== Stage 2: interval propagation =====

    def _affine_constraints(self) -> list[Constraint]:
        constraints = []
        for i, j, e in self.variable_entries:
            if e.is_affine:
                constant, linear = e.affine_coefficients()
                if not self.exact:
                    constant, linear = float(constant), [float(c) for c in linear]
                constraints.append(Constraint(constant, tuple(linear), f"C[{i},{j}]"))
        return constraints

    def _eliminate(self, constraints: list[Constraint], var: int) -> list[Constraint]:
        positive, negative, kept = [], [], []
        for c in constraints:
            a = c.coefficients[var]
            if a > 0:
                positive.append(c)
            elif a < 0:
                negative.append(c)
            else:
                kept.append(c)
        for p in positive:
            for q in negative:
                a, b = p.coefficients[var], -q.coefficients[var]
                coefficients = tuple(
                    b * x + a * y for x, y in zip(p.coefficients, q.coefficients)
                )
                kept.append(
                    Constraint(b * p.constant + a * q.constant, coefficients, p.label)
                )
        unique: dict[tuple, Constraint] = {}
        for c in kept:
            c = c.normalized()
            if all(x == 0 for x in c.coefficients):
                if c.constant < -self.tolerance:
                    raise EmptyInterval(
                        f"no value of {self.names[var]} satisfies the constraints",
                        parameter=self.names[var],
                    )
                continue
            unique.setdefault(c.key(), c)
        if len(unique) > self.constraint_cap:
            raise _ProjectionOverflow()
        return list(unique.values())

    def _interval(self, constraints: list[Constraint], var: int, point: Sequence[Any]) -> Interval:
        lower: Optional[Any] = None
        upper: Optional[Any] = None
        for c in constraints:
            rest = c.constant + sum(
                c.coefficients[k] * point[k] for k in range(len(point)) if k != var
            )
            a = c.coefficients[var]
            if a == 0:
                if rest < -self.tolerance:
                    return (Fraction(1), Fraction(0))
                continue
            bound = -rest / a
            if a > 0:
                lower = bound if lower is None else max(lower, bound)
            else:
                upper = bound if upper is None else min(upper, bound)
        return lower, upper

    def _choose(self, parameter: Parameter, interval: Interval) -> Any:
        lower, upper = interval
        if parameter.name in self.preferred:
            value = self.preferred[parameter.name]
            if lower is not None and value < lower:
                value = lower
            if upper is not None and value > upper:
                value = upper
            return value
        nominal = self._nominal(parameter)
        if lower is not None and upper is not None:
            return (lower + upper) / 2
        if lower is not None:
            return nominal if nominal >= lower else lower + 1
        if upper is not None:
            return nominal if nominal <= upper else upper - 1
        return nominal

    def _propagate(
        self, constraints: list[Constraint]
    ) -> tuple[Optional[list[Any]], dict[str, Interval]]:
        d = self.dimension
        try:
            systems: list[list[Constraint]] = [[] for _ in range(d + 1)]
            systems[d] = constraints
            for var in range(d - 1, 0, -1):
                systems[var] = self._eliminate(systems[var + 1], var)
        except _ProjectionOverflow:
            logger.debug("interval propagation skipped: constraint cap reached")
            return None, {}

        point: list[Any] = []
        intervals: dict[str, Interval] = {}
        for var, parameter in enumerate(self.parameters):
            partial = point + [self._zero()] * (d - var)
            lower, upper = self._interval(systems[var + 1], var, partial)
            if lower is not None and upper is not None and lower > upper + self.tolerance:
                raise EmptyInterval(
                    f"feasible interval of {parameter.name} is empty: "
                    f"[{format_scalar(lower)}, {format_scalar(upper)}]",
                    parameter=parameter.name,
                    lower=lower,
                    upper=upper,
                )
            if lower is not None and upper is not None and lower > upper:
                lower = upper = (lower + upper) / 2
            intervals[parameter.name] = (lower, upper)
            point.append(self._choose(parameter, (lower, upper)))
            logger.debug(
                "%s in [%s, %s] -> %s",
                parameter.name,
                _render(lower),
                _render(upper),
                format_scalar(point[-1]),
            )
        return point, intervals

    # ===== Stage 3: one parameter =====

    def _univariate(self, intervals: dict[str, Interval]) -> Optional[list[Any]]:
        name = self.names[0]
        lower, upper = intervals.get(name, (None, None))
        feasible = [(_f(lower, -np.inf), _f(upper, np.inf))]
        roots: list[float] = []
        for _, _, e in self.variable_entries:
            component, entry_roots = _nonnegative_set(e.univariate_coefficients())
            feasible = _intersect(feasible, component)
            roots.extend(entry_roots)
            if not feasible:
                raise EmptyInterval(
                    f"no value of {name} makes every entry of C nonnegative", parameter=name
                )

        nominal = float(self._nominal(self.parameters[0]))
        candidates: list[float] = []
        for lo, hi in sorted(feasible, key=lambda iv: -(iv[1] - iv[0])):
            if np.isfinite(lo) and np.isfinite(hi):
                candidates.append((lo + hi) / 2)
            elif np.isfinite(lo):
                candidates.append(nominal if nominal >= lo else lo + 1)
            elif np.isfinite(hi):
                candidates.append(nominal if nominal <= hi else hi - 1)
            else:
                candidates.append(nominal)
        candidates.extend(r for r in roots if any(lo <= r <= hi for lo, hi in feasible))
        for x in candidates:
            point = [self._rationalize(x)]
            if self._verified(point):
                return point
        return None

    # ===== Stage 4: grid =====

    def _box(self, constraints: list[Constraint]) -> list[tuple[float, float]]:
        box = []
        for var, parameter in enumerate(self.parameters):
            lower, upper = self._marginal(constraints, var)
            nominal = float(self._nominal(parameter))
            span = self.unbounded_span
            lo = _f(lower, min(nominal, _f(upper, nominal)) - span)
            hi = _f(upper, max(nominal, _f(lower, nominal)) + span)
            box.append((lo, hi))
        return box

    def _marginal(self, constraints: list[Constraint], var: int) -> Interval:
        try:
            system = constraints
            for other in range(self.dimension - 1, -1, -1):
                if other != var:
                    system = self._eliminate(system, other)
        except (_ProjectionOverflow, EmptyInterval):
            return None, None
        return self._interval(system, var, [self._zero()] * self.dimension)

    def _margins(self, points: np.ndarray) -> np.ndarray:
        margins = np.full(points.shape[0], np.inf)
        for _, _, e in self.variable_entries:
            np.minimum(margins, e.evaluate_many(points), out=margins)
        return margins

    def _best_on_grid(self, axes: list[np.ndarray]) -> tuple[np.ndarray, float]:
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(axes))
        best_index, best_margin = 0, -np.inf
        for start in range(0, grid.shape[0], _CHUNK):
            margins = self._margins(grid[start : start + _CHUNK])
            k = int(np.argmax(margins))
            if margins[k] > best_margin:
                best_index, best_margin = start + k, float(margins[k])
        return grid[best_index], best_margin

    def _axes(self, box: list[tuple[float, float]]) -> list[np.ndarray]:
        axes = []
        for lo, hi in box:
            axis = np.linspace(lo, hi, self.grid_points)
            axes.append(np.unique(np.append(axis, (lo + hi) / 2)))
        return axes

    def _grid(self, box: list[tuple[float, float]]) -> Optional[list[Any]]:
        if self.dimension > self.max_grid_dimension:
            return None
        axes = self._axes(box)
        if int(np.prod([len(a) for a in axes])) > self.grid_budget:
            logger.debug("grid skipped: budget exceeded")
            return None

        best, margin = self._best_on_grid(axes)
        steps = [(hi - lo) / max(self.grid_points - 1, 1) for lo, hi in box]
        refined_box = [
            (max(lo, x - s), min(hi, x + s)) for (lo, hi), x, s in zip(box, best, steps)
        ]
        refined, refined_margin = self._best_on_grid(self._axes(refined_box))
        logger.debug("grid margins %.3g, refined %.3g", margin, refined_margin)

        for candidate in (refined, best):
            point = [self._rationalize(x) for x in candidate]
            if self._verified(point):
                return point
        return None

    # ===== Stage 5: coordinate descent =====

    def _descent(self, start: Sequence[Any], box: list[tuple[float, float]]) -> Optional[list[Any]]:
        x = np.array([float(v) for v in start])
        steps = np.array([max((hi - lo) / 4, 0.25) for lo, hi in box])
        margin = float(self._margins(x[None, :])[0])
        for _ in range(self.descent_iterations):
            improved = False
            for var in range(self.dimension):
                for direction in (1.0, -1.0):
                    trial = x.copy()
                    trial[var] += direction * steps[var]
                    trial_margin = float(self._margins(trial[None, :])[0])
                    if trial_margin > margin:
                        x, margin, improved = trial, trial_margin, True
                        break
            if margin >= 0:
                point = [self._rationalize(v) for v in x]
                if self._verified(point):
                    return point
            if not improved:
                steps /= 2
                if float(np.max(steps)) < 1e-12:
                    break
        return None

    # ===== Helpers =====

    def _zero(self) -> Any:
        return Fraction(0) if self.exact else 0.0

    def _nominal(self, parameter: Parameter) -> Any:
        return Fraction(parameter.nominal) if self.exact else float(parameter.nominal)

    def _rationalize(self, value: Any) -> Any:
        if not self.exact:
            return float(value)
        if isinstance(value, Fraction):
            return value
        return Fraction(float(value)).limit_denominator(self.max_denominator)

    def _verified(self, point: Sequence[Any]) -> bool:
        return all(e.evaluate(point) >= -self.tolerance for _, _, e in self.variable_entries)

    def _outcome(
        self, point: Sequence[Any], intervals: dict[str, Interval], stage: str
    ) -> SolveOutcome:
        values = dict(zip(self.names, point))
        certificate = [
            CertificateEntry(
                description=f"C[{i},{j}] = {e.render()}", margin=e.evaluate(point)
            )
            for i, j, e in self.variable_entries
        ]
        rendered = {name: (_render(lo), _render(hi)) for name, (lo, hi) in intervals.items()}
        chosen = {k: format_scalar(v) for k, v in values.items()}
        logger.debug("solved by %s stage: %s", stage, chosen)
        return SolveOutcome(values=values, intervals=rendered, certificate=certificate, stage=stage)


def solve_layout(
    layout: Layout, preferred: Optional[dict[str, Any]] = None, **settings: Any
) -> SolveOutcome:
    """Run the staged search on a layout; see ``LayoutSolver``."""
    return LayoutSolver(layout, preferred, **settings).solve()


# ===== Univariate helpers =====


def _render(value: Optional[Any]) -> Optional[str]:
    return None if value is None else format_scalar(value)


def _f(value: Optional[Any], default: float) -> float:
    return default if value is None else float(value)


def _nonnegative_set(coefficients: list[float]) -> tuple[list[tuple[float, float]], list[float]]:
    """Closed intervals where a polynomial (constant term first) is ≥ 0, and its real roots."""
    while len(coefficients) > 1 and coefficients[-1] == 0:
        coefficients = coefficients[:-1]
    poly = np.polynomial.Polynomial(coefficients)
    scale = max(1.0, max(abs(c) for c in coefficients))
    if len(coefficients) == 1:
        return ([(-np.inf, np.inf)] if coefficients[0] >= 0 else []), []

    roots = sorted(
        {
            float(r.real)
            for r in np.roots(coefficients[::-1])
            if abs(r.imag) <= 1e-9 * max(1.0, abs(r))
        }
    )
    edges = [-np.inf] + roots + [np.inf]
    pieces: list[tuple[float, float]] = [(r, r) for r in roots]
    for lo, hi in zip(edges, edges[1:]):
        if np.isinf(lo) and np.isinf(hi):
            sample = 0.0
        elif np.isinf(lo):
            sample = hi - 1.0
        elif np.isinf(hi):
            sample = lo + 1.0
        else:
            sample = (lo + hi) / 2
        if poly(sample) >= -1e-12 * scale:
            pieces.append((lo, hi))
    return _merge(pieces), roots


def _merge(pieces: list[tuple[float, float]]) -> list[tuple[float, float]]:
    merged: list[tuple[float, float]] = []
    for lo, hi in sorted(pieces):
        if merged and lo <= merged[-1][1] + 1e-12:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged


def _intersect(
    left: list[tuple[float, float]], right: list[tuple[float, float]]
) -> list[tuple[float, float]]:
    result = []
    for a_lo, a_hi in left:
        for b_lo, b_hi in right:
            lo, hi = max(a_lo, b_lo), min(a_hi, b_hi)
            if lo <= hi + 1e-12:
                result.append((lo, max(lo, hi)))
    return _merge(result)
