"""Graded linear systems over the truncated ring.

Every constraint is ``Σ_u coefficient_u · x_u = rhs`` with unknown series ``x_u``. Matching
coefficients monomial by monomial up to the target order turns it into a sparse rational
system over QQ. It is reduced one homogeneous degree at a time with sympy's DomainMatrix:
the rows of degree d fix the coefficients of x_u of degree d - shift(u), where shift(u) is
the lowest degree occurring in the coefficients of x_u. Free columns are set to zero, so
the particular solution is deterministic.

Coefficients of degree above order - shift(u) never meet a row, so a solution is reported
valid only up to order - max_u shift(u).
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from src.algebra.ring import Monomial, RingSpec, TruncatedSeries
from src.errors import Inconsistent

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LinearConstraint:
    """One series-valued linear equation in the unknowns."""

    coefficients: Mapping[str, TruncatedSeries]
    rhs: TruncatedSeries
    label: str = ""


@dataclass
class _System:
    rows: List[Tuple[int, Monomial]] = field(default_factory=list)
    columns: List[Tuple[str, Monomial]] = field(default_factory=list)
    entries: Dict[int, Dict[int, Fraction]] = field(default_factory=dict)
    rhs: Dict[int, Fraction] = field(default_factory=dict)


class _Stalled(Exception):
    """A degree whose rows cannot be met once lower degrees are fixed."""


def _qq(value: Fraction):
    return QQ(value.numerator, value.denominator)


def _build_system(
    ring: RingSpec, unknowns: Sequence[str], constraints: Sequence[LinearConstraint], order: int
) -> _System:
    monomials = ring.monomials(order)
    row_index = {}
    system = _System()
    for c, _ in enumerate(constraints):
        for monomial in monomials:
            row_index[(c, monomial)] = len(system.rows)
            system.rows.append((c, monomial))
    column_index = {}
    for monomial in monomials:
        for unknown in unknowns:
            column_index[(unknown, monomial)] = len(system.columns)
            system.columns.append((unknown, monomial))

    for c, constraint in enumerate(constraints):
        for unknown, coefficient in constraint.coefficients.items():
            if unknown not in unknowns:
                raise KeyError(f"constraint {constraint.label!r} uses undeclared unknown {unknown!r}")
            for shift, value in coefficient.terms.items():
                base = sum(shift)
                if base > order:
                    continue
                for monomial in ring.monomials(order - base):
                    target = tuple(a + b for a, b in zip(shift, monomial))
                    row = row_index[(c, target)]
                    column = column_index[(unknown, monomial)]
                    bucket = system.entries.setdefault(row, {})
                    bucket[column] = bucket.get(column, 0) + value
        for monomial, value in constraint.rhs.terms.items():
            if sum(monomial) <= order:
                system.rhs[row_index[(c, monomial)]] = value
    return system


def degree_shifts(constraints: Sequence[LinearConstraint], order: int) -> Dict[str, int]:
    """Lowest total degree in the coefficients of each unknown that occurs at all."""
    shifts: Dict[str, int] = {}
    for constraint in constraints:
        for unknown, coefficient in constraint.coefficients.items():
            degrees = [sum(m) for m in coefficient.terms if sum(m) <= order]
            if degrees:
                shifts[unknown] = min(shifts.get(unknown, order), min(degrees))
    return shifts


def _augmented(system: _System, rows: Sequence[int]) -> DomainMatrix:
    width = len(system.columns)
    data = {}
    for new_row, row in enumerate(rows):
        entries = {col: _qq(v) for col, v in system.entries.get(row, {}).items() if v}
        value = system.rhs.get(row)
        if value:
            entries[width] = _qq(value)
        if entries:
            data[new_row] = entries
    return DomainMatrix(data, (len(rows), width + 1), QQ)


def _pivot_values(reduced: DomainMatrix, pivots: Sequence[int], width: int) -> List[Fraction]:
    if not pivots:
        return []
    column = reduced.extract(list(range(len(pivots))), [width]).to_Matrix()
    return [Fraction(int(column[i, 0].p), int(column[i, 0].q)) for i in range(len(pivots))]


def _consistent(system: _System, rows: Sequence[int]) -> bool:
    if not rows:
        return True
    _, pivots = _augmented(system, rows).rref()
    return len(system.columns) not in pivots


def _locate_obstruction(
    ring: RingSpec, system: _System, constraints: Sequence[LinearConstraint], order: int
) -> Inconsistent:
    """Lowest degree whose truncated subsystem is inconsistent, with the row that breaks it."""
    for degree in range(order + 1):
        lower = [i for i, (_, m) in enumerate(system.rows) if sum(m) < degree]
        current = [i for i, (_, m) in enumerate(system.rows) if sum(m) == degree]
        if _consistent(system, lower + current):
            continue
        accepted = list(lower)
        for row in current:
            accepted.append(row)
            if not _consistent(system, accepted):
                c, monomial = system.rows[row]
                return Inconsistent(degree, constraints[c].label, ring.format_monomial(monomial) or "1")
        return Inconsistent(degree)
    return Inconsistent(order)


def _solve_by_degree(system: _System, shifts: Mapping[str, int], order: int) -> Dict[int, Fraction]:
    rows_by_degree = defaultdict(list)
    for row, (_, monomial) in enumerate(system.rows):
        if system.entries.get(row) or system.rhs.get(row):
            rows_by_degree[sum(monomial)].append(row)
    fixed_at = defaultdict(list)
    for column, (unknown, monomial) in enumerate(system.columns):
        if unknown in shifts:
            fixed_at[sum(monomial) + shifts[unknown]].append(column)

    values: Dict[int, Fraction] = {}
    for degree in range(order + 1):
        rows = rows_by_degree.get(degree, [])
        if not rows:
            continue
        fresh = fixed_at.get(degree, [])
        position = {column: i for i, column in enumerate(fresh)}
        width = len(fresh)
        data = {}
        for k, row in enumerate(rows):
            residual = system.rhs.get(row, Fraction(0))
            local = {}
            for column, value in system.entries.get(row, {}).items():
                if column in position:
                    if value:
                        local[position[column]] = _qq(value)
                elif column in values:
                    residual -= value * values[column]
            if residual:
                local[width] = _qq(residual)
            if local:
                data[k] = local
        if not data:
            continue
        reduced, pivots = DomainMatrix(data, (len(rows), width + 1), QQ).rref()
        if width in pivots:
            raise _Stalled(degree)
        for pivot, value in zip(pivots, _pivot_values(reduced, pivots, width)):
            if value:
                values[fresh[pivot]] = value
    return values


def _solve_whole(
    ring: RingSpec, system: _System, constraints: Sequence[LinearConstraint], order: int
) -> Dict[int, Fraction]:
    width = len(system.columns)
    live_rows = [r for r in range(len(system.rows)) if system.entries.get(r) or system.rhs.get(r)]
    if not live_rows:
        return {}
    reduced, pivots = _augmented(system, live_rows).rref()
    if width in pivots:
        raise _locate_obstruction(ring, system, constraints, order)
    return {
        pivot: value for pivot, value in zip(pivots, _pivot_values(reduced, pivots, width)) if value
    }


def solve_graded_linear(
    ring: RingSpec,
    unknowns: Sequence[str],
    constraints: Sequence[LinearConstraint],
    order: Optional[int] = None,
) -> Dict[str, TruncatedSeries]:
    """Particular solution, valid up to ``order`` minus the largest degree shift.

    Raises:
        Inconsistent: no solution exists at some homogeneous degree <= order
    """
    order = ring.truncation if order is None else order
    system = _build_system(ring, unknowns, constraints, order)
    shifts = degree_shifts(constraints, order)
    valid = max(0, order - max(shifts.values(), default=0))
    logger.debug(
        "graded system: %d rows x %d columns at order %d, valid to %d",
        len(system.rows), len(system.columns), order, valid,
    )
    try:
        values = _solve_by_degree(system, shifts, order)
    except _Stalled as stalled:
        logger.debug("degree %s stalled, reducing the whole system", stalled)
        values = _solve_whole(ring, system, constraints, order)

    terms: Dict[str, Dict[Monomial, Fraction]] = {u: {} for u in unknowns}
    for column, value in values.items():
        unknown, monomial = system.columns[column]
        terms[unknown][monomial] = value
    return {u: TruncatedSeries(ring, terms[u], valid) for u in unknowns}


def residuals(
    solution: Mapping[str, TruncatedSeries], constraints: Sequence[LinearConstraint], order: int
) -> List[Tuple[str, Optional[Tuple[Monomial, Fraction, Fraction]]]]:
    """Back-substitution: per constraint, the first monomial where lhs and rhs differ."""
    report = []
    for constraint in constraints:
        lhs = TruncatedSeries.zero(constraint.rhs.ring)
        for unknown, coefficient in constraint.coefficients.items():
            lhs = lhs + coefficient * solution[unknown]
        report.append((constraint.label, lhs.first_difference(constraint.rhs, order)))
    return report
