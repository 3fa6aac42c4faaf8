"""Exact truncated series in z_1..z_n and formal conjugates w_1..w_n.

Series are sparse sympy polynomials over QQ in an auxiliary ring that appends a grading
generator ``t``: every stored monomial carries t^(total degree), so the ``ring_series``
routines truncate by total degree when asked to truncate in ``t``.

Every series carries a ``valid_order``: the total degree up to which its coefficients are
certified. Binary operations take the minimum of the operand orders, derivatives lose one
order, and comparisons report the order at which they hold.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Dict, Iterable, List, Mapping, Optional, Tuple, Union

from sympy import QQ
from sympy.polys.ring_series import mul_xin, rs_mul, rs_series_inversion, rs_trunc
from sympy.polys.rings import PolyElement, PolyRing, ring as poly_ring

from src.errors import RingMismatch, ZeroConstantTerm

logger = logging.getLogger(__name__)

Monomial = Tuple[int, ...]
Scalar = Union[int, Fraction]

HOLOMORPHIC = "z"
ANTIHOLOMORPHIC = "w"


def monomial_key(monomial: Monomial) -> Tuple[int, Tuple[int, ...]]:
    """Graded-lex sort key: total degree first, then z_1 before z_2 … before w_n."""
    return sum(monomial), tuple(-e for e in monomial)


@lru_cache(maxsize=None)
def _monomials(width: int, max_degree: int) -> Tuple[Monomial, ...]:
    found: List[Monomial] = []

    def extend(prefix: List[int], remaining: int) -> None:
        if len(prefix) == width:
            found.append(tuple(prefix))
            return
        for exponent in range(remaining + 1):
            extend(prefix + [exponent], remaining - exponent)

    extend([], max_degree)
    return tuple(sorted(found, key=monomial_key))


@lru_cache(maxsize=None)
def graded_ring(num_vars: int) -> PolyRing:
    """QQ[z_1..z_n, w_1..w_n, t]; t is the last generator."""
    names = [f"z{i}" for i in range(1, num_vars + 1)] + [f"w{i}" for i in range(1, num_vars + 1)] + ["t"]
    return poly_ring(",".join(names), QQ)[0]


def to_rational(value) -> Fraction:
    """QQ element (python or gmpy flavour) to Fraction."""
    return Fraction(int(value.numerator), int(value.denominator))


def to_domain(value):
    if isinstance(value, (int, Fraction)):
        value = Fraction(value)
        return QQ(value.numerator, value.denominator)
    return QQ.convert(value)


@dataclass(frozen=True)
class RingSpec:
    """Q[z_1..z_n, w_1..w_n] modulo monomials of total degree above ``truncation``."""

    num_vars: int
    truncation: int

    def __post_init__(self):
        if self.num_vars < 1:
            raise ValueError(f"num_vars must be >= 1, got {self.num_vars}")
        if self.truncation < 0:
            raise ValueError(f"truncation must be >= 0, got {self.truncation}")

    @property
    def width(self) -> int:
        return 2 * self.num_vars

    @property
    def poly_ring(self) -> PolyRing:
        return graded_ring(self.num_vars)

    def unit_monomial(self) -> Monomial:
        return (0,) * self.width

    def position(self, kind: str, index: int) -> int:
        if not 1 <= index <= self.num_vars:
            raise ValueError(f"variable index {index} outside 1..{self.num_vars}")
        if kind == HOLOMORPHIC:
            return index - 1
        if kind == ANTIHOLOMORPHIC:
            return self.num_vars + index - 1
        raise ValueError(f"unknown variable family {kind!r}")

    def variable_monomial(self, kind: str, index: int) -> Monomial:
        exponents = [0] * self.width
        exponents[self.position(kind, index)] = 1
        return tuple(exponents)

    def variable_name(self, position: int) -> str:
        if position < self.num_vars:
            return f"z{position + 1}"
        return f"w{position - self.num_vars + 1}"

    def monomials(self, max_degree: Optional[int] = None) -> Tuple[Monomial, ...]:
        """All monomials up to ``max_degree`` (default: the truncation) in graded-lex order."""
        limit = self.truncation if max_degree is None else max_degree
        return _monomials(self.width, max(limit, 0))

    def format_monomial(self, monomial: Monomial) -> str:
        parts = []
        for position, exponent in enumerate(monomial):
            if exponent == 1:
                parts.append(self.variable_name(position))
            elif exponent > 1:
                parts.append(f"{self.variable_name(position)}^{exponent}")
        return "*".join(parts)


@dataclass(frozen=True)
class IdealSpec:
    """Coordinate ideal generated by the listed z_i."""

    vars: Tuple[int, ...]

    def __post_init__(self):
        cleaned = tuple(sorted(set(int(v) for v in self.vars)))
        if not cleaned:
            raise ValueError("ideal needs at least one generator")
        if cleaned[0] < 1:
            raise ValueError(f"ideal generator indices are 1-based, got {cleaned[0]}")
        object.__setattr__(self, "vars", cleaned)

    def positions(self) -> Tuple[int, ...]:
        return tuple(v - 1 for v in self.vars)

    def generators(self, ring: RingSpec) -> List["TruncatedSeries"]:
        return [TruncatedSeries.variable(ring, HOLOMORPHIC, v) for v in self.vars]


def _format_rational(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


class TruncatedSeries:
    """A sparse polynomial over QQ, exact up to ``valid_order``.

    ``terms`` maps exponent tuples (z_1..z_n, w_1..w_n) to nonzero Fractions.
    """

    def __init__(self, ring: RingSpec, terms: Mapping[Monomial, Scalar], valid_order: Optional[int] = None):
        order = self._clamp(ring, valid_order)
        data = {}
        for monomial, coefficient in terms.items():
            degree = sum(monomial)
            if coefficient and degree <= order:
                data[tuple(monomial) + (degree,)] = to_domain(coefficient)
        self._set(ring, ring.poly_ring.from_dict(data), order)

    @staticmethod
    def _clamp(ring: RingSpec, valid_order: Optional[int]) -> int:
        order = ring.truncation if valid_order is None else valid_order
        return max(0, min(order, ring.truncation))

    def _set(self, ring: RingSpec, poly: PolyElement, order: int) -> None:
        self.ring = ring
        self.poly = poly
        self.valid_order = order

    @classmethod
    def from_poly(cls, ring: RingSpec, poly: PolyElement, valid_order: Optional[int] = None) -> "TruncatedSeries":
        """Wrap a graded polynomial, dropping monomials above the order."""
        order = cls._clamp(ring, valid_order)
        series = cls.__new__(cls)
        series._set(ring, rs_trunc(poly, ring.poly_ring.gens[-1], order + 1), order)
        return series

    # construction -------------------------------------------------------------------

    @classmethod
    def zero(cls, ring: RingSpec, order: Optional[int] = None) -> "TruncatedSeries":
        return cls(ring, {}, order)

    @classmethod
    def constant(cls, ring: RingSpec, value: Scalar, order: Optional[int] = None) -> "TruncatedSeries":
        return cls(ring, {ring.unit_monomial(): value}, order)

    @classmethod
    def one(cls, ring: RingSpec) -> "TruncatedSeries":
        return cls.constant(ring, 1)

    @classmethod
    def variable(cls, ring: RingSpec, kind: str, index: int) -> "TruncatedSeries":
        return cls(ring, {ring.variable_monomial(kind, index): 1})

    # arithmetic ---------------------------------------------------------------------

    @property
    def _grading(self) -> PolyElement:
        return self.ring.poly_ring.gens[-1]

    def _same_ring(self, other: "TruncatedSeries") -> None:
        if other.ring != self.ring:
            raise RingMismatch(f"{self.ring} vs {other.ring}")

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._same_ring(other)
        return TruncatedSeries.from_poly(self.ring, self.poly + other.poly, min(self.valid_order, other.valid_order))

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries.from_poly(self.ring, -self.poly, self.valid_order)

    def __sub__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._same_ring(other)
        return TruncatedSeries.from_poly(self.ring, self.poly - other.poly, min(self.valid_order, other.valid_order))

    def scale(self, factor: Scalar) -> "TruncatedSeries":
        return TruncatedSeries.from_poly(self.ring, self.poly.mul_ground(to_domain(factor)), self.valid_order)

    def __mul__(self, other: Union["TruncatedSeries", Scalar]) -> "TruncatedSeries":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        self._same_ring(other)
        order = min(self.valid_order, other.valid_order)
        return TruncatedSeries.from_poly(self.ring, rs_mul(self.poly, other.poly, self._grading, order + 1), order)

    def __rmul__(self, other: Scalar) -> "TruncatedSeries":
        return self.scale(other)

    def wirtinger(self, kind: str, index: int) -> "TruncatedSeries":
        """Formal partial derivative in z_index or w_index."""
        variable = self.ring.poly_ring.gens[self.ring.position(kind, index)]
        derived = mul_xin(self.poly.diff(variable), self.ring.width, -1)
        return TruncatedSeries.from_poly(self.ring, derived, max(0, self.valid_order - 1))

    def invert_unit(self) -> "TruncatedSeries":
        """Multiplicative inverse by Newton iteration; needs a nonzero constant term."""
        if self.constant_term == 0:
            raise ZeroConstantTerm(f"cannot invert {self}")
        inverse = rs_series_inversion(self.poly, self._grading, self.valid_order + 1)
        return TruncatedSeries.from_poly(self.ring, inverse, self.valid_order)

    def power(self, exponent: int) -> "TruncatedSeries":
        base = self.invert_unit() if exponent < 0 else self
        remaining = abs(exponent)
        result = TruncatedSeries.constant(self.ring, 1, self.valid_order)
        while remaining:
            if remaining & 1:
                result = result * base
            remaining >>= 1
            if remaining:
                base = base * base
        return result

    def reduce_mod_ideal(self, ideal: IdealSpec) -> "TruncatedSeries":
        """Substitute z_i := 0 for every generator of the ideal."""
        positions = [p for p in ideal.positions() if p < self.ring.num_vars]
        kept = {m: c for m, c in self.poly.items() if not any(m[p] for p in positions)}
        return TruncatedSeries.from_poly(self.ring, self.ring.poly_ring.from_dict(kept), self.valid_order)

    def truncate(self, order: int) -> "TruncatedSeries":
        if order >= self.valid_order:
            return self
        return TruncatedSeries.from_poly(self.ring, self.poly, order)

    # inspection ---------------------------------------------------------------------

    @cached_property
    def terms(self) -> Dict[Monomial, Fraction]:
        return {m[:-1]: to_rational(c) for m, c in self.poly.items()}

    @property
    def constant_term(self) -> Fraction:
        return to_rational(self.poly.get(self.ring.poly_ring.zero_monom, QQ.zero))

    def is_zero(self) -> bool:
        return not self.poly

    def is_zero_to(self, order: int) -> bool:
        return all(m[-1] > order for m in self.poly)

    def has_antiholomorphic(self) -> bool:
        n = self.ring.num_vars
        return any(any(m[n:2 * n]) for m in self.poly)

    def first_difference(
        self, other: "TruncatedSeries", order: Optional[int] = None
    ) -> Optional[Tuple[Monomial, Fraction, Fraction]]:
        """Lowest graded-lex monomial where the two series differ, up to ``order``."""
        self._same_ring(other)
        limit = min(self.valid_order, other.valid_order) if order is None else order
        difference = self.poly - other.poly
        candidates = [m[:-1] for m in difference if m[-1] <= limit]
        if not candidates:
            return None
        monomial = min(candidates, key=monomial_key)
        zero = Fraction(0)
        return monomial, self.terms.get(monomial, zero), other.terms.get(monomial, zero)

    def agrees(self, other: "TruncatedSeries", order: Optional[int] = None) -> bool:
        return self.first_difference(other, order) is None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self.ring == other.ring and self.valid_order == other.valid_order and self.poly == other.poly

    def __hash__(self) -> int:
        return hash((self.ring, self.valid_order, frozenset(self.terms.items())))

    def __str__(self) -> str:
        if not self.poly:
            return "0"
        pieces = []
        for monomial in sorted(self.terms, key=monomial_key):
            coefficient = self.terms[monomial]
            name = self.ring.format_monomial(monomial)
            magnitude = abs(coefficient)
            if not name:
                body = _format_rational(magnitude)
            elif magnitude == 1:
                body = name
            else:
                body = f"{_format_rational(magnitude)}*{name}"
            pieces.append(("-" if coefficient < 0 else "+", body))
        sign, body = pieces[0]
        text = f"-{body}" if sign == "-" else body
        for sign, body in pieces[1:]:
            text += f" {sign} {body}"
        return text

    def __repr__(self) -> str:
        return f"TruncatedSeries({self}, valid_order={self.valid_order})"

    @property
    def term_count(self) -> int:
        return len(self.poly)


def series_add(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    return a + b


def series_mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    return a * b


def wirtinger(a: TruncatedSeries, kind: str, index: int) -> TruncatedSeries:
    return a.wirtinger(kind, index)


def invert_unit(a: TruncatedSeries) -> TruncatedSeries:
    return a.invert_unit()


def reduce_mod_ideal(a: TruncatedSeries, ideal: IdealSpec) -> TruncatedSeries:
    return a.reduce_mod_ideal(ideal)


def series_sum(ring: RingSpec, values: Iterable[TruncatedSeries]) -> TruncatedSeries:
    total = TruncatedSeries.zero(ring)
    for value in values:
        total = total + value
    return total
