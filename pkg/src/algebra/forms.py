"""Bigraded differential forms with truncated-series coefficients.

A key is one bitmask over the 2n generators ordered dz_1 < … < dz_n < dw_1 < … < dw_n:
bit i-1 is dz_i and bit n+i-1 is dw_i. Coefficients are written on the left.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Iterable, Mapping, Optional, Tuple, Union

from src.algebra.bitmasks import indices, merge_sign, popcount
from src.algebra.ring import (
    ANTIHOLOMORPHIC,
    HOLOMORPHIC,
    IdealSpec,
    Monomial,
    RingSpec,
    Scalar,
    TruncatedSeries,
)
from src.errors import RingMismatch

logger = logging.getLogger(__name__)

FormKey = int


def generator_bit(ring: RingSpec, kind: str, index: int) -> int:
    return 1 << ring.position(kind, index)


def bidegree(ring: RingSpec, key: FormKey) -> Tuple[int, int]:
    holomorphic_bits = (1 << ring.num_vars) - 1
    return popcount(key & holomorphic_bits), popcount(key >> ring.num_vars)


def key_name(ring: RingSpec, key: FormKey) -> str:
    names = []
    for position in indices(key):
        position -= 1
        if position < ring.num_vars:
            names.append(f"dz{position + 1}")
        else:
            names.append(f"dw{position - ring.num_vars + 1}")
    return "*".join(names)


def key_sort(key: FormKey) -> Tuple[int, Tuple[int, ...]]:
    return popcount(key), indices(key)


@dataclass(frozen=True, eq=False)
class Form:
    """Element of the bigraded exterior algebra over the truncated ring."""

    ring: RingSpec
    terms: Mapping[FormKey, TruncatedSeries]
    valid_order: Optional[int] = None

    def __post_init__(self):
        order = self.ring.truncation if self.valid_order is None else self.valid_order
        for coefficient in self.terms.values():
            if coefficient.ring != self.ring:
                raise RingMismatch(f"{coefficient.ring} vs {self.ring}")
            order = min(order, coefficient.valid_order)
        order = max(0, order)
        cleaned = {key: c.truncate(order) for key, c in self.terms.items()}
        cleaned = {key: c for key, c in cleaned.items() if not c.is_zero()}
        object.__setattr__(self, "valid_order", order)
        object.__setattr__(self, "terms", cleaned)

    # construction -------------------------------------------------------------------

    @classmethod
    def zero(cls, ring: RingSpec, order: Optional[int] = None) -> "Form":
        return cls(ring, {}, order)

    @classmethod
    def scalar(cls, value: TruncatedSeries) -> "Form":
        return cls(value.ring, {0: value}, value.valid_order)

    @classmethod
    def constant(cls, ring: RingSpec, value: Scalar) -> "Form":
        return cls.scalar(TruncatedSeries.constant(ring, value))

    @classmethod
    def one(cls, ring: RingSpec) -> "Form":
        return cls.constant(ring, 1)

    @classmethod
    def generator(cls, ring: RingSpec, kind: str, index: int) -> "Form":
        """dz_index for kind 'z', dw_index for kind 'w'."""
        return cls(ring, {generator_bit(ring, kind, index): TruncatedSeries.one(ring)})

    @classmethod
    def monomial(cls, ring: RingSpec, key: FormKey, coefficient: Optional[TruncatedSeries] = None) -> "Form":
        return cls(ring, {key: coefficient if coefficient is not None else TruncatedSeries.one(ring)})

    # arithmetic ---------------------------------------------------------------------

    def _same_ring(self, other: "Form") -> None:
        if other.ring != self.ring:
            raise RingMismatch(f"{self.ring} vs {other.ring}")

    def __add__(self, other: "Form") -> "Form":
        self._same_ring(other)
        terms = dict(self.terms)
        for key, coefficient in other.terms.items():
            terms[key] = terms[key] + coefficient if key in terms else coefficient
        return Form(self.ring, terms, min(self.valid_order, other.valid_order))

    def __neg__(self) -> "Form":
        return Form(self.ring, {k: -c for k, c in self.terms.items()}, self.valid_order)

    def __sub__(self, other: "Form") -> "Form":
        return self + (-other)

    def scale(self, factor: Scalar) -> "Form":
        return Form(self.ring, {k: c.scale(factor) for k, c in self.terms.items()}, self.valid_order)

    def times(self, function: TruncatedSeries) -> "Form":
        """Multiply every coefficient by a function (degree-0 form)."""
        return Form(
            self.ring,
            {k: function * c for k, c in self.terms.items()},
            min(self.valid_order, function.valid_order),
        )

    def wedge(self, other: "Form") -> "Form":
        self._same_ring(other)
        order = min(self.valid_order, other.valid_order)
        product: Dict[FormKey, TruncatedSeries] = {}
        for left_key, left in self.terms.items():
            for right_key, right in other.terms.items():
                sign = merge_sign(left_key, right_key)
                if not sign:
                    continue
                value = left * right
                if sign < 0:
                    value = -value
                key = left_key | right_key
                product[key] = product[key] + value if key in product else value
        return Form(self.ring, product, order)

    def __mul__(self, other: Union["Form", TruncatedSeries, Scalar]) -> "Form":
        if isinstance(other, Form):
            return self.wedge(other)
        if isinstance(other, TruncatedSeries):
            return self.times(other)
        return self.scale(other)

    def __rmul__(self, other: Scalar) -> "Form":
        return self.scale(other)

    def twist(self, parity: int) -> "Form":
        """Apply (-1)^(parity·|key|) termwise; the grading involution when parity is odd."""
        if not parity & 1:
            return self
        return Form(
            self.ring,
            {k: (-c if popcount(k) & 1 else c) for k, c in self.terms.items()},
            self.valid_order,
        )

    def power(self, exponent: int) -> "Form":
        result = Form.one(self.ring)
        for _ in range(exponent):
            result = result.wedge(self)
        return result

    # differentials ------------------------------------------------------------------

    def _differential(self, kind: str) -> "Form":
        ring = self.ring
        result: Dict[FormKey, TruncatedSeries] = {}
        for key, coefficient in self.terms.items():
            for index in range(1, ring.num_vars + 1):
                bit = generator_bit(ring, kind, index)
                sign = merge_sign(bit, key)
                if not sign:
                    continue
                derivative = coefficient.wirtinger(kind, index)
                if derivative.is_zero():
                    continue
                if sign < 0:
                    derivative = -derivative
                target = key | bit
                result[target] = result[target] + derivative if target in result else derivative
        return Form(ring, result, max(0, self.valid_order - 1))

    def dbar(self) -> "Form":
        return self._differential(ANTIHOLOMORPHIC)

    def partial(self) -> "Form":
        return self._differential(HOLOMORPHIC)

    def d(self) -> "Form":
        return self.partial() + self.dbar()

    # components ---------------------------------------------------------------------

    def filter_keys(self, keep: Callable[[FormKey], bool]) -> "Form":
        return Form(self.ring, {k: c for k, c in self.terms.items() if keep(k)}, self.valid_order)

    def bidegree_part(self, p: int, q: int) -> "Form":
        return self.filter_keys(lambda key: bidegree(self.ring, key) == (p, q))

    def parity_part(self, parity: int) -> "Form":
        return self.filter_keys(lambda key: popcount(key) % 2 == parity % 2)

    def degree_part(self, degree: int) -> "Form":
        return self.filter_keys(lambda key: popcount(key) == degree)

    def function_part(self) -> TruncatedSeries:
        return self.terms.get(0, TruncatedSeries.zero(self.ring, self.valid_order))

    def bidegrees(self) -> Tuple[Tuple[int, int], ...]:
        return tuple(sorted({bidegree(self.ring, k) for k in self.terms}))

    def parity(self) -> Optional[int]:
        """0 or 1 for homogeneous forms (zero counts as even), None when mixed."""
        parities = {popcount(k) % 2 for k in self.terms}
        if not parities:
            return 0
        return parities.pop() if len(parities) == 1 else None

    def map_coefficients(self, fn: Callable[[TruncatedSeries], TruncatedSeries]) -> "Form":
        return Form(self.ring, {k: fn(c) for k, c in self.terms.items()}, self.valid_order)

    def reduce_mod_ideal(self, ideal: IdealSpec) -> "Form":
        return self.map_coefficients(lambda c: c.reduce_mod_ideal(ideal))

    def truncate(self, order: int) -> "Form":
        return Form(self.ring, self.terms, min(order, self.valid_order))

    # comparison ---------------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def first_difference(
        self, other: "Form", order: Optional[int] = None
    ) -> Optional[Tuple[FormKey, Monomial, Fraction, Fraction]]:
        self._same_ring(other)
        limit = min(self.valid_order, other.valid_order) if order is None else order
        zero = TruncatedSeries.zero(self.ring)
        for key in sorted(set(self.terms) | set(other.terms), key=key_sort):
            found = self.terms.get(key, zero).first_difference(other.terms.get(key, zero), limit)
            if found is not None:
                monomial, lhs, rhs = found
                return key, monomial, lhs, rhs
        return None

    def agrees(self, other: "Form", order: Optional[int] = None) -> bool:
        return self.first_difference(other, order) is None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Form):
            return NotImplemented
        return self.ring == other.ring and self.valid_order == other.valid_order and self.terms == other.terms

    __hash__ = None

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        pieces = []
        for key in sorted(self.terms, key=key_sort):
            coefficient = self.terms[key]
            name = key_name(self.ring, key)
            text = str(coefficient)
            if not name:
                pieces.append(text)
            elif text == "1":
                pieces.append(name)
            elif text == "-1":
                pieces.append(f"-{name}")
            elif coefficient.term_count == 1:
                pieces.append(f"{text}*{name}")
            else:
                pieces.append(f"({text})*{name}")
        result = pieces[0]
        for piece in pieces[1:]:
            result += f" - {piece[1:]}" if piece.startswith("-") else f" + {piece}"
        return result

    def __repr__(self) -> str:
        return f"Form({self}, valid_order={self.valid_order})"


def wedge(a: Form, b: Form) -> Form:
    return a.wedge(b)


def dbar(a: Form) -> Form:
    return a.dbar()


def partial(a: Form) -> Form:
    return a.partial()


def bidegree_part(a: Form, p: int, q: int) -> Form:
    return a.bidegree_part(p, q)


def wedge_all(ring: RingSpec, factors: Iterable[Form]) -> Form:
    result = Form.one(ring)
    for factor in factors:
        result = result.wedge(factor)
    return result


def form_sum(ring: RingSpec, values: Iterable[Form]) -> Form:
    total = Form.zero(ring)
    for value in values:
        total = total + value
    return total
