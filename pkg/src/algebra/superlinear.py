"""Super linear algebra of ⋀E with form coefficients.

An EndMatrix entry ``(T, S) -> ω`` stands for ω ⊗ E_{T,S}, where E_{T,S} sends e_S to e_T.
Its parity is |ω| + |T| + |S|, and products follow the Koszul rule

    (ω ⊗ E)(ω' ⊗ x) = (-1)^{|E||ω'|} ω∧ω' ⊗ E x.

Mixed-parity operators are sums of their even and odd parts; the supercommutator
distributes over that split.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from math import factorial
from typing import Callable, ClassVar, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from src.algebra.bitmasks import all_masks, indices, masks_of_degree, merge_sign, popcount
from src.algebra.forms import Form, key_name, key_sort
from src.algebra.ring import IdealSpec, RingSpec, Scalar, TruncatedSeries
from src.algebra.solver import LinearConstraint, solve_graded_linear
from src.errors import BundleMismatch, RingMismatch

logger = logging.getLogger(__name__)

Entry = Tuple[int, int]


@dataclass(frozen=True)
class BundleSpec:
    """Free module E of rank r with frame e_1..e_r and dual frame e^1..e^r."""

    rank: int

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError(f"rank must be >= 1, got {self.rank}")

    @property
    def top(self) -> int:
        return (1 << self.rank) - 1

    def masks(self, degree: Optional[int] = None) -> Tuple[int, ...]:
        if degree is None:
            return all_masks(self.rank)
        if not 0 <= degree <= self.rank:
            return ()
        return masks_of_degree(self.rank, degree)

    def generator(self, j: int) -> int:
        if not 1 <= j <= self.rank:
            raise ValueError(f"generator index {j} outside 1..{self.rank}")
        return 1 << (j - 1)

    def mask_name(self, mask: int, dual: bool = False) -> str:
        if not mask:
            return "1"
        prefix = "e^" if dual else "e"
        return "*".join(f"{prefix}{i}" for i in indices(mask))


def permutation_sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = list(perm)
    for i in range(len(seen)):
        for j in range(i + 1, len(seen)):
            if seen[i] > seen[j]:
                sign = -sign
    return sign


def leibniz_det(
    matrix: Sequence[Sequence[object]],
    multiply: Callable[[object, object], object],
    zero: object,
    one: object,
) -> object:
    """Determinant by the Leibniz expansion over a commutative coefficient algebra."""
    size = len(matrix)
    total = zero
    for perm in permutations(range(size)):
        product = one
        for row, column in enumerate(perm):
            product = multiply(product, matrix[row][column])
        total = total + product if permutation_sign(perm) > 0 else total - product
    return total


def _check_compatible(left, right) -> None:
    if left.bundle != right.bundle:
        raise BundleMismatch(f"rank {left.bundle.rank} vs rank {right.bundle.rank}")
    if left.ring != right.ring:
        raise RingMismatch(f"{left.ring} vs {right.ring}")


def _accumulate(target: Dict, key, value: Form) -> None:
    target[key] = target[key] + value if key in target else value


def _form_witness(ring: RingSpec, lhs: Form, rhs: Form, order: Optional[int]) -> Optional[Dict[str, str]]:
    found = lhs.first_difference(rhs, order)
    if found is None:
        return None
    key, monomial, left, right = found
    return {
        "form": key_name(ring, key) or "1",
        "monomial": ring.format_monomial(monomial) or "1",
        "lhs": str(left),
        "rhs": str(right),
    }


# multivectors -------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Multivector:
    """Form-valued element of ⋀E, normal ordered as ω ⊗ e_S."""

    bundle: BundleSpec
    ring: RingSpec
    terms: Mapping[int, Form]
    valid_order: Optional[int] = None

    dual: ClassVar[bool] = False

    def __post_init__(self):
        order = self.ring.truncation if self.valid_order is None else self.valid_order
        for mask, coefficient in self.terms.items():
            if mask & ~self.bundle.top:
                raise BundleMismatch(f"mask {mask:b} outside rank {self.bundle.rank}")
            order = min(order, coefficient.valid_order)
        order = max(0, order)
        cleaned = {m: c.truncate(order) for m, c in self.terms.items()}
        object.__setattr__(self, "valid_order", order)
        object.__setattr__(self, "terms", {m: c for m, c in cleaned.items() if not c.is_zero()})

    def _new(self, terms: Mapping[int, Form], order: Optional[int] = None):
        return type(self)(self.bundle, self.ring, terms, self.valid_order if order is None else order)

    @classmethod
    def zero(cls, bundle: BundleSpec, ring: RingSpec, order: Optional[int] = None):
        return cls(bundle, ring, {}, order)

    @classmethod
    def basis(cls, bundle: BundleSpec, ring: RingSpec, mask: int, coefficient: Optional[Form] = None):
        return cls(bundle, ring, {mask: coefficient if coefficient is not None else Form.one(ring)})

    @classmethod
    def covector(cls, bundle: BundleSpec, values: Sequence[Form]):
        """Degree-one element Σ_j values[j-1] ⊗ e_j (or e^j for the dual class)."""
        if len(values) != bundle.rank:
            raise BundleMismatch(f"{len(values)} components for rank {bundle.rank}")
        ring = values[0].ring
        return cls(bundle, ring, {bundle.generator(j + 1): v for j, v in enumerate(values)})

    # arithmetic ---------------------------------------------------------------------

    def __add__(self, other):
        _check_compatible(self, other)
        terms = dict(self.terms)
        for mask, coefficient in other.terms.items():
            _accumulate(terms, mask, coefficient)
        return self._new(terms, min(self.valid_order, other.valid_order))

    def __neg__(self):
        return self._new({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, factor: Scalar):
        return self._new({m: c.scale(factor) for m, c in self.terms.items()})

    def times_series(self, function: TruncatedSeries):
        return self._new(
            {m: c.times(function) for m, c in self.terms.items()}, min(self.valid_order, function.valid_order)
        )

    def wedge_form(self, form: Form):
        """Left multiplication ω ∧ (ω' ⊗ e_S) = ω∧ω' ⊗ e_S."""
        return self._new({m: form.wedge(c) for m, c in self.terms.items()}, min(self.valid_order, form.valid_order))

    def exterior_product(self, other):
        """(ω ⊗ e_S) ∧ (ω' ⊗ e_T) = (-1)^{|S||ω'|} ω∧ω' ⊗ e_S∧e_T."""
        _check_compatible(self, other)
        product: Dict[int, Form] = {}
        for left_mask, left in self.terms.items():
            for right_mask, right in other.terms.items():
                sign = merge_sign(left_mask, right_mask)
                if not sign:
                    continue
                value = left.wedge(right.twist(popcount(left_mask)))
                _accumulate(product, left_mask | right_mask, value if sign > 0 else -value)
        return self._new(product, min(self.valid_order, other.valid_order))

    def map_forms(self, fn: Callable[[Form], Form], order_drop: int = 0):
        return self._new({m: fn(c) for m, c in self.terms.items()}, max(0, self.valid_order - order_drop))

    def dbar(self):
        return self.map_forms(Form.dbar, 1)

    def partial(self):
        return self.map_forms(Form.partial, 1)

    def d(self):
        return self.map_forms(Form.d, 1)

    def reduce_mod_ideal(self, ideal: IdealSpec):
        return self.map_forms(lambda c: c.reduce_mod_ideal(ideal))

    def degree_part(self, degree: int):
        return self._new({m: c for m, c in self.terms.items() if popcount(m) == degree})

    def coefficient(self, mask: int) -> Form:
        return self.terms.get(mask, Form.zero(self.ring, self.valid_order))

    def component(self, j: int) -> Form:
        return self.coefficient(self.bundle.generator(j))

    # comparison ---------------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def witness(self, other, order: Optional[int] = None) -> Optional[Dict[str, str]]:
        _check_compatible(self, other)
        limit = min(self.valid_order, other.valid_order) if order is None else order
        zero = Form.zero(self.ring)
        for mask in sorted(set(self.terms) | set(other.terms), key=lambda m: (popcount(m), indices(m))):
            found = _form_witness(self.ring, self.terms.get(mask, zero), other.terms.get(mask, zero), limit)
            if found is not None:
                return {"basis": self.bundle.mask_name(mask, self.dual), **found}
        return None

    def agrees(self, other, order: Optional[int] = None) -> bool:
        return self.witness(other, order) is None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Multivector) or type(other) is not type(self):
            return NotImplemented
        return (
            self.bundle == other.bundle
            and self.ring == other.ring
            and self.valid_order == other.valid_order
            and self.terms == other.terms
        )

    __hash__ = None

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        pieces = []
        for mask in sorted(self.terms, key=lambda m: (popcount(m), indices(m))):
            name = self.bundle.mask_name(mask, self.dual)
            pieces.append(f"({self.terms[mask]})" + ("" if name == "1" else f"*{name}"))
        return " + ".join(pieces)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self}, valid_order={self.valid_order})"


class DualMultivector(Multivector):
    """Form-valued element of ⋀E^∨, paired with ⋀E by ⟨e^S, e_S⟩ = 1 for increasing S."""

    dual: ClassVar[bool] = True


# endomorphisms ------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EndMatrix:
    """Form-valued 2^r x 2^r matrix on the exterior basis."""

    bundle: BundleSpec
    ring: RingSpec
    entries: Mapping[Entry, Form]
    valid_order: Optional[int] = None

    def __post_init__(self):
        order = self.ring.truncation if self.valid_order is None else self.valid_order
        top = self.bundle.top
        for (target, source), value in self.entries.items():
            if (target | source) & ~top:
                raise BundleMismatch(f"entry ({target:b}, {source:b}) outside rank {self.bundle.rank}")
            if value.ring != self.ring:
                raise RingMismatch(f"{value.ring} vs {self.ring}")
            order = min(order, value.valid_order)
        order = max(0, order)
        cleaned = {k: v.truncate(order) for k, v in self.entries.items()}
        object.__setattr__(self, "valid_order", order)
        object.__setattr__(self, "entries", {k: v for k, v in cleaned.items() if not v.is_zero()})

    def _new(self, entries: Mapping[Entry, Form], order: Optional[int] = None) -> "EndMatrix":
        return EndMatrix(self.bundle, self.ring, entries, self.valid_order if order is None else order)

    # construction -------------------------------------------------------------------

    @classmethod
    def zero(cls, bundle: BundleSpec, ring: RingSpec, order: Optional[int] = None) -> "EndMatrix":
        return cls(bundle, ring, {}, order)

    @classmethod
    def identity(cls, bundle: BundleSpec, ring: RingSpec) -> "EndMatrix":
        return cls(bundle, ring, {(s, s): Form.one(ring) for s in bundle.masks()})

    @classmethod
    def grading(cls, bundle: BundleSpec, ring: RingSpec) -> "EndMatrix":
        """The grading involution ε = (-1)^{|S|} on e_S."""
        return cls(
            bundle, ring, {(s, s): Form.constant(ring, -1 if popcount(s) & 1 else 1) for s in bundle.masks()}
        )

    @classmethod
    def from_columns(cls, bundle: BundleSpec, ring: RingSpec, columns: Mapping[int, Multivector]) -> "EndMatrix":
        """Matrix whose column S is the image of e_S."""
        entries = {}
        order = ring.truncation
        for source, image in columns.items():
            order = min(order, image.valid_order)
            for target, value in image.terms.items():
                entries[(target, source)] = value
        return cls(bundle, ring, entries, order)

    # arithmetic ---------------------------------------------------------------------

    def __add__(self, other: "EndMatrix") -> "EndMatrix":
        _check_compatible(self, other)
        entries = dict(self.entries)
        for key, value in other.entries.items():
            _accumulate(entries, key, value)
        return self._new(entries, min(self.valid_order, other.valid_order))

    def __neg__(self) -> "EndMatrix":
        return self._new({k: -v for k, v in self.entries.items()})

    def __sub__(self, other: "EndMatrix") -> "EndMatrix":
        return self + (-other)

    def scale(self, factor: Scalar) -> "EndMatrix":
        return self._new({k: v.scale(factor) for k, v in self.entries.items()})

    def left_form(self, form: Form) -> "EndMatrix":
        """(ω ⊗ 1) ∘ M."""
        return self._new({k: form.wedge(v) for k, v in self.entries.items()}, min(self.valid_order, form.valid_order))

    def map_forms(self, fn: Callable[[Form], Form], order_drop: int = 0) -> "EndMatrix":
        return self._new({k: fn(v) for k, v in self.entries.items()}, max(0, self.valid_order - order_drop))

    def dbar(self) -> "EndMatrix":
        """Entrywise ∂̄, which equals the supercommutator [∂̄, M]."""
        return self.map_forms(Form.dbar, 1)

    def partial(self) -> "EndMatrix":
        return self.map_forms(Form.partial, 1)

    def d(self) -> "EndMatrix":
        return self.map_forms(Form.d, 1)

    def compose(self, other: "EndMatrix") -> "EndMatrix":
        _check_compatible(self, other)
        rows: Dict[int, List[Tuple[int, Form]]] = {}
        for (middle, source), value in other.entries.items():
            rows.setdefault(middle, []).append((source, value))
        product: Dict[Entry, Form] = {}
        for (target, middle), left in self.entries.items():
            shift = popcount(target) + popcount(middle)
            for source, right in rows.get(middle, ()):
                _accumulate(product, (target, source), left.wedge(right.twist(shift)))
        return self._new(product, min(self.valid_order, other.valid_order))

    __matmul__ = compose

    def power(self, exponent: int) -> "EndMatrix":
        result = EndMatrix.identity(self.bundle, self.ring)
        for _ in range(exponent):
            result = result.compose(self)
        return EndMatrix(self.bundle, self.ring, result.entries, self.valid_order)

    def apply(self, vector: Multivector) -> Multivector:
        if vector.bundle != self.bundle:
            raise BundleMismatch(f"rank {self.bundle.rank} vs rank {vector.bundle.rank}")
        if vector.ring != self.ring:
            raise RingMismatch(f"{self.ring} vs {vector.ring}")
        image: Dict[int, Form] = {}
        for (target, source), value in self.entries.items():
            coefficient = vector.terms.get(source)
            if coefficient is None:
                continue
            shift = popcount(target) + popcount(source)
            _accumulate(image, target, value.wedge(coefficient.twist(shift)))
        return type(vector)(self.bundle, self.ring, image, min(self.valid_order, vector.valid_order))

    def column(self, source: int) -> Multivector:
        return Multivector(
            self.bundle,
            self.ring,
            {t: v for (t, s), v in self.entries.items() if s == source},
            self.valid_order,
        )

    # gradings -----------------------------------------------------------------------

    def parity_part(self, parity: int) -> "EndMatrix":
        split = {}
        for (target, source), value in self.entries.items():
            shift = popcount(target) + popcount(source)
            split[(target, source)] = value.parity_part((parity + shift) % 2)
        return self._new(split)

    def parity(self) -> Optional[int]:
        even, odd = self.parity_part(0), self.parity_part(1)
        if odd.is_zero():
            return 0
        if even.is_zero():
            return 1
        return None

    def exterior_shift_part(self, shift: int) -> "EndMatrix":
        """Entries raising exterior degree by exactly ``shift``."""
        return self._new({(t, s): v for (t, s), v in self.entries.items() if popcount(t) - popcount(s) == shift})

    def source_degree_part(self, degree: int) -> "EndMatrix":
        """Restriction to ⋀^degree E."""
        return self._new({(t, s): v for (t, s), v in self.entries.items() if popcount(s) == degree})

    def bidegree_part(self, p: int, q: int) -> "EndMatrix":
        return self.map_forms(lambda v: v.bidegree_part(p, q))

    def reduce_mod_ideal(self, ideal: IdealSpec) -> "EndMatrix":
        return self.map_forms(lambda v: v.reduce_mod_ideal(ideal))

    # traces -------------------------------------------------------------------------

    def supertrace(self) -> Form:
        total = Form.zero(self.ring, self.valid_order)
        for (target, source), value in self.entries.items():
            if target == source:
                total = total - value if popcount(source) & 1 else total + value
        return total

    def gen_supertrace(self) -> DualMultivector:
        """Tr_Λ: component S is Σ_{T ∩ S = ∅} (-1)^{|T|} sign(S,T) M[T, S ∪ T].

        Degree-raising entries never contribute; the degree-zero component is tr_s.
        """
        components: Dict[int, Form] = {}
        for (target, source), value in self.entries.items():
            if target & ~source:
                continue
            mask = source & ~target
            sign = merge_sign(mask, target)
            if popcount(target) & 1:
                sign = -sign
            _accumulate(components, mask, value if sign > 0 else -value)
        return DualMultivector(self.bundle, self.ring, components, self.valid_order)

    # comparison ---------------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.entries

    def witness(self, other: "EndMatrix", order: Optional[int] = None) -> Optional[Dict[str, str]]:
        _check_compatible(self, other)
        limit = min(self.valid_order, other.valid_order) if order is None else order
        zero = Form.zero(self.ring)

        def entry_key(key: Entry):
            target, source = key
            return popcount(source), indices(source), popcount(target), indices(target)

        for key in sorted(set(self.entries) | set(other.entries), key=entry_key):
            found = _form_witness(self.ring, self.entries.get(key, zero), other.entries.get(key, zero), limit)
            if found is not None:
                target, source = key
                entry = f"{self.bundle.mask_name(target)} <- {self.bundle.mask_name(source)}"
                return {"entry": entry, **found}
        return None

    def agrees(self, other: "EndMatrix", order: Optional[int] = None) -> bool:
        return self.witness(other, order) is None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EndMatrix):
            return NotImplemented
        return (
            self.bundle == other.bundle
            and self.ring == other.ring
            and self.valid_order == other.valid_order
            and self.entries == other.entries
        )

    __hash__ = None

    def __repr__(self) -> str:
        shown = ", ".join(
            f"{self.bundle.mask_name(t)}<-{self.bundle.mask_name(s)}: {v}"
            for (t, s), v in sorted(self.entries.items(), key=lambda kv: (kv[0][1], kv[0][0]))
        )
        return f"EndMatrix(rank={self.bundle.rank}, {{{shown}}}, valid_order={self.valid_order})"


# operations ---------------------------------------------------------------------------


def apply(matrix: EndMatrix, vector: Multivector) -> Multivector:
    return matrix.apply(vector)


def compose(a: EndMatrix, b: EndMatrix) -> EndMatrix:
    return a.compose(b)


def supercommutator(a: EndMatrix, b: EndMatrix) -> EndMatrix:
    """[a, b]_s = ab - (-1)^{|a||b|} ba, bilinear over the parity split."""
    _check_compatible(a, b)
    result = EndMatrix.zero(a.bundle, a.ring, min(a.valid_order, b.valid_order))
    for pa in (0, 1):
        left = a.parity_part(pa)
        if left.is_zero():
            continue
        for pb in (0, 1):
            right = b.parity_part(pb)
            if right.is_zero():
                continue
            forward = left.compose(right)
            backward = right.compose(left)
            result = result + (forward + backward if pa & pb else forward - backward)
    return result


def supertrace(matrix: EndMatrix) -> Form:
    return matrix.supertrace()


def gen_supertrace(matrix: EndMatrix) -> DualMultivector:
    return matrix.gen_supertrace()


def inclusion_i(alpha: DualMultivector) -> EndMatrix:
    """i(α): e_S ↦ ⟨α, e_S⟩, landing in ⋀^0."""
    return EndMatrix(alpha.bundle, alpha.ring, {(0, s): v for s, v in alpha.terms.items()}, alpha.valid_order)


def contraction(covector: DualMultivector) -> EndMatrix:
    """ι_c as the derivation extension of e_j ↦ c_j; parity 1 + |c_j| per form component."""
    if any(popcount(mask) != 1 for mask in covector.terms):
        raise ValueError("contraction needs a covector of exterior degree 1")
    bundle = covector.bundle
    entries: Dict[Entry, Form] = {}
    for generator, value in covector.terms.items():
        for source in bundle.masks():
            if not source & generator:
                continue
            target = source & ~generator
            sign = merge_sign(generator, target)
            entries[(target, source)] = value if sign > 0 else -value
    return EndMatrix(bundle, covector.ring, entries, covector.valid_order)


def left_mult(eta: Multivector) -> EndMatrix:
    """l_η: x ↦ η ∧ x."""
    entries: Dict[Entry, Form] = {}
    for mask, value in eta.terms.items():
        for source in eta.bundle.masks():
            sign = merge_sign(mask, source)
            if sign:
                _accumulate(entries, (mask | source, source), value if sign > 0 else -value)
    return EndMatrix(eta.bundle, eta.ring, entries, eta.valid_order)


def extend_derivation(images: Sequence[Multivector], parity: int) -> EndMatrix:
    """Superderivation of the given parity with e_j ↦ images[j-1], trivial on coefficients.

    On e_{s_1}∧…∧e_{s_k} the m-th summand replaces e_{s_m} by its image, whose form part
    is moved to the front past m-1 generators.
    """
    if not images:
        raise ValueError("extend_derivation needs one image per generator")
    bundle, ring = images[0].bundle, images[0].ring
    if len(images) != bundle.rank:
        raise BundleMismatch(f"{len(images)} images for rank {bundle.rank}")
    order = min(image.valid_order for image in images)
    entries: Dict[Entry, Form] = {}
    for source in bundle.masks():
        members = indices(source)
        for position, j in enumerate(members):
            image = images[j - 1]
            prefix = source & ((1 << (j - 1)) - 1)
            suffix = source & ~((1 << j) - 1)
            for mask, value in image.terms.items():
                middle_sign = merge_sign(prefix, mask)
                if not middle_sign:
                    continue
                tail_sign = merge_sign(prefix | mask, suffix)
                if not tail_sign:
                    continue
                moved = value.twist(position)
                if (parity * position) & 1:
                    moved = -moved
                if middle_sign * tail_sign < 0:
                    moved = -moved
                _accumulate(entries, (prefix | mask | suffix, source), moved)
    return EndMatrix(bundle, ring, entries, order)


def derivation_images(matrix: EndMatrix) -> List[Multivector]:
    """Generator images e_j ↦ M e_j, the data a derivation is determined by."""
    return [matrix.column(matrix.bundle.generator(j)) for j in range(1, matrix.bundle.rank + 1)]


def wedge_power_matrix(
    bundle: BundleSpec, ring: RingSpec, matrix: Sequence[Sequence[TruncatedSeries]]
) -> EndMatrix:
    """⋀u for u(e_i) = Σ_j matrix[j][i] e_j: entry (T, S) is the minor det(u[T, S])."""
    entries: Dict[Entry, Form] = {}
    zero = TruncatedSeries.zero(ring)
    one = TruncatedSeries.one(ring)
    for degree in range(bundle.rank + 1):
        for source in bundle.masks(degree):
            columns = [i - 1 for i in indices(source)]
            for target in bundle.masks(degree):
                rows = [j - 1 for j in indices(target)]
                minor = [[matrix[r][c] for c in columns] for r in rows]
                value = leibniz_det(minor, lambda a, b: a * b, zero, one) if minor else one
                entries[(target, source)] = Form.scalar(value)
    return EndMatrix(bundle, ring, entries)


def solve_preimage(
    operator: EndMatrix,
    basis: Sequence[Multivector],
    target: Multivector,
    order: Optional[int] = None,
    label: str = "",
) -> Multivector:
    """Σ_b x_b · b with function coefficients x_b such that operator(Σ x_b b) = target.

    Raises:
        Inconsistent: target is not in the image at some degree <= order
    """
    ring = operator.ring
    order = min(operator.valid_order, target.valid_order) if order is None else order
    images = [operator.apply(b) for b in basis]
    unknowns = [f"x{i}" for i in range(len(basis))]
    slots = set()
    for image in list(images) + [target]:
        for mask, form in image.terms.items():
            for key in form.terms:
                slots.add((mask, key))
    constraints = []
    zero = TruncatedSeries.zero(ring)
    for mask, key in sorted(slots, key=lambda s: ((popcount(s[0]), indices(s[0])), key_sort(s[1]))):
        coefficients = {}
        for unknown, image in zip(unknowns, images):
            value = image.terms.get(mask)
            if value is not None and key in value.terms:
                coefficients[unknown] = value.terms[key]
        rhs = target.terms[mask].terms.get(key, zero) if mask in target.terms else zero
        name = f"{label}[{operator.bundle.mask_name(mask)}|{key_name(ring, key) or '1'}]"
        constraints.append(LinearConstraint(coefficients, rhs, name))
    logger.debug("preimage %s: %d unknowns, %d constraints", label, len(unknowns), len(constraints))
    solution = solve_graded_linear(ring, unknowns, constraints, order)
    result = type(target).zero(target.bundle, ring, order)
    for unknown, element in zip(unknowns, basis):
        result = result + element.times_series(solution[unknown])
    return result


def exponential_terms(matrix: EndMatrix, terms: int) -> List[EndMatrix]:
    """[M^k / k! for k = 0..terms]."""
    powers = [EndMatrix.identity(matrix.bundle, matrix.ring)]
    current = powers[0]
    for k in range(1, terms + 1):
        current = current.compose(matrix)
        powers.append(current.scale(Fraction(1, factorial(k))))
    return powers


def end_sum(bundle: BundleSpec, ring: RingSpec, values: Iterable[EndMatrix]) -> EndMatrix:
    total = EndMatrix.zero(bundle, ring)
    for value in values:
        total = total + value
    return total
