"""Hypothesis strategies for series, forms and operators at small sizes."""

from hypothesis import strategies as st

from src.algebra.bitmasks import popcount
from src.algebra.forms import Form
from src.algebra.ring import RingSpec, TruncatedSeries
from src.algebra.superlinear import BundleSpec, DualMultivector, EndMatrix, Multivector, extend_derivation

rationals = st.fractions(min_value=-4, max_value=4, max_denominator=3)
nonzero_rationals = rationals.filter(lambda value: value != 0)


@st.composite
def series(draw, ring: RingSpec, max_terms: int = 4) -> TruncatedSeries:
    chosen = draw(st.lists(st.sampled_from(ring.monomials()), max_size=max_terms, unique=True))
    coefficients = draw(st.lists(rationals, min_size=len(chosen), max_size=len(chosen)))
    return TruncatedSeries(ring, dict(zip(chosen, coefficients)))


@st.composite
def units(draw, ring: RingSpec, max_terms: int = 3) -> TruncatedSeries:
    tail = draw(series(ring, max_terms))
    constant = draw(nonzero_rationals)
    return tail - TruncatedSeries.constant(ring, tail.constant_term) + TruncatedSeries.constant(ring, constant)


@st.composite
def forms(draw, ring: RingSpec, max_terms: int = 3, parity=None) -> Form:
    keys = [k for k in range(1 << ring.width) if parity is None or popcount(k) % 2 == parity]
    chosen = draw(st.lists(st.sampled_from(keys), max_size=max_terms, unique=True))
    return Form(ring, {key: draw(series(ring, 2)) for key in chosen})


@st.composite
def homogeneous_forms(draw, ring: RingSpec, max_terms: int = 2) -> Form:
    """A form whose terms all have the same degree."""
    degree = draw(st.integers(min_value=0, max_value=ring.width))
    keys = [k for k in range(1 << ring.width) if popcount(k) == degree]
    chosen = draw(st.lists(st.sampled_from(keys), min_size=1, max_size=max_terms, unique=True))
    return Form(ring, {key: draw(series(ring, 2)) for key in chosen})


@st.composite
def end_matrices(draw, bundle: BundleSpec, ring: RingSpec, max_entries: int = 4, parity=None) -> EndMatrix:
    masks = bundle.masks()
    positions = draw(
        st.lists(st.tuples(st.sampled_from(masks), st.sampled_from(masks)), max_size=max_entries, unique=True)
    )
    entries = {}
    for target, source in positions:
        wanted = None if parity is None else (parity + popcount(target) + popcount(source)) % 2
        entries[(target, source)] = draw(forms(ring, 1, wanted))
    return EndMatrix(bundle, ring, entries)


@st.composite
def multivectors(draw, bundle: BundleSpec, ring: RingSpec, max_terms: int = 3) -> Multivector:
    chosen = draw(st.lists(st.sampled_from(bundle.masks()), max_size=max_terms, unique=True))
    return Multivector(bundle, ring, {mask: draw(forms(ring, 1)) for mask in chosen})


@st.composite
def duals(draw, bundle: BundleSpec, ring: RingSpec, max_terms: int = 3) -> DualMultivector:
    chosen = draw(st.lists(st.sampled_from(bundle.masks()), max_size=max_terms, unique=True))
    return DualMultivector(bundle, ring, {mask: draw(forms(ring, 1)) for mask in chosen})


@st.composite
def derivations(draw, bundle: BundleSpec, ring: RingSpec, parity: int) -> EndMatrix:
    """Superderivation of the given parity from random generator images."""
    images = []
    for _ in range(bundle.rank):
        chosen = draw(st.lists(st.sampled_from(bundle.masks()), max_size=2, unique=True))
        values = {mask: draw(forms(ring, 1, (1 + parity + popcount(mask)) % 2)) for mask in chosen}
        images.append(Multivector(bundle, ring, values))
    return extend_derivation(images, parity)
