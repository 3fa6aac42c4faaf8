"""Seeded random elements for the sampled identity checks.

Every generator takes a ``random.Random`` so a scenario seed fixes the whole sample.
"""

import random
from fractions import Fraction
from typing import List, Optional

from src.algebra.bitmasks import popcount
from src.algebra.forms import Form
from src.algebra.ring import RingSpec, TruncatedSeries
from src.algebra.superlinear import BundleSpec, DualMultivector, EndMatrix, Multivector, extend_derivation

COEFFICIENTS = (Fraction(-2), Fraction(-1), Fraction(1, 2), Fraction(1), Fraction(2), Fraction(3))


def random_series(rng: random.Random, ring: RingSpec, terms: int = 3) -> TruncatedSeries:
    monomials = ring.monomials()
    chosen = rng.sample(monomials, min(terms, len(monomials)))
    return TruncatedSeries(ring, {m: rng.choice(COEFFICIENTS) for m in chosen})


def random_form(rng: random.Random, ring: RingSpec, parity: Optional[int] = None, terms: int = 2) -> Form:
    """Sum of ``terms`` random monomial forms, optionally of one parity."""
    keys = [k for k in range(1 << ring.width) if parity is None or popcount(k) % 2 == parity]
    total = Form.zero(ring)
    for key in rng.sample(keys, min(terms, len(keys))):
        total = total + Form.monomial(ring, key, random_series(rng, ring))
    return total


def random_end_matrix(
    rng: random.Random,
    bundle: BundleSpec,
    ring: RingSpec,
    parity: Optional[int] = None,
    entries: int = 4,
) -> EndMatrix:
    """Sparse random operator; with ``parity`` set every entry has that total parity."""
    masks = bundle.masks()
    values = {}
    for _ in range(entries):
        target, source = rng.choice(masks), rng.choice(masks)
        wanted = None if parity is None else (parity + popcount(target) + popcount(source)) % 2
        values[(target, source)] = random_form(rng, ring, wanted, terms=1)
    return EndMatrix(bundle, ring, values)


def random_dual(rng: random.Random, bundle: BundleSpec, ring: RingSpec, terms: int = 3) -> DualMultivector:
    chosen = rng.sample(bundle.masks(), min(terms, bundle.top + 1))
    return DualMultivector(bundle, ring, {mask: random_form(rng, ring, terms=1) for mask in chosen})


def random_derivation_images(
    rng: random.Random, bundle: BundleSpec, ring: RingSpec, parity: int, terms: int = 2
) -> List[Multivector]:
    """Generator images for a superderivation of the given parity; each image has parity 1 + parity."""
    images = []
    for _ in range(bundle.rank):
        values = {}
        for mask in rng.sample(bundle.masks(), min(terms, bundle.top + 1)):
            values[mask] = random_form(rng, ring, (1 + parity + popcount(mask)) % 2, terms=1)
        images.append(Multivector(bundle, ring, values))
    return images


def random_derivation(rng: random.Random, bundle: BundleSpec, ring: RingSpec, parity: int) -> EndMatrix:
    return extend_derivation(random_derivation_images(rng, bundle, ring, parity), parity)


def random_multivector(rng: random.Random, bundle: BundleSpec, ring: RingSpec, terms: int = 3) -> Multivector:
    chosen = rng.sample(bundle.masks(), min(terms, bundle.top + 1))
    return Multivector(bundle, ring, {mask: random_form(rng, ring, terms=1) for mask in chosen})
