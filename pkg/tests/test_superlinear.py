import pytest
from hypothesis import given, settings

from src.algebra.forms import Form
from src.algebra.parser import parse_form, parse_series
from src.algebra.ring import HOLOMORPHIC, RingSpec, TruncatedSeries
from src.algebra.superlinear import (
    BundleSpec,
    DualMultivector,
    EndMatrix,
    Multivector,
    contraction,
    derivation_images,
    exponential_terms,
    extend_derivation,
    gen_supertrace,
    inclusion_i,
    left_mult,
    solve_preimage,
    supercommutator,
    wedge_power_matrix,
)
from src.errors import BundleMismatch, Inconsistent

from .strategies import derivations, duals, end_matrices, multivectors

RING = RingSpec(1, 3)
E2 = BundleSpec(2)
E3 = BundleSpec(3)


def covector(bundle, ring, texts):
    return DualMultivector.covector(bundle, [parse_form(t, ring) for t in texts])


class TestMultivectors:
    def test_exterior_product_is_antisymmetric(self):
        e1 = Multivector.basis(E2, RING, E2.generator(1))
        e2 = Multivector.basis(E2, RING, E2.generator(2))
        assert e1.exterior_product(e2) == -e2.exterior_product(e1)
        assert e1.exterior_product(e1).is_zero()

    def test_forms_pass_generators_with_a_sign(self):
        dz = Form.generator(RING, HOLOMORPHIC, 1)
        e1 = Multivector.basis(E2, RING, E2.generator(1))
        dz_e2 = Multivector.basis(E2, RING, E2.generator(2), dz)
        assert e1.exterior_product(dz_e2) == Multivector.basis(E2, RING, E2.top, -dz)

    def test_mask_outside_rank(self):
        with pytest.raises(BundleMismatch):
            Multivector(E2, RING, {0b100: Form.one(RING)})

    def test_witness_names_the_basis_element(self):
        left = Multivector.basis(E2, RING, E2.top)
        witness = left.witness(Multivector.zero(E2, RING))
        assert witness["basis"] == "e1*e2"


class TestOperators:
    def test_contraction_squares_to_zero(self):
        tau = covector(E3, RING, ["z1", "1 + w1", "z1*w1"])
        iota = contraction(tau)
        assert iota.compose(iota).is_zero()
        assert iota.parity() == 1

    def test_contraction_on_top_element(self):
        tau = covector(E2, RING, ["z1", "w1"])
        image = contraction(tau).apply(Multivector.basis(E2, RING, E2.top))
        expected = Multivector(E2, RING, {E2.generator(2): parse_form("z1", RING), E2.generator(1): parse_form("-w1", RING)})
        assert image == expected

    def test_contraction_needs_degree_one(self):
        with pytest.raises(ValueError):
            contraction(DualMultivector.basis(E2, RING, E2.top))

    def test_derivation_images_round_trip(self):
        images = [
            Multivector.basis(E2, RING, E2.generator(2), parse_form("z1*dw1", RING)),
            Multivector.basis(E2, RING, 0, parse_form("w1", RING)),
        ]
        matrix = extend_derivation(images, parity=1)
        assert derivation_images(matrix) == images

    def test_grading_squares_to_identity(self):
        grading = EndMatrix.grading(E3, RING)
        assert grading.compose(grading) == EndMatrix.identity(E3, RING)

    def test_wedge_power_of_identity(self):
        one, zero = TruncatedSeries.one(RING), TruncatedSeries.zero(RING)
        matrix = wedge_power_matrix(E2, RING, [[one, zero], [zero, one]])
        assert matrix == EndMatrix.identity(E2, RING)

    def test_wedge_power_top_entry_is_determinant(self):
        s = lambda text: parse_series(text, RING)
        matrix = wedge_power_matrix(E2, RING, [[s("1"), s("z1")], [s("w1"), s("2")]])
        assert matrix.entries[(E2.top, E2.top)] == Form.scalar(s("2 - z1*w1"))

    def test_left_mult_by_generator(self):
        e1 = Multivector.basis(E2, RING, E2.generator(1))
        e2 = Multivector.basis(E2, RING, E2.generator(2))
        assert left_mult(e1).apply(e2) == e1.exterior_product(e2)

    def test_exponential_of_nilpotent(self):
        tau = covector(E2, RING, ["z1", "w1"])
        terms = exponential_terms(contraction(tau), 2)
        assert terms[0] == EndMatrix.identity(E2, RING)
        assert terms[2].is_zero()

    def test_solve_preimage_through_contraction(self):
        tau = covector(E2, RING, ["z1", "1"])
        basis = [Multivector.basis(E2, RING, E2.generator(j)) for j in (1, 2)]
        target = Multivector.basis(E2, RING, 0, parse_form("w1", RING))
        found = solve_preimage(contraction(tau), basis, target)
        assert found.valid_order == RING.truncation - 1
        assert contraction(tau).apply(found).agrees(target)

    def test_solve_preimage_outside_image(self):
        tau = covector(E2, RING, ["z1", "z1"])
        basis = [Multivector.basis(E2, RING, E2.generator(j)) for j in (1, 2)]
        target = Multivector.basis(E2, RING, 0, parse_form("w1", RING))
        with pytest.raises(Inconsistent):
            solve_preimage(contraction(tau), basis, target, label="probe")


class TestSupertrace:
    @given(a=end_matrices(E3, RING), b=end_matrices(E3, RING))
    @settings(max_examples=200, deadline=None)
    def test_supertrace_vanishes_on_supercommutators(self, a, b):
        assert supercommutator(a, b).supertrace().is_zero()

    @given(alpha=duals(E3, RING))
    @settings(max_examples=100, deadline=None)
    def test_generalized_trace_inverts_inclusion(self, alpha):
        assert gen_supertrace(inclusion_i(alpha)) == alpha

    @given(a=end_matrices(E3, RING))
    @settings(max_examples=100, deadline=None)
    def test_degree_zero_part_is_supertrace(self, a):
        assert gen_supertrace(a).coefficient(0) == a.supertrace()

    @given(delta=derivations(E2, RING, 1), phi=end_matrices(E2, RING))
    @settings(max_examples=50, deadline=None)
    def test_trace_commutes_with_odd_derivation(self, delta, phi):
        lhs = inclusion_i(gen_supertrace(supercommutator(delta, phi)))
        rhs = supercommutator(delta, inclusion_i(gen_supertrace(phi)))
        assert lhs == rhs

    @given(delta=derivations(E3, RING, 0), phi=end_matrices(E3, RING))
    @settings(max_examples=50, deadline=None)
    def test_trace_commutes_with_even_derivation(self, delta, phi):
        lhs = inclusion_i(gen_supertrace(supercommutator(delta, phi)))
        rhs = supercommutator(delta, inclusion_i(gen_supertrace(phi)))
        assert lhs == rhs

    def test_trace_of_contraction(self):
        rank1 = BundleSpec(1)
        tau1 = covector(rank1, RING, ["z1 + w1"])
        assert gen_supertrace(contraction(tau1)) == tau1
        tau2 = covector(E2, RING, ["z1", "w1"])
        assert gen_supertrace(contraction(tau2)).is_zero()

    @given(a=end_matrices(E2, RING), b=end_matrices(E2, RING), v=multivectors(E2, RING))
    @settings(max_examples=100, deadline=None)
    def test_compose_matches_apply(self, a, b, v):
        assert a.compose(b).apply(v) == a.apply(b.apply(v))

    @given(a=end_matrices(E2, RING, parity=1), x=multivectors(E2, RING))
    @settings(max_examples=60, deadline=None)
    def test_dbar_of_matrix_is_bracket_with_dbar(self, a, x):
        lhs = a.dbar().apply(x)
        rhs = a.apply(x).dbar() + a.apply(x.dbar())
        assert lhs.agrees(rhs, RING.truncation - 1)
