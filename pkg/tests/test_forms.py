from hypothesis import given, settings

from src.algebra.forms import Form, key_name, key_sort
from src.algebra.parser import parse_form
from src.algebra.ring import ANTIHOLOMORPHIC, HOLOMORPHIC, IdealSpec, RingSpec

from .strategies import forms, homogeneous_forms

RING = RingSpec(2, 8)
SMALL = RingSpec(2, 4)


def f(text, ring=RING):
    return parse_form(text, ring)


class TestDolbeaultModel:
    def test_dbar_of_function(self):
        assert f("z1*w1^2").dbar() == f("2*z1*w1*dw1").truncate(7)

    def test_partial_puts_generator_on_the_left(self):
        assert f("z1*dw1").partial() == f("dz1*dw1").truncate(7)

    def test_bidegree_split(self):
        value = f("dz1 + w1*dw2 + dz1*dw1")
        assert value.bidegree_part(1, 0) == f("dz1")
        assert value.bidegrees() == ((0, 1), (1, 0), (1, 1))

    def test_canonical_generator_order(self):
        value = f("dw1*dz1")
        assert str(value) == "-dz1*dw1"
        assert key_name(RING, next(iter(value.terms))) == "dz1*dw1"

    def test_twist_is_grading_involution(self):
        value = f("1 + dz1 + dz1*dw2")
        assert value.twist(1) == f("1 - dz1 + dz1*dw2")
        assert value.twist(2) == value

    def test_reduce_mod_ideal_keeps_generators(self):
        value = f("z1*dz1 + w1*dz2")
        assert value.reduce_mod_ideal(IdealSpec((1,))) == f("w1*dz2")

    @given(a=forms(RING))
    @settings(max_examples=100)
    def test_differentials_square_to_zero(self, a):
        order = RING.truncation - 2
        assert a.d().d().agrees(Form.zero(RING), order)
        assert a.dbar().dbar().agrees(Form.zero(RING), order)
        assert a.partial().partial().agrees(Form.zero(RING), order)
        assert (a.partial().dbar() + a.dbar().partial()).agrees(Form.zero(RING), order)

    @given(a=homogeneous_forms(RING), b=forms(RING))
    @settings(max_examples=100)
    def test_leibniz(self, a, b):
        sign = -1 if a.parity() else 1
        lhs = a.wedge(b).d()
        rhs = a.d().wedge(b) + a.wedge(b.d()).scale(sign)
        assert lhs.agrees(rhs, RING.truncation - 2)

    @given(a=homogeneous_forms(SMALL), b=homogeneous_forms(SMALL))
    @settings(max_examples=100)
    def test_graded_commutativity(self, a, b):
        sign = -1 if a.parity() and b.parity() else 1
        assert a.wedge(b) == b.wedge(a).scale(sign)

    @given(a=forms(SMALL), b=forms(SMALL), c=forms(SMALL))
    @settings(max_examples=60)
    def test_wedge_associative(self, a, b, c):
        assert a.wedge(b).wedge(c) == a.wedge(b.wedge(c))

    def test_generators(self):
        dz = Form.generator(RING, HOLOMORPHIC, 2)
        dw = Form.generator(RING, ANTIHOLOMORPHIC, 2)
        assert dz.wedge(dw) == -dw.wedge(dz)
        assert dz.wedge(dz).is_zero()


class TestKeyOrder:
    def test_degree_first_then_generator_indices(self):
        dz1, dz2, dw1 = 0b0001, 0b0010, 0b0100
        keys = [dz1 | dz2, dw1, 0, dz1 | dw1, dz1]
        assert sorted(keys, key=key_sort) == [0, dz1, dw1, dz1 | dz2, dz1 | dw1]
