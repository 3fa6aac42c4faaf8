import pytest
from hypothesis import given, settings

from src.algebra.forms import Form, generator_bit
from src.algebra.parser import parse_form, parse_series
from src.algebra.ring import ANTIHOLOMORPHIC, HOLOMORPHIC, RingSpec, TruncatedSeries
from src.errors import DegreeOverflow, ParseError, ZeroConstantTerm

from .strategies import series

RING = RingSpec(2, 4)


class TestParseSeries:
    def test_rational_coefficients(self):
        value = parse_series("1/2*z1 - 3*w2^2", RING)
        assert str(value) == "1/2*z1 - 3*w2^2"

    def test_negative_exponent_inverts_unit(self, ring1):
        value = parse_series("(1 + z1*w1)^-1", ring1)
        unit = parse_series("1 + z1*w1", ring1)
        assert value * unit == TruncatedSeries.one(ring1)

    def test_negative_exponent_of_non_unit(self):
        with pytest.raises(ZeroConstantTerm):
            parse_series("z1^-1", RING)

    def test_literal_beyond_truncation(self):
        with pytest.raises(DegreeOverflow):
            parse_series("z1^3*w1^2", RING)

    def test_bad_character_offset(self):
        with pytest.raises(ParseError) as info:
            parse_series("z1 + $", RING)
        assert info.value.offset == 5

    def test_form_generator_rejected_in_function(self):
        with pytest.raises(ParseError):
            parse_series("z1*dz1", RING)

    def test_variable_outside_ring(self):
        with pytest.raises(ParseError):
            parse_series("z3", RING)

    def test_zero_denominator(self):
        with pytest.raises(ParseError):
            parse_series("1/0", RING)

    def test_unbalanced_parenthesis(self):
        with pytest.raises(ParseError):
            parse_series("(z1 + w1", RING)

    def test_field_path_is_attached(self):
        error = ParseError("boom", 3).with_field("section.tau[0]")
        assert error.field == "section.tau[0]"
        assert str(error).startswith("section.tau[0]:")

    @given(value=series(RING))
    @settings(max_examples=100)
    def test_printed_series_parses_back(self, value):
        assert parse_series(str(value), RING) == value


class TestParseForm:
    def test_connection_entry(self, ring1):
        gamma = parse_form("-w1*(1 + z1*w1)^-1*dz1", ring1)
        assert gamma.bidegrees() == ((1, 0),)
        coefficient = gamma.terms[generator_bit(ring1, HOLOMORPHIC, 1)]
        assert coefficient.agrees(-parse_series("w1 - z1*w1^2", ring1), order=3)

    def test_wedge_is_antisymmetric(self):
        forward = parse_form("dz1*dw1", RING)
        backward = parse_form("dw1*dz1", RING)
        assert forward == -backward

    def test_repeated_generator_vanishes(self):
        assert parse_form("dz1*dz1", RING).is_zero()

    def test_power_of_form_rejected(self):
        with pytest.raises(ParseError):
            parse_form("dz1^2", RING)

    def test_printed_form_parses_back(self):
        value = Form.generator(RING, HOLOMORPHIC, 1).wedge(Form.generator(RING, ANTIHOLOMORPHIC, 2)).times(
            parse_series("1 - 2*z1*w1", RING)
        ) + Form.constant(RING, 3)
        assert parse_form(str(value), RING) == value
