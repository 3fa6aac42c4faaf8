import pytest

from src.algebra.parser import parse_series
from src.algebra.ring import IdealSpec, RingSpec, TruncatedSeries
from src.algebra.solver import LinearConstraint, degree_shifts, residuals, solve_graded_linear
from src.errors import Inconsistent
from src.geometry.koszul import solve_ideal_certificate, verify_ideal_surjectivity

RING = RingSpec(2, 5)


def s(text, ring=RING):
    return parse_series(text, ring)


class TestSolveGradedLinear:
    def test_divides_by_a_variable(self):
        constraint = LinearConstraint({"x": s("z1")}, s("z1 + z1*w1"), "eq")
        solution = solve_graded_linear(RING, ["x"], [constraint])
        assert solution["x"].valid_order == RING.truncation - 1
        assert solution["x"].agrees(s("1 + w1"))

    def test_two_unknowns_share_a_constraint(self):
        constraints = [
            LinearConstraint({"x": s("z1"), "y": s("z2")}, s("z1*w2 + z2^2"), "sum"),
            LinearConstraint({"y": s("1")}, s("z2"), "fix_y"),
        ]
        solution = solve_graded_linear(RING, ["x", "y"], constraints)
        assert solution["y"].agrees(s("z2"))
        assert solution["x"].agrees(s("w2"))
        assert {u: found.valid_order for u, found in solution.items()} == {"x": 4, "y": 4}
        assert all(found is None for _, found in residuals(solution, constraints, RING.truncation))

    def test_unit_multiple_of_a_variable_loses_one_order(self):
        ring = RingSpec(1, 8)
        unit = s("z1*(1 + z1*w1)", ring)
        solution = solve_graded_linear(ring, ["x"], [LinearConstraint({"x": unit}, s("z1", ring), "divide")])
        assert solution["x"].valid_order == 7
        assert solution["x"].agrees(s("(1 + z1*w1)^-1", ring))

    def test_quotient_of_a_real_analytic_multiple(self):
        ring = RingSpec(1, 8)
        constraint = LinearConstraint({"x": s("z1*(1 + z1*w1)", ring)}, s("z1^2*w1", ring), "divide")
        solution = solve_graded_linear(ring, ["x"], [constraint])
        assert solution["x"].valid_order == 7
        assert solution["x"].agrees(s("z1*w1*(1 + z1*w1)^-1", ring))
        assert residuals(solution, [constraint], 7) == [("divide", None)]

    def test_inconsistent_reports_degree_and_label(self):
        constraint = LinearConstraint({"x": s("z1")}, s("1"), "unit")
        with pytest.raises(Inconsistent) as info:
            solve_graded_linear(RING, ["x"], [constraint])
        assert info.value.degree == 0
        assert info.value.label == "unit"
        assert info.value.witness()["monomial"] == "1"

    def test_obstruction_located_at_higher_degree(self):
        constraint = LinearConstraint({"x": s("z1^2")}, s("z1^2 + z2^3"), "cubic")
        with pytest.raises(Inconsistent) as info:
            solve_graded_linear(RING, ["x"], [constraint])
        assert info.value.degree == 3
        assert info.value.monomial == "z2^3"

    def test_undeclared_unknown(self):
        constraint = LinearConstraint({"y": s("1")}, s("1"))
        with pytest.raises(KeyError):
            solve_graded_linear(RING, ["x"], [constraint])

    def test_solution_is_deterministic(self):
        constraint = LinearConstraint({"x": s("z1"), "y": s("z1")}, s("z1*w1"), "tie")
        first = solve_graded_linear(RING, ["x", "y"], [constraint])
        second = solve_graded_linear(RING, ["x", "y"], [constraint])
        assert first == second


class TestIdealCertificate:
    def test_real_analytic_generator(self):
        ring = RingSpec(1, 6)
        tau = [s("z1*(1 + z1*w1)", ring)]
        certificate = solve_ideal_certificate(tau, IdealSpec((1,)))
        expected = s("(1 + z1*w1)^-1", ring)
        assert certificate[0][0].agrees(expected, order=ring.truncation - 1)

    def test_missing_generator_fails_with_witness(self):
        ring = RingSpec(2, 4)
        verdict, certificate = verify_ideal_surjectivity([s("z1", ring), s("z1^2", ring)], IdealSpec((1, 2)))
        assert certificate is None
        assert not verdict.passed
        assert verdict.witness["constraint"] == "z2"

    def test_supplied_certificate_is_checked(self):
        ring = RingSpec(2, 4)
        tau = [s("z1", ring), s("z2", ring)]
        one, zero = TruncatedSeries.one(ring), TruncatedSeries.zero(ring)
        verdict, _ = verify_ideal_surjectivity(tau, IdealSpec((1, 2)), [[one, zero], [zero, one]])
        assert verdict.passed
        wrong, _ = verify_ideal_surjectivity(tau, IdealSpec((1, 2)), [[zero, one], [one, zero]])
        assert not wrong.passed
        assert wrong.witness["check"] == "generates[z1]"


class TestDegreeShifts:
    def test_lowest_degree_per_unknown(self):
        constraints = [
            LinearConstraint({"x": s("z1^2 + z1^3"), "y": s("z2")}, s("0")),
            LinearConstraint({"x": s("z1*w1"), "y": s("1 + z2")}, s("0")),
        ]
        assert degree_shifts(constraints, RING.truncation) == {"x": 2, "y": 0}

    def test_terms_above_the_order_are_ignored(self):
        constraint = LinearConstraint({"x": s("z1^3")}, s("0"))
        assert degree_shifts([constraint], 2) == {}
