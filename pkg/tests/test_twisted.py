import pytest

from src.algebra.forms import Form
from src.algebra.parser import parse_form, parse_series
from src.algebra.ring import ANTIHOLOMORPHIC
from src.algebra.superlinear import Multivector, extend_derivation
from src.geometry.twisted import (
    RealSection,
    antiholomorphic_keys,
    build_dbar_connection,
    build_twist,
    extend_dbar_dual_and_exterior,
    psi_and_trace,
    superconnection_A,
    verify_augmentation,
    verify_dbar_connection,
    verify_real_section,
    verify_trace_degree0,
    verify_twist_cocycle,
)
from src.verification.catalog import SCENARIO_DIR
from src.verification.runner import run_twisted
from src.verification.scenario import load_scenario


def section_of(scenario):
    return RealSection.build(scenario.bundle, scenario.tau, scenario.ideal, scenario.certificate)


@pytest.fixture(scope="module")
def section_b(example_b):
    return section_of(example_b)


@pytest.fixture(scope="module")
def twist_b(section_b):
    return build_twist(section_b, build_dbar_connection(section_b))


@pytest.fixture(scope="module")
def example_c_small():
    return load_scenario(SCENARIO_DIR / "example_c.json", truncation=6)


@pytest.fixture(scope="module")
def twist_c_small(example_c_small):
    section = section_of(example_c_small)
    return build_twist(section, build_dbar_connection(section))


class TestRealSection:
    def test_certificate_inverts_the_unit(self, section_b, example_b):
        expected = parse_series("(1 + z1*w1)^-1", example_b.ring)
        assert section_b.certificate[0][0].agrees(expected, order=example_b.ring.truncation - 1)
        assert verify_real_section(section_b).passed
        assert not section_b.is_holomorphic

    def test_antiholomorphic_keys(self, example_c):
        assert len(antiholomorphic_keys(example_c.ring, 1)) == 2
        assert len(antiholomorphic_keys(example_c.ring, 2)) == 1
        assert antiholomorphic_keys(example_c.ring, 3) == ()


class TestDbarConnection:
    def test_theta_of_example_b(self, section_b, example_b):
        ring = example_b.ring
        dbar = build_dbar_connection(section_b)
        expected = parse_form("-z1*(1 + z1*w1)^-1*dw1", ring)
        assert dbar.theta[0, 0].valid_order == ring.truncation - 2
        assert dbar.theta[0, 0].agrees(expected)

    def test_dbar_connection_checks(self, section_b):
        dbar = build_dbar_connection(section_b)
        verdict = verify_dbar_connection(section_b, dbar, extend_dbar_dual_and_exterior(dbar))
        assert verdict.passed, verdict.witness


class TestTwist:
    def test_rank1_has_no_higher_pieces(self, twist_b):
        assert twist_b.top == 1

    def test_cocycles_of_example_b(self, twist_b):
        verdicts = verify_twist_cocycle(twist_b)
        assert [v.name for v in verdicts] == ["twist_cocycle[m=0]", "twist_cocycle[m=1]", "twist_cocycle[m=2]"]
        assert all(v.passed for v in verdicts)

    def test_augmentation(self, twist_b, example_b):
        assert verify_augmentation(twist_b, example_b.ideal).passed

    def test_trace_degree0(self, twist_b, example_b):
        trace = psi_and_trace(superconnection_A(twist_b, example_b.connection))
        assert verify_trace_degree0(trace).passed


class TestPipeline:
    def test_example_b(self, example_b):
        group, verdicts = run_twisted(example_b)
        assert group == "twisted"
        failed = [(v.name, v.witness) for v in verdicts if not v.passed]
        assert not failed
        assert "fundamental_class_twisted" in [v.name for v in verdicts]

    def test_example_a_matches_the_koszul_map(self, example_a):
        _, verdicts = run_twisted(example_a)
        by_name = {v.name: v for v in verdicts}
        assert by_name["holomorphic_consistency"].passed
        assert all(v.passed for v in verdicts)

    def test_non_flat_connection_stops_the_group(self, negative_flatness):
        _, verdicts = run_twisted(negative_flatness)
        assert [v.name for v in verdicts] == ["check_flat"]
        assert not verdicts[0].passed

    @pytest.mark.slow
    def test_example_c(self, example_c):
        _, verdicts = run_twisted(example_c)
        assert all(v.passed for v in verdicts), [v.name for v in verdicts if not v.passed]
        assert "fundamental_class_twisted" in [v.name for v in verdicts]
        shallow = [(v.name, v.verified_order) for v in verdicts if v.verified_order < 4]
        assert not shallow


def a1_corruptions(ring, bundle):
    dw1 = Form.generator(ring, ANTIHOLOMORPHIC, 1)
    dw2 = Form.generator(ring, ANTIHOLOMORPHIC, 2)
    shapes = [
        (1, 1, dw1),
        (1, 2, dw2),
        (2, 1, dw1.times(parse_series("1 + z1", ring))),
        (2, 2, dw2.times(parse_series("1 + w1", ring))),
        (1, 2, dw1.times(parse_series("2 - z2", ring))),
    ]
    for source, target, form in shapes:
        images = [Multivector.zero(bundle, ring) for _ in range(bundle.rank)]
        images[source - 1] = Multivector.basis(bundle, ring, bundle.generator(target), form)
        yield extend_derivation(images, parity=1)


def a2_corruptions(ring, bundle):
    top = parse_form("dw1*dw2", ring)
    for source, factor in ((1, "1"), (2, "1 + z1"), (1, "3 + w1"), (2, "-1 + z2"), (1, "2 - w2")):
        images = [Multivector.zero(bundle, ring) for _ in range(bundle.rank)]
        images[source - 1] = Multivector.basis(bundle, ring, bundle.top, top.times(parse_series(factor, ring)))
        yield extend_derivation(images, parity=1)


class TestNegativeControls:
    def test_example_c_twist_is_sound(self, twist_c_small):
        assert all(v.passed for v in verify_twist_cocycle(twist_c_small))

    @pytest.mark.parametrize("index", range(5))
    def test_corrupted_a1_is_detected(self, twist_c_small, example_c_small, index):
        noise = list(a1_corruptions(example_c_small.ring, example_c_small.bundle))[index]
        corrupted = twist_c_small.with_piece(1, twist_c_small.pieces[1] + noise)
        verdicts = verify_twist_cocycle(corrupted)
        assert not all(v.passed for v in verdicts)
        failing = next(v for v in verdicts if not v.passed)
        assert failing.witness

    @pytest.mark.parametrize("index", range(5))
    def test_corrupted_a2_is_detected(self, twist_c_small, example_c_small, index):
        noise = list(a2_corruptions(example_c_small.ring, example_c_small.bundle))[index]
        corrupted = twist_c_small.with_piece(2, twist_c_small.pieces[2] + noise)
        verdicts = verify_twist_cocycle(corrupted)
        by_name = {v.name: v for v in verdicts}
        assert not by_name["twist_cocycle[m=2]"].passed
