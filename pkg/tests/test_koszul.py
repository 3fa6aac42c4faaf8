import pytest

from src.algebra.parser import parse_form, parse_series
from src.errors import HolomorphicityError
from src.algebra.forms import Form
from src.geometry.koszul import (
    KoszulData,
    KoszulPsi,
    closed_samples,
    fundamental_class_local,
    phi_p,
    psi,
    verify_bracket_facts,
    verify_chain_map_psi,
    verify_psi_extremes,
)


def koszul_data(scenario):
    return KoszulData.build(scenario.connection, list(scenario.tau), scenario.ideal)


@pytest.fixture(scope="module")
def data_a(example_a):
    return koszul_data(example_a)


@pytest.fixture(scope="module")
def data_rank2(rank2_holomorphic):
    return koszul_data(rank2_holomorphic)


class TestKoszulData:
    def test_rejects_real_analytic_section(self, example_b):
        with pytest.raises(HolomorphicityError):
            koszul_data(example_b)

    def test_bracket_facts(self, data_a):
        verdict = verify_bracket_facts(data_a)
        assert verdict.passed, verdict.witness

    def test_phi_signs_are_inverse(self, data_rank2):
        for p in range(3):
            phi = phi_p(data_rank2, p)
            for (source, complement), sign in phi.forward.items():
                assert phi.inverse[(complement, source)] == sign

    def test_phi_degree_out_of_range(self, data_a):
        with pytest.raises(ValueError):
            phi_p(data_a, 2)


class TestPsi:
    def test_ladder_on_example_a(self, data_a, example_a):
        maps = psi(data_a)
        z = parse_series("z1", example_a.ring)
        assert maps(1).dbar().agrees(maps(0).times(z), order=6)

    def test_chain_map(self, data_a):
        verdict = verify_chain_map_psi(data_a)
        assert verdict.passed, verdict.witness

    def test_extremes(self, data_a):
        assert verify_psi_extremes(data_a, psi(data_a)).passed

    def test_local_fundamental_class(self, data_a):
        verdict = fundamental_class_local(data_a)
        assert verdict.passed
        assert verdict.details == ["psi_r(e_top) mod I = dz1"]

    def test_rank2_top_component(self, data_rank2, rank2_holomorphic):
        maps = psi(data_rank2)
        expected = parse_form("dz1*dz2", rank2_holomorphic.ring)
        assert maps(data_rank2.bundle.top).agrees(expected, order=4)
        assert maps(0).is_zero()

    def test_rank2_chain_map_and_class(self, data_rank2):
        maps = psi(data_rank2)
        assert verify_chain_map_psi(data_rank2, maps).passed
        assert fundamental_class_local(data_rank2, maps).passed

    def test_corrupted_map_breaks_the_ladder(self, data_a, example_a):
        maps = psi(data_a)
        values = dict(maps.values)
        values[1] = maps(1) + parse_form("z1*w1*dz1", example_a.ring)
        corrupted = KoszulPsi(maps.bundle, maps.ring, values)
        verdict = verify_chain_map_psi(data_a, corrupted)
        assert not verdict.passed
        assert verdict.witness["check"] == "ladder[p=1]"


class TestUnitScaling:
    def test_rank1_psi_changes_but_not_its_class(self, example_a, data_a):
        ring = example_a.ring
        scaled = KoszulData.build(example_a.connection, [parse_series("z1*(1 + z1)", ring)], example_a.ideal)
        top = data_a.bundle.top
        before, after = psi(data_a)(top), psi(scaled)(top)
        assert not before.agrees(after)
        assert after.reduce_mod_ideal(example_a.ideal).agrees(before.reduce_mod_ideal(example_a.ideal))
        assert fundamental_class_local(scaled).passed

    def test_rank2_psi_changes_but_not_its_class(self, rank2_holomorphic, data_rank2):
        ring = rank2_holomorphic.ring
        tau = [parse_series("z1*(1 + z2)", ring), parse_series("z2*(1 - z1*z2)", ring)]
        scaled = KoszulData.build(rank2_holomorphic.connection, tau, rank2_holomorphic.ideal)
        top = data_rank2.bundle.top
        before, after = psi(data_rank2)(top), psi(scaled)(top)
        assert not before.agrees(after)
        ideal = rank2_holomorphic.ideal
        assert after.reduce_mod_ideal(ideal).agrees(before.reduce_mod_ideal(ideal))
        assert after.reduce_mod_ideal(ideal).agrees(parse_form("dz1*dz2", ring))


class TestClosedSamples:
    def test_samples_are_dbar_closed(self, data_a):
        samples = closed_samples(data_a)
        assert len(samples) >= 4
        for sample in samples:
            assert sample.dbar().agrees(Form.zero(data_a.ring))

    def test_exact_sample_is_a_mixed_form(self, data_a):
        exact = closed_samples(data_a)[2]
        assert exact.bidegrees() == ((1, 1),)
        assert exact.bidegree_part(1, 1) == exact
