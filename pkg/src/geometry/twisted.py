"""Twisted resolution of 𝒪_Z by a real-analytic section and its generalized-supertrace map.

Given τ ∈ 𝒜 ⊗ E^∨ whose contraction is onto the ideal of Z, the pipeline builds

    D̄ = ∂̄ - θ        with [D̄, ι_τ]_s = 0,
    δ = ι_τ + D̄ + a_2 + … + a_K   with δ² = 0,
    A = ∇ + δ,  ψ = R_A^r / r!,  X = i(Tr_Λ ψ),

and checks that X is a cochain map whose top component represents dz_1 ∧ … ∧ dz_r mod
the ideal. a_k (k ≥ 2) sends e_j into 𝒜^{0,k} ⊗ ⋀^k E and is extended as an odd
derivation acting trivially on coefficients.
"""

import logging
from dataclasses import dataclass, replace
from fractions import Fraction
from math import factorial
from typing import List, Optional, Sequence, Tuple

from src.algebra.bitmasks import masks_of_degree
from src.algebra.forms import Form, wedge_all
from src.algebra.ring import HOLOMORPHIC, IdealSpec, RingSpec, TruncatedSeries
from src.algebra.superlinear import (
    BundleSpec,
    DualMultivector,
    EndMatrix,
    Multivector,
    contraction,
    end_sum,
    exponential_terms,
    extend_derivation,
    gen_supertrace,
    inclusion_i,
    solve_preimage,
    wedge_power_matrix,
)
from src.geometry.connections import (
    Connection,
    FormMatrix,
    Superconnection,
    chern_character,
    covariant_derivative,
    dual_connection,
    exterior_extension,
    probe_series,
    supercurvature,
    verify_derivation_rule,
    verify_dual_pairing,
)
from src.geometry.koszul import (
    Certificate,
    KoszulData,
    covariant_section,
    psi as koszul_psi,
    section_covector,
    solve_ideal_certificate,
    verify_certificate,
)
from src.geometry.verdict import Verdict

logger = logging.getLogger(__name__)


def antiholomorphic_keys(ring: RingSpec, degree: int) -> Tuple[int, ...]:
    """Form keys dw_K with |K| = degree."""
    if not 0 <= degree <= ring.num_vars:
        return ()
    return tuple(mask << ring.num_vars for mask in masks_of_degree(ring.num_vars, degree))


def lift_basis(bundle: BundleSpec, ring: RingSpec, form_degree: int, exterior_degree: int) -> List[Multivector]:
    """dw_K ⊗ e_S with |K| = form_degree and |S| = exterior_degree."""
    return [
        Multivector.basis(bundle, ring, mask, Form.monomial(ring, key))
        for mask in bundle.masks(exterior_degree)
        for key in antiholomorphic_keys(ring, form_degree)
    ]


# the section -------------------------------------------------------------------------


@dataclass(frozen=True)
class RealSection:
    """τ with real-analytic components, plus the certificate z_i = Σ_j u_ji τ_j."""

    bundle: BundleSpec
    values: Tuple[TruncatedSeries, ...]
    ideal: IdealSpec
    certificate: Certificate

    @classmethod
    def build(
        cls,
        bundle: BundleSpec,
        values: Sequence[TruncatedSeries],
        ideal: IdealSpec,
        certificate: Optional[Certificate] = None,
    ) -> "RealSection":
        """
        Raises:
            Inconsistent: no certificate exists at the ring truncation
        """
        if certificate is None:
            certificate = solve_ideal_certificate(values, ideal)
        return cls(bundle, tuple(values), ideal, [list(row) for row in certificate])

    @property
    def ring(self) -> RingSpec:
        return self.values[0].ring

    @property
    def tau(self) -> DualMultivector:
        return section_covector(self.bundle, self.values)

    @property
    def is_holomorphic(self) -> bool:
        return not any(v.has_antiholomorphic() for v in self.values)


def verify_real_section(section: RealSection) -> Verdict:
    verdict = verify_certificate(section.values, section.ideal, section.certificate)
    verdict.name = "real_section"
    return verdict


# the (0,1)-connection ----------------------------------------------------------------


@dataclass(frozen=True)
class DbarConnection:
    """D̄ = ∂̄ - θ, stored as a (0,1) connection with matrix -θ."""

    connection: Connection
    theta: FormMatrix


@dataclass(frozen=True)
class DbarExtension:
    dual: Connection
    exterior: Superconnection
    square: EndMatrix


def build_dbar_connection(section: RealSection) -> DbarConnection:
    """Solve ι_τ(θ(e_j)) = ∂̄τ_j for θ(e_j) ∈ 𝒜^{0,1} ⊗ E.

    Raises:
        Inconsistent: ∂̄τ_j is not in the image of ι_τ
    """
    bundle, ring = section.bundle, section.ring
    iota_tau = contraction(section.tau)
    basis = lift_basis(bundle, ring, 1, 1)
    columns = []
    for j, value in enumerate(section.values):
        target = Multivector(bundle, ring, {0: Form.scalar(value).dbar()})
        image = solve_preimage(iota_tau, basis, target, label=f"theta(e{j + 1})")
        columns.append([image.component(i + 1) for i in range(bundle.rank)])
    theta = FormMatrix(ring, tuple(tuple(columns[j][i] for j in range(bundle.rank)) for i in range(bundle.rank)))
    logger.debug("theta = %s", theta)
    return DbarConnection(Connection(bundle, -theta, (0, 1)), theta)


def extend_dbar_dual_and_exterior(dbar: DbarConnection) -> DbarExtension:
    exterior = exterior_extension(dbar.connection)
    return DbarExtension(dual_connection(dbar.connection), exterior, exterior.square())


def verify_dbar_connection(section: RealSection, dbar: DbarConnection, extension: DbarExtension) -> Verdict:
    bundle, ring = section.bundle, section.ring
    tau = section.tau
    column = [tau.component(j + 1) for j in range(bundle.rank)]
    parallel = DualMultivector.covector(bundle, covariant_derivative(extension.dual, column))
    probe = Form.scalar(probe_series(ring, 3))
    if bundle.rank >= 2:
        left = Multivector.basis(bundle, ring, bundle.generator(1), probe)
        right = Multivector.basis(bundle, ring, bundle.generator(2))
    else:
        left = Multivector.basis(bundle, ring, 0, probe)
        right = Multivector.basis(bundle, ring, bundle.generator(1))
    parts = [
        Verdict.compare(
            "commutes_with_koszul",
            extension.exterior.bracket_matrix(contraction(tau)),
            EndMatrix.zero(bundle, ring),
        ),
        Verdict.compare("dual_annihilates_tau", parallel, DualMultivector.zero(bundle, ring)),
        verify_dual_pairing(dbar.connection),
        verify_derivation_rule(extension.exterior, left, right),
    ]
    details = [f"theta = {dbar.theta}", f"dbar square has {len(extension.square.entries)} nonzero entries"]
    return Verdict.combine("dbar_connection", parts, details)


# the twisting differential -----------------------------------------------------------


@dataclass(frozen=True)
class TwistData:
    """δ = Σ_k a_k over the base ∂̄; ``pieces[k]`` is the matrix part of a_k."""

    bundle: BundleSpec
    ring: RingSpec
    pieces: Tuple[EndMatrix, ...]

    @property
    def top(self) -> int:
        return len(self.pieces) - 1

    def delta(self) -> Superconnection:
        return Superconnection(self.bundle, self.ring, "dbar", end_sum(self.bundle, self.ring, self.pieces), "delta")

    def apply_piece(self, k: int, vector: Multivector) -> Multivector:
        """a_k(v); a_1 carries the base ∂̄."""
        if k == 1:
            return Superconnection(self.bundle, self.ring, "dbar", self.pieces[1], "a1").apply(vector)
        if k >= len(self.pieces):
            return Multivector.zero(self.bundle, self.ring)
        return self.pieces[k].apply(vector)

    def cocycle(self, m: int, square: Optional[EndMatrix] = None) -> EndMatrix:
        """Σ_{i=0}^{m} a_i a_{m-i}, the part of δ² shifting exterior degree by m - 2."""
        square = self.delta().square() if square is None else square
        return square.exterior_shift_part(m - 2)

    def with_piece(self, k: int, matrix: EndMatrix) -> "TwistData":
        pieces = list(self.pieces)
        pieces[k] = matrix
        return replace(self, pieces=tuple(pieces))


def build_twist(section: RealSection, dbar: DbarConnection) -> TwistData:
    """Inductively solve ι_τ(a_{k+1}(e_j)) = -Σ_{i=1}^{k} a_i a_{k+1-i}(e_j).

    Raises:
        Inconsistent: the obstruction of some a_k is not in the image of ι_τ
    """
    bundle, ring = section.bundle, section.ring
    iota_tau = contraction(section.tau)
    exterior = exterior_extension(dbar.connection)
    twist = TwistData(bundle, ring, (iota_tau, exterior.matrix))
    highest = min(ring.num_vars, bundle.rank)
    for k in range(1, highest):
        basis = lift_basis(bundle, ring, k + 1, k + 1)
        images = []
        for j in range(1, bundle.rank + 1):
            generator = Multivector.basis(bundle, ring, bundle.generator(j))
            obstruction = Multivector.zero(bundle, ring)
            for i in range(1, k + 1):
                obstruction = obstruction - twist.apply_piece(i, twist.apply_piece(k + 1 - i, generator))
            images.append(solve_preimage(iota_tau, basis, obstruction, label=f"a{k + 1}(e{j})"))
        piece = extend_derivation(images, parity=1)
        logger.debug("a_%d: %d entries, valid to order %d", k + 1, len(piece.entries), piece.valid_order)
        twist = TwistData(bundle, ring, twist.pieces + (piece,))
    return twist


def verify_twist_cocycle(twist: TwistData) -> List[Verdict]:
    square = twist.delta().square()
    zero = EndMatrix.zero(twist.bundle, twist.ring)
    return [
        Verdict.compare(f"twist_cocycle[m={m}]", twist.cocycle(m, square), zero)
        for m in range(2 * twist.top + 1)
    ]


# superconnection and trace -----------------------------------------------------------


@dataclass(frozen=True)
class TwistedSuperconnection:
    nabla: Superconnection
    delta: Superconnection
    curvature: EndMatrix


@dataclass(frozen=True)
class TraceData:
    psi: EndMatrix
    trace: DualMultivector
    chain_map: EndMatrix


def superconnection_A(twist: TwistData, connection: Connection) -> TwistedSuperconnection:
    """
    Raises:
        NotFlatHalves: ∇² ≠ 0 or δ² ≠ 0
    """
    nabla = exterior_extension(connection)
    delta = twist.delta()
    return TwistedSuperconnection(nabla, delta, supercurvature(nabla, delta))


def psi_and_trace(superconnection: TwistedSuperconnection) -> TraceData:
    curvature = superconnection.curvature
    rank = curvature.bundle.rank
    psi = curvature.power(rank).scale(Fraction(1, factorial(rank)))
    trace = gen_supertrace(psi)
    return TraceData(psi, trace, inclusion_i(trace))


def probe_elements(bundle: BundleSpec, ring: RingSpec, exterior_degrees: Sequence[int]) -> List[Multivector]:
    """probe · dw_K ⊗ e_S for every antiholomorphic degree and the given exterior degrees."""
    probe = probe_series(ring, 5)
    elements = []
    for degree in exterior_degrees:
        for form_degree in range(ring.num_vars + 1):
            for element in lift_basis(bundle, ring, form_degree, degree):
                elements.append(element.times_series(probe))
    return elements


def verify_cochain_trace(twist: TwistData, trace: TraceData) -> Verdict:
    """∂̄ ∘ X = X ∘ δ on every bigraded basis element, with [δ, ψ]_s = 0 behind it."""
    bundle, ring = twist.bundle, twist.ring
    delta = twist.delta()
    bracket = delta.bracket_matrix(trace.psi)
    parts = [
        Verdict.compare("delta_psi", bracket, EndMatrix.zero(bundle, ring)),
        Verdict.compare("trace_bracket", inclusion_i(gen_supertrace(bracket)), delta.bracket_matrix(trace.chain_map)),
    ]
    for element in probe_elements(bundle, ring, range(bundle.rank + 1)):
        lhs = trace.chain_map.apply(element).dbar()
        rhs = trace.chain_map.apply(delta.apply(element))
        mask = next(iter(element.terms))
        name = f"chain[{bundle.mask_name(mask)}|{element.terms[mask].bidegrees()}]"
        parts.append(Verdict.compare(name, lhs, rhs))
    return Verdict.combine("cochain_trace", parts)


def verify_psi_top(section: RealSection, connection: Connection, trace: TraceData) -> Verdict:
    """The exterior-degree -r part of ψ is (1/r!) ι_{∇τ}^r."""
    rank = section.bundle.rank
    nabla_tau = covariant_section(connection, section.tau)
    expected = exponential_terms(contraction(nabla_tau), rank)[rank]
    return Verdict.compare("psi_top", trace.psi.exterior_shift_part(-rank), expected)


def verify_trace_degree0(trace: TraceData) -> Verdict:
    return Verdict.compare("trace_degree0", trace.trace.coefficient(0), trace.psi.supertrace())


def verify_chern_top(superconnection: TwistedSuperconnection, trace: TraceData) -> Verdict:
    """The (r,r) part of tr_s(exp R_A) is tr_s(ψ)."""
    rank = superconnection.curvature.bundle.rank
    character = chern_character(superconnection.curvature)
    top = character.bidegree_part(rank, rank)
    return Verdict.compare("chern_top_part", top, trace.psi.supertrace(), details=[f"ch_r = {top}"])


# comparison with the holomorphic Koszul complex --------------------------------------


@dataclass(frozen=True)
class ComparisonData:
    """ũ = Σ_l ũ_l from K(ν), ν = Σ z_i f^i, into the twisted complex; ũ_0 = ⋀u."""

    bundle: BundleSpec
    ring: RingSpec
    nu: DualMultivector
    ideal: IdealSpec
    u: Certificate
    lifts: Tuple[EndMatrix, ...]

    @property
    def total(self) -> EndMatrix:
        return end_sum(self.bundle, self.ring, self.lifts)


def build_comparison(section: RealSection, twist: TwistData) -> ComparisonData:
    """Solve ι_τ(ũ_l f_S) = ũ_l(ι_ν f_S) - Σ_{i≥1} a_i ũ_{l-i}(f_S) in increasing |S|.

    Raises:
        Inconsistent: some lift does not exist at the ring truncation
    """
    bundle, ring = section.bundle, section.ring
    if len(section.ideal.vars) != bundle.rank:
        raise ValueError(f"comparison needs {bundle.rank} ideal generators, got {len(section.ideal.vars)}")
    nu = section_covector(bundle, [TruncatedSeries.variable(ring, HOLOMORPHIC, v) for v in section.ideal.vars])
    iota_nu = contraction(nu)
    iota_tau = contraction(section.tau)
    lifts = [wedge_power_matrix(bundle, ring, section.certificate)]
    for level in range(1, min(ring.num_vars, bundle.rank - 1) + 1):
        columns = {}
        for degree in range(1, bundle.rank - level + 1):
            current = EndMatrix.from_columns(bundle, ring, columns)
            basis = lift_basis(bundle, ring, level, degree + level)
            for source in bundle.masks(degree):
                generator = Multivector.basis(bundle, ring, source)
                target = current.apply(iota_nu.apply(generator))
                for i in range(1, level + 1):
                    target = target - twist.apply_piece(i, lifts[level - i].apply(generator))
                columns[source] = solve_preimage(
                    iota_tau, basis, target, label=f"lift{level}({bundle.mask_name(source)})"
                )
        lifts.append(EndMatrix.from_columns(bundle, ring, columns))
        logger.debug("comparison lift %d: %d entries", level, len(lifts[-1].entries))
    return ComparisonData(bundle, ring, nu, section.ideal, section.certificate, tuple(lifts))


def verify_comparison_chain(comparison: ComparisonData, twist: TwistData) -> Verdict:
    """δ ∘ ũ = ũ ∘ ι_ν on every basis element of K(ν)."""
    bundle, ring = comparison.bundle, comparison.ring
    delta = twist.delta()
    total = comparison.total
    iota_nu = contraction(comparison.nu)
    parts = []
    for source in bundle.masks():
        generator = Multivector.basis(bundle, ring, source)
        lhs = delta.apply(total.apply(generator))
        rhs = total.apply(iota_nu.apply(generator))
        parts.append(Verdict.compare(f"comparison[{bundle.mask_name(source)}]", lhs, rhs))
    return Verdict.combine("comparison_chain", parts)


def fundamental_class_local_twisted(comparison: ComparisonData, trace: TraceData) -> Verdict:
    """η_{-r}(f_1∧…∧f_r) = X(ũ(f_top)) ≡ dz_1∧…∧dz_r mod the ideal, using ũ_0 alone as well."""
    bundle, ring = comparison.bundle, comparison.ring
    top = Multivector.basis(bundle, ring, bundle.top)
    eta = trace.chain_map.apply(comparison.total.apply(top)).coefficient(0)
    eta_leading = trace.chain_map.apply(comparison.lifts[0].apply(top)).coefficient(0)
    expected = wedge_all(ring, (Form.generator(ring, HOLOMORPHIC, v) for v in comparison.ideal.vars))
    reduced = eta.reduce_mod_ideal(comparison.ideal)
    parts = [
        Verdict.compare("eta_top", reduced, expected.reduce_mod_ideal(comparison.ideal)),
        Verdict.compare("eta_independent", eta, eta_leading),
    ]
    return Verdict.combine("fundamental_class_twisted", parts, [f"eta_-r(f_top) mod I = {reduced}"])


# augmentation -------------------------------------------------------------------------


def augmentation(vector: Multivector, ideal: IdealSpec) -> Form:
    """ε: project to ⋀^0 and reduce mod the ideal."""
    return vector.coefficient(0).reduce_mod_ideal(ideal)


def verify_augmentation(twist: TwistData, ideal: IdealSpec) -> Verdict:
    """ε ∘ δ = ∂̄ ∘ ε on probes of exterior degree 0 and 1."""
    delta = twist.delta()
    parts = []
    for k, element in enumerate(probe_elements(twist.bundle, twist.ring, (0, 1))):
        lhs = augmentation(delta.apply(element), ideal)
        rhs = augmentation(element, ideal).dbar()
        parts.append(Verdict.compare(f"augmentation[{k}]", lhs, rhs))
    return Verdict.combine("augmentation", parts)


def verify_holomorphic_consistency(section: RealSection, connection: Connection, trace: TraceData) -> Verdict:
    """For holomorphic τ, X agrees entrywise with the Koszul map ψ."""
    data = KoszulData.build(connection, section.values, section.ideal)
    return Verdict.compare("holomorphic_consistency", trace.chain_map, koszul_psi(data).as_matrix())
