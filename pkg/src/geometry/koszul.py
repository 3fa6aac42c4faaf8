"""Koszul complex of a holomorphic section and its map ψ to the Dolbeault complex.

For τ ∈ E^∨ with holomorphic components, ψ_p : ⋀^pE → 𝒜^{r,r-p} is

    ψ_p = (1/p!) ι_{∇τ}^p ∘ φ_p^{-1} ∘ ⋀^{r-p}R ∘ φ_p,

and ∂̄ ∘ ψ_p = ψ_{p-1} ∘ ι_τ makes ψ a chain map whose top component represents the
fundamental class of Z = {τ = 0}.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from src.algebra.bitmasks import indices, merge_sign
from src.algebra.forms import Form, wedge_all
from src.algebra.ring import ANTIHOLOMORPHIC, HOLOMORPHIC, IdealSpec, RingSpec, TruncatedSeries
from src.algebra.solver import LinearConstraint, solve_graded_linear
from src.algebra.superlinear import (
    BundleSpec,
    DualMultivector,
    EndMatrix,
    Multivector,
    contraction,
    exponential_terms,
    supercommutator,
)
from src.errors import HolomorphicityError, Inconsistent
from src.geometry.connections import (
    Connection,
    FormMatrix,
    chern_form_top,
    covariant_derivative,
    curvature_R,
    dual_connection,
    exterior_extension,
)
from src.geometry.verdict import Verdict

logger = logging.getLogger(__name__)

Certificate = List[List[TruncatedSeries]]


# sections and the ideal ---------------------------------------------------------------


def section_covector(bundle: BundleSpec, values: Sequence[TruncatedSeries]) -> DualMultivector:
    return DualMultivector.covector(bundle, [Form.scalar(v) for v in values])


def solve_ideal_certificate(
    values: Sequence[TruncatedSeries], ideal: IdealSpec, order: Optional[int] = None
) -> Certificate:
    """u[j][i] with z_{vars[i]} = Σ_j u[j][i] τ_j.

    Raises:
        Inconsistent: some z_i is not in the image of ι_τ at the given truncation
    """
    ring = values[0].ring
    unknowns = [f"u{j + 1}" for j in range(len(values))]
    columns = []
    for var in ideal.vars:
        target = TruncatedSeries.variable(ring, HOLOMORPHIC, var)
        constraint = LinearConstraint(dict(zip(unknowns, values)), target, f"z{var}")
        solution = solve_graded_linear(ring, unknowns, [constraint], order)
        columns.append([solution[u] for u in unknowns])
    return [[columns[i][j] for i in range(len(columns))] for j in range(len(values))]


def verify_certificate(values: Sequence[TruncatedSeries], ideal: IdealSpec, certificate: Certificate) -> Verdict:
    """Σ_j u_ji τ_j = z_i for every generator, and every τ_j vanishes on Z."""
    ring = values[0].ring
    parts = []
    for i, var in enumerate(ideal.vars):
        combination = TruncatedSeries.zero(ring)
        for j, value in enumerate(values):
            combination = combination + certificate[j][i] * value
        target = TruncatedSeries.variable(ring, HOLOMORPHIC, var)
        parts.append(Verdict.compare(f"generates[z{var}]", combination, target))
    for j, value in enumerate(values):
        reduced = value.reduce_mod_ideal(ideal)
        parts.append(Verdict.compare(f"vanishes_on_Z[tau{j + 1}]", reduced, TruncatedSeries.zero(ring)))
    details = [f"u[{j + 1}][{i + 1}] = {certificate[j][i]}" for j in range(len(values)) for i in range(len(ideal.vars))]
    return Verdict.combine("ideal_surjectivity", parts, details)


def verify_ideal_surjectivity(
    values: Sequence[TruncatedSeries], ideal: IdealSpec, certificate: Optional[Certificate] = None
) -> Tuple[Verdict, Optional[Certificate]]:
    """Certify ι_τ onto the ideal; a supplied certificate is checked rather than solved."""
    if certificate is None:
        try:
            certificate = solve_ideal_certificate(values, ideal)
        except Inconsistent as exc:
            return Verdict.failure("ideal_surjectivity", exc.witness(), exc.degree), None
    return verify_certificate(values, ideal, certificate), certificate


# derived covectors --------------------------------------------------------------------


def covariant_section(connection: Connection, tau: DualMultivector) -> DualMultivector:
    """∇τ for the dual connection: component k = ∂τ_k + Σ_j Γ^∨_kj τ_j."""
    column = [tau.component(j + 1) for j in range(tau.bundle.rank)]
    return DualMultivector.covector(tau.bundle, covariant_derivative(dual_connection(connection), column))


def curvature_section(curvature: FormMatrix, tau: DualMultivector) -> DualMultivector:
    """R(τ): component k = Σ_j R_kj τ_j."""
    column = [tau.component(j + 1) for j in range(tau.bundle.rank)]
    return DualMultivector.covector(tau.bundle, curvature.apply(column))


@dataclass(frozen=True)
class KoszulData:
    connection: Connection
    tau: DualMultivector
    ideal: IdealSpec
    curvature: FormMatrix
    nabla_tau: DualMultivector
    r_tau: DualMultivector

    @classmethod
    def build(cls, connection: Connection, values: Sequence[TruncatedSeries], ideal: IdealSpec) -> "KoszulData":
        """
        Raises:
            HolomorphicityError: a component of τ involves w variables
            NotFlat: the connection is not flat
        """
        for j, value in enumerate(values):
            if value.has_antiholomorphic():
                raise HolomorphicityError(f"section component {j + 1} involves w variables: {value}")
        tau = section_covector(connection.bundle, values)
        curvature = curvature_R(connection)
        return cls(
            connection,
            tau,
            ideal,
            curvature,
            covariant_section(connection, tau),
            curvature_section(curvature, tau),
        )

    @property
    def bundle(self) -> BundleSpec:
        return self.connection.bundle

    @property
    def ring(self) -> RingSpec:
        return self.connection.ring

    @property
    def values(self) -> List[TruncatedSeries]:
        return [self.tau.component(j + 1).function_part() for j in range(self.bundle.rank)]


def nabla_tau(data: KoszulData) -> DualMultivector:
    return covariant_section(data.connection, data.tau)


def r_tau(data: KoszulData) -> DualMultivector:
    return curvature_section(data.curvature, data.tau)


def verify_bracket_facts(data: KoszulData) -> Verdict:
    bundle, ring = data.bundle, data.ring
    zero = EndMatrix.zero(bundle, ring)
    iota_tau = contraction(data.tau)
    iota_nabla = contraction(data.nabla_tau)
    iota_r = contraction(data.r_tau)
    parts = [
        Verdict.compare("koszul_square", iota_tau.compose(iota_tau), zero),
        Verdict.compare("dbar_tau", iota_tau.dbar(), zero),
        Verdict.compare("nabla_tau_bracket", exterior_extension(data.connection).bracket_matrix(iota_tau), iota_nabla),
        Verdict.compare("dbar_nabla_tau", iota_nabla.dbar(), iota_r),
        Verdict.compare("nabla_r_commute", supercommutator(iota_nabla, iota_r), zero),
    ]
    return Verdict.combine("bracket_facts", parts)


# φ_p and ψ ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhiData:
    """φ_p(e_S) = forward[(S, U)] · e^U ⊗ e_top with U the complement of S.

    ``inverse[(U, S)]`` is the sign with φ_p^{-1}(e^U ⊗ e_top) = sign · e_S.
    """

    p: int
    forward: Mapping[Tuple[int, int], int]
    inverse: Mapping[Tuple[int, int], int]


def phi_p(data: KoszulData, p: int) -> PhiData:
    bundle = data.bundle
    if not 0 <= p <= bundle.rank:
        raise ValueError(f"p={p} outside 0..{bundle.rank}")
    forward, inverse = {}, {}
    for source in bundle.masks(p):
        complement = bundle.top & ~source
        sign = merge_sign(complement, source)
        forward[(source, complement)] = sign
        inverse[(complement, source)] = sign
    return PhiData(p, forward, inverse)


def wedge_power_dual(curvature: FormMatrix, source: int, rank: int) -> Dict[int, Form]:
    """⋀^kR(e^T) = Σ_U det(R_{U,T}) e^U over |U| = |T|."""
    columns = [i - 1 for i in indices(source)]
    images = {}
    bundle = BundleSpec(rank)
    for target in bundle.masks(len(columns)):
        rows = [i - 1 for i in indices(target)]
        value = curvature.minor(rows, columns).det()
        if not value.is_zero():
            images[target] = value
    return images


@dataclass(frozen=True)
class KoszulPsi:
    """ψ on the exterior basis: ``values[S]`` is ψ_|S|(e_S), an (r, r-|S|)-form."""

    bundle: BundleSpec
    ring: RingSpec
    values: Mapping[int, Form]

    def __call__(self, mask: int) -> Form:
        return self.values.get(mask, Form.zero(self.ring))

    def component(self, p: int) -> Dict[int, Form]:
        return {mask: self(mask) for mask in self.bundle.masks(p)}

    def as_matrix(self) -> EndMatrix:
        """ψ as an operator ⋀E → 𝒜^* ⊗ ⋀^0E."""
        return EndMatrix(self.bundle, self.ring, {(0, s): v for s, v in self.values.items()})


def contraction_powers(data: KoszulData) -> List[EndMatrix]:
    """(1/p!) ι_{∇τ}^p for p = 0..r."""
    return exponential_terms(contraction(data.nabla_tau), data.bundle.rank)


def psi(data: KoszulData) -> KoszulPsi:
    bundle, ring = data.bundle, data.ring
    rank = bundle.rank
    powers = contraction_powers(data)
    values: Dict[int, Form] = {}
    for p in range(rank + 1):
        phi = phi_p(data, p)
        for source in bundle.masks(p):
            complement = bundle.top & ~source
            sign = phi.forward[(source, complement)]
            terms = {}
            for target, minor in wedge_power_dual(data.curvature, complement, rank).items():
                image = bundle.top & ~target
                factor = sign * phi.inverse[(target, image)]
                terms[image] = minor if factor > 0 else -minor
            packed = Multivector(bundle, ring, terms)
            values[source] = powers[p].apply(packed).coefficient(0)
        logger.debug("psi_%d built on %d basis elements", p, len(bundle.masks(p)))
    return KoszulPsi(bundle, ring, values)


def closed_samples(data: KoszulData) -> List[Form]:
    """∂̄-closed test coefficients: holomorphic functions, ∂̄-exact forms, curvature entries."""
    ring = data.ring
    z1 = TruncatedSeries.variable(ring, HOLOMORPHIC, 1)
    w1 = TruncatedSeries.variable(ring, ANTIHOLOMORPHIC, 1)
    samples = [
        Form.one(ring),
        Form.scalar(z1 + z1 * z1),
        Form.monomial(ring, 1, z1 * w1).dbar(),
    ]
    for row in data.curvature.rows:
        samples.extend(value for value in row if not value.is_zero())
    if data.curvature.rows and not data.curvature[0, 0].is_zero():
        samples.append(data.curvature[0, 0].times(z1))
    return samples


def verify_chain_map_psi(data: KoszulData, maps: Optional[KoszulPsi] = None) -> Verdict:
    """∂̄∘ψ_p = ψ_{p-1}∘ι_τ for every p, with the contraction-power identity behind it."""
    maps = psi(data) if maps is None else maps
    bundle, ring = data.bundle, data.ring
    matrix = maps.as_matrix()
    ladder = matrix.dbar()
    shifted = matrix.compose(contraction(data.tau))
    powers = contraction_powers(data)
    iota_r = contraction(data.r_tau)
    parts = []
    for p in range(bundle.rank + 1):
        parts.append(
            Verdict.compare(f"ladder[p={p}]", ladder.source_degree_part(p), shifted.source_degree_part(p))
        )
    for p in range(1, bundle.rank + 1):
        lowered = powers[p - 1].compose(iota_r)
        parts.append(Verdict.compare(f"contraction_power[p={p}]", powers[p].dbar(), lowered))
        for k, sample in enumerate(closed_samples(data)):
            for source in bundle.masks(p):
                vector = Multivector.basis(bundle, ring, source, sample)
                lhs = powers[p].apply(vector).dbar()
                rhs = powers[p - 1].apply(iota_r.apply(vector))
                parts.append(
                    Verdict.compare(f"closed_input[p={p},sample={k},{bundle.mask_name(source)}]", lhs, rhs)
                )
    return Verdict.combine("chain_map_psi", parts)


def verify_psi_extremes(data: KoszulData, maps: KoszulPsi) -> Verdict:
    """ψ_0 = det R and ψ_r = (1/r!) ι_{∇τ}^r."""
    rank = data.bundle.rank
    top_power = contraction_powers(data)[rank]
    parts = [
        Verdict.compare("psi_0", maps(0), chern_form_top(data.curvature)),
        Verdict.compare("psi_r", maps.as_matrix().source_degree_part(rank), top_power.source_degree_part(rank)),
    ]
    return Verdict.combine("psi_extremes", parts)


def holomorphic_differentials(data: KoszulData) -> Form:
    """∂τ_1 ∧ … ∧ ∂τ_r."""
    return wedge_all(data.ring, (data.tau.component(j + 1).partial() for j in range(data.bundle.rank)))


def fundamental_class_local(data: KoszulData, maps: Optional[KoszulPsi] = None) -> Verdict:
    """ψ_r(e_1∧…∧e_r) ≡ ∂τ_1∧…∧∂τ_r mod the ideal of Z."""
    maps = psi(data) if maps is None else maps
    lhs = maps(data.bundle.top).reduce_mod_ideal(data.ideal)
    rhs = holomorphic_differentials(data).reduce_mod_ideal(data.ideal)
    return Verdict.compare("fundamental_class_local", lhs, rhs, details=[f"psi_r(e_top) mod I = {lhs}"])
