"""Connections on E, their duals and exterior extensions, curvature and superconnections.

A connection matrix acts on the frame by ∇e_j = Σ_i Γ_ij e_i, so ∇s = ∂s + Γs on
coefficient columns and the dual connection has matrix -Γ^T.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from src.algebra.bitmasks import popcount
from src.algebra.forms import Form
from src.algebra.ring import ANTIHOLOMORPHIC, HOLOMORPHIC, RingSpec, TruncatedSeries
from src.algebra.superlinear import (
    BundleSpec,
    EndMatrix,
    Multivector,
    exponential_terms,
    extend_derivation,
    leibniz_det,
    supercommutator,
)
from src.errors import BidegreeError, BundleMismatch, NotFlat, NotFlatHalves, RingMismatch
from src.geometry.verdict import Verdict, witness_of

logger = logging.getLogger(__name__)

BASE_DIFFERENTIALS: Dict[str, Callable[[Form], Form]] = {
    "dbar": Form.dbar,
    "partial": Form.partial,
    "d": Form.d,
}


def probe_series(ring: RingSpec, salt: int) -> TruncatedSeries:
    """Fixed non-constant test function mixing both variable families."""
    n = ring.num_vars
    terms = {ring.unit_monomial(): Fraction(1)}
    terms[ring.variable_monomial(HOLOMORPHIC, 1)] = Fraction(salt)
    terms[ring.variable_monomial(ANTIHOLOMORPHIC, n)] = Fraction(salt + 1)
    mixed = [0] * ring.width
    mixed[ring.position(HOLOMORPHIC, n)] += 1
    mixed[ring.position(ANTIHOLOMORPHIC, 1)] += 1
    terms[tuple(mixed)] = Fraction(1, salt + 1)
    return TruncatedSeries(ring, terms)


# form matrices ------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FormMatrix:
    """Square matrix of forms; products use the wedge product entrywise."""

    ring: RingSpec
    rows: Tuple[Tuple[Form, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(row) for row in self.rows)
        for row in rows:
            if len(row) != len(rows):
                raise BundleMismatch(f"form matrix is not square: {len(rows)} rows, row of {len(row)}")
            for value in row:
                if value.ring != self.ring:
                    raise RingMismatch(f"{value.ring} vs {self.ring}")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def zero(cls, ring: RingSpec, size: int) -> "FormMatrix":
        return cls(ring, tuple(tuple(Form.zero(ring) for _ in range(size)) for _ in range(size)))

    @property
    def size(self) -> int:
        return len(self.rows)

    @property
    def valid_order(self) -> int:
        return min((v.valid_order for row in self.rows for v in row), default=self.ring.truncation)

    def __getitem__(self, index: Tuple[int, int]) -> Form:
        i, j = index
        return self.rows[i][j]

    def map_forms(self, fn: Callable[[Form], Form]) -> "FormMatrix":
        return FormMatrix(self.ring, tuple(tuple(fn(v) for v in row) for row in self.rows))

    def transpose(self) -> "FormMatrix":
        return FormMatrix(self.ring, tuple(zip(*self.rows)))

    def __neg__(self) -> "FormMatrix":
        return self.map_forms(lambda v: -v)

    def __add__(self, other: "FormMatrix") -> "FormMatrix":
        return FormMatrix(
            self.ring, tuple(tuple(a + b for a, b in zip(r1, r2)) for r1, r2 in zip(self.rows, other.rows))
        )

    def __sub__(self, other: "FormMatrix") -> "FormMatrix":
        return self + (-other)

    def dbar(self) -> "FormMatrix":
        return self.map_forms(Form.dbar)

    def partial(self) -> "FormMatrix":
        return self.map_forms(Form.partial)

    def d(self) -> "FormMatrix":
        return self.map_forms(Form.d)

    def wedge(self, other: "FormMatrix") -> "FormMatrix":
        """(A∧B)_ik = Σ_j A_ij ∧ B_jk."""
        size = self.size
        rows = []
        for i in range(size):
            row = []
            for k in range(size):
                total = Form.zero(self.ring)
                for j in range(size):
                    total = total + self.rows[i][j].wedge(other.rows[j][k])
                row.append(total)
            rows.append(tuple(row))
        return FormMatrix(self.ring, tuple(rows))

    def apply(self, column: Sequence[Form]) -> List[Form]:
        return [
            sum((self.rows[i][j].wedge(column[j]) for j in range(self.size)), Form.zero(self.ring))
            for i in range(self.size)
        ]

    def minor(self, rows: Sequence[int], columns: Sequence[int]) -> "FormMatrix":
        """Submatrix on 0-based row and column indices."""
        return FormMatrix(self.ring, tuple(tuple(self.rows[i][j] for j in columns) for i in rows))

    def det(self) -> Form:
        """Leibniz determinant; meaningful when the entries commute (even forms)."""
        if not self.rows:
            return Form.one(self.ring)
        return leibniz_det(self.rows, Form.wedge, Form.zero(self.ring), Form.one(self.ring))

    def is_zero(self) -> bool:
        return all(v.is_zero() for row in self.rows for v in row)

    def witness(self, other: "FormMatrix", order: Optional[int] = None) -> Optional[Dict[str, str]]:
        for i, (left_row, right_row) in enumerate(zip(self.rows, other.rows)):
            for j, (left, right) in enumerate(zip(left_row, right_row)):
                found = witness_of(left, right, order)
                if found is not None:
                    return {"entry": f"[{i + 1}][{j + 1}]", **found}
        return None

    def __str__(self) -> str:
        return "[" + ", ".join("[" + ", ".join(str(v) for v in row) + "]" for row in self.rows) + "]"


# connections --------------------------------------------------------------------------


@dataclass(frozen=True)
class Connection:
    """∇ = base + Γ on a frame of E, with Γ entries of one fixed bidegree.

    Bidegree (1,0) gives the holomorphic-type connections over ∂; (0,1) gives
    Dolbeault-type connections over ∂̄.
    """

    bundle: BundleSpec
    gamma: FormMatrix
    bidegree: Tuple[int, int] = (1, 0)

    def __post_init__(self):
        if self.gamma.size != self.bundle.rank:
            raise BundleMismatch(f"connection matrix is {self.gamma.size}x{self.gamma.size}, rank {self.bundle.rank}")
        if self.bidegree not in ((1, 0), (0, 1)):
            raise BidegreeError(f"unsupported connection bidegree {self.bidegree}")
        for i, row in enumerate(self.gamma.rows):
            for j, value in enumerate(row):
                extra = set(value.bidegrees()) - {self.bidegree}
                if extra:
                    raise BidegreeError(
                        f"connection entry [{i + 1}][{j + 1}] has bidegree {sorted(extra)[0]}, "
                        f"expected {self.bidegree}"
                    )

    @classmethod
    def zero(cls, bundle: BundleSpec, ring: RingSpec, bidegree: Tuple[int, int] = (1, 0)) -> "Connection":
        return cls(bundle, FormMatrix.zero(ring, bundle.rank), bidegree)

    @property
    def ring(self) -> RingSpec:
        return self.gamma.ring

    @property
    def base(self) -> str:
        return "partial" if self.bidegree == (1, 0) else "dbar"

    def differential(self, value: Form) -> Form:
        return BASE_DIFFERENTIALS[self.base](value)


def covariant_derivative(connection: Connection, column: Sequence[Form]) -> List[Form]:
    """(∇s)_i = base(s_i) + Σ_j Γ_ij s_j for function coefficients s_j."""
    twisted = connection.gamma.apply(column)
    return [connection.differential(s) + t for s, t in zip(column, twisted)]


def pairing(column: Sequence[Form], dual_column: Sequence[Form]) -> Form:
    total = Form.zero(column[0].ring)
    for s, t in zip(column, dual_column):
        total = total + s.wedge(t)
    return total


def check_flat(connection: Connection) -> Verdict:
    """base(Γ) + Γ∧Γ = 0, entry by entry."""
    gamma = connection.gamma
    square = gamma.map_forms(connection.differential) + gamma.wedge(gamma)
    zero = FormMatrix.zero(connection.ring, gamma.size)
    witness = square.witness(zero)
    return Verdict("check_flat", witness is None, square.valid_order, witness)


def dual_connection(connection: Connection) -> Connection:
    return Connection(connection.bundle, -connection.gamma.transpose(), connection.bidegree)


def verify_dual_pairing(connection: Connection) -> Verdict:
    """base⟨s,t⟩ = ⟨∇s,t⟩ + ⟨s,∇^∨t⟩ on probe multiples of all basis pairs."""
    ring = connection.ring
    dual = dual_connection(connection)
    rank = connection.bundle.rank
    f, g = Form.scalar(probe_series(ring, 1)), Form.scalar(probe_series(ring, 2))
    zero = Form.zero(ring)
    parts = []
    for a in range(rank):
        s = [f if i == a else zero for i in range(rank)]
        for b in range(rank):
            t = [g if i == b else zero for i in range(rank)]
            lhs = connection.differential(pairing(s, t))
            rhs = pairing(covariant_derivative(connection, s), t) + pairing(s, covariant_derivative(dual, t))
            parts.append(Verdict.compare(f"pairing[e{a + 1},e^{b + 1}]", lhs, rhs))
    return Verdict.combine("dual_pairing", parts)


def curvature_R(connection: Connection) -> FormMatrix:
    """Curvature of ∂̄ + ∇^∨ on E^∨, which is ∂̄(Γ^∨) once ∇ is flat.

    Raises:
        NotFlat: the (2,0) part base(Γ) + Γ∧Γ is nonzero
    """
    flat = check_flat(connection)
    if not flat.passed:
        raise NotFlat(flat.witness)
    return dual_connection(connection).gamma.dbar()


def verify_curvature_closed(curvature: FormMatrix) -> Verdict:
    closed = curvature.dbar()
    witness = closed.witness(FormMatrix.zero(curvature.ring, curvature.size))
    return Verdict("curvature_closed", witness is None, closed.valid_order, witness)


def verify_bianchi(connection: Connection) -> Verdict:
    """dR + Γ^∨∧R - R∧Γ^∨ = 0 for the curvature on E^∨."""
    dual = dual_connection(connection).gamma
    curvature = curvature_R(connection)
    lhs = curvature.d() + dual.wedge(curvature) - curvature.wedge(dual)
    witness = lhs.witness(FormMatrix.zero(connection.ring, lhs.size))
    return Verdict("bianchi", witness is None, lhs.valid_order, witness)


def chern_form_top(curvature: FormMatrix) -> Form:
    """det(R); (1,1)-form entries commute so the Leibniz expansion applies."""
    return curvature.det()


def exterior_extension(connection: Connection) -> "Superconnection":
    """base + derivation extension of e_j ↦ Σ_i Γ_ij e_i to ⋀E."""
    bundle, ring = connection.bundle, connection.ring
    images = [
        Multivector(bundle, ring, {bundle.generator(i + 1): connection.gamma[i, j] for i in range(bundle.rank)})
        for j in range(bundle.rank)
    ]
    matrix = extend_derivation(images, parity=1)
    return Superconnection(bundle, ring, connection.base, matrix, name="nabla" if connection.base == "partial" else "dbar_E")


# superconnections ---------------------------------------------------------------------


@dataclass(frozen=True)
class Superconnection:
    """Odd operator base ⊗ 1 + M on 𝒜^* ⊗ ⋀E, with base one of ∂̄, ∂, d."""

    bundle: BundleSpec
    ring: RingSpec
    base: str
    matrix: EndMatrix
    name: str = ""

    def __post_init__(self):
        if self.base not in BASE_DIFFERENTIALS:
            raise ValueError(f"unknown base differential {self.base!r}")
        if self.matrix.parity() == 0 and not self.matrix.is_zero():
            raise ValueError(f"superconnection {self.name or self.base} has an even matrix part")
        if self.matrix.parity() is None:
            raise ValueError(f"superconnection {self.name or self.base} has a matrix part of mixed parity")

    def _base_matrix(self, matrix: EndMatrix) -> EndMatrix:
        return {"dbar": matrix.dbar, "partial": matrix.partial, "d": matrix.d}[self.base]()

    def apply(self, vector: Multivector) -> Multivector:
        based = vector.map_forms(BASE_DIFFERENTIALS[self.base], 1)
        return based + self.matrix.apply(vector)

    def square(self) -> EndMatrix:
        """A² = [base, M] + M∘M; the base squares to zero."""
        return self._base_matrix(self.matrix) + self.matrix.compose(self.matrix)

    def bracket_matrix(self, other: EndMatrix) -> EndMatrix:
        """[A, N]_s = [base, N]_s + [M, N]_s, with [base, N]_s the entrywise differential."""
        return self._base_matrix(other) + supercommutator(self.matrix, other)

    def bracket(self, other: "Superconnection") -> EndMatrix:
        """[A, B]_s for two superconnections whose bases anticommute."""
        return self._base_matrix(other.matrix) + other._base_matrix(self.matrix) + supercommutator(
            self.matrix, other.matrix
        )

    def __add__(self, other: "Superconnection") -> "Superconnection":
        bases = {self.base, other.base}
        if bases != {"partial", "dbar"}:
            raise ValueError(f"cannot add superconnections over {self.base} and {other.base}")
        name = f"{self.name}+{other.name}" if self.name and other.name else ""
        return Superconnection(self.bundle, self.ring, "d", self.matrix + other.matrix, name)


def verify_square_zero(operator: Superconnection, label: str) -> Verdict:
    square = operator.square()
    return Verdict.compare(label, square, EndMatrix.zero(operator.bundle, operator.ring))


def supercurvature(nabla: Superconnection, delta: Superconnection) -> EndMatrix:
    """R_A = [∇, δ]_s for A = ∇ + δ with ∇² = δ² = 0.

    Raises:
        NotFlatHalves: one half does not square to zero
    """
    for half, label in ((nabla, "nabla"), (delta, "delta")):
        check = verify_square_zero(half, label)
        if not check.passed:
            raise NotFlatHalves(label, check.witness)
    curvature = nabla.bracket(delta)
    logger.debug("supercurvature: %d entries, valid to order %d", len(curvature.entries), curvature.valid_order)
    return curvature


def verify_supercurvature(nabla: Superconnection, delta: Superconnection, curvature: EndMatrix) -> Verdict:
    """The bracket agrees with the direct square of ∇ + δ and is even."""
    direct = (nabla + delta).square()
    parity = curvature.parity()
    details = [] if parity == 0 else [f"supercurvature parity {parity}"]
    verdict = Verdict.compare("supercurvature", curvature, direct, details=details)
    verdict.passed = verdict.passed and parity == 0
    return verdict


def chern_character(curvature: EndMatrix) -> Form:
    """tr_s(exp R_A); forms of degree above 2n vanish, so 2n terms suffice."""
    terms = exponential_terms(curvature, 2 * curvature.ring.num_vars)
    total = Form.zero(curvature.ring)
    for term in terms:
        total = total + term.supertrace()
    return total


def verify_linearity(curvature: EndMatrix, vectors: Sequence[Multivector], forms: Sequence[Form]) -> Verdict:
    """R_A(ω∧v) = ω∧R_A(v) for even R_A."""
    parts = []
    for i, vector in enumerate(vectors):
        for j, form in enumerate(forms):
            lhs = curvature.apply(vector.wedge_form(form))
            rhs = curvature.apply(vector).wedge_form(form)
            parts.append(Verdict.compare(f"linear[v{i},w{j}]", lhs, rhs))
    return Verdict.combine("curvature_linear", parts)


def _parity(vector: Multivector) -> int:
    parities = {(popcount(mask) + (form.parity() or 0)) % 2 for mask, form in vector.terms.items()}
    if len(parities) > 1:
        raise ValueError("derivation rule needs a homogeneous left factor")
    return parities.pop() if parities else 0


def verify_derivation_rule(operator: Superconnection, left: Multivector, right: Multivector) -> Verdict:
    """A(x∧y) = A(x)∧y + (-1)^{|x|} x∧A(y)."""
    lhs = operator.apply(left.exterior_product(right))
    tail = left.exterior_product(operator.apply(right))
    rhs = operator.apply(left).exterior_product(right) + (-tail if _parity(left) else tail)
    return Verdict.compare(f"leibniz[{operator.name or operator.base}]", lhs, rhs)
