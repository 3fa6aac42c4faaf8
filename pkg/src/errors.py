"""Exception hierarchy shared by the algebra kernel, the pipelines and the CLI."""

from typing import List, Optional, Sequence


class FundamentalClassError(Exception):
    """Base class for every error raised by this package."""


class RingMismatch(FundamentalClassError):
    """Operands live over different truncated rings."""


class BundleMismatch(FundamentalClassError):
    """Operands live over exterior algebras of different rank."""


class ZeroConstantTerm(FundamentalClassError):
    """Attempt to invert a series whose constant coefficient is zero."""


class BidegreeError(FundamentalClassError, ValueError):
    """A form does not have the bidegree its role requires."""


class HolomorphicityError(FundamentalClassError, ValueError):
    """A section expected to be holomorphic involves antiholomorphic variables."""


class ParseError(FundamentalClassError):
    """Malformed expression text.

    Attributes:
        offset: 0-based character position of the failure
        field: config field path the text came from, if any
    """

    def __init__(self, message: str, offset: int, field: Optional[str] = None):
        self.message = message
        self.offset = offset
        self.field = field
        where = f"{field}: " if field else ""
        super().__init__(f"{where}{message} at offset {offset}")

    def with_field(self, field: str) -> "ParseError":
        return type(self)(self.message, self.offset, field)


class DegreeOverflow(ParseError):
    """A literal monomial exceeds the ring truncation."""


class Inconsistent(FundamentalClassError):
    """The graded linear system has no solution.

    Attributes:
        degree: lowest homogeneous degree at which the obstruction appears
        label: the constraint carrying a nonzero residual at that degree
        monomial: printed monomial of that residual
    """

    def __init__(self, degree: int, label: str = "", monomial: str = ""):
        self.degree = degree
        self.label = label
        self.monomial = monomial
        detail = f" ({label} at {monomial})" if label else ""
        super().__init__(f"inconsistent at degree {degree}{detail}")

    def witness(self) -> dict:
        return {"degree": str(self.degree), "constraint": self.label, "monomial": self.monomial}


class NotFlat(FundamentalClassError):
    """Curvature requested for a connection whose (2,0)-curvature is nonzero."""

    def __init__(self, witness: Optional[dict]):
        self.witness = witness or {}
        super().__init__(f"connection is not flat: {self.witness}")


class NotFlatHalves(FundamentalClassError):
    """One half of a superconnection fails to square to zero."""

    def __init__(self, half: str, witness: Optional[dict]):
        self.half = half
        self.witness = witness or {}
        super().__init__(f"{half} does not square to zero: {self.witness}")


class ScenarioError(FundamentalClassError):
    """Scenario file failed validation."""

    def __init__(self, problems: Sequence[str]):
        self.problems: List[str] = list(problems)
        super().__init__("; ".join(self.problems))
