"""Pass/fail record shared by every verification operation."""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence

from src.algebra.forms import Form, key_name
from src.algebra.ring import TruncatedSeries

Witness = Dict[str, str]


def witness_of(lhs, rhs, order: Optional[int] = None) -> Optional[Witness]:
    """First place two values differ, as printable fields; None when they agree."""
    if isinstance(lhs, TruncatedSeries):
        found = lhs.first_difference(rhs, order)
        if found is None:
            return None
        monomial, left, right = found
        return {
            "monomial": lhs.ring.format_monomial(monomial) or "1",
            "lhs": str(left),
            "rhs": str(right),
        }
    if isinstance(lhs, Form):
        found = lhs.first_difference(rhs, order)
        if found is None:
            return None
        key, monomial, left, right = found
        return {
            "form": key_name(lhs.ring, key) or "1",
            "monomial": lhs.ring.format_monomial(monomial) or "1",
            "lhs": str(left),
            "rhs": str(right),
        }
    return lhs.witness(rhs, order)


def order_of(*values) -> int:
    return min(value.valid_order for value in values)


@dataclass
class Verdict:
    """Outcome of one identity check.

    ``verified_order`` is the total degree up to which the identity was compared.
    """

    name: str
    passed: bool
    verified_order: int
    witness: Optional[Witness] = None
    details: List[str] = field(default_factory=list)

    @classmethod
    def compare(cls, name: str, lhs, rhs, order: Optional[int] = None, details: Sequence[str] = ()) -> "Verdict":
        limit = order_of(lhs, rhs) if order is None else order
        witness = witness_of(lhs, rhs, limit)
        return cls(name, witness is None, limit, witness, list(details))

    @classmethod
    def failure(cls, name: str, witness: Optional[Witness], order: int = 0, details: Sequence[str] = ()) -> "Verdict":
        return cls(name, False, order, witness or {}, list(details))

    @classmethod
    def combine(cls, name: str, verdicts: Iterable["Verdict"], details: Sequence[str] = ()) -> "Verdict":
        """All parts must pass; the witness is the first failing part's, tagged with its name."""
        parts = list(verdicts)
        if not parts:
            return cls(name, True, 0, None, list(details))
        failing = next((v for v in parts if not v.passed), None)
        witness = None
        if failing is not None:
            witness = {"check": failing.name, **(failing.witness or {})}
        collected = list(details)
        for part in parts:
            collected.extend(part.details)
        return cls(
            name,
            failing is None,
            min(v.verified_order for v in parts),
            witness,
            collected,
        )

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"

    def to_record(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "status": self.status,
            "verified_order": self.verified_order,
            "witness": self.witness,
            "details": list(self.details),
        }
