"""Scenario files: multi-level validation and parsing into algebra objects."""

import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from src.algebra.parser import parse_form, parse_series
from src.algebra.ring import IdealSpec, RingSpec, TruncatedSeries
from src.algebra.superlinear import BundleSpec
from src.errors import BidegreeError, ParseError, ScenarioError
from src.geometry.connections import Connection, FormMatrix
from src.geometry.koszul import Certificate

logger = logging.getLogger(__name__)

CHECK_GROUPS = ("chern", "koszul", "supertrace", "twisted")
ALLOWED_CHECKS = CHECK_GROUPS + ("all",)
DEFAULT_SAMPLES = 200


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    ring: RingSpec
    bundle: BundleSpec
    connection: Connection
    tau: Tuple[TruncatedSeries, ...]
    ideal: IdealSpec
    checks: Tuple[str, ...]
    certificate: Optional[Certificate] = None
    report: Optional[str] = None
    seed: int = 0
    samples: int = DEFAULT_SAMPLES

    @property
    def holomorphic(self) -> bool:
        return not any(value.has_antiholomorphic() for value in self.tau)

    def groups(self, requested: Optional[Sequence[str]] = None) -> List[str]:
        """Check groups to run; ``all`` skips the Koszul group for a non-holomorphic section."""
        wanted = list(requested) if requested else list(self.checks)
        if "all" in wanted:
            wanted = [g for g in CHECK_GROUPS if g != "koszul" or self.holomorphic]
        return sorted(set(wanted))


class ScenarioValidator:
    """Multi-level scenario validation.

    Level 1 checks required sections and types, level 2 shapes, level 3 ranges and
    level 4 rules across fields. Every problem carries its field path.
    """

    REQUIRED_SECTIONS = {
        "ring": dict,
        "bundle": dict,
        "connection": dict,
        "section": dict,
        "ideal": dict,
    }

    ANTIHOLOMORPHIC_PATTERN = re.compile(r"(?<![d\w])w\d+")

    @classmethod
    def validate(cls, raw: Any, checks: Optional[Sequence[str]] = None) -> Tuple[bool, List[str]]:
        """
        Args:
            raw: decoded JSON document
            checks: groups requested on the command line; they replace ``scenario.checks``

        Returns:
            (is_valid, problems)
        """
        if not isinstance(raw, dict):
            return False, ["<root>: expected a JSON object"]

        # Level 1: sections and types
        problems = []
        for section, kind in cls.REQUIRED_SECTIONS.items():
            if section not in raw:
                problems.append(f"{section}: missing section")
            elif not isinstance(raw[section], kind):
                problems.append(f"{section}: expected an object")
        if problems:
            return False, problems

        ring, bundle = raw["ring"], raw["bundle"]
        for field, container, key in (
            ("ring.num_vars", ring, "num_vars"),
            ("ring.truncation", ring, "truncation"),
            ("bundle.rank", bundle, "rank"),
        ):
            if not isinstance(container.get(key), int) or isinstance(container.get(key), bool):
                problems.append(f"{field}: expected an integer")
        gamma = raw["connection"].get("gamma")
        tau = raw["section"].get("tau")
        ideal_vars = raw["ideal"].get("vars")
        if not isinstance(gamma, list):
            problems.append("connection.gamma: expected a list of rows")
        if not isinstance(tau, list):
            problems.append("section.tau: expected a list of expressions")
        if not isinstance(ideal_vars, list) or not all(isinstance(v, int) for v in ideal_vars):
            problems.append("ideal.vars: expected a list of integers")
        if problems:
            return False, problems

        # Level 2: shapes
        rank = bundle["rank"]
        if len(gamma) != rank:
            problems.append(f"connection.gamma: expected {rank} rows, got {len(gamma)}")
        for i, row in enumerate(gamma):
            if not isinstance(row, list) or len(row) != rank:
                problems.append(f"connection.gamma[{i}]: expected a row of {rank} expressions")
                continue
            for j, entry in enumerate(row):
                if not isinstance(entry, str):
                    problems.append(f"connection.gamma[{i}][{j}]: expected a string")
        if len(tau) != rank:
            problems.append(f"section.tau: expected {rank} entries, got {len(tau)}")
        for j, entry in enumerate(tau):
            if not isinstance(entry, str):
                problems.append(f"section.tau[{j}]: expected a string")
        certificate = raw["section"].get("u")
        if certificate is not None:
            if not isinstance(certificate, list) or len(certificate) != rank:
                problems.append(f"section.u: expected {rank} rows")
            else:
                for j, row in enumerate(certificate):
                    if not isinstance(row, list) or len(row) != len(ideal_vars):
                        problems.append(f"section.u[{j}]: expected {len(ideal_vars)} entries")

        # Level 3: ranges
        num_vars = ring["num_vars"]
        if num_vars < 1:
            problems.append("ring.num_vars: must be >= 1")
        if ring["truncation"] < 0:
            problems.append("ring.truncation: must be >= 0")
        if rank < 1:
            problems.append("bundle.rank: must be >= 1")
        if not ideal_vars:
            problems.append("ideal.vars: must not be empty")
        for k, var in enumerate(ideal_vars):
            if not 1 <= var <= num_vars:
                problems.append(f"ideal.vars[{k}]: {var} outside 1..{num_vars}")
        options = raw.get("scenario", {})
        if not isinstance(options, dict):
            problems.append("scenario: expected an object")
            options = {}
        field = "--check" if checks else "scenario.checks"
        checks = list(checks) if checks else options.get("checks", ["all"])
        if not isinstance(checks, list):
            problems.append("scenario.checks: expected a list")
            checks = []
        for k, check in enumerate(checks):
            if check not in ALLOWED_CHECKS:
                problems.append(f"{field}[{k}]: unknown check {check!r}")
        samples = options.get("samples", DEFAULT_SAMPLES)
        if not isinstance(samples, int) or isinstance(samples, bool) or samples < 1:
            problems.append("scenario.samples: expected a positive integer")
        if problems:
            return False, problems

        # Level 4: cross-field rules
        holomorphic = not any(cls.ANTIHOLOMORPHIC_PATTERN.search(entry) for entry in tau)
        if "koszul" in checks and not holomorphic:
            problems.append("section.tau: koszul check requires a holomorphic section (no w variables)")
        if "twisted" in checks and len(ideal_vars) != rank:
            problems.append(f"ideal.vars: twisted check needs exactly {rank} generators, got {len(ideal_vars)}")
        return not problems, problems


def _parse(text: str, ring: RingSpec, field: str, forms: bool):
    try:
        return parse_form(text, ring) if forms else parse_series(text, ring)
    except ParseError as exc:
        raise exc.with_field(field) from exc


def scenario_from_dict(
    raw: Dict[str, Any],
    truncation: Optional[int] = None,
    source: str = "",
    checks: Optional[Sequence[str]] = None,
) -> Scenario:
    """
    Raises:
        ScenarioError: validation problems, listed with field paths
        ParseError: an expression failed to parse; ``field`` names its location
    """
    ok, problems = ScenarioValidator.validate(raw, checks)
    if not ok:
        raise ScenarioError(problems)
    depth = raw["ring"]["truncation"] if truncation is None else truncation
    ring = RingSpec(raw["ring"]["num_vars"], depth)
    bundle = BundleSpec(raw["bundle"]["rank"])
    rows = tuple(
        tuple(
            _parse(entry, ring, f"connection.gamma[{i}][{j}]", forms=True)
            for j, entry in enumerate(row)
        )
        for i, row in enumerate(raw["connection"]["gamma"])
    )
    try:
        connection = Connection(bundle, FormMatrix(ring, rows))
    except BidegreeError as exc:
        raise ScenarioError([f"connection.gamma: {exc}"]) from exc
    tau = tuple(_parse(entry, ring, f"section.tau[{j}]", forms=False) for j, entry in enumerate(raw["section"]["tau"]))
    certificate = None
    if raw["section"].get("u") is not None:
        certificate = [
            [_parse(entry, ring, f"section.u[{j}][{i}]", forms=False) for i, entry in enumerate(row)]
            for j, row in enumerate(raw["section"]["u"])
        ]
    options = raw.get("scenario", {})
    name = raw.get("name") or Path(source).stem or "scenario"
    logger.info("loaded scenario %s: n=%d, D=%d, rank=%d", name, ring.num_vars, ring.truncation, bundle.rank)
    return Scenario(
        name=name,
        description=raw.get("description", ""),
        ring=ring,
        bundle=bundle,
        connection=connection,
        tau=tau,
        ideal=IdealSpec(tuple(raw["ideal"]["vars"])),
        checks=tuple(options.get("checks", ["all"])),
        certificate=certificate,
        report=options.get("report"),
        seed=int(options.get("seed", 0)),
        samples=options.get("samples", DEFAULT_SAMPLES),
    )


def load_scenario(
    path: Union[str, Path],
    truncation: Optional[int] = None,
    checks: Optional[Sequence[str]] = None,
) -> Scenario:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ScenarioError([f"{path}: file not found"]) from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError([f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}"]) from exc
    return scenario_from_dict(raw, truncation, str(path), checks)
