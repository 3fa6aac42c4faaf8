"""Check groups and their concurrent execution."""

import logging
import random
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from rich.console import Console
from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn

from src.algebra.forms import Form
from src.algebra.ring import ANTIHOLOMORPHIC, HOLOMORPHIC, RingSpec
from src.algebra.sampling import (
    random_derivation,
    random_dual,
    random_end_matrix,
    random_multivector,
    random_series,
)
from src.algebra.superlinear import (
    BundleSpec,
    DualMultivector,
    EndMatrix,
    Multivector,
    contraction,
    gen_supertrace,
    inclusion_i,
    supercommutator,
)
from src.errors import Inconsistent, NotFlatHalves
from src.geometry.connections import (
    Superconnection,
    chern_character,
    chern_form_top,
    check_flat,
    curvature_R,
    exterior_extension,
    probe_series,
    supercurvature,
    verify_bianchi,
    verify_curvature_closed,
    verify_dual_pairing,
    verify_linearity,
    verify_supercurvature,
)
from src.geometry.koszul import (
    KoszulData,
    fundamental_class_local,
    psi,
    verify_bracket_facts,
    verify_chain_map_psi,
    verify_ideal_surjectivity,
    verify_psi_extremes,
)
from src.geometry.twisted import (
    RealSection,
    build_comparison,
    build_dbar_connection,
    build_twist,
    extend_dbar_dual_and_exterior,
    fundamental_class_local_twisted,
    psi_and_trace,
    superconnection_A,
    verify_augmentation,
    verify_chern_top,
    verify_cochain_trace,
    verify_comparison_chain,
    verify_dbar_connection,
    verify_holomorphic_consistency,
    verify_psi_top,
    verify_real_section,
    verify_trace_degree0,
    verify_twist_cocycle,
)
from src.geometry.verdict import Verdict
from src.verification.monitoring import ResourceMonitor
from src.verification.scenario import Scenario

logger = logging.getLogger(__name__)

Record = Dict[str, object]
GroupResult = Tuple[str, List[Verdict]]


def run_koszul(scenario: Scenario) -> GroupResult:
    """Holomorphic pipeline: bracket facts, the ψ ladder and the local class."""
    flat = check_flat(scenario.connection)
    if not flat.passed:
        return "koszul", [flat]
    surjective, certificate = verify_ideal_surjectivity(list(scenario.tau), scenario.ideal, scenario.certificate)
    if certificate is None:
        return "koszul", [flat, surjective]
    data = KoszulData.build(scenario.connection, list(scenario.tau), scenario.ideal)
    maps = psi(data)
    return "koszul", [
        flat,
        surjective,
        verify_bracket_facts(data),
        verify_chain_map_psi(data, maps),
        verify_psi_extremes(data, maps),
        fundamental_class_local(data, maps),
    ]


def run_twisted(scenario: Scenario) -> GroupResult:
    """Real-analytic pipeline; a build step that cannot be solved ends the group with a failure."""
    verdicts = [check_flat(scenario.connection)]
    if not verdicts[0].passed:
        return "twisted", verdicts
    try:
        section = RealSection.build(scenario.bundle, scenario.tau, scenario.ideal, scenario.certificate)
    except Inconsistent as exc:
        return "twisted", verdicts + [Verdict.failure("real_section", exc.witness(), exc.degree)]
    verdicts.append(verify_real_section(section))

    try:
        dbar = build_dbar_connection(section)
    except Inconsistent as exc:
        return "twisted", verdicts + [Verdict.failure("dbar_connection", exc.witness(), exc.degree)]
    verdicts.append(verify_dbar_connection(section, dbar, extend_dbar_dual_and_exterior(dbar)))

    try:
        twist = build_twist(section, dbar)
    except Inconsistent as exc:
        return "twisted", verdicts + [Verdict.failure("twist_cocycle", exc.witness(), exc.degree)]
    verdicts.extend(verify_twist_cocycle(twist))

    try:
        superconnection = superconnection_A(twist, scenario.connection)
    except NotFlatHalves as exc:
        return "twisted", verdicts + [Verdict.failure("supercurvature", {"half": exc.half, **exc.witness})]
    trace = psi_and_trace(superconnection)
    verdicts.extend(
        [
            verify_supercurvature(superconnection.nabla, superconnection.delta, superconnection.curvature),
            verify_cochain_trace(twist, trace),
            verify_psi_top(section, scenario.connection, trace),
            verify_trace_degree0(trace),
            verify_chern_top(superconnection, trace),
            verify_augmentation(twist, scenario.ideal),
        ]
    )

    try:
        comparison = build_comparison(section, twist)
    except Inconsistent as exc:
        return "twisted", verdicts + [Verdict.failure("comparison_chain", exc.witness(), exc.degree)]
    verdicts.append(verify_comparison_chain(comparison, twist))
    verdicts.append(fundamental_class_local_twisted(comparison, trace))
    if section.is_holomorphic:
        verdicts.append(verify_holomorphic_consistency(section, scenario.connection, trace))
    return "twisted", verdicts


def run_chern(scenario: Scenario) -> GroupResult:
    """Curvature identities and the Chern character of ∇ + ∂̄ on ⋀E."""
    connection = scenario.connection
    flat = check_flat(connection)
    if not flat.passed:
        return "chern", [flat]
    bundle, ring = scenario.bundle, scenario.ring
    curvature = curvature_R(connection)
    det = chern_form_top(curvature)
    nabla = exterior_extension(connection)
    dbar = Superconnection(bundle, ring, "dbar", EndMatrix.zero(bundle, ring), "dbar")
    total = supercurvature(nabla, dbar)
    character = chern_character(total)
    top = character.bidegree_part(bundle.rank, bundle.rank)
    probe = Form.scalar(probe_series(ring, 4))
    vectors = [Multivector.basis(bundle, ring, mask, probe) for mask in bundle.masks()]
    forms = [Form.generator(ring, HOLOMORPHIC, 1), Form.generator(ring, ANTIHOLOMORPHIC, ring.num_vars)]
    return "chern", [
        flat,
        verify_curvature_closed(curvature),
        verify_bianchi(connection),
        verify_dual_pairing(connection),
        verify_supercurvature(nabla, dbar, total),
        Verdict.compare("chern_top_part", top, det, details=[f"ch_r = {top}", f"det R = {det}"]),
        Verdict.compare("chern_degree0", character.degree_part(0), Form.zero(ring)),
        verify_linearity(total, vectors, forms),
    ]


def sampling_ring(scenario: Scenario) -> Tuple[BundleSpec, RingSpec]:
    """Small ring and bundle for the sampled identities."""
    ring = RingSpec(min(scenario.ring.num_vars, 2), min(scenario.ring.truncation, 3))
    return BundleSpec(min(scenario.bundle.rank, 3)), ring


def run_supertrace(scenario: Scenario) -> GroupResult:
    """Seeded supertrace identities, each sampled on ``scenario.samples`` random operators."""
    rng = random.Random(scenario.seed)
    bundle, ring = sampling_ring(scenario)
    zero_form = Form.zero(ring)
    bracket, inclusion, derivation, raising, composition = [], [], [], [], []
    for k in range(scenario.samples):
        a = random_end_matrix(rng, bundle, ring)
        b = random_end_matrix(rng, bundle, ring)
        bracket.append(Verdict.compare(f"sample[{k}]", supercommutator(a, b).supertrace(), zero_form))

        alpha = random_dual(rng, bundle, ring)
        inclusion.append(Verdict.compare(f"sample[{k}]", gen_supertrace(inclusion_i(alpha)), alpha))

        delta = random_derivation(rng, bundle, ring, parity=k % 2)
        phi = random_end_matrix(rng, bundle, ring)
        lhs = inclusion_i(gen_supertrace(supercommutator(delta, phi)))
        rhs = supercommutator(delta, inclusion_i(gen_supertrace(phi)))
        derivation.append(Verdict.compare(f"sample[{k}]", lhs, rhs))

        shift = 1 + k % bundle.rank
        raised = gen_supertrace(a.exterior_shift_part(shift))
        raising.append(Verdict.compare(f"sample[{k},shift={shift}]", raised, DualMultivector.zero(bundle, ring)))

        vector = random_multivector(rng, bundle, ring)
        composition.append(Verdict.compare(f"sample[{k}]", a.compose(b).apply(vector), a.apply(b.apply(vector))))

    values = [Form.scalar(random_series(rng, ring)) for _ in range(bundle.rank)]
    covector = DualMultivector.covector(bundle, values)
    expected = covector if bundle.rank == 1 else DualMultivector.zero(bundle, ring)
    count = [f"{scenario.samples} samples"]
    return "supertrace", [
        Verdict.combine("supertrace_bracket", bracket, count),
        Verdict.combine("trace_inclusion", inclusion, count),
        Verdict.combine("trace_derivation", derivation, count),
        Verdict.combine("trace_raising", raising, count),
        Verdict.combine("compose_apply", composition, count),
        Verdict.compare("trace_contraction", gen_supertrace(contraction(covector)), expected),
    ]


GROUPS: Dict[str, Callable[[Scenario], GroupResult]] = {
    "chern": run_chern,
    "koszul": run_koszul,
    "supertrace": run_supertrace,
    "twisted": run_twisted,
}


def _timed(group: Callable[[Scenario], GroupResult], scenario: Scenario) -> Tuple[GroupResult, Dict[str, float]]:
    monitor = ResourceMonitor()
    monitor.start()
    result = group(scenario)
    return result, monitor.stop()


def error_record(group: str, exc: Exception) -> Record:
    return {
        "name": group,
        "status": "error",
        "verified_order": 0,
        "witness": {"error": type(exc).__name__, "message": str(exc)},
        "details": [],
    }


def run(
    scenario: Scenario,
    checks: Optional[Sequence[str]] = None,
    timings: bool = False,
    console: Optional[Console] = None,
) -> List[Record]:
    """Run the requested check groups concurrently; records come back sorted by name."""
    names = scenario.groups(checks)
    records: List[Record] = []
    with Progress(
        SpinnerColumn("dots", style="bold magenta"),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(bar_width=None, complete_style="green", finished_style="green"),
        console=console or Console(stderr=True),
        transient=True,
        disable=console is None,
    ) as progress:
        main_task = progress.add_task(f"[cyan]Verifying {scenario.name}...", total=len(names))

        with ThreadPoolExecutor(max_workers=max(1, len(names))) as executor:
            future_to_group = {executor.submit(_timed, GROUPS[name], scenario): name for name in names}

            for future in as_completed(future_to_group):
                name = future_to_group[future]
                try:
                    (group, verdicts), usage = future.result()
                    for verdict in verdicts:
                        record = verdict.to_record()
                        record["name"] = f"{group}.{verdict.name}"
                        if timings:
                            record["timing"] = usage
                        records.append(record)
                    logger.info("group %s: %d checks", group, len(verdicts))
                except Exception as e:
                    logger.debug("group %s raised", name, exc_info=True)
                    records.append(error_record(name, e))
                progress.advance(main_task)
    return sorted(records, key=lambda r: r["name"])
