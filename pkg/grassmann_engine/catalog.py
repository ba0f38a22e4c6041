"""
Catalog of the eighteen classified parallel immersions S^2 -> G(2,N), the
non-parallel control case, and the verification harness that checks each built
bundle against its expected invariants with exact equality.

The expected-value table lives here and in catalog_golden.json; the two must agree.
"""

import json
import logging
import os
import time
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Tuple

from sympy import QQ
from sympy.polys.domains.gaussiandomains import GaussianRational

from grassmann_engine.errors import DegenerateInputError, GrassmannEngineError, UnknownCaseError
from grassmann_engine.exact_algebra import GR_ONE, format_gaussian, gaussian, gr_abs2
from grassmann_engine.harmonic_sequences import (
    ANTI_HOLOMORPHIC,
    HOLOMORPHIC,
    TOTALLY_REAL,
    BundleMap,
    bundle_from_sections,
    concat,
    const_coord,
    const_vector,
    conjugate_bundle,
    pad_end,
    pad_front,
    veronese,
)
from grassmann_engine.hermitian_ambient import VecRF
from grassmann_engine.invariant_engine import DEFAULT_ISOTROPY_BOUND, GeometryReport, geometry_report

logger = logging.getLogger(__name__)

_package_dir = os.path.dirname(os.path.abspath(__file__))
GOLDEN_PATH = os.path.join(_package_dir, "catalog_golden.json")
SCRIPTS_DIR = os.path.join(_package_dir, "catalog_scripts")

# Second exact point on the unit circle used for the theta family.
THETA_WITNESS = gaussian("3/5", "4/5")

SectionBuilder = Callable[[GaussianRational], List[VecRF]]


@dataclass(frozen=True)
class CatalogCase:
    id: str
    dim: int
    builder: SectionBuilder = field(repr=False, compare=False)
    expected_K: Optional[str]
    expected_B2: Optional[str]
    expected_ranks: Tuple[int, int]
    expected_kahler: Optional[str]
    expected_isotropy: Optional[str]
    citation: str
    expected_eq32: bool = True
    takes_theta: bool = False
    linearly_full: bool = True

    @property
    def negative(self) -> bool:
        return not self.expected_eq32

    def script_path(self) -> str:
        return os.path.join(SCRIPTS_DIR, f"{self.id}.gsl")


class Mismatch(NamedTuple):
    field: str
    expected: str
    actual: str


@dataclass
class VerificationOutcome:
    case_id: str
    passed: bool
    report: Optional[GeometryReport]
    mismatches: List[Mismatch]
    elapsed: float = 0.0
    conjugate: bool = False


# --- builders -----------------------------------------------------------------------


def _v(n: int, i: int, front: int = 0, end: int = 0) -> VecRF:
    v = veronese(n, i)
    if end:
        v = pad_end(v, end)
    if front:
        v = pad_front(v, front)
    return v


def _sections(*makers: Callable[[], VecRF]) -> SectionBuilder:
    def build(theta: GaussianRational) -> List[VecRF]:
        return [make() for make in makers]

    return build


def _alpha_pair(theta: GaussianRational) -> List[VecRF]:
    """V_3^{(4)} padded, and alpha = (V_2^{(4)}, sqrt(48) e^{i theta})."""
    return [_v(4, 3, end=1), concat(veronese(4, 2), const_vector(48, theta))]


def _case(case_id, dim, builder, k, b2, ranks, kahler, isotropy, citation, **extra) -> CatalogCase:
    return CatalogCase(
        id=case_id,
        dim=dim,
        builder=builder,
        expected_K=k,
        expected_B2=b2,
        expected_ranks=ranks,
        expected_kahler=kahler,
        expected_isotropy=isotropy,
        citation=citation,
        **extra,
    )


_TABLE: List[CatalogCase] = [
    _case("T1.1-1", 3, _sections(lambda: _v(2, 0), lambda: _v(2, 1)),
          "2", "4", (1, 0), HOLOMORPHIC, "inf",
          'Theorem 1.1 (1): "with K=2 and ‖B‖²=4"'),
    _case("T1.1-2", 3, _sections(lambda: _v(1, 0, end=1), lambda: const_coord(3, 2)),
          "4", "0", (1, 0), HOLOMORPHIC, "inf",
          'Theorem 1.1 (2): "where c₀ = (0,0,1)ᵀ", K=4, ‖B‖²=0'),
    _case("T1.1-3", 4, _sections(lambda: _v(2, 0, end=1), lambda: const_coord(4, 3)),
          "2", "4", (1, 0), HOLOMORPHIC, "inf",
          "Theorem 1.1 (3): K=2, ‖B‖²=4"),
    _case("T1.1-4", 4, _sections(lambda: _v(1, 0, front=2), lambda: _v(1, 0, end=2)),
          "2", "0", (2, 0), HOLOMORPHIC, "inf",
          'Theorem 1.1 (4): "V^(1)_0=(1, z, 0, 0)ᵀ and V̂^(1)_0=(0, 0, 1, z)ᵀ", K=2, ‖B‖²=0'),
    _case("T1.1-5", 6, _sections(lambda: _v(2, 0, front=3), lambda: _v(2, 0, end=3)),
          "1", "2", (2, 0), HOLOMORPHIC, "inf",
          'Theorem 1.1 (5): "with K=1 and ‖B‖²=2"'),
    _case("T1.2-1", 4, _sections(lambda: _v(3, 1), lambda: _v(3, 2)),
          "2/3", "8/3", (1, 1), None, None,
          "Theorem 1.2 (1): K=2/3, ‖B‖²=8/3"),
    _case("T1.2-2", 3, _sections(lambda: _v(2, 0), lambda: _v(2, 2)),
          "1", "0", (1, 1), None, None,
          "Theorem 1.2 (2): K=1, ‖B‖²=0"),
    _case("T1.2-3", 4, _sections(lambda: _v(1, 0, front=2), lambda: _v(1, 1, end=2)),
          "2", "0", (1, 1), None, None,
          'Theorem 1.2 (3): "K=2 and ‖B‖²=0"'),
    _case("T1.2-4", 4, _sections(lambda: _v(3, 0), lambda: _v(3, 3)),
          "2/3", "8/3", (1, 1), None, None,
          'Theorem 1.2 (4): "K=2/3 and ‖B‖²=8/3"'),
    _case("T1.2-5", 6, _sections(lambda: _v(2, 0, front=3), lambda: _v(2, 2, end=3)),
          "1", "2", (1, 1), None, None,
          'Theorem 1.2 (5): "with K=1 and ‖B‖²=2"'),
    _case("T1.2-6", 4, _sections(lambda: _v(2, 1, end=1), lambda: const_coord(4, 3)),
          "1", "0", (1, 1), None, None,
          "Theorem 1.2 (6): K=1, ‖B‖²=0"),
    _case("T1.2-7", 6, _sections(lambda: _v(4, 2, end=1), lambda: const_coord(6, 5)),
          "1/3", "4/3", (1, 1), None, None,
          'Theorem 1.2 (7): "with K=1/3 and ‖B‖²=4/3"'),
    _case("T1.3-1", 4, _sections(lambda: _v(3, 1), lambda: _v(3, 3)),
          "2/5", "0", (1, 2), None, None,
          'Theorem 1.3 (1): "K=2/5 and ‖B‖²=0"'),
    _case("T1.3-2", 5, _sections(lambda: _v(1, 1, front=3), lambda: _v(2, 1, end=2)),
          "4/5", "0", (1, 2), None, None,
          'Theorem 1.3 (2): "K=4/5 and ‖B‖²=0"'),
    _case("T1.3-3", 6, _alpha_pair,
          "2/5", "4/5", (1, 2), None, None,
          'Theorem 1.3 (3): "α = (V₂^(4)ᵀ, √48 e^{√−1 θ})ᵀ", "K=2/5, ‖B‖²=4/5"',
          takes_theta=True),
    _case("T1.4-1", 5, _sections(lambda: _v(4, 1), lambda: _v(4, 3)),
          "1/5", "0", (2, 2), TOTALLY_REAL, "1",
          'Theorem 1.4 (1): "K=1/5 and ‖B‖²=0", "of finite isotropy order r=1"'),
    _case("T1.4-2", 6, _sections(lambda: _v(2, 1, front=3), lambda: _v(2, 1, end=3)),
          "1/2", "0", (2, 2), TOTALLY_REAL, "geq:2",
          'Theorem 1.4 (2): "K=1/2 and ‖B‖²=0", "is totally real"'),
    _case("T1.4-3", 10, _sections(lambda: _v(4, 2, front=5), lambda: _v(4, 2, end=5)),
          "1/6", "2/3", (2, 2), TOTALLY_REAL, "geq:2",
          'Theorem 1.4 (3): "with K=1/6 and ‖B‖²=2/3", "isotropy order r ≥ 2"'),
]

_NEGATIVE: List[CatalogCase] = [
    _case("NEG-1", 7, _sections(lambda: _v(6, 3), lambda: _v(6, 6)),
          "2/15", "4/3", (1, 2), None, None,
          'Negative control V₃⁽⁶⁾⊕V₆⁽⁶⁾: "does not have parallel second fundamental form"',
          expected_eq32=False),
]


def expected_table() -> List[CatalogCase]:
    """The eighteen classified immersions, in theorem order."""
    return list(_TABLE)


def negative_cases() -> List[CatalogCase]:
    return list(_NEGATIVE)


def all_cases() -> List[CatalogCase]:
    return expected_table() + negative_cases()


def find_case(case_id: str) -> CatalogCase:
    for case in all_cases():
        if case.id == case_id:
            return case
    raise UnknownCaseError(f"unknown catalog case {case_id!r}")


def case_order(case_id: str) -> int:
    ids = [c.id for c in all_cases()]
    return ids.index(case_id) if case_id in ids else len(ids)


def _check_theta(theta: GaussianRational) -> None:
    if gr_abs2(theta) != QQ.one:
        raise DegenerateInputError(f"theta point {format_gaussian(theta)} is not on the unit circle")


def build_sections(case: CatalogCase, theta: Optional[GaussianRational] = None) -> List[VecRF]:
    if theta is not None and not case.takes_theta:
        raise DegenerateInputError(f"case {case.id} takes no theta parameter")
    theta = GR_ONE if theta is None else theta
    _check_theta(theta)
    return case.builder(theta)


def build_case(case_id: str, theta: Optional[GaussianRational] = None) -> BundleMap:
    """The weighted bundle of a catalog case (theta defaults to 1, i.e. angle 0)."""
    case = find_case(case_id)
    bundle = bundle_from_sections(build_sections(case, theta))
    if bundle.space.dim != case.dim:
        raise DegenerateInputError(f"case {case_id} built in dimension {bundle.space.dim}, expected {case.dim}")
    return bundle


def with_expectations(case: CatalogCase, **changes: Any) -> CatalogCase:
    """Copy of a case with some expectations replaced (harness self-tests)."""
    return replace(case, **changes)


# --- comparison ---------------------------------------------------------------------


def _invariant_text(inv) -> str:
    if inv is None:
        return "undefined"
    if not inv.constant:
        return "non-constant"
    return format_gaussian(inv.constant_value())


def isotropy_matches(expected: str, actual) -> bool:
    if expected == "inf":
        return actual.kind == "inf"
    if expected.startswith("geq:"):
        return actual.at_least(int(expected[4:]))
    return actual.kind == "exact" and actual.value == int(expected)


_FLIPPED_KAHLER = {HOLOMORPHIC: ANTI_HOLOMORPHIC, ANTI_HOLOMORPHIC: HOLOMORPHIC}


def compare_report(case: CatalogCase, report: GeometryReport, conjugate: bool = False) -> List[Mismatch]:
    """Field-by-field exact comparison of a report against the case expectations."""
    out: List[Mismatch] = []

    def check(name: str, expected, actual) -> None:
        if expected != actual:
            out.append(Mismatch(name, str(expected), str(actual)))

    if case.expected_K is not None:
        check("K", case.expected_K, _invariant_text(report.K))
        if report.K is not None and report.K.constant:
            check("K_oracle", True, report.K.oracle_agrees)
    if case.expected_B2 is not None:
        check("B2", case.expected_B2, _invariant_text(report.B2))
        if report.B2 is not None and report.B2.constant:
            check("B2_oracle", True, report.B2.oracle_agrees)
    check("harmonic", True, report.harmonic_residual_zero)
    if not case.negative:
        check("eq31_first", True, report.eq31_first_zero)
        check("eq31_second", True, report.eq31_second_zero)
    check("eq32", case.expected_eq32, report.eq32_zero)
    ranks = case.expected_ranks[::-1] if conjugate else case.expected_ranks
    check("rank_dprime", ranks[0], report.ranks[0])
    check("rank_dsecond", ranks[1], report.ranks[1])
    if case.expected_kahler is not None:
        kahler = _FLIPPED_KAHLER.get(case.expected_kahler, case.expected_kahler) if conjugate else case.expected_kahler
        check("kahler", kahler, report.kahler_flag)
    if case.expected_isotropy is not None and not conjugate:
        if not isotropy_matches(case.expected_isotropy, report.isotropy):
            out.append(Mismatch("isotropy", case.expected_isotropy, report.isotropy.to_text()))
    check("linearly_full", case.linearly_full, report.linearly_full)
    check("metric_consistent", True, report.metric_consistent)
    return out


def _same_invariants(first: GeometryReport, second: GeometryReport, label: str) -> List[Mismatch]:
    out = []
    pairs = [
        ("K", _invariant_text(first.K), _invariant_text(second.K)),
        ("B2", _invariant_text(first.B2), _invariant_text(second.B2)),
        ("lambda2", first.lambda2.to_text(), second.lambda2.to_text()),
        ("harmonic", first.harmonic_residual_zero, second.harmonic_residual_zero),
        ("eq31_first", first.eq31_first_zero, second.eq31_first_zero),
        ("eq31_second", first.eq31_second_zero, second.eq31_second_zero),
        ("eq32", first.eq32_zero, second.eq32_zero),
    ]
    for name, a, b in pairs:
        if a != b:
            out.append(Mismatch(f"{label}:{name}", str(a), str(b)))
    return out


def verify_case(
    case: CatalogCase,
    theta: Optional[GaussianRational] = None,
    isotropy_bound: int = DEFAULT_ISOTROPY_BOUND,
    conjugate: bool = False,
) -> VerificationOutcome:
    """
    Build, analyze and compare one case. Cases with a theta family are also run at
    THETA_WITNESS and must give identical invariants. Engine errors become a failed
    outcome rather than an exception.
    """
    started = time.perf_counter()
    logger.info("verifying %s%s", case.id, " (conjugate)" if conjugate else "")
    try:
        bundle = bundle_from_sections(build_sections(case, theta))
        if conjugate:
            bundle = conjugate_bundle(bundle)
        report = geometry_report(bundle, isotropy_bound)
        mismatches = compare_report(case, report, conjugate)
        if bundle.space.dim != case.dim:
            mismatches.append(Mismatch("N", str(case.dim), str(bundle.space.dim)))
        if case.takes_theta and theta is None:
            second = bundle_from_sections(build_sections(case, THETA_WITNESS))
            if conjugate:
                second = conjugate_bundle(second)
            mismatches.extend(
                _same_invariants(report, geometry_report(second, isotropy_bound), f"theta={format_gaussian(THETA_WITNESS)}")
            )
    except GrassmannEngineError as exc:
        logger.warning("case %s failed to build or analyze: %s", case.id, exc)
        return VerificationOutcome(
            case.id, False, None, [Mismatch("build", "ok", str(exc))], time.perf_counter() - started, conjugate
        )
    elapsed = time.perf_counter() - started
    passed = not mismatches
    logger.info("%s %s in %.1fs", case.id, "PASS" if passed else "FAIL", elapsed)
    return VerificationOutcome(case.id, passed, report, mismatches, elapsed, conjugate)


# --- golden file --------------------------------------------------------------------

_golden_cache: Optional[List[Dict[str, Any]]] = None


def load_golden() -> List[Dict[str, Any]]:
    """Records of catalog_golden.json (cached after the first read)."""
    global _golden_cache
    if _golden_cache is not None:
        return _golden_cache
    with open(GOLDEN_PATH, encoding="utf-8") as f:
        data = json.load(f)
    _golden_cache = data.get("cases", [])
    return _golden_cache


def golden_record(case: CatalogCase) -> Dict[str, Any]:
    """The golden-file record a case should have."""
    return {
        "id": case.id,
        "N": case.dim,
        "K": case.expected_K,
        "B2": case.expected_B2,
        "ranks": {"dprime": case.expected_ranks[0], "dsecond": case.expected_ranks[1]},
        "flags": {
            "kahler": case.expected_kahler,
            "isotropy": case.expected_isotropy,
            "eq32": case.expected_eq32,
            "theta": case.takes_theta,
        },
        "citation": case.citation,
    }


def golden_differences() -> List[str]:
    """Disagreements between the embedded table and the golden file (empty when consistent)."""
    records = {r.get("id"): r for r in load_golden()}
    diffs = []
    cases = all_cases()
    for case in cases:
        record = records.get(case.id)
        if record is None:
            diffs.append(f"{case.id}: missing from golden file")
        elif record != golden_record(case):
            diffs.append(f"{case.id}: golden record differs")
    for extra in set(records) - {c.id for c in cases}:
        diffs.append(f"{extra}: not in the embedded table")
    return diffs
