"""
Report export: JSON records and text tables for verification and analysis runs.
Rationals are written as exact "p/q" strings, never floats; functions in the
printable form of exact_algebra. Records are ordered by catalog id so output is
byte-stable across runs and worker counts.
"""

import json
from typing import Any, Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field

from grassmann_engine.catalog import CatalogCase, Mismatch, VerificationOutcome, golden_record
from grassmann_engine.exact_algebra import format_gaussian
from grassmann_engine.invariant_engine import GeometryReport, Invariant, ResidualCheck

SCHEMA_VERSION = "1.0"


class InvariantRecord(BaseModel):
    """A scalar invariant: constancy verdict, printable value and point-oracle verdict."""
    constant: bool
    value: str
    oracle_agrees: Optional[bool] = None


class RanksRecord(BaseModel):
    dprime: int
    dsecond: int


class FlagsRecord(BaseModel):
    harmonic: bool
    eq31: Optional[bool] = None
    eq32: Optional[bool] = None
    kahler: Optional[str] = None  # holomorphic | anti_holomorphic | totally_real | general


class WitnessRecord(BaseModel):
    """Chart point where a nonzero residual was observed."""
    point: Optional[str] = None
    value: Optional[str] = None
    entry: Optional[List[int]] = None


class MismatchRecord(BaseModel):
    field: str
    expected: str
    actual: str


class CaseRecord(BaseModel):
    """One verified case or analyzed script."""
    model_config = ConfigDict(populate_by_name=True)

    id: str
    N: int
    weights: List[str] = []
    K: Optional[InvariantRecord] = None
    B2: Optional[InvariantRecord] = None
    lambda2: Optional[str] = None
    ranks: Optional[RanksRecord] = None
    flags: Optional[FlagsRecord] = None
    isotropy: Optional[str] = None
    passed: bool = Field(alias="pass")
    mismatches: List[MismatchRecord] = []
    citation: str = ""
    # additions beyond the core schema
    l_in: Optional[str] = None
    l_out: Optional[str] = None
    kahler_tan2: Optional[str] = None
    totally_geodesic: Optional[bool] = None
    linearly_full: Optional[bool] = None
    isotropy_rank_drop: Optional[int] = None
    witnesses: Dict[str, WitnessRecord] = {}
    conjugate: bool = False


class RunDocument(BaseModel):
    schema_version: str = SCHEMA_VERSION
    command: str
    cases: List[CaseRecord]


class GoldenRanks(BaseModel):
    dprime: int
    dsecond: int


class GoldenFlags(BaseModel):
    kahler: Optional[str] = None
    isotropy: Optional[str] = None
    eq32: bool = True
    theta: bool = False


class GoldenRecord(BaseModel):
    """One row of catalog_golden.json."""
    id: str
    N: int
    K: Optional[str] = None
    B2: Optional[str] = None
    ranks: GoldenRanks
    flags: GoldenFlags
    citation: str


def _invariant_record(inv: Optional[Invariant]) -> Optional[InvariantRecord]:
    if inv is None:
        return None
    return InvariantRecord(constant=inv.constant, value=inv.to_text(), oracle_agrees=inv.oracle_agrees)


def _witness(check: Optional[ResidualCheck]) -> Optional[WitnessRecord]:
    if check is None or check.zero:
        return None
    return WitnessRecord(
        point=check.witness_point,
        value=check.witness_value,
        entry=list(check.entry) if check.entry is not None else None,
    )


def _eq31(report: GeometryReport) -> Optional[bool]:
    if report.eq31_first is None:
        return None
    return report.eq31_first_zero and report.eq31_second_zero


def report_fields(report: GeometryReport) -> Dict[str, Any]:
    """CaseRecord fields derived from a geometry report."""
    witnesses = {}
    for name, check in (
        ("harmonic", report.harmonic),
        ("eq31_first", report.eq31_first),
        ("eq31_second", report.eq31_second),
        ("eq32", report.eq32),
    ):
        w = _witness(check)
        if w is not None:
            witnesses[name] = w
    tan2 = None
    if report.kahler is not None:
        tan2 = "inf" if report.kahler.tan2 is None else report.kahler.tan2.to_text()
    return {
        "N": report.dim,
        "weights": list(report.weights),
        "K": _invariant_record(report.K),
        "B2": _invariant_record(report.B2),
        "lambda2": report.lambda2.to_text(),
        "ranks": RanksRecord(dprime=report.ranks[0], dsecond=report.ranks[1]),
        "flags": FlagsRecord(
            harmonic=report.harmonic_residual_zero,
            eq31=_eq31(report),
            eq32=report.eq32_zero,
            kahler=report.kahler_flag,
        ),
        "isotropy": report.isotropy.to_text(),
        "l_in": report.l_in.to_text(),
        "l_out": report.l_out.to_text(),
        "kahler_tan2": tan2,
        "totally_geodesic": report.totally_geodesic,
        "linearly_full": report.linearly_full,
        "isotropy_rank_drop": report.isotropy.rank_drop_index,
        "witnesses": witnesses,
    }


def _mismatch_records(mismatches: Sequence[Mismatch]) -> List[MismatchRecord]:
    return [MismatchRecord(field=m.field, expected=m.expected, actual=m.actual) for m in mismatches]


def case_record(case: CatalogCase, outcome: VerificationOutcome) -> CaseRecord:
    fields: Dict[str, Any] = {"N": case.dim}
    if outcome.report is not None:
        fields.update(report_fields(outcome.report))
    return CaseRecord(
        id=case.id,
        passed=outcome.passed,
        mismatches=_mismatch_records(outcome.mismatches),
        citation=case.citation,
        conjugate=outcome.conjugate,
        **fields,
    )


def analysis_record(name: str, report: GeometryReport, mismatches: Sequence[Mismatch] = ()) -> CaseRecord:
    return CaseRecord(id=name, passed=not mismatches, mismatches=_mismatch_records(mismatches), **report_fields(report))


def dump_document(command: str, records: Sequence[CaseRecord]) -> str:
    doc = RunDocument(command=command, cases=list(records))
    return json.dumps(doc.model_dump(by_alias=True), indent=2, ensure_ascii=False) + "\n"


def write_document(path: str, command: str, records: Sequence[CaseRecord]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(dump_document(command, records))


def golden_records(cases: Sequence[CatalogCase]) -> List[GoldenRecord]:
    return [GoldenRecord(**golden_record(c)) for c in cases]


def dump_catalog(cases: Sequence[CatalogCase]) -> str:
    payload = {"schema_version": SCHEMA_VERSION, "cases": [r.model_dump() for r in golden_records(cases)]}
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


# --- text output --------------------------------------------------------------------


def _flag(value: Optional[bool]) -> str:
    if value is None:
        return "-"
    return "0" if value else "!=0"


def _short(inv: Optional[InvariantRecord]) -> str:
    if inv is None:
        return "-"
    return inv.value if inv.constant else "non-const"


def _table(header: Tuple[str, ...], rows: List[Tuple[str, ...]]) -> str:
    widths = [max(len(header[i]), *(len(r[i]) for r in rows)) if rows else len(header[i]) for i in range(len(header))]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for r in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
    return "\n".join(lines)


def format_verify_table(records: Sequence[CaseRecord]) -> str:
    """id, N, K, |B|^2, ranks, flags, PASS/FAIL."""
    header = ("id", "N", "K", "|B|^2", "ranks", "harm", "eq31", "eq32", "kahler", "isotropy", "result")
    rows = []
    for r in records:
        flags = r.flags
        rows.append((
            r.id + (" (conj)" if r.conjugate else ""),
            str(r.N),
            _short(r.K),
            _short(r.B2),
            f"({r.ranks.dprime},{r.ranks.dsecond})" if r.ranks else "-",
            _flag(flags.harmonic) if flags else "-",
            _flag(flags.eq31) if flags else "-",
            _flag(flags.eq32) if flags else "-",
            (flags.kahler or "-") if flags else "-",
            r.isotropy or "-",
            "PASS" if r.passed else "FAIL",
        ))
    return _table(header, rows)


def format_mismatches(records: Sequence[CaseRecord]) -> str:
    lines = []
    for r in records:
        for m in r.mismatches:
            lines.append(f"{r.id}: {m.field} expected {m.expected}, got {m.actual}")
        for name, w in r.witnesses.items():
            if w.point is not None:
                lines.append(f"{r.id}: {name} residual = {w.value} at z = {w.point}")
    return "\n".join(lines)


def format_analysis(record: CaseRecord) -> str:
    """Key/value listing of one analyzed map."""
    flags = record.flags
    pairs = [
        ("map", record.id),
        ("N", str(record.N)),
        ("weights", "(" + ", ".join(record.weights) + ")"),
        ("lambda2", record.lambda2 or "-"),
        ("K", record.K.value if record.K else "undefined"),
        ("K constant", str(record.K.constant).lower() if record.K else "-"),
        ("|B|^2", record.B2.value if record.B2 else "undefined"),
        ("|B|^2 constant", str(record.B2.constant).lower() if record.B2 else "-"),
        ("harmonic_residual_zero", str(flags.harmonic).lower()),
        ("eq31_zero", "-" if flags.eq31 is None else str(flags.eq31).lower()),
        ("eq32_zero", "-" if flags.eq32 is None else str(flags.eq32).lower()),
        ("ranks (d', d'')", f"({record.ranks.dprime}, {record.ranks.dsecond})"),
        ("kahler", flags.kahler or "-"),
        ("tan^2(theta/2)", record.kahler_tan2 or "-"),
        ("isotropy", record.isotropy or "-"),
        ("linearly_full", str(record.linearly_full).lower()),
        ("l_in", record.l_in or "-"),
        ("l_out", record.l_out or "-"),
    ]
    width = max(len(k) for k, _ in pairs)
    lines = [f"{k.ljust(width)}  {v}" for k, v in pairs]
    extra = format_mismatches([record])
    if extra:
        lines.append(extra)
    return "\n".join(lines)


def format_catalog(cases: Sequence[CatalogCase]) -> str:
    header = ("id", "N", "K", "|B|^2", "ranks", "kahler", "isotropy", "citation")
    rows = [
        (
            c.id,
            str(c.dim),
            c.expected_K or "computed",
            c.expected_B2 or "computed",
            f"({c.expected_ranks[0]},{c.expected_ranks[1]})",
            c.expected_kahler or "-",
            c.expected_isotropy or "-",
            c.citation,
        )
        for c in cases
    ]
    return _table(header, rows)


def format_point_values(point: str, values: Sequence[Tuple[str, Any]]) -> str:
    lines = [f"z = {point}"]
    for name, value in values:
        lines.append(f"{name} = {value if isinstance(value, str) else format_gaussian(value)}")
    return "\n".join(lines)
