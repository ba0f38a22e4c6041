"""
Command-line front end.

    python -m grassmann_engine verify [--all | --case ID ...] [--json PATH] [--jobs N] [--conjugate]
    python -m grassmann_engine analyze FILE [--json PATH] [--expect K=p/q] [--expect B2=p/q] [--theta POINT]
    python -m grassmann_engine catalog list [--json PATH]
    python -m grassmann_engine eval FILE --at POINT [--theta POINT]

Exit codes: 0 success, 1 verification or assertion failure, 2 user-input error,
3 internal error.
"""

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ValidationError, field_validator

from grassmann_engine import __version__
from grassmann_engine.catalog import Mismatch, all_cases, case_order, find_case, verify_case
from grassmann_engine.errors import DegenerateInputError, DslError, GrassmannEngineError, UnknownCaseError
from grassmann_engine.exact_algebra import GR_ONE, format_gaussian, gr_abs2
from grassmann_engine.invariant_engine import DEFAULT_ISOTROPY_BOUND, evaluate_report, geometry_report
from grassmann_engine.report_export import (
    CaseRecord,
    analysis_record,
    case_record,
    dump_catalog,
    format_analysis,
    format_catalog,
    format_mismatches,
    format_point_values,
    format_verify_table,
    write_document,
)
from grassmann_engine.spec_dsl import load_spec, parse_gaussian

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_INTERNAL = 3

JOBS_ENV = "GRASSMANN_ENGINE_JOBS"
LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"
EXPECT_NAMES = ("K", "B2")


def default_jobs() -> int:
    env = os.environ.get(JOBS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            logger.warning("ignoring non-integer %s=%r", JOBS_ENV, env)
    return os.cpu_count() or 1


class RunConfig(BaseModel):
    """Validated options of one CLI invocation."""
    command: str  # verify | analyze | catalog-list | eval
    cases: List[str] = []
    verify_all: bool = False
    input_path: Optional[str] = None
    json_path: Optional[str] = None
    jobs: int = 1
    isotropy_bound: int = DEFAULT_ISOTROPY_BOUND
    theta: Optional[str] = None
    expect: List[str] = []
    at: Optional[str] = None
    conjugate: bool = False
    verbosity: int = 0

    @field_validator("jobs")
    @classmethod
    def _jobs_positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("jobs must be >= 1")
        return v

    @field_validator("isotropy_bound")
    @classmethod
    def _bound_positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("isotropy bound must be >= 1")
        return v

    @field_validator("expect")
    @classmethod
    def _expect_shape(cls, items: List[str]) -> List[str]:
        for item in items:
            name, sep, _ = item.partition("=")
            if not sep or name.strip() not in EXPECT_NAMES:
                raise ValueError(f"--expect takes K=p/q or B2=p/q, got {item!r}")
        return items


def _theta_point(cfg: RunConfig):
    if cfg.theta is None:
        return None
    theta = parse_gaussian(cfg.theta)
    if gr_abs2(theta) != GR_ONE.x:
        raise DegenerateInputError(f"theta point {cfg.theta} is not on the unit circle")
    return theta


def _stdout(text: str) -> None:
    sys.stdout.write(text + "\n")


# --- verify -------------------------------------------------------------------------


def _verify_one(args: Tuple[str, Optional[str], int, bool]) -> Dict:
    """Worker: verify one case and return its record as plain data."""
    case_id, theta_text, bound, conjugate = args
    case = find_case(case_id)
    theta = parse_gaussian(theta_text) if theta_text is not None and case.takes_theta else None
    outcome = verify_case(case, theta=theta, isotropy_bound=bound, conjugate=conjugate)
    return case_record(case, outcome).model_dump(by_alias=True)


def run_verify(cfg: RunConfig) -> int:
    ids = [c.id for c in all_cases()] if cfg.verify_all or not cfg.cases else list(cfg.cases)
    for case_id in ids:
        find_case(case_id)
    _theta_point(cfg)
    tasks = [(case_id, cfg.theta, cfg.isotropy_bound, cfg.conjugate) for case_id in ids]
    jobs = min(cfg.jobs, len(tasks))
    logger.info("verifying %d case(s) with %d worker(s)", len(tasks), jobs)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            raw = list(pool.map(_verify_one, tasks))
    else:
        raw = [_verify_one(t) for t in tasks]
    records = sorted((CaseRecord.model_validate(r) for r in raw), key=lambda r: case_order(r.id))
    _stdout(format_verify_table(records))
    details = format_mismatches(records)
    if details:
        _stdout(details)
    if cfg.json_path:
        write_document(cfg.json_path, "verify", records)
    failed = [r.id for r in records if not r.passed]
    if failed:
        logger.warning("%d case(s) failed: %s", len(failed), ", ".join(failed))
        return EXIT_FAILURE
    return EXIT_OK


# --- analyze ------------------------------------------------------------------------


def _expectations(cfg: RunConfig) -> List[Tuple[str, str]]:
    out = []
    for item in cfg.expect:
        name, _, value = item.partition("=")
        out.append((name.strip(), format_gaussian(parse_gaussian(value.strip()))))
    return out


def _check_expectations(report, expectations: Sequence[Tuple[str, str]]) -> List[Mismatch]:
    mismatches = []
    for name, expected in expectations:
        inv = report.K if name == "K" else report.B2
        if inv is None:
            actual = "undefined"
        elif not inv.constant:
            actual = "non-constant"
        else:
            actual = format_gaussian(inv.constant_value())
        if actual != expected:
            mismatches.append(Mismatch(name, expected, actual))
    return mismatches


def run_analyze(cfg: RunConfig) -> int:
    expectations = _expectations(cfg)
    theta = _theta_point(cfg) or GR_ONE
    spec = load_spec(cfg.input_path, theta)
    report = geometry_report(spec.bundle, cfg.isotropy_bound)
    record = analysis_record(spec.name, report, _check_expectations(report, expectations))
    _stdout(format_analysis(record))
    if cfg.json_path:
        write_document(cfg.json_path, "analyze", [record])
    return EXIT_OK if record.passed else EXIT_FAILURE


# --- catalog list / eval ------------------------------------------------------------


def run_catalog_list(cfg: RunConfig) -> int:
    cases = all_cases()
    _stdout(format_catalog(cases))
    if cfg.json_path:
        with open(cfg.json_path, "w", encoding="utf-8") as f:
            f.write(dump_catalog(cases))
    return EXIT_OK


def run_eval(cfg: RunConfig) -> int:
    point = parse_gaussian(cfg.at)
    theta = _theta_point(cfg) or GR_ONE
    spec = load_spec(cfg.input_path, theta)
    report = geometry_report(spec.bundle, cfg.isotropy_bound)
    _stdout(format_point_values(format_gaussian(point), evaluate_report(report, point)))
    return EXIT_OK


COMMANDS = {
    "verify": run_verify,
    "analyze": run_analyze,
    "catalog-list": run_catalog_list,
    "eval": run_eval,
}


# --- argument parsing ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG logging")

    parser = argparse.ArgumentParser(
        prog="grassmann_engine",
        description="Exact verification of parallel conformal minimal immersions S^2 -> G(2,N).",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", parents=[common], help="verify catalog cases against expected invariants")
    verify.add_argument("--all", dest="verify_all", action="store_true", help="all 18 cases and the control")
    verify.add_argument("--case", dest="cases", action="append", default=[], metavar="ID")
    verify.add_argument("--json", dest="json_path", metavar="PATH")
    verify.add_argument("--jobs", type=int, default=None, help=f"worker processes (default: ${JOBS_ENV} or CPU count)")
    verify.add_argument("--isotropy-bound", type=int, default=DEFAULT_ISOTROPY_BOUND)
    verify.add_argument("--theta", metavar="POINT", help="unit phase point for the theta family")
    verify.add_argument("--conjugate", action="store_true", help="verify the conjugate maps")

    analyze = sub.add_parser("analyze", parents=[common], help="run the invariant pipeline on a .gsl script")
    analyze.add_argument("input_path", metavar="FILE")
    analyze.add_argument("--json", dest="json_path", metavar="PATH")
    analyze.add_argument("--expect", action="append", default=[], metavar="NAME=p/q")
    analyze.add_argument("--theta", metavar="POINT")
    analyze.add_argument("--isotropy-bound", type=int, default=DEFAULT_ISOTROPY_BOUND)

    catalog = sub.add_parser("catalog", help="inspect the catalog")
    catalog_sub = catalog.add_subparsers(dest="catalog_command", required=True)
    listing = catalog_sub.add_parser("list", parents=[common], help="list cases with expected values")
    listing.add_argument("--json", dest="json_path", metavar="PATH")

    ev = sub.add_parser("eval", parents=[common], help="exact values of lambda^2, K, |B|^2 at a chart point")
    ev.add_argument("input_path", metavar="FILE")
    ev.add_argument("--at", required=True, metavar="POINT")
    ev.add_argument("--theta", metavar="POINT")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    command = "catalog-list" if args.command == "catalog" else args.command
    values = {"command": command, "verbosity": args.verbose}
    for name in ("cases", "verify_all", "input_path", "json_path", "isotropy_bound", "theta", "expect", "at", "conjugate"):
        if getattr(args, name, None) is not None:
            values[name] = getattr(args, name)
    jobs = getattr(args, "jobs", None)
    values["jobs"] = default_jobs() if jobs is None else jobs
    return RunConfig(**values)


def configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def _user_error(message: str) -> int:
    sys.stderr.write(f"error: {message}\n")
    return EXIT_USAGE


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    configure_logging(args.verbose)
    try:
        cfg = config_from_args(args)
    except ValidationError as exc:
        return _user_error("; ".join(e["msg"] for e in exc.errors()))

    try:
        return COMMANDS[cfg.command](cfg)
    except DslError as exc:
        where = f"{cfg.input_path}:" if cfg.input_path else ""
        return _user_error(f"{where}{exc}")
    except (UnknownCaseError, DegenerateInputError) as exc:
        return _user_error(str(exc))
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        return _user_error(f"cannot read {exc.filename}: {exc.strerror}")
    except GrassmannEngineError:
        logger.exception("analysis failed")
        return EXIT_INTERNAL
    except Exception:
        logger.exception("internal error")
        return EXIT_INTERNAL
