"""
Geometric invariants of a bundle map phi: A_z, A_zbar, lambda^2, Gauss curvature K,
the tensor P, |B|^2, the constants M1/M2, and the residuals of the harmonic-map
equation and of the two parallel-second-fundamental-form criteria.

Metric normalization: ds^2 = -tr(A_z A_zbar) dz dzbar.
"""

import logging
import time
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, List, Optional, Sequence, Tuple

from sympy.polys.domains.gaussiandomains import GaussianRational

from grassmann_engine.errors import DegenerateMetricError, PoleError
from grassmann_engine.exact_algebra import (
    RationalFunction,
    d_z,
    d_zb,
    evaluate_at,
    format_gaussian,
    gaussian,
    log_laplacian,
)
from grassmann_engine.harmonic_sequences import (
    BundleMap,
    IsotropyOrder,
    KahlerStatus,
    dprime_transform,
    dsecond_transform,
    is_linearly_full,
    isotropy_order,
    kahler_status,
    l_in,
    l_out,
)
from grassmann_engine.hermitian_ambient import (
    MatRF,
    commutator,
    trace_of_product,
    wadjoint,
)

logger = logging.getLogger(__name__)

DEFAULT_ISOTROPY_BOUND = 6

# Five distinct chart points for the constant-value oracle.
ORACLE_POINTS = (
    gaussian("1/2"),
    gaussian(1, 1),
    gaussian("-2/3", "1/5"),
    gaussian(3, -2),
    gaussian(0, "3/7"),
)

# Candidates for a point where a nonzero residual is visibly nonzero.
WITNESS_POINTS = (
    gaussian("1/2"),
    gaussian(1, 1),
    gaussian(2),
    gaussian("1/3", "-1/2"),
    gaussian(-1, 2),
    gaussian(0, 1),
    gaussian("5/7", "2/9"),
    gaussian(0),
)

_TWO = RationalFunction(2)
_FOUR = RationalFunction(4)
_FIVE = RationalFunction(5)
_EIGHT = RationalFunction(8)
_SIXTEEN = RationalFunction(16)


# --- result types -------------------------------------------------------------------


@dataclass(frozen=True)
class Invariant:
    """A scalar invariant with its syntactic constancy verdict and point-oracle check."""

    value: RationalFunction
    constant: bool
    oracle_agrees: Optional[bool] = None

    def constant_value(self) -> GaussianRational:
        return self.value.constant_value()

    def to_text(self) -> str:
        return self.value.to_text()


@dataclass(frozen=True)
class ResidualCheck:
    """Zero verdict for a residual; nonzero residuals carry one witness point and value."""

    zero: bool
    witness_point: Optional[str] = None
    witness_value: Optional[str] = None
    entry: Optional[Tuple[int, int]] = None


@dataclass(frozen=True)
class GeometryReport:
    dim: int
    weights: Tuple[str, ...]
    lambda2: RationalFunction
    K: Optional[Invariant]
    B2: Optional[Invariant]
    M1: Optional[RationalFunction]
    M2: Optional[RationalFunction]
    harmonic: ResidualCheck
    eq31_first: Optional[ResidualCheck]
    eq31_second: Optional[ResidualCheck]
    eq32: Optional[ResidualCheck]
    l_in: RationalFunction
    l_out: RationalFunction
    kahler: Optional[KahlerStatus]
    ranks: Tuple[int, int]
    isotropy: IsotropyOrder
    linearly_full: bool
    metric_consistent: bool

    @property
    def degenerate(self) -> bool:
        return not self.lambda2

    @property
    def harmonic_residual_zero(self) -> bool:
        return self.harmonic.zero

    @property
    def eq31_first_zero(self) -> Optional[bool]:
        return None if self.eq31_first is None else self.eq31_first.zero

    @property
    def eq31_second_zero(self) -> Optional[bool]:
        return None if self.eq31_second is None else self.eq31_second.zero

    @property
    def eq32_zero(self) -> Optional[bool]:
        return None if self.eq32 is None else self.eq32.zero

    @property
    def kahler_flag(self) -> Optional[str]:
        return None if self.kahler is None else self.kahler.flag

    @property
    def totally_geodesic(self) -> Optional[bool]:
        return None if self.B2 is None else not self.B2.value


# --- helpers ------------------------------------------------------------------------


def is_constant(r: RationalFunction) -> bool:
    """Both formal derivatives vanish syntactically."""
    return not d_z(r) and not d_zb(r)


def point_oracle(
    evaluator: Callable[[GaussianRational], GaussianRational],
    expected: GaussianRational,
    points: Sequence = ORACLE_POINTS,
) -> bool:
    """Evaluate at each chart point and compare with the symbolic constant."""
    for point in points:
        try:
            if evaluator(point) != expected:
                return False
        except (PoleError, ZeroDivisionError):
            return False
    return True


def _invariant(value: RationalFunction, evaluator: Callable[[GaussianRational], GaussianRational]) -> Invariant:
    constant = is_constant(value)
    oracle = point_oracle(evaluator, value.constant_value()) if constant else None
    return Invariant(value, constant, oracle)


def scalar_witness(r: RationalFunction) -> ResidualCheck:
    if not r:
        return ResidualCheck(True)
    for point in WITNESS_POINTS:
        try:
            value = evaluate_at(r, point)
        except PoleError:
            continue
        if value:
            return ResidualCheck(False, format_gaussian(point), format_gaussian(value))
    return ResidualCheck(False)


def matrix_witness(m: MatRF) -> ResidualCheck:
    entries = m.nonzero_entries()
    if not entries:
        return ResidualCheck(True)
    j, l, first = entries[0]
    scalar = scalar_witness(first)
    return ResidualCheck(False, scalar.witness_point, scalar.witness_value, (j, l))


# --- the computation ----------------------------------------------------------------


class InvariantComputation:
    """
    Lazily computed invariants of one bundle. Each quantity is computed at most once,
    so geometry_report and the single-quantity helpers share the work.
    """

    def __init__(self, bundle: BundleMap):
        self.bundle = bundle
        self.space = bundle.space

    @cached_property
    def phi(self) -> MatRF:
        return self.bundle.projection

    @cached_property
    def two_phi_minus_identity(self) -> MatRF:
        return self.phi + self.phi - MatRF.identity(self.space)

    @cached_property
    def d_phi(self) -> MatRF:
        return self.phi.d_z()

    @cached_property
    def dbar_phi(self) -> MatRF:
        # phi is self-adjoint, so dbar(phi) = d(phi)^dagger
        return wadjoint(self.d_phi)

    @cached_property
    def a_z(self) -> MatRF:
        return self.two_phi_minus_identity @ self.d_phi

    @cached_property
    def a_zb(self) -> MatRF:
        return self.two_phi_minus_identity @ self.dbar_phi

    @cached_property
    def lambda2(self) -> RationalFunction:
        return -trace_of_product(self.a_z, self.a_zb)

    def _require_metric(self) -> RationalFunction:
        if not self.lambda2:
            raise DegenerateMetricError("lambda^2 vanishes identically (constant map)")
        return self.lambda2

    @cached_property
    def curvature_numerator(self) -> RationalFunction:
        return -(_TWO * log_laplacian(self._require_metric()))

    @cached_property
    def gauss_curvature(self) -> RationalFunction:
        return self.curvature_numerator / self._require_metric()

    def curvature_at(self, point: GaussianRational) -> GaussianRational:
        """K at a point from the unreduced quotient -2 dd-bar(lambda^2) / lambda^2."""
        return evaluate_at(self.curvature_numerator, point) / evaluate_at(self.lambda2, point)

    @cached_property
    def p_tensor(self) -> MatRF:
        lam = self._require_metric()
        return self.a_z.scale(lam.inverse()).d_z()

    @cached_property
    def p_adjoint(self) -> MatRF:
        return wadjoint(self.p_tensor)

    @cached_property
    def b_norm_sq(self) -> RationalFunction:
        self._require_metric()
        return _FOUR * trace_of_product(self.p_tensor, self.p_adjoint)

    def b_norm_sq_at(self, point: GaussianRational) -> GaussianRational:
        """4 tr(P P^dagger) summed entry by entry at a point."""
        n = self.space.dim
        total = gaussian(0)
        for j in range(n):
            for l in range(n):
                a, b = self.p_tensor[j, l], self.p_adjoint[l, j]
                if a and b:
                    total = total + evaluate_at(a, point) * evaluate_at(b, point)
        return total * gaussian(4)

    @cached_property
    def bracket(self) -> MatRF:
        """[A_z, A_zbar]."""
        return commutator(self.a_z, self.a_zb)

    @cached_property
    def harmonic_residual(self) -> MatRF:
        return self.a_z.d_zb() - self.bracket

    @cached_property
    def parallel_residual_31(self) -> Tuple[MatRF, MatRF]:
        lam = self._require_metric()
        k, b2 = self.gauss_curvature, self.b_norm_sq
        first = self.a_zb.scale(lam * (_TWO * k + b2)) + commutator(self.a_zb, self.bracket).scale(_FOUR)
        # [[A_zbar, A_z], P] = -[[A_z, A_zbar], P]
        second = self.p_tensor.scale(lam * (b2 / _FOUR - k)) - commutator(self.bracket, self.p_tensor)
        return first, second

    @cached_property
    def parallel_residual_32(self) -> RationalFunction:
        lam = self._require_metric()
        k, b2 = self.gauss_curvature, self.b_norm_sq
        p, p_dag = self.p_tensor, self.p_adjoint
        leading = lam / _SIXTEEN * b2 * (_EIGHT * k + b2)
        if p.is_zero():
            return leading
        cross = trace_of_product(commutator(self.a_z, p), commutator(self.a_zb, p_dag))
        mixed = trace_of_product(self.bracket, commutator(p, p_dag))
        return leading - _TWO * cross + _FIVE * mixed

    @cached_property
    def l_out(self) -> RationalFunction:
        return l_out(self.bundle)

    @cached_property
    def l_in(self) -> RationalFunction:
        return l_in(self.bundle)


def a_z(b: BundleMap) -> MatRF:
    """A_z = (2 phi - I) d(phi)."""
    return InvariantComputation(b).a_z


def a_zb(b: BundleMap) -> MatRF:
    """A_zbar = (2 phi - I) dbar(phi)."""
    return InvariantComputation(b).a_zb


def metric_lambda2(b: BundleMap) -> RationalFunction:
    return InvariantComputation(b).lambda2


def gauss_curvature(b: BundleMap) -> RationalFunction:
    return InvariantComputation(b).gauss_curvature


def p_tensor(b: BundleMap) -> MatRF:
    return InvariantComputation(b).p_tensor


def b_norm_sq(b: BundleMap) -> RationalFunction:
    return InvariantComputation(b).b_norm_sq


def m_constants(
    k: RationalFunction, b2: RationalFunction, lambda2: RationalFunction
) -> Tuple[RationalFunction, RationalFunction]:
    """M1 = -lambda^2 (2K + |B|^2)/4, M2 = lambda^2 (K - |B|^2/4)."""
    m1 = -(lambda2 * (_TWO * k + b2)) / _FOUR
    m2 = lambda2 * (k - b2 / _FOUR)
    return m1, m2


def harmonic_residual(b: BundleMap) -> MatRF:
    """dbar(A_z) - [A_z, A_zbar]."""
    return InvariantComputation(b).harmonic_residual


def parallel_residual_31(b: BundleMap) -> Tuple[MatRF, MatRF]:
    return InvariantComputation(b).parallel_residual_31


def parallel_residual_32(b: BundleMap) -> RationalFunction:
    return InvariantComputation(b).parallel_residual_32


def geometry_report(b: BundleMap, isotropy_bound: int = DEFAULT_ISOTROPY_BOUND) -> GeometryReport:
    """Run the whole pipeline on one bundle."""
    started = time.perf_counter()
    comp = InvariantComputation(b)
    lam = comp.lambda2
    logger.debug("lambda^2 = %s (N=%d)", lam, b.space.dim)
    harmonic = matrix_witness(comp.harmonic_residual)

    curvature = norm = m1 = m2 = None
    eq31_first = eq31_second = eq32 = None
    if lam:
        curvature = _invariant(comp.gauss_curvature, comp.curvature_at)
        norm = _invariant(comp.b_norm_sq, comp.b_norm_sq_at)
        m1, m2 = m_constants(curvature.value, norm.value, lam)
        first, second = comp.parallel_residual_31
        eq31_first, eq31_second = matrix_witness(first), matrix_witness(second)
        eq32 = scalar_witness(comp.parallel_residual_32)
    else:
        logger.warning("degenerate metric: curvature and parallelism are undefined")

    kahler = kahler_status(b) if lam else None
    ranks = (dprime_transform(b).rank, dsecond_transform(b).rank)
    isotropy = isotropy_order(b, isotropy_bound)
    if isotropy.rank_drop_index is not None:
        logger.warning("rank drop at step %d of the isotropy walk", isotropy.rank_drop_index)

    report = GeometryReport(
        dim=b.space.dim,
        weights=tuple(b.space.describe()),
        lambda2=lam,
        K=curvature,
        B2=norm,
        M1=m1,
        M2=m2,
        harmonic=harmonic,
        eq31_first=eq31_first,
        eq31_second=eq31_second,
        eq32=eq32,
        l_in=comp.l_in,
        l_out=comp.l_out,
        kahler=kahler,
        ranks=ranks,
        isotropy=isotropy,
        linearly_full=is_linearly_full(b),
        metric_consistent=lam == comp.l_in + comp.l_out,
    )
    logger.debug("geometry report for N=%d in %.2fs", b.space.dim, time.perf_counter() - started)
    return report


def evaluate_report(report: GeometryReport, point: GaussianRational) -> List[Tuple[str, str]]:
    """Exact values of lambda^2, K and |B|^2 at a chart point ("undefined" for a degenerate map)."""
    rows = [("lambda2", format_gaussian(evaluate_at(report.lambda2, point)))]
    for name, invariant in (("K", report.K), ("B2", report.B2)):
        value = "undefined" if invariant is None else format_gaussian(evaluate_at(invariant.value, point))
        rows.append((name, value))
    return rows
