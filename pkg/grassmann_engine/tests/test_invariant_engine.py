"""Tests for the invariant engine: metric, curvature, |B|^2 and the residuals."""

import logging

import pytest

from grassmann_engine.catalog import build_case
from grassmann_engine.errors import DegenerateMetricError, PoleError
from grassmann_engine.exact_algebra import FUBINI, ONE, Z, ZERO, RationalFunction, gaussian
from grassmann_engine.harmonic_sequences import (
    HOLOMORPHIC,
    bundle_from_sections,
    const_coord,
    veronese,
    veronese_curvature,
    veronese_metric,
)
from grassmann_engine.hermitian_ambient import MatRF, WeightedSpace, trace, wadjoint
from grassmann_engine.invariant_engine import (
    InvariantComputation,
    evaluate_report,
    gauss_curvature,
    geometry_report,
    harmonic_residual,
    is_constant,
    m_constants,
    matrix_witness,
    metric_lambda2,
    point_oracle,
    scalar_witness,
)

logger = logging.getLogger(__name__)


class TestHelpers:
    def test_is_constant(self):
        assert is_constant(RationalFunction(3))
        assert not is_constant(FUBINI)

    def test_point_oracle(self):
        assert point_oracle(lambda p: gaussian(2), gaussian(2))
        assert not point_oracle(lambda p: p, gaussian(2))

        def pole(p):
            raise PoleError("pole", "0")

        assert not point_oracle(pole, gaussian(2))

    def test_scalar_witness(self):
        assert scalar_witness(ZERO).zero
        check = scalar_witness(Z)
        assert not check.zero
        assert check.witness_point == "1/2"
        assert check.witness_value == "1/2"

    def test_matrix_witness(self):
        space = WeightedSpace.standard(2)
        assert matrix_witness(MatRF.zero(space)).zero
        check = matrix_witness(MatRF.from_rows(space, [[ZERO, ZERO], [ZERO, Z]]))
        assert check.entry == (1, 1)
        assert check.witness_value == "1/2"

    def test_m_constants(self):
        m1, m2 = m_constants(RationalFunction(2), RationalFunction(4), ONE)
        assert m1 == RationalFunction(-2)
        assert m2 == ONE


class TestRankOneBundles:
    """A single Veronese section recovers the Veronese metric and curvature."""

    @pytest.mark.parametrize("n,i", [(1, 0), (2, 1), (3, 1), (4, 2)])
    def test_veronese_metric_and_curvature(self, n, i):
        b = bundle_from_sections([veronese(n, i)])
        assert metric_lambda2(b) == veronese_metric(n, i)
        k = gauss_curvature(b)
        assert k.is_constant()
        assert k.constant_value().x == veronese_curvature(n, i)

    def test_veronese_is_harmonic(self):
        b = bundle_from_sections([veronese(3, 1)])
        assert harmonic_residual(b).is_zero()


class TestConicPair:
    """V0 + V1 of the conic: holomorphic with K=2, |B|^2=4."""

    def test_report(self, conic_pair):
        report = geometry_report(conic_pair)
        assert report.K.constant and report.K.to_text() == "2"
        assert report.K.oracle_agrees
        assert report.B2.constant and report.B2.to_text() == "4"
        assert report.B2.oracle_agrees
        assert report.harmonic_residual_zero
        assert report.eq31_first_zero and report.eq31_second_zero
        assert report.eq32_zero
        assert report.ranks == (1, 0)
        assert report.kahler_flag == HOLOMORPHIC
        assert report.isotropy.to_text() == "inf"
        assert report.linearly_full
        assert report.metric_consistent
        assert report.totally_geodesic is False
        assert report.weights == ("1", "2", "1")

    def test_m_constants_in_report(self, conic_pair):
        report = geometry_report(conic_pair)
        assert report.M1 == -(report.lambda2 * 2)
        assert report.M2 == report.lambda2

    def test_evaluate_report(self, conic_pair):
        report = geometry_report(conic_pair)
        values = dict(evaluate_report(report, gaussian("1/2")))
        assert values == {"lambda2": "32/25", "K": "2", "B2": "4"}

    def test_lambda2(self, conic_pair):
        assert metric_lambda2(conic_pair) == RationalFunction(2) / FUBINI ** 2

    def test_curvature_at_point(self, conic_pair):
        comp = InvariantComputation(conic_pair)
        assert comp.curvature_at(gaussian(1, 1)) == gaussian(2)
        assert comp.b_norm_sq_at(gaussian(1, 1)) == gaussian(4)


class TestOtherBundles:
    def test_totally_geodesic(self, line_plus_constant):
        report = geometry_report(line_plus_constant)
        assert report.K.to_text() == "4"
        assert report.B2.to_text() == "0"
        assert report.totally_geodesic
        assert report.eq32_zero

    def test_non_harmonic_map(self, non_harmonic):
        report = geometry_report(non_harmonic)
        assert not report.harmonic_residual_zero
        assert report.harmonic.entry is not None
        logger.info("harmonic residual witness: %s", report.harmonic)

    def test_constant_map_is_degenerate(self):
        b = bundle_from_sections([const_coord(3, 0), const_coord(3, 1)])
        report = geometry_report(b)
        assert report.degenerate
        assert report.K is None and report.B2 is None
        assert report.eq32 is None and report.kahler is None
        assert report.harmonic_residual_zero
        with pytest.raises(DegenerateMetricError):
            gauss_curvature(b)


class TestStructureIdentities:
    """A_z is trace-free and skew against A_zb, so P is trace-free too."""

    @pytest.mark.parametrize("case_id", ["T1.1-1", "T1.2-1", "T1.2-3", "T1.3-1", "T1.4-1"])
    def test_adjoint_and_traces(self, case_id):
        comp = InvariantComputation(build_case(case_id))
        assert wadjoint(comp.a_z) == -comp.a_zb
        assert trace(comp.a_z) == ZERO
        assert trace(comp.p_tensor) == ZERO
        logger.info("%s: lambda2 = %s", case_id, comp.lambda2)
