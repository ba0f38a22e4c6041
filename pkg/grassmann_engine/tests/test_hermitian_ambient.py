"""Tests for the weighted Hermitian ambient space."""

import logging

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grassmann_engine.errors import DependentSectionsError, SpaceMismatchError
from grassmann_engine.exact_algebra import FUBINI, ONE, Z, ZB, ZERO, RationalFunction, gaussian, poly_from_terms
from grassmann_engine.harmonic_sequences import veronese, veronese_space
from grassmann_engine.hermitian_ambient import (
    MatRF,
    VecRF,
    WeightedSpace,
    coefficient_rank,
    commutator,
    content_normalize,
    generic_rank,
    independent_subset,
    invert_small,
    is_weighted_unitary,
    mat_add,
    mat_mul,
    mat_sub,
    norm_sq,
    outer,
    permutation_isometry,
    phase_isometry,
    rotation_isometry,
    span_projection,
    trace,
    trace_of_product,
    wadjoint,
    winner,
)

logger = logging.getLogger(__name__)

SETTINGS = settings(max_examples=20, deadline=None)

SPACE = WeightedSpace.of([1, 2, 1])
numerators = st.dictionaries(
    st.tuples(st.integers(0, 1), st.integers(0, 1)),
    st.tuples(st.integers(-3, 3), st.integers(-3, 3)).map(lambda p: gaussian(*p)),
    max_size=2,
).map(lambda terms: RationalFunction(poly_from_terms(terms)))
denominators = st.sampled_from([ONE, FUBINI, ZB + RationalFunction(2)])
entries = st.tuples(numerators, denominators).map(lambda pair: pair[0] / pair[1])
matrices = st.lists(entries, min_size=9, max_size=9).map(
    lambda flat: MatRF.from_rows(SPACE, [flat[0:3], flat[3:6], flat[6:9]])
)


class TestWeightedSpace:
    def test_describe(self):
        space = WeightedSpace.of([1, 2, 1])
        assert space.dim == 3
        assert space.describe() == ["1", "2", "1"]
        assert str(space) == "C^3[1, 2, 1]"

    def test_rejects_non_positive_weights(self):
        with pytest.raises(SpaceMismatchError):
            WeightedSpace.of([1, 0])
        with pytest.raises(SpaceMismatchError):
            WeightedSpace.of([])

    def test_component_count_checked(self):
        with pytest.raises(SpaceMismatchError):
            VecRF.of(WeightedSpace.standard(2), [ONE])


class TestInnerProduct:
    """The weighted form sum_j u_j conj(v_j) w_j."""

    def test_veronese_norms(self):
        assert winner(veronese(2, 0), veronese(2, 0)) == FUBINI ** 2
        assert winner(veronese(2, 1), veronese(2, 1)) == RationalFunction(2)

    def test_weights_enter_the_norm(self):
        space = WeightedSpace.of([1, 3])
        v = VecRF.of(space, [ONE, Z])
        assert norm_sq(v) == ONE + Z * ZB * 3

    def test_consecutive_veronese_sections_are_orthogonal(self):
        assert not winner(veronese(3, 1), veronese(3, 2))

    def test_space_mismatch_raises(self):
        with pytest.raises(SpaceMismatchError):
            winner(veronese(2, 0), VecRF.of(WeightedSpace.standard(3), [ONE, ZERO, ZERO]))

    def test_content_normalize(self):
        space = WeightedSpace.standard(2)
        v = VecRF.of(space, [Z * gaussian("1/2"), Z * Z * gaussian("1/3")])
        assert content_normalize(v).components == (ONE, Z * gaussian("2/3"))


class TestMatrices:
    """Adjoint, traces and projections."""

    def test_projection_is_idempotent_and_self_adjoint(self):
        p = span_projection([veronese(2, 0), veronese(2, 1)])
        assert p @ p == p
        assert wadjoint(p) == p
        assert trace(p) == RationalFunction(2)

    def test_projection_fixes_spanning_vectors(self):
        v = veronese(3, 1)
        p = span_projection([v])
        assert p.apply(v) == v

    def test_outer_acts_as_rank_one_map(self):
        u, v = veronese(2, 0), veronese(2, 1)
        m = outer(u, v)
        assert m.apply(v) == u.scale(winner(v, v))
        assert not m.apply(u)

    def test_trace_of_product(self):
        a = span_projection([veronese(2, 0)])
        b = span_projection([veronese(2, 1)])
        assert trace_of_product(a, b) == ZERO
        assert trace_of_product(a, a) == ONE

    def test_orthogonal_projections_sum_to_identity(self):
        p0, p1, p2 = (span_projection([veronese(2, i)]) for i in range(3))
        total = mat_add(mat_add(p0, p1), p2)
        assert total == MatRF.identity(p0.space)
        assert mat_sub(total, p2) == span_projection([veronese(2, 0), veronese(2, 1)])
        assert mat_mul(p0, p1).is_zero()

    def test_commutator_of_commuting_projections(self):
        a = span_projection([veronese(2, 0)])
        assert commutator(a, a).is_zero()

    def test_identity_and_zero(self):
        space = WeightedSpace.standard(2)
        assert MatRF.identity(space) @ MatRF.identity(space) == MatRF.identity(space)
        assert MatRF.zero(space).is_zero()
        assert not MatRF.identity(space).is_zero()

    def test_projection_ignores_choice_of_spanning_sections(self):
        a, b = veronese(2, 0), veronese(2, 1)
        p = span_projection([a, b])
        assert span_projection([a + b.scale(Z), b.scale(FUBINI)]) == p
        assert span_projection([b, a - b.scale(RationalFunction(gaussian(0, 3)))]) == p

    def test_trace_and_adjoint_of_veronese_projection(self):
        p = span_projection([veronese(3, 1), veronese(3, 2)])
        assert trace(p) == RationalFunction(2)
        assert trace_of_product(p, p) == RationalFunction(2)
        assert wadjoint(p) == p

    def test_dependent_gram_raises(self):
        v = veronese(2, 1)
        with pytest.raises(DependentSectionsError):
            span_projection([v, v.scale(Z)])
        with pytest.raises(DependentSectionsError):
            invert_small([[ZERO]])


class TestRank:
    def test_generic_rank_of_projection(self):
        p = span_projection([veronese(3, 0), veronese(3, 2)])
        assert generic_rank(p) == 2

    def test_independent_subset_skips_multiples(self):
        v, w = veronese(2, 0), veronese(2, 1)
        assert independent_subset([v, v.scale(FUBINI), w]) == [0, 2]

    def test_coefficient_rank(self):
        assert coefficient_rank([veronese(2, 0)]) == 3
        space = WeightedSpace.standard(3)
        line = VecRF.of(space, [ONE, Z, ZERO])
        assert coefficient_rank([line]) == 2


class TestIsometries:
    """Unitarity is checked for the weighted form, not the standard one."""

    def test_permutation_must_preserve_weights(self):
        space = veronese_space(2)
        assert is_weighted_unitary(permutation_isometry(space, [2, 1, 0]))
        assert not is_weighted_unitary(permutation_isometry(space, [1, 0, 2]))

    def test_phase(self):
        t = phase_isometry(veronese_space(2), 0, gaussian("3/5", "4/5"))
        assert is_weighted_unitary(t)
        assert not is_weighted_unitary(phase_isometry(veronese_space(2), 0, gaussian(2)))

    def test_rotation(self):
        space = WeightedSpace.standard(3)
        assert is_weighted_unitary(rotation_isometry(space, 0, 2, "3/5", "4/5"))
        logger.info("rotation on equal weights is unitary")

    def test_rotation_across_unequal_weights(self):
        assert not is_weighted_unitary(rotation_isometry(veronese_space(2), 0, 1, "3/5", "4/5"))

    def test_bad_permutation_raises(self):
        with pytest.raises(SpaceMismatchError):
            permutation_isometry(WeightedSpace.standard(2), [0, 0])


def _entrywise_product(a, b):
    n = a.space.dim
    rows = []
    for j in range(n):
        row = []
        for l in range(n):
            total = ZERO
            for m in range(n):
                total = total + a[j, m] * b[m, l]
            row.append(total)
        rows.append(row)
    return MatRF.from_rows(a.space, rows)


class TestMatrixLaws:
    """Products summed over common denominators agree with term-by-term sums."""

    @SETTINGS
    @given(matrices, matrices)
    def test_product_matches_entrywise_sum(self, a, b):
        product = a @ b
        assert product == _entrywise_product(a, b)
        assert trace_of_product(a, b) == trace(product)

    @SETTINGS
    @given(matrices, matrices)
    def test_adjoint_reverses_products(self, a, b):
        assert wadjoint(a @ b) == wadjoint(b) @ wadjoint(a)
        assert wadjoint(wadjoint(a)) == a

    @SETTINGS
    @given(matrices)
    def test_apply_matches_entrywise_sum(self, a):
        v = veronese(2, 1)
        expected = []
        for j in range(3):
            total = ZERO
            for m in range(3):
                total = total + a[j, m] * v.components[m]
            expected.append(total)
        assert a.apply(v).components == tuple(expected)
