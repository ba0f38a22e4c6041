"""
Weighted Hermitian C^N: vectors and matrices of rational functions, the weighted
inner product and adjoint, traces, commutators, span projections and generic rank.

A unitary-basis vector with components r_j*sqrt(w_j) is stored as (r_j) plus the weight
vector (w_j), so sqrt(binomial) factors never reach the scalar kernel.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Iterable, List, Sequence, Tuple

import numpy as np
from sympy.polys.domains import QQ, QQ_I
from sympy.polys.matrices import DomainMatrix

from grassmann_engine.errors import (
    DegenerateInputError,
    DependentSectionsError,
    SpaceMismatchError,
)
from grassmann_engine.exact_algebra import (
    ONE,
    POLY_RING,
    ZERO,
    BiPoly,
    RationalFunction,
    Scalar,
    _to_qq,
    common_denominator,
    conj_rf,
    d_z,
    d_zb,
    format_rational,
    polynomial_content,
    rf_sum,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WeightedSpace:
    """C^N with the diagonal Hermitian form sum_j w_j |x_j|^2."""

    weights: Tuple

    def __post_init__(self):
        if not self.weights:
            raise SpaceMismatchError("a weighted space needs at least one coordinate")
        for w in self.weights:
            if not w > 0:
                raise SpaceMismatchError(f"weights must be positive, got {format_rational(w)}")

    @classmethod
    def of(cls, weights: Iterable[Scalar]) -> "WeightedSpace":
        return cls(tuple(_to_qq(w) for w in weights))

    @classmethod
    def standard(cls, dim: int) -> "WeightedSpace":
        return cls((QQ.one,) * dim)

    @property
    def dim(self) -> int:
        return len(self.weights)

    def weight_scalar(self, j: int):
        return QQ_I.new(self.weights[j], QQ.zero)

    def describe(self) -> List[str]:
        return [format_rational(w) for w in self.weights]

    def __str__(self) -> str:
        return f"C^{self.dim}[{', '.join(self.describe())}]"


@dataclass(frozen=True)
class VecRF:
    """Section of the trivial bundle: N rational-function components over a weighted space."""

    space: WeightedSpace
    components: Tuple[RationalFunction, ...]

    def __post_init__(self):
        if len(self.components) != self.space.dim:
            raise SpaceMismatchError(
                f"{len(self.components)} components for a space of dimension {self.space.dim}"
            )

    @classmethod
    def of(cls, space: WeightedSpace, components: Iterable) -> "VecRF":
        return cls(space, tuple(c if isinstance(c, RationalFunction) else RationalFunction(c) for c in components))

    def __bool__(self) -> bool:
        return any(self.components)

    def __add__(self, other: "VecRF") -> "VecRF":
        _check_same_space(self.space, other.space)
        return VecRF(self.space, tuple(a + b for a, b in zip(self.components, other.components)))

    def __sub__(self, other: "VecRF") -> "VecRF":
        _check_same_space(self.space, other.space)
        return VecRF(self.space, tuple(a - b for a, b in zip(self.components, other.components)))

    def __neg__(self) -> "VecRF":
        return VecRF(self.space, tuple(-a for a in self.components))

    def scale(self, r: RationalFunction) -> "VecRF":
        return VecRF(self.space, tuple(r * a for a in self.components))

    def map(self, fn: Callable[[RationalFunction], RationalFunction]) -> "VecRF":
        return VecRF(self.space, tuple(fn(a) for a in self.components))

    def d_z(self) -> "VecRF":
        return self.map(d_z)

    def d_zb(self) -> "VecRF":
        return self.map(d_zb)

    def with_space(self, space: WeightedSpace) -> "VecRF":
        return VecRF(space, self.components)

    def __str__(self) -> str:
        return "[" + ", ".join(str(c) for c in self.components) + "]"


def _check_same_space(a: WeightedSpace, b: WeightedSpace) -> None:
    if a != b:
        raise SpaceMismatchError(f"space mismatch: {a} vs {b}")


def _common_space(vs: Sequence[VecRF]) -> WeightedSpace:
    if not vs:
        raise DegenerateInputError("empty list of sections")
    space = vs[0].space
    for v in vs[1:]:
        _check_same_space(space, v.space)
    return space


def winner(u: VecRF, v: VecRF) -> RationalFunction:
    """Weighted inner product sum_j u_j * conj(v_j) * w_j (linear in u)."""
    _check_same_space(u.space, v.space)
    return rf_sum(
        (a * conj_rf(b)).scale(u.space.weight_scalar(j))
        for j, (a, b) in enumerate(zip(u.components, v.components))
        if a and b
    )


def norm_sq(v: VecRF) -> RationalFunction:
    return winner(v, v)


def content_normalize(v: VecRF) -> VecRF:
    """
    Polynomial representative of the line through v: common denominator cleared,
    numerator gcd divided out, first nonzero component graded-lex monic.
    """
    if not v:
        raise DegenerateInputError("cannot normalize the zero section")
    common, g = polynomial_content(v.components)
    polys = []
    for c in v.components:
        polys.append(c.num * common.exquo(c.den) if c else POLY_RING.zero)
    polys = [p.exquo(g) if p else p for p in polys]
    lead = next(p for p in polys if p).LC
    return VecRF(
        v.space,
        tuple(RationalFunction._trusted(p.quo_ground(lead), POLY_RING.one) for p in polys),
    )


# --- matrices -----------------------------------------------------------------------


_D_Z = np.frompyfunc(d_z, 1, 1)
_D_ZB = np.frompyfunc(d_zb, 1, 1)
_CONJ = np.frompyfunc(conj_rf, 1, 1)


def _object_grid(rows: int, cols: int, fill=ZERO) -> np.ndarray:
    grid = np.empty((rows, cols), dtype=object)
    grid.fill(fill)
    return grid


def _common_form(grid: np.ndarray) -> Tuple[np.ndarray, BiPoly]:
    """Polynomial numerators over one common denominator: grid == polys / den."""
    den = common_denominator(e.den for e in grid.flat if e)
    factors = {}
    polys = np.empty(grid.shape, dtype=object)
    for index, e in np.ndenumerate(grid):
        if not e:
            polys[index] = POLY_RING.zero
            continue
        if e.den not in factors:
            factors[e.den] = den.exquo(e.den)
        polys[index] = e.num * factors[e.den]
    return polys, den


def _over(polys: np.ndarray, den: BiPoly) -> np.ndarray:
    """polys / den entrywise, one reduction per entry."""
    grid = np.empty(polys.shape, dtype=object)
    for index, p in np.ndenumerate(polys):
        grid[index] = RationalFunction(p, den) if p else ZERO
    return grid


def _grid_product(*grids: np.ndarray) -> np.ndarray:
    """Chained product of rational-function grids, summed over common denominators."""
    polys, den = _common_form(grids[0])
    for grid in grids[1:]:
        p, d = _common_form(grid)
        polys, den = polys @ p, den * d
    return _over(polys, den)


class MatRF:
    """N x N matrix of RationalFunction over a weighted space (numpy object array)."""

    __slots__ = ("space", "entries", "_common")

    def __init__(self, space: WeightedSpace, entries: np.ndarray):
        n = space.dim
        if entries.shape != (n, n):
            raise SpaceMismatchError(f"matrix shape {entries.shape} does not match dimension {n}")
        entries = entries.astype(object, copy=False)
        entries.flags.writeable = False
        self.space = space
        self.entries = entries
        self._common = None

    @classmethod
    def from_rows(cls, space: WeightedSpace, rows: Sequence[Sequence]) -> "MatRF":
        n = space.dim
        grid = _object_grid(n, n)
        for j, row in enumerate(rows):
            for l, value in enumerate(row):
                grid[j, l] = value if isinstance(value, RationalFunction) else RationalFunction(value)
        return cls(space, grid)

    @classmethod
    def zero(cls, space: WeightedSpace) -> "MatRF":
        return cls(space, _object_grid(space.dim, space.dim))

    @classmethod
    def identity(cls, space: WeightedSpace) -> "MatRF":
        grid = _object_grid(space.dim, space.dim)
        for j in range(space.dim):
            grid[j, j] = ONE
        return cls(space, grid)

    def __getitem__(self, index: Tuple[int, int]) -> RationalFunction:
        return self.entries[index]

    def _other(self, other: "MatRF") -> np.ndarray:
        _check_same_space(self.space, other.space)
        return other.entries

    def common_form(self) -> Tuple[np.ndarray, BiPoly]:
        """(polys, den) with entries == polys / den; computed once per matrix."""
        if self._common is None:
            self._common = _common_form(self.entries)
        return self._common

    def __add__(self, other: "MatRF") -> "MatRF":
        return MatRF(self.space, self.entries + self._other(other))

    def __sub__(self, other: "MatRF") -> "MatRF":
        return MatRF(self.space, self.entries - self._other(other))

    def __neg__(self) -> "MatRF":
        return MatRF(self.space, -self.entries)

    def __matmul__(self, other: "MatRF") -> "MatRF":
        _check_same_space(self.space, other.space)
        p, d = self.common_form()
        q, e = other.common_form()
        return MatRF(self.space, _over(p @ q, d * e))

    def scale(self, r: RationalFunction) -> "MatRF":
        if not r:
            return MatRF.zero(self.space)
        return MatRF(self.space, np.frompyfunc(lambda e: e * r, 1, 1)(self.entries))

    def apply(self, v: VecRF) -> VecRF:
        _check_same_space(self.space, v.space)
        return VecRF(
            self.space,
            tuple(rf_sum(e * c for e, c in zip(row, v.components) if e and c) for row in self.entries),
        )

    def d_z(self) -> "MatRF":
        return MatRF(self.space, _D_Z(self.entries))

    def d_zb(self) -> "MatRF":
        return MatRF(self.space, _D_ZB(self.entries))

    def conj(self) -> "MatRF":
        """Entrywise chart conjugation (no transpose)."""
        return MatRF(self.space, _CONJ(self.entries))

    def is_zero(self) -> bool:
        return not any(self.entries.flat)

    def nonzero_entries(self) -> List[Tuple[int, int, RationalFunction]]:
        n = self.space.dim
        return [(j, l, self.entries[j, l]) for j in range(n) for l in range(n) if self.entries[j, l]]

    def __eq__(self, other) -> bool:
        if not isinstance(other, MatRF):
            return NotImplemented
        return self.space == other.space and all(
            a == b for a, b in zip(self.entries.flat, other.entries.flat)
        )

    __hash__ = None

    def __str__(self) -> str:
        return "\n".join("[" + ", ".join(str(e) for e in row) + "]" for row in self.entries)


def mat_add(a: MatRF, b: MatRF) -> MatRF:
    return a + b


def mat_sub(a: MatRF, b: MatRF) -> MatRF:
    return a - b


def mat_mul(a: MatRF, b: MatRF) -> MatRF:
    return a @ b


def commutator(a: MatRF, b: MatRF) -> MatRF:
    return a @ b - b @ a


def trace(m: MatRF) -> RationalFunction:
    return rf_sum(m.entries.diagonal())


def trace_of_product(a: MatRF, b: MatRF) -> RationalFunction:
    """trace(a @ b) without forming the product."""
    _check_same_space(a.space, b.space)
    p, d = a.common_form()
    q, e = b.common_form()
    return RationalFunction(sum((p * q.T).flat, POLY_RING.zero), d * e)


def wadjoint(m: MatRF) -> MatRF:
    """(M^dagger)_{jl} = (w_l / w_j) * conj(M_{lj})."""
    space = m.space
    n = space.dim
    grid = _object_grid(n, n)
    for j in range(n):
        for l in range(n):
            entry = m.entries[l, j]
            if entry:
                ratio = QQ_I.new(space.weights[l] / space.weights[j], QQ.zero)
                grid[j, l] = conj_rf(entry).scale(ratio)
    return MatRF(space, grid)


def outer(u: VecRF, v: VecRF) -> MatRF:
    """outer(u, v)_{jl} = u_j * conj(v_l) * w_l, so outer(u, v) x = <x, v> u."""
    space = u.space
    _check_same_space(space, v.space)
    n = space.dim
    grid = _object_grid(n, n)
    for l in range(n):
        conj_v = conj_rf(v.components[l]).scale(space.weight_scalar(l))
        if not conj_v:
            continue
        for j in range(n):
            if u.components[j]:
                grid[j, l] = u.components[j] * conj_v
    return MatRF(space, grid)


# --- Gram matrices, projections, rank -----------------------------------------------


def gram_matrix(vs: Sequence[VecRF]) -> List[List[RationalFunction]]:
    """G[a][b] = winner(v_b, v_a) = sum_l conj(v_a,l) w_l v_b,l."""
    return [[winner(vb, va) for vb in vs] for va in vs]


def invert_small(g: List[List[RationalFunction]]) -> List[List[RationalFunction]]:
    """Inverse over the function field: adjugate/determinant for k <= 2, elimination otherwise."""
    k = len(g)
    if k == 1:
        if not g[0][0]:
            raise DependentSectionsError("zero section in span")
        return [[g[0][0].inverse()]]
    if k == 2:
        det = g[0][0] * g[1][1] - g[0][1] * g[1][0]
        if not det:
            raise DependentSectionsError("Gram determinant vanishes identically")
        inv_det = det.inverse()
        return [
            [g[1][1] * inv_det, -g[0][1] * inv_det],
            [-g[1][0] * inv_det, g[0][0] * inv_det],
        ]
    aug = [list(row) + [ONE if i == j else ZERO for j in range(k)] for i, row in enumerate(g)]
    for col in range(k):
        pivot = next((r for r in range(col, k) if aug[r][col]), None)
        if pivot is None:
            raise DependentSectionsError("Gram matrix is singular")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv_p = aug[col][col].inverse()
        aug[col] = [e * inv_p for e in aug[col]]
        for r in range(k):
            factor = aug[r][col]
            if r != col and factor:
                aug[r] = [e - factor * p for e, p in zip(aug[r], aug[col])]
    return [row[k:] for row in aug]


def projection_from_gram(vs: Sequence[VecRF], gram_inverse: List[List[RationalFunction]]) -> MatRF:
    """P = V G^{-1} V^dagger for spanning vectors V and a precomputed G^{-1}."""
    space = _common_space(vs)
    n, k = space.dim, len(vs)
    v_cols = _object_grid(n, k)
    v_dag = _object_grid(k, n)
    for a, v in enumerate(vs):
        for j, c in enumerate(v.components):
            v_cols[j, a] = c
            if c:
                v_dag[a, j] = conj_rf(c).scale(space.weight_scalar(j))
    g_inv = _object_grid(k, k)
    for a in range(k):
        for b in range(k):
            g_inv[a, b] = gram_inverse[a][b]
    return MatRF(space, _grid_product(v_cols, g_inv, v_dag))


def span_projection(vs: Sequence[VecRF]) -> MatRF:
    """Weighted-Hermitian orthogonal projection onto the span of vs."""
    _common_space(vs)
    return projection_from_gram(vs, invert_small(gram_matrix(vs)))


def _echelon_pivots(rows: List[List[RationalFunction]]) -> List[int]:
    """Row-reduce in place over the function field; returns pivot columns."""
    if not rows:
        return []
    n_rows, n_cols = len(rows), len(rows[0])
    pivots: List[int] = []
    piv_r = 0
    for piv_c in range(n_cols):
        if piv_r == n_rows:
            break
        i_row = next((r for r in range(piv_r, n_rows) if rows[r][piv_c]), None)
        if i_row is None:
            continue
        if i_row != piv_r:
            rows[piv_r], rows[i_row] = rows[i_row], rows[piv_r]
        inv_p = rows[piv_r][piv_c].inverse()
        for r in range(piv_r + 1, n_rows):
            fr = rows[r][piv_c]
            if not fr:
                continue
            frp = fr * inv_p
            rows[r] = [
                rows[r][c] - rows[piv_r][c] * frp if c >= piv_c else rows[r][c]
                for c in range(n_cols)
            ]
        pivots.append(piv_c)
        piv_r += 1
    return pivots


def generic_rank(m: MatRF) -> int:
    """Rank over the rational-function field; zero tests are syntactic."""
    rows = [list(row) for row in m.entries]
    return len(_echelon_pivots(rows))


def independent_subset(vs: Sequence[VecRF]) -> List[int]:
    """Indices of a generically independent subset spanning the same space as vs."""
    if not vs:
        return []
    n = vs[0].space.dim
    rows = [[v.components[j] for v in vs] for j in range(n)]
    return _echelon_pivots(rows)


def coefficient_rank(vs: Sequence[VecRF]) -> int:
    """
    Dimension of the constant subspace of C^N spanned by all values of the sections:
    rank over QQ(i) of the monomial coefficient vectors of the cleared numerators.
    """
    vectors = []
    for v in vs:
        if not v:
            continue
        common, _ = polynomial_content(v.components)
        polys = [c.num * common.exquo(c.den) if c else POLY_RING.zero for c in v.components]
        monomials = sorted({m for p in polys for m in p.keys()})
        for m in monomials:
            vectors.append([p.get(m, QQ_I.zero) for p in polys])
    if not vectors:
        return 0
    n = len(vectors[0])
    return DomainMatrix(vectors, (len(vectors), n), QQ_I).rank()


# --- exact isometries ---------------------------------------------------------------


def is_weighted_unitary(t: MatRF) -> bool:
    return wadjoint(t) @ t == MatRF.identity(t.space)


def permutation_isometry(space: WeightedSpace, perm: Sequence[int]) -> MatRF:
    """Maps e_j to e_perm[j]; weight-compatible iff perm preserves the weights."""
    n = space.dim
    if sorted(perm) != list(range(n)):
        raise SpaceMismatchError(f"{list(perm)} is not a permutation of {n} coordinates")
    grid = _object_grid(n, n)
    for j, target in enumerate(perm):
        grid[target, j] = ONE
    return MatRF(space, grid)


def phase_isometry(space: WeightedSpace, index: int, phase) -> MatRF:
    grid = MatRF.identity(space).entries.copy()
    grid[index, index] = RationalFunction(phase)
    return MatRF(space, grid)


def rotation_isometry(space: WeightedSpace, i: int, j: int, c: Scalar, s: Scalar) -> MatRF:
    """Real rotation (c, s; -s, c) on coordinates i, j (needs w_i = w_j and c^2 + s^2 = 1)."""
    grid = MatRF.identity(space).entries.copy()
    grid[i, i] = RationalFunction(c)
    grid[i, j] = RationalFunction(s)
    grid[j, i] = -RationalFunction(s)
    grid[j, j] = RationalFunction(c)
    return MatRF(space, grid)


def transform_sections(t: MatRF, vs: Sequence[VecRF]) -> List[VecRF]:
    return [t.apply(v) for v in vs]
