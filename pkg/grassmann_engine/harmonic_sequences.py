"""
Veronese sequences, the f-sequence recursion, bundle-level d' / d'' transforms,
L-values, Kaehler angle, isotropy order and the unintegrated Pluecker identity.

Bundle quantities are computed from the stored spanning sections V and the inverse
Gram matrix G^{-1} instead of from N x N products: with phi = V G^{-1} V^dagger,
(I - phi) d(phi) phi = C G^{-1} V^dagger where C = (I - phi) dV.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb, factorial
from typing import List, Optional, Sequence, Tuple

from sympy.polys.domains import QQ

from grassmann_engine.errors import (
    DegenerateInputError,
    ReducibleImageError,
    SpaceMismatchError,
    WeightConflictError,
)
from grassmann_engine.exact_algebra import (
    FUBINI,
    ONE,
    ZERO,
    RationalFunction,
    Scalar,
    _to_qq,
    conj_rf,
    log_laplacian,
    poly_from_terms,
    rf_sum,
)
from grassmann_engine.hermitian_ambient import (
    MatRF,
    VecRF,
    WeightedSpace,
    content_normalize,
    gram_matrix,
    independent_subset,
    invert_small,
    coefficient_rank,
    is_weighted_unitary,
    projection_from_gram,
    transform_sections,
    winner,
)

logger = logging.getLogger(__name__)

HOLOMORPHIC = "holomorphic"
ANTI_HOLOMORPHIC = "anti_holomorphic"
TOTALLY_REAL = "totally_real"
GENERAL = "general"


# --- Veronese sequence --------------------------------------------------------------


@dataclass(frozen=True)
class VeroneseSpec:
    n: int
    i: int

    def __post_init__(self):
        if self.n < 0 or not 0 <= self.i <= self.n:
            raise DegenerateInputError(f"Veronese index out of range: n={self.n}, i={self.i}")


@lru_cache(maxsize=None)
def veronese_space(n: int) -> WeightedSpace:
    """C^{n+1} with w_j = binomial(n, j)."""
    return WeightedSpace.of(comb(n, j) for j in range(n + 1))


@lru_cache(maxsize=None)
def veronese(n: int, i: int) -> VecRF:
    """
    V_i^{(n)} with the sqrt(binomial(n, j)) factors moved into the weights:
    component j = i!/(1+z*zb)^i * sum_k (-1)^k C(j, i-k) C(n-j, k) z^{j-i+k} zb^k.
    """
    VeroneseSpec(n, i)
    scale = RationalFunction(factorial(i)) / FUBINI ** i
    components = []
    for j in range(n + 1):
        terms = {}
        for k in range(0, i + 1):
            c = (-1) ** k * comb(j, i - k) * comb(n - j, k)
            if c:
                terms[(j - i + k, k)] = c
        components.append(RationalFunction(poly_from_terms(terms)) * scale)
    return VecRF(veronese_space(n), tuple(components))


def veronese_norm(n: int, i: int) -> RationalFunction:
    """Closed form |V_i^{(n)}|^2 = n! i!/(n-i)! (1+z*zb)^{n-2i}."""
    VeroneseSpec(n, i)
    return RationalFunction(factorial(n) * factorial(i) // factorial(n - i)) * FUBINI ** (n - 2 * i)


def veronese_curvature(n: int, i: int):
    """Constant Gauss curvature 4/(n + 2i(n-i)) of the i-th Veronese map into CP^n."""
    VeroneseSpec(n, i)
    if n == 0:
        raise DegenerateInputError("CP^0 carries no immersion")
    return QQ(4, n + 2 * i * (n - i))


def veronese_metric(n: int, i: int) -> RationalFunction:
    """Induced metric (n + 2i(n-i))/(1+z*zb)^2 of the i-th Veronese map."""
    VeroneseSpec(n, i)
    return RationalFunction(n + 2 * i * (n - i)) / FUBINI ** 2


# --- sections and chains ------------------------------------------------------------


def _next_raw(f: VecRF) -> VecRF:
    if not f:
        raise DegenerateInputError("next_section of the zero section")
    df = f.d_z()
    coeff = winner(df, f) / winner(f, f)
    return df - f.scale(coeff)


def next_section(f: VecRF) -> VecRF:
    """
    d(f) - (<d f, f>/|f|^2) f, the raw recursion output (orthogonal to f).
    For the Veronese chain this is exactly the next Veronese section.
    """
    nxt = _next_raw(f)
    if not nxt:
        raise DegenerateInputError("harmonic sequence terminates: next section is zero")
    return nxt


def backward_check(f_i: VecRF, f_prev: Optional[VecRF]) -> VecRF:
    """d''f_i + (|f_i|^2/|f_prev|^2) f_prev; zero exactly when the backward identity holds."""
    residual = f_i.d_zb()
    if f_prev is None or not f_prev:
        return residual
    return residual + f_prev.scale(winner(f_i, f_i) / winner(f_prev, f_prev))


@dataclass(frozen=True)
class SectionChain:
    """f_0, ..., f_k from the forward recursion, with cached |f_i|^2."""

    sections: Tuple[VecRF, ...]
    norms: Tuple[RationalFunction, ...]

    def __len__(self) -> int:
        return len(self.sections)

    def l_values(self) -> List[RationalFunction]:
        """gamma_i = |f_{i+1}|^2/|f_i|^2; the last entry is 0 (sequence terminated)."""
        out = []
        for i in range(len(self.sections)):
            if i + 1 < len(self.sections):
                out.append(self.norms[i + 1] / self.norms[i])
            else:
                out.append(ZERO)
        return out


def section_chain(f0: VecRF, length: Optional[int] = None) -> SectionChain:
    """Run next_section from f0 until the zero section or `length` sections."""
    sections = [f0]
    norms = [winner(f0, f0)]
    while length is None or len(sections) < length:
        nxt = _next_raw(sections[-1])
        if not nxt:
            break
        sections.append(nxt)
        norms.append(winner(nxt, nxt))
    logger.debug("section chain of length %d in %s", len(sections), f0.space)
    return SectionChain(tuple(sections), tuple(norms))


def chain_l_values(chain: SectionChain) -> List[RationalFunction]:
    return chain.l_values()


def chain_plucker_residual(chain: SectionChain, i: int) -> RationalFunction:
    """log-Laplacian of gamma_i minus (gamma_{i+1} - 2 gamma_i + gamma_{i-1})."""
    gammas = chain.l_values()
    if not 0 <= i < len(gammas) or not gammas[i]:
        raise ReducibleImageError(f"gamma_{i} vanishes; Pluecker identity undefined")
    prev = gammas[i - 1] if i > 0 else ZERO
    nxt = gammas[i + 1] if i + 1 < len(gammas) else ZERO
    return log_laplacian(gammas[i]) - (nxt - gammas[i] - gammas[i] + prev)


# --- padding and concatenation ------------------------------------------------------


def pad_end(v: VecRF, k: int) -> VecRF:
    """Append k zero coordinates of weight 1."""
    if k < 0:
        raise SpaceMismatchError(f"negative padding {k}")
    space = WeightedSpace(v.space.weights + (QQ.one,) * k)
    return VecRF(space, v.components + (ZERO,) * k)


def pad_front(v: VecRF, k: int) -> VecRF:
    """Prepend k zero coordinates of weight 1."""
    if k < 0:
        raise SpaceMismatchError(f"negative padding {k}")
    space = WeightedSpace((QQ.one,) * k + v.space.weights)
    return VecRF(space, (ZERO,) * k + v.components)


def concat(u: VecRF, v: VecRF) -> VecRF:
    """Direct sum (u, v); weight vectors are appended."""
    return VecRF(WeightedSpace(u.space.weights + v.space.weights), u.components + v.components)


def const_coord(space, index: int) -> VecRF:
    """Coordinate vector e_index in `space` (a WeightedSpace or a dimension)."""
    if isinstance(space, int):
        space = WeightedSpace.standard(space)
    if not 0 <= index < space.dim:
        raise SpaceMismatchError(f"coordinate {index} outside dimension {space.dim}")
    return VecRF(space, tuple(ONE if j == index else ZERO for j in range(space.dim)))


def const_vector(weight: Scalar, value: Scalar) -> VecRF:
    """One-coordinate constant section with the given weight: value * sqrt(weight) in the unitary basis."""
    return VecRF(WeightedSpace((_to_qq(weight),)), (RationalFunction(value),))


def unify_sections(vs: Sequence[VecRF]) -> List[VecRF]:
    """
    Put all sections into one weighted space. A coordinate where a section vanishes
    identically imposes no weight; sections nonzero on a coordinate must agree.
    """
    if not vs:
        raise DegenerateInputError("no sections")
    if all(v.space == vs[0].space for v in vs):
        return list(vs)
    n = vs[0].space.dim
    for v in vs[1:]:
        if v.space.dim != n:
            raise SpaceMismatchError(f"sections of dimension {n} and {v.space.dim} cannot be spanned together")
    merged = []
    for j in range(n):
        weight = None
        for v in vs:
            if not v.components[j]:
                continue
            w = v.space.weights[j]
            if weight is None:
                weight = w
            elif weight != w:
                raise WeightConflictError(f"coordinate {j} carries conflicting weights")
        merged.append(QQ.one if weight is None else weight)
    space = WeightedSpace(tuple(merged))
    return [v.with_space(space) for v in vs]


# --- bundles ------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BundleMap:
    """Projection onto a subbundle of the trivial C^N bundle, with its spanning sections."""

    space: WeightedSpace
    projection: MatRF
    rank: int
    sections: Tuple[VecRF, ...] = ()
    gram_inverse: Tuple[Tuple[RationalFunction, ...], ...] = field(default=(), repr=False)

    @classmethod
    def zero(cls, space: WeightedSpace) -> "BundleMap":
        return cls(space, MatRF.zero(space), 0)

    def __bool__(self) -> bool:
        return self.rank > 0

    def same_subbundle(self, other: "BundleMap") -> bool:
        return self.projection == other.projection


def bundle_from_sections(vs: Sequence[VecRF]) -> BundleMap:
    """Projection onto the span of generically independent sections."""
    unified = unify_sections(vs)
    normalized = [content_normalize(v) for v in unified]
    g_inv = invert_small(gram_matrix(normalized))
    projection = projection_from_gram(normalized, g_inv)
    space = normalized[0].space
    return BundleMap(
        space=space,
        projection=projection,
        rank=len(normalized),
        sections=tuple(normalized),
        gram_inverse=tuple(tuple(row) for row in g_inv),
    )


def _image_columns(b: BundleMap, derivative) -> List[VecRF]:
    # (I - phi) d(phi) v = (I - phi) dv because phi v = v
    out = []
    for v in b.sections:
        dv = derivative(v)
        out.append(dv - b.projection.apply(dv))
    return out


def _transform(b: BundleMap, derivative, label: str) -> BundleMap:
    if not b:
        return BundleMap.zero(b.space)
    columns = [c for c in _image_columns(b, derivative) if c]
    if not columns:
        logger.debug("%s image is zero; sequence terminates", label)
        return BundleMap.zero(b.space)
    keep = independent_subset(columns)
    return bundle_from_sections([columns[a] for a in keep])


def dprime_transform(b: BundleMap) -> BundleMap:
    """d'phi: projection onto the image of (I - phi) d(phi) phi."""
    return _transform(b, VecRF.d_z, "d'")


def dsecond_transform(b: BundleMap) -> BundleMap:
    """d''phi: projection onto the image of (I - phi) dbar(phi) phi."""
    return _transform(b, VecRF.d_zb, "d''")


def _image_gram(b: BundleMap, derivative) -> List[List[RationalFunction]]:
    return gram_matrix(_image_columns(b, derivative))


def _trace_product(a: Sequence[Sequence[RationalFunction]], h: Sequence[Sequence[RationalFunction]]) -> RationalFunction:
    k = len(a)
    return rf_sum(a[i][j] * h[j][i] for i in range(k) for j in range(k))


def l_out(b: BundleMap) -> RationalFunction:
    """trace(X X^dagger), X = (I - phi) d(phi) phi, evaluated as trace(G^{-1} H)."""
    if not b:
        return ZERO
    return _trace_product(b.gram_inverse, _image_gram(b, VecRF.d_z))


def l_in(b: BundleMap) -> RationalFunction:
    """trace(Y Y^dagger), Y = (I - phi) dbar(phi) phi."""
    if not b:
        return ZERO
    return _trace_product(b.gram_inverse, _image_gram(b, VecRF.d_zb))


@dataclass(frozen=True)
class KahlerStatus:
    flag: str
    tan2: Optional[RationalFunction]


def kahler_status(b: BundleMap) -> KahlerStatus:
    """tan^2(theta/2) = l_in/l_out with the holomorphic / anti / totally-real flags."""
    lo, li = l_out(b), l_in(b)
    if not lo and not li:
        raise DegenerateInputError("constant map has no Kaehler angle")
    if not li:
        return KahlerStatus(HOLOMORPHIC, ZERO)
    if not lo:
        return KahlerStatus(ANTI_HOLOMORPHIC, None)
    tan2 = li / lo
    return KahlerStatus(TOTALLY_REAL if tan2 == ONE else GENERAL, tan2)


def bundles_orthogonal(a: BundleMap, b: BundleMap) -> bool:
    """phi_a phi_b = 0, equivalently trace(phi_a phi_b) = 0 for projections."""
    return all(not winner(u, v) for u in a.sections for v in b.sections)


@dataclass(frozen=True)
class IsotropyOrder:
    kind: str  # "exact" | "geq" | "inf"
    value: Optional[int] = None
    rank_drop_index: Optional[int] = None

    def to_text(self) -> str:
        if self.kind == "inf":
            return "inf"
        if self.kind == "geq":
            return f"geq:{self.value}"
        return str(self.value)

    def at_least(self, k: int) -> bool:
        if self.kind == "inf":
            return True
        return self.value is not None and self.value >= k


def isotropy_order(b: BundleMap, bound: int = 6) -> IsotropyOrder:
    """Largest r <= bound with phi orthogonal to phi_1..phi_r along the d' sequence."""
    if bound < 1:
        raise ValueError("isotropy bound must be >= 1")
    current = b
    drop = None
    for i in range(1, bound + 1):
        current = dprime_transform(current)
        if not current:
            return IsotropyOrder("inf", None, drop)
        if drop is None and current.rank < b.rank:
            drop = i
            logger.debug("rank drops to %d at step %d of the d' sequence", current.rank, i)
        if not bundles_orthogonal(b, current):
            return IsotropyOrder("exact", i - 1, drop)
    return IsotropyOrder("geq", bound, drop)


def pluecker_e_top(b: BundleMap) -> RationalFunction:
    """
    Top elementary symmetric function of M = X X^dagger (e2 for rank 2, trace for rank 1),
    computed on the compressed k x k matrix T = G^{-1} H: ((tr T)^2 - tr T^2)/2 for k = 2.
    """
    if not b:
        raise ReducibleImageError("rank-0 bundle")
    h = _image_gram(b, VecRF.d_z)
    g_inv = b.gram_inverse
    k = b.rank
    if k == 1:
        return g_inv[0][0] * h[0][0]
    if k != 2:
        raise ValueError("Pluecker residual is implemented for rank 1 and 2")
    t = [[rf_sum(g_inv[i][m] * h[m][j] for m in range(k)) for j in range(k)] for i in range(k)]
    tr = t[0][0] + t[1][1]
    tr_sq = _trace_product(t, t)
    return (tr * tr - tr_sq) / RationalFunction(2)


def plucker_residual(b: BundleMap) -> RationalFunction:
    """
    dd-bar log e(M) - (L_{-1} - 2 L_0 + L_1) with L_0 = l_out(b), L_1 = l_out(d'b),
    L_{-1} = l_in(b); for holomorphic b this is the -2 L_0 + L_1 form.
    """
    e_top = pluecker_e_top(b)
    if not e_top:
        raise ReducibleImageError("e2 of the d' image vanishes identically")
    l0 = l_out(b)
    l1 = l_out(dprime_transform(b))
    lm1 = l_in(b)
    return log_laplacian(e_top) - (lm1 - l0 - l0 + l1)


# --- operations on whole bundles ----------------------------------------------------


def conjugate_bundle(b: BundleMap) -> BundleMap:
    """Complex-conjugate map: sections conjugated entrywise."""
    if not b:
        return b
    return bundle_from_sections([v.map(conj_rf) for v in b.sections])


def apply_isometry(b: BundleMap, t: MatRF) -> BundleMap:
    """Image of the bundle under a constant weighted-unitary matrix."""
    if not is_weighted_unitary(t):
        raise SpaceMismatchError("transformation is not unitary for the weighted form")
    if t.space != b.space:
        raise SpaceMismatchError(f"isometry on {t.space} applied to bundle in {b.space}")
    if not b:
        return b
    return bundle_from_sections(transform_sections(t, b.sections))


def is_linearly_full(b: BundleMap) -> bool:
    """The values of phi span all of C^N."""
    return coefficient_rank(b.sections) == b.space.dim

