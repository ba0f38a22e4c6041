"""
Exact scalar kernel: Gaussian rationals, bivariate polynomials in z and zb,
gcd-reduced rational functions, the derivations d/dz and d/dzb, chart conjugation
and the logarithmic Laplacian.

Polynomials are sympy sparse ring elements over QQ_I with graded-lex order, so a
BiPoly is a canonical {(deg_z, deg_zb): coefficient} map with no stored zeros.
z and zb are independent formal variables; a function is real when conj_rf fixes it.
"""

import logging
from fractions import Fraction
from typing import Dict, Iterable, Tuple, Union

from sympy import Rational
from sympy.polys.domains import QQ, QQ_I
from sympy.polys.domains.gaussiandomains import GaussianRational
from sympy.polys.orderings import grlex
from sympy.polys.polyerrors import HeuristicGCDFailed
from sympy.polys.rings import PolyElement, ring

from grassmann_engine.errors import DegenerateInputError, PoleError

logger = logging.getLogger(__name__)

POLY_RING, Z_POLY, ZB_POLY = ring("z,zb", QQ_I, grlex)
_INTEGRAL_RING = POLY_RING.clone(domain=QQ_I.get_ring())
# Same polynomials with real coefficients; gcds there use the heuristic integer gcd.
_REAL_RING = POLY_RING.clone(domain=QQ)

BiPoly = PolyElement
Scalar = Union[int, Fraction, str, GaussianRational]

_QQ_TYPE = type(QQ.one)


# --- Gaussian rationals -------------------------------------------------------------


def _to_qq(value):
    if isinstance(value, _QQ_TYPE):
        return value
    return QQ.from_sympy(Rational(value))


def gaussian(re: Scalar = 0, im: Scalar = 0) -> GaussianRational:
    """Build re + im*i from ints, Fractions, 'p/q' strings or QQ elements."""
    if isinstance(re, GaussianRational) and im == 0:
        return re
    return QQ_I.new(_to_qq(re), _to_qq(im))


GR_ZERO = QQ_I.zero
GR_ONE = QQ_I.one
GR_I = QQ_I.new(QQ.zero, QQ.one)


def gr_add(a: GaussianRational, b: GaussianRational) -> GaussianRational:
    return a + b


def gr_sub(a: GaussianRational, b: GaussianRational) -> GaussianRational:
    return a - b


def gr_mul(a: GaussianRational, b: GaussianRational) -> GaussianRational:
    return a * b


def gr_div(a: GaussianRational, b: GaussianRational) -> GaussianRational:
    if not b:
        raise DegenerateInputError(f"division of {format_gaussian(a)} by zero")
    return a / b


def gr_conj(a: GaussianRational) -> GaussianRational:
    return a.new(a.x, -a.y)


def gr_abs2(a: GaussianRational):
    """|a|^2 as a QQ element."""
    return a.x * a.x + a.y * a.y


def format_rational(q) -> str:
    """'p/q' in lowest terms, or 'p' when the denominator is 1."""
    p, d = int(QQ.numer(q)), int(QQ.denom(q))
    return str(p) if d == 1 else f"{p}/{d}"


def format_gaussian(a: GaussianRational) -> str:
    """'p/q', 'r/si' or 'p/q+r/si'."""
    if not a.y:
        return format_rational(a.x)
    imag = format_rational(a.y) + "i"
    if not a.x:
        return imag
    sign = "" if imag.startswith("-") else "+"
    return f"{format_rational(a.x)}{sign}{imag}"


# --- polynomials --------------------------------------------------------------------


def poly_from_terms(terms: Dict[Tuple[int, int], Scalar]) -> BiPoly:
    """Polynomial from an exponent-pair map; zero coefficients are dropped."""
    return POLY_RING.from_dict({exp: gaussian(c) for exp, c in terms.items() if c})


def _graded_monic(p: BiPoly) -> BiPoly:
    lc = p.LC
    return p if lc == GR_ONE else p.quo_ground(lc)


def _has_real_coefficients(p: BiPoly) -> bool:
    return all(not c.y for c in p.values())


def _cancel(num: BiPoly, den: BiPoly) -> Tuple[BiPoly, BiPoly]:
    """num/den with the gcd divided out (not yet normalized)."""
    if _has_real_coefficients(num) and _has_real_coefficients(den):
        try:
            p, q = num.set_ring(_REAL_RING).cancel(den.set_ring(_REAL_RING))
            return p.set_ring(POLY_RING), q.set_ring(POLY_RING)
        except HeuristicGCDFailed:
            logger.debug("heuristic gcd failed, using the Gaussian-integer remainder sequence")
    return num.cancel(den)


def poly_gcd(p: BiPoly, q: BiPoly) -> BiPoly:
    """
    Greatest common divisor, graded-lex monic.

    Polynomials with real coefficients share their gcd with QQ[z, zb], where sympy uses
    the heuristic integer gcd. Otherwise denominators are cleared and the gcd runs over
    the Gaussian integers as a subresultant remainder sequence in the inner variable.
    """
    if not p and not q:
        raise DegenerateInputError("gcd of two zero polynomials")
    if not p:
        return _graded_monic(q)
    if not q:
        return _graded_monic(p)
    if p.is_ground or q.is_ground:
        return POLY_RING.one
    if _has_real_coefficients(p) and _has_real_coefficients(q):
        try:
            g = p.set_ring(_REAL_RING).gcd(q.set_ring(_REAL_RING))
            return _graded_monic(g.set_ring(POLY_RING))
        except HeuristicGCDFailed:
            logger.debug("heuristic gcd failed, using the Gaussian-integer remainder sequence")
    _, p_int = p.clear_denoms()
    _, q_int = q.clear_denoms()
    g = p_int.set_ring(_INTEGRAL_RING).gcd(q_int.set_ring(_INTEGRAL_RING))
    return _graded_monic(g.set_ring(POLY_RING))


def poly_lcm(p: BiPoly, q: BiPoly) -> BiPoly:
    if not p or not q:
        return POLY_RING.zero
    return _graded_monic((p * q).exquo(poly_gcd(p, q)))


def format_poly(p: BiPoly) -> str:
    """Terms in descending graded-lex order, each as coef*z^a*zb^b."""
    if not p:
        return "0"
    out = []
    for (a, b), c in p.terms():
        monomial = []
        if a:
            monomial.append("z" if a == 1 else f"z^{a}")
        if b:
            monomial.append("zb" if b == 1 else f"zb^{b}")
        if c.y and c.x:
            coef, negative = f"({format_gaussian(c)})", False
        else:
            text = format_gaussian(c)
            negative = text.startswith("-")
            coef = text[1:] if negative else text
        if monomial and coef == "1":
            body = "*".join(monomial)
        else:
            body = "*".join([coef] + monomial)
        if out:
            out.append(("-" if negative else "+") + body)
        else:
            out.append(("-" if negative else "") + body)
    return "".join(out)


# --- rational functions -------------------------------------------------------------


def _canonical(num: BiPoly, den: BiPoly) -> Tuple[BiPoly, BiPoly]:
    if not den:
        raise DegenerateInputError("rational function with zero denominator")
    if not num:
        return POLY_RING.zero, POLY_RING.one
    if den.is_ground:
        return num.quo_ground(den.LC), POLY_RING.one
    if not num.is_ground:
        num, den = _cancel(num, den)
    return _monic_pair(num, den)


def _monic_pair(num: BiPoly, den: BiPoly) -> Tuple[BiPoly, BiPoly]:
    lc = den.LC
    if lc == GR_ONE:
        return num, den
    return num.quo_ground(lc), den.quo_ground(lc)


class RationalFunction:
    """
    Reduced quotient num/den of bivariate polynomials over QQ_I.
    gcd(num, den) is a unit and den is graded-lex monic, so equality is syntactic.
    Instances are immutable.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: Union[BiPoly, Scalar] = 0, den: Union[BiPoly, Scalar, None] = None):
        num = _as_poly(num)
        den = POLY_RING.one if den is None else _as_poly(den)
        num, den = _canonical(num, den)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @classmethod
    def _trusted(cls, num: BiPoly, den: BiPoly) -> "RationalFunction":
        obj = object.__new__(cls)
        object.__setattr__(obj, "num", num)
        object.__setattr__(obj, "den", den)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("RationalFunction is immutable")

    # predicates

    def __bool__(self) -> bool:
        return bool(self.num)

    def is_constant(self) -> bool:
        return self.num.is_ground and self.den.is_ground

    def is_polynomial(self) -> bool:
        return self.den == POLY_RING.one

    def constant_value(self) -> GaussianRational:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return self.num.LC if self.num else GR_ZERO

    def __eq__(self, other) -> bool:
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        return hash((self.num, self.den))

    # arithmetic

    def __neg__(self) -> "RationalFunction":
        return RationalFunction._trusted(-self.num, self.den)

    def __add__(self, other) -> "RationalFunction":
        other = _coerce(other)
        if other is None:
            return NotImplemented
        if not other.num:
            return self
        if not self.num:
            return other
        one = POLY_RING.one
        if self.den == one and other.den == one:
            return RationalFunction._trusted(self.num + other.num, one)
        if other.den == one:
            # (a + c*b)/b stays reduced when a/b is
            return RationalFunction._trusted(self.num + other.num * self.den, self.den)
        if self.den == one:
            return RationalFunction._trusted(other.num + self.num * other.den, other.den)
        if self.den == other.den:
            return RationalFunction(self.num + other.num, self.den)
        return RationalFunction(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    __radd__ = __add__

    def __sub__(self, other) -> "RationalFunction":
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "RationalFunction":
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other) -> "RationalFunction":
        other = _coerce(other)
        if other is None:
            return NotImplemented
        if not self.num or not other.num:
            return ZERO
        one = POLY_RING.one
        a, b, c, d = self.num, self.den, other.num, other.den
        if b == one and d == one:
            return RationalFunction._trusted(a * c, one)
        # cross-cancel so the product is reduced without a full gcd
        if d != one and not a.is_ground:
            a, d = _cancel(a, d)
        if b != one and not c.is_ground:
            c, b = _cancel(c, b)
        num, den = _monic_pair(a * c, b * d)
        return RationalFunction._trusted(num, den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "RationalFunction":
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other) -> "RationalFunction":
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return other * self.inverse()

    def __pow__(self, exponent: int) -> "RationalFunction":
        if exponent == 0:
            if not self.num:
                raise DegenerateInputError("zero to the power zero")
            return ONE
        if exponent < 0:
            return self.inverse() ** (-exponent)
        num, den = _monic_pair(self.num ** exponent, self.den ** exponent)
        return RationalFunction._trusted(num, den)

    def inverse(self) -> "RationalFunction":
        if not self.num:
            raise DegenerateInputError("division by the zero function")
        num, den = _monic_pair(self.den, self.num)
        return RationalFunction._trusted(num, den)

    def scale(self, c: GaussianRational) -> "RationalFunction":
        if not c or not self.num:
            return ZERO
        return RationalFunction._trusted(self.num.mul_ground(c), self.den)

    # printing

    def __str__(self) -> str:
        if self.den == POLY_RING.one:
            return format_poly(self.num)
        return f"({format_poly(self.num)})/({format_poly(self.den)})"

    def __repr__(self) -> str:
        return f"RationalFunction({self})"

    def to_text(self) -> str:
        """Printable form used in JSON reports; constants print as 'p/q'."""
        if self.is_constant():
            return format_gaussian(self.constant_value())
        return str(self)


def _as_poly(value) -> BiPoly:
    if isinstance(value, PolyElement):
        return value
    return POLY_RING.ground_new(gaussian(value))


def _coerce(value):
    if isinstance(value, RationalFunction):
        return value
    if isinstance(value, PolyElement):
        return RationalFunction._trusted(value, POLY_RING.one)
    if isinstance(value, (int, Fraction, GaussianRational, _QQ_TYPE)):
        return RationalFunction(_as_poly(value))
    return None


ZERO = RationalFunction._trusted(POLY_RING.zero, POLY_RING.one)
ONE = RationalFunction._trusted(POLY_RING.one, POLY_RING.one)
Z = RationalFunction._trusted(Z_POLY, POLY_RING.one)
ZB = RationalFunction._trusted(ZB_POLY, POLY_RING.one)
R_SQUARED = Z * ZB  # z*zb
FUBINI = ONE + R_SQUARED  # 1 + z*zb


def constant(re: Scalar = 0, im: Scalar = 0) -> RationalFunction:
    return RationalFunction(gaussian(re, im))


def common_denominator(dens: Iterable[BiPoly]) -> BiPoly:
    """Graded-lex monic lcm of a family of denominators."""
    common = POLY_RING.one
    for den in set(dens):
        if den != POLY_RING.one and den != common:
            common = poly_lcm(common, den)
    return common


def rf_sum(values: Iterable[RationalFunction]) -> RationalFunction:
    """Sum over the lcm of the denominators, reduced once at the end."""
    by_den: Dict[BiPoly, BiPoly] = {}
    for v in values:
        if v.num:
            by_den[v.den] = by_den.get(v.den, POLY_RING.zero) + v.num
    by_den = {den: num for den, num in by_den.items() if num}
    if not by_den:
        return ZERO
    common = common_denominator(by_den)
    total = POLY_RING.zero
    for den, num in by_den.items():
        total = total + num * common.exquo(den)
    return RationalFunction(total, common)


def rf_add(r: RationalFunction, s: RationalFunction) -> RationalFunction:
    return r + s


def rf_sub(r: RationalFunction, s: RationalFunction) -> RationalFunction:
    return r - s


def rf_mul(r: RationalFunction, s: RationalFunction) -> RationalFunction:
    return r * s


def rf_div(r: RationalFunction, s: RationalFunction) -> RationalFunction:
    return r / s


def _derivative(r: RationalFunction, gen: BiPoly) -> RationalFunction:
    if r.is_constant():
        return ZERO
    dnum = r.num.diff(gen)
    if r.den == POLY_RING.one:
        return RationalFunction._trusted(dnum, POLY_RING.one)
    dden = r.den.diff(gen)
    return RationalFunction(dnum * r.den - r.num * dden, r.den ** 2)


def d_z(r: RationalFunction) -> RationalFunction:
    """Formal partial derivative in z (zb held fixed)."""
    return _derivative(r, Z_POLY)


def d_zb(r: RationalFunction) -> RationalFunction:
    """Formal partial derivative in zb (z held fixed)."""
    return _derivative(r, ZB_POLY)


def _conj_poly(p: BiPoly) -> BiPoly:
    return POLY_RING.from_dict({(b, a): gr_conj(c) for (a, b), c in p.iterterms()})


def conj_rf(r: RationalFunction) -> RationalFunction:
    """Chart conjugation: swap z and zb and conjugate every coefficient."""
    if r.is_constant():
        return RationalFunction._trusted(_conj_poly(r.num), r.den)
    num, den = _monic_pair(_conj_poly(r.num), _conj_poly(r.den))
    return RationalFunction._trusted(num, den)


def is_real(r: RationalFunction) -> bool:
    return conj_rf(r) == r


def log_laplacian(u: RationalFunction) -> RationalFunction:
    """d_z(d_zb(u)/u), i.e. the mixed second derivative of log u; log is never formed."""
    if not u:
        raise DegenerateInputError("log_laplacian of the zero function")
    return d_z(d_zb(u) / u)


def _evaluate_poly(p: BiPoly, z0: GaussianRational, zb0: GaussianRational) -> GaussianRational:
    total = GR_ZERO
    for (a, b), c in p.iterterms():
        total = total + c * (z0 ** a) * (zb0 ** b)
    return total


def evaluate_at(r: RationalFunction, z0: GaussianRational) -> GaussianRational:
    """Exact value at the chart point z = z0, zb = conj(z0)."""
    zb0 = gr_conj(z0)
    den = _evaluate_poly(r.den, z0, zb0)
    if not den:
        raise PoleError(f"pole of {r} at z = {format_gaussian(z0)}", format_gaussian(z0))
    return _evaluate_poly(r.num, z0, zb0) / den


def polynomial_content(values: Iterable[RationalFunction]) -> Tuple[BiPoly, BiPoly]:
    """
    (common denominator, gcd of the cleared numerators) of a family of functions.
    Raises when every member is zero.
    """
    values = [v for v in values if v]
    if not values:
        raise DegenerateInputError("content of an all-zero family")
    common = POLY_RING.one
    for v in values:
        if v.den != POLY_RING.one:
            common = poly_lcm(common, v.den)
    numerators = [v.num * common.exquo(v.den) for v in values]
    g = numerators[0]
    for p in numerators[1:]:
        if g == POLY_RING.one:
            break
        g = poly_gcd(g, p)
    return common, _graded_monic(g)
