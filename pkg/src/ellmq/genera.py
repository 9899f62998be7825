"""Characteristic cocycles from closed-form zeta-super-determinants.

All classes are exponentials of Pontryagin-character components.  With
``c_k = (2k)! * 2 zeta(2k) / (2k (2 pi i)^{2k})`` (so ``c_1 = -1/12`` and
``c_2 = 1/120``) one has::

    ahat(ph)   = exp(sum_k c_k ph_k)
    witten(ph) = exp(sum_k c_k ph_k E_2k(q))        (E normalised to 1 + O(q))

The Witten exponent is assembled from the lattice Eisenstein series
``2 zeta(2k) E_2k``; powers of pi cancel exactly.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

from .algebra import FormExpr, exp_nilpotent, trace_power
from .berezin import ThomForm, mq_thom_de_rham
from .errors import AlgebraMismatch, EllmqError, NotStringStructure
from .qseries import QSeries, eisenstein_lattice, series_exp, zeta_even
from .scalar import I, PI, Scalar

__all__ = [
    "PontryaginData",
    "EllipticCocycle",
    "DEFAULT_P1_FACTOR",
    "exponent_coefficient",
    "pontryagin_from_curvature",
    "ahat",
    "ahat_inverse",
    "witten",
    "witten_inverse",
    "witten_via_series_exp",
    "witten_modular",
    "witten_modular_inverse",
    "string_anomaly",
    "k_theory_thom",
    "elliptic_thom",
    "witten_product_side",
    "witten_exponential_side",
    "resolve_witten_convention",
]

# p_1 := DEFAULT_P1_FACTOR * ph_1 in the string-structure check dH = p_1
DEFAULT_P1_FACTOR = 2


def exponent_coefficient(k):
    """``(2k)! 2 zeta(2k) / (2k (2 pi i)^{2k})`` as an exact rational Scalar."""
    if k < 1:
        raise EllmqError("k must be >= 1", op="genera.exponent_coefficient")
    val = zeta_even(2 * k) * 2 * factorial(2 * k) / (2 * k * (PI * I * 2) ** (2 * k))
    assert val.pi_power == 0
    return val


def _lattice_factor(k):
    """``(2k)! / (2k (2 pi i)^{2k})``, the prefactor of the lattice series."""
    return Scalar(factorial(2 * k), 0, 0) / (2 * k * (PI * I * 2) ** (2 * k))


@dataclass(frozen=True, eq=False)
class PontryaginData:
    """Pontryagin-character components ``ph_k`` (degree ``4k``) of a bundle."""

    algebra: object
    rank: int
    ph: dict = field(default_factory=dict)
    anomaly_input: bool = False

    def __post_init__(self):
        if self.rank < 0:
            raise EllmqError("rank must be non-negative", op="genera.PontryaginData")
        clean = {}
        for k, v in self.ph.items():
            if not isinstance(k, int) or k < 1:
                raise EllmqError(f"ph index must be a positive integer, got {k!r}",
                                 op="genera.PontryaginData")
            v = self.algebra.coerce(v)
            if v.algebra is not self.algebra:
                raise AlgebraMismatch("ph component from another algebra",
                                      op="genera.PontryaginData")
            if not v:
                continue
            if v.degrees() != {4 * k}:
                raise EllmqError(f"ph_{k} must have pure degree {4 * k}, got {sorted(v.degrees())}",
                                 op="genera.PontryaginData")
            if not self.anomaly_input and v.d():
                raise EllmqError(f"ph_{k} is not closed", op="genera.PontryaginData")
            clean[k] = v
        object.__setattr__(self, "ph", clean)

    @classmethod
    def from_curvature(cls, F, kmax=None):
        alg = F.algebra
        if kmax is None:
            kmax = alg.degree_cap // 4
        ph = {k: pontryagin_from_curvature(F, k) for k in range(1, kmax + 1)}
        return cls(alg, F.dim, ph)

    def __getitem__(self, k):
        return self.ph.get(k, self.algebra.zero())

    def max_k(self):
        return max(self.ph, default=0)

    def negate(self):
        return PontryaginData(self.algebra, self.rank, {k: -v for k, v in self.ph.items()},
                              self.anomaly_input)

    def __neg__(self):
        return self.negate()

    def __add__(self, other):
        if other.algebra is not self.algebra:
            raise AlgebraMismatch("Pontryagin data over different algebras", op="genera.add")
        keys = set(self.ph) | set(other.ph)
        return PontryaginData(self.algebra, self.rank + other.rank,
                              {k: self[k] + other[k] for k in keys},
                              self.anomaly_input or other.anomaly_input)

    def __eq__(self, other):
        return isinstance(other, PontryaginData) and self.ph == other.ph

    def __hash__(self):
        return hash(frozenset(self.ph.items()))

    def to_dict(self):
        return {"rank": self.rank, "ph": {str(k): v.to_dict() for k, v in sorted(self.ph.items())}}


@dataclass(frozen=True, eq=False)
class EllipticCocycle:
    """A q-series of forms plus its exponent, split by Eisenstein weight.

    ``exponent[w]`` is the form multiplying the normalised ``E_w(q)`` in the
    logarithm of ``value``; the weight-2 entry is the string anomaly.
    """

    value: QSeries
    exponent: dict

    @property
    def N(self):
        return self.value.N

    @property
    def grading(self):
        return {2 * w: w for w in self.exponent}

    def anomaly(self):
        e = self.exponent.get(2)
        return e if e is not None else self.value[0].algebra.zero()

    def is_modular(self):
        return not self.anomaly()

    def __mul__(self, other):
        if isinstance(other, EllipticCocycle):
            exp = dict(self.exponent)
            for w, v in other.exponent.items():
                exp[w] = exp[w] + v if w in exp else v
            return EllipticCocycle(self.value * other.value,
                                   {w: v for w, v in exp.items() if v})
        return EllipticCocycle(self.value * other, self.exponent)

    def __eq__(self, other):
        if isinstance(other, EllipticCocycle):
            return self.value == other.value
        if isinstance(other, QSeries):
            return self.value == other
        return NotImplemented

    def __hash__(self):
        return hash(self.value)

    def __getitem__(self, n):
        return self.value[n]

    def to_dict(self):
        d = self.value.to_dict()
        d["quasi_modular"] = not self.is_modular()
        d["exponent"] = {str(w): v.to_dict() for w, v in sorted(self.exponent.items())}
        return d

    def __str__(self):
        return str(self.value)


def pontryagin_from_curvature(F, k):
    """``ph_k = Tr(F^{2k}) / (2 (2k)!)``."""
    if k < 1:
        raise EllmqError("k must be >= 1", op="genera.pontryagin_from_curvature")
    return trace_power(F, 2 * k) * Fraction(1, 2 * factorial(2 * k))


def _ahat_exponent(ph):
    out = ph.algebra.zero()
    for k, v in sorted(ph.ph.items()):
        out = out + v * exponent_coefficient(k)
    return out


def ahat(ph):
    return exp_nilpotent(_ahat_exponent(ph))


def ahat_inverse(ph):
    return ahat(ph.negate())


def _witten_from(ph, N, kmin):
    """``exp(sum_k ph_k T_k(q))`` with scalar series ``T_k`` built from lattice E_2k.

    The ``ph_k`` commute, so the exponential is the sum over multi-indices
    ``a`` of ``prod ph_k^{a_k} / a_k!`` times ``prod T_k^{a_k}``; only scalar
    q-series are multiplied.
    """
    alg = ph.algebra
    parts = []
    exponent = {}
    for k, v in sorted(ph.ph.items()):
        if k < kmin:
            continue
        T = eisenstein_lattice(2 * k, N) * _lattice_factor(k)
        parts.append((v, QSeries(T.coeffs, None)))
        exponent[2 * k] = v * exponent_coefficient(k)
    one = QSeries.constant(Scalar(1), N, None)
    terms = [(alg.one(), one)]
    for v, T in parts:
        grown = []
        for form, series in terms:
            j = 0
            f, s = form, series
            while f:
                grown.append((f, s))
                j += 1
                f = f * v * Fraction(1, j)
                s = s * T
        terms = grown
    coeffs = []
    for n in range(N + 1):
        acc = alg.zero()
        for form, series in terms:
            c = series[n]
            if c:
                acc = acc + form * c
        coeffs.append(acc)
    quasi = 2 in exponent
    return EllipticCocycle(QSeries(coeffs, 0, quasi), exponent)


def witten_via_series_exp(ph, N):
    """Same as :func:`witten` via the generic q-series exponential (slower)."""
    alg = ph.algebra
    X = [alg.zero() for _ in range(N + 1)]
    for k, v in sorted(ph.ph.items()):
        lat = eisenstein_lattice(2 * k, N)
        pref = _lattice_factor(k)
        for n in range(N + 1):
            c = lat[n] * pref
            if c:
                X[n] = X[n] + v * c
    return series_exp(QSeries(X, 0, bool(ph[1])))


def witten(ph, N):
    return _witten_from(ph, N, 1)


def witten_inverse(ph, N):
    return witten(ph.negate(), N)


def check_string_structure(ph, H, p1_factor=DEFAULT_P1_FACTOR):
    """Raise unless ``d(H) == p1_factor * ph_1`` with ``H`` a 3-form."""
    alg = ph.algebra
    H = alg.coerce(H)
    if H.algebra is not alg:
        raise AlgebraMismatch("H lives in another algebra", op="genera.witten_modular")
    if H and H.degrees() != {3}:
        raise NotStringStructure(f"not a rational string structure: H has degrees {sorted(H.degrees())}, "
                                 "expected 3", op="genera.witten_modular")
    if H.d() != ph[1] * p1_factor:
        raise NotStringStructure("not a rational string structure: dH != p1", op="genera.witten_modular")
    return H


def witten_modular(ph, H, N, p1_factor=DEFAULT_P1_FACTOR):
    """Witten class with the k = 1 (weight-2) term removed, given ``dH = p_1``."""
    check_string_structure(ph, H, p1_factor)
    return _witten_from(ph, N, 2)


def witten_modular_inverse(ph, H, N, p1_factor=DEFAULT_P1_FACTOR):
    return witten_modular(ph.negate(), -ph.algebra.coerce(H), N, p1_factor)


def string_anomaly(ph):
    """The form multiplying ``E_2`` in the Witten exponent: ``-ph_1 / 12``."""
    return ph[1] * exponent_coefficient(1)


def k_theory_thom(F, fiber):
    """de Rham Mathai-Quillen form times ``ahat_inverse(ph(F))``."""
    th = mq_thom_de_rham(F, fiber)
    if F.dim == 0:
        return th
    return th * ahat_inverse(PontryaginData.from_curvature(F))


def elliptic_thom(F, fiber, H=None, N=6, p1_factor=DEFAULT_P1_FACTOR):
    """de Rham Mathai-Quillen form times the inverse Witten factor.

    With ``H`` the modular factor ``Wit_H^{-1}`` is used instead.
    """
    th = mq_thom_de_rham(F, fiber)
    ph = PontryaginData.from_curvature(F)
    if H is None:
        factor = witten_inverse(ph, N)
    else:
        factor = witten_modular_inverse(ph, H, N, p1_factor)
    return ThomForm(th.value * factor.value, fiber)


# -- single-root power series (bivariate identity checks) ------------------


def _bimul(A, B, N, Z):
    out = [[Fraction(0)] * (Z + 1) for _ in range(N + 1)]
    for n1, row1 in enumerate(A):
        for j1, a in enumerate(row1):
            if not a:
                continue
            for n2 in range(N + 1 - n1):
                row2 = B[n2]
                dst = out[n1 + n2]
                for j2 in range(Z + 1 - j1):
                    b = row2[j2]
                    if b:
                        dst[j1 + j2] += a * b
    return out


def witten_product_side(c, z_order, N):
    """``(e^{z/2} - e^{-z/2}) prod_n (1 - q^n e^{cz})(1 - q^n e^{-cz}) / (1 - q^n)^2``.

    Returned as ``table[n][j]`` = coefficient of ``q^n z^j``, ``j <= z_order``.
    """
    c = Fraction(c)
    Z = z_order
    sinh2 = [Fraction(0)] * (Z + 1)
    for j in range(1, Z + 1, 2):
        sinh2[j] = 2 * Fraction(1, 2) ** j / factorial(j)
    out = [sinh2] + [[Fraction(0)] * (Z + 1) for _ in range(N)]
    cosh = [c ** j / factorial(j) if j % 2 == 0 else Fraction(0) for j in range(Z + 1)]
    for n in range(1, N + 1):
        # 1 - 2 q^n cosh(cz) + q^{2n}
        fac = [[Fraction(0)] * (Z + 1) for _ in range(N + 1)]
        fac[0][0] = Fraction(1)
        for j in range(Z + 1):
            fac[n][j] -= 2 * cosh[j]
        if 2 * n <= N:
            fac[2 * n][0] += 1
        # 1 / (1 - q^n)^2 = sum_m (m + 1) q^{nm}
        inv = [[Fraction(0)] * (Z + 1) for _ in range(N + 1)]
        for m in range(N // n + 1):
            inv[n * m][0] = Fraction(m + 1)
        out = _bimul(_bimul(out, fac, N, Z), inv, N, Z)
    return out


def witten_exponential_side(z_order, N):
    """``witten`` of one formal root ``z`` as ``table[n][j]`` (``j <= z_order``).

    Uses ``ph_k = z^{2k} / (2k)!`` on a single even degree-2 generator, so this
    exercises :func:`witten` itself.
    """
    from .algebra import Algebra

    alg = Algebra(2 * z_order)
    z = alg.add_generator("z", 2)
    ph = PontryaginData(alg, 2, {k: z ** (2 * k) * Fraction(1, factorial(2 * k))
                                 for k in range(1, z_order // 2 + 1)})
    W = witten(ph, N).value
    table = [[Fraction(0)] * (z_order + 1) for _ in range(N + 1)]
    for n, form in enumerate(W.coeffs):
        for m, v in form.terms.items():
            j = dict(m).get("z", 0) if m else 0
            table[n][j] = v.rational()
    return table


def resolve_witten_convention(z_order=10, N=10, candidates=(Fraction(1, 2), Fraction(1))):
    """Conventions ``c`` for which ``product_side * witten == z`` to the given order.

    The product side is expanded one order further in ``z`` since it starts at ``z``.
    """
    W = witten_exponential_side(z_order, N)
    target = [[Fraction(0)] * (z_order + 2) for _ in range(N + 1)]
    target[0][1] = Fraction(1)
    good = []
    for c in candidates:
        P = witten_product_side(c, z_order + 1, N)
        if _bimul(P, W, N, z_order + 1) == target:
            good.append(Fraction(c))
    return good
