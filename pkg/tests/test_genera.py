from fractions import Fraction
from math import factorial

import mpmath
import pytest

from ellmq.algebra import Algebra, CurvatureMatrix, trace_power
from ellmq.berezin import GaussianFiber, gaussian_fiber_integrate, mq_thom_de_rham
from ellmq.errors import EllmqError, NotStringStructure
from ellmq.genera import (
    EllipticCocycle,
    PontryaginData,
    ahat,
    ahat_inverse,
    elliptic_thom,
    exponent_coefficient,
    k_theory_thom,
    pontryagin_from_curvature,
    string_anomaly,
    witten,
    witten_inverse,
    witten_modular,
    witten_modular_inverse,
    witten_product_side,
    witten_via_series_exp,
)
from ellmq.qseries import QSeries, eisenstein_normalized, modular_decomposition
from ellmq.scalar import Scalar


@pytest.fixture
def alg():
    A = Algebra(8)
    A.add_generator("u", 4)
    A.add_generator("u2", 4)
    A.add_generator("v", 8)
    A.add_generator("w", 2)
    return A


def ph(alg, **kw):
    return PontryaginData(alg, 2, {int(k[1:]): alg.gen(v) if isinstance(v, str) else v
                                   for k, v in kw.items()})


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
def test_exponent_coefficient_matches_bernoulli(k):
    # (2k)! 2 zeta(2k) / (2k (2 pi i)^{2k}) = -B_{2k} / (2k)
    expected = -mpmath.bernoulli(2 * k) / (2 * k)
    c = exponent_coefficient(k)
    assert c.pi_power == 0 and c.is_rational()
    assert abs(float(c.rational()) - float(expected)) < 1e-15
    if k <= 2:
        assert c.rational() == [Fraction(-1, 12), Fraction(1, 120)][k - 1]


def test_pontryagin_examples(alg):
    w = alg.gen("w")
    assert pontryagin_from_curvature(CurvatureMatrix.zero(alg, 2), 1) == alg.zero()
    F = CurvatureMatrix.from_upper(alg, 2, [w])
    # Tr(F^2) = -2 w^2 and 2 * 2! = 4
    assert pontryagin_from_curvature(F, 1) == -(w ** 2) / 2
    assert pontryagin_from_curvature(F, 2) == w ** 4 / 24
    assert pontryagin_from_curvature(F, 2) == trace_power(F, 4) / 48


def test_pontryagin_data_validation(alg):
    with pytest.raises(EllmqError, match="degree 4"):
        PontryaginData(alg, 2, {1: alg.gen("w")})
    alg.add_generator("h", 3, differential=alg.gen("u"))
    alg.add_generator("s", 1)
    odd_pair = alg.gen("h") * alg.gen("s")
    with pytest.raises(EllmqError, match="not closed"):
        PontryaginData(alg, 2, {1: odd_pair})
    assert PontryaginData(alg, 2, {1: odd_pair}, anomaly_input=True)[1] == odd_pair


def test_ahat_examples(alg):
    u, v = alg.gen("u"), alg.gen("v")
    assert ahat(PontryaginData(alg, 0)) == alg.one()
    assert ahat(ph(alg, k1="u")) == 1 - u / 12 + u * u / 288
    assert ahat(ph(alg, k2="v")) == 1 + v / 120
    assert ahat_inverse(ph(alg, k1="u")) == 1 + u / 12 + u * u / 288
    p = ph(alg, k1="u", k2="v")
    assert ahat(p) * ahat_inverse(p) == alg.one()


def test_witten_examples():
    A = Algebra(4)
    u = A.add_generator("u", 4)
    p = PontryaginData(A, 2, {1: u})
    W = witten(p, 2)
    expected = QSeries([1 - u / 12, u * 2, u * 6], 0)
    assert W.value == expected
    assert W.value == QSeries.constant(A.one(), 2) - QSeries([u * c.rational() for c in
                                                         eisenstein_normalized(2, 2).coeffs], 0) / 12
    assert witten(PontryaginData(A, 0), 3).value == QSeries.constant(A.one(), 3)
    assert (W * witten(p.negate(), 2)).value == QSeries.constant(A.one(), 2)
    assert witten_inverse(p, 2).value == witten(p.negate(), 2).value
    assert W.value.quasi and not W.is_modular()


def test_witten_matches_generic_series_exponential(alg):
    p = ph(alg, k1="u", k2="v")
    p = p + ph(alg, k1="u2")
    assert witten(p, 5).value == witten_via_series_exp(p, 5)


def test_witten_modular_examples(alg):
    u, v = alg.gen("u"), alg.gen("v")
    H = alg.add_generator("H", 3, differential=u * 2)
    assert witten_modular(ph(alg, k1="u"), H, 3).value == QSeries.constant(alg.one(), 3)
    W = witten_modular(ph(alg, k1="u", k2="v"), H, 1)
    # c_2 = 1/120 and E_4 = 1 + 240 q
    assert W.value == QSeries([1 + v / 120, v * 2], 0)
    assert W.is_modular() and not W.value.quasi
    with pytest.raises(NotStringStructure, match="not a rational string structure"):
        witten_modular(ph(alg, k1="u"), alg.zero(), 1)
    alg.add_generator("H1", 3, differential=u)
    witten_modular(ph(alg, k1="u"), alg.gen("H1"), 1, p1_factor=1)
    with pytest.raises(NotStringStructure):
        witten_modular(ph(alg, k1="u"), alg.gen("H1"), 1)
    with pytest.raises(NotStringStructure, match="degrees"):
        witten_modular(ph(alg, k1="u"), alg.gen("w"), 1)


def test_witten_modular_inverse(alg):
    u, v = alg.gen("u"), alg.gen("v")
    H = alg.add_generator("H", 3, differential=u * 2)
    p = ph(alg, k1="u", k2="v")
    prod = witten_modular(p, H, 3) * witten_modular_inverse(p, H, 3)
    assert prod.value == QSeries.constant(alg.one(), 3)


def test_string_anomaly(alg):
    u = alg.gen("u")
    assert string_anomaly(ph(alg, k2="v")) == alg.zero()
    assert string_anomaly(ph(alg, k1="u")) == -u / 12
    assert witten(ph(alg, k1="u"), 2).anomaly() == -u / 12
    H = alg.add_generator("H", 3, differential=u * 2)
    assert witten_modular(ph(alg, k1="u", k2="v"), H, 2).anomaly() == alg.zero()


def test_multiplicativity(alg):
    p, q = ph(alg, k1="u", k2="v"), ph(alg, k1="u2")
    assert ahat(p + q) == ahat(p) * ahat(q)
    assert witten(p + q, 4) == (witten(p, 4) * witten(q, 4)).value
    Hp = alg.add_generator("Hp", 3, differential=alg.gen("u") * 2)
    Hq = alg.add_generator("Hq", 3, differential=alg.gen("u2") * 2)
    lhs = witten_modular(p + q, Hp + Hq, 4)
    assert lhs == (witten_modular(p, Hp, 4) * witten_modular(q, Hq, 4)).value


def test_anomaly_free_witten_is_modular_coefficientwise():
    A = Algebra(12)
    a = A.add_generator("a", 8)
    b = A.add_generator("b", 12)
    c = A.add_generator("c", 4)
    W = witten(PontryaginData(A, 6, {2: a, 3: b}), 8).value
    monos = {m for coeff in W.coeffs for m in coeff.terms}
    for m in monos:
        series = QSeries([coeff.terms.get(m, Scalar(0)) for coeff in W.coeffs])
        weight = {"a": 4, "b": 6}
        w = sum(weight[n] * e for n, e in m)
        assert modular_decomposition(series, w) is not None
    # with ph_1 present the E_2 coefficient is not in the modular ring
    W1 = witten(PontryaginData(A, 2, {1: c}), 8).value
    series = QSeries([coeff.terms.get((("c", 1),), Scalar(0)) for coeff in W1.coeffs])
    assert modular_decomposition(series, 2) is None


def test_elliptic_cocycle_serialization(alg):
    W = witten(ph(alg, k1="u"), 1)
    d = W.to_dict()
    assert d["quasi_modular"] is True and set(d["exponent"]) == {"2"}
    assert isinstance(W, EllipticCocycle) and W.grading == {4: 2}


def test_k_theory_thom(alg):
    fib = GaussianFiber.create(alg, 2)
    F0 = CurvatureMatrix.zero(alg, 2)
    assert k_theory_thom(F0, fib) == mq_thom_de_rham(F0, fib)
    F = CurvatureMatrix.from_upper(alg, 2, [alg.gen("w")])
    th = k_theory_thom(F, fib)
    assert gaussian_fiber_integrate(th, fib) == ahat_inverse(PontryaginData.from_curvature(F))
    fib0 = GaussianFiber.create(alg, 0, prefix="z")
    assert k_theory_thom(CurvatureMatrix.zero(alg, 0), fib0).value == alg.one()


def test_elliptic_thom(alg):
    fib = GaussianFiber.create(alg, 2)
    th0 = elliptic_thom(CurvatureMatrix.zero(alg, 2), fib, N=3)
    dx = alg.product(["dx1", "dx2"])
    assert th0.value == QSeries([dx, alg.zero(), alg.zero(), alg.zero()])
    F = CurvatureMatrix.from_upper(alg, 2, [alg.gen("w")])
    th = elliptic_thom(F, fib, N=3)
    assert gaussian_fiber_integrate(th, fib) == witten_inverse(PontryaginData.from_curvature(F), 3).value


def test_elliptic_thom_with_string_structure_is_plain_thom():
    A = Algebra(6)  # ph_2 (degree 8) is truncated away
    w = A.add_generator("w", 2)
    H = A.add_generator("H", 3, differential=-(w ** 2))
    fib = GaussianFiber.create(A, 2)
    F = CurvatureMatrix.from_upper(A, 2, [w])
    th = elliptic_thom(F, fib, H=H, N=2)
    plain = mq_thom_de_rham(F, fib).value
    assert th.value == QSeries([plain, A.zero(), A.zero()])


def test_product_side_at_q_zero_is_two_sinh():
    P = witten_product_side(1, 9, 0)
    for j in range(10):
        expected = Fraction(0) if j % 2 == 0 else 2 * Fraction(1, 2) ** j / factorial(j)
        assert P[0][j] == expected


def test_witten_inverse_mirror_examples():
    A = Algebra(4)
    u = A.add_generator("u", 4)
    p = PontryaginData(A, 2, {1: u})
    assert witten_inverse(PontryaginData(A, 0), 2).value == QSeries.constant(A.one(), 2)
    # 1 + u (1 - 24 q - 72 q^2) / 12
    assert witten_inverse(p, 2).value == QSeries([1 + u / 12, u * -2, u * -6], 0)
    assert (witten_inverse(p, 2) * witten(p, 2)).value == QSeries.constant(A.one(), 2)
