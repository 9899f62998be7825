"""Numerical checks of the zeta-regularisation scheme.

Continuation work (Hurwitz zeta, spectral zeta derivatives) runs in mpmath at
``ELLMQ_PRECISION`` significant digits (default 30).  The conditionally
convergent lattice sums are plain float64 sums, vectorised per row, with an
Euler-Maclaurin correction for the truncated inner sum.

Reports are dicts ``{test, parameters, value, reference, abs_error}``.
"""

import cmath
import math
import os
from contextlib import contextmanager

import mpmath
import numpy as np

from .errors import EllmqError
from .qseries import bernoulli, divisor_sigma, eta_fractional, eta_product, QSeries
from .scalar import Scalar

__all__ = [
    "working_precision",
    "hurwitz_zeta",
    "hurwitz_zeta_derivative",
    "circle_spectral_zeta",
    "zeta_det_shifted_circle",
    "circle_det_closed_form",
    "zeta_det_unshifted_circle",
    "z_eta_identity_check",
    "em_tail",
    "ordered_lattice_sum",
    "e2_ordered_lattice_sum",
    "lattice_eisenstein_q",
    "e2_anomaly_check",
    "report",
]

DEFAULT_DPS = 30


def working_precision():
    raw = os.environ.get("ELLMQ_PRECISION")
    if raw is None:
        return DEFAULT_DPS
    try:
        dps = int(raw)
    except ValueError:
        raise EllmqError(f"ELLMQ_PRECISION must be an integer, got {raw!r}",
                         op="zeta_lab.working_precision") from None
    if dps < 15:
        raise EllmqError("ELLMQ_PRECISION must be at least 15", op="zeta_lab.working_precision")
    return dps


@contextmanager
def _precision(dps):
    with mpmath.workdps(dps if dps is not None else working_precision()):
        yield


def report(test, parameters, value, reference):
    err = abs(value - reference)
    return {"test": test, "parameters": parameters, "value": value,
            "reference": reference, "abs_error": float(err)}


# -- Hurwitz zeta ----------------------------------------------------------


def _em_hurwitz(s, a):
    dps = mpmath.mp.dps
    M = max(2 * dps, int(abs(s.imag)) + 10)
    total = mpmath.mpf(0)
    for k in range(M):
        total += (k + a) ** (-s)
    x = M + a
    total += x ** (1 - s) / (s - 1) + x ** (-s) / 2
    # Bernoulli tail: sum_j B_2j/(2j)! * s(s+1)...(s+2j-2) x^{-s-2j+1}
    rising = s
    xp = x ** (-s - 1)
    x2 = x * x
    eps = mpmath.mpf(10) ** (-dps - 5)
    for j in range(1, 4 * dps):
        b = bernoulli(2 * j)
        term = mpmath.mpf(b.numerator) / b.denominator / mpmath.factorial(2 * j) * rising * xp
        total += term
        if abs(term) < eps * abs(total):
            break
        rising *= (s + 2 * j - 1) * (s + 2 * j)
        xp /= x2
    return total


def hurwitz_zeta(s, a, dps=None):
    """``sum_{k>=0} (k + a)^{-s}`` continued in ``s`` (principal powers)."""
    with _precision(dps):
        s = mpmath.mpmathify(s)
        a = mpmath.mpmathify(a)
        if s == 1:
            raise EllmqError("hurwitz_zeta has a pole at s = 1", op="zeta_lab.hurwitz_zeta")
        if a.imag == 0 and a.real <= 0 and a.real == int(a.real):
            raise EllmqError(f"hurwitz_zeta needs a not a nonpositive integer, got {a}",
                             op="zeta_lab.hurwitz_zeta")
        return +_em_hurwitz(s, a)


def hurwitz_zeta_derivative(s, a, dps=None):
    """``d/ds hurwitz_zeta(s, a)`` by high-precision numerical differentiation."""
    with _precision(dps):
        return mpmath.diff(lambda t: _em_hurwitz(t, mpmath.mpmathify(a)), mpmath.mpmathify(s))


# -- circle spectra --------------------------------------------------------


def _circle_offset(r, lam):
    a = mpmath.mpmathify(r) * mpmath.mpmathify(lam) / (2 * mpmath.pi)
    a0 = a - mpmath.floor(mpmath.re(a))
    if abs(a0) < mpmath.mpf(10) ** (-mpmath.mp.dps // 2) or abs(a0 - 1) < mpmath.mpf(10) ** (-mpmath.mp.dps // 2):
        raise EllmqError("eigenvalue hits zero: lambda lies in (2 pi / r) Z",
                         op="zeta_lab.zeta_det_shifted_circle")
    return a0


def circle_spectral_zeta(s, r, lam, dps=None):
    """``sum_n (2 pi n / r + lam)^{-s}`` over all integers, principal branch."""
    with _precision(dps):
        if r <= 0:
            raise EllmqError("circle radius must be positive", op="zeta_lab.circle_spectral_zeta")
        s = mpmath.mpmathify(s)
        a = _circle_offset(r, lam)
        scale = (2 * mpmath.pi / r) ** (-s)
        # negative eigenvalues -(2 pi / r)(m + 1 - a): phase +pi if Im a >= 0, else -pi
        sign = -1 if mpmath.im(a) >= 0 else 1
        return scale * (_em_hurwitz(s, a) + mpmath.exp(sign * 1j * mpmath.pi * s) * _em_hurwitz(s, 1 - a))


def zeta_det_shifted_circle(r, lam, dps=None):
    """Regularised determinant ``exp(-zeta'(0))`` of ``{2 pi n / r + lam : n in Z}``.

    Equivalently ``exp(Z'(0))`` for ``Z(s) = sum lambda^s``.
    """
    with _precision(dps):
        _circle_offset(r, lam)  # zero-mode check at the working precision
        dz = mpmath.diff(lambda t: circle_spectral_zeta(t, r, lam, mpmath.mp.dps), 0)
        return +mpmath.exp(-dz)


def circle_det_closed_form(r, lam, dps=None):
    """``2i sin(r lam / 2) * phase`` with the frozen phase ``-exp(i r lam / 2)``.

    The product equals ``1 - exp(i r lam)``.
    """
    with _precision(dps):
        x = mpmath.mpmathify(r) * mpmath.mpmathify(lam) / 2
        return +(2j * mpmath.sin(x) * (-mpmath.exp(1j * x)))


def zeta_det_unshifted_circle(r, dps=None):
    """Regularised determinant of ``{2 pi n / r : n != 0}``; analytically ``-i r``."""
    with _precision(dps):
        def zeta(s):
            return (2 * mpmath.pi / r) ** (-s) * (1 + mpmath.exp(-1j * mpmath.pi * s)) * _em_hurwitz(s, 1)
        return +mpmath.exp(-mpmath.diff(zeta, 0))


# -- eta identity ----------------------------------------------------------


def z_eta_identity_check(N, series=None):
    """Check ``prod (1 - q^k) = q^{-1/24} eta(q)`` exactly to order ``N``.

    ``eta`` is taken from its sparse fractional-exponent expansion; the shift by
    ``-1/24`` is tracked separately and must land on integer exponents.
    """
    from fractions import Fraction

    lhs = eta_product(N) if series is None else series.truncate(N)
    shift = Fraction(1, 24)
    eta = eta_fractional(N + shift)
    coeffs = [0] * (N + 1)
    for e, c in eta.items():
        k = e - shift
        if k.denominator != 1:
            return {"test": "z_eta_identity", "parameters": {"N": N}, "passed": False,
                    "first_offset": None, "reason": f"non-integral exponent {k}"}
        coeffs[int(k)] += c
    rhs = QSeries([Scalar(c) for c in coeffs], None)
    off = lhs.first_difference(rhs)
    return {"test": "z_eta_identity", "parameters": {"N": N}, "passed": off is None,
            "first_offset": off}


# -- ordered lattice sums --------------------------------------------------


def em_tail(c, w, M, terms=6):
    """``sum_{m > M} (m + c)^{-w}`` by Euler-Maclaurin (vectorised over ``c``)."""
    x = M + np.asarray(c, dtype=complex)
    total = x ** (1 - w) / (w - 1) - x ** (-w) / 2
    coef = 1.0
    for j in range(1, terms + 1):
        # f^{(2j-1)}(x) = (-1)^{2j-1} w (w+1) ... (w+2j-2) x^{-w-2j+1}
        k = 2 * j - 1
        coef_k = math.prod(range(w, w + k))
        b = bernoulli(2 * j)
        total -= float(b) / math.factorial(2 * j) * (-coef_k) * x ** (-w - k)
    return total


def _row_sums(c, w, M, scale=1.0):
    """``sum_m (m + c)^{-w}`` over all integers m (inner sum, truncated + tail)."""
    m = np.arange(-M, M + 1, dtype=float)
    inner = np.sum((m[None, :] + c[:, None]) ** (-w), axis=1)
    sign = -1 if w % 2 else 1
    return scale * (inner + em_tail(c, w, M) + sign * em_tail(-c, w, M))


def ordered_lattice_sum(tau, weight, M=2000, N=2000, order="m_first", chunk=256):
    """``sum'_{(m, n)} (m + n tau)^{-weight}`` with the prescribed ordering.

    ``order="m_first"`` completes the sum over ``m`` for each ``n`` before
    summing over ``n``; ``"n_first"`` swaps the roles.
    """
    tau = complex(tau)
    if tau.imag <= 0:
        raise EllmqError("tau must lie in the upper half plane", op="zeta_lab.ordered_lattice_sum")
    if weight < 2:
        raise EllmqError("weight must be at least 2", op="zeta_lab.ordered_lattice_sum")
    if order not in ("m_first", "n_first"):
        raise EllmqError(f"unknown summation order {order!r}", op="zeta_lab.ordered_lattice_sum")
    zeta_w = float(mpmath.zeta(weight))
    sign = -1 if weight % 2 else 1
    total = complex(0)
    if order == "m_first":
        # row n = 0: sum_{m != 0} m^{-w}
        total += (1 + sign) * zeta_w
        outer = np.arange(1, N + 1, dtype=float)
        for start in range(0, N, chunk):
            ns = outer[start:start + chunk]
            total += np.sum(_row_sums(ns * tau, weight, M))
            total += np.sum(_row_sums(-ns * tau, weight, M))
    else:
        total += (1 + sign) * zeta_w * tau ** (-weight)
        outer = np.arange(1, M + 1, dtype=float)
        for start in range(0, M, chunk):
            ms = outer[start:start + chunk]
            total += np.sum(_row_sums(ms / tau, weight, N, tau ** (-weight)))
            total += np.sum(_row_sums(-ms / tau, weight, N, tau ** (-weight)))
    return total


def e2_ordered_lattice_sum(tau, M=2000, N=2000, order="m_first"):
    """Weight-2 lattice sum, inner over ``m`` then outer over ``n`` by default."""
    return ordered_lattice_sum(tau, 2, M, N, order)


def lattice_eisenstein_q(tau, weight, terms=None, dps=None):
    """``2 zeta(w) E_w(q)`` from the q-expansion at ``q = exp(2 pi i tau)``."""
    with _precision(dps):
        tau = mpmath.mpmathify(tau)
        q = mpmath.exp(2j * mpmath.pi * tau)
        if terms is None:
            terms = int(mpmath.mp.dps * 2.31 / max(float(2 * mpmath.pi * mpmath.im(tau)), 0.1)) + 10
        b = bernoulli(weight)
        c = -mpmath.mpf(2 * weight) * b.denominator / b.numerator
        s = mpmath.mpf(1)
        qn = mpmath.mpf(1)
        for n in range(1, terms + 1):
            qn *= q
            s += c * divisor_sigma(n, weight - 1) * qn
        return complex(2 * mpmath.zeta(weight) * s)


def e2_anomaly_check(tau, weight=2, M=2000, N=2000):
    """Residual ``G_w(-1/tau) - tau^w G_w(tau)`` from ordered lattice sums.

    For ``w = 2`` the residual divided by ``tau`` is the constant ``-2 pi i``;
    for ``w >= 4`` it vanishes.
    """
    tau = complex(tau)
    g = ordered_lattice_sum(tau, weight, M, N)
    g_s = ordered_lattice_sum(-1 / tau, weight, M, N)
    residual = g_s - tau ** weight * g
    reference = -2j * math.pi * tau if weight == 2 else 0j
    out = report("e2_anomaly" if weight == 2 else f"e{weight}_modularity",
                 {"tau": tau, "weight": weight, "M": M, "N": N}, residual, reference)
    out["residual_over_tau"] = residual / tau
    return out
