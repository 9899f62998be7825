"""Exact coefficients: Gaussian rationals times an integer power of pi."""

from fractions import Fraction
from numbers import Rational

import mpmath

from .errors import PiPowerMismatch

__all__ = ["Scalar", "as_scalar", "ZERO", "ONE", "I", "PI"]


class Scalar:
    """``(re + im*i) * pi**pi_power`` with ``re``, ``im`` exact rationals.

    pi is kept as a formal transcendental: products add the powers and a sum
    of nonzero values with different powers is an error. Zero is normalised to
    ``pi_power == 0`` and is the additive identity for every power.
    """

    __slots__ = ("re", "im", "pi_power", "_hash")

    def __init__(self, re=0, im=0, pi_power=0):
        re = re if type(re) is Fraction else Fraction(re)
        im = im if type(im) is Fraction else Fraction(im)
        if not re and not im:
            pi_power = 0
        self.re = re
        self.im = im
        self.pi_power = int(pi_power)
        self._hash = None

    @classmethod
    def _raw(cls, re, im, pi_power):
        s = object.__new__(cls)
        if not re and not im:
            pi_power = 0
        s.re = re
        s.im = im
        s.pi_power = pi_power
        s._hash = None
        return s

    # -- predicates ---------------------------------------------------------
    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def is_zero(self):
        return not self

    def is_real(self):
        return not self.im

    def is_rational(self):
        return not self.im and self.pi_power == 0

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other):
        other = as_scalar(other)
        if other is NotImplemented:
            return NotImplemented
        if not other:
            return self
        if not self:
            return other
        if self.pi_power != other.pi_power:
            raise PiPowerMismatch(
                f"cannot add {self} and {other}: pi powers {self.pi_power} != {other.pi_power}",
                op="scalar.add",
            )
        return Scalar._raw(self.re + other.re, self.im + other.im, self.pi_power)

    __radd__ = __add__

    def __neg__(self):
        return Scalar._raw(-self.re, -self.im, self.pi_power)

    def __sub__(self, other):
        other = as_scalar(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = as_scalar(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if type(other) is not Scalar:
            other = as_scalar(other)
            if other is NotImplemented:
                return NotImplemented
        a, b, c, d = self.re, self.im, other.re, other.im
        if not b and not d:
            return Scalar._raw(a * c, b, self.pi_power + other.pi_power)
        return Scalar._raw(a * c - b * d, a * d + b * c, self.pi_power + other.pi_power)

    __rmul__ = __mul__

    def inverse(self):
        if not self:
            raise ZeroDivisionError("inverse of zero scalar")
        n = self.re * self.re + self.im * self.im
        return Scalar._raw(self.re / n, -self.im / n, -self.pi_power)

    def __truediv__(self, other):
        other = as_scalar(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = as_scalar(other)
        if other is NotImplemented:
            return NotImplemented
        return other * self.inverse()

    def __pow__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        out = ONE
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conjugate(self):
        return Scalar._raw(self.re, -self.im, self.pi_power)

    # -- comparison ---------------------------------------------------------
    def __eq__(self, other):
        other = as_scalar(other)
        if other is NotImplemented:
            return NotImplemented
        return (self.re, self.im, self.pi_power) == (other.re, other.im, other.pi_power)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.re, self.im, self.pi_power))
        return self._hash

    # -- conversion ---------------------------------------------------------
    def to_complex(self, dps=None):
        """Numerical value as an ``mpmath.mpc``."""
        with mpmath.workdps(dps or mpmath.mp.dps):
            z = mpmath.mpc(mpmath.mpf(self.re.numerator) / self.re.denominator,
                           mpmath.mpf(self.im.numerator) / self.im.denominator)
            return z * mpmath.pi ** self.pi_power

    def rational(self):
        """Return the value as a Fraction; only valid for real, pi-free scalars."""
        if not self.is_rational():
            raise ValueError(f"{self} is not a rational number")
        return self.re

    def to_dict(self):
        return {
            "re_num": self.re.numerator,
            "re_den": self.re.denominator,
            "im_num": self.im.numerator,
            "im_den": self.im.denominator,
            "pi_power": self.pi_power,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(Fraction(d["re_num"], d["re_den"]), Fraction(d["im_num"], d["im_den"]),
                   d.get("pi_power", 0))

    def __repr__(self):
        return f"Scalar({self})"

    def __str__(self):
        if not self:
            return "0"
        if not self.im:
            body = str(self.re)
        elif not self.re:
            body = "i" if self.im == 1 else "-i" if self.im == -1 else f"{self.im}*i"
        else:
            body = f"({self.re}{'+' if self.im > 0 else '-'}{abs(self.im)}*i)"
        if self.pi_power == 0:
            return body
        pi = "pi" if self.pi_power == 1 else f"pi^{self.pi_power}"
        return pi if body == "1" else f"{body}*{pi}"


def as_scalar(x):
    if type(x) is Scalar:
        return x
    if isinstance(x, (int, Rational)):
        return Scalar(Fraction(x))
    if isinstance(x, complex):
        raise TypeError("floating complex values are not exact; build a Scalar explicitly")
    return NotImplemented


ZERO = Scalar(0)
ONE = Scalar(1)
I = Scalar(0, 1)
PI = Scalar(1, 0, 1)
