"""Truncated q-series with exact coefficients, Eisenstein series and eta.

Coefficients are :class:`~ellmq.scalar.Scalar` or
:class:`~ellmq.algebra.FormExpr`; products keep the coefficient order, so
form-valued series multiply with the correct Koszul signs.
"""

from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

from .errors import EllmqError
from .scalar import ONE, Scalar, as_scalar

__all__ = [
    "QSeries",
    "bernoulli",
    "zeta_even",
    "divisor_sigma",
    "eisenstein_normalized",
    "eisenstein_lattice",
    "eta_product",
    "pentagonal_series",
    "eta_fractional",
    "require_modular",
    "modular_decomposition",
    "series_exp",
]


def _zero_like(c):
    return c * 0


class QSeries:
    """``sum_{n<=N} coeffs[n] q**n`` with an optional modular-weight tag.

    ``quasi`` marks series that involve the weight-2 Eisenstein series and so
    are only quasi-modular.
    """

    __slots__ = ("coeffs", "weight", "quasi")

    def __init__(self, coeffs, weight=None, quasi=False):
        coeffs = tuple(as_scalar(c) if isinstance(c, (int, Fraction)) else c for c in coeffs)
        if not coeffs:
            raise EllmqError("a q-series needs at least the constant coefficient",
                             op="qseries.QSeries")
        self.coeffs = coeffs
        self.weight = weight
        self.quasi = bool(quasi)

    @property
    def N(self):
        return len(self.coeffs) - 1

    def __getitem__(self, n):
        return self.coeffs[n]

    def __len__(self):
        return len(self.coeffs)

    def __iter__(self):
        return iter(self.coeffs)

    def truncate(self, N):
        if N > self.N:
            raise EllmqError(f"cannot extend a series known to order {self.N} to {N}",
                             op="qseries.truncate")
        return QSeries(self.coeffs[:N + 1], self.weight, self.quasi)

    def map(self, f, weight="keep"):
        return QSeries([f(c) for c in self.coeffs],
                       self.weight if weight == "keep" else weight, self.quasi)

    @classmethod
    def constant(cls, c, N, weight=0):
        return cls([c] + [_zero_like(c)] * N, weight)

    # -- arithmetic ---------------------------------------------------------
    def _align(self, other):
        N = min(self.N, other.N)
        return self.coeffs[:N + 1], other.coeffs[:N + 1]

    def __add__(self, other):
        if not isinstance(other, QSeries):
            coeffs = list(self.coeffs)
            coeffs[0] = coeffs[0] + other
            return QSeries(coeffs, self.weight, self.quasi)
        a, b = self._align(other)
        w = self.weight if self.weight == other.weight else None
        return QSeries([x + y for x, y in zip(a, b)], w, self.quasi or other.quasi)

    __radd__ = __add__

    def __neg__(self):
        return QSeries([-c for c in self.coeffs], self.weight, self.quasi)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, QSeries):
            a, b = self._align(other)
            N = len(a) - 1
            out = []
            for n in range(N + 1):
                acc = None
                for i in range(n + 1):
                    x, y = a[i], b[n - i]
                    if not x or not y:
                        continue
                    t = x * y
                    acc = t if acc is None else acc + t
                out.append(acc if acc is not None else _zero_like(a[0] * b[0]))
            w = None if self.weight is None or other.weight is None else self.weight + other.weight
            return QSeries(out, w, self.quasi or other.quasi)
        return QSeries([c * other for c in self.coeffs], self.weight, self.quasi)

    def __rmul__(self, other):
        return QSeries([other * c for c in self.coeffs], self.weight, self.quasi)

    def __truediv__(self, other):
        return QSeries([c / other for c in self.coeffs], self.weight, self.quasi)

    def __eq__(self, other):
        if not isinstance(other, QSeries):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def is_zero(self):
        return not any(self.coeffs)

    def first_difference(self, other):
        """Index of the first differing coefficient, or ``None``."""
        a, b = self._align(other)
        for n, (x, y) in enumerate(zip(a, b)):
            if x != y:
                return n
        if self.N != other.N:
            return min(self.N, other.N) + 1
        return None

    # -- presentation -------------------------------------------------------
    def to_dict(self):
        def ser(c):
            return c.to_dict()

        return {"weight": self.weight, "quasi_modular": self.quasi, "N": self.N,
                "coeffs": [ser(c) for c in self.coeffs]}

    def __str__(self):
        parts = []
        for n, c in enumerate(self.coeffs):
            if not c:
                continue
            s = str(c)
            if n:
                wrapped = f"({s})" if (" " in s or "*" in s) else s
                qn = "q" if n == 1 else f"q^{n}"
                s = qn if s == "1" else f"-{qn}" if s == "-1" else f"{wrapped}*{qn}"
            parts.append(s)
        body = " + ".join(parts).replace("+ -", "- ") if parts else "0"
        return f"{body} + O(q^{self.N + 1})"

    def __repr__(self):
        return f"QSeries({self}, weight={self.weight})"


def series_exp(X):
    """Exponential of a series whose coefficients are nilpotent forms."""
    for c in X.coeffs:
        if c.constant_term():
            raise EllmqError("series_exp needs nilpotent coefficients", op="qseries.series_exp")
    alg = X.coeffs[0].algebra
    one = QSeries([alg.one()] + [alg.zero()] * X.N, 0)
    out = one
    term = one
    k = 0
    while True:
        k += 1
        term = (term * X) * Fraction(1, k)
        if term.is_zero():
            break
        out = out + term
    return QSeries(out.coeffs, 0, X.quasi)


# -- number theory ---------------------------------------------------------


@lru_cache(maxsize=None)
def bernoulli(n):
    """Bernoulli number B_n (B_1 = -1/2) from sum_{k<=m} C(m+1, k) B_k = 0."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return Fraction(1)
    return -sum(comb(n + 1, k) * bernoulli(k) for k in range(n)) / Fraction(n + 1)


def zeta_even(s):
    """Exact zeta(s) for even s >= 2 as ``rational * pi**s``."""
    if not isinstance(s, int) or s < 2 or s % 2:
        raise EllmqError(f"zeta_even needs an even integer >= 2, got {s!r}", op="qseries.zeta_even")
    k = s // 2
    val = (-1) ** (k + 1) * bernoulli(s) * 2 ** s / (2 * factorial(s))
    return Scalar(val, 0, s)


def divisor_sigma(n, p):
    total = 0
    d = 1
    while d * d <= n:
        if n % d == 0:
            total += d ** p
            e = n // d
            if e != d:
                total += e ** p
        d += 1
    return total


def _check_weight(w, op):
    if not isinstance(w, int) or w < 2 or w % 2:
        raise EllmqError(f"Eisenstein weight must be an even integer >= 2, got {w!r}", op=op)


def eisenstein_normalized(w, N):
    """Constant-term-1 Eisenstein series of weight ``w`` to order ``N``."""
    _check_weight(w, "qseries.eisenstein_normalized")
    c = -Fraction(2 * w) / bernoulli(w)
    coeffs = [ONE] + [Scalar(c * divisor_sigma(n, w - 1)) for n in range(1, N + 1)]
    return QSeries(coeffs, w, quasi=(w == 2))


def eisenstein_lattice(w, N):
    """Lattice normalisation ``sum' (m + n*tau)**-w = 2 zeta(w) E_w(q)``."""
    _check_weight(w, "qseries.eisenstein_lattice")
    return eisenstein_normalized(w, N) * (zeta_even(w) * 2)


def eta_product(N):
    """``prod_{n>=1} (1 - q**n)`` to order ``N`` by direct multiplication."""
    coeffs = [0] * (N + 1)
    coeffs[0] = 1
    for n in range(1, N + 1):
        for k in range(N, n - 1, -1):
            coeffs[k] -= coeffs[k - n]
    return QSeries([Scalar(c) for c in coeffs], None)


def pentagonal_series(N):
    """Euler's sparse series ``sum_k (-1)^k q^{k(3k-1)/2}`` to order ``N``."""
    coeffs = [0] * (N + 1)
    k = 0
    while True:
        hit = False
        for kk in ((k, -k) if k else (0,)):
            e = kk * (3 * kk - 1) // 2
            if e <= N:
                coeffs[e] += (-1) ** (kk % 2)
                hit = True
        if not hit:
            break
        k += 1
    return QSeries([Scalar(c) for c in coeffs], None)


def eta_fractional(max_exponent):
    """Dedekind eta as ``{exponent: coefficient}`` with rational exponents.

    Uses ``eta = sum_{n in Z} (-1)^n q^{(6n-1)^2/24}`` and keeps every term
    with exponent ``<= max_exponent``.
    """
    out = {}
    n = 0
    while True:
        added = False
        for m in ((n, -n) if n else (0,)):
            e = Fraction((6 * m - 1) ** 2, 24)
            if e <= max_exponent:
                out[e] = out.get(e, 0) + (-1) ** (m % 2)
                added = True
        if not added:
            return out
        n += 1


def require_modular(series, op="qseries.require_modular"):
    """Reject series carrying a weight-2 (quasi-modular) contribution."""
    if series.quasi or series.weight == 2:
        raise EllmqError("series is only quasi-modular (weight-2 Eisenstein contribution)", op=op)
    return series


def _solve_exact(rows, rhs):
    """Least-structure exact solve of an overdetermined system; None if inconsistent."""
    ncol = len(rows[0]) if rows else 0
    M = [list(r) + [b] for r, b in zip(rows, rhs)]
    piv_cols = []
    r = 0
    for c in range(ncol):
        p = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        inv = 1 / M[r][c]
        M[r] = [x * inv for x in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        piv_cols.append(c)
        r += 1
    if any(row[-1] != 0 for row in M[r:]):
        return None
    sol = [Fraction(0)] * ncol
    for i, c in enumerate(piv_cols):
        sol[c] = M[i][-1]
    return sol


def modular_decomposition(series, weight):
    """Express a rational q-series as a polynomial in E4, E6 of the given weight.

    Returns ``{(a, b): coefficient}`` meaning ``sum c * E4**a * E6**b`` that
    matches the series to its working order, or ``None`` when no such
    combination exists (e.g. for E2, or any odd/weight-2 input).
    """
    N = series.N
    monos = [(a, (weight - 4 * a) // 6) for a in range(weight // 4 + 1)
             if (weight - 4 * a) >= 0 and (weight - 4 * a) % 6 == 0]
    if not monos:
        return None
    E4 = eisenstein_normalized(4, N)
    E6 = eisenstein_normalized(6, N)
    basis = []
    for a, b in monos:
        s = QSeries.constant(ONE, N)
        for _ in range(a):
            s = s * E4
        for _ in range(b):
            s = s * E6
        basis.append([c.rational() for c in s.coeffs])
    rows = [[basis[j][n] for j in range(len(monos))] for n in range(N + 1)]
    rhs = []
    for c in series.coeffs:
        if not c.is_rational():
            raise EllmqError("modular_decomposition needs rational coefficients",
                             op="qseries.modular_decomposition")
        rhs.append(c.rational())
    sol = _solve_exact(rows, rhs)
    if sol is None:
        return None
    return {m: v for m, v in zip(monos, sol) if v}
