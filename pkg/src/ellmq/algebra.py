"""Free graded-commutative differential algebra over named generators.

Elements (:class:`FormExpr`) are finite sums of canonical monomials with exact
:class:`~ellmq.scalar.Scalar` coefficients. A monomial is a tuple of
``(name, exponent)`` pairs sorted by generator name; the Koszul sign of any
reordering is absorbed into the coefficient. Products are truncated above the
algebra's ``degree_cap`` (counted over *capped* generators) and above
``poly_cap`` in the degree-0 generators.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from .errors import AlgebraMismatch, DimensionMismatch, EllmqError, NotNilpotent
from .scalar import ONE, Scalar, as_scalar

__all__ = [
    "Generator",
    "Algebra",
    "FormExpr",
    "CurvatureMatrix",
    "mul",
    "d",
    "derivation",
    "exp_nilpotent",
    "trace_power",
    "pfaffian",
    "determinant",
    "matmul",
]

EMPTY = ()


@dataclass(frozen=True)
class Generator:
    name: str
    degree: int
    capped: bool = True

    @property
    def parity(self):
        return self.degree % 2

    @property
    def is_odd(self):
        return self.degree % 2 == 1


class Algebra:
    """Registry of generators, their differentials and the truncation caps.

    The registry only ever grows: a name, once registered, keeps its degree.
    Re-registering an identical generator is a no-op, which lets helpers such
    as Gaussian fibres be requested repeatedly.
    """

    def __init__(self, degree_cap, poly_cap=8):
        if degree_cap < 1:
            raise EllmqError("degree_cap must be positive", op="algebra.Algebra")
        self.degree_cap = int(degree_cap)
        self.poly_cap = int(poly_cap)
        self._gens = {}
        self._diff = {}
        self._bit = {}
        self._info = {}
        self._prod = {}
        self._dmono = {}

    # -- registration -------------------------------------------------------
    def add_generator(self, name, degree, differential=None, capped=None):
        if not name or not (name[0].isalpha() or name[0] == "_") or not all(
                ch.isalnum() or ch == "_" for ch in name):
            raise EllmqError(f"invalid generator name {name!r}", op="algebra.add_generator")
        if degree < 0:
            raise EllmqError(f"generator {name}: degree must be non-negative",
                             op="algebra.add_generator")
        if capped is None:
            capped = degree > 0
        gen = Generator(name, int(degree), bool(capped))
        old = self._gens.get(name)
        if old is not None:
            if old != gen:
                raise EllmqError(f"generator {name} already registered as {old}",
                                 op="algebra.add_generator")
        else:
            self._gens[name] = gen
            if gen.is_odd:
                self._bit[name] = 1 << len(self._bit)
        if differential is not None:
            self.set_differential(name, differential)
        return self.gen(name)

    def set_differential(self, name, expr):
        gen = self.generator(name)
        expr = self.coerce(expr)
        if expr and expr.homogeneous_degree() != gen.degree + 1:
            raise EllmqError(
                f"differential of {name} must have degree {gen.degree + 1}, got {sorted(expr.degrees())}",
                op="algebra.set_differential")
        self._diff[name] = expr
        self._dmono.clear()

    def generator(self, name):
        try:
            return self._gens[name]
        except KeyError:
            raise EllmqError(f"unknown generator {name!r}", op="algebra.generator") from None

    def has_generator(self, name):
        return name in self._gens

    @property
    def generators(self):
        return tuple(self._gens[n] for n in sorted(self._gens))

    def differential(self, name):
        self.generator(name)
        return self._diff.get(name) or self.zero()

    def validate(self):
        """Check every declared differential; return a list of error strings."""
        errors = []
        for name in sorted(self._diff):
            gen = self._gens[name]
            dg = self._diff[name]
            if dg and dg.homogeneous_degree() != gen.degree + 1:
                errors.append(f"generator {name}: differential has wrong degree")
                continue
            if d(dg):
                errors.append(f"generator {name}: d(d({name})) != 0")
        return errors

    # -- constructors -------------------------------------------------------
    def gen(self, name):
        self.generator(name)
        return FormExpr(self, {((name, 1),): ONE})

    def zero(self):
        return FormExpr(self, {})

    def one(self):
        return FormExpr(self, {EMPTY: ONE})

    def const(self, c):
        c = as_scalar(c)
        return FormExpr(self, {EMPTY: c} if c else {})

    def coerce(self, x):
        if isinstance(x, FormExpr):
            if x.algebra is not self:
                raise _mismatch(self, x.algebra, "algebra.coerce")
            return x
        return self.const(x)

    def product(self, names, coeff=1):
        """Ordered product of generators, e.g. ``product(["f1", "f2"])``."""
        out = self.const(coeff)
        for n in names:
            out = out * self.gen(n)
        return out

    # -- monomial kernel ----------------------------------------------------
    def info(self, m):
        """``(total_degree, form_degree, poly_degree, odd_mask)`` of a monomial."""
        r = self._info.get(m)
        if r is None:
            tot = form = poly = mask = 0
            for name, e in m:
                g = self._gens[name]
                tot += g.degree * e
                if g.capped:
                    form += g.degree * e
                if g.degree == 0:
                    poly += e
                if g.is_odd:
                    mask |= self._bit[name]
            r = (tot, form, poly, mask)
            self._info[m] = r
        return r

    def mono_mul(self, m1, m2):
        """Return ``(sign, monomial)`` for ``m1*m2`` or ``None`` if it vanishes."""
        key = (m1, m2)
        try:
            return self._prod[key]
        except KeyError:
            pass
        r = self._mono_mul(m1, m2)
        self._prod[key] = r
        return r

    def _mono_mul(self, m1, m2):
        i1 = self.info(m1)
        i2 = self.info(m2)
        if i1[3] & i2[3]:
            return None
        if i1[1] + i2[1] > self.degree_cap or i1[2] + i2[2] > self.poly_cap:
            return None
        gens = self._gens
        odd_left = bin(i1[3]).count("1")
        out = []
        sign = 1
        i = j = 0
        n1, n2 = len(m1), len(m2)
        while i < n1 and j < n2:
            a, ea = m1[i]
            b, eb = m2[j]
            if a < b:
                out.append(m1[i])
                if gens[a].degree & 1:
                    odd_left -= 1
                i += 1
            elif b < a:
                if gens[b].degree & 1 and odd_left & 1:
                    sign = -sign
                out.append(m2[j])
                j += 1
            else:
                out.append((a, ea + eb))
                i += 1
                j += 1
        out.extend(m1[i:])
        out.extend(m2[j:])
        return sign, tuple(out)


def _mismatch(a, b, op):
    if a.degree_cap != b.degree_cap:
        return AlgebraMismatch(f"mismatched degree_cap: {a.degree_cap} vs {b.degree_cap}", op=op)
    return AlgebraMismatch("operands belong to different algebras", op=op)


class FormExpr:
    """Immutable element of a free graded-commutative algebra."""

    __slots__ = ("algebra", "terms", "_hash")

    def __init__(self, algebra, terms):
        self.algebra = algebra
        self.terms = {m: c for m, c in terms.items() if c}
        self._hash = None

    # -- structure ----------------------------------------------------------
    def __bool__(self):
        return bool(self.terms)

    def is_zero(self):
        return not self.terms

    def __len__(self):
        return len(self.terms)

    def items(self):
        return self.terms.items()

    def degrees(self):
        info = self.algebra.info
        return {info(m)[0] for m in self.terms}

    def homogeneous_degree(self):
        """Total degree of a nonzero homogeneous element (error otherwise)."""
        degs = self.degrees()
        if len(degs) != 1:
            raise EllmqError(f"expression is not homogeneous (degrees {sorted(degs)})",
                             op="algebra.homogeneous_degree")
        return degs.pop()

    def is_homogeneous(self):
        return len(self.degrees()) <= 1

    def component(self, degree):
        info = self.algebra.info
        return FormExpr(self.algebra, {m: c for m, c in self.terms.items() if info(m)[0] == degree})

    def constant_term(self):
        return self.terms.get(EMPTY, Scalar(0))

    def generators_used(self):
        return {name for m in self.terms for name, _ in m}

    def free_of(self, names):
        names = set(names)
        return not any(name in names for m in self.terms for name, _ in m)

    def map_coefficients(self, f):
        return FormExpr(self.algebra, {m: f(c) for m, c in self.terms.items()})

    # -- arithmetic ---------------------------------------------------------
    def _coerce(self, other, op):
        if isinstance(other, FormExpr):
            if other.algebra is not self.algebra:
                raise _mismatch(self.algebra, other.algebra, op)
            return other
        c = as_scalar(other)
        if c is NotImplemented:
            return NotImplemented
        return self.algebra.const(c)

    def __add__(self, other):
        other = self._coerce(other, "algebra.add")
        if other is NotImplemented:
            return NotImplemented
        terms = dict(self.terms)
        for m, c in other.terms.items():
            prev = terms.get(m)
            terms[m] = c if prev is None else prev + c
        return FormExpr(self.algebra, terms)

    __radd__ = __add__

    def __neg__(self):
        return FormExpr(self.algebra, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other, "algebra.sub")
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other, "algebra.sub")
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, FormExpr):
            return mul(self, other)
        c = as_scalar(other)
        if c is NotImplemented:
            return NotImplemented
        if not c:
            return self.algebra.zero()
        return FormExpr(self.algebra, {m: v * c for m, v in self.terms.items()})

    def __rmul__(self, other):
        # scalars are even and central
        return self.__mul__(other)

    def __truediv__(self, other):
        c = as_scalar(other)
        if c is NotImplemented:
            return NotImplemented
        return self * c.inverse()

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        out = self.algebra.one()
        for _ in range(k):
            out = out * self
        return out

    def d(self):
        return d(self)

    # -- comparison ---------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, FormExpr):
            return self.algebra is other.algebra and self.terms == other.terms
        c = as_scalar(other)
        if c is NotImplemented:
            return NotImplemented
        if not c:
            return not self.terms
        return self.terms == {EMPTY: c}

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    # -- presentation -------------------------------------------------------
    def sorted_terms(self):
        info = self.algebra.info
        return sorted(self.terms.items(), key=lambda mc: (info(mc[0])[0], mc[0]))

    def to_dict(self):
        return [
            {"monomial": [f"{n}:{e}" for n, e in m], "coeff": c.to_dict()}
            for m, c in self.sorted_terms()
        ]

    @classmethod
    def from_dict(cls, algebra, data):
        out = algebra.zero()
        for item in data:
            names = []
            for tok in item["monomial"]:
                n, _, e = tok.partition(":")
                names.extend([n] * int(e or 1))
            out = out + algebra.product(names) * Scalar.from_dict(item["coeff"])
        return out

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            mono = "*".join(n if e == 1 else f"{n}^{e}" for n, e in m)
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"FormExpr({self})"


def mul(a, b):
    """Graded product ``a*b``, truncated at the degree caps."""
    if a.algebra is not b.algebra:
        raise _mismatch(a.algebra, b.algebra, "algebra.mul")
    alg = a.algebra
    if not a.terms or not b.terms:
        return alg.zero()
    info = alg.info
    cap = alg.degree_cap
    # bucket the right factor by capped degree so hopeless pairs are skipped
    buckets = {}
    for m, c in b.terms.items():
        buckets.setdefault(info(m)[1], []).append((m, c))
    order = sorted(buckets)
    mono_mul = alg.mono_mul
    out = {}
    for m1, c1 in a.terms.items():
        room = cap - info(m1)[1]
        for deg in order:
            if deg > room:
                break
            for m2, c2 in buckets[deg]:
                r = mono_mul(m1, m2)
                if r is None:
                    continue
                sign, m = r
                v = c1 * c2
                if sign < 0:
                    v = -v
                prev = out.get(m)
                out[m] = v if prev is None else prev + v
    return FormExpr(alg, out)


def _leibniz(alg, m, image):
    out = alg.zero()
    prefix_deg = 0
    for idx, (name, e) in enumerate(m):
        g = alg._gens[name]
        dg = image(name)
        if dg:
            prefix = FormExpr(alg, {m[:idx]: ONE})
            suffix = FormExpr(alg, {m[idx + 1:]: ONE})
            if g.is_odd:
                factor = dg
            else:
                rest = ((name, e - 1),) if e > 1 else EMPTY
                factor = FormExpr(alg, {rest: ONE}) * dg * e
            term = prefix * factor * suffix
            out = out + (-term if prefix_deg % 2 else term)
        prefix_deg += g.degree * e
    return out


def d(a):
    """Exterior derivative: the odd derivation extending the declared differentials."""
    alg = a.algebra
    cache = alg._dmono
    out = alg.zero()
    for m, c in a.terms.items():
        dm = cache.get(m)
        if dm is None:
            dm = cache[m] = _leibniz(alg, m, alg._diff.get)
        if dm:
            out = out + dm * c
    return out


def derivation(a, images):
    """Odd degree-one derivation with generator images overridden by ``images``.

    Generators missing from ``images`` use their declared differential.
    """
    alg = a.algebra

    def image(name):
        return images[name] if name in images else alg._diff.get(name)

    out = alg.zero()
    for m, c in a.terms.items():
        dm = _leibniz(alg, m, image)
        if dm:
            out = out + dm * c
    return out


def exp_nilpotent(a):
    """``sum_k a**k / k!`` for an element without constant term."""
    if a.constant_term():
        raise NotNilpotent("exp_nilpotent needs an element with zero degree-0 component",
                           op="algebra.exp_nilpotent")
    out = a.algebra.one()
    term = a.algebra.one()
    k = 0
    while True:
        k += 1
        term = term * a * Fraction(1, k)
        if not term:
            return out
        out = out + term


# -- matrices over forms ---------------------------------------------------


def matmul(A, B):
    n, inner, p = len(A), len(B), len(B[0]) if B else 0
    if A and len(A[0]) != inner:
        raise DimensionMismatch("matrix shapes do not align", op="algebra.matmul")
    alg = (A[0][0] if A and A[0] else B[0][0]).algebra
    out = []
    for i in range(n):
        row = []
        for j in range(p):
            acc = alg.zero()
            for k in range(inner):
                if A[i][k] and B[k][j]:
                    acc = acc + A[i][k] * B[k][j]
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


@dataclass(frozen=True, eq=False)
class CurvatureMatrix:
    """Antisymmetric ``dim x dim`` matrix of pure degree-2 forms."""

    algebra: Algebra
    entries: tuple

    def __post_init__(self):
        rows = tuple(tuple(self.algebra.coerce(x) for x in row) for row in self.entries)
        object.__setattr__(self, "entries", rows)
        n = len(rows)
        for i, row in enumerate(rows):
            if len(row) != n:
                raise DimensionMismatch("curvature matrix must be square",
                                        op="algebra.CurvatureMatrix")
            if row[i]:
                raise EllmqError(f"diagonal entry ({i},{i}) must vanish",
                                 op="algebra.CurvatureMatrix")
            for j in range(i + 1, n):
                if row[j] != -rows[j][i]:
                    raise EllmqError(f"entries ({i},{j}) and ({j},{i}) are not antisymmetric",
                                     op="algebra.CurvatureMatrix")
                if row[j] and row[j].degrees() != {2}:
                    raise EllmqError(f"entry ({i},{j}) is not a pure 2-form",
                                     op="algebra.CurvatureMatrix")
        object.__setattr__(self, "_powers", {1: rows})

    @property
    def dim(self):
        return len(self.entries)

    @classmethod
    def from_upper(cls, algebra, dim, upper):
        """Build from the strictly upper triangle listed row by row."""
        upper = list(upper)
        if len(upper) != dim * (dim - 1) // 2:
            raise DimensionMismatch(
                f"{dim}x{dim} antisymmetric matrix needs {dim * (dim - 1) // 2} entries",
                op="algebra.CurvatureMatrix")
        rows = [[algebra.zero() for _ in range(dim)] for _ in range(dim)]
        it = iter(upper)
        for i in range(dim):
            for j in range(i + 1, dim):
                x = algebra.coerce(next(it))
                rows[i][j] = x
                rows[j][i] = -x
        return cls(algebra, rows)

    @classmethod
    def zero(cls, algebra, dim):
        return cls(algebra, [[algebra.zero()] * dim for _ in range(dim)])

    @classmethod
    def block_diag(cls, *blocks):
        alg = blocks[0].algebra
        n = sum(b.dim for b in blocks)
        rows = [[alg.zero() for _ in range(n)] for _ in range(n)]
        off = 0
        for b in blocks:
            for i in range(b.dim):
                for j in range(b.dim):
                    rows[off + i][off + j] = b.entries[i][j]
            off += b.dim
        return cls(alg, rows)

    def __neg__(self):
        return CurvatureMatrix(self.algebra, [[-x for x in row] for row in self.entries])

    def is_zero(self):
        return not any(x for row in self.entries for x in row)

    def power(self, m):
        cache = self._powers
        if m not in cache:
            half = m // 2
            cache[m] = matmul(self.power(m - half), self.power(half))
        return cache[m]

    def to_dict(self):
        return [[x.to_dict() for x in row] for row in self.entries]


def trace_power(F, m):
    """``Tr(F**m)`` (degree ``2m``)."""
    if m < 1:
        raise EllmqError("trace_power needs m >= 1", op="algebra.trace_power")
    if m == 1:
        return F.algebra.zero()
    A, B = F.power(m - m // 2), F.power(m // 2)
    out = F.algebra.zero()
    for i in range(F.dim):
        for j in range(F.dim):
            if A[i][j] and B[j][i]:
                out = out + A[i][j] * B[j][i]
    return out


def pfaffian(F):
    """Pfaffian by expansion along the first row; ``Pf([[0, a], [-a, 0]]) = a``."""
    if F.dim % 2:
        raise DimensionMismatch(f"pfaffian of odd-dimensional ({F.dim}) matrix",
                                op="algebra.pfaffian")
    A = F.entries
    alg = F.algebra
    memo = {}

    def pf(idx):
        if not idx:
            return alg.one()
        if idx in memo:
            return memo[idx]
        first, rest = idx[0], idx[1:]
        out = alg.zero()
        for pos, j in enumerate(rest):
            if A[first][j]:
                sub = pf(rest[:pos] + rest[pos + 1:])
                term = A[first][j] * sub
                out = out + (term if pos % 2 == 0 else -term)
        memo[idx] = out
        return out

    return pf(tuple(range(F.dim)))


def determinant(F):
    """Determinant by Laplace expansion along the first remaining row.

    Only meaningful for matrices of even-degree entries, which commute.
    """
    A = F.entries if isinstance(F, CurvatureMatrix) else F
    alg = A[0][0].algebra
    n = len(A)
    memo = {}

    def det(row, cols):
        if row == n:
            return alg.one()
        key = (row, cols)
        if key in memo:
            return memo[key]
        out = alg.zero()
        for pos, c in enumerate(cols):
            if A[row][c]:
                term = A[row][c] * det(row + 1, cols[:pos] + cols[pos + 1:])
                out = out + (term if pos % 2 == 0 else -term)
        memo[key] = out
        return out

    return det(0, tuple(range(n)))
