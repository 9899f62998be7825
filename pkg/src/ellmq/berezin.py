"""Berezin integration and the de Rham Mathai-Quillen Thom form.

Conventions (fixed once, everything else follows):

* ``berezin_top`` reads a term ``w * psi_1 ... psi_n`` (odd frame variables
  written to the right, in frame order) as ``orientation * w``.
* Fibre integration reads ``b * dx_1 ... dx_n`` as ``b`` times the normalised
  Gaussian moment of the ``x``-dependence of ``b``.
* The Gaussian integrand is ``exp(-1/2 <psi, F psi> - i <dx, psi>)``; the
  constant ``i**n (-1)**(n(n-1)/2)`` makes the flat form integrate to one.
* Closedness is checked with the covariant rule ``D x_i = dx_i``,
  ``D dx_i = -sum_j F_ij x_j``, which is how ``F`` enters this integrand.
"""

from dataclasses import dataclass
from fractions import Fraction

from .algebra import FormExpr, derivation, exp_nilpotent
from .errors import DimensionMismatch, EllmqError
from .qseries import QSeries
from .scalar import I

__all__ = [
    "OddFrame",
    "GaussianFiber",
    "ThomForm",
    "berezin_top",
    "gaussian_berezin",
    "mq_thom_de_rham",
    "gaussian_fiber_integrate",
    "thom_differential",
    "flat_normalization",
    "gaussian_moment",
]


@dataclass(frozen=True, eq=False)
class OddFrame:
    algebra: object
    variables: tuple
    orientation: int = 1

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        if self.orientation not in (1, -1):
            raise EllmqError("orientation must be +1 or -1", op="berezin.OddFrame")
        if len(set(self.variables)) != len(self.variables):
            raise EllmqError("frame variables must be distinct", op="berezin.OddFrame")
        for v in self.variables:
            if not self.algebra.generator(v).is_odd:
                raise EllmqError(f"frame variable {v} is not odd", op="berezin.OddFrame")

    @classmethod
    def create(cls, algebra, n, prefix="psi", orientation=1):
        names = [f"{prefix}{i}" for i in range(1, n + 1)]
        for name in names:
            algebra.add_generator(name, 1, capped=False)
        return cls(algebra, names, orientation)

    def __len__(self):
        return len(self.variables)

    def top(self):
        return self.algebra.product(self.variables)

    def symbols(self):
        return [self.algebra.gen(v) for v in self.variables]


@dataclass(frozen=True, eq=False)
class GaussianFiber:
    """Fibre coordinates ``x_i`` (degree 0) and their differentials ``dx_i``."""

    algebra: object
    coords: tuple
    one_forms: tuple
    label: str = "x"

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        object.__setattr__(self, "one_forms", tuple(self.one_forms))
        if len(self.coords) != len(self.one_forms):
            raise DimensionMismatch("coords and one_forms must have equal length",
                                    op="berezin.GaussianFiber")
        alg = self.algebra
        for x, dx in zip(self.coords, self.one_forms):
            if alg.generator(x).degree != 0 or alg.generator(dx).degree != 1:
                raise EllmqError(f"fibre pair ({x}, {dx}) must have degrees (0, 1)",
                                 op="berezin.GaussianFiber")
            if alg.differential(x) != alg.gen(dx):
                raise EllmqError(f"d({x}) must equal {dx}", op="berezin.GaussianFiber")

    @classmethod
    def create(cls, algebra, n, prefix="x"):
        coords, forms = [], []
        for i in range(1, n + 1):
            x, dx = f"{prefix}{i}", f"d{prefix}{i}"
            algebra.add_generator(dx, 1, capped=False)
            algebra.add_generator(x, 0, differential=algebra.gen(dx))
            coords.append(x)
            forms.append(dx)
        return cls(algebra, coords, forms, prefix)

    @property
    def rank(self):
        return len(self.coords)

    @property
    def generator_names(self):
        return set(self.coords) | set(self.one_forms)

    def frame(self):
        return OddFrame.create(self.algebra, self.rank, prefix=f"psi_{self.label}")

    def top(self):
        return self.algebra.product(self.one_forms)

    def norm_squared(self):
        out = self.algebra.zero()
        for x in self.coords:
            out = out + self.algebra.gen(x) ** 2
        return out


@dataclass(frozen=True, eq=False)
class ThomForm:
    """``value`` times the normalised Gaussian ``(2 pi)^(-n/2) exp(-|x|^2/2)``.

    ``value`` is a FormExpr, or a QSeries of FormExprs for elliptic Thom forms.
    """

    value: object
    fiber: GaussianFiber

    def __mul__(self, other):
        if isinstance(other, ThomForm):
            raise EllmqError("product of two Gaussian-weighted forms is not modelled",
                             op="berezin.ThomForm")
        return ThomForm(_times(self.value, other), self.fiber)

    def __rmul__(self, other):
        return ThomForm(_times(other, self.value), self.fiber)

    def __eq__(self, other):
        return (isinstance(other, ThomForm) and other.fiber is self.fiber
                and other.value == self.value)

    def __hash__(self):
        return hash(self.value)

    def is_q_series(self):
        return isinstance(self.value, QSeries)

    def to_dict(self):
        return {"gaussian_weight": True, "fiber": list(self.fiber.coords),
                "value": self.value.to_dict()}

    def __str__(self):
        return f"gauss({','.join(self.fiber.coords)}) * [{self.value}]"


def _times(a, b):
    # FormExpr * QSeries falls through to QSeries.__rmul__, keeping the order
    return a * b


def berezin_top(a, frame):
    """Top coefficient with respect to the frame variables (see module notes)."""
    alg = frame.algebra
    if len(frame) == 0:
        return a
    names = set(frame.variables)
    top = frame.top()
    ((top_mono, top_coeff),) = top.terms.items()
    out = {}
    for m, c in a.terms.items():
        present = [n for n, _ in m if n in names]
        if len(present) != len(names):
            continue
        rest = tuple((n, e) for n, e in m if n not in names)
        sign, prod = alg.mono_mul(rest, top_mono)
        assert prod == m
        v = c * top_coeff * (sign * frame.orientation)
        out[rest] = out[rest] + v if rest in out else v
    return FormExpr(alg, out)


def gaussian_berezin(F, linear, frame):
    """``berezin_top(exp(-1/2 <psi, F psi> - i <linear, psi>), frame)``."""
    n = len(frame)
    if F.dim != n or len(linear) != n:
        raise DimensionMismatch(
            f"dimension mismatch: F is {F.dim}x{F.dim}, {len(linear)} linear terms, frame of {n}",
            op="berezin.gaussian_berezin")
    alg = frame.algebra
    if n == 0:
        return alg.one()
    psi = frame.symbols()
    expo = alg.zero()
    for i in range(n):
        for j in range(n):
            if F.entries[i][j]:
                expo = expo + psi[i] * F.entries[i][j] * psi[j] * Fraction(-1, 2)
    for i in range(n):
        expo = expo + alg.coerce(linear[i]) * psi[i] * (-I)
    return berezin_top(exp_nilpotent(expo), frame)


def flat_normalization(n):
    """Constant ``i**n (-1)**(n(n-1)/2)`` normalising the flat fibre integral."""
    return I ** n * (-1) ** (n * (n - 1) // 2)


def mq_thom_de_rham(F, fiber, check=True):
    """Mathai-Quillen Thom form of a rank-``n`` bundle with curvature ``F``.

    With ``check`` the closedness of the result is verified (not assumed).
    """
    n = fiber.rank
    if F.dim != n:
        raise DimensionMismatch(f"curvature rank {F.dim} != fibre rank {n}",
                                op="berezin.mq_thom_de_rham")
    alg = fiber.algebra
    if n == 0:
        return ThomForm(alg.one(), fiber)
    frame = fiber.frame()
    body = gaussian_berezin(F, [alg.gen(dx) for dx in fiber.one_forms], frame)
    th = ThomForm(body * flat_normalization(n), fiber)
    if check and thom_differential(th, F):
        raise EllmqError("Mathai-Quillen form failed the closedness check",
                         op="berezin.mq_thom_de_rham")
    return th


def thom_differential(th, F):
    """Polynomial part of ``d`` of a Gaussian-weighted form (weight factored out)."""
    fiber = th.fiber
    alg = fiber.algebra
    images = {}
    for i, (x, dx) in enumerate(zip(fiber.coords, fiber.one_forms)):
        images[x] = alg.gen(dx)
        acc = alg.zero()
        for j, xj in enumerate(fiber.coords):
            if F.entries[i][j]:
                acc = acc - F.entries[i][j] * alg.gen(xj)
        images[dx] = acc
    weight_d = alg.zero()
    for x, dx in zip(fiber.coords, fiber.one_forms):
        weight_d = weight_d - alg.gen(x) * alg.gen(dx)

    def dpoly(p):
        return weight_d * p + derivation(p, images)

    if isinstance(th.value, QSeries):
        return th.value.map(dpoly)
    return dpoly(th.value)


def gaussian_moment(k):
    """``E[x**k]`` for a standard normal variable: ``(k-1)!!`` or 0."""
    if k % 2:
        return 0
    out = 1
    for j in range(k - 1, 0, -2):
        out *= j
    return out


def _integrate_weighted(a, fiber):
    alg = fiber.algebra
    forms = set(fiber.one_forms)
    coords = set(fiber.coords)
    top = fiber.top()
    ((top_mono, top_coeff),) = top.terms.items()
    out = {}
    for m, c in a.terms.items():
        if sum(1 for nm, _ in m if nm in forms) != len(forms):
            continue
        moment = 1
        for nm, e in m:
            if nm in coords:
                moment *= gaussian_moment(e)
        if not moment:
            continue
        rest = tuple((nm, e) for nm, e in m if nm not in forms and nm not in coords)
        xpart = tuple((nm, e) for nm, e in m if nm in coords)
        sign1, rx = alg.mono_mul(rest, xpart)
        sign2, full = alg.mono_mul(rx, top_mono)
        assert full == m
        v = c * top_coeff * (sign1 * sign2 * moment)
        out[rest] = out[rest] + v if rest in out else v
    return FormExpr(alg, out)


def gaussian_fiber_integrate(a, fiber):
    """Integrate over the fibre against the normalised Gaussian weight."""
    if isinstance(a, ThomForm):
        if a.fiber is not fiber:
            raise EllmqError("Thom form belongs to a different fibre",
                             op="berezin.gaussian_fiber_integrate")
        if isinstance(a.value, QSeries):
            return a.value.map(lambda c: _integrate_weighted(c, fiber))
        return _integrate_weighted(a.value, fiber)
    if isinstance(a, QSeries):
        return a.map(lambda c: gaussian_fiber_integrate(c, fiber))
    forms = set(fiber.one_forms)
    for m in a.terms:
        if sum(1 for nm, _ in m if nm in forms) == len(forms):
            raise EllmqError("fibre-top term without Gaussian weight is not integrable",
                             op="berezin.gaussian_fiber_integrate")
    return a.algebra.zero()
