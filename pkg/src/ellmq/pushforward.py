"""Analytic and topological pushforwards of cocycles along a family.

A family is described at the level of forms: fibre directions are odd
degree-1 generators ``f_1 .. f_n`` whose product is the oriented fibre top,
``R`` is the curvature of the vertical tangent bundle and ``nu`` that of the
normal bundle of an embedding into ``B x R^N``.

* analytic:    ``int_{M/B} omega * G(R)``
* topological: ``int_{M/B} int_{nu} omega * Th(nu) * G(nu)^{-1}``

with ``G`` = 1, ``ahat`` or ``witten`` for the de Rham, K and TMF models.
"""

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import CurvatureMatrix, FormExpr
from .berezin import GaussianFiber, gaussian_fiber_integrate, mq_thom_de_rham
from .errors import DimensionMismatch, EllmqError
from .genera import (
    DEFAULT_P1_FACTOR,
    EllipticCocycle,
    PontryaginData,
    ahat,
    ahat_inverse,
    elliptic_thom,
    k_theory_thom,
    witten,
    witten_inverse,
    witten_modular,
    witten_modular_inverse,
)
from .qseries import QSeries

__all__ = [
    "MODELS",
    "GeometricFamily",
    "CocycleClass",
    "fiber_integrate",
    "analytic_push",
    "topological_push",
    "topological_push_reduced",
    "index_check",
    "random_family",
    "random_cocycle",
]

MODELS = ("deRham", "K", "TMF")

_MODEL_ALIASES = {"derham": "deRham", "de_rham": "deRham", "k": "K", "tmf": "TMF"}


def _model(model):
    m = _MODEL_ALIASES.get(str(model).lower())
    if m is None:
        raise EllmqError(f"unknown model {model!r}; expected one of {', '.join(MODELS)}",
                         op="pushforward.model")
    return m


@dataclass(eq=False)
class GeometricFamily:
    algebra: object
    base_generators: tuple
    fiber_generators: tuple
    fiber_top: tuple
    R: CurvatureMatrix
    nu: CurvatureMatrix = None
    N_embed: int = None
    orientation: int = 1
    isometric: bool = True
    H_R: FormExpr = None
    H_nu: FormExpr = None
    name: str = "fam"
    _nu_fiber: object = field(default=None, repr=False)
    _ph_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        op = "pushforward.GeometricFamily"
        alg = self.algebra
        self.base_generators = tuple(self.base_generators)
        self.fiber_generators = tuple(self.fiber_generators)
        self.fiber_top = tuple(self.fiber_top)
        if set(self.base_generators) & set(self.fiber_generators):
            raise EllmqError("base and fibre generators must be disjoint", op=op)
        if not set(self.fiber_top) <= set(self.fiber_generators):
            raise EllmqError("fibre top must be built from fibre generators", op=op)
        if len(set(self.fiber_top)) != len(self.fiber_top):
            raise EllmqError("fibre top repeats a generator", op=op)
        deg = sum(alg.generator(g).degree for g in self.fiber_top)
        if deg != self.fiber_dim:
            raise EllmqError(f"fibre top has degree {deg}, expected {self.fiber_dim}", op=op)
        if self.R.dim != self.fiber_dim:
            raise DimensionMismatch(f"R is {self.R.dim}x{self.R.dim} but the fibre has dimension "
                                    f"{self.fiber_dim}", op=op)
        if self.orientation not in (1, -1):
            raise EllmqError("orientation must be +1 or -1", op=op)
        if self.nu is not None:
            expected = self.fiber_dim + self.nu.dim
            if self.N_embed is None:
                self.N_embed = expected
            elif self.N_embed != expected:
                raise DimensionMismatch(f"N_embed = {self.N_embed} but n + rank(nu) = {expected}", op=op)

    @property
    def fiber_dim(self):
        return len(self.fiber_top)

    def ph_R(self):
        if "R" not in self._ph_cache:
            self._ph_cache["R"] = PontryaginData.from_curvature(self.R)
        return self._ph_cache["R"]

    def ph_nu(self):
        self._require_nu()
        if "nu" not in self._ph_cache:
            self._ph_cache["nu"] = PontryaginData.from_curvature(self.nu)
        return self._ph_cache["nu"]

    def _require_nu(self):
        if self.nu is None:
            raise EllmqError("family carries no normal bundle", op="pushforward.topological_push")

    def nu_fiber(self):
        self._require_nu()
        if self._nu_fiber is None:
            self._nu_fiber = GaussianFiber.create(self.algebra, self.nu.dim, prefix=f"{self.name}_y")
        return self._nu_fiber

    def ph_cancellation_failure(self):
        """First ``k`` with ``ph_k(nu) + ph_k(R) != 0``, or ``None``."""
        R, nu = self.ph_R(), self.ph_nu()
        for k in range(1, self.algebra.degree_cap // 4 + 1):
            if R[k] + nu[k]:
                return k
        return None


@dataclass(frozen=True, eq=False)
class CocycleClass:
    value: object
    model: str

    def __eq__(self, other):
        if not isinstance(other, CocycleClass):
            return NotImplemented
        return self.model == other.model and self.value == other.value

    def __hash__(self):
        return hash((self.model, self.value))

    def to_dict(self):
        return {"model": self.model, "value": self.value.to_dict()}

    def __str__(self):
        return str(self.value)


def _integrate_form(a, fam):
    alg = fam.algebra
    fiber = set(fam.fiber_generators)
    top_names = set(fam.fiber_top)
    top = alg.product(fam.fiber_top)
    ((top_mono, top_coeff),) = top.terms.items()
    n = fam.fiber_dim
    out = {}
    for m, c in a.terms.items():
        names = [nm for nm, _ in m if nm in fiber]
        if set(names) != top_names or len(names) != len(top_names):
            continue
        rest = tuple((nm, e) for nm, e in m if nm not in fiber)
        sign, full = alg.mono_mul(rest, top_mono)
        assert full == m
        # degree drops by exactly n
        assert alg.info(rest)[0] == alg.info(m)[0] - n
        v = c * top_coeff * (sign * fam.orientation)
        out[rest] = out[rest] + v if rest in out else v
    return FormExpr(alg, out)


def fiber_integrate(omega, fam):
    """Coefficient of the fibre top (read as ``beta * top``), other fibre terms dropped."""
    if isinstance(omega, EllipticCocycle):
        return omega.value.map(lambda c: _integrate_form(c, fam))
    if isinstance(omega, QSeries):
        return omega.map(lambda c: _integrate_form(c, fam))
    if isinstance(omega, CocycleClass):
        return fiber_integrate(omega.value, fam)
    return _integrate_form(fam.algebra.coerce(omega), fam)


def _times(omega, factor):
    if isinstance(factor, EllipticCocycle):
        factor = factor.value
    return omega * factor


def _cached(fam, key, build):
    if key not in fam._ph_cache:
        fam._ph_cache[key] = build()
    return fam._ph_cache[key]


def _analytic_factor(fam, model, N, use_string_structure):
    return _cached(fam, ("an", model, N, bool(use_string_structure)),
                   lambda: _build_analytic_factor(fam, model, N, use_string_structure))


def _inverse_factor(fam, model, N, use_string_structure):
    return _cached(fam, ("inv", model, N, bool(use_string_structure)),
                   lambda: _build_inverse_factor(fam, model, N, use_string_structure))


def _build_analytic_factor(fam, model, N, use_string_structure):
    ph = fam.ph_R()
    if model == "deRham":
        return fam.algebra.one()
    if model == "K":
        return ahat(ph)
    if use_string_structure:
        if fam.H_R is None:
            raise EllmqError("family has no string structure H for R", op="pushforward.analytic_push")
        return witten_modular(ph, fam.H_R, N)
    return witten(ph, N)


def _build_inverse_factor(fam, model, N, use_string_structure):
    ph = fam.ph_nu()
    if model == "deRham":
        return fam.algebra.one()
    if model == "K":
        return ahat_inverse(ph)
    if use_string_structure:
        if fam.H_nu is None:
            raise EllmqError("family has no string structure H for nu", op="pushforward.topological_push")
        return witten_modular_inverse(ph, fam.H_nu, N)
    return witten_inverse(ph, N)


def _check_degrees(omega, result, fam, op):
    """Every output degree is an input degree lowered by n (plus factor degrees 4j)."""
    alg = fam.algebra
    omega = alg.coerce(omega)
    in_degs = omega.degrees()
    coeffs = result.coeffs if isinstance(result, QSeries) else (result,)
    for c in coeffs:
        for d in c.degrees():
            if not any(d - (k - fam.fiber_dim) >= 0 and (d - (k - fam.fiber_dim)) % 4 == 0
                       for k in in_degs):
                raise EllmqError(f"degree bookkeeping failed: output degree {d} from inputs "
                                 f"{sorted(in_degs)} with fibre dimension {fam.fiber_dim}", op=op)


def analytic_push(omega, fam, model="deRham", N=6, use_string_structure=False):
    model = _model(model)
    omega = fam.algebra.coerce(omega)
    factor = _analytic_factor(fam, model, N, use_string_structure)
    value = fiber_integrate(_times(omega, factor), fam)
    if model == "deRham":
        exp_degs = {d - fam.fiber_dim for d in omega.degrees()}
        if not value.degrees() <= exp_degs:
            raise EllmqError("degree bookkeeping failed in analytic_push", op="pushforward.analytic_push")
    _check_degrees(omega, value, fam, "pushforward.analytic_push")
    return CocycleClass(value, model)


def topological_push(omega, fam, model="deRham", N=6, use_string_structure=False):
    """Two stages: multiply by the Thom cocycle of ``nu`` and integrate over ``nu``,
    then integrate over the fibres of ``M -> B``."""
    model = _model(model)
    fam._require_nu()
    omega = fam.algebra.coerce(omega)
    fiber = fam.nu_fiber()
    r = fam.nu.dim
    th = _cached(fam, ("thom", model, N, bool(use_string_structure)),
                 lambda: _thom(fam, fiber, model, N, use_string_structure))
    # the Thom cocycle raises degree by rank(nu) = N_embed - n
    lead = th.value[0] if isinstance(th.value, QSeries) else th.value
    top_part = lead.component(r) if r else lead
    if r and top_part.free_of(fiber.one_forms):
        raise EllmqError("degree bookkeeping failed: Thom form lacks its fibre-top part",
                         op="pushforward.topological_push")
    stage1 = gaussian_fiber_integrate(th.__rmul__(omega), fiber)
    value = fiber_integrate(stage1, fam)
    if model == "deRham":
        exp_degs = {d - fam.fiber_dim for d in omega.degrees()}
        if not value.degrees() <= exp_degs:
            raise EllmqError("degree bookkeeping failed in topological_push",
                             op="pushforward.topological_push")
    _check_degrees(omega, value, fam, "pushforward.topological_push")
    return CocycleClass(value, model)


def _thom(fam, fiber, model, N, use_string_structure):
    if model == "deRham":
        th = mq_thom_de_rham(fam.nu, fiber)
    elif model == "K":
        th = k_theory_thom(fam.nu, fiber)
    else:
        H = None
        if use_string_structure:
            if fam.H_nu is None:
                raise EllmqError("family has no string structure H for nu",
                                 op="pushforward.topological_push")
            H = fam.H_nu
        th = elliptic_thom(fam.nu, fiber, H=H, N=N)
    return th


def topological_push_reduced(omega, fam, model="deRham", N=6, use_string_structure=False):
    """``int_{M/B} omega * G(nu)^{-1}``: the Thom factor already integrated to one."""
    model = _model(model)
    fam._require_nu()
    omega = fam.algebra.coerce(omega)
    factor = _inverse_factor(fam, model, N, use_string_structure)
    return CocycleClass(fiber_integrate(_times(omega, factor), fam), model)


def _diff(a, b):
    if isinstance(a, EllipticCocycle):
        a = a.value
    if isinstance(b, EllipticCocycle):
        b = b.value
    if isinstance(a, QSeries):
        off = a.first_difference(b)
        return None if off is None else {"q_order": off, "lhs": str(a[off]) if off <= a.N else None,
                                         "rhs": str(b[off]) if off <= b.N else None}
    return None if a == b else {"lhs": str(a), "rhs": str(b), "difference": str(a - b)}


def index_check(fam, model="deRham", N=6, samples=3, use_string_structure=False, seed=0):
    """Compare analytic and topological pushforwards on sample cocycles.

    ``samples`` is a list of forms or a count of random forms (seeded).
    """
    model = _model(model)
    report = {"test": "index_check", "family": fam.name, "model": model, "q_order": N,
              "string_structure": bool(use_string_structure)}
    k = fam.ph_cancellation_failure()
    if k is not None:
        report.update(passed=False, failing_k=k,
                      diagnostic=f"ph_{k}(nu) + ph_{k}(R) = {fam.ph_nu()[k] + fam.ph_R()[k]} != 0")
        return report
    if isinstance(samples, int):
        rng = random.Random(seed)
        samples = [fam.algebra.product(fam.fiber_top)] + [random_cocycle(fam, rng)
                                                          for _ in range(max(samples - 1, 0))]
    mismatches = []
    for i, omega in enumerate(samples):
        an = analytic_push(omega, fam, model, N, use_string_structure)
        top = topological_push(omega, fam, model, N, use_string_structure)
        if an != top:
            mismatches.append({"sample": i, "diff": _diff(an.value, top.value)})
    if model == "deRham":
        factor_diff = None
    else:
        lhs = _analytic_factor(fam, model, N, use_string_structure)
        rhs = _inverse_factor(fam, model, N, use_string_structure)
        factor_diff = _diff(lhs, rhs)
    report.update(passed=not mismatches and factor_diff is None, failing_k=None,
                  samples=len(samples), mismatches=mismatches,
                  factor_identity=factor_diff is None, factor_diff=factor_diff)
    return report


# -- randomized families ---------------------------------------------------


def _random_one_form(alg, names, rng, max_terms=2):
    out = alg.zero()
    for g in rng.sample(names, rng.randint(1, max_terms)):
        out = out + alg.gen(g) * rng.choice((-2, -1, 1, 2))
    return out


def random_family(rng, fiber_dim=4, nu_rank=2, base_odd=8, degree_cap=12, name="fam",
                  string_structure=False, max_terms=2, distinct=True, algebra=None):
    """Family with ``R = S^T S`` and ``nu = S S^T`` for a random ``nu_rank x fiber_dim``
    matrix ``S`` of 1-forms (a second fundamental form).

    The odd entries give ``Tr(nu^{2k}) = -Tr(R^{2k})``, so the family satisfies the
    additive cancellation ``ph_k(nu) = -ph_k(R)`` exactly.  With ``distinct``
    each entry starts from its own generator (when there are enough), which keeps
    the top components ``ph_k`` generically nonzero; extra random terms follow.
    """
    from .algebra import Algebra

    alg = algebra if algebra is not None else Algebra(degree_cap)
    base = [f"{name}_e{i}" for i in range(1, base_odd + 1)]
    fib = [f"{name}_f{i}" for i in range(1, fiber_dim + 1)]
    for g in base + fib:
        alg.add_generator(g, 1)
    pool = base + fib
    S = [[_random_one_form(alg, pool, rng, max_terms) for _ in range(fiber_dim)]
         for _ in range(nu_rank)]
    if distinct and len(pool) >= nu_rank * fiber_dim:
        seeds = rng.sample(pool, nu_rank * fiber_dim)
        for a in range(nu_rank):
            for i in range(fiber_dim):
                g = alg.gen(seeds[a * fiber_dim + i]) * rng.choice((-1, 1))
                S[a][i] = g if rng.random() < 0.5 else g + _random_one_form(alg, pool, rng, max_terms - 1 or 1)
    R = [[alg.zero() for _ in range(fiber_dim)] for _ in range(fiber_dim)]
    for i in range(fiber_dim):
        for j in range(fiber_dim):
            for a in range(nu_rank):
                R[i][j] = R[i][j] + S[a][i] * S[a][j]
    nu = [[alg.zero() for _ in range(nu_rank)] for _ in range(nu_rank)]
    for a in range(nu_rank):
        for b in range(nu_rank):
            for i in range(fiber_dim):
                nu[a][b] = nu[a][b] + S[a][i] * S[b][i]
    R = CurvatureMatrix(alg, R)
    nu = CurvatureMatrix(alg, nu)
    H_R = H_nu = None
    if string_structure:
        p1 = PontryaginData.from_curvature(R, 1)[1] * DEFAULT_P1_FACTOR
        H_R = alg.add_generator(f"{name}_H", 3, differential=p1)
        H_nu = -H_R
    return GeometricFamily(alg, base, fib, fib, R, nu, isometric=True,
                           H_R=H_R, H_nu=H_nu, name=name)


def random_cocycle(fam, rng, terms=3):
    """Random form over the family's generators; always includes a fibre-top piece."""
    alg = fam.algebra
    pool = list(fam.base_generators) + list(fam.fiber_generators)
    out = alg.zero()
    for _ in range(terms):
        k = rng.randint(0, min(len(pool), alg.degree_cap - 1))
        names = rng.sample(pool, k)
        out = out + alg.product(names, Fraction(rng.randint(-5, 5), rng.randint(1, 3)))
    extra = rng.sample(list(fam.base_generators), rng.randint(0, 2))
    out = out + alg.product(list(extra) + [g for g in fam.fiber_top], rng.randint(1, 4))
    return out
