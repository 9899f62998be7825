"""Acceptance criteria A1-A9; each prints one PASS/FAIL line."""

import itertools
import math
import random
import time
from fractions import Fraction
from math import factorial

import mpmath

from conftest import ACCEPTANCE_LINES, random_curvature
from ellmq.algebra import Algebra, CurvatureMatrix, d, determinant, exp_nilpotent, pfaffian
from ellmq.berezin import GaussianFiber, gaussian_fiber_integrate, mq_thom_de_rham
from ellmq.errors import NotStringStructure
from ellmq.genera import (
    PontryaginData,
    ahat,
    ahat_inverse,
    resolve_witten_convention,
    witten,
    witten_exponential_side,
    witten_inverse,
    witten_modular,
    witten_product_side,
)
from ellmq.pushforward import index_check, random_family
from ellmq.qseries import eta_product
from ellmq.zeta_lab import (
    circle_det_closed_form,
    e2_anomaly_check,
    e2_ordered_lattice_sum,
    hurwitz_zeta,
    lattice_eisenstein_q,
    z_eta_identity_check,
    zeta_det_shifted_circle,
)


def record(key, passed, detail):
    line = f"{key} {'PASS' if passed else 'FAIL'}: {detail}"
    ACCEPTANCE_LINES[key] = line
    print(line)
    assert passed, line


# -- A1 --------------------------------------------------------------------


def test_a1_fiber_integral_normalization():
    rng = random.Random(1)
    checked, bad = 0, []
    for n in (1, 2, 3, 4):
        for trial in range(6):
            A = Algebra(10)
            evens = [f"g{i}" for i in range(3)]
            for g in evens:
                A.add_generator(g, 2)
            odds = [A.add_generator(f"t{i}", 1) for i in range(4)]
            F = random_curvature(A, n, evens, rng)
            if trial % 2:
                # mix in products of odd generators
                extra = [odds[i] * odds[j] * rng.randint(-2, 2) for i, j in itertools.combinations(range(4), 2)]
                upper = [F.entries[i][j] + rng.choice(extra) for i in range(n) for j in range(i + 1, n)]
                F = CurvatureMatrix.from_upper(A, n, upper)
            fib = GaussianFiber.create(A, n)
            if gaussian_fiber_integrate(mq_thom_de_rham(F, fib), fib) != A.one():
                bad.append((n, trial))
            checked += 1
    record("A1", not bad, f"{checked} Thom forms, ranks 1-4, fibre integral == 1 exactly"
           + (f"; failures {bad}" if bad else ""))


# -- A2 --------------------------------------------------------------------


def ahat_series_oracle(order):
    """Coefficients of z / (2 sinh(z/2)) by exact inversion of sinh(z/2)/(z/2)."""
    s = [Fraction(1, 4 ** k * factorial(2 * k + 1)) for k in range(order // 2 + 1)]
    inv = [Fraction(0)] * len(s)
    inv[0] = Fraction(1)
    for k in range(1, len(s)):
        inv[k] = -sum(s[j] * inv[k - j] for j in range(1, k + 1))
    return inv  # coefficient of z^{2k}


def root_ph(alg, z, kmax):
    return PontryaginData(alg, 2, {k: z ** (2 * k) * Fraction(1, factorial(2 * k)) for k in range(1, kmax + 1)})


def test_a2_ahat_series():
    A = Algebra(24)
    z = A.add_generator("z", 2)
    got = ahat(root_ph(A, z, 6))
    oracle = ahat_series_oracle(12)
    expected = sum((z ** (2 * k) * c for k, c in enumerate(oracle)), A.zero())
    single = got == expected
    # multiplicativity over two roots, through total degree 16
    B = Algebra(16)
    z1, z2 = B.add_generator("z1", 2), B.add_generator("z2", 2)
    two = ahat(root_ph(B, z1, 4) + root_ph(B, z2, 4))
    f1 = sum((z1 ** (2 * k) * c for k, c in enumerate(oracle[:5])), B.zero())
    f2 = sum((z2 ** (2 * k) * c for k, c in enumerate(oracle[:5])), B.zero())
    multi = two == f1 * f2
    C = Algebra(8)
    u, v = C.add_generator("u", 4), C.add_generator("v", 8)
    lin = ahat(PontryaginData(C, 2, {1: u, 2: v}))
    first = lin.component(4) == -u / 12 and lin.component(8) == v / 120 + u * u / 288
    inverse = ahat(root_ph(A, z, 6)) * ahat_inverse(root_ph(A, z, 6)) == A.one()
    record("A2", single and multi and first and inverse,
           f"z/(2 sinh(z/2)) through z^12 exact={single}, two roots={multi}, "
           f"-ph1/12 and +ph2/120={first}, inverse={inverse}")


# -- A3 --------------------------------------------------------------------


def test_a3_witten_series_identity():
    t0 = time.perf_counter()
    good = resolve_witten_convention(10, 10)
    P = witten_product_side(good[0], 11, 10) if len(good) == 1 else None
    W = witten_exponential_side(10, 10)
    exact = False
    if P is not None:
        # product * W == z through z^11 q^10
        prod = [[sum(P[a][i] * W[n - a][j - i] for a in range(n + 1) for i in range(j + 1) if j - i <= 10)
                 for j in range(12)] for n in range(11)]
        target = [[Fraction(int(n == 0 and j == 1)) for j in range(12)] for n in range(11)]
        exact = prod == target
    elapsed = time.perf_counter() - t0
    record("A3", good == [Fraction(1)] and exact and elapsed < 10,
           f"conventions satisfying the identity: {[str(c) for c in good]} (frozen: e^{{z}}), "
           f"exact through z^10 q^10={exact}, {elapsed:.2f}s")


# -- A4 --------------------------------------------------------------------


def test_a4_eta_identity():
    out = z_eta_identity_check(30)
    # independent: Euler's pentagonal theorem with explicit generalized pentagonal numbers
    coeffs = [0] * 31
    for k in range(-10, 11):
        e = k * (3 * k - 1) // 2
        if e <= 30:
            coeffs[e] += (-1) ** k
    direct = [c.rational() for c in eta_product(30).coeffs] == coeffs
    record("A4", out["passed"] and direct,
           f"prod(1-q^k) == q^(-1/24) eta exactly to order 30 (first offset {out['first_offset']}), "
           f"pentagonal cross-check={direct}")


# -- A5 --------------------------------------------------------------------


def test_a5_zeta_numerics():
    samples = [(2 * math.pi, 0.5), (1.0, 0.7), (3.0, -0.4), (5.0, 2.1), (0.8, 10.0)]
    det_err = max(abs(complex(zeta_det_shifted_circle(r, lam)) - complex(circle_det_closed_form(r, lam)))
                  for r, lam in samples)
    hz_err = 0.0
    for s in (-3, -1, 0, 2, 4, 0.5, 3 + 2j):
        for a in (0.25, 1, 2.5, 0.7 + 0.1j):
            ref = mpmath.zeta(s, a)
            hz_err = max(hz_err, float(abs(hurwitz_zeta(s, a) - ref) / abs(ref)))
    record("A5", det_err < 1e-8 and hz_err < 1e-10,
           f"circle det max abs error {det_err:.2e} (tol 1e-8) at 5 samples, "
           f"Hurwitz max rel error {hz_err:.2e} (tol 1e-10) on 28 points")


# -- A6 --------------------------------------------------------------------


def test_a6_index_theorem():
    t0 = time.perf_counter()
    failures, ph3_nonzero = [], 0
    for seed in range(10):
        fam = random_family(random.Random(seed), fiber_dim=6 if seed % 2 else 4, nu_rank=2,
                            base_odd=8, degree_cap=12, name=f"A6s{seed}")
        R, nu = fam.ph_R(), fam.ph_nu()
        if any(nu[k] != -R[k] for k in (1, 2, 3)):
            failures.append((seed, "ph cancellation"))
            continue
        ph3_nonzero += bool(R[3])
        for model in ("deRham", "K", "TMF"):
            rep = index_check(fam, model, N=6, samples=3, seed=seed)
            if not rep["passed"]:
                failures.append((seed, model, rep.get("mismatches"), rep.get("factor_diff")))
        # factor identities, E2 terms included
        if ahat_inverse(nu) != ahat(R):
            failures.append((seed, "ahat factor"))
        if witten_inverse(nu, 6).value != witten(R, 6).value:
            failures.append((seed, "witten factor"))
    elapsed = time.perf_counter() - t0
    record("A6", not failures,
           f"10 families (ph_3 != 0 in {ph3_nonzero}), 3 models, analytic == topological and "
           f"factor identities exact, {elapsed:.1f}s" + (f"; failures {failures}" if failures else ""))


# -- A7 --------------------------------------------------------------------


def test_a7_string_anomaly():
    taus = [1j, 0.2 + 1.3j, -0.4 + 0.8j]
    ratios = [e2_anomaly_check(t, 2, 400, 400)["residual_over_tau"] for t in taus]
    spread = max(abs(r - ratios[0]) for r in ratios)
    const_ok = spread < 1e-5 and abs(ratios[0] + 2j * math.pi) < 1e-5
    mod_err = max(e2_anomaly_check(t, w, 400, 400)["abs_error"] for t in taus for w in (4, 6))
    A = Algebra(12)
    u, v, y = A.add_generator("u", 4), A.add_generator("v", 8), A.add_generator("y", 12)
    H = A.add_generator("H", 3, differential=u * 2)
    Wm = witten_modular(PontryaginData(A, 6, {1: u, 2: v, 3: y}), H, 6)
    structural = 2 not in Wm.exponent and not Wm.value.quasi and Wm.anomaly() == A.zero()
    structural = structural and all(c.free_of(["u"]) for c in Wm.value.coeffs)
    B = A.add_generator("Hbad", 3, differential=u)
    try:
        witten_modular(PontryaginData(A, 6, {1: u}), B, 2)
        rejects = False
    except NotStringStructure:
        rejects = True
    record("A7", const_ok and mod_err < 1e-8 and structural and rejects,
           f"E2 residual/tau spread {spread:.1e} (tol 1e-5, value {ratios[0]:.6f}), "
           f"E4/E6 residual {mod_err:.1e} (tol 1e-8), no weight-2 term={structural}, "
           f"rejects dH != p1={rejects}")


# -- A8 --------------------------------------------------------------------


def test_a8_ordered_lattice_sum():
    t0 = time.perf_counter()
    tau = 2j
    m_first = e2_ordered_lattice_sum(tau, 2000, 2000)
    n_first = e2_ordered_lattice_sum(tau, 2000, 2000, order="n_first")
    ref = lattice_eisenstein_q(tau, 2)
    err = abs(m_first - ref)
    gap = n_first - m_first
    differs = abs(gap) > 1 and abs(gap - (-2j * math.pi / tau)) < 1e-6
    elapsed = time.perf_counter() - t0
    record("A8", err < 1e-4 and differs and elapsed < 30,
           f"tau=2i cutoff 2000: |sum - q-expansion| = {err:.1e} (tol 1e-4), "
           f"opposite order differs by {gap.real:.6f}{gap.imag:+.6f}i (-2 pi i / tau), {elapsed:.1f}s")


# -- A9 --------------------------------------------------------------------


def _algebra_a9():
    A = Algebra(8)
    for n, deg in (("a", 1), ("b", 1), ("c", 1), ("x", 2), ("y", 2), ("h", 3), ("k", 3)):
        A.add_generator(n, deg)
    A.set_differential("h", A.gen("x") * A.gen("y"))
    A.set_differential("k", A.gen("x") * A.gen("x") + A.gen("a") * A.gen("b") * A.gen("y"))
    A.set_differential("c", A.gen("x"))
    return A


def _random_element(A, rng, degree=None, terms=3):
    names = "abcxyhk"
    out = A.zero()
    while not out:
        for _ in range(rng.randint(1, terms)):
            m = A.const(rng.choice((-3, -2, -1, 1, 2, 3)))
            target = degree if degree is not None else rng.randint(0, 6)
            deg = 0
            for _ in range(8):
                if deg >= target:
                    break
                g = rng.choice([n for n in names if A.generator(n).degree <= target - deg])
                m = m * A.gen(g)
                deg += A.generator(g).degree
            if degree is None or deg == degree:
                out = out + m
    return out


def test_a9_algebra_soundness():
    rng = random.Random(9)
    A = _algebra_a9()
    counts = dict.fromkeys(("koszul", "assoc", "d2", "pf2", "exp"), 0)
    bad = []
    for i in range(200):
        a, b, c = (_random_element(A, rng, rng.randint(1, 4)) for _ in range(3))
        if a.homogeneous_degree() is not None and b.homogeneous_degree() is not None:
            s = (-1) ** (a.homogeneous_degree() * b.homogeneous_degree())
            counts["koszul"] += 1
            if a * b != b * a * s:
                bad.append(("koszul", i))
        counts["assoc"] += 1
        if (a * b) * c != a * (b * c):
            bad.append(("assoc", i))
        counts["d2"] += 1
        if d(d(a * b + c)) != A.zero():
            bad.append(("d2", i))
        dim = (2, 4, 4, 6)[i % 4] if i < 196 else 2
        B = Algebra(2 * dim)
        gens = [B.add_generator(f"g{j}", 2) for j in range(3)] + \
               [B.add_generator(f"t{j}", 1) for j in range(3)]
        pool = gens[:3] + [gens[3] * gens[4], gens[4] * gens[5], gens[3] * gens[5]]
        upper = [sum((p * rng.randint(-2, 2) for p in rng.sample(pool, 2)), B.zero())
                 for _ in range(dim * (dim - 1) // 2)]
        F = CurvatureMatrix.from_upper(B, dim, upper)
        pf = pfaffian(F)
        counts["pf2"] += 1
        if pf * pf != determinant(F):
            bad.append(("pf2", i))
        e1 = _random_element(A, rng, rng.choice((2, 4)))
        e2 = _random_element(A, rng, rng.choice((2, 4, 6)))
        counts["exp"] += 1
        if exp_nilpotent(e1) * exp_nilpotent(e2) != exp_nilpotent(e1 + e2):
            bad.append(("exp", i))
    total = sum(counts.values())
    record("A9", not bad and total >= 1000,
           f"{total} randomized checks {counts} exact" + (f"; failures {bad[:5]}" if bad else ""))
