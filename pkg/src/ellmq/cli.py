"""Command-line front end: ``ellmq <command> [spec.json] [options]``.

Exit codes: 0 success, 1 a verification reported FAIL, 2 input or
precondition error (printed as ``ERROR <module>.<op>: <message>``).
"""

import argparse
import json
import math
import shlex
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import Algebra, CurvatureMatrix, FormExpr
from .berezin import GaussianFiber, gaussian_fiber_integrate, mq_thom_de_rham
from .errors import EllmqError, SpecError
from .expr import parse_form
from .genera import (
    PontryaginData,
    ahat,
    ahat_inverse,
    elliptic_thom,
    k_theory_thom,
    string_anomaly,
    witten,
    witten_inverse,
    witten_modular,
)
from .pushforward import GeometricFamily, analytic_push, index_check, topological_push
from .qseries import QSeries, eisenstein_lattice, eisenstein_normalized, eta_product, pentagonal_series
from .scalar import Scalar
from . import zeta_lab

__all__ = ["ProblemSpec", "parse_spec", "load_spec", "main", "run_command", "SCHEMA_VERSION"]

SCHEMA_VERSION = 1
DEFAULT_Q_ORDER = 8
DEFAULT_DEGREE_CAP = 12

_TOP_KEYS = {"degree_cap", "poly_cap", "q_order", "generators", "curvatures", "forms",
             "families", "commands"}
_FAMILY_KEYS = {"base", "fiber", "fiber_top", "R", "nu", "N_embed", "orientation", "H_R", "H_nu"}


@dataclass
class ProblemSpec:
    algebra: Algebra
    q_order: int = DEFAULT_Q_ORDER
    curvatures: dict = field(default_factory=dict)
    forms: dict = field(default_factory=dict)
    families: dict = field(default_factory=dict)
    commands: list = field(default_factory=list)
    path: str = None


# -- spec parsing ----------------------------------------------------------


def _is_int(x):
    return isinstance(x, int) and not isinstance(x, bool)


def load_spec(data, path="<spec>", degree_cap=None, q_order=None):
    """Validate a decoded spec; raise :class:`SpecError` listing every problem."""
    errors = []
    if not isinstance(data, dict):
        raise SpecError([f"{path}: top level must be a JSON object"])
    for key in sorted(set(data) - _TOP_KEYS):
        errors.append(f"unknown top-level key {key!r}")

    cap = degree_cap if degree_cap is not None else data.get("degree_cap", DEFAULT_DEGREE_CAP)
    if not _is_int(cap) or cap < 1:
        errors.append(f"degree_cap must be a positive integer, got {cap!r}")
        cap = DEFAULT_DEGREE_CAP
    poly_cap = data.get("poly_cap", 8)
    if not _is_int(poly_cap) or poly_cap < 0:
        errors.append(f"poly_cap must be a non-negative integer, got {poly_cap!r}")
        poly_cap = 8
    N = q_order if q_order is not None else data.get("q_order", DEFAULT_Q_ORDER)
    if not _is_int(N) or N < 0:
        errors.append(f"q_order must be a non-negative integer, got {N!r}")
        N = DEFAULT_Q_ORDER
    alg = Algebra(cap, poly_cap)
    spec = ProblemSpec(alg, N, path=path)

    # generators first, differentials once every name is known
    gens = data.get("generators", [])
    pending = []
    if not isinstance(gens, list):
        errors.append("generators must be a list")
        gens = []
    for idx, g in enumerate(gens):
        if not isinstance(g, dict) or "name" not in g or "degree" not in g:
            errors.append(f"generators[{idx}]: needs 'name' and 'degree'")
            continue
        name, deg = g["name"], g["degree"]
        if not isinstance(name, str) or not _is_int(deg):
            errors.append(f"generators[{idx}]: name must be a string and degree an integer")
            continue
        if alg.has_generator(name):
            errors.append(f"generator {name}: declared twice")
            continue
        try:
            alg.add_generator(name, deg)
        except EllmqError as e:
            errors.append(f"generator {name}: {e}")
            continue
        if g.get("differential") not in (None, 0, "0"):
            pending.append((name, g["differential"]))
    diff_failed = False
    for name, text in pending:
        try:
            alg.set_differential(name, parse_form(text, alg))
        except EllmqError as e:
            diff_failed = True
            errors.append(f"generator {name}: differential {text!r}: {e}")
    if not diff_failed:
        errors.extend(alg.validate())

    def form(text, where):
        try:
            return parse_form(text, alg)
        except EllmqError as e:
            errors.append(f"{where}: {e}")
            return None

    forms = data.get("forms", {})
    if not isinstance(forms, dict):
        errors.append("forms must be an object")
        forms = {}
    for name in sorted(forms):
        f = form(forms[name], f"form {name}")
        if f is not None:
            spec.forms[name] = f

    curvs = data.get("curvatures", {})
    if not isinstance(curvs, dict):
        errors.append("curvatures must be an object")
        curvs = {}
    for name in sorted(curvs):
        c = curvs[name]
        where = f"curvature {name}"
        try:
            if isinstance(c, dict) and "upper" in c:
                dim = c.get("dim")
                ups = [form(t, where) for t in c["upper"]]
                if None in ups:
                    continue
                if dim is None:
                    dim = next((k for k in range(1, 64) if k * (k - 1) // 2 == len(ups)), None)
                    if dim is None:
                        errors.append(f"{where}: {len(ups)} upper entries do not fill a square matrix")
                        continue
                spec.curvatures[name] = CurvatureMatrix.from_upper(alg, dim, ups)
            elif isinstance(c, dict) and "entries" in c:
                rows = [[form(t, where) for t in row] for row in c["entries"]]
                if any(x is None for row in rows for x in row):
                    continue
                spec.curvatures[name] = CurvatureMatrix(alg, rows)
            else:
                errors.append(f"{where}: needs 'upper' or 'entries'")
        except EllmqError as e:
            errors.append(f"{where}: {e}")
        except TypeError:
            errors.append(f"{where}: malformed matrix payload")

    fams = data.get("families", {})
    if not isinstance(fams, dict):
        errors.append("families must be an object")
        fams = {}
    for name in sorted(fams):
        f = fams[name]
        where = f"family {name}"
        if not isinstance(f, dict):
            errors.append(f"{where}: must be an object")
            continue
        for key in sorted(set(f) - _FAMILY_KEYS):
            errors.append(f"{where}: unknown key {key!r}")
        bad = False
        for key in ("R", "nu"):
            ref = f.get(key)
            if ref is not None and ref not in spec.curvatures:
                kind = "unknown" if ref not in curvs else "invalid"
                errors.append(f"{where}: {kind} curvature reference {key}={ref!r}")
                bad = True
        if "R" not in f:
            errors.append(f"{where}: missing curvature reference 'R'")
            bad = True
        for key in ("base", "fiber", "fiber_top"):
            for g in f.get(key, []):
                if not alg.has_generator(g):
                    errors.append(f"{where}: unknown generator {g!r} in {key}")
                    bad = True
        H = {}
        for key in ("H_R", "H_nu"):
            if key in f:
                ref = f[key]
                H[key] = spec.forms[ref] if ref in spec.forms else form(ref, f"{where} {key}")
                if H[key] is None:
                    bad = True
        if bad:
            continue
        try:
            spec.families[name] = GeometricFamily(
                alg, f.get("base", []), f.get("fiber", []), f.get("fiber_top", f.get("fiber", [])),
                spec.curvatures[f["R"]], spec.curvatures.get(f.get("nu")), f.get("N_embed"),
                f.get("orientation", 1), True, H.get("H_R"), H.get("H_nu"), name)
        except EllmqError as e:
            errors.append(f"{where}: {e}")

    cmds = data.get("commands", [])
    if not isinstance(cmds, list) or not all(isinstance(c, str) for c in cmds):
        errors.append("commands must be a list of strings")
        cmds = []
    for c in cmds:
        words = shlex.split(c)
        if not words or words[0] not in COMMANDS or words[0] == "run":
            errors.append(f"unknown command {c!r}")
    spec.commands = list(cmds)
    if errors:
        raise SpecError(errors)
    return spec


def parse_spec(path, degree_cap=None, q_order=None):
    """Read and validate a JSON problem spec (all errors are collected)."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise SpecError([f"{path}: cannot read file: {e.strerror}"]) from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecError([f"{path}: JSON parse error at line {e.lineno}, column {e.colno}: {e.msg}"]) from None
    return load_spec(data, path, degree_cap, q_order)


# -- output helpers --------------------------------------------------------


def _num(x):
    x = complex(x)
    return {"re": x.real, "im": x.imag}


def _fmt_num(x):
    x = complex(x)
    if x.imag == 0:
        return f"{x.real:.15g}"
    return f"{x.real:.15g}{x.imag:+.15g}i"


def _jsonable(v):
    if isinstance(v, (FormExpr, QSeries, Scalar)):
        return v.to_dict()
    if hasattr(v, "to_dict"):
        return v.to_dict()
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, bool) or v is None or isinstance(v, (int, str)):
        return v
    if isinstance(v, float):
        return v
    if isinstance(v, Fraction):
        return str(v)
    try:
        return _num(v)
    except TypeError:
        return str(v)


def _parse_complex(text):
    try:
        return complex(str(text).replace(" ", "").replace("i", "j"))
    except ValueError:
        raise EllmqError(f"cannot read {text!r} as a complex number", op="cli.args") from None


class _Result:
    def __init__(self, command, lines, payload, ok=True):
        self.command = command
        self.lines = lines
        self.payload = payload
        self.ok = ok


# -- command handlers ------------------------------------------------------


def _need_spec(args):
    if args.spec is None:
        raise EllmqError(f"command {args.command} needs a spec file", op="cli.args")
    if isinstance(args.spec, ProblemSpec):
        return args.spec
    return parse_spec(args.spec, args.degree_cap, args.q_order)


def _q_order(args, spec=None):
    if args.q_order is not None:
        return args.q_order
    return spec.q_order if spec is not None else DEFAULT_Q_ORDER


def _bundle(spec, args):
    if not args.bundle:
        raise EllmqError("--bundle is required", op="cli.args")
    try:
        return spec.curvatures[args.bundle]
    except KeyError:
        raise EllmqError(f"unknown bundle {args.bundle!r}", op="cli.reference") from None


def _family(spec, args):
    if not args.family:
        raise EllmqError("--family is required", op="cli.args")
    try:
        return spec.families[args.family]
    except KeyError:
        raise EllmqError(f"unknown family {args.family!r}", op="cli.reference") from None


def _h_form(spec, args, required):
    if args.h is None:
        if required:
            raise EllmqError("--h is required", op="cli.args")
        return None
    return spec.forms[args.h] if args.h in spec.forms else parse_form(args.h, spec.algebra)


def _cmd_thom(args):
    spec = _need_spec(args)
    F = _bundle(spec, args)
    fiber = GaussianFiber.create(spec.algebra, F.dim, prefix=args.fiber_prefix)
    if args.command == "thom":
        th = mq_thom_de_rham(F, fiber)
    elif args.command == "k-thom":
        th = k_theory_thom(F, fiber)
    else:
        th = elliptic_thom(F, fiber, _h_form(spec, args, False), _q_order(args, spec))
    integral = gaussian_fiber_integrate(th, fiber)
    lines = [f"{args.command}[{args.bundle}] = {th}",
             f"fiber integral = {integral}"]
    return _Result(args.command, lines, {"bundle": args.bundle, "value": th.to_dict(),
                                         "fiber_integral": integral.to_dict()})


def _ph(spec, args):
    return PontryaginData.from_curvature(_bundle(spec, args))


def _cmd_ahat(args):
    spec = _need_spec(args)
    ph = _ph(spec, args)
    val = ahat_inverse(ph) if args.inverse else ahat(ph)
    name = "ahat_inverse" if args.inverse else "ahat"
    return _Result(args.command, [f"{name}[{args.bundle}] = {val}"],
                   {"bundle": args.bundle, "inverse": args.inverse, "value": val.to_dict()})


def _cmd_witten(args):
    spec = _need_spec(args)
    ph = _ph(spec, args)
    N = _q_order(args, spec)
    if args.command == "witten-h":
        val = witten_modular(ph, _h_form(spec, args, True), N)
        name = "witten_H"
    else:
        val = witten_inverse(ph, N) if args.inverse else witten(ph, N)
        name = "witten_inverse" if args.inverse else "witten"
    lines = [f"{name}[{args.bundle}] = {val}",
             f"modular = {'yes' if val.is_modular() else 'no (E2 term present)'}"]
    return _Result(args.command, lines, {"bundle": args.bundle, "value": val.to_dict()})


def _cmd_anomaly(args):
    spec = _need_spec(args)
    val = string_anomaly(_ph(spec, args))
    return _Result(args.command, [f"string_anomaly[{args.bundle}] = {val}"],
                   {"bundle": args.bundle, "value": val.to_dict()})


def _omega(spec, fam, args):
    if args.omega is None:
        return spec.algebra.product(fam.fiber_top)
    return spec.forms[args.omega] if args.omega in spec.forms else parse_form(args.omega, spec.algebra)


def _cmd_push(args):
    spec = _need_spec(args)
    fam = _family(spec, args)
    omega = _omega(spec, fam, args)
    push = analytic_push if args.command == "push-an" else topological_push
    val = push(omega, fam, args.model, _q_order(args, spec), args.string_structure)
    return _Result(args.command, [f"{args.command}[{args.family}, {val.model}]({omega}) = {val}"],
                   {"family": args.family, "omega": omega.to_dict(), **val.to_dict()})


def _cmd_index(args):
    spec = _need_spec(args)
    fam = _family(spec, args)
    if fam.nu is None:
        raise EllmqError(f"family {fam.name} carries no normal bundle", op="pushforward.index_check")
    samples = args.samples
    if args.omega is not None:
        samples = [_omega(spec, fam, args)]
    rep = index_check(fam, args.model, _q_order(args, spec), samples,
                      args.string_structure, args.seed)
    status = "PASS" if rep["passed"] else "FAIL"
    lines = [f"index-check[{args.family}, {rep['model']}, N={rep['q_order']}]: {status}"]
    if rep.get("failing_k") is not None:
        lines.append(f"  ph-cancellation fails at k={rep['failing_k']}: {rep['diagnostic']}")
    else:
        lines.append(f"  samples: {rep['samples']}, mismatches: {len(rep['mismatches'])}")
        lines.append(f"  factor identity: {'exact' if rep['factor_identity'] else rep['factor_diff']}")
    return _Result(args.command, lines, rep, rep["passed"])


def _cmd_eisenstein(args):
    N = _q_order(args)
    if args.lattice:
        val = eisenstein_lattice(args.weight, N)
    else:
        val = eisenstein_normalized(args.weight, N)
    kind = "lattice" if args.lattice else "normalized"
    return _Result(args.command, [f"E{args.weight} ({kind}) = {val}"],
                   {"weight": args.weight, "kind": kind, "value": val.to_dict()})


def _cmd_eta(args):
    N = args.order if args.order is not None else _q_order(args)
    val = eta_product(N)
    agree = val == pentagonal_series(N)
    lines = [f"prod(1 - q^n) = {val}",
             f"pentagonal check: {'PASS' if agree else 'FAIL'}"]
    return _Result(args.command, lines, {"N": N, "value": val.to_dict(), "pentagonal": agree}, agree)


def _zl_line(rep):
    return (f"{rep['test']}: value = {_fmt_num(rep['value'])}, reference = "
            f"{_fmt_num(rep['reference'])}, abs_error = {rep['abs_error']:.3e}")


def _cmd_zeta_lab(args):
    sub = args.subtest
    if sub == "hurwitz":
        import mpmath
        val = zeta_lab.hurwitz_zeta(_parse_complex(args.s), _parse_complex(args.a))
        ref = mpmath.zeta(_parse_complex(args.s), _parse_complex(args.a))
        rep = zeta_lab.report("hurwitz_zeta", {"s": args.s, "a": args.a}, complex(val), complex(ref))
        tol = 1e-10 * max(1.0, abs(complex(ref)))
    elif sub == "circle-det":
        val = zeta_lab.zeta_det_shifted_circle(args.r, args.lam)
        ref = zeta_lab.circle_det_closed_form(args.r, args.lam)
        rep = zeta_lab.report("zeta_det_shifted_circle", {"r": args.r, "lambda": args.lam},
                              complex(val), complex(ref))
        tol = 1e-8
    elif sub == "circle-det-unshifted":
        val = zeta_lab.zeta_det_unshifted_circle(args.r)
        rep = zeta_lab.report("zeta_det_unshifted_circle", {"r": args.r}, complex(val), -1j * args.r)
        tol = 1e-8
    elif sub == "z-eta":
        N = args.order if args.order is not None else _q_order(args)
        rep = zeta_lab.z_eta_identity_check(N)
        lines = [f"z_eta_identity[N={N}]: {'PASS' if rep['passed'] else 'FAIL'}"]
        return _Result(args.command, lines, rep, rep["passed"])
    elif sub == "e2-sum":
        tau = _parse_complex(args.tau)
        val = zeta_lab.e2_ordered_lattice_sum(tau, args.cutoff, args.cutoff, args.order_mode)
        ref = zeta_lab.lattice_eisenstein_q(tau, 2)
        if args.order_mode == "n_first":
            # the swapped order converges to the q-expansion shifted by -2 pi i / tau
            ref = ref - 2j * math.pi / tau
        rep = zeta_lab.report("e2_ordered_lattice_sum",
                              {"tau": args.tau, "cutoff": args.cutoff, "order": args.order_mode}, val, ref)
        tol = 1e-4
    elif sub == "e2-anomaly":
        tau = _parse_complex(args.tau)
        rep = zeta_lab.e2_anomaly_check(tau, args.weight, args.cutoff, args.cutoff)
        rep["parameters"]["tau"] = args.tau
        tol = 1e-5 * abs(tau) if args.weight == 2 else 1e-8
    else:  # pragma: no cover - argparse restricts choices
        raise EllmqError(f"unknown zeta-lab subtest {sub!r}", op="cli.args")
    ok = rep["abs_error"] <= tol
    lines = [_zl_line(rep)]
    if "residual_over_tau" in rep:
        lines.append(f"residual / tau = {_fmt_num(rep['residual_over_tau'])}")
    lines.append("PASS" if ok else "FAIL")
    return _Result(args.command, lines, rep, ok)


def _cmd_run(args):
    spec_path = args.spec
    if spec_path is None:
        raise EllmqError("run needs a spec file", op="cli.args")
    spec = parse_spec(spec_path, args.degree_cap, args.q_order)
    argvs = []
    for c in spec.commands:
        words = shlex.split(c)
        if words[0] in _SPEC_COMMANDS:
            words = [words[0], spec_path] + words[1:]
        argvs.append(words + _global_flags(args))
    if args.jobs and args.jobs > 1 and len(argvs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            outs = list(pool.map(_run_captured, argvs))
    else:
        outs = [_run_captured(a) for a in argvs]
    return outs


def _global_flags(args):
    out = ["--json"] if args.json else []
    if args.q_order is not None:
        out += ["--q-order", str(args.q_order)]
    if args.degree_cap is not None:
        out += ["--degree-cap", str(args.degree_cap)]
    return out


_HANDLERS = {
    "thom": _cmd_thom,
    "k-thom": _cmd_thom,
    "elliptic-thom": _cmd_thom,
    "ahat": _cmd_ahat,
    "witten": _cmd_witten,
    "witten-h": _cmd_witten,
    "anomaly": _cmd_anomaly,
    "push-an": _cmd_push,
    "push-top": _cmd_push,
    "index-check": _cmd_index,
    "eisenstein": _cmd_eisenstein,
    "eta": _cmd_eta,
    "zeta-lab": _cmd_zeta_lab,
    "run": _cmd_run,
}
COMMANDS = tuple(_HANDLERS)
_SPEC_COMMANDS = {"thom", "k-thom", "elliptic-thom", "ahat", "witten", "witten-h", "anomaly",
                  "push-an", "push-top", "index-check"}
ZETA_SUBTESTS = ("hurwitz", "circle-det", "circle-det-unshifted", "z-eta", "e2-sum", "e2-anomaly")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="structured output")
    common.add_argument("--q-order", type=int, default=None, help=f"q-order N (default {DEFAULT_Q_ORDER})")
    common.add_argument("--degree-cap", type=int, default=None,
                        help=f"form degree cap (default: spec value or {DEFAULT_DEGREE_CAP})")

    parser = argparse.ArgumentParser(prog="ellmq", description="Thom forms, genera and index checks.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def add(name, help_, spec=True):
        p = sub.add_parser(name, parents=[common], help=help_)
        if spec:
            p.add_argument("spec", help="problem spec (JSON)")
        return p

    for name, help_ in (("thom", "de Rham Mathai-Quillen Thom form"),
                        ("k-thom", "K-theoretic Thom form (times ahat inverse)"),
                        ("elliptic-thom", "elliptic Thom form (times Witten inverse)")):
        p = add(name, help_)
        p.add_argument("--bundle", required=True)
        p.add_argument("--fiber-prefix", default="x")
        if name == "elliptic-thom":
            p.add_argument("--h", default=None, help="string structure (form name or expression)")
    for name, help_ in (("ahat", "A-hat form of a bundle"), ("witten", "Witten class of a bundle")):
        p = add(name, help_)
        p.add_argument("--bundle", required=True)
        p.add_argument("--inverse", action="store_true")
    p = add("witten-h", "modular Witten class given a string structure")
    p.add_argument("--bundle", required=True)
    p.add_argument("--h", required=True, help="3-form H with dH = p1 (form name or expression)")
    p = add("anomaly", "string anomaly (coefficient of E2)")
    p.add_argument("--bundle", required=True)
    for name, help_ in (("push-an", "analytic pushforward"), ("push-top", "topological pushforward"),
                        ("index-check", "analytic = topological pushforward check")):
        p = add(name, help_)
        p.add_argument("--family", required=True)
        p.add_argument("--model", default="deRham", help="deRham, K or TMF")
        p.add_argument("--omega", default=None, help="form name or expression (default: fibre top)")
        p.add_argument("--string-structure", action="store_true")
        if name == "index-check":
            p.add_argument("--samples", type=int, default=3)
            p.add_argument("--seed", type=int, default=0)
    p = add("eisenstein", "Eisenstein series", spec=False)
    p.add_argument("--weight", type=int, required=True)
    p.add_argument("--lattice", action="store_true", help="2 zeta(w) normalisation")
    p = add("eta", "eta product prod(1 - q^n)", spec=False)
    p.add_argument("order", type=int, nargs="?", default=None)
    p = add("zeta-lab", "numerical zeta-regularisation checks", spec=False)
    p.add_argument("subtest", choices=ZETA_SUBTESTS)
    p.add_argument("order", type=int, nargs="?", default=None)
    p.add_argument("--s", default="2")
    p.add_argument("--a", default="1")
    p.add_argument("--r", type=float, default=6.283185307179586)
    p.add_argument("--lam", type=float, default=0.5)
    p.add_argument("--tau", default="2i")
    p.add_argument("--weight", type=int, default=2)
    p.add_argument("--cutoff", type=int, default=2000)
    p.add_argument("--order-mode", choices=("m_first", "n_first"), default="m_first")
    p = add("run", "run the commands listed in a spec")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers (output order preserved)")
    return parser


def _render(res, as_json):
    if as_json:
        payload = {"schema_version": SCHEMA_VERSION, "command": res.command,
                   "status": "ok" if res.ok else "fail", "result": _jsonable(res.payload)}
        return json.dumps(payload, sort_keys=True) + "\n"
    return "\n".join(res.lines) + "\n"


def _error_line(e):
    if isinstance(e, SpecError):
        return "\n".join(f"ERROR {e.op}: {msg}" for msg in e.errors) + "\n"
    return f"ERROR {e.op}: {e}\n"


def _run_captured(argv):
    """Run one command; return ``(exit_code, stdout_text, stderr_text)``."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return (2 if e.code else 0, "", f"ERROR cli.args: cannot parse {' '.join(argv)!r}\n")
    return run_command(args)


def run_command(args):
    try:
        res = _HANDLERS[args.command](args)
    except EllmqError as e:
        return 2, "", _error_line(e)
    if isinstance(res, list):
        out, err, code = [], [], 0
        for c, o, e in res:
            out.append(o)
            err.append(e)
            code = max(code, c)
        return code, "".join(out), "".join(err)
    return (0 if res.ok else 1), _render(res, args.json), ""


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    code, out, err = run_command(args)
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
