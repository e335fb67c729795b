"""Command-line front end: eval, image, quad, verify, sweep.

Exit codes: 0 success, 1 domain error, 2 non-convergence, 3 validity or
slice failure, 64 usage.
"""
from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from typing import Sequence

import numpy as np

from . import errors as E
from .fixtures import discrepancy_report
from .image_formulas import THEOREMS, eval_image, theorem_image
from .msm_operators import Integrand, MsmParams, msm_derivative_left, msm_derivative_right, msm_integral_left, \
    msm_integral_right
from .series_engine import (FoxWrightSpec, StruveParams, appell_f3, fox_wright, gauss_2f1, hypergeometric_pfq,
                            struve_generalized)
from .verification import SUITES, csv_text, run_suite, struve_integrand, summary

EXIT_OK, EXIT_DOMAIN, EXIT_NONCONV, EXIT_VALIDITY, EXIT_USAGE = 0, 1, 2, 3, 64

# JSON key -> (attribute, flag)
PARAM_KEYS = {
    "lambda": "lam", "lambda2": "lam2", "xi1": "xi1", "xi2": "xi2", "gamma": "gamma",
    "a": "a", "p": "p", "b": "b", "c": "c", "xi_s": "xi_s", "alpha": "alpha", "mu": "mu",
    "rho": "rho", "x": "x",
}
DEFAULTS = {"lambda": 0, "lambda2": 0, "xi1": 0, "xi2": 0, "gamma": 1, "a": 1, "p": 0.5, "b": 1, "c": 1,
            "xi_s": 1, "alpha": 1, "mu": 1.5, "rho": 1, "x": 1}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_complex(text: str) -> complex:
    """'RE' or 'RE+IMj'."""
    try:
        return complex(str(text).replace(" ", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def fmt(v) -> str:
    """Shortest round-trip text; complex values as RE+IMj."""
    if isinstance(v, complex):
        if v.imag == 0:
            return repr(v.real)
        sign = "-" if v.imag < 0 or (v.imag == 0 and str(v.imag).startswith("-")) else "+"
        return f"{v.real!r}{sign}{abs(v.imag)!r}j"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _tol(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 1e-14 < v < 1e-2:
        raise argparse.ArgumentTypeError(f"tolerance must lie in (1e-14, 1e-2), got {v:g}")
    return v


def _add_param_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("parameters (inline flags or --params, not both)")
    g.add_argument("--params", metavar="FILE", help="JSON file with keys " + ", ".join(PARAM_KEYS))
    for key in PARAM_KEYS:
        flag = "--" + key.replace("_", "-")
        if key == "a":
            g.add_argument(flag, dest=key, type=int, default=None)
        elif key in ("xi_s", "alpha", "x"):
            g.add_argument(flag, dest=key, type=float, default=None)
        else:
            g.add_argument(flag, dest=key, type=parse_complex, default=None)


def _collect_params(args) -> dict:
    inline = {k: getattr(args, k) for k in PARAM_KEYS if getattr(args, k, None) is not None}
    if args.params and inline:
        raise UsageError(f"use either --params or inline flags, not both (got {', '.join(sorted(inline))})")
    vals = dict(DEFAULTS)
    if args.params:
        try:
            with open(args.params, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read --params: {exc}") from None
        unknown = set(data) - set(PARAM_KEYS)
        if unknown:
            raise UsageError(f"unknown parameter keys: {', '.join(sorted(unknown))}")
        for k, v in data.items():
            if isinstance(v, list) and len(v) == 2:
                v = complex(v[0], v[1])
            elif isinstance(v, str):
                v = parse_complex(v)
            vals[k] = v
    else:
        vals.update(inline)
    return vals


def _real(v, name: str) -> float:
    v = complex(v)
    if v.imag:
        raise UsageError(f"{name} must be real")
    return v.real


def _msm(vals: dict) -> MsmParams:
    return MsmParams(complex(vals["lambda"]), complex(vals["lambda2"]), complex(vals["xi1"]),
                     complex(vals["xi2"]), complex(vals["gamma"]))


def _sp(vals: dict) -> StruveParams:
    a = _real(vals["a"], "a")
    if a != int(a):
        raise UsageError("a must be a positive integer")
    return StruveParams(a=int(a), p=complex(vals["p"]), b=complex(vals["b"]), c=complex(vals["c"]),
                        xi_s=_real(vals["xi_s"], "xi_s"), alpha=_real(vals["alpha"], "alpha"),
                        mu=complex(vals["mu"]))


def _pairs(text: str) -> list[tuple[complex, float]]:
    if not text.strip():
        return []
    out = []
    for item in text.split(","):
        if ":" not in item:
            raise UsageError(f"Fox-Wright pair {item!r} must be written value:weight")
        a, w = item.split(":", 1)
        out.append((parse_complex(a), float(w)))
    return out


def _list(text: str) -> list[complex]:
    return [parse_complex(t) for t in text.split(",")] if text.strip() else []


def _print_series(res) -> None:
    print(f"value = {fmt(complex(res.value))}")
    print(f"terms_used = {res.terms_used}")
    print(f"truncation_estimate = {fmt(float(res.truncation_estimate))}")


# ---------------------------------------------------------------------------
# commands


def eval_command(args) -> int:
    fn = args.function
    if fn == "struve":
        sp = StruveParams(a=args.a, p=args.p, b=args.b, c=args.c, xi_s=args.xi_s, alpha=args.alpha, mu=args.mu)
        res = struve_generalized(sp, args.z, tol=args.tol)
    elif fn == "foxwright":
        res = fox_wright(FoxWrightSpec.of(_pairs(args.upper), _pairs(args.lower)), args.z, tol=args.tol)
    elif fn == "pfq":
        res = hypergeometric_pfq(_list(args.upper), _list(args.lower), args.z, tol=args.tol)
    elif fn == "f3":
        res = appell_f3(args.a, args.a2, args.b, args.b2, args.c, args.w, args.z, tol=args.tol)
    else:
        w = _real(args.w, "w")
        print(f"value = {fmt(complex(gauss_2f1(args.a, args.b, args.c, w)))}")
        return EXIT_OK
    _print_series(res)
    return EXIT_OK if res.converged else EXIT_NONCONV


def _image_lines(img, vals, value, tid: str, as_json: bool) -> list[str]:
    up = [(fmt(complex(a)), w) for a, w in img.spec.upper]
    lo = [(fmt(complex(b)), w) for b, w in img.spec.lower]
    lines = [f"theorem = {tid}",
             f"prefactor = {fmt(img.prefactor_coefficient)} * x^({fmt(img.prefactor_power)})",
             f"argument = {img.argument_rule}",
             "upper = " + ", ".join(f"({a}, {w!r})" for a, w in up),
             "lower = " + ", ".join(f"({b}, {w!r})" for b, w in lo),
             f"value(x={vals['x']!r}) = {fmt(complex(value.value))}",
             f"terms_used = {value.terms_used}",
             f"truncation_estimate = {fmt(float(value.truncation_estimate))}"]
    notes = [str(m) for m in discrepancy_report((tid,))]
    lines += [f"printed-display discrepancy: {n}" for n in notes]
    if as_json:
        lines.append(json.dumps({
            "theorem": tid, "prefactor_coefficient": fmt(img.prefactor_coefficient),
            "prefactor_power": fmt(img.prefactor_power), "argument_rule": img.argument_rule,
            "upper": [[a, w] for a, w in up], "lower": [[b, w] for b, w in lo],
            "value": fmt(complex(value.value)), "discrepancies": notes}, sort_keys=True))
    return lines


def image_command(args) -> int:
    vals = _collect_params(args)
    img = theorem_image(args.theorem, _msm(vals), _sp(vals), complex(vals["rho"]))
    x = _real(vals["x"], "x")
    res = eval_image(img, x, tol=args.tol)
    print("\n".join(_image_lines(img, vals, res, args.theorem, not args.no_json)))
    return EXIT_OK if res.converged else EXIT_NONCONV


def quad_command(args) -> int:
    vals = _collect_params(args)
    msm = _msm(vals)
    rho = complex(vals["rho"])
    x = _real(vals["x"], "x")
    left = args.operator in ("i-left", "d-left")
    if args.struve_k:
        f = struve_integrand(_sp(vals), rho, args.struve_k, "left" if left else "right")
    else:
        f = Integrand.monomial(rho - 1 if left else -rho)
    if args.operator == "i-left":
        res = msm_integral_left(msm, f, x, tol=args.tol, support=args.support)
    elif args.operator == "i-right":
        res = msm_integral_right(msm, f, x, tol=args.tol, support=args.support)
    elif args.operator == "d-left":
        res = msm_derivative_left(msm, f, x, tol=max(args.tol, 1e-4))
    else:
        res = msm_derivative_right(msm, f, x, tol=max(args.tol, 1e-4))
    print(f"value = {fmt(complex(res.value))}")
    print(f"abs_error_estimate = {fmt(float(res.abs_error_estimate))}")
    print(f"nodes = {res.nodes}")
    print(f"converged = {res.converged}")
    return EXIT_OK if res.converged else EXIT_NONCONV


def verify_command(args) -> int:
    rep = run_suite(args.suite, args.n, seed=args.seed, tol=args.tol, workers=args.workers)
    header = None if args.no_header else f"generated {datetime.now(timezone.utc).isoformat(timespec='seconds')}"
    if args.out:
        text = csv_text(rep, header)
        if args.out == "-":
            sys.stdout.write(text)
        else:
            with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
    if args.json:
        with open(args.json, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(summary(rep), fh, indent=2, sort_keys=True)
            fh.write("\n")
    stream = sys.stderr if args.out == "-" else sys.stdout
    print(f"{rep.suite_id}: {rep.n_pass}/{rep.n_cases} pass, worst relative error "
          f"{rep.worst_relative_error:.3e}, structural failures {rep.structural_failures}", file=stream)
    for note in rep.discrepancy_notes:
        print(f"note: {note}", file=stream)
    return EXIT_OK if rep.structural_failures == 0 else EXIT_VALIDITY


def _grid(spec: str) -> tuple[str, np.ndarray]:
    try:
        key, rng = spec.split("=", 1)
        lo, hi, n = rng.split(":")
        values = np.linspace(float(lo), float(hi), int(n))
    except ValueError:
        raise UsageError(f"--grid expects key=lo:hi:n, got {spec!r}") from None
    if key not in PARAM_KEYS:
        raise UsageError(f"--grid key {key!r} is not a parameter")
    return key, values


def sweep_command(args) -> int:
    base = _collect_params(args)
    grids = [_grid(g) for g in args.grid]
    keys = [k for k, _ in grids]
    mesh = np.meshgrid(*[v for _, v in grids], indexing="ij")
    out = open(args.out, "w", encoding="utf-8", newline="\n") if args.out else sys.stdout
    status = EXIT_OK
    try:
        out.write(",".join(keys + ["value_re", "value_im", "status"]) + "\n")
        for idx in np.ndindex(mesh[0].shape if mesh else ()):
            vals = dict(base)
            point = [float(m[idx]) for m in mesh]
            vals.update(zip(keys, point))
            try:
                img = theorem_image(args.theorem, _msm(vals), _sp(vals), complex(vals["rho"]))
                v = complex(eval_image(img, _real(vals["x"], "x"), tol=args.tol).value)
                row, st = [repr(v.real), repr(v.imag)], "ok"
            except E.MsmError as exc:
                row, st = ["nan", "nan"], type(exc).__name__
                status = EXIT_DOMAIN
            out.write(",".join([repr(p) for p in point] + row + [st]) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return status


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="msmstruve", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ev = sub.add_parser("eval", help="evaluate a special function")
    evs = ev.add_subparsers(dest="function", required=True, parser_class=_Parser)
    s = evs.add_parser("struve")
    s.add_argument("--a", type=int, default=1)
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--mu", type=parse_complex, default=1.5)
    s.add_argument("--xi-s", dest="xi_s", type=float, default=1.0)
    s.add_argument("--b", type=parse_complex, default=1)
    s.add_argument("--c", type=parse_complex, default=1)
    s.add_argument("--p", type=parse_complex, default=0.5)
    s.add_argument("--z", type=parse_complex, required=True)
    for name in ("foxwright", "pfq"):
        q = evs.add_parser(name)
        q.add_argument("--upper", default="", help="a:w,a:w" if name == "foxwright" else "a1,a2,...")
        q.add_argument("--lower", default="")
        q.add_argument("--z", type=parse_complex, required=True)
    f3 = evs.add_parser("f3")
    for k in ("a", "a2", "b", "b2", "c", "w", "z"):
        f3.add_argument(f"--{k}", type=parse_complex, required=True)
    h = evs.add_parser("2f1")
    for k in ("a", "b", "c", "w"):
        h.add_argument(f"--{k}", type=parse_complex, required=True)
    for p in evs.choices.values():
        p.add_argument("--tol", type=_tol, default=1e-13)

    im = sub.add_parser("image", help="compile and evaluate a theorem image")
    im.add_argument("theorem", choices=THEOREMS)
    _add_param_flags(im)
    im.add_argument("--tol", type=_tol, default=1e-13)
    im.add_argument("--no-json", action="store_true", help="omit the JSON line")

    qd = sub.add_parser("quad", help="direct quadrature of an MSM operator")
    qd.add_argument("operator", choices=("i-left", "i-right", "d-left", "d-right"))
    _add_param_flags(qd)
    qd.add_argument("--struve-k", type=int, default=0, help="use the K-term truncated Struve integrand")
    qd.add_argument("--support", choices=("full", "restricted"), default="full")
    qd.add_argument("--tol", type=_tol, default=1e-10)

    vf = sub.add_parser("verify", help="run a seeded verification suite")
    vf.add_argument("--suite", choices=SUITES, required=True)
    vf.add_argument("--n", type=int, default=100)
    vf.add_argument("--seed", type=int, default=0)
    vf.add_argument("--tol", type=_tol, default=None)
    vf.add_argument("--out", help="CSV report path ('-' for stdout)")
    vf.add_argument("--json", help="JSON summary path")
    vf.add_argument("--no-header", action="store_true", help="omit the timestamp line of the CSV")
    vf.add_argument("--workers", type=int, default=1)

    sw = sub.add_parser("sweep", help="CSV of theorem-image values over a parameter grid")
    sw.add_argument("theorem", choices=THEOREMS)
    _add_param_flags(sw)
    sw.add_argument("--grid", action="append", required=True, metavar="KEY=LO:HI:N")
    sw.add_argument("--tol", type=_tol, default=1e-13)
    sw.add_argument("--out")
    return parser


_COMMANDS = {"eval": eval_command, "image": image_command, "quad": quad_command,
             "verify": verify_command, "sweep": sweep_command}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        parser.exit(EXIT_USAGE, f"msmstruve: error: {exc}\n")
    except (E.ValidityError, E.SliceError) as exc:
        print(f"validity error: {exc}", file=sys.stderr)
        return EXIT_VALIDITY
    except (E.NonConvergence, E.StepError) as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONV
    except (E.MsmError, OverflowError, ZeroDivisionError) as exc:
        print(f"domain error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
