"""Printed theorem displays as data, and their comparison with the compiled images.

The fixture text is parsed with sympy; offsets are compared symbolically,
pairs as multisets, so reordering inside a display is not a discrepancy.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from types import SimpleNamespace

import sympy

from .image_formulas import THEOREMS, theorem_pairs
from .series_engine import FoxWrightSpec, fox_wright

SYMBOL_NAMES = ("rho", "p", "lambda", "lambda2", "xi1", "xi2", "gamma", "mu", "b", "c", "xi_s", "alpha", "a", "x")
_INTERNAL = {"lambda": "lam", "lambda2": "lam2"}
SYMBOLS = {name: sympy.Symbol(_INTERNAL.get(name, name)) for name in SYMBOL_NAMES}
_LOCALS = {_INTERNAL.get(n, n): s for n, s in SYMBOLS.items()}
_RENAME = re.compile(r"\blambda2?\b")


def parse(text: str) -> sympy.Expr:
    """Parse a fixture expression; ``lambda`` and ``gamma`` are plain symbols here."""
    return sympy.sympify(_RENAME.sub(lambda m: _INTERNAL[m.group(0)], text), locals=_LOCALS)


@dataclass
class PrintedRecord:
    theorem_id: str
    lemma: str
    prefactor_coefficient: sympy.Expr
    prefactor_power: sympy.Expr
    argument: sympy.Expr
    upper: list[tuple[sympy.Expr, sympy.Expr]] = field(default_factory=list)
    lower: list[tuple[sympy.Expr, sympy.Expr]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class Mismatch:
    theorem_id: str
    field: str
    printed: str | None
    generated: str | None

    def __str__(self) -> str:
        return f"{self.theorem_id} {self.field}: printed {self.printed}, generated {self.generated}"


def parse_fixture_text(text: str) -> dict[str, PrintedRecord]:
    records: dict[str, PrintedRecord] = {}
    cur: dict | None = None
    tid = None

    def flush():
        if cur is not None:
            records[tid] = PrintedRecord(tid, cur["lemma"], cur["prefactor_coefficient"], cur["prefactor_power"],
                                         cur["argument"], cur["upper"], cur["lower"], cur["notes"])

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            flush()
            tid = line[1:-1]
            cur = {"upper": [], "lower": [], "notes": []}
            continue
        if cur is None or "=" not in line:
            raise ValueError(f"fixture line {lineno}: unexpected {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in ("upper", "lower"):
            off, w = value.split(";")
            cur[key].append((parse(off), parse(w)))
        elif key == "note":
            cur["notes"].append(value)
        elif key == "lemma":
            cur["lemma"] = value
        elif key in ("prefactor_coefficient", "prefactor_power", "argument"):
            cur[key] = parse(value)
        else:
            raise ValueError(f"fixture line {lineno}: unknown key {key!r}")
    flush()
    return records


@lru_cache(maxsize=1)
def load_printed() -> dict[str, PrintedRecord]:
    text = resources.files("msmstruve").joinpath("data/printed_theorems.txt").read_text(encoding="utf-8")
    return parse_fixture_text(text)


def _symbolic_params():
    s = SYMBOLS
    msm = SimpleNamespace(lam=s["lambda"], lam2=s["lambda2"], xi1=s["xi1"], xi2=s["xi2"], gamma=s["gamma"])
    sp = SimpleNamespace(p=s["p"], b=s["b"], c=s["c"], xi_s=s["xi_s"], alpha=s["alpha"], mu=s["mu"], a=s["a"])
    return msm, sp


@lru_cache(maxsize=8)
def generated_record(theorem_id: str) -> PrintedRecord:
    """The compiled image in the fixture's shape, with symbolic parameters."""
    msm, sp = _symbolic_params()
    parts = theorem_pairs(theorem_id, msm, sp, SYMBOLS["rho"])
    c, x = SYMBOLS["c"], SYMBOLS["x"]
    arg = -c / 4 * x ** parts["argument_power"]
    return PrintedRecord(theorem_id, "", sympy.sympify(parts["prefactor_coefficient"]),
                         sympy.sympify(parts["prefactor_power"]), arg,
                         [(sympy.sympify(o), sympy.sympify(w)) for o, w in parts["upper"]],
                         [(sympy.sympify(o), sympy.sympify(w)) for o, w in parts["lower"]])


def _same(e1, e2) -> bool:
    return sympy.simplify(e1 - e2) == 0


def _fmt_pair(pair) -> str:
    return f"({pair[0]}, {pair[1]})"


def _compare_pairs(tid: str, name: str, printed, generated) -> list[Mismatch]:
    left = list(generated)
    unmatched = []
    for pp in printed:
        for i, gp in enumerate(left):
            if _same(pp[0], gp[0]) and _same(pp[1], gp[1]):
                del left[i]
                break
        else:
            unmatched.append(pp)
    out = []
    for pp in unmatched:
        # closest generated pair: equal weight first, then fewest symbols in the offset difference
        def distance(gp):
            return (not _same(pp[1], gp[1]), len(sympy.expand(pp[0] - gp[0]).free_symbols))

        gp = min(left, key=distance) if left else None
        if gp is not None:
            left.remove(gp)
        out.append(Mismatch(tid, name, _fmt_pair(pp), _fmt_pair(gp) if gp else None))
    out += [Mismatch(tid, name, None, _fmt_pair(gp)) for gp in left]
    return out


def discrepancy_report(theorem_ids=THEOREMS) -> list[Mismatch]:
    """Every difference between a printed display and the compiled image."""
    printed = load_printed()
    out: list[Mismatch] = []
    for tid in theorem_ids:
        pr, gen = printed[tid], generated_record(tid)
        for name in ("prefactor_coefficient", "prefactor_power", "argument"):
            a, b = getattr(pr, name), getattr(gen, name)
            if not _same(a, b):
                out.append(Mismatch(tid, name, str(a), str(b)))
        out += _compare_pairs(tid, "upper", pr.upper, gen.upper)
        out += _compare_pairs(tid, "lower", pr.lower, gen.lower)
    return out


def _values(msm, sp, rho, x) -> dict:
    s = SYMBOLS
    return {s["rho"]: rho, s["p"]: sp.p, s["lambda"]: msm.lam, s["lambda2"]: msm.lam2, s["xi1"]: msm.xi1,
            s["xi2"]: msm.xi2, s["gamma"]: msm.gamma, s["mu"]: sp.mu, s["b"]: sp.b, s["c"]: sp.c,
            s["xi_s"]: sp.xi_s, s["alpha"]: sp.alpha, s["a"]: sp.a, s["x"]: x}


@lru_cache(maxsize=8)
def _printed_lambdas(theorem_id: str):
    rec = load_printed()[theorem_id]
    args = [SYMBOLS[n] for n in SYMBOL_NAMES]
    exprs = ([rec.prefactor_coefficient, rec.prefactor_power, rec.argument]
             + [e for pair in rec.upper for e in pair] + [e for pair in rec.lower for e in pair])
    return sympy.lambdify(args, exprs, modules="cmath"), len(rec.upper), len(rec.lower)


def printed_value(theorem_id: str, msm, sp, rho, x: float, tol: float = 1e-14) -> complex:
    """Numerical value of the printed display, taken literally."""
    fn, nu, nl = _printed_lambdas(theorem_id)
    vals = _values(msm, sp, complex(rho), x)
    out = [complex(v) for v in fn(*[vals[SYMBOLS[n]] for n in SYMBOL_NAMES])]
    coef, power, arg = out[:3]
    flat = out[3:]
    upper = [(flat[2 * i], flat[2 * i + 1].real) for i in range(nu)]
    lower = [(flat[2 * nu + 2 * i], flat[2 * nu + 2 * i + 1].real) for i in range(nl)]
    series = fox_wright(FoxWrightSpec.of(upper, lower), arg, tol=tol)
    return coef * x ** power * series.value
