"""One test per acceptance criterion; each records a PASS/FAIL line shown in the terminal summary."""
import cmath
import math
import sys
import time

import mpmath
import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from msmstruve import (DivergenceError, FoxWrightSpec, MsmParams, StruveParams, eval_image, fox_wright,
                       struve_generalized, theorem_image)
from msmstruve import gamma_core as gc
from msmstruve.fixtures import discrepancy_report, printed_value
from msmstruve.series_engine import convergence_index
from msmstruve.verification import (oracle_quadrature, oracle_termwise, relative_error, run_suite,
                                    sample_params)

SEED = 42


def record(name: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line, file=sys.stderr)


class Clock:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def test_gamma_identities():
    with Clock() as clk:
        rep = run_suite("gamma", 1000, seed=SEED, tol=1e-11)
        rng = np.random.default_rng(SEED)
        worst_dual = 0.0
        for _ in range(1000):
            z = cmath.rect(rng.uniform(0.5, 100), rng.uniform(-math.pi, math.pi))
            if z.real < 0 and abs(z.imag) < 0.5:
                continue
            worst_dual = max(worst_dual, abs(cmath.exp(gc.log_gamma(z) - gc.log_gamma_stirling(z)) - 1))
    ok = rep.n_pass == 1000 and worst_dual <= 1e-12 and clk.elapsed < 5
    record("gamma identity suite", ok, f"{rep.n_pass}/1000 at 1e-11 (worst {rep.worst_relative_error:.1e}), "
           f"dual-algorithm worst {worst_dual:.1e} for |z| <= 100, {clk.elapsed:.2f} s")
    assert ok


def test_fox_wright_reductions():
    with Clock() as clk:
        e_err = relative_error(math.e, fox_wright(FoxWrightSpec.of(), 1).value)
        rep = run_suite("foxwright", 200, seed=SEED, tol=1e-11)
    ok = e_err <= 1e-11 and rep.n_pass == 200 and clk.elapsed < 5
    record("Fox-Wright reductions", ok, f"0Psi0(1) rel. error {e_err:.1e}; unit-weight pFq {rep.n_pass}/200 "
           f"(worst {rep.worst_relative_error:.1e}), {clk.elapsed:.2f} s")
    assert ok


def test_struve_classical_reduction():
    with Clock() as clk:
        rep = run_suite("struve", 20, seed=SEED, tol=1e-12)
        worst_ref = 0.0
        for p in (0, 1):
            sp = StruveParams(a=1, p=p, b=1, c=1, xi_s=1.0, alpha=1.0, mu=1.5)
            for z in (0.5, 2.0, 6.0):
                with mpmath.workdps(40):
                    ref = mpmath.fsum((-1) ** k * (mpmath.mpf(z) / 2) ** (2 * k + p + 1)
                                      / (mpmath.gamma(k + 1.5) * mpmath.gamma(k + p + 1.5)) for k in range(50))
                worst_ref = max(worst_ref, relative_error(complex(ref), struve_generalized(sp, z).value))
    ok = rep.n_pass == 20 and worst_ref <= 1e-12 and clk.elapsed < 2
    record("Struve classical reduction", ok, f"H_1/2 closed form {rep.n_pass}/20 (worst {rep.worst_relative_error:.1e}); "
           f"50-term reference p in {{0,1}} worst {worst_ref:.1e}, {clk.elapsed:.2f} s")
    assert ok


def _zero_parameter_error(lemma: str) -> float:
    worst = 0.0
    for i in range(10):
        d = sample_params(SEED, f"{lemma}-quadrature", i)
        g, rho, x = complex(d.msm.gamma).real, complex(d.rho).real, d.x
        if lemma == "L1":
            rho = max(rho, 0.3)
            ref = math.gamma(rho) / math.gamma(rho + g) * x ** (rho + g - 1)
        else:
            rho = max(rho, g + 0.3)
            ref = math.gamma(rho - g) / math.gamma(rho) * x ** (g - rho)
        got = oracle_quadrature(lemma, MsmParams(0, 0, 0, 0, g), {"rho": rho}, x).value
        worst = max(worst, relative_error(ref, got))
    return worst


def test_lemma_quadrature():
    with Clock() as clk:
        reps = {lem: run_suite(f"{lem}-quadrature", 25, seed=SEED, tol=1e-6) for lem in ("L1", "L2")}
        zero = {lem: _zero_parameter_error(lem) for lem in ("L1", "L2")}
    ok = all(r.n_pass == 25 for r in reps.values()) and max(zero.values()) <= 1e-8 and clk.elapsed < 60
    record("power-image lemma quadrature", ok,
           f"L1 {reps['L1'].n_pass}/25 (worst {reps['L1'].worst_relative_error:.1e}), "
           f"L2 {reps['L2'].n_pass}/25 (worst {reps['L2'].worst_relative_error:.1e}); "
           f"zero-parameter RL/Weyl worst {max(zero.values()):.1e}, {clk.elapsed:.2f} s")
    assert ok


def test_derivative_lemmas():
    with Clock() as clk:
        reps = {d: run_suite(d, 200, seed=SEED, tol=1e-10) for d in ("D1", "D2")}
    ok = all(r.n_pass == 200 for r in reps.values()) and clk.elapsed < 5
    record("derivative lemmas", ok, ", ".join(f"{k} {r.n_pass}/200 (worst {r.worst_relative_error:.1e})"
                                             for k, r in reps.items()) + f", {clk.elapsed:.2f} s")
    assert ok


def test_theorems_termwise():
    with Clock() as clk:
        reps = {t: run_suite(f"{t}-termwise", 100, seed=SEED, tol=1e-10) for t in ("T1", "T2", "T3", "T4")}
    ok = all(r.n_pass == 100 for r in reps.values()) and clk.elapsed < 30
    record("theorems term-wise", ok, ", ".join(f"{k} {r.n_pass}/100 (worst {r.worst_relative_error:.1e})"
                                              for k, r in reps.items()) + f", {clk.elapsed:.2f} s")
    assert ok


def test_theorem1_closure():
    with Clock() as clk:
        rep = run_suite("T1-closure", 10, seed=SEED, tol=1e-5)
    ok = rep.n_pass == 10 and clk.elapsed < 120
    record("T1 truncated-Struve closure", ok,
           f"{rep.n_pass}/10 (worst {rep.worst_relative_error:.1e}), {clk.elapsed:.2f} s")
    assert ok


# mismatches known up front
DOCUMENTED = {
    ("T2", "argument"): "-c/(4*x**2)",
    ("T2", "lower"): "(lam + p + rho - xi1 + 1, 2)",
    ("T3", "lower"): "(b/2 + p/xi_s + 1, a)",
}
# one further T3 mismatch: the third upper pair is printed without p
T3_EXTRA = ("T3", "upper", "(lam + rho - xi1 + 1, 2)", "(lam + p + rho - xi1 + 1, 2)")


def test_fixture_discrepancy_report():
    report = [(m.theorem_id, m.field, m.printed, m.generated) for m in discrepancy_report(("T2", "T3"))]
    named = all(any((t, f) == key and g == gen for t, f, _, g in report) for key, gen in DOCUMENTED.items())
    extras = [r for r in report if (r[0], r[1]) not in DOCUMENTED]
    # every entry must be a real disagreement: the printed display misses the oracle numerically
    m = MsmParams(0.3, 0.2, 0.1, 0.4, 0.7)
    sp = StruveParams(a=1, p=0.8, b=1.0, c=1.0, xi_s=1.2, alpha=1.0, mu=1.2)  # mu = xi_s hides p/mu
    ref = oracle_termwise("T3", m, sp, 1.5, 1.0)
    extra_is_real = relative_error(ref, printed_value("T3", m, sp, 1.5, 1.0)) > 1e-3
    compiled_ok = relative_error(ref, eval_image(theorem_image("T3", m, sp, 1.5), 1.0).value) <= 1e-12
    exact = named and extras == [T3_EXTRA]
    detail = (f"{len(report)} T2/T3 mismatches; documented ones {'all present' if named else 'MISSING'}; "
              f"beyond them: {extras or 'none'}")
    if extras == [T3_EXTRA]:
        detail += (f" (a genuine misprint: with mu = xi_s the printed display is off by "
                   f"{relative_error(ref, printed_value('T3', m, sp, 1.5, 1.0)):.1e} while the compiled image "
                   "matches the oracle; see the decisions ledger)")
    ok = exact and extra_is_real and compiled_ok
    record("fixture discrepancy report", ok, detail)
    assert ok


def test_convergence_gate():
    rng = np.random.default_rng(SEED)
    with Clock() as clk:
        draws = [(t, sample_params(SEED, f"{t}-termwise", i)) for t in ("T1", "T2", "T3", "T4") for i in range(125)]
        accepted = 0
        for tid, d in draws:
            img = theorem_image(tid, d.msm, d.sp, d.rho)
            assert convergence_index(img.spec) == pytest.approx(d.sp.alpha + d.sp.a - 1, abs=1e-12)
            if fox_wright(img.spec, img.argument(1.0)).converged:
                accepted += 1
        rejected = accepted_bad = 0
        for _ in range(500):
            up = [(rng.uniform(0.5, 2), rng.uniform(0.5, 3)) for _ in range(3)]
            low = [(rng.uniform(0.5, 2), rng.uniform(0.1, max(0.1, sum(w for _, w in up) - 1.2)))]
            spec = FoxWrightSpec.of(up, low)
            assert convergence_index(spec) < -1
            try:
                fox_wright(spec, 0.1)
            except DivergenceError:
                rejected += 1
            else:
                accepted_bad += 1
    ok = accepted == 500 and rejected == 500 and accepted_bad == 0 and clk.elapsed < 1.0
    record("convergence gate", ok, f"{accepted}/500 generated bundles accepted; {rejected} Delta < -1 specs "
           f"rejected, {accepted_bad} accepted; {clk.elapsed:.2f} s")
    assert ok
