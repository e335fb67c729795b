import csv
import io
import json
import math

import pytest

from msmstruve import MsmParams, SamplingExhausted, StruveParams, power_image, validity
from msmstruve import verification as V
from msmstruve.image_formulas import THEOREM_LEMMA, integral_converges


def test_sampling_is_deterministic():
    a = V.sample_params(42, "T1-termwise", 0)
    b = V.sample_params(42, "T1-termwise", 0)
    assert a == b
    assert json.dumps(a.as_json(), sort_keys=True) == json.dumps(b.as_json(), sort_keys=True)
    assert V.sample_params(43, "T1-termwise", 0) != a


def test_sampling_ranges():
    for i in range(200):
        d = V.sample_params(9, "T3-termwise", i)
        for v in (d.msm.lam, d.msm.lam2, d.msm.xi1, d.msm.xi2, d.msm.gamma, d.rho):
            assert -2 <= complex(v).real <= 3 and -1 <= complex(v).imag <= 1
        assert d.sp.a in (1, 2, 3) and 0.5 < d.sp.alpha < 2 and 0.5 < d.sp.xi_s < 2


def test_quadrature_draws_are_real_and_collapsed():
    for suite in ("L1-quadrature", "L2-quadrature", "T1-closure"):
        for i in range(50):
            d = V.sample_params(1, suite, i)
            vals = [complex(v) for v in (d.msm.lam, d.msm.lam2, d.msm.xi1, d.msm.xi2, d.msm.gamma, d.rho)]
            assert all(v.imag == 0 for v in vals)
            lemma = "L2" if suite == "L2-quadrature" else "L1"
            assert validity(lemma, d.msm, d.rho if suite != "T1-closure" else d.rho + d.sp.p + 1)
            assert integral_converges(lemma, d.msm, d.rho if suite != "T1-closure" else d.rho + d.sp.p + 1)


@pytest.mark.parametrize("theorem", ["T1", "T2", "T3", "T4"])
def test_predicate_audit(theorem):
    lemma = THEOREM_LEMMA[theorem]
    for i in range(250):
        d = V.sample_params(5, f"{theorem}-termwise", i)
        assert validity(lemma, d.msm, d.rho + d.sp.p + 1)


def test_lemma_draws_satisfy_their_predicates():
    for suite in ("D1", "D2", "L1-quadrature", "L2-quadrature"):
        lemma = {"L1-quadrature": "L1", "L2-quadrature": "L2"}.get(suite, suite)
        for i in range(100):
            assert validity(lemma, V.sample_params(2, suite, i).msm, V.sample_params(2, suite, i).rho)


def test_sampling_exhaustion(monkeypatch):
    monkeypatch.setattr(V, "_sample_once", lambda rng, suite: (None, {}))
    with pytest.raises(SamplingExhausted):
        V.sample_params(0, "T1-termwise")


def test_oracle_termwise_single_term_when_c_is_zero():
    m = MsmParams(0.2, 0.3, 0.1, 0.4, 1.3)
    sp = StruveParams(a=2, p=0.4, b=0.6, c=0, xi_s=1.1, alpha=0.9, mu=1.2)
    rho, x = 1.5, 1.7
    coef, expo = power_image("L1", m, rho + sp.p + 1)
    expected = 2 ** -(sp.p + 1) * V.struve_coefficient(sp, 0) * coef * x ** expo
    assert abs(V.oracle_termwise("T1", m, sp, rho, x) - expected) <= 1e-14 * abs(expected)


def test_oracle_quadrature_zero_parameters():
    res = V.oracle_quadrature("L1", MsmParams(0, 0, 0, 0, 0.5), {"rho": 2.0}, 1.0)
    assert abs(res.value - math.gamma(2) / math.gamma(2.5)) <= 1e-10


def test_oracle_derivative_examples():
    got = V.oracle_derivative("D1", MsmParams(0, 0, 0, 0, 0.5), 1.0, 1.0)
    assert abs(got - 1 / math.sqrt(math.pi)) <= 1e-14
    # gamma = 1.3 -> n = 2: d^2/dx^2 of x^{rho - 1 + 2 - 1.3} / Gamma(2.7) * Gamma(2.5)
    s = 2.5 - 1 + 0.7
    expected = math.gamma(2.5) / math.gamma(2.5 + 0.7) * s * (s - 1) * 1.4 ** (s - 2)
    got = V.oracle_derivative("D1", MsmParams(0, 0, 0, 0, 1.3), 2.5, 1.4)
    assert abs(got - expected) <= 1e-13 * abs(expected)
    for i in range(20):
        d = V.sample_params(8, "D2", i)
        coef, expo = power_image("D2", d.msm, d.rho)
        ref = coef * d.x ** expo
        assert abs(V.oracle_derivative("D2", d.msm, d.rho, d.x) - ref) <= 1e-10 * abs(ref)


def test_classification():
    assert V.classify(1e-11, 1e-10) == "pass"
    assert V.classify(5e-9, 1e-10) == "numerical"
    assert V.classify(1e-7, 1e-10) == "structural"


@pytest.mark.parametrize("suite,n", [("gamma", 50), ("foxwright", 20), ("struve", 20), ("D1", 30), ("D2", 30),
                                     ("T1-termwise", 10), ("T2-termwise", 10), ("T3-termwise", 10),
                                     ("T4-termwise", 10), ("L1-quadrature", 5), ("L2-quadrature", 5),
                                     ("T1-closure", 2)])
def test_suites_pass(suite, n):
    rep = V.run_suite(suite, n, seed=42)
    assert rep.n_pass == n and not rep.failures
    assert rep.n_pass + len(rep.failures) == rep.n_cases


def test_report_determinism_and_workers():
    a = V.run_suite("T2-termwise", 12, seed=3)
    b = V.run_suite("T2-termwise", 12, seed=3)
    c = V.run_suite("T2-termwise", 12, seed=3, workers=3)
    assert V.csv_text(a) == V.csv_text(b) == V.csv_text(c)
    assert V.summary(a) == V.summary(c)


def test_termwise_suites_flag_printed_display():
    rep = V.run_suite("T4-termwise", 5, seed=1)
    assert rep.discrepancy_notes and "printed display" in rep.discrepancy_notes[0]


def test_failures_are_recorded_not_raised():
    rep = V.run_suite("gamma", 5, seed=1, tol=1e-30)
    assert rep.n_pass + len(rep.failures) == 5 and rep.failures


def test_csv_and_json_emission():
    rep = V.run_suite("D1", 4, seed=0)
    text = V.csv_text(rep, "stamp")
    lines = text.splitlines()
    assert lines[0] == "# stamp"
    rows = list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))
    assert tuple(rows[0]) == V.CSV_COLUMNS and len(rows) == 4
    for row, case in zip(rows, rep.cases):
        assert float(row["got_re"]) == case.got.real and float(row["expected_im"]) == case.expected.imag
        assert json.loads(row["params"]) == case.params
    summ = json.loads(json.dumps(V.summary(rep)))
    assert summ["n_pass"] == 4 and summ["worst_relative_error"] == rep.worst_relative_error


def test_unknown_suite():
    with pytest.raises(ValueError):
        V.run_suite("nope", 1)
