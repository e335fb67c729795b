import math

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from msmstruve import (DivergenceError, FoxWrightSpec, NonConvergence, PoleError, StruveParams, TransformError,
                       appell_f3, fox_wright, gauss_2f1, hypergeometric_pfq, struve_generalized)
from msmstruve import gamma_core as gc
from msmstruve.series_engine import convergence_index, gauss_2f1_array, sum_series

CLASSICAL = dict(a=1, b=1, c=1, xi_s=1.0, alpha=1.0, mu=1.5)


def rel(a, b):
    return abs(complex(a) - complex(b)) / abs(complex(b))


# --- Fox-Wright -------------------------------------------------------------

def test_convergence_index_examples():
    assert convergence_index(FoxWrightSpec.of([(1, 1)], [])) == -1
    assert convergence_index(FoxWrightSpec.of([], [(0.3, 1.7)])) == 1.7
    spec = FoxWrightSpec.of([(1, 2), (2, 2), (3, 2), (1, 1)], [(1, 2), (2, 2), (3, 2), (1.2, 0.8), (2, 3)])
    assert convergence_index(spec) == pytest.approx(0.8 + 3 - 1)


def test_fox_wright_closed_forms():
    assert fox_wright(FoxWrightSpec.of(), 1).value.real == pytest.approx(math.e, rel=1e-15)
    got = fox_wright(FoxWrightSpec.of([(1, 1)], [(2, 1)]), 1).value.real
    assert got == pytest.approx(math.e - 1, rel=1e-15)


def test_fox_wright_matches_independent_termwise_sum():
    upper = [(1.3, 2), (0.7 + 0.2j, 2), (2.1, 2), (1, 1)]
    lower = [(1.9, 2), (2.4, 2), (1.6 - 0.1j, 2), (1.1, 0.9), (1.8, 2)]
    z = -0.25
    with mpmath.workdps(30):
        ref = mpmath.nsum(lambda k: mpmath.fprod(mpmath.gamma(a + w * k) for a, w in upper)
                          / mpmath.fprod(mpmath.gamma(b + w * k) for b, w in lower)
                          * mpmath.mpf(z) ** k / mpmath.factorial(k), [0, mpmath.inf])
    got = fox_wright(FoxWrightSpec.of(upper, lower), z).value
    assert rel(got, complex(ref)) <= 1e-12


@given(st.lists(st.floats(0.1, 3), min_size=0, max_size=2), st.lists(st.floats(0.1, 3), min_size=0, max_size=2),
       st.floats(-2, 2))
def test_unit_weight_reduction_to_pfq(a, b, z):
    assume(len(a) <= len(b) + 1)
    spec = FoxWrightSpec.of([(v, 1) for v in a], [(v, 1) for v in b])
    if len(a) == len(b) + 1:
        z *= 0.25
    scale = gc.gamma_ratio(gc.GammaRatioBundle.of(a, b))
    ref = scale * hypergeometric_pfq(a, b, z).value
    got = fox_wright(spec, z).value
    assert abs(got - ref) <= 1e-11 * max(abs(ref), 1e-300) + 1e-300


def test_fox_wright_divergence_gate():
    with pytest.raises(DivergenceError):
        fox_wright(FoxWrightSpec.of([(1, 2)], []), 0.1)
    with pytest.raises(DivergenceError):
        fox_wright(FoxWrightSpec.of([(1, 1)], []), 1.5)
    assert fox_wright(FoxWrightSpec.of([(1, 1)], []), 0.5).value.real == pytest.approx(2.0)


def test_fox_wright_reports_non_convergence():
    with pytest.raises(NonConvergence):
        fox_wright(FoxWrightSpec.of(), 40.0, k_max=20)


# --- pFq and 2F1 -------------------------------------------------------------

def test_pfq_examples():
    assert hypergeometric_pfq([], [], 1).value.real == pytest.approx(math.e, rel=1e-15)
    assert hypergeometric_pfq([1, 1], [2], 0.5).value.real == pytest.approx(2 * math.log(2), rel=1e-15)
    spec = FoxWrightSpec.of([(0.3, 1), (0.7, 1)], [(1.1, 1)])
    fw = fox_wright(spec, -0.4).value / gc.gamma_ratio(gc.GammaRatioBundle.of([0.3, 0.7], [1.1]))
    assert rel(hypergeometric_pfq([0.3, 0.7], [1.1], -0.4).value, fw) <= 1e-13


def test_pfq_errors():
    with pytest.raises(DivergenceError):
        hypergeometric_pfq([1, 1], [2], 1.2)
    with pytest.raises(DivergenceError):
        hypergeometric_pfq([1, 1, 1], [2], 0.1)
    with pytest.raises(PoleError):
        hypergeometric_pfq([1], [-2], 0.1)
    # terminating: 1 - 2*5/3 + (2*4/12)*25/2
    assert hypergeometric_pfq([-2, 1, 1], [3], 5).value.real == pytest.approx(1 - 10 / 3 + 25 / 3)


def test_gauss_2f1_examples():
    assert gauss_2f1(0.3, 0.4, 1.2, 0.0) == 1
    assert gauss_2f1(1, 1, 2, 0.9).real == pytest.approx(-math.log(0.1) / 0.9, rel=1e-14)


def test_gauss_2f1_against_raw_series_near_one():
    a, b, c, w = 0.5, 1.5, 2.5, 0.95
    terms = [1.0]
    for n in range(100_000):
        terms.append(terms[-1] * (a + n) * (b + n) / ((c + n) * (n + 1)) * w)
    ref = math.fsum(terms)
    assert rel(gauss_2f1(a, b, c, w), ref) <= 1e-13


@pytest.mark.parametrize("params", [(0.3 + 0.1j, 0.8, 1.7, 0.7), (1.2, -0.4, 0.9, 0.99), (2, 3, 4.5, 0.6),
                                    (0.5, 0.5, 1.0, 0.9), (1.3, 0.7, 4.0, 0.999)])
def test_gauss_2f1_matches_mpmath(params):
    a, b, c, w = params
    assert rel(gauss_2f1(a, b, c, w), complex(mpmath.hyp2f1(a, b, c, w))) <= 1e-12


def test_gauss_2f1_near_integer_excess_is_rejected():
    with pytest.raises(TransformError):
        gauss_2f1(0.5, 0.5, 1.0 + 1e-11 + 1e-10, 0.9)


def test_gauss_2f1_array_matches_scalar():
    ws = np.linspace(0, 0.97, 11)
    arr = gauss_2f1_array(0.4, 1.1, 2.3, ws)
    assert np.allclose(arr, [gauss_2f1(0.4, 1.1, 2.3, w) for w in ws], rtol=1e-15, atol=0)


def test_gauss_2f1_pole_in_c():
    with pytest.raises(PoleError):
        gauss_2f1(0.5, 0.5, -1, 0.2)


# --- Appell F3 --------------------------------------------------------------

def rectangular_f3(a, a2, b, b2, c, w, z, n=200):
    total = mpmath.mpf(0)
    with mpmath.workdps(30):
        for m in range(n + 1):
            for k in range(n + 1):
                total += (mpmath.rf(a, m) * mpmath.rf(a2, k) * mpmath.rf(b, m) * mpmath.rf(b2, k)
                          / (mpmath.rf(c, m + k) * mpmath.factorial(m) * mpmath.factorial(k))
                          * mpmath.mpf(w) ** m * mpmath.mpf(z) ** k)
        return complex(total)


def test_appell_f3_examples():
    assert appell_f3(0.2, 0.4, 0.6, 0.8, 1.5, 0, 0).value == 1
    ref = rectangular_f3(0.2, 0.4, 0.6, 0.8, 1.5, 0.3, 0.2, n=60)
    assert rel(appell_f3(0.2, 0.4, 0.6, 0.8, 1.5, 0.3, 0.2).value, ref) <= 1e-12


def test_appell_f3_matches_mpmath():
    args = (0.7, -0.3, 1.2, 0.5, 2.1, 0.6, -0.5)
    assert rel(appell_f3(*args).value, complex(mpmath.appellf3(*args))) <= 1e-12


@pytest.mark.parametrize("z", [0.0, 0.4, -0.9])
def test_appell_f3_collapse(z):
    got = appell_f3(0.3, 0.0, 0.9, 1.7, 1.4, 0.3, z).value
    assert rel(got, gauss_2f1(0.3, 0.9, 1.4, 0.3)) <= 1e-12
    got = appell_f3(0.3, 0.8, 0.9, 0.0, 1.4, 0.3, z).value
    assert rel(got, gauss_2f1(0.3, 0.9, 1.4, 0.3)) <= 1e-12


def test_appell_f3_outside_bidisc():
    with pytest.raises(DivergenceError):
        appell_f3(0.2, 0.4, 0.6, 0.8, 1.5, 1.2, 0.2)


# --- truncation contract ----------------------------------------------------

@given(st.floats(-20, 20), st.floats(0.05, 0.9), st.sampled_from([1e-6, 1e-10, 1e-14]))
def test_converged_sum_is_within_ten_truncation_estimates(z, r, tol):
    exp_terms = [1.0]
    for k in range(1, 400):
        exp_terms.append(exp_terms[-1] * z / k)

    def term(k):
        return exp_terms[k] + (k + 1) * r ** k

    res, abs_sum = sum_series(term, tol)
    assert res.converged and res.truncation_estimate <= tol * abs(res.value)
    longer = math.fsum(term(k) for k in range(min(2 * res.terms_used + 50, 400)))
    rounding = 8 * 2.0 ** -53 * abs_sum
    assert abs(res.value - longer) <= 10 * res.truncation_estimate + rounding


# --- generalized Struve -----------------------------------------------------

def test_struve_at_zero():
    assert struve_generalized(StruveParams(p=0.3, **CLASSICAL), 0).value == 0


def test_struve_half_integer_closed_form():
    sp = StruveParams(p=0.5, **CLASSICAL)
    for z in np.linspace(0.1, 20, 20):
        ref = math.sqrt(2 / (math.pi * z)) * (1 - math.cos(z))
        assert rel(struve_generalized(sp, z).value, ref) <= 1e-12
    assert struve_generalized(sp, math.pi).value == pytest.approx(2 * math.sqrt(2) / math.pi, rel=1e-14)


@pytest.mark.parametrize("p", [0, 1])
@pytest.mark.parametrize("z", [2.0, 7.5])
def test_struve_classical_orders(p, z):
    sp = StruveParams(p=p, **CLASSICAL)
    with mpmath.workdps(40):
        ref = mpmath.fsum((-1) ** k * (mpmath.mpf(z) / 2) ** (2 * k + p + 1)
                          / (mpmath.gamma(k + 1.5) * mpmath.gamma(k + p + 1.5)) for k in range(50))
    got = struve_generalized(sp, z).value
    assert rel(got, complex(ref)) <= 1e-12
    assert rel(got, complex(mpmath.struveh(p, z))) <= 1e-12


def test_struve_general_parameters_against_mpmath():
    sp = StruveParams(a=2, p=0.3 + 0.2j, b=0.7, c=1.4 - 0.3j, xi_s=1.6, alpha=0.8, mu=1.1)
    z = 3.0
    with mpmath.workdps(40):
        ref = mpmath.nsum(lambda k: (-mpmath.mpc(sp.c)) ** k * mpmath.rgamma(sp.alpha * k + sp.mu)
                          * mpmath.rgamma(sp.a * k + mpmath.mpc(sp.shift)) * (mpmath.mpf(z) / 2) ** (2 * k + mpmath.mpc(sp.p) + 1),
                          [0, mpmath.inf])
    assert rel(struve_generalized(sp, z).value, complex(ref)) <= 1e-12


def test_struve_terminates_for_large_argument():
    res = struve_generalized(StruveParams(p=0.2, **CLASSICAL), 50.0, tol=1e-14)
    assert res.converged and res.terms_used < 2000


def test_struve_rejects_bad_parameters():
    from msmstruve import DomainError
    with pytest.raises(DomainError):
        StruveParams(a=0)
    with pytest.raises(DomainError):
        StruveParams(alpha=-1)
