"""Series evaluation: generalized Struve, Fox-Wright, pFq, Gauss 2F1 and Appell F3.

Every routine shares one truncation rule: summation stops once three
consecutive terms are each below ``tol * |partial sum|`` *and* the term ratio
indicates a geometric tail.  ``tol`` is a relative tolerance throughout.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import mpmath
import numpy as np
from scipy import special

from . import gamma_core as gc
from .errors import DivergenceError, DomainError, NonConvergence, PoleError, TransformError

K_MAX = 2000
_EPS = 2.0 ** -53
# Below this distance of c - a - b from an integer the 2F1 connection formula
# loses more than ~9 digits, but the logarithmic formulas do not apply yet.
_NEAR_INTEGER = 1e-9


@dataclass(frozen=True)
class FoxWrightSpec:
    """Upper pairs (a_i, alpha_i) and lower pairs (b_j, beta_j) of pPsi_q."""

    upper: tuple[tuple[complex, float], ...] = ()
    lower: tuple[tuple[complex, float], ...] = ()

    @classmethod
    def of(cls, upper: Sequence[tuple[complex, float]] = (),
           lower: Sequence[tuple[complex, float]] = ()) -> "FoxWrightSpec":
        return cls(tuple((complex(a), float(w)) for a, w in upper),
                   tuple((complex(b), float(w)) for b, w in lower))


@dataclass(frozen=True)
class StruveParams:
    """Parameters of the generalized Struve series.

    ``xi_s`` is the function's own xi; the operator parameters xi1/xi2 live
    in :class:`msmstruve.msm_operators.MsmParams`.
    """

    a: int = 1
    p: complex = 0.0
    b: complex = 1.0
    c: complex = 1.0
    xi_s: float = 1.0
    alpha: float = 1.0
    mu: complex = 1.5

    def __post_init__(self):
        if int(self.a) != self.a or self.a < 1:
            raise DomainError(f"StruveParams.a must be a positive integer, got {self.a}")
        if not self.alpha > 0:
            raise DomainError(f"StruveParams.alpha must be > 0, got {self.alpha}")
        if not self.xi_s > 0:
            raise DomainError(f"StruveParams.xi_s must be > 0, got {self.xi_s}")

    @property
    def shift(self) -> complex:
        """p/xi_s + (b+2)/2, the offset of the second reciprocal gamma."""
        return self.p / self.xi_s + (self.b + 2) / 2


@dataclass
class SeriesResult:
    value: complex
    terms_used: int
    truncation_estimate: float
    converged: bool
    notes: list[str] = field(default_factory=list)


class _Neumaier:
    """Compensated running sum for complex terms."""

    __slots__ = ("re", "im", "cre", "cim")

    def __init__(self):
        self.re = self.im = self.cre = self.cim = 0.0

    def add(self, t: complex) -> None:
        x = t.real
        s = self.re + x
        if abs(self.re) >= abs(x):
            self.cre += (self.re - s) + x
        else:
            self.cre += (x - s) + self.re
        self.re = s
        y = t.imag
        s = self.im + y
        if abs(self.im) >= abs(y):
            self.cim += (self.im - s) + y
        else:
            self.cim += (y - s) + self.im
        self.im = s

    @property
    def value(self) -> complex:
        return complex(self.re + self.cre, self.im + self.cim)


def sum_series(term: Callable[[int], complex], tol: float, k_max: int = K_MAX,
               k_min: int = 0, raise_on_failure: bool = True) -> tuple[SeriesResult, float]:
    """Sum ``term(k)`` for k = 0, 1, ... under the shared truncation rule.

    ``k_min`` is the first index after which no further poles can zero a
    term, so runs of vanishing terms before it are not mistaken for a tail.
    Returns the result and the sum of term magnitudes (for conditioning checks).
    """
    acc = _Neumaier()
    small = 0
    abs_sum = 0.0
    t_prev = term(0)
    acc.add(t_prev)
    abs_sum += abs(t_prev)
    k = 0
    while True:
        s = abs(acc.value)
        if abs(t_prev) <= tol * s or (t_prev == 0 and s == 0):
            small += 1
        else:
            small = 0
        if small >= 3 and k >= k_min:
            t_next = term(k + 1)
            a_next = abs(t_next)
            a_prev = abs(t_prev)
            if a_prev == 0.0:
                ratio = 0.0 if a_next == 0.0 else math.inf
            else:
                ratio = a_next / a_prev
            if ratio < 1.0:
                est = a_next / (1.0 - ratio)
                if est <= tol * s or est == 0.0:
                    return SeriesResult(acc.value, k + 1, est, True), abs_sum
        if k + 1 >= k_max:
            msg = f"series did not converge within k_max = {k_max} terms"
            if raise_on_failure:
                raise NonConvergence(msg)
            return SeriesResult(acc.value, k + 1, math.inf, False, [msg]), abs_sum
        k += 1
        t_prev = term(k)
        acc.add(t_prev)
        abs_sum += abs(t_prev)


def _first_safe_index(pairs: Sequence[tuple[complex, float]]) -> int:
    """Smallest k with Re(offset + weight*k) > 0 for every pair."""
    k = 0
    for off, w in pairs:
        if w > 0 and off.real <= 0:
            k = max(k, int(math.floor(-off.real / w)) + 1)
    return k


def convergence_index(spec: FoxWrightSpec) -> float:
    """Delta = sum(beta_j) - sum(alpha_i)."""
    return math.fsum(w for _, w in spec.lower) - math.fsum(w for _, w in spec.upper)


def fox_wright(spec: FoxWrightSpec, z: complex, tol: float = 1e-14,
               k_max: int = K_MAX) -> SeriesResult:
    """Unnormalized Fox-Wright sum  sum_k prod Gamma(a_i + alpha_i k) / prod Gamma(b_j + beta_j k) z^k / k!."""
    z = complex(z)
    delta = convergence_index(spec)
    if delta < -1 or (delta == -1 and not abs(z) < 1):
        raise DivergenceError(f"fox_wright: Delta = {delta:g} with |z| = {abs(z):g} is outside the convergence domain")
    logz = cmath.log(z) if z != 0 else None

    def term(k: int) -> complex:
        if k > 0 and logz is None:
            return 0j
        re = [0.0]
        im = [0.0]
        for a, w in spec.upper:
            arg = a + w * k
            if gc.is_nonpositive_integer(arg):
                raise PoleError(f"fox_wright: upper gamma argument {arg} at k = {k} is a pole")
            lg = gc.log_gamma(arg)
            re.append(lg.real)
            im.append(lg.imag)
        for b, w in spec.lower:
            arg = b + w * k
            if gc.is_nonpositive_integer(arg):
                return 0j
            lg = gc.log_gamma(arg)
            re.append(-lg.real)
            im.append(-lg.imag)
        if k > 0:
            re.append(k * logz.real - math.lgamma(k + 1))
            im.append(k * logz.imag)
        lr = complex(math.fsum(re), math.fsum(im))
        if lr.real > 709.0:
            raise NonConvergence(f"fox_wright: term {k} overflows")
        return cmath.exp(lr)

    k_min = _first_safe_index(list(spec.upper) + list(spec.lower))
    if logz is None:
        t0 = term(0)
        return SeriesResult(t0, 1, 0.0, True)
    result, _ = sum_series(term, tol, k_max, min(k_min, k_max - 1))
    return result


def hypergeometric_pfq(a: Sequence[complex], b: Sequence[complex], z: complex,
                       tol: float = 1e-14, k_max: int = K_MAX) -> SeriesResult:
    """pFq by the term recurrence t_{n+1} = t_n prod(a+n)/prod(b+n) z/(n+1)."""
    a = [complex(x) for x in a]
    b = [complex(x) for x in b]
    z = complex(z)
    for bj in b:
        if gc.is_nonpositive_integer(bj):
            raise PoleError(f"hypergeometric_pfq: lower parameter {bj} is a non-positive integer")
    terminating = any(gc.is_nonpositive_integer(aj) for aj in a)
    if not terminating:
        if len(a) > len(b) + 1 or (len(a) == len(b) + 1 and not abs(z) < 1):
            raise DivergenceError(f"hypergeometric_pfq: {len(a)}F{len(b)} diverges at |z| = {abs(z):g}")
    cache = [1.0 + 0j]

    def term(n: int) -> complex:
        while len(cache) <= n:
            m = len(cache) - 1
            t = cache[-1] * z / (m + 1)
            for aj in a:
                t *= aj + m
            for bj in b:
                t /= bj + m
            cache.append(t)
        return cache[n]

    k_min = _first_safe_index([(x, 1.0) for x in a + b])
    result, _ = sum_series(term, tol, k_max, min(k_min, k_max - 1))
    return result


# ---------------------------------------------------------------------------
# Gauss 2F1 on [0, 1)


def _series_2f1(a: complex, b: complex, c: complex, x: np.ndarray, max_terms: int = 4000) -> np.ndarray:
    """Plain Gauss series, vectorized; used for |x| <= 1/2 or terminating cases."""
    x = np.asarray(x, dtype=complex)
    term = np.ones_like(x)
    total = np.ones_like(x)
    comp = np.zeros_like(x)
    for n in range(max_terms):
        term = term * ((a + n) * (b + n) / ((c + n) * (n + 1))) * x
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if n > 2 and np.all(np.abs(term) <= _EPS * np.abs(total)):
            return total
        if not np.any(term):
            return total
    raise NonConvergence("gauss 2F1 series did not converge")


def _digamma(z: complex) -> complex:
    return complex(special.psi(complex(z)))


def _log_case_2f1(a: complex, b: complex, m: int, y: np.ndarray) -> np.ndarray:
    """2F1(a, b; a+b+m; 1-y) for integer m >= 0 (logarithmic connection formulas)."""
    y = np.asarray(y, dtype=float)
    c = a + b + m
    logy = np.log(y)
    out = np.zeros(y.shape, dtype=complex)
    if m > 0:
        pref = cmath.exp(math.lgamma(m) + gc.log_gamma(c) - gc.log_gamma(a + m) - gc.log_gamma(b + m))
        t = np.ones_like(out)
        finite = np.ones_like(out)
        for n in range(1, m):
            t = t * ((a + n - 1) * (b + n - 1) / (n * (n - m))) * y
            finite = finite + t
        out = out + pref * finite
    # second part: -(y -> -y)^m Gamma(c)/(Gamma(a)Gamma(b)) sum_n ...
    lpref = gc.log_gamma_ratio(gc.GammaRatioBundle.of([c], [a, b]))
    if lpref is None:
        return out
    pref2 = -cmath.exp(lpref) * (-1) ** m
    coef = np.full(y.shape, 1.0 / math.factorial(m), dtype=complex) * y ** m
    psi_n1 = _digamma(1.0)
    psi_nm1 = _digamma(m + 1.0)
    psi_a = _digamma(a + m)
    psi_b = _digamma(b + m)
    total = np.zeros_like(out)
    comp = np.zeros_like(out)
    for n in range(4000):
        bracket = logy - psi_n1 - psi_nm1 + psi_a + psi_b
        term = coef * bracket
        yy = term - comp
        t = total + yy
        comp = (t - total) - yy
        total = t
        if n > 2 and np.all(np.abs(term) <= _EPS * np.abs(total)):
            break
        coef = coef * ((a + m + n) * (b + m + n) / ((n + 1) * (n + m + 1))) * y
        psi_n1 += 1.0 / (n + 1)
        psi_nm1 += 1.0 / (n + m + 1)
        psi_a += 1.0 / (a + m + n)
        psi_b += 1.0 / (b + m + n)
    else:
        raise NonConvergence("logarithmic 2F1 series did not converge")
    return out + pref2 * total


def gauss_2f1_array(a: complex, b: complex, c: complex, w, one_minus_w=None) -> np.ndarray:
    """Vectorized 2F1(a, b; c; w) for w in [0, 1).

    ``one_minus_w`` may carry 1 - w to full relative accuracy when w is close to 1.
    """
    a, b, c = complex(a), complex(b), complex(c)
    w = np.atleast_1d(np.asarray(w, dtype=float))
    y = 1.0 - w if one_minus_w is None else np.atleast_1d(np.asarray(one_minus_w, dtype=float))
    if np.any(w < 0) or np.any(y <= 0):
        raise DomainError("gauss_2f1: w must lie in [0, 1)")
    if gc.is_nonpositive_integer(c):
        raise PoleError(f"gauss_2f1: c = {c} is a non-positive integer")
    out = np.empty(w.shape, dtype=complex)
    if gc.is_nonpositive_integer(a) or gc.is_nonpositive_integer(b):
        return _series_2f1(a, b, c, w)
    lo = w <= 0.5
    if np.any(lo):
        out[lo] = _series_2f1(a, b, c, w[lo])
    hi = ~lo
    if not np.any(hi):
        return out
    yh = y[hi]
    s = c - a - b
    m = round(s.real)
    dist = abs(s - m)
    if dist < gc.POLE_TOL:
        if m >= 0:
            out[hi] = _log_case_2f1(a, b, m, yh)
        else:
            # Euler: F(a,b;c;w) = y^{c-a-b} F(c-a, c-b; c; w), flipping the sign of m
            out[hi] = yh ** complex(s) * _log_case_2f1(c - a, c - b, -m, yh)
        return out
    if dist < _NEAR_INTEGER:
        raise TransformError(f"gauss_2f1: c-a-b = {s} is within {dist:.1e} of an integer; connection formula degenerate")
    pa = gc.gamma_ratio(gc.GammaRatioBundle.of([c, s], [c - a, c - b]))
    pb = gc.gamma_ratio(gc.GammaRatioBundle.of([c, -s], [a, b]))
    part = np.zeros(yh.shape, dtype=complex)
    if pa != 0:
        part = part + pa * _series_2f1(a, b, 1.0 - s, yh)
    if pb != 0:
        part = part + pb * yh ** complex(s) * _series_2f1(c - a, c - b, 1.0 + s, yh)
    out[hi] = part
    return out


def gauss_2f1(a: complex, b: complex, c: complex, w: float) -> complex:
    """Scalar 2F1(a, b; c; w) for real w in [0, 1)."""
    if not 0.0 <= w < 1.0:
        raise DomainError(f"gauss_2f1: w = {w} outside [0, 1)")
    return complex(gauss_2f1_array(a, b, c, np.array([w]))[0])


# ---------------------------------------------------------------------------
# Appell F3


def appell_f3(a: complex, a2: complex, b: complex, b2: complex, c: complex,
              w: complex, z: complex, tol: float = 1e-14, k_max: int = K_MAX) -> SeriesResult:
    """F3(a, a2, b, b2; c; w, z) summed along anti-diagonals m + n = s."""
    a, a2, b, b2, c, w, z = (complex(v) for v in (a, a2, b, b2, c, w, z))
    if not (abs(w) < 1 and abs(z) < 1):
        raise DivergenceError(f"appell_f3: (|w|, |z|) = ({abs(w):g}, {abs(z):g}) outside the unit bidisc")
    if gc.is_nonpositive_integer(c):
        raise PoleError(f"appell_f3: c = {c} is a non-positive integer")
    # diag[m] = (a)_m (b)_m (a2)_n (b2)_n w^m z^n / ((c)_{m+n} m! n!) with n = s - m;
    # each diagonal is built from the previous one, so no factor overflows on its own
    diag = [1.0 + 0j]
    state = {"s": 0}

    def diagonal(s: int) -> complex:
        while state["s"] < s:
            t = state["s"]
            nxt = [diag[m] * (a2 + t - m) * (b2 + t - m) * z / ((c + t) * (t - m + 1)) for m in range(t + 1)]
            nxt.append(diag[t] * (a + t) * (b + t) * w / ((c + t) * (t + 1)))
            diag[:] = nxt
            state["s"] = t + 1
        re = math.fsum(p.real for p in diag)
        im = math.fsum(p.imag for p in diag)
        return complex(re, im)

    k_min = _first_safe_index([(x, 1.0) for x in (a, a2, b, b2, c)])
    result, _ = sum_series(diagonal, tol, k_max, min(k_min, k_max - 1))
    return result


# ---------------------------------------------------------------------------
# generalized Struve


def struve_term_log(sp: StruveParams, k: int, logz2: complex) -> tuple[complex, float] | None:
    """log of the k-th Struve term and the summed magnitude of its log components.

    Returns None when one of the reciprocal gammas vanishes.
    """
    g1 = sp.alpha * k + sp.mu
    g2 = sp.a * k + sp.shift
    if gc.is_nonpositive_integer(g1) or gc.is_nonpositive_integer(g2):
        return None
    parts = [(2 * k + sp.p + 1) * logz2, -gc.log_gamma(g1), -gc.log_gamma(g2)]
    if k:
        parts.append(k * cmath.log(-complex(sp.c)))
    return sum(parts), math.fsum(abs(x) for x in parts)


def _struve_mp(sp: StruveParams, z: complex, tol: float, k_start: int, k_max: int, dps: int) -> complex:
    with mpmath.workdps(dps):
        z2 = mpmath.mpc(z) / 2
        mc = -mpmath.mpc(sp.c)
        shift = mpmath.mpc(sp.p) / sp.xi_s + (mpmath.mpc(sp.b) + 2) / 2
        e0 = mpmath.mpc(sp.p) + 1
        total = mpmath.mpc(0)
        small = 0
        for k in range(k_max):
            t = mc ** k * mpmath.rgamma(sp.alpha * k + mpmath.mpc(sp.mu))
            t *= mpmath.rgamma(sp.a * k + shift) * z2 ** (2 * k + e0)
            total += t
            if abs(t) <= 0.1 * tol * abs(total):
                small += 1
            else:
                small = 0
            if small >= 3 and k >= k_start:
                return complex(total)
        raise NonConvergence("struve_generalized: extended-precision pass did not converge")


def struve_generalized(sp: StruveParams, z: complex, tol: float = 1e-14,
                       k_max: int = K_MAX) -> SeriesResult:
    """Generalized Struve series sum_k (-c)^k (z/2)^{2k+p+1} / (Gamma(alpha k + mu) Gamma(a k + p/xi_s + (b+2)/2)).

    Terms are formed in log-domain.  When the alternating sum cancels so badly
    that double-precision rounding would exceed ``tol``, the series is
    re-summed with enough extra working digits (mpmath).
    """
    z = complex(z)
    if z == 0:
        e = complex(sp.p) + 1
        if e.real > 0:
            return SeriesResult(0j, 1, 0.0, True)
        if e == 0:
            return SeriesResult(gc.reciprocal_gamma(sp.mu) * gc.reciprocal_gamma(sp.shift), 1, 0.0, True)
        raise DomainError("struve_generalized: (z/2)^(p+1) is singular at z = 0 for Re(p) < -1")
    logz2 = cmath.log(z / 2)
    c0 = complex(sp.c) == 0
    rounding = [0.0]

    def term(k: int) -> complex:
        if c0 and k > 0:
            return 0j
        res = struve_term_log(sp, k, logz2)
        if res is None:
            return 0j
        lt, spread = res
        if lt.real > 709.0:
            raise NonConvergence(f"struve_generalized: term {k} overflows")
        t = cmath.exp(lt)
        rounding[0] += 2.0 * _EPS * (spread + 1.0) * abs(t)
        return t

    k_min = min(_first_safe_index([(complex(sp.mu), sp.alpha), (complex(sp.shift), float(sp.a))]), k_max - 1)
    result, abs_sum = sum_series(term, tol, k_max, k_min)
    if rounding[0] > tol * abs(result.value):
        kappa = abs_sum / max(abs(result.value), 1e-300)
        dps = 20 + int(math.ceil(math.log10(max(kappa, 1.0))))
        result.value = _struve_mp(sp, z, tol, max(k_min, result.terms_used - 1), k_max, dps)
        result.notes.append(f"re-summed at {dps} digits (conditioning {kappa:.1e})")
    if z.imag == 0 and z.real > 0 and all(complex(v).imag == 0 for v in (sp.p, sp.b, sp.c, sp.mu)):
        result.value = complex(result.value.real, 0.0)
    return result
