"""Direct numerical evaluation of the Marichev-Saigo-Maeda operators.

Both integral operators are mapped to the unit interval (s = t/x on the left,
u = x/t on the right).  The F3 kernel is a double series in 1 - s and
1 - 1/s; only on the collapsed slices, where one of its two series is
identically 1, does it reduce to a single Gauss function that is evaluable on
the whole support:

    lam2 = 0 or xi2 = 0:  K = 2F1(lam, xi1; gamma; 1 - s)
    lam  = 0 or xi1 = 0:  K = 2F1(lam2, xi2; gamma; 1 - 1/s)
                            = s^lam2 2F1(lam2, gamma - xi2; gamma; 1 - s)   (Pfaff)

The right operator uses the standard argument order of the kernel,
F3(lam, lam2, xi1, xi2; gamma; 1 - x/t, 1 - t/x), so the same two slices apply
with s replaced by u.

The unit interval is split at 1/2: the upper half uses Gauss-Jacobi nodes that
absorb the (1-s)^{gamma-1} endpoint factor exactly, the lower half uses a
power-law substitution for the combined endpoint exponent followed by
tanh-sinh quadrature, which tolerates the kernel's secondary singular part.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import special

from . import gamma_core as gc
from .errors import ConvergenceError, DomainError, NonConvergence, SliceError, StepError
from .series_engine import appell_f3, gauss_2f1, gauss_2f1_array

LEFT = "left"
RIGHT = "right"
_S_FLOOR = 1e-280


@dataclass(frozen=True)
class MsmParams:
    """Operator parameters lambda, lambda', xi, xi', gamma (here lam, lam2, xi1, xi2, gamma)."""

    lam: complex = 0.0
    lam2: complex = 0.0
    xi1: complex = 0.0
    xi2: complex = 0.0
    gamma: complex = 1.0

    @property
    def order(self) -> int:
        """[Re gamma] + 1, the number of derivatives taken by the differential operators."""
        return int(math.floor(complex(self.gamma).real)) + 1

    def derivative_inner(self, side: str) -> "MsmParams":
        """Parameters of the inner integral of the left/right differential operator."""
        n = self.order
        if side == LEFT:
            return MsmParams(-self.lam2, -self.lam, -self.xi2 + n, -self.xi1, -self.gamma + n)
        return MsmParams(-self.lam2, -self.lam, -self.xi2, -self.xi1 + n, -self.gamma + n)

    def as_dict(self) -> dict:
        return {"lambda": self.lam, "lambda2": self.lam2, "xi1": self.xi1,
                "xi2": self.xi2, "gamma": self.gamma}


@dataclass(frozen=True)
class Integrand:
    """f(t) for t > 0 with |f(t)| = O(t^{Re exponent}) at the relevant endpoint.

    ``func`` must accept a numpy array of t values and be free of side effects.
    """

    func: Callable[[np.ndarray], np.ndarray]
    exponent: complex
    label: str = "f"

    def __call__(self, t):
        return np.asarray(self.func(np.asarray(t, dtype=float)), dtype=complex)

    @classmethod
    def monomial(cls, power: complex) -> "Integrand":
        power = complex(power)
        return cls(lambda t: np.power(t.astype(complex), power), power, f"t^({power})")

    def __add__(self, other: "Integrand") -> "Integrand":
        e = min(complex(self.exponent), complex(other.exponent), key=lambda v: v.real)
        return Integrand(lambda t: self(t) + other(t), e, f"{self.label} + {other.label}")

    def scaled(self, k: complex) -> "Integrand":
        return Integrand(lambda t: k * self(t), self.exponent, f"{k}*{self.label}")


@dataclass
class QuadratureResult:
    value: complex
    abs_error_estimate: float
    nodes: int
    converged: bool


def _is_zero(v: complex) -> bool:
    return complex(v) == 0


def _series_trivial(a: complex, b: complex) -> bool:
    return _is_zero(a) or _is_zero(b)


def kernel_value(msm: MsmParams, x: float, t: float, side: str = LEFT) -> complex:
    """The Appell F3 factor of the operator integrand at (x, t).

    Off the collapsed slices only the double series is available, which needs
    x/2 < t < x on the left and x < t < 2x on the right.
    """
    if side == LEFT:
        if not 0 < t < x:
            raise DomainError("kernel_value(left) needs 0 < t < x")
        u, v = 1.0 - t / x, 1.0 - x / t
    elif side == RIGHT:
        if not t > x > 0:
            raise DomainError("kernel_value(right) needs t > x > 0")
        u, v = 1.0 - x / t, 1.0 - t / x
    else:
        raise ValueError(f"unknown side {side!r}")
    u_trivial = _series_trivial(msm.lam, msm.xi1)
    if _series_trivial(msm.lam2, msm.xi2):
        if u_trivial:
            return 1.0 + 0j
        return gauss_2f1(msm.lam, msm.xi1, msm.gamma, u)
    if u_trivial:
        # 2F1(lam2, xi2; gamma; v) with v < 0, continued through Pfaff's transformation
        return (1.0 - v) ** (-complex(msm.lam2)) * gauss_2f1(msm.lam2, msm.gamma - msm.xi2, msm.gamma, v / (v - 1.0))
    if abs(v) >= 1:
        raise DomainError(f"kernel_value: F3 series diverges at t/x = {t / x:g} and no collapse applies")
    return appell_f3(msm.lam, msm.lam2, msm.xi1, msm.xi2, msm.gamma, u, v).value


def collapsed_slice(msm: MsmParams) -> str | None:
    """'A' when the (lam2, xi2) series vanishes, 'B' when the (lam, xi1) one does, else None."""
    if _series_trivial(msm.lam2, msm.xi2):
        return "A"
    if _series_trivial(msm.lam, msm.xi1):
        return "B"
    return None


# ---------------------------------------------------------------------------
# quadrature primitives on [0, 1] with weight (1-s)^{gamma-1}


@lru_cache(maxsize=64)
def _jacobi_rule(n: int, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    y, w = special.roots_jacobi(n, alpha, 0.0)
    return y, w


def jacobi_piece(h: Callable[[np.ndarray, np.ndarray], np.ndarray], gam: complex, n: int,
                 with_magnitude: bool = False):
    """int_{1/2}^1 (1-s)^{gam-1} h(s) ds with an n-point Gauss-Jacobi rule.

    ``h`` receives (s, 1-s) so that it can use the complement without cancellation.
    """
    gam = complex(gam)
    y, w = _jacobi_rule(n, gam.real - 1.0)
    oms = (1.0 - y) / 4.0
    s = 1.0 - oms
    vals = h(s, oms)
    if gam.imag:
        vals = vals * np.exp(1j * gam.imag * np.log(1.0 - y))
    scale = 4.0 ** (-gam)
    terms = w * vals
    val = complex(np.sum(terms)) * scale
    if with_magnitude:
        return val, float(np.sum(np.abs(terms))) * abs(scale)
    return val


def _de_nodes(step: float, q: float):
    tau = np.arange(math.floor(-6.5 / step), math.ceil(3.5 / step) + 1) * step
    e = np.pi * np.sinh(tau)
    with np.errstate(over="ignore", under="ignore"):
        v = 1.0 / (1.0 + np.exp(-e))
        omv = 1.0 / (1.0 + np.exp(e))
        s = 0.5 * v ** q
    # the skipped piece is O(floor^(beta+1)) = O(floor^(1/q))
    keep = s > max(_S_FLOOR, 10.0 ** (-20.0 * q))
    return tau[keep], s[keep], omv[keep]


def de_piece(h: Callable[[np.ndarray, np.ndarray], np.ndarray], gam: complex, beta: float,
             step: float, with_magnitude: bool = False):
    """int_0^{1/2} (1-s)^{gam-1} h(s) ds, h(s) = O(s^beta) as s -> 0, via s = v^q / 2 and tanh-sinh in v.

    Returns (value, node count), plus the absolute sum when ``with_magnitude``.
    """
    q = 1.0 / (beta + 1.0)
    tau, s, omv = _de_nodes(step, q)
    vals = h(s, 1.0 - s) * np.power((1.0 - s).astype(complex), complex(gam) - 1.0)
    terms = s * q * np.pi * np.cosh(tau) * omv * vals
    val = complex(np.sum(terms)) * step
    if with_magnitude:
        return val, len(s), float(np.sum(np.abs(terms))) * step
    return val, len(s)


_NOISE = 256 * np.finfo(float).eps


def _refine(evaluate, levels, tol):
    """Run ``evaluate`` over increasing resolutions until successive values agree.

    Stops early on stagnation (the difference grows), keeping the better level.
    Returns (value, error estimate, node count).
    """
    nodes = 0
    prev = None
    prev_diff = math.inf
    for i, level in enumerate(levels):
        val, cnt, mag = evaluate(level)
        nodes += cnt
        floor = _NOISE * mag
        if prev is not None:
            diff = abs(val - prev)
            if diff <= max(0.1 * tol * abs(val), floor):
                return val, max(diff, floor), nodes
            if i >= 2 and diff > prev_diff:
                return prev, max(prev_diff, floor), nodes
            prev_diff = diff
        prev = val
    return prev, max(prev_diff, floor), nodes


def unit_interval_integral(h, gam: complex, beta: float, tol: float, max_jacobi: int = 256,
                           min_step: float = 1.0 / 128, raise_on_failure: bool = True) -> QuadratureResult:
    """Adaptive int_0^1 (1-s)^{gam-1} h(s) ds; doubles node counts until the estimate meets tol."""
    def ev_a(n):
        v, mag = jacobi_piece(h, gam, n, with_magnitude=True)
        return v, n, mag

    def ev_b(step):
        return de_piece(h, gam, beta, step, with_magnitude=True)

    jl = [8]
    while jl[-1] < max_jacobi:
        jl.append(jl[-1] * 2)
    dl = [0.5]
    while dl[-1] > min_step:
        dl.append(dl[-1] / 2)
    qa, err_a, na = _refine(ev_a, jl, tol)
    qb, err_b, nb = _refine(ev_b, dl, tol)
    value = qa + qb
    err = err_a + err_b
    ok = err <= tol * max(abs(value), 1e-300)
    if not ok and raise_on_failure:
        raise NonConvergence(f"quadrature estimate {err:.2e} exceeds tol {tol:.1e} * |value| within the node budget")
    return QuadratureResult(value, err, na + nb, ok)


# ---------------------------------------------------------------------------
# operators


def _kernel_factor(msm: MsmParams, side: str):
    """Kernel times the algebraic factor of the unit-interval form, and its exponent at 0.

    Left: s^{-lam2} K(s).  Right: u^{lam-gamma-1} K(u).
    """
    gam = complex(msm.gamma)
    lam, lam2 = complex(msm.lam), complex(msm.lam2)
    slice_id = collapsed_slice(msm)
    if slice_id is None:
        raise SliceError(f"{side} operator: full-support evaluation needs a collapsed kernel "
                         "(lambda' = 0 or xi' = 0, or lambda = 0 or xi = 0)")
    if slice_id == "A":
        power = -lam2 if side == LEFT else lam - gam - 1.0
        a, b = lam, complex(msm.xi1)
    else:
        power = 0j if side == LEFT else lam + lam2 - gam - 1.0
        a, b = lam2, gam - msm.xi2
    if _series_trivial(a, b):
        def fac(s, oms):
            return np.power(s.astype(complex), power)
        return fac, power.real

    def fac(s, oms):
        return np.power(s.astype(complex), power) * gauss_2f1_array(a, b, gam, oms, one_minus_w=s)

    return fac, power.real + min((gam - a - b).real, 0.0)


def _check_gamma(msm: MsmParams) -> None:
    if not complex(msm.gamma).real > 0:
        raise DomainError(f"integral operators need Re(gamma) > 0, got gamma = {msm.gamma}")


def _effective_exponent(b: float, what: str) -> float:
    if not b > -1.0:
        raise ConvergenceError(f"{what}: integrand behaves like s^{b:.4g} at the endpoint; not integrable")
    return b


def _restricted(msm: MsmParams, f: Integrand, x: float, tol: float, side: str) -> QuadratureResult:
    # general F3 kernel on the half of the support where it converges
    gam = complex(msm.gamma)

    def h(s, oms):
        if side == LEFT:
            t = x * s
            extra = np.power(s.astype(complex), -complex(msm.lam2))
        else:
            t = x / s
            extra = np.power(s.astype(complex), complex(msm.lam) - gam - 1.0)
        kern = np.array([kernel_value(msm, x, float(ti), side) for ti in t])
        return extra * kern * f(t)

    n, prev, err = 8, None, math.inf
    while n <= 128:
        val = jacobi_piece(h, gam, n)
        if prev is not None:
            err = abs(val - prev)
            if err <= tol * abs(val):
                break
        prev, n = val, n * 2
    scale = x ** (gam - msm.lam - msm.lam2) * gc.reciprocal_gamma(gam)
    return QuadratureResult(scale * val, abs(scale) * err, n, err <= tol * abs(val))


def msm_integral_left(msm: MsmParams, f: Integrand, x: float, tol: float = 1e-10,
                      support: str = "full", raise_on_failure: bool = True) -> QuadratureResult:
    """Left operator (I_{0+} f)(x).

    ``support="restricted"`` integrates only over t in (x/2, x), where the full
    F3 kernel converges; the result is then a partial integral, not the operator.
    """
    _check_gamma(msm)
    if x <= 0:
        raise DomainError("x must be positive")
    if support == "restricted":
        return _restricted(msm, f, x, tol, LEFT)
    gam = complex(msm.gamma)
    fac, e0 = _kernel_factor(msm, LEFT)
    beta = _effective_exponent(e0 + complex(f.exponent).real, "left operator")

    def h(s, oms):
        return fac(s, oms) * f(x * s)

    res = unit_interval_integral(h, gam, beta, tol, raise_on_failure=raise_on_failure)
    scale = x ** (gam - msm.lam - msm.lam2) * gc.reciprocal_gamma(gam)
    return QuadratureResult(scale * res.value, abs(scale) * res.abs_error_estimate, res.nodes, res.converged)


def msm_integral_right(msm: MsmParams, f: Integrand, x: float, tol: float = 1e-10,
                       support: str = "full", raise_on_failure: bool = True) -> QuadratureResult:
    """Right operator (I_- f)(x), via t = x/u on (0, 1)."""
    _check_gamma(msm)
    if x <= 0:
        raise DomainError("x must be positive")
    if support == "restricted":
        return _restricted(msm, f, x, tol, RIGHT)
    gam = complex(msm.gamma)
    fac, e0 = _kernel_factor(msm, RIGHT)
    beta = _effective_exponent(e0 - complex(f.exponent).real, "right operator")

    def h(u, omu):
        return fac(u, omu) * f(x / u)

    res = unit_interval_integral(h, gam, beta, tol, raise_on_failure=raise_on_failure)
    scale = x ** (gam - msm.lam - msm.lam2) * gc.reciprocal_gamma(gam)
    return QuadratureResult(scale * res.value, abs(scale) * res.abs_error_estimate, res.nodes, res.converged)


def _central_difference(F: Callable[[float], complex], x: float, n: int, h: float) -> complex:
    total = 0j
    for j in range(n + 1):
        total += (-1) ** j * math.comb(n, j) * F(x + (n / 2 - j) * h)
    return total / h ** n


def richardson_derivative(F: Callable[[float], complex], x: float, n: int, h0: float,
                          levels: int = 2, noise: float = 0.0) -> tuple[complex, float]:
    """n-th derivative by central differences with ``levels`` Richardson steps (h halved each step).

    Returns (value, error estimate); ``noise`` is the absolute accuracy of F.
    """
    table = [[_central_difference(F, x, n, h0)]]
    h = h0
    for i in range(1, levels + 1):
        h /= 2
        row = [_central_difference(F, x, n, h)]
        for j in range(1, i + 1):
            row.append(row[j - 1] + (row[j - 1] - table[i - 1][j - 1]) / (4 ** j - 1))
        table.append(row)
    est = abs(table[-1][-1] - table[-1][-2])
    prev = abs(table[-2][-1] - table[-2][-2]) if levels >= 2 else math.inf
    amplified = noise * 2 ** n / h ** n * 2
    if est > prev and est > amplified and est > 1e-8 * abs(table[-1][-1]):
        raise StepError(f"Richardson extrapolation did not reduce the error ({prev:.2e} -> {est:.2e})")
    return table[-1][-1], est + amplified


def _derivative(msm: MsmParams, f: Integrand, x: float, tol: float, side: str, h0: float | None,
                inner_tol: float) -> QuadratureResult:
    if not complex(msm.gamma).real > 0:
        raise DomainError(f"differential operators need Re(gamma) > 0, got gamma = {msm.gamma}")
    inner = msm.derivative_inner(side)
    n = msm.order
    op = msm_integral_left if side == LEFT else msm_integral_right
    nodes = [0]
    errs = [0.0]

    def F(y: float) -> complex:
        r = op(inner, f, y, tol=inner_tol)
        nodes[0] += r.nodes
        errs[0] = max(errs[0], r.abs_error_estimate)
        return r.value

    h = x * 1e-2 if h0 is None else h0
    F(x)
    value, est = richardson_derivative(F, x, n, h, noise=max(errs[0], inner_tol * abs(F(x))))
    if side == RIGHT and n % 2:
        value = -value
    return QuadratureResult(value, est, nodes[0], est <= tol * abs(value))


def msm_derivative_left(msm: MsmParams, f: Integrand, x: float, tol: float = 1e-4,
                        h0: float | None = None, inner_tol: float = 1e-12) -> QuadratureResult:
    """Left differential operator (d/dx)^n I_{0+}^{-lam2, -lam, -xi2+n, -xi1, -gamma+n} f, n = [Re gamma] + 1."""
    return _derivative(msm, f, x, tol, LEFT, h0, inner_tol)


def msm_derivative_right(msm: MsmParams, f: Integrand, x: float, tol: float = 1e-4,
                         h0: float | None = None, inner_tol: float = 1e-12) -> QuadratureResult:
    """Right differential operator (-d/dx)^n I_-^{-lam2, -lam, -xi2, -xi1+n, -gamma+n} f."""
    return _derivative(msm, f, x, tol, RIGHT, h0, inner_tol)
