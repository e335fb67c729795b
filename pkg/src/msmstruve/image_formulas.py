"""Closed-form images: the four power-function lemmas and the compiled theorem images.

Two independent encodings of the lemmas live here.  ``power_image_*`` are
direct transcriptions used by the oracles; ``_LEMMA_TABLE`` stores the same
gamma arguments as constant offsets to rho and drives the affine compiler
(``lemma_bundle`` / ``theorem_pairs``).  Agreement of the two is tested.

The compiler is written with plain arithmetic so that it runs on numbers and
on sympy symbols alike; the fixture comparison relies on that.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Any, Callable

from . import gamma_core as gc
from .errors import ValidityError
from .gamma_core import GammaRatioBundle, gamma_ratio
from .msm_operators import MsmParams
from .series_engine import FoxWrightSpec, SeriesResult, StruveParams, fox_wright

LEMMAS = ("L1", "L2", "D1", "D2")
THEOREMS = ("T1", "T2", "T3", "T4")
THEOREM_LEMMA = {"T1": "L1", "T2": "L2", "T3": "D1", "T4": "D2"}
ASCENDING = "-c x^2/4"
DESCENDING = "-c/(4 x^2)"


def _re(v) -> float:
    return complex(v).real


# ---------------------------------------------------------------------------
# validity


def _conditions(lemma_id: str, m) -> list[tuple[str, complex]]:
    """The lower bounds for Re(rho) as printed, labelled."""
    lam, lam2, xi1, xi2, gam = m.lam, m.lam2, m.xi1, m.xi2, m.gamma
    if lemma_id == "L1":
        return [("0", 0), ("Re(lambda - lambda' - xi - gamma)", lam - lam2 - xi1 - gam),
                ("Re(lambda' - xi')", lam2 - xi2)]
    if lemma_id == "L2":
        return [("Re(xi)", xi1), ("Re(-lambda - lambda' + gamma)", -lam - lam2 + gam),
                ("Re(-lambda - xi' + gamma)", -lam - xi2 + gam)]
    if lemma_id == "D1":
        return [("0", 0), ("Re(-lambda + xi)", -lam + xi1),
                ("Re(-lambda - lambda' - xi' + gamma)", -lam - lam2 - xi2 + gam)]
    if lemma_id == "D2":
        n = math.floor(_re(gam)) + 1
        return [("Re(-xi')", -xi2), ("Re(lambda' + xi - gamma)", lam2 + xi1 - gam),
                ("Re(lambda + lambda' - gamma) + [Re gamma] + 1", lam + lam2 - gam + n)]
    raise ValueError(f"unknown lemma {lemma_id!r}")


def _convergence_conditions(lemma_id: str, m) -> list[tuple[str, complex]]:
    # L1 bound on the operator integral itself; the others coincide with the printed ones
    if lemma_id == "L1":
        return [("0", 0), ("Re(lambda + lambda' + xi - gamma)", m.lam + m.lam2 + m.xi1 - m.gamma),
                ("Re(lambda' - xi')", m.lam2 - m.xi2)]
    return _conditions(lemma_id, m)


def violated_condition(lemma_id: str, msm: MsmParams, rho: complex) -> str | None:
    """Text of the first violated inequality, or None if all hold."""
    if lemma_id in ("L1", "L2") and not _re(msm.gamma) > 0:
        return f"{lemma_id}: Re(gamma) = {_re(msm.gamma):.6g} must be > 0"
    r = _re(rho)
    for label, bound in _conditions(lemma_id, msm):
        if not r > _re(bound):
            what = "0" if label == "0" else f"{label} = {_re(bound):.6g}"
            return f"{lemma_id}: Re(rho) = {r:.6g} must exceed {what}"
    return None


def validity(lemma_id: str, msm: MsmParams, rho: complex) -> bool:
    """The lemma's own conditions, exactly as stated with it."""
    return violated_condition(lemma_id, msm, rho) is None


def integral_converges(lemma_id: str, msm: MsmParams, rho: complex, margin: float = 0.0) -> bool:
    """Whether the operator integral of the monomial converges, with Re(rho) clearing each bound by ``margin``."""
    if lemma_id in ("L1", "L2") and not _re(msm.gamma) > 0:
        return False
    r = _re(rho)
    return all(r > _re(b) + margin for _, b in _convergence_conditions(lemma_id, msm))


# ---------------------------------------------------------------------------
# direct transcriptions


def power_image_left(msm: MsmParams, rho: complex) -> tuple[complex, complex]:
    lam, lam2, xi, xi2, gam = msm.lam, msm.lam2, msm.xi1, msm.xi2, msm.gamma
    coef = gamma_ratio(GammaRatioBundle.of(
        [rho, rho + gam - lam - lam2 - xi, rho + xi2 - lam2],
        [rho + xi2, rho + gam - lam - lam2, rho + gam - lam2 - xi]))
    return coef, complex(rho - lam - lam2 + gam - 1)


def power_image_right(msm: MsmParams, rho: complex) -> tuple[complex, complex]:
    lam, lam2, xi, xi2, gam = msm.lam, msm.lam2, msm.xi1, msm.xi2, msm.gamma
    coef = gamma_ratio(GammaRatioBundle.of(
        [-xi + rho, lam + lam2 - gam + rho, lam + xi2 - gam + rho],
        [rho, lam - xi + rho, lam + lam2 + xi2 - gam + rho]))
    return coef, complex(-lam - lam2 + gam - rho)


def power_image_dleft(msm: MsmParams, rho: complex) -> tuple[complex, complex]:
    lam, lam2, xi, xi2, gam = msm.lam, msm.lam2, msm.xi1, msm.xi2, msm.gamma
    coef = gamma_ratio(GammaRatioBundle.of(
        [rho, -xi + lam + rho, lam + lam2 + xi2 - gam + rho],
        [-xi + rho, lam + lam2 - gam + rho, lam + xi2 - gam + rho]))
    return coef, complex(lam + lam2 - gam + rho - 1)


def power_image_dright(msm: MsmParams, rho: complex) -> tuple[complex, complex]:
    lam, lam2, xi, xi2, gam = msm.lam, msm.lam2, msm.xi1, msm.xi2, msm.gamma
    coef = gamma_ratio(GammaRatioBundle.of(
        [xi2 + rho, -lam - lam2 + gam + rho, -lam2 - xi + gam + rho],
        [rho, -lam2 + xi2 + rho, -lam - lam2 - xi + gam + rho]))
    return coef, complex(lam + lam2 - gam - rho)


_DIRECT = {"L1": power_image_left, "L2": power_image_right,
           "D1": power_image_dleft, "D2": power_image_dright}


def power_image(lemma_id: str, msm: MsmParams, rho: complex, check: bool = True) -> tuple[complex, complex]:
    """(coefficient, exponent) with operator(t^{rho-1} or t^{-rho})(x) = coefficient * x^exponent."""
    if check:
        bad = violated_condition(lemma_id, msm, rho)
        if bad:
            raise ValidityError(bad)
    return _DIRECT[lemma_id](msm, complex(rho))


# ---------------------------------------------------------------------------
# affine compiler

# Each lemma as (numerator offsets, denominator offsets, exponent offset, exponent sign):
# every gamma argument is rho + offset(m), the x-exponent is sign * rho + offset(m).
_Offsets = Callable[[Any], Any]
_LEMMA_TABLE: dict[str, tuple[tuple[_Offsets, ...], tuple[_Offsets, ...], _Offsets, int]] = {
    "L1": ((lambda m: 0, lambda m: m.gamma - m.lam - m.lam2 - m.xi1, lambda m: m.xi2 - m.lam2),
           (lambda m: m.xi2, lambda m: m.gamma - m.lam - m.lam2, lambda m: m.gamma - m.lam2 - m.xi1),
           lambda m: m.gamma - m.lam - m.lam2 - 1, +1),
    "L2": ((lambda m: -m.xi1, lambda m: m.lam + m.lam2 - m.gamma, lambda m: m.lam + m.xi2 - m.gamma),
           (lambda m: 0, lambda m: m.lam - m.xi1, lambda m: m.lam + m.lam2 + m.xi2 - m.gamma),
           lambda m: m.gamma - m.lam - m.lam2, -1),
    "D1": ((lambda m: 0, lambda m: m.lam - m.xi1, lambda m: m.lam + m.lam2 + m.xi2 - m.gamma),
           (lambda m: -m.xi1, lambda m: m.lam + m.lam2 - m.gamma, lambda m: m.lam + m.xi2 - m.gamma),
           lambda m: m.lam + m.lam2 - m.gamma - 1, +1),
    "D2": ((lambda m: m.xi2, lambda m: m.gamma - m.lam - m.lam2, lambda m: m.gamma - m.lam2 - m.xi1),
           (lambda m: 0, lambda m: m.xi2 - m.lam2, lambda m: m.gamma - m.lam - m.lam2 - m.xi1),
           lambda m: m.lam + m.lam2 - m.gamma, -1),
}


@dataclass(frozen=True)
class AffineForm:
    """offset + slope * k."""

    offset: Any
    slope: Any = 0

    def at(self, k: int):
        return self.offset + self.slope * k


@dataclass(frozen=True)
class PowerImage:
    numerator: tuple[AffineForm, ...]
    denominator: tuple[AffineForm, ...]
    power_exponent: AffineForm
    sign: int

    def evaluate(self, k: int) -> tuple[complex, complex]:
        """(coefficient, exponent) of the lemma image at summation index k."""
        bundle = GammaRatioBundle.of([f.at(k) for f in self.numerator], [f.at(k) for f in self.denominator])
        return gamma_ratio(bundle), complex(self.power_exponent.at(k))


def lemma_bundle(lemma_id: str, msm, base_exponent: AffineForm) -> PowerImage:
    """The lemma with rho replaced by ``base_exponent`` (rho = offset + slope k)."""
    nums, dens, expo, sign = _LEMMA_TABLE[lemma_id]
    r, s = base_exponent.offset, base_exponent.slope
    return PowerImage(
        tuple(AffineForm(r + f(msm), s) for f in nums),
        tuple(AffineForm(r + f(msm), s) for f in dens),
        AffineForm(sign * r + expo(msm), sign * s),
        sign,
    )


def struve_shift(sp):
    """p/xi_s + (b+2)/2, the offset of the last lower Struve pair."""
    return sp.p / sp.xi_s + (sp.b + 2) / 2


def theorem_pairs(theorem_id: str, msm, sp, rho) -> dict:
    """Symbol-agnostic compilation of a theorem's right-hand side.

    Keys: upper, lower (lists of (offset, weight)), prefactor_coefficient,
    prefactor_power, argument_power (+2 or -2).
    """
    lemma = THEOREM_LEMMA[theorem_id]
    img = lemma_bundle(lemma, msm, AffineForm(rho + sp.p + 1, 2))
    upper = [(f.offset, f.slope) for f in img.numerator] + [(1, 1)]
    lower = [(f.offset, f.slope) for f in img.denominator] + [(sp.mu, sp.alpha), (struve_shift(sp), sp.a)]
    return {
        "upper": upper,
        "lower": lower,
        "prefactor_coefficient": 2 ** (-(sp.p + 1)),
        "prefactor_power": img.power_exponent.offset,
        "argument_power": img.power_exponent.slope,
    }


@dataclass(frozen=True)
class ImageFormula:
    theorem_id: str
    prefactor_coefficient: complex
    prefactor_power: complex
    spec: FoxWrightSpec
    argument_rule: str
    c: complex

    @property
    def argument_power(self) -> int:
        return 2 if self.argument_rule == ASCENDING else -2

    def argument(self, x: float) -> complex:
        return -self.c / 4 * x ** self.argument_power


def theorem_image(theorem_id: str, msm: MsmParams, sp: StruveParams, rho: complex) -> ImageFormula:
    """Compile a theorem image from its lemma; raises ValidityError if the k = 0 term is not admissible."""
    rho = complex(rho)
    lemma = THEOREM_LEMMA[theorem_id]
    bad = violated_condition(lemma, msm, rho + sp.p + 1)
    if bad:
        raise ValidityError(f"{theorem_id} (k = 0 term): {bad}")
    if theorem_id == "T2" and gc.is_nonpositive_integer(sp.shift):
        raise ValidityError("T2: p/xi_s + b/2 must not be a negative integer")
    parts = theorem_pairs(theorem_id, msm, sp, rho)
    spec = FoxWrightSpec.of([(complex(a), float(complex(w).real)) for a, w in parts["upper"]],
                            [(complex(a), float(complex(w).real)) for a, w in parts["lower"]])
    rule = ASCENDING if parts["argument_power"] > 0 else DESCENDING
    return ImageFormula(theorem_id, complex(parts["prefactor_coefficient"]), complex(parts["prefactor_power"]),
                        spec, rule, complex(sp.c))


def eval_image(img: ImageFormula, x: float, tol: float = 1e-14) -> SeriesResult:
    """prefactor * x^power * Psi(argument(x))."""
    if not x > 0:
        raise ValueError("eval_image needs x > 0")
    series = fox_wright(img.spec, img.argument(x), tol=tol)
    scale = img.prefactor_coefficient * cmath.exp(img.prefactor_power * math.log(x))
    return SeriesResult(scale * series.value, series.terms_used, abs(scale) * series.truncation_estimate,
                        series.converged, series.notes)
