"""Reserve-parameter solver and the closed-form distribution pair.

Everything downstream is driven by a single constant ``a``, the root in
(0, 1) of

    a * (1 - ln a) = mu,

where ``mu`` is the known mean of the bidders' signal distribution.  From it:

* the reserve-price CDF   H(x) = -x(1-a)(ln x - ln a) / ((x-a) ln a),
  continuous and strictly increasing on [0, 1], H(0) = 0, H(1) = 1, with the
  removable value H(a) = -(1-a)/ln a;
* the worst-case signal CDF  G(x) = 1 - a/x on [a, 1) with an atom of mass
  ``a`` at 1 (a unit-elastic, revenue-flat distribution with mean mu);
* the multiplier  lambda = -2(1-a)/ln a  that makes G the constrained
  minimizer of the revenue functional;
* the guaranteed revenue  2a - a^2.

The ratio forms are evaluated through ``log1p`` of (x-a)/a, which keeps full
precision arbitrarily close to the removable point; series branches cover the
final few ulps around a.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import spence

from .errors import ConvergenceError, DomainError

__all__ = [
    "ModelParams",
    "SolvedConstants",
    "solve_a",
    "reserve_cdf",
    "reserve_pdf",
    "reserve_cdf_integral",
    "signal_cdf",
    "signal_pdf",
    "signal_quantile",
]

# Bisection bracket inset and iteration budget for the root of a(1 - ln a) = mu.
_BRACKET_EPS = 1e-12
_BISECT_BUDGET = 200
# Half-width around a inside which the CDF ratio switches to its Taylor form.
_CDF_SERIES_HALFWIDTH = 1e-8
# (u - log1p(u))/u^2 switches to its series below this |u|.
_PDF_SERIES_CUT = 1e-3


@dataclass(frozen=True)
class ModelParams:
    """Model inputs: the signal mean and the numerical tolerances."""

    mu: float
    tol_root: float = 1e-12
    tol_quad: float = 1e-9

    def __post_init__(self) -> None:
        if not 0.0 < self.mu < 1.0:
            raise DomainError(f"mu must lie in (0, 1), got {self.mu}")
        if self.tol_root <= 0.0 or self.tol_quad <= 0.0:
            raise DomainError("tolerances must be strictly positive")


@dataclass(frozen=True)
class SolvedConstants:
    """Solved reserve parameter and the quantities derived from it in closed form."""

    mu: float
    a: float
    lam: float
    revenue_guarantee: float
    h_at_a: float
    tol_root: float = 1e-12
    tol_quad: float = 1e-9


def solve_a(params: ModelParams) -> SolvedConstants:
    """Solve a(1 - ln a) = mu for a in (0, 1) and fill the derived constants.

    The map a -> a(1 - ln a) is strictly increasing on (0, 1) with limits 0
    and 1, so plain bisection on [1e-12, 1 - 1e-12] is unconditionally
    convergent.  Raises ConvergenceError if the residual still exceeds
    ``tol_root`` after the iteration budget.
    """
    mu = params.mu

    def residual(t: float) -> float:
        return t * (1.0 - math.log(t)) - mu

    lo, hi = _BRACKET_EPS, 1.0 - _BRACKET_EPS
    if residual(lo) > 0.0 or residual(hi) < 0.0:
        raise ConvergenceError(f"root bracket failed for mu={mu}")
    for _ in range(_BISECT_BUDGET):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if residual(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    a = 0.5 * (lo + hi)
    if abs(residual(a)) > params.tol_root:
        raise ConvergenceError(
            f"|a(1 - ln a) - mu| = {abs(residual(a)):.3e} > tol_root after "
            f"{_BISECT_BUDGET} bisections"
        )
    log_a = math.log(a)
    return SolvedConstants(
        mu=mu,
        a=a,
        lam=-2.0 * (1.0 - a) / log_a,
        revenue_guarantee=2.0 * a - a * a,
        h_at_a=-(1.0 - a) / log_a,
        tol_root=params.tol_root,
        tol_quad=params.tol_quad,
    )


def _as_array(x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _check_unit_interval(x: np.ndarray, what: str) -> None:
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise DomainError(f"{what} must lie in [0, 1]")


def _log_ratio_over_u(u: np.ndarray) -> np.ndarray:
    """log1p(u)/u with the removable point u = 0 filled by its series."""
    out = np.empty_like(u)
    small = np.abs(u) < _CDF_SERIES_HALFWIDTH
    us = u[small]
    out[small] = 1.0 - us / 2.0 + us * us / 3.0
    ub = u[~small]
    out[~small] = np.log1p(ub) / ub
    return out


def _one_minus_log_ratio_over_u2(u: np.ndarray) -> np.ndarray:
    """(u - log1p(u))/u^2, series-stabilised for small |u|; equals 1/2 at u = 0."""
    out = np.empty_like(u)
    small = np.abs(u) < _PDF_SERIES_CUT
    us = u[small]
    out[small] = 0.5 - us / 3.0 + us * us / 4.0 - us**3 / 5.0 + us**4 / 6.0
    ub = u[~small]
    out[~small] = (ub - np.log1p(ub)) / (ub * ub)
    return out


def reserve_cdf(c: SolvedConstants, x):
    """CDF of the random reserve, H(x), for x in [0, 1].  Vectorised.

    H(x) = -x(1-a)(ln x - ln a)/((x-a) ln a) away from {0, a}, with the
    continuous completions H(0) = 0 and H(a) = -(1-a)/ln a.
    """
    arr, scalar = _as_array(x)
    _check_unit_interval(arr, "reserve point")
    a = c.a
    u = (arr - a) / a
    with np.errstate(divide="ignore", invalid="ignore"):
        out = c.h_at_a * (arr / a) * _log_ratio_over_u(u)
    out = np.where(arr == 0.0, 0.0, out)
    return float(out) if scalar else out


def reserve_pdf(c: SolvedConstants, x):
    """Density H'(x) of the random reserve for x in (0, 1].  Vectorised.

    H'(x) = -(1-a)(x - a ln x - mu)/((x-a)^2 ln a); at x = a this has the
    removable value -(1-a)/(2a ln a).  The numerator equals
    a*(u - log1p(u)) with u = (x-a)/a, which is what is actually evaluated.
    Raises DomainError at x = 0, where only the limit x H'(x) -> 0 exists.
    """
    arr, scalar = _as_array(x)
    _check_unit_interval(arr, "reserve point")
    if np.any(arr == 0.0):
        raise DomainError("reserve density is undefined at x = 0")
    a = c.a
    u = (arr - a) / a
    out = (c.h_at_a / a) * _one_minus_log_ratio_over_u2(u)
    return float(out) if scalar else out


def reserve_cdf_integral(c: SolvedConstants, x):
    """Antiderivative K(x) = integral of H over [0, x], in closed form.

    Splitting x/(x-a) = 1 + a/(x-a) reduces the integrand to a logarithm
    plus ln(x/a)/(x-a), whose antiderivative is a dilogarithm:

        K(x) = h_at_a * (x ln(x/a) - x - a Li2(1 - x/a) + a pi^2/6),

    with Li2(1 - x/a) = spence(x/a).  Exact to machine precision on [0, 1];
    used for vectorised payment evaluation.  The tests check it against the
    adaptive Simpson rule.
    """
    arr, scalar = _as_array(x)
    _check_unit_interval(arr, "reserve point")
    a = c.a
    u = (arr - a) / a
    with np.errstate(divide="ignore", invalid="ignore"):
        out = c.h_at_a * (
            arr * np.log1p(u) - arr - a * spence(arr / a) + a * np.pi**2 / 6.0
        )
    out = np.where(arr == 0.0, 0.0, out)
    return float(out) if scalar else out


def signal_cdf(c: SolvedConstants, x):
    """Worst-case signal CDF: 0 below a, 1 - a/x on [a, 1), and 1 at x = 1.

    The jump at 1 is an atom of mass a.  Vectorised.
    """
    arr, scalar = _as_array(x)
    _check_unit_interval(arr, "signal point")
    a = c.a
    with np.errstate(divide="ignore"):
        body = 1.0 - a / np.where(arr > 0.0, arr, np.nan)
    out = np.where(arr < a, 0.0, np.where(arr >= 1.0, 1.0, body))
    return float(out) if scalar else out


def signal_pdf(c: SolvedConstants, x):
    """Density of the continuous part of the signal CDF: a/x^2 on (a, 1), else 0."""
    arr, scalar = _as_array(x)
    _check_unit_interval(arr, "signal point")
    a = c.a
    with np.errstate(divide="ignore"):
        body = a / np.where(arr > 0.0, arr * arr, np.nan)
    out = np.where((arr > a) & (arr < 1.0), body, 0.0)
    return float(out) if scalar else out


def signal_quantile(c: SolvedConstants, u):
    """Inverse quantile of the signal CDF: a/(1-u) below 1-a, then 1.  Vectorised."""
    arr, scalar = _as_array(u)
    _check_unit_interval(arr, "quantile level")
    a = c.a
    with np.errstate(divide="ignore"):
        body = a / np.where(arr < 1.0, 1.0 - arr, np.nan)
    out = np.where(arr < 1.0 - a, body, 1.0)
    return float(out) if scalar else out
