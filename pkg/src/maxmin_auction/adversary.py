"""Worst-case signal search against a fixed reserve distribution.

The adversary minimizes the revenue functional over CDFs on a midpoint grid
subject to a moment constraint (known mean, or known second moment in the
uniform-reserve variant).  The multiplier-adjusted integrand is quadratic in
the CDF value with leading coefficient H(x) - x H'(x):

* strictly convex points take the clamped vertex
  (2 H(x) - lambda * w(x)) / (2 (H(x) - x H'(x)));
* degenerate (linear) points take the cheaper endpoint, and exact
  indifference is resolved by mixing the two bracket-end minimizers so the
  moment constraint binds;
* a strictly concave coefficient means the reserve is invalid for this
  argument and raises DegenerateError.

The outer bisection moves the multiplier until the constraint holds; the
constraint value of the pointwise minimizer is monotone in the multiplier.
A pool-adjacent-violators pass enforces monotonicity afterwards (a no-op at
the solved reserve, where the pointwise minimizer is already a CDF).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import (
    ModelParams,
    SolvedConstants,
    reserve_cdf,
    reserve_cdf_integral,
    reserve_pdf,
    signal_cdf,
)
from .distributions import PiecewiseCdf
from .errors import ConvergenceError, DegenerateError, DomainError

__all__ = [
    "GridDistribution",
    "AdversaryResult",
    "SaddleReport",
    "P1P2Report",
    "minimize_revenue",
    "verify_pointwise_saddle",
    "check_p1_p2",
    "pav_nondecreasing",
    "reserve_with_zero_atom",
    "reserve_with_linear_ramp",
]

_COEF_TOL = 1e-12
_BISECT_STEPS = 100


@dataclass(frozen=True)
class GridDistribution:
    """A candidate signal CDF sampled on a uniform midpoint grid."""

    x: np.ndarray
    values: np.ndarray

    def mean(self) -> float:
        """Grid form of the mean constraint: sum of (1 - G_k) * dx."""
        dx = 1.0 / self.x.size
        return math.fsum(((1.0 - self.values) * dx).tolist())

    def to_piecewise(self) -> PiecewiseCdf:
        return PiecewiseCdf.from_grid(self.x, self.values)


@dataclass(frozen=True)
class AdversaryResult:
    """Output of the constrained minimization."""

    grid: GridDistribution
    value: float
    lambda_hat: float
    constraint: str
    target: float
    constraint_residual: float
    projection_delta: float
    lagrangian_bound: float


@dataclass(frozen=True)
class SaddleReport:
    """Worst pointwise gap between the quadratic's argmin and the signal CDF."""

    max_deviation: float
    worst_x: float
    grid_size: int


@dataclass(frozen=True)
class P1P2Report:
    """Verdicts for the two reserve-family conditions."""

    p1_passed: bool
    p1_worst_gap: float
    p1_worst_x: float
    p2_passed: bool
    p2_worst_value: float
    p2_worst_x: float

    @property
    def passed(self) -> bool:
        return self.p1_passed and self.p2_passed


def pav_nondecreasing(y: np.ndarray) -> np.ndarray:
    """Pool-adjacent-violators projection onto nondecreasing sequences (L2).

    Violating neighbours are merged into blocks carrying their running mean;
    merging cascades backwards until the block means are sorted.
    """
    means: list[float] = []
    counts: list[int] = []
    for v in y.astype(float):
        means.append(v)
        counts.append(1)
        while len(means) > 1 and means[-2] > means[-1]:
            m2, c2 = means.pop(), counts.pop()
            m1, c1 = means.pop(), counts.pop()
            means.append((m1 * c1 + m2 * c2) / (c1 + c2))
            counts.append(c1 + c2)
    out = np.empty(y.size)
    pos = 0
    for m, c in zip(means, counts):
        out[pos : pos + c] = m
        pos += c
    return out


def _grid_objective(
    g: np.ndarray, h: np.ndarray, xhp: np.ndarray, dx: float
) -> float:
    terms = ((1.0 - g * g) * (xhp + h) - h * 2.0 * g * (1.0 - g)) * dx
    return math.fsum(terms.tolist())


def _pointwise_argmin(
    lam: float, h: np.ndarray, coef: np.ndarray, w: np.ndarray
) -> np.ndarray:
    """Minimizer of coef*g^2 + (lam*w - 2h)*g + const over g in [0, 1]."""
    g = np.empty_like(h)
    convex = coef > _COEF_TOL
    g[convex] = np.clip(
        (2.0 * h[convex] - lam * w[convex]) / (2.0 * coef[convex]), 0.0, 1.0
    )
    lin = ~convex
    slope = lam * w[lin] - 2.0 * h[lin]
    g[lin] = np.where(slope < 0.0, 1.0, 0.0)
    return g


def minimize_revenue(
    h_dist: PiecewiseCdf,
    params: ModelParams | None,
    K: int = 500,
    *,
    constraint: str = "mean",
    target: float | None = None,
    tol_mean: float = 1e-9,
) -> AdversaryResult:
    """Minimize expected revenue over grid CDFs meeting a moment constraint.

    ``constraint`` is ``"mean"`` (target defaults to ``params.mu``) or
    ``"second-moment"`` (an explicit target is required and ``params`` may be
    None).  Returns the minimizing grid CDF, the grid value of the
    functional, and the multiplier at which the constraint binds.
    """
    if K < 100:
        raise DomainError(f"grid size must be at least 100, got {K}")
    if constraint not in ("mean", "second-moment"):
        raise DomainError(f"unknown constraint kind: {constraint}")
    if constraint == "mean":
        if target is None:
            if params is None:
                raise DomainError("mean constraint requires params or a target")
            target = params.mu
    elif target is None:
        raise DomainError("second-moment constraint requires an explicit target")
    if not 0.0 < target < 1.0:
        raise DomainError(f"constraint target must lie in (0, 1), got {target}")
    for loc, mass in h_dist.atoms:
        if loc > 0.0 and mass > 0.0:
            raise DomainError("reserve distribution may not carry atoms in (0, 1]")

    dx = 1.0 / K
    x = (np.arange(K) + 0.5) * dx
    h = np.asarray(h_dist.cdf(x), dtype=float)
    hp = np.asarray(h_dist.pdf(x), dtype=float)
    xhp = x * hp
    coef = h - xhp
    if np.any(coef < -_COEF_TOL):
        worst = float(np.min(coef))
        raise DegenerateError(
            f"quadratic coefficient H - xH' is negative (min {worst:.3e}); "
            "the reserve distribution is invalid for this minimization"
        )
    w = np.ones_like(x) if constraint == "mean" else 2.0 * x

    def moment(g: np.ndarray) -> float:
        return math.fsum((w * (1.0 - g) * dx).tolist())

    lam_lo, lam_hi = 0.0, 2.0 * float(h_dist.cdf(1.0))
    m_lo = moment(_pointwise_argmin(lam_lo, h, coef, w))
    m_hi = moment(_pointwise_argmin(lam_hi, h, coef, w))
    if not (m_lo <= target + tol_mean and m_hi >= target - tol_mean):
        raise ConvergenceError(
            f"multiplier bracket [0, {lam_hi}] does not enclose the constraint "
            f"target {target} (endpoint moments {m_lo}, {m_hi})"
        )
    for _ in range(_BISECT_STEPS):
        lam_mid = 0.5 * (lam_lo + lam_hi)
        if moment(_pointwise_argmin(lam_mid, h, coef, w)) < target:
            lam_lo = lam_mid
        else:
            lam_hi = lam_mid
    lam_hat = 0.5 * (lam_lo + lam_hi)
    g_raw = _pointwise_argmin(lam_hat, h, coef, w)
    residual = moment(g_raw) - target
    if abs(residual) > tol_mean:
        # Indifference at the limiting multiplier: mix the two bracket-end
        # minimizers so the constraint binds exactly.  Both ends minimize the
        # same limiting integrand wherever they disagree.
        g_lo = _pointwise_argmin(lam_lo, h, coef, w)
        g_hi = _pointwise_argmin(lam_hi, h, coef, w)
        m0, m1 = moment(g_lo), moment(g_hi)
        if abs(m1 - m0) < 1e-30:
            raise ConvergenceError(
                f"constraint residual {residual:.3e} not reducible by mixing"
            )
        theta = (target - m0) / (m1 - m0)
        theta = min(1.0, max(0.0, theta))
        g_raw = (1.0 - theta) * g_lo + theta * g_hi
        residual = moment(g_raw) - target

    lag_terms = (
        (coef * g_raw * g_raw + (lam_hat * w - 2.0 * h) * g_raw + xhp + h - lam_hat * w)
        * dx
    )
    lagrangian_bound = math.fsum(lag_terms.tolist()) + lam_hat * target

    g_proj = np.clip(pav_nondecreasing(g_raw), 0.0, 1.0)
    projection_delta = float(np.max(np.abs(g_proj - g_raw)))
    value = _grid_objective(g_proj, h, xhp, dx)
    grid = GridDistribution(x=x, values=g_proj)
    return AdversaryResult(
        grid=grid,
        value=value,
        lambda_hat=lam_hat,
        constraint=constraint,
        target=float(target),
        constraint_residual=moment(g_proj) - target,
        projection_delta=projection_delta,
        lagrangian_bound=lagrangian_bound,
    )


def verify_pointwise_saddle(c: SolvedConstants, K: int = 500) -> SaddleReport:
    """Compare the clamped quadratic argmin against the worst-case signal CDF.

    Checks, on a midpoint grid avoiding {0, a, 1}, that the vertex of the
    multiplier-adjusted quadratic -- clamped to [0, 1] -- coincides with the
    signal CDF value 1 - a/x (0 below a).
    """
    if K < 100:
        raise DomainError(f"grid size must be at least 100, got {K}")
    x = (np.arange(K) + 0.5) / K
    x = x[np.abs(x - c.a) > 1e-15]
    h = reserve_cdf(c, x)
    xhp = x * reserve_pdf(c, x)
    coef = h - xhp
    argmin = np.clip((2.0 * h - c.lam) / (2.0 * coef), 0.0, 1.0)
    target = signal_cdf(c, x)
    dev = np.abs(argmin - target)
    worst = int(np.argmax(dev))
    return SaddleReport(
        max_deviation=float(dev[worst]), worst_x=float(x[worst]), grid_size=K
    )


def check_p1_p2(
    h_star: PiecewiseCdf, c: SolvedConstants, n_grid: int = 1000
) -> P1P2Report:
    """Verify the reserve-family conditions for an alternative reserve CDF.

    P1: the CDF agrees with the solved reserve on [a, 1] (sup gap <= 1e-9).
    P2: H*(x) - x (H*)'(x) >= 0 on a midpoint grid of (0, a).
    """
    a = c.a
    x1 = np.linspace(a, 1.0, n_grid)
    gap = np.abs(np.asarray(h_star.cdf(x1)) - reserve_cdf(c, x1))
    i1 = int(np.argmax(gap))

    x2 = (np.arange(n_grid) + 0.5) * (a / n_grid)
    vals = np.asarray(h_star.cdf(x2)) - x2 * np.asarray(h_star.pdf(x2))
    i2 = int(np.argmin(vals))
    return P1P2Report(
        p1_passed=bool(gap[i1] <= 1e-9),
        p1_worst_gap=float(gap[i1]),
        p1_worst_x=float(x1[i1]),
        p2_passed=bool(vals[i2] >= -1e-12),
        p2_worst_value=float(vals[i2]),
        p2_worst_x=float(x2[i2]),
    )


def _piecewise_at(a: float, below, above):
    """Vectorised evaluator split at ``a``; keeps the input's shape."""

    def evaluate(x):
        arr = np.asarray(x, dtype=float)
        flat = np.atleast_1d(arr).copy()
        hi = flat >= a
        flat[~hi] = below(flat[~hi])
        flat[hi] = above(flat[hi])
        return flat.reshape(arr.shape)

    return evaluate


def reserve_with_zero_atom(c: SolvedConstants) -> PiecewiseCdf:
    """Reserve variant that is flat at H(a) below a, with the mass parked at 0."""
    a, level = c.a, c.h_at_a
    k_at_a = reserve_cdf_integral(c, a)
    return PiecewiseCdf.custom(
        cdf_fn=_piecewise_at(a, lambda x: level, lambda x: reserve_cdf(c, x)),
        pdf_fn=_piecewise_at(a, lambda x: 0.0, lambda x: reserve_pdf(c, x)),
        atoms=((0.0, level),),
        breakpoints=(a,),
        integral_fn=_piecewise_at(
            a,
            lambda x: level * x,
            lambda x: level * a + reserve_cdf_integral(c, x) - k_at_a,
        ),
    )


def reserve_with_linear_ramp(c: SolvedConstants) -> PiecewiseCdf:
    """Reserve variant that climbs linearly from 0 to H(a) on [0, a]."""
    a, level = c.a, c.h_at_a
    slope = level / a
    k_at_a = reserve_cdf_integral(c, a)
    return PiecewiseCdf.custom(
        cdf_fn=_piecewise_at(a, lambda x: slope * x, lambda x: reserve_cdf(c, x)),
        pdf_fn=_piecewise_at(a, lambda x: slope, lambda x: reserve_pdf(c, x)),
        breakpoints=(a,),
        integral_fn=_piecewise_at(
            a,
            lambda x: 0.5 * slope * x * x,
            lambda x: 0.5 * level * a + reserve_cdf_integral(c, x) - k_at_a,
        ),
    )
