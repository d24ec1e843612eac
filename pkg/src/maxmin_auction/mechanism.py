"""The second-price auction with a random reserve, and its simulated revenue.

Reports are treated as the bids.  With reserve CDF H, the higher bidder wins
with probability H(top bid) -- the chance the drawn reserve falls below her
bid -- and pays the expected value of max(second bid, reserve) conditional on
winning, which integrates to the closed form

    t_winner = s1 * H(s1) - integral of H over [s2, s1]      (s1 > s2).

Exact ties split both the allocation H(x) and the payment x*H(x) equally.
The loser never pays, and the truthful report is evaluated throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import (
    SolvedConstants,
    reserve_cdf,
    reserve_cdf_integral,
)
from .distributions import PiecewiseCdf
from .errors import ConvergenceError, DomainError
from .quadrature import adaptive_simpson

__all__ = [
    "BidProfile",
    "Outcome",
    "RevenueReport",
    "outcome",
    "sample_reserve",
    "uniform_pairs",
    "mc_revenue",
    "dominated_equilibrium_revenue",
]


@dataclass(frozen=True)
class BidProfile:
    """Reported messages of the two bidders, each in [0, 1]."""

    s1: float
    s2: float


@dataclass(frozen=True)
class Outcome:
    """Allocation probabilities and payments for one bid profile."""

    q1: float
    q2: float
    t1: float
    t2: float


@dataclass(frozen=True)
class RevenueReport:
    """An expected-revenue estimate with its method tag and error bar."""

    method: str
    value: float
    std_error: float
    n_samples: int
    seed: int
    mu: float
    a: float

    def to_json_dict(self) -> dict:
        return {
            "method": self.method,
            "value": self.value,
            "std_error": self.std_error,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "mu": self.mu,
            "a": self.a,
        }


def outcome(c: SolvedConstants, bids: BidProfile) -> Outcome:
    """Allocation and payments at a reported bid profile.

    The payment integral is evaluated by adaptive Simpson quadrature to
    ``c.tol_quad``.
    """
    s1, s2 = bids.s1, bids.s2
    if not (0.0 <= s1 <= 1.0 and 0.0 <= s2 <= 1.0):
        raise DomainError(f"bids must lie in [0, 1], got ({s1}, {s2})")
    if s1 == s2:
        h = reserve_cdf(c, s1)
        return Outcome(q1=h / 2.0, q2=h / 2.0, t1=s1 * h / 2.0, t2=s1 * h / 2.0)
    hi, lo = (s1, s2) if s1 > s2 else (s2, s1)
    h = reserve_cdf(c, hi)
    paid = hi * h - adaptive_simpson(lambda t: reserve_cdf(c, t), lo, hi, c.tol_quad)
    if s1 > s2:
        return Outcome(q1=h, q2=0.0, t1=paid, t2=0.0)
    return Outcome(q1=0.0, q2=h, t1=0.0, t2=paid)


def sample_reserve(c: SolvedConstants, u: float) -> float:
    """Inverse-CDF draw of the reserve: the x with H(x) = u, by bisection."""
    if not 0.0 <= u <= 1.0:
        raise DomainError(f"uniform draw must lie in [0, 1], got {u}")
    if u == 0.0:
        return 0.0
    if u == 1.0:
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if reserve_cdf(c, mid) < u:
            lo = mid
        else:
            hi = mid
        if hi - lo <= c.tol_root:
            return 0.5 * (lo + hi)
    raise ConvergenceError(f"reserve inversion did not reach tol_root for u={u}")


def uniform_pairs(seed: int, start: int, count: int) -> np.ndarray:
    """Counter-based uniform draws: pair ``i`` always consumes Philox stream
    words 2i and 2i+1 under key ``seed``, so any partition of [0, n) into
    ranges reproduces the exact same values.

    Philox emits four 64-bit words per counter value; the requested word
    range is mapped to its counter block and sliced, and each word becomes a
    double via the standard (w >> 11) * 2**-53 mapping.
    """
    first_word = 2 * start
    block, offset = divmod(first_word, 4)
    n_words = 2 * count + offset
    gen = np.random.Generator(np.random.Philox(key=seed, counter=[block, 0, 0, 0]))
    words = gen.integers(0, 2**64, size=n_words, dtype=np.uint64, endpoint=False)
    doubles = (words[offset:] >> np.uint64(11)).astype(np.float64) * 2.0**-53
    return doubles.reshape(count, 2)


def mc_revenue(
    c: SolvedConstants,
    signal: PiecewiseCdf,
    n_samples: int,
    seed: int,
) -> RevenueReport:
    """Monte Carlo expected revenue under truthful play and the given signal CDF.

    Signal pairs are drawn by inverse transform from the signal's quantile
    function.  The per-profile total payment uses the order statistics
    directly -- t1 + t2 = s(1) H(s(1)) - integral of H over [s(2), s(1)] --
    which agrees with ``outcome`` branch by branch, ties included.  The
    integral uses the closed-form antiderivative of H, so the whole
    evaluation is vectorised.  Output is bitwise reproducible from
    ``(seed, n_samples)``.
    """
    if n_samples < 1:
        raise DomainError("n_samples must be at least 1")
    u = uniform_pairs(seed, 0, n_samples)
    s = signal.quantile(u)
    s_hi = np.maximum(s[:, 0], s[:, 1])
    s_lo = np.minimum(s[:, 0], s[:, 1])
    totals = s_hi * reserve_cdf(c, s_hi) - (
        reserve_cdf_integral(c, s_hi) - reserve_cdf_integral(c, s_lo)
    )
    value = float(np.mean(totals))
    if n_samples > 1:
        std_error = float(np.std(totals, ddof=1) / math.sqrt(n_samples))
    else:
        std_error = float("nan")
    return RevenueReport(
        method="monte-carlo",
        value=value,
        std_error=std_error,
        n_samples=n_samples,
        seed=seed,
        mu=c.mu,
        a=c.a,
    )


def dominated_equilibrium_revenue(c: SolvedConstants, mu: float | None = None) -> float:
    """Revenue of the no-signal equilibrium in which one bidder reports the
    mean and the other reports zero: mu*H(mu) - integral of H over [0, mu].

    Always below the guaranteed revenue; the gap is what ruling out dominated
    play buys the seller.
    """
    m = c.mu if mu is None else mu
    if not 0.0 < m < 1.0:
        raise DomainError(f"mean must lie in (0, 1), got {m}")
    integral = adaptive_simpson(lambda t: reserve_cdf(c, t), 0.0, m, c.tol_quad)
    return m * reserve_cdf(c, m) - integral
