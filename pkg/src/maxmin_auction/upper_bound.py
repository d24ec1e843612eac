"""Revenue cap over all incentive-compatible mechanisms, via a quantile LP.

Types are re-indexed by quantile, so both bidders' types are uniform on
[0, 1] and the type value is the signal quantile function s(z) (a/(1-z)
capped at 1).  On a midpoint grid of n quantiles per bidder, the LP

    maximize   mean interim payment of both bidders
    subject to truth-telling beats every misreport (all ordered type pairs),
               every type keeps a nonnegative surplus,
               allocations feasible cellwise (q1 + q2 <= 1, each in [0, 1])

bounds what any mechanism can earn against the worst-case signal
distribution.  The analytic cap is 2a(1-a) + a^2 = 2a - a^2: full allocation
to types above quantile 1 - a earns at most that, and the truthful auction
discretized to the same grid attains it up to discretization error.

The midpoint grid keeps the kink of s(z) at 1 - a off the nodes.  Symmetry
across bidders is deliberately not imposed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .constants import (
    SolvedConstants,
    reserve_cdf,
    reserve_cdf_integral,
    signal_quantile,
)
from .errors import ConvergenceError, DomainError, MonotonicityError

__all__ = [
    "DiscreteDirectMechanism",
    "lp_max_revenue",
    "analytic_bound",
    "envelope_payments",
    "discretize_truthful_mechanism",
    "truthful_interim_allocation",
    "bic_bir_violations",
]


@dataclass(frozen=True)
class DiscreteDirectMechanism:
    """Allocations and payments on the quantile midpoint grid.

    ``q1[j, k]`` is bidder 1's allocation when bidder 1 has type index j and
    bidder 2 type index k; payments follow the same layout.
    """

    z: np.ndarray
    types: np.ndarray
    q1: np.ndarray
    q2: np.ndarray
    t1: np.ndarray
    t2: np.ndarray

    @property
    def n(self) -> int:
        return self.z.size

    def interim(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Interim allocations and payments (Q1, Q2, T1, T2) per own type."""
        return (
            self.q1.mean(axis=1),
            self.q2.mean(axis=0),
            self.t1.mean(axis=1),
            self.t2.mean(axis=0),
        )

    def expected_revenue(self) -> float:
        return float(self.t1.mean() + self.t2.mean())

    def to_json_dict(self) -> dict:
        return {
            "z": self.z.tolist(),
            "types": self.types.tolist(),
            "q1": self.q1.tolist(),
            "q2": self.q2.tolist(),
            "t1": self.t1.tolist(),
            "t2": self.t2.tolist(),
        }


def analytic_bound(c: SolvedConstants) -> float:
    """The closed-form revenue cap 2a(1-a) + a^2, simplified to 2a - a^2.

    Evaluated exactly as the guarantee is, so the two are bitwise equal.
    """
    return 2.0 * c.a - c.a * c.a


def _quantile_grid(n: int) -> np.ndarray:
    return (np.arange(n) + 0.5) / n


def lp_max_revenue(
    c: SolvedConstants, n: int, *, bic: str = "all-pairs"
) -> tuple[float, DiscreteDirectMechanism]:
    """Solve the discretized revenue-maximization LP; returns (optimum, mechanism).

    ``bic`` selects the misreport set: ``"all-pairs"`` (default) or
    ``"adjacent"`` (only neighbouring types), whose optimum can only be
    larger.  Variables are the cellwise allocations plus interim allocations
    and payments; ex-post payments in the returned mechanism are constant in
    the opponent's type.
    """
    if n < 10:
        raise DomainError(f"quantile grid needs at least 10 points, got {n}")
    if bic not in ("all-pairs", "adjacent"):
        raise DomainError(f"unknown BIC constraint set: {bic}")
    z = _quantile_grid(n)
    s = signal_quantile(c, z)

    n2 = n * n
    # variable layout: q1 (n^2) | q2 (n^2) | Q1 (n) | Q2 (n) | T1 (n) | T2 (n)
    off_q2 = n2
    off_cap_q1 = 2 * n2
    off_cap_q2 = 2 * n2 + n
    off_t1 = 2 * n2 + 2 * n
    off_t2 = 2 * n2 + 3 * n
    n_var = 2 * n2 + 4 * n

    cost = np.zeros(n_var)
    cost[off_t1 : off_t2 + n] = -1.0 / n  # maximize mean payments

    # interim definitions: Q_i(own) - mean over opponent of q_i = 0
    eq_rows, eq_cols, eq_vals = [], [], []
    row = 0
    for j in range(n):
        eq_rows.append(row)
        eq_cols.append(off_cap_q1 + j)
        eq_vals.append(1.0)
        for k in range(n):
            eq_rows.append(row)
            eq_cols.append(j * n + k)
            eq_vals.append(-1.0 / n)
        row += 1
    for k in range(n):
        eq_rows.append(row)
        eq_cols.append(off_cap_q2 + k)
        eq_vals.append(1.0)
        for j in range(n):
            eq_rows.append(row)
            eq_cols.append(off_q2 + j * n + k)
            eq_vals.append(-1.0 / n)
        row += 1
    a_eq = sparse.csr_matrix(
        (eq_vals, (eq_rows, eq_cols)), shape=(row, n_var)
    )
    b_eq = np.zeros(row)

    ub_rows, ub_cols, ub_vals = [], [], []
    row = 0
    # feasibility: q1 + q2 <= 1 cellwise
    for cell in range(n2):
        ub_rows.extend((row, row))
        ub_cols.extend((cell, off_q2 + cell))
        ub_vals.extend((1.0, 1.0))
        row += 1

    def misreports(j: int):
        if bic == "all-pairs":
            return (m for m in range(n) if m != j)
        return (m for m in (j - 1, j + 1) if 0 <= m < n)

    # BIC: s_j Q_i(m) - T_i(m) - s_j Q_i(j) + T_i(j) <= 0
    for off_q, off_t in ((off_cap_q1, off_t1), (off_cap_q2, off_t2)):
        for j in range(n):
            for m in misreports(j):
                ub_rows.extend((row, row, row, row))
                ub_cols.extend((off_q + m, off_t + m, off_q + j, off_t + j))
                ub_vals.extend((s[j], -1.0, -s[j], 1.0))
                row += 1
    # BIR: T_i(j) - s_j Q_i(j) <= 0
    for off_q, off_t in ((off_cap_q1, off_t1), (off_cap_q2, off_t2)):
        for j in range(n):
            ub_rows.extend((row, row))
            ub_cols.extend((off_t + j, off_q + j))
            ub_vals.extend((1.0, -s[j]))
            row += 1
    a_ub = sparse.csr_matrix((ub_vals, (ub_rows, ub_cols)), shape=(row, n_var))
    b_ub = np.zeros(row)
    b_ub[:n2] = 1.0  # cellwise allocation capacity

    bounds = [(0.0, 1.0)] * (2 * n2 + 2 * n) + [(None, None)] * (2 * n)
    # The saddle leaves the objective flat over a large optimal face; the
    # simplex variant crawls on that degeneracy while interior point with
    # crossover stays fast and still returns a vertex certificate.
    res = linprog(
        cost,
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=bounds,
        method="highs-ipm",
    )
    if not res.success:
        raise ConvergenceError(f"LP solver failed: {res.message}")
    optimum = -float(res.fun)

    q1 = res.x[:n2].reshape(n, n)
    q2 = res.x[off_q2 : off_q2 + n2].reshape(n, n)
    t1_interim = res.x[off_t1 : off_t1 + n]
    t2_interim = res.x[off_t2 : off_t2 + n]
    mech = DiscreteDirectMechanism(
        z=z,
        types=s,
        q1=q1,
        q2=q2,
        t1=np.tile(t1_interim[:, None], (1, n)),
        t2=np.tile(t2_interim[None, :], (n, 1)),
    )
    return optimum, mech


def envelope_payments(Q: np.ndarray, c: SolvedConstants) -> np.ndarray:
    """Interim payments that implement a nondecreasing interim allocation.

    ``Q`` holds allocations at the quantile midpoints and is treated as
    piecewise constant on the panels.  Surplus integrates the type-value
    derivative against Q with zero surplus at the bottom; payments are then
    T(z) = s(z) Q(z) - U(z).  Satisfies the discrete truth-telling
    constraints up to O(1/n).
    """
    Q = np.asarray(Q, dtype=float)
    if Q.ndim != 1 or Q.size < 2:
        raise DomainError("Q must be a 1-d array with at least 2 entries")
    if np.any(np.diff(Q) < -1e-12):
        raise MonotonicityError("interim allocation must be nondecreasing")
    n = Q.size
    z_mid = _quantile_grid(n)
    z_edge = np.arange(n + 1) / n
    s_mid = signal_quantile(c, z_mid)
    s_edge = signal_quantile(c, z_edge)
    # U at a midpoint: full panels below, plus the half panel it sits in.
    panel_increments = Q * np.diff(s_edge)
    below = np.concatenate(([0.0], np.cumsum(panel_increments)[:-1]))
    U = below + Q * (s_mid - s_edge[:-1])
    return s_mid * Q - U


def truthful_interim_allocation(c: SolvedConstants, z: np.ndarray) -> np.ndarray:
    """Interim allocation of the truthful auction under the worst-case signals.

    A type at quantile z < 1-a beats the opponent with probability z and then
    wins with probability H(s(z)); the top types (value 1) win outright
    against lower types and split the unit reserve-free allocation at ties:
    Q = (1 - a) + a/2.
    """
    z = np.asarray(z, dtype=float)
    s = signal_quantile(c, z)
    low = z < 1.0 - c.a
    return np.where(low, z * reserve_cdf(c, s), 1.0 - c.a / 2.0)


def discretize_truthful_mechanism(c: SolvedConstants, n: int) -> DiscreteDirectMechanism:
    """The truthful auction restricted to the quantile midpoint grid."""
    z = _quantile_grid(n)
    s = signal_quantile(c, z)
    s1 = s[:, None]
    s2 = s[None, :]
    h1 = reserve_cdf(c, s)[:, None]
    h2 = reserve_cdf(c, s)[None, :]
    k = reserve_cdf_integral(c, s)
    pay_hi_1 = s1 * h1 - (k[:, None] - k[None, :])  # winner 1 pays this
    pay_hi_2 = s2 * h2 - (k[None, :] - k[:, None])
    win1 = s1 > s2
    win2 = s2 > s1
    tie = ~win1 & ~win2
    q1 = np.where(win1, h1, np.where(tie, h1 / 2.0, 0.0))
    q2 = np.where(win2, h2, np.where(tie, h2 / 2.0, 0.0))
    t1 = np.where(win1, pay_hi_1, np.where(tie, s1 * h1 / 2.0, 0.0))
    t2 = np.where(win2, pay_hi_2, np.where(tie, s2 * h2 / 2.0, 0.0))
    return DiscreteDirectMechanism(z=z, types=s, q1=q1, q2=q2, t1=t1, t2=t2)


def bic_bir_violations(mech: DiscreteDirectMechanism) -> dict:
    """Worst-case violations of the LP constraints for a given mechanism.

    Returns the largest BIC gain from a misreport, the largest negative
    surplus (BIR), and the largest cellwise allocation excess; all are <= 0
    up to tolerance for a feasible mechanism.
    """
    s = mech.types
    Q1, Q2, T1, T2 = mech.interim()
    worst_bic = -math.inf
    for Q, T in ((Q1, T1), (Q2, T2)):
        truthful = s * Q - T
        deviate = s[:, None] * Q[None, :] - T[None, :]
        gain = deviate - truthful[:, None]
        np.fill_diagonal(gain, -math.inf)
        worst_bic = max(worst_bic, float(gain.max()))
    worst_bir = float(max(-(s * Q1 - T1).min(), -(s * Q2 - T2).min()))
    worst_feas = float((mech.q1 + mech.q2).max() - 1.0)
    return {
        "max_bic_gain": worst_bic,
        "max_bir_violation": worst_bir,
        "max_feasibility_excess": worst_feas,
    }
