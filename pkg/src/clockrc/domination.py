"""Threshold function for Bernoulli domination of the random-cluster measure.

``varphi(beta, q)`` lower-bounds every single-bond conditional probability of
a top-level edge, uniformly over graphs.  ``beta0(rho, q)`` is its inverse:
for ``beta >= beta0(rho)`` the Bernoulli(rho) product measure is dominated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from clockrc.clock import WeightTable, build_weight_table
from clockrc.errors import DomainError
from clockrc.oracle import ExactDistributions, alpha_table, enumerate_all

BRACKET = (1e-6, 50.0)


def varphi_from_table(wt: WeightTable) -> float:
    return 1.0 / float(np.sum(wt.t / wt.r[-1] * wt.K / wt.K[-1]))


def varphi(beta: float, q: int) -> float:
    return varphi_from_table(build_weight_table(q, beta))


def varphi_q4_closed_form(beta):
    """The q = 4 threshold curve written out: (1 - e^-b) / (e^-2b + 2 e^-b + 1)."""
    x = np.exp(-np.asarray(beta, dtype=float))
    return -np.expm1(-np.asarray(beta, dtype=float)) / (x * x + 2 * x + 1)


@dataclass
class ThresholdCurve:
    q: int
    beta: np.ndarray
    phi: np.ndarray

    @property
    def increasing(self) -> bool:
        return bool(np.all(np.diff(self.phi) > 0))

    def to_csv_rows(self):
        return [(float(b), float(p)) for b, p in zip(self.beta, self.phi)]


def threshold_curve(q: int, beta_min: float = 0.01, beta_max: float = 10.0, points: int = 200) -> ThresholdCurve:
    betas = np.linspace(beta_min, beta_max, points)
    return ThresholdCurve(q=q, beta=betas, phi=np.array([varphi(b, q) for b in betas]))


def beta0(rho: float, q: int, xtol: float = 1e-12) -> float:
    """Inverse of ``varphi`` by bisection.

    Starts from the bracket ``[1e-6, 50]`` and widens it geometrically when
    ``rho`` falls outside its image (large ``q`` or ``rho`` near 0 or 1).
    """
    if not 0.0 < rho < 1.0:
        raise DomainError(f"rho must lie in (0, 1), got {rho}")
    lo, hi = BRACKET
    while varphi(lo, q) > rho:
        lo /= 10.0
        if lo < 1e-300:
            raise DomainError(f"rho={rho} below the reach of the threshold curve")
    while varphi(hi, q) < rho:
        hi *= 2.0
        if hi > 1e12:
            raise DomainError(f"rho={rho} above the reach of the threshold curve")
    grid = np.geomspace(lo, hi, 16)
    if np.any(np.diff([varphi(b, q) for b in grid]) <= 0):
        raise DomainError("threshold curve is not increasing on the bracket")
    return float(optimize.bisect(lambda b: varphi(b, q) - rho, lo, hi, xtol=xtol, maxiter=500))


def beta0_bound_at(rho: float, q: int) -> float:
    """Explicit inverse of the cruder lower bound ``r_k / (1 + q t_{k-1})`` at level ``rho``."""
    if not 0.0 < rho < 1.0:
        raise DomainError(f"rho must lie in (0, 1), got {rho}")
    return float(np.log((1.0 + q * rho) / (1.0 - rho)) / (2.0 * np.sin(np.pi / q) ** 2))


def beta0_upper_bound(p: float, q: int, d: int, p_c: float) -> float:
    """Closed-form upper bound on ``beta0(p_c / p)``.

    ``d`` enters only through ``p_c``, which the caller supplies.
    """
    if d < 1:
        raise DomainError("dimension must be >= 1")
    if not 0.0 < p_c < p <= 1.0:
        raise DomainError(f"need 0 < p_c < p <= 1, got p={p}, p_c={p_c}")
    return float(np.log((p + q * p_c) / (p - p_c)) / (2.0 * np.sin(np.pi / q) ** 2))


@dataclass
class AlphaReport:
    min_alpha: float
    varphi: float
    argmin: tuple[int, int]  # (edge, omega row)

    @property
    def slack(self) -> float:
        return self.min_alpha - self.varphi

    @property
    def passed(self) -> bool:
        return self.slack >= -1e-10


def verify_alpha_bound(g, wt: WeightTable, dist: ExactDistributions | None = None) -> AlphaReport:
    """Smallest single-bond conditional over all edges and neighbouring configurations."""
    dist = dist or enumerate_all(g, wt)
    if g.n_edges == 0:
        return AlphaReport(min_alpha=1.0, varphi=varphi_from_table(wt), argmin=(-1, -1))
    table = alpha_table(dist)
    e, w = np.unravel_index(np.argmin(table), table.shape)
    return AlphaReport(min_alpha=float(table[e, w]), varphi=varphi_from_table(wt), argmin=(int(e), int(w)))
