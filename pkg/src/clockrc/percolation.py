"""Bernoulli bond percolation on boxes: disorder sampling, thinning, connection
probabilities and a crossing-probability estimate of the critical point in d=2.

Disorders at different ``p`` are coupled through one uniform per edge, so the
open set is monotone in ``p`` sample by sample.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from clockrc.errors import DomainError
from clockrc.lattice import Disorder, Graph, boundary_connected, build_box_graph, cluster_roots


def _check_prob(name, value):
    if not 0.0 <= value <= 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {value}")


def disorder_from_uniforms(u: np.ndarray, p: float) -> Disorder:
    _check_prob("p", p)
    return Disorder(u < p)


def sample_disorder(g: Graph, p: float, rng: np.random.Generator) -> Disorder:
    """Each edge of ``g`` open independently with probability ``p``."""
    _check_prob("p", p)
    return disorder_from_uniforms(rng.random(g.n_edges), p)


def thin(J: Disorder, rho: float, rng: np.random.Generator) -> Disorder:
    """Keep each open edge of ``J`` independently with probability ``rho``."""
    _check_prob("rho", rho)
    return Disorder(J.open & (rng.random(len(J)) < rho))


@dataclass
class PercolationEstimate:
    p: float
    n: int
    samples: int
    estimate: float
    stderr: float


def _bernoulli_estimate(p, n, hits) -> PercolationEstimate:
    hits = np.asarray(hits, dtype=float)
    m = len(hits)
    est = float(hits.mean())
    se = float(np.sqrt(est * (1 - est) / m)) if m > 1 else 0.0
    return PercolationEstimate(p=p, n=n, samples=m, estimate=est, stderr=se)


def estimate_connection(p: float, n: int, d: int, samples: int, rng: np.random.Generator,
                        x=None) -> PercolationEstimate:
    """Monte Carlo probability that site ``x`` (default: the origin) is joined to the box boundary."""
    _check_prob("p", p)
    if samples < 1:
        raise DomainError("need at least one sample")
    g = build_box_graph(n, d)
    xi = g.site_index((0,) * d if x is None else x)
    hits = np.empty(samples, dtype=bool)
    for s in range(samples):
        hits[s] = boundary_connected(g, rng.random(g.n_edges) < p)[xi]
    return _bernoulli_estimate(p, n, hits)


def square_grid(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Edges of the ``n x n`` site grid with its left and right columns."""
    ids = np.arange(n * n).reshape(n, n)
    horiz = np.column_stack([ids[:, :-1].ravel(), ids[:, 1:].ravel()])
    vert = np.column_stack([ids[:-1, :].ravel(), ids[1:, :].ravel()])
    return np.vstack([horiz, vert]), ids[:, 0].copy(), ids[:, -1].copy()


def crossing_probabilities(p_values, n: int, samples: int, rng: np.random.Generator) -> np.ndarray:
    """Left-right open crossing probability of the ``n x n`` grid at each ``p`` (coupled)."""
    p_values = np.asarray(p_values, dtype=float)
    edges, left, right = square_grid(n)
    hits = np.zeros(len(p_values))
    for _ in range(samples):
        u = rng.random(len(edges))
        for i, p in enumerate(p_values):
            roots = cluster_roots(n * n, edges, u < p)
            hits[i] += np.intersect1d(roots[left], roots[right]).size > 0
    return hits / samples


def crossing_point(p_values, probs, level: float = 0.5) -> float:
    """Linear interpolation of where the crossing curve passes ``level``."""
    p_values = np.asarray(p_values, dtype=float)
    probs = np.asarray(probs, dtype=float)
    above = np.flatnonzero(probs >= level)
    if above.size == 0 or above[0] == 0:
        raise DomainError("crossing level not bracketed by the p grid")
    i = above[0]
    p0, p1 = p_values[i - 1], p_values[i]
    f0, f1 = probs[i - 1], probs[i]
    return float(p0 + (level - f0) * (p1 - p0) / (f1 - f0))


def estimate_pc(n_list, samples: int, rng: np.random.Generator, p_grid=None, d: int = 2) -> float:
    """Critical point from where crossing probabilities pass 1/2.

    With several box sizes the crossing points are extrapolated linearly in
    ``1/n`` to ``n = infinity``.
    """
    if d != 2:
        raise DomainError("crossing estimate is implemented for d = 2 only")
    p_grid = np.round(np.arange(0.40, 0.6001, 0.02), 10) if p_grid is None else np.asarray(p_grid)
    n_list = list(n_list)
    points = [crossing_point(p_grid, crossing_probabilities(p_grid, n, samples, rng)) for n in n_list]
    if len(n_list) == 1:
        return points[0]
    fit = np.polyfit(1.0 / np.asarray(n_list, dtype=float), points, 1)
    return float(fit[1])


@dataclass
class ThinningTest:
    open_fraction: tuple[float, float]
    connection: tuple[float, float]
    p_open: float  # chi-square p-value, open-edge counts
    p_connection: float  # chi-square p-value, connection events

    def passed(self, alpha: float = 0.01) -> bool:
        return self.p_open >= alpha and self.p_connection >= alpha


def thinning_test(p: float, rho: float, n: int, samples: int, rng: np.random.Generator, d: int = 2) -> ThinningTest:
    """Two-sample comparison of thinned P_p disorders against fresh P_{p rho} disorders."""
    g = build_box_graph(n, d)
    center = g.site_index((0,) * d)
    open_counts = np.zeros(2, dtype=np.int64)
    conn_counts = np.zeros(2, dtype=np.int64)
    for _ in range(samples):
        for j, J in enumerate((thin(sample_disorder(g, p, rng), rho, rng),
                               sample_disorder(g, p * rho, rng))):
            open_counts[j] += J.open.sum()
            conn_counts[j] += boundary_connected(g, J.open)[center]
    total = samples * g.n_edges
    _, p_open, _, _ = stats.chi2_contingency(np.column_stack([open_counts, total - open_counts]))
    _, p_conn, _, _ = stats.chi2_contingency(np.column_stack([conn_counts, samples - conn_counts]))
    return ThinningTest(
        open_fraction=tuple(open_counts / total),
        connection=tuple(conn_counts / samples),
        p_open=float(p_open),
        p_connection=float(p_conn),
    )
