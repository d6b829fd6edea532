"""Edge configurations over levels and the Edwards-Sokal coupling.

An edge configuration is an integer array holding one level index in ``0..k``
per edge (level ``i`` carries the value ``t_i``).  For comparisons with
Bernoulli configurations the level set is enlarged by a bottom symbol
``BOTTOM`` standing for the value 0, strictly below every level.
"""

from __future__ import annotations

import numpy as np

from clockrc.clock import WeightTable, enumerate_spins, pair_class
from clockrc.errors import DomainError

BOTTOM = -1


def as_levels(omega, g, wt: WeightTable, allow_bottom: bool = False) -> np.ndarray:
    omega = np.asarray(omega, dtype=np.int64)
    if omega.shape[-1:] != (g.n_edges,):
        raise DomainError(f"edge configuration has shape {omega.shape}, graph has {g.n_edges} edges")
    low = BOTTOM if allow_bottom else 0
    if omega.size and (omega.min() < low or omega.max() > wt.k):
        raise DomainError("edge level out of range")
    return omega


def level_caps(sigma, g, wt: WeightTable) -> np.ndarray:
    """Highest level each edge may carry next to ``sigma`` (``k - class``)."""
    sigma = np.asarray(sigma)
    e = g.edge_array
    return wt.k - pair_class(sigma[..., e[:, 0]], sigma[..., e[:, 1]], wt.q)


def is_compatible(omega, sigma, g, wt: WeightTable) -> bool:
    """``omega`` is dominated edgewise by the weights of ``sigma``'s gradients.

    Bottom entries carry the value 0 and never constrain ``sigma``.
    """
    omega = as_levels(omega, g, wt, allow_bottom=True)
    return bool(np.all(omega <= level_caps(sigma, g, wt)))


def precedes(omega, omega2) -> bool:
    """Pointwise order on the enlarged level space (``BOTTOM`` is smallest)."""
    return bool(np.all(np.asarray(omega) <= np.asarray(omega2)))


def from_bernoulli(bits, k: int) -> np.ndarray:
    """Embed a {0,1} edge configuration: 1 goes to the top level, 0 to ``BOTTOM``."""
    return np.where(np.asarray(bits, dtype=bool), k, BOTTOM).astype(np.int64)


def hat_phi_weight(omega, wt: WeightTable) -> float:
    """Product-measure weight ``prod_e r_{omega_e}``."""
    omega = np.asarray(omega, dtype=np.int64)
    if np.any(omega == BOTTOM):
        raise DomainError("the reference product measure is not defined at the bottom level")
    if omega.size and (omega.min() < 0 or omega.max() > wt.k):
        raise DomainError("edge level out of range")
    return float(np.prod(wt.r[omega]))


def count_compatible(omegas, g, wt: WeightTable, spins: np.ndarray | None = None,
                     chunk: int = 1 << 22) -> np.ndarray:
    """Number of spin configurations (zero on ``U``) compatible with each row of ``omegas``.

    Counts are exact integers.  ``spins`` may pass a precomputed enumeration.
    """
    omegas = np.atleast_2d(as_levels(omegas, g, wt))
    if spins is None:
        spins = enumerate_spins(g, wt.q)
    caps = level_caps(spins, g, wt)
    counts = np.zeros(len(omegas), dtype=np.int64)
    if g.n_edges == 0:
        counts[:] = len(spins)
        return counts
    step = max(1, chunk // max(1, len(spins) * g.n_edges))
    for lo in range(0, len(omegas), step):
        block = omegas[lo:lo + step]
        ok = np.all(block[:, None, :] <= caps[None, :, :], axis=2)
        counts[lo:lo + step] = ok.sum(axis=1)
    return counts


def phi_weight_unnormalized(omega, g, wt: WeightTable, limit: int = 10**7) -> float:
    """Random-cluster weight: compatible-spin count times the product weight."""
    spins = enumerate_spins(g, wt.q, limit=limit)
    n = count_compatible(np.asarray(omega)[None, :], g, wt, spins=spins)[0]
    return float(n) * hat_phi_weight(omega, wt)


def sample_edges_given_spins(sigma, g, wt: WeightTable, rng: np.random.Generator) -> np.ndarray:
    """Draw ``omega`` from the coupling's conditional law given ``sigma``.

    Each edge independently takes level ``i <= cap`` with probability
    ``r_i / t_cap``; since ``t`` is the cumulative sum of ``r`` this is an
    inverse-CDF lookup of a uniform scaled to ``[0, t_cap)``.
    """
    caps = level_caps(sigma, g, wt)
    u = rng.random(caps.shape) * wt.t[caps]
    levels = np.searchsorted(wt.t, u, side="right")
    return np.minimum(levels, caps)


def conditional_spin_weights(sigma, x: int, g, wt: WeightTable) -> np.ndarray:
    """Single-site Gibbs conditional of the spin at a free vertex ``x``."""
    if g.is_boundary[x]:
        raise DomainError(f"vertex {x} is a boundary vertex")
    sigma = np.asarray(sigma)
    nb = list(g.neighbors[x])
    energy = wt.cost_matrix[:, sigma[nb]].sum(axis=1) if nb else np.zeros(wt.q)
    logw = -wt.beta * energy
    w = np.exp(logw - logw.max())
    return w / w.sum()


def edge_config_to_json(omega) -> list:
    return [None if v == BOTTOM else int(v) for v in np.asarray(omega).tolist()]


def edge_config_from_json(data) -> np.ndarray:
    return np.array([BOTTOM if v is None else int(v) for v in data], dtype=np.int64)
