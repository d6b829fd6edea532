"""Clock spin algebra on integer spin indices.

A spin ``i`` stands for the angle ``2*pi*i/q``.  Two spins interact only through
their angular-distance class ``c = min((i-j) % q, (j-i) % q)`` in ``0..k`` with
``k = q // 2``; the weight ``W = exp(-beta*(1 - cos(2*pi*c/q)))`` of a class is
its level ``t_{k-c}``.  Every equality between weights is therefore an integer
equality between classes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from clockrc.errors import DomainError, SizeGuardError

NORM_TOL = 1e-12


def pair_class(i, j, q: int):
    """Angular-distance class of spins ``i`` and ``j`` (works elementwise)."""
    d = np.mod(np.subtract(i, j), q)
    c = np.minimum(d, q - d)
    return int(c) if np.ndim(c) == 0 else c


def class_energy(q: int) -> np.ndarray:
    """``1 - cos(2*pi*c/q)`` for ``c = 0..k``, written as ``2 sin^2`` for accuracy."""
    c = np.arange(q // 2 + 1)
    return 2.0 * np.sin(np.pi * c / q) ** 2


@dataclass(frozen=True)
class WeightTable:
    """Levels ``t_0 < ... < t_k = 1`` of the weight function for given ``(q, beta)``.

    ``r`` holds the increments (``r_0 = t_0``), which form the level
    probability ``theta``; ``K[i]`` counts ordered spin pairs at level ``i``.
    """

    q: int
    beta: float
    k: int
    t: np.ndarray
    r: np.ndarray
    K: np.ndarray
    energy: np.ndarray  # 1 - cos per class c

    def class_of_level(self, i):
        return self.k - np.asarray(i) if np.ndim(i) else self.k - int(i)

    def level_of_class(self, c):
        return self.k - np.asarray(c) if np.ndim(c) else self.k - int(c)

    def level_of_pair(self, a, b):
        return self.level_of_class(pair_class(a, b, self.q))

    def weight(self, a):
        """``W`` evaluated at spin-index difference ``a``."""
        return self.t[self.level_of_class(pair_class(a, 0, self.q))]

    @cached_property
    def class_matrix(self) -> np.ndarray:
        s = np.arange(self.q)
        m = pair_class(s[:, None], s[None, :], self.q)
        m.setflags(write=False)
        return m

    @cached_property
    def cost_matrix(self) -> np.ndarray:
        m = self.energy[self.class_matrix]
        m.setflags(write=False)
        return m

    def to_json(self) -> dict:
        return {
            "q": self.q,
            "beta": self.beta,
            "k": self.k,
            "t": self.t.tolist(),
            "r": self.r.tolist(),
            "K": self.K.tolist(),
        }


def build_weight_table(q: int, beta: float) -> WeightTable:
    if int(q) != q or q < 2:
        raise DomainError(f"q must be an integer >= 2, got {q}")
    if not beta > 0 or not np.isfinite(beta):
        raise DomainError(f"beta must be positive and finite, got {beta}")
    q = int(q)
    beta = float(beta)
    k = q // 2
    energy = class_energy(q)
    e_level = energy[::-1]  # energy of level i is energy of class k-i
    t = np.exp(-beta * e_level)
    r = np.empty(k + 1)
    r[0] = t[0]
    # t_i - t_{i-1} without cancellation
    r[1:] = -t[1:] * np.expm1(-beta * (e_level[:-1] - e_level[1:]))
    K = np.array([q if (c == 0 or 2 * c == q) else 2 * q for c in range(k, -1, -1)], dtype=np.int64)
    for arr in (t, r, K, energy):
        arr.setflags(write=False)
    return WeightTable(q=q, beta=beta, k=k, t=t, r=r, K=K, energy=energy)


def hamiltonian(g, sigma, wt: WeightTable) -> float:
    """Clock energy ``sum_edges 1 - cos(sigma_x - sigma_y)``."""
    sigma = np.asarray(sigma)
    if g.n_edges == 0:
        return 0.0
    e = g.edge_array
    return float(wt.energy[pair_class(sigma[e[:, 0]], sigma[e[:, 1]], wt.q)].sum())


def validate_spins(sigma, g, q: int) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=np.int64)
    if sigma.shape != (g.n_vertices,):
        raise DomainError(f"spin configuration has shape {sigma.shape}, expected ({g.n_vertices},)")
    if sigma.size and (sigma.min() < 0 or sigma.max() >= q):
        raise DomainError("spin index out of range")
    return sigma


def enumerate_spins(g, q: int, limit: int = 10**7) -> np.ndarray:
    """All spin configurations that vanish on ``U``, one per row.

    Free vertices are read as digits of a mixed-radix counter, the first free
    vertex being the most significant digit.
    """
    free = g.free_vertices
    m = len(free)
    total = q**m
    if total > limit:
        raise SizeGuardError(f"{q}^{m} = {total} spin configurations exceeds {limit}")
    out = np.zeros((total, g.n_vertices), dtype=np.int64)
    idx = np.arange(total)
    for pos in range(m - 1, -1, -1):
        out[:, free[pos]] = idx % q
        idx //= q
    return out
