"""Brute-force enumeration of the clock measure, the random-cluster measure and
their coupling on small graphs, with exhaustive checks of the identities that
tie them together.

Counts of compatible configurations are exact 64-bit integers; probabilities
are formed from them only at the end.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import cached_property
from importlib import resources
from pathlib import Path

import numpy as np

from clockrc.clock import WeightTable, enumerate_spins, hamiltonian, pair_class
from clockrc.cluster import level_caps
from clockrc.errors import DomainError, SizeGuardError
from clockrc.lattice import Graph, load_graphs

ENUM_LIMIT = 10**7
TOL = 1e-10


def enumerate_levels(n_edges: int, k: int) -> np.ndarray:
    """All of ``{0..k}^E`` as rows, first edge most significant."""
    total = (k + 1) ** n_edges
    out = np.zeros((total, n_edges), dtype=np.int64)
    idx = np.arange(total)
    for pos in range(n_edges - 1, -1, -1):
        out[:, pos] = idx % (k + 1)
        idx //= k + 1
    return out


def boundary_reach(g: Graph, open_masks: np.ndarray) -> np.ndarray:
    """For each row of ``open_masks``, which vertices reach ``U`` via open edges.

    Plain fixed-point propagation, kept independent of the union-find code.
    """
    open_masks = np.atleast_2d(open_masks)
    reach = np.zeros((len(open_masks), g.n_vertices), dtype=bool)
    reach[:, list(g.boundary)] = True
    for _ in range(g.n_vertices):
        before = reach.copy()
        for e, (a, b) in enumerate(g.edges):
            o = open_masks[:, e]
            reach[:, a] |= reach[:, b] & o
            reach[:, b] |= reach[:, a] & o
        if np.array_equal(before, reach):
            break
    return reach


@dataclass
class ExactDistributions:
    """Exact clock measure ``mu``, random-cluster measure ``phi`` and coupling ``Q``.

    Rows of ``spins`` index ``mu`` (configurations vanishing on ``U``), rows
    of ``omegas`` index ``phi``; ``Q[w, s]`` is the joint probability.
    """

    graph: Graph
    wt: WeightTable
    spins: np.ndarray
    omegas: np.ndarray
    compat: np.ndarray
    counts: np.ndarray
    hat_phi: np.ndarray
    mu: np.ndarray
    phi: np.ndarray
    Z: float
    Zprime: float

    @property
    def n_free(self) -> int:
        return len(self.graph.free_vertices)

    @cached_property
    def Q(self) -> np.ndarray:
        uniform = 1.0 / self.wt.q ** self.n_free
        return self.compat * (self.hat_phi[:, None] * uniform / self.Zprime)

    @cached_property
    def top_open(self) -> np.ndarray:
        return self.omegas == self.wt.k

    @cached_property
    def reach(self) -> np.ndarray:
        """``reach[w, v]``: vertex ``v`` is joined to ``U`` by top-level edges of ``omegas[w]``."""
        return boundary_reach(self.graph, self.top_open)

    def spin_marginal(self, x: int) -> np.ndarray:
        return np.bincount(self.spins[:, x], weights=self.mu, minlength=self.wt.q)

    def connection_probability(self, x: int) -> float:
        return float(self.phi[self.reach[:, x]].sum())

    def lemma_counts(self, x: int) -> np.ndarray:
        """``out[w, a]`` = number of spins compatible with ``omegas[w]``, zero on U, with ``sigma_x = a``."""
        onehot = (self.spins[:, x][:, None] == np.arange(self.wt.q)[None, :]).astype(np.float64)
        return np.rint(self.compat.astype(np.float64) @ onehot).astype(np.int64)


def enumerate_all(g: Graph, wt: WeightTable, limit: int = ENUM_LIMIT) -> ExactDistributions:
    m = len(g.free_vertices)
    size = wt.q**m * (wt.k + 1) ** g.n_edges
    if size > limit:
        raise SizeGuardError(f"enumeration size {size} exceeds {limit}")
    spins = enumerate_spins(g, wt.q, limit=limit)
    omegas = enumerate_levels(g.n_edges, wt.k)
    caps = level_caps(spins, g, wt)
    compat = np.ones((len(omegas), len(spins)), dtype=bool)
    for e in range(g.n_edges):
        compat &= omegas[:, e][:, None] <= caps[:, e][None, :]
    counts = compat.sum(axis=1).astype(np.int64)
    hat_phi = np.prod(wt.r[omegas], axis=1) if g.n_edges else np.ones(1)
    if g.n_edges:
        e = g.edge_array
        energy = wt.energy[pair_class(spins[:, e[:, 0]], spins[:, e[:, 1]], wt.q)].sum(axis=1)
    else:
        energy = np.zeros(len(spins))
    boltz = np.exp(-wt.beta * energy)
    Z = float(boltz.sum())
    Zprime = float((counts * hat_phi).sum()) / wt.q**m
    return ExactDistributions(
        graph=g, wt=wt, spins=spins, omegas=omegas, compat=compat, counts=counts,
        hat_phi=hat_phi, mu=boltz / Z, phi=counts * hat_phi / Z, Z=Z, Zprime=Zprime,
    )


@dataclass
class MarginalReport:
    dev_phi: float
    dev_mu: float
    dev_Z: float  # relative mismatch of Z' * q^m against Z

    @property
    def passed(self) -> bool:
        return max(self.dev_phi, self.dev_mu, self.dev_Z) <= TOL


def verify_es_marginals(g: Graph, wt: WeightTable, dist: ExactDistributions | None = None) -> MarginalReport:
    dist = dist or enumerate_all(g, wt)
    Q = dist.Q
    return MarginalReport(
        dev_phi=float(np.abs(Q.sum(axis=1) - dist.phi).max()),
        dev_mu=float(np.abs(Q.sum(axis=0) - dist.mu).max()),
        dev_Z=abs(dist.Zprime * wt.q**dist.n_free - dist.Z) / dist.Z,
    )


@dataclass
class IdentityReport:
    lhs: float
    rhs: float

    @property
    def deviation(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def passed(self) -> bool:
        return self.deviation <= TOL


def verify_i14(g: Graph, wt: WeightTable, x: int, a: int,
               dist: ExactDistributions | None = None) -> IdentityReport:
    """Spin marginal at ``x`` against its split by the connection event ``x <-> U``."""
    dist = dist or enumerate_all(g, wt)
    lhs = dist.spin_marginal(x)[a]
    conn = dist.reach[:, x]
    joint = dist.Q[~conn][:, dist.spins[:, x] == a].sum()
    rhs = dist.connection_probability(x) * (a == 0) + joint
    return IdentityReport(lhs=float(lhs), rhs=float(rhs))


def verify_lemma_counts(g: Graph, wt: WeightTable, omega, x: int, a: int) -> bool:
    """Compatible configurations pinned to ``a`` at ``x`` never outnumber those pinned to 0."""
    spins = enumerate_spins(g, wt.q)
    caps = level_caps(spins, g, wt)
    ok = np.all(np.asarray(omega)[None, :] <= caps, axis=1)
    return int(np.sum(ok & (spins[:, x] == a))) <= int(np.sum(ok & (spins[:, x] == 0)))


def lemma_violations(dist: ExactDistributions) -> int:
    """Number of ``(omega, x, a)`` for which the counting inequality fails."""
    bad = 0
    for x in range(dist.graph.n_vertices):
        counts = dist.lemma_counts(x)
        bad += int(np.sum(counts[:, 1:] > counts[:, :1]))
    return bad


@dataclass
class CorrelationReport:
    x: int
    mu_zero: float
    mu_other: np.ndarray  # mu(sigma_x = a) for a = 1..q-1
    connection: float

    @property
    def slack(self) -> float:
        if self.mu_other.size == 0:
            return self.mu_zero - self.connection
        return float(self.mu_zero - self.mu_other.max() - self.connection)

    @property
    def passed(self) -> bool:
        return self.slack >= -TOL


def verify_positive_correlations(g: Graph, wt: WeightTable, x: int,
                                 dist: ExactDistributions | None = None) -> CorrelationReport:
    dist = dist or enumerate_all(g, wt)
    marg = dist.spin_marginal(x)
    return CorrelationReport(x=x, mu_zero=float(marg[0]), mu_other=marg[1:].copy(),
                             connection=dist.connection_probability(x))


def single_bond_alpha(g: Graph, wt: WeightTable, e: int, omega_rest, spins=None) -> float:
    """Probability under ``phi`` that edge ``e`` is at the top level given the other edges.

    ``omega_rest`` is a full level array; its entry at ``e`` is ignored.
    """
    if not 0 <= e < g.n_edges:
        raise DomainError(f"edge index {e} out of range")
    spins = enumerate_spins(g, wt.q) if spins is None else spins
    caps = level_caps(spins, g, wt)
    rest = np.delete(np.asarray(omega_rest, dtype=np.int64), e)
    ok_rest = np.all(rest[None, :] <= np.delete(caps, e, axis=1), axis=1)
    # N_i = #{sigma : compatible off e, cap_e >= i}
    n_at = np.array([np.sum(ok_rest & (caps[:, e] >= i)) for i in range(wt.k + 1)], dtype=np.int64)
    return float(wt.r[-1] * n_at[-1] / np.dot(wt.r, n_at))


def alpha_table(dist: ExactDistributions) -> np.ndarray:
    """``out[e, w]``: single-bond conditional for edge ``e`` given ``omegas[w]`` off ``e``.

    Rows for configurations differing only at ``e`` repeat the same value.
    """
    g, wt = dist.graph, dist.wt
    k1 = wt.k + 1
    E = g.n_edges
    out = np.empty((E, len(dist.omegas)))
    weights = dist.phi.reshape((k1,) * E)
    for e in range(E):
        w = np.moveaxis(weights, e, -1)
        alpha = w[..., -1] / w.sum(axis=-1)
        out[e] = np.moveaxis(np.repeat(alpha[..., None], k1, axis=-1), -1, e).ravel()
    return out


# ---------------------------------------------------------------- corpus


def _canonical(m: int, edges) -> tuple:
    """Canonical edge tuple under permutations of the free vertices ``0..m-1``."""
    best = None
    for perm in itertools.permutations(range(m)):
        relabel = list(perm) + [m]
        key = tuple(sorted(tuple(sorted((relabel[a], relabel[b]))) for a, b in edges))
        if best is None or key < best:
            best = key
    return best


def _is_connected(n: int, edges) -> bool:
    seen = {0}
    frontier = [0]
    adj = {v: [] for v in range(n)}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    while frontier:
        v = frontier.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                frontier.append(w)
    return len(seen) == n


def generate_corpus(max_free: int = 4, max_edges: int = 5) -> list[Graph]:
    """All connected graphs with one boundary vertex, up to relabelling free vertices.

    Free vertices are ``0..m-1`` and the boundary vertex is ``m``.
    """
    graphs = []
    for m in range(1, max_free + 1):
        pairs = list(itertools.combinations(range(m + 1), 2))
        seen = set()
        for ne in range(m, max_edges + 1):
            for edges in itertools.combinations(pairs, ne):
                if not _is_connected(m + 1, edges):
                    continue
                key = _canonical(m, edges)
                if key in seen:
                    continue
                seen.add(key)
                graphs.append(Graph(m + 1, (m,), key))
    return graphs


def load_corpus(path="default") -> list[Graph]:
    if str(path) == "default":
        with resources.files("clockrc").joinpath("data/corpus.json").open() as fh:
            return [Graph.from_json(item) for item in json.load(fh)["graphs"]]
    return load_graphs(Path(path))


def write_corpus(path, graphs) -> None:
    payload = {"description": "connected graphs, one boundary vertex (last id), "
                              "free vertices <= 4, edges <= 5",
               "graphs": [g.to_json() for g in graphs]}
    Path(path).write_text(json.dumps(payload, indent=1) + "\n")


def hamiltonian_table(dist: ExactDistributions) -> np.ndarray:
    """Energies of every enumerated spin configuration (slow path, for tests)."""
    return np.array([hamiltonian(dist.graph, s, dist.wt) for s in dist.spins])
