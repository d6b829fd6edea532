"""Heat-bath sampling of the clock measure with boundary spins pinned to 0, and
estimators for the boundary-induced excess of spin 0 at a probe site.

A sweep visits the free vertices colour class by colour class in a fixed
order.  Vertices of one class share no edge, so updating a class at once is
the same as updating its vertices one after another.  Every edge
configuration drawn from the coupling's conditional law given a sampled spin
configuration is, at stationarity, a draw from the random-cluster measure.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from clockrc.clock import WeightTable, build_weight_table, class_energy, pair_class
from clockrc.cluster import sample_edges_given_spins
from clockrc.errors import DomainError, InvariantViolation
from clockrc.lattice import Graph, apply_disorder, boundary_connected, build_box_graph
from clockrc.percolation import sample_disorder

Z99 = 2.3263478740408408  # one-sided 99% normal quantile


def color_classes(g: Graph) -> list[np.ndarray]:
    """Partition of the free vertices into independent sets.

    Box graphs use coordinate parity; other graphs a greedy colouring.
    """
    free = g.free_vertices
    if g.coords is not None:
        parity = g.coords.sum(axis=1) % 2
        return [c for c in (free[parity[free] == 0], free[parity[free] == 1]) if c.size]
    color = {}
    for v in free:
        used = {color[w] for w in g.neighbors[v] if w in color}
        color[int(v)] = next(c for c in range(len(used) + 1) if c not in used)
    n_col = max(color.values(), default=-1) + 1
    return [np.array([v for v in free if color[int(v)] == c], dtype=np.int64) for c in range(n_col)]


class GibbsSampler:
    """Systematic-scan heat bath for spins in ``0..q-1`` (``beta = 0`` allowed).

    ``sweep`` accepts a single configuration of shape ``(V,)`` or a batch of
    independent chains of shape ``(C, V)`` and updates it in place.
    """

    def __init__(self, g: Graph, q: int, beta: float):
        if beta < 0:
            raise DomainError("beta must be non-negative")
        self.g, self.q, self.beta = g, q, float(beta)
        s = np.arange(q)
        energy = class_energy(q)[pair_class(s[:, None], s[None, :], q)]
        # extra column q is a neutral padding neighbour
        self.boltz = np.hstack([np.exp(-self.beta * energy), np.ones((q, 1))])
        self.classes = []
        for verts in color_classes(g):
            deg = max((len(g.neighbors[v]) for v in verts), default=0)
            nbr = np.zeros((len(verts), max(deg, 1)), dtype=np.int64)
            mask = np.zeros(nbr.shape, dtype=bool)
            for i, v in enumerate(verts):
                nb = g.neighbors[v]
                nbr[i, :len(nb)] = nb
                mask[i, :len(nb)] = True
            self.classes.append((verts, nbr, mask))

    def sweep(self, spins: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        for verts, nbr, mask in self.classes:
            nbs = np.where(mask, spins[..., nbr], self.q)  # (..., n, D)
            w = self.boltz[:, nbs].prod(axis=-1)  # (q, ..., n)
            cum = np.cumsum(w, axis=0)
            u = rng.random(cum.shape[1:]) * cum[-1]
            spins[..., verts] = np.minimum((cum < u).sum(axis=0), self.q - 1)
        return spins


@dataclass
class ChainState:
    """One chain: spins (pinned to 0 on the boundary), sweep counter, RNG and tallies."""

    spins: np.ndarray
    rng: np.random.Generator
    probes: tuple[int, ...] = ()
    sweeps: int = 0
    n_samples: int = 0
    hist: np.ndarray | None = None
    conn_hits: np.ndarray | None = None
    check_boundary: bool = False
    sampler: GibbsSampler | None = field(default=None, repr=False)

    @classmethod
    def start(cls, g: Graph, wt: WeightTable, rng: np.random.Generator, probes=(), init: str = "boundary",
              check_boundary: bool = False) -> ChainState:
        spins = np.zeros(g.n_vertices, dtype=np.int64)
        if init == "random":
            spins[g.free_vertices] = rng.integers(0, wt.q, size=len(g.free_vertices))
        elif init != "boundary":
            raise DomainError(f"unknown initial condition {init!r}")
        probes = tuple(int(p) for p in probes)
        return cls(spins=spins, rng=rng, probes=probes,
                   hist=np.zeros((len(probes), wt.q), dtype=np.int64),
                   conn_hits=np.zeros(len(probes), dtype=np.int64),
                   check_boundary=check_boundary)


def heat_bath_sweep(state: ChainState, g: Graph, wt: WeightTable, rng: np.random.Generator | None = None) -> ChainState:
    """Resample every free vertex once from its Gibbs conditional."""
    s = state.sampler
    if s is None or s.g is not g or s.q != wt.q or s.beta != wt.beta:
        state.sampler = s = GibbsSampler(g, wt.q, wt.beta)
    s.sweep(state.spins, rng if rng is not None else state.rng)
    state.sweeps += 1
    if state.check_boundary and np.any(state.spins[list(g.boundary)] != 0):
        raise InvariantViolation("boundary spins moved")
    return state


def observe(state: ChainState, g: Graph, wt: WeightTable) -> tuple[np.ndarray, np.ndarray]:
    """Record probe spins and whether each probe is joined to U in a derived edge sample."""
    omega = sample_edges_given_spins(state.spins, g, wt, state.rng)
    conn = boundary_connected(g, omega == wt.k)[list(state.probes)]
    spins = state.spins[list(state.probes)]
    state.hist[np.arange(len(spins)), spins] += 1
    state.conn_hits += conn
    state.n_samples += 1
    return spins, conn


@dataclass
class FrequencyEstimate:
    estimate: float
    stderr: float
    samples: int


def batch_means(x, batches: int = 50) -> tuple[float, float]:
    """Mean and batch-means standard error."""
    x = np.asarray(x, dtype=float)
    b = min(batches, len(x))
    if b < 2:
        return float(x.mean()), float("nan")
    size = len(x) // b
    means = x[len(x) - b * size:].reshape(b, size).mean(axis=1)
    return float(x.mean()), float(means.std(ddof=1) / np.sqrt(b))


def sample_phi_connection(spin_stream, g: Graph, wt: WeightTable, rng: np.random.Generator, x: int,
                          batches: int = 50) -> FrequencyEstimate:
    """Frequency of ``x <-> U`` in edge configurations drawn given each spin sample."""
    if g.is_boundary[x]:
        hits = np.ones(sum(1 for _ in spin_stream))
    else:
        hits = np.array([boundary_connected(g, sample_edges_given_spins(s, g, wt, rng) == wt.k)[x]
                         for s in spin_stream], dtype=float)
    est, se = batch_means(hits, batches)
    return FrequencyEstimate(est, se, len(hits))


def run_chain(g: Graph, wt: WeightTable, x: int, sweeps: int, burnin: int, rng: np.random.Generator,
              thin: int = 10, init: str = "boundary") -> tuple[np.ndarray, np.ndarray]:
    """Probe spin and derived connection indicator at every ``thin``-th sweep after burn-in."""
    state = ChainState.start(g, wt, rng, probes=(x,), init=init)
    for _ in range(burnin):
        heat_bath_sweep(state, g, wt)
    spins, conns = [], []
    for i in range(1, sweeps + 1):
        heat_bath_sweep(state, g, wt)
        if i % thin == 0:
            s, c = observe(state, g, wt)
            spins.append(s[0])
            conns.append(c[0])
    return np.array(spins, dtype=np.int64), np.array(conns, dtype=bool)


def sample_chains(g: Graph, wt: WeightTable, chains: int, per_chain: int, burnin: int,
                  rng: np.random.Generator, thin: int = 10) -> tuple[np.ndarray, np.ndarray]:
    """Many independent chains advanced together; returns spin and edge samples.

    Chains start from independent uniform spins.  Output rows are ordered by
    sampling epoch, then chain.
    """
    sampler = GibbsSampler(g, wt.q, wt.beta)
    spins = np.zeros((chains, g.n_vertices), dtype=np.int64)
    spins[:, g.free_vertices] = rng.integers(0, wt.q, size=(chains, len(g.free_vertices)))
    for _ in range(burnin):
        sampler.sweep(spins, rng)
    out_s, out_w = [], []
    for _ in range(per_chain):
        for _ in range(thin):
            sampler.sweep(spins, rng)
        out_s.append(spins.copy())
        out_w.append(sample_edges_given_spins(spins, g, wt, rng))
    return np.concatenate(out_s), np.concatenate(out_w)


@dataclass
class ReplicaResult:
    replica: int
    delta: float
    delta_se: float
    connection: float
    connection_se: float
    runner_up: int  # the spin a != 0 most often seen at the probe
    converged: bool
    samples: int
    open_fraction: float
    hist: list

    @property
    def i15_flag(self) -> bool:
        return self.delta + 3 * self.delta_se >= self.connection - 3 * self.connection_se


@dataclass
class CoexistenceReport:
    q: int
    beta: float
    p: float
    n: int
    d: int
    replicas: list[ReplicaResult]
    delta: float
    delta_se: float
    connection: float
    connection_se: float

    @property
    def i15_flag(self) -> bool:
        return self.delta + 3 * self.delta_se >= self.connection - 3 * self.connection_se

    @property
    def delta_positive(self) -> bool:
        """``Delta > 0`` at one-sided 99% confidence."""
        return self.delta - Z99 * self.delta_se > 0

    @property
    def delta_null(self) -> bool:
        return abs(self.delta) <= 3 * self.delta_se

    @property
    def converged(self) -> bool:
        return all(r.converged for r in self.replicas)


def _split_agree(x, batches) -> bool:
    half = len(x) // 2
    m1, s1 = batch_means(x[:half], batches // 2)
    m2, s2 = batch_means(x[half:], batches // 2)
    if not (np.isfinite(s1) and np.isfinite(s2)):
        return True
    return abs(m1 - m2) <= 5 * np.hypot(s1, s2) + 1e-12


def _replica(index, seed_seq, q, wt, base, p, sweeps, burnin, thin, batches, init, J) -> ReplicaResult:
    rng = np.random.Generator(np.random.Philox(seed_seq))
    if J is None:
        J = sample_disorder(base, p, rng) if p < 1 else None
    g = base if J is None else apply_disorder(base, J)
    x = base.site_index((0,) * base.box[1])
    spins, conn = run_chain(g, wt, x, sweeps, burnin, rng, thin=thin, init=init)
    hist = np.bincount(spins, minlength=q)
    runner_up = int(np.argmax(hist[1:]) + 1)
    d_t = (spins == 0).astype(float) - (spins == runner_up)
    delta, delta_se = batch_means(d_t, batches)
    c, c_se = batch_means(conn, batches)
    return ReplicaResult(
        replica=index, delta=delta, delta_se=delta_se, connection=c, connection_se=c_se,
        runner_up=runner_up, converged=_split_agree(d_t, batches) and _split_agree(conn.astype(float), batches),
        samples=len(spins), open_fraction=1.0 if J is None else J.open_fraction, hist=hist.tolist(),
    )


def default_threads() -> int:
    env = os.environ.get("CLOCKRC_THREADS")
    return int(env) if env else (os.cpu_count() or 1)


def estimate_coexistence(q: int, beta: float, p: float, n: int, d: int, sweeps: int, burnin: int,
                         rng: np.random.Generator, J=None, quench_samples: int = 1, thin: int = 10,
                         batches: int = 50, init: str = "boundary", threads: int | None = None) -> CoexistenceReport:
    """Probe-site excess of spin 0 and connection frequency on ``Lambda_n`` with 0 boundary.

    With ``p < 1`` and no fixed ``J`` every replica draws its own disorder.
    Replica streams are spawned from ``rng`` up front, so results do not
    depend on ``threads``.
    """
    if not 0.0 < p <= 1.0:
        raise DomainError("p must lie in (0, 1]")
    if quench_samples < 1:
        raise DomainError("need at least one replica")
    if sweeps < thin * 2 * batches:
        raise DomainError(f"{sweeps} sweeps give fewer than {2 * batches} samples at thin={thin}")
    wt = build_weight_table(q, beta)
    base = build_box_graph(n, d)
    children = np.random.SeedSequence(int(rng.integers(2**63))).spawn(quench_samples)
    args = [(i, children[i], q, wt, base, p, sweeps, burnin, thin, batches, init, J)
            for i in range(quench_samples)]
    threads = threads or default_threads()
    if threads > 1 and quench_samples > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda a: _replica(*a), args))
    else:
        results = [_replica(*a) for a in args]
    results.sort(key=lambda r: r.replica)
    if len(results) == 1:
        r = results[0]
        agg = (r.delta, r.delta_se, r.connection, r.connection_se)
    else:
        dl = np.array([r.delta for r in results])
        cn = np.array([r.connection for r in results])
        m = len(results)
        agg = (float(dl.mean()), float(dl.std(ddof=1) / np.sqrt(m)),
               float(cn.mean()), float(cn.std(ddof=1) / np.sqrt(m)))
    return CoexistenceReport(q=q, beta=beta, p=p, n=n, d=d, replicas=results, delta=agg[0],
                             delta_se=agg[1], connection=agg[2], connection_se=agg[3])
