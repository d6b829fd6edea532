"""Finite graphs with a boundary, diluted boxes of Z^d and connectivity queries.

Vertices are dense integers ``0..N-1``.  For box graphs the interior sites of
``[-n, n]^d`` come first in row-major order, followed by the outer boundary
sites in row-major order of the enclosing box ``[-n-1, n+1]^d``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numba
import numpy as np

from clockrc.errors import DomainError


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph ``(V, E)`` with a non-empty boundary ``U``.

    Edges are stored as sorted pairs ``(a, b)`` with ``a < b``.  Edges joining
    two boundary vertices are rejected.
    """

    n_vertices: int
    boundary: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    box: tuple[int, int] | None = None  # (n, d) for lattice boxes
    coords: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        n = int(self.n_vertices)
        if n < 1:
            raise DomainError("graph needs at least one vertex")
        bnd = tuple(sorted({int(u) for u in self.boundary}))
        if not bnd:
            raise DomainError("boundary U must be non-empty")
        if bnd[0] < 0 or bnd[-1] >= n:
            raise DomainError("boundary vertex out of range")
        norm = []
        for a, b in self.edges:
            a, b = int(a), int(b)
            if a == b:
                raise DomainError(f"loop at vertex {a}")
            if not (0 <= a < n and 0 <= b < n):
                raise DomainError(f"edge ({a}, {b}) out of range")
            norm.append((min(a, b), max(a, b)))
        if len(set(norm)) != len(norm):
            raise DomainError("duplicate edge")
        bset = set(bnd)
        for a, b in norm:
            if a in bset and b in bset:
                raise DomainError(f"edge ({a}, {b}) joins two boundary vertices")
        object.__setattr__(self, "n_vertices", n)
        object.__setattr__(self, "boundary", bnd)
        object.__setattr__(self, "edges", tuple(norm))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def edge_array(self) -> np.ndarray:
        arr = np.array(self.edges, dtype=np.int64).reshape(-1, 2)
        arr.setflags(write=False)
        return arr

    @cached_property
    def is_boundary(self) -> np.ndarray:
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[list(self.boundary)] = True
        mask.setflags(write=False)
        return mask

    @cached_property
    def free_vertices(self) -> np.ndarray:
        free = np.flatnonzero(~self.is_boundary)
        free.setflags(write=False)
        return free

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return tuple(tuple(sorted(nb)) for nb in adj)

    def site_index(self, site) -> int:
        """Vertex id of a lattice site given by its integer coordinates."""
        if self.coords is None:
            raise DomainError("graph carries no lattice coordinates")
        hit = np.flatnonzero((self.coords == np.asarray(site)).all(axis=1))
        if hit.size != 1:
            raise DomainError(f"site {tuple(site)} is not a vertex")
        return int(hit[0])

    def to_json(self) -> dict:
        out = {
            "vertices": self.n_vertices,
            "boundary": list(self.boundary),
            "edges": [list(e) for e in self.edges],
        }
        if self.box is not None:
            out["box"] = {"n": self.box[0], "d": self.box[1]}
            if self.coords is not None:
                out["box"]["coords"] = self.coords.tolist()
        return out

    @classmethod
    def from_json(cls, data: dict) -> Graph:
        box = data.get("box")
        coords = None
        if box is not None and "coords" in box:
            coords = np.asarray(box["coords"], dtype=np.int64)
        return cls(
            n_vertices=data["vertices"],
            boundary=tuple(data["boundary"]),
            edges=tuple(tuple(e) for e in data["edges"]),
            box=None if box is None else (int(box["n"]), int(box["d"])),
            coords=coords,
        )


@dataclass(frozen=True)
class Disorder:
    """Open/closed marking of the edges of an ambient graph (the couplings J)."""

    open: np.ndarray

    def __post_init__(self):
        arr = np.array(self.open, dtype=bool).ravel()
        arr.setflags(write=False)
        object.__setattr__(self, "open", arr)

    def __len__(self) -> int:
        return self.open.size

    @property
    def open_fraction(self) -> float:
        return float(self.open.mean()) if self.open.size else 0.0


def build_box_graph(n: int, d: int) -> Graph:
    """Box ``Lambda_n = [-n, n]^d`` together with its outer vertex boundary.

    Edges are all nearest-neighbour pairs with at least one endpoint in the box;
    the boundary ``U`` is the outer boundary, so no edge joins two of its sites.
    """
    if n < 1 or d < 1:
        raise DomainError("box needs n >= 1 and d >= 1")
    side = 2 * n + 1
    interior = np.array(list(itertools.product(range(-n, n + 1), repeat=d)), dtype=np.int64)
    outer = []
    for site in itertools.product(range(-n - 1, n + 2), repeat=d):
        ext = [abs(c) == n + 1 for c in site]
        if sum(ext) == 1:
            outer.append(site)
    outer = np.array(outer, dtype=np.int64).reshape(-1, d)
    coords = np.vstack([interior, outer])

    # interior ids are row-major in the box; boundary ids via a lookup table
    def interior_id(site):
        idx = 0
        for c in site:
            idx = idx * side + (c + n)
        return idx

    outer_id = {tuple(s): len(interior) + i for i, s in enumerate(outer.tolist())}
    edges = []
    for i, site in enumerate(interior.tolist()):
        for axis in range(d):
            nb = list(site)
            nb[axis] += 1
            if abs(nb[axis]) <= n:
                edges.append((i, interior_id(nb)))
            else:
                edges.append((i, outer_id[tuple(nb)]))
            if site[axis] == -n:
                nb = list(site)
                nb[axis] -= 1
                edges.append((outer_id[tuple(nb)], i))
    coords.setflags(write=False)
    return Graph(
        n_vertices=len(coords),
        boundary=tuple(range(len(interior), len(coords))),
        edges=tuple(sorted((min(a, b), max(a, b)) for a, b in edges)),
        box=(n, d),
        coords=coords,
    )


def apply_disorder(g: Graph, J: Disorder) -> Graph:
    """Keep exactly the edges of ``g`` that ``J`` marks open."""
    if len(J) != g.n_edges:
        raise DomainError(f"disorder covers {len(J)} edges, graph has {g.n_edges}")
    kept = tuple(e for e, is_open in zip(g.edges, J.open) if is_open)
    return Graph(g.n_vertices, g.boundary, kept, box=g.box, coords=g.coords)


def identify_boundary(g: Graph) -> Graph:
    """Collapse all of ``U`` into one vertex ``u*``; parallel edges are merged.

    Free vertices keep their relative order as ids ``0..m-1`` and ``u*`` gets
    id ``m``.  Must be applied before edge levels are assigned, since merged
    edges keep no record of their multiplicity.
    """
    if len(g.boundary) == 1:
        return g
    free = g.free_vertices
    relabel = np.full(g.n_vertices, len(free), dtype=np.int64)
    relabel[free] = np.arange(len(free))
    edges = {tuple(sorted((int(relabel[a]), int(relabel[b])))) for a, b in g.edges}
    return Graph(len(free) + 1, (len(free),), tuple(sorted(edges)))


class UnionFind:
    """Disjoint sets with path compression and union by size."""

    def __init__(self, size: int):
        self.parent = list(range(size))
        self.size = [1] * size

    def find(self, a: int) -> int:
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return ra

    def connected(self, a: int, b: int) -> bool:
        return self.find(a) == self.find(b)


def open_mask(omega, top: int | None = None) -> np.ndarray:
    """Boolean per-edge openness of a disorder, a bool array, or a level array.

    For level arrays an edge is open iff it sits at the top level ``top``.
    """
    if isinstance(omega, Disorder):
        return omega.open
    arr = np.asarray(omega)
    if arr.dtype == bool:
        return arr
    if top is None:
        raise DomainError("level configurations need the top level index")
    return arr == top


def connected_to_boundary(g: Graph, omega, x: int, top: int | None = None) -> bool:
    """Whether ``x`` reaches ``U`` through open edges of ``omega``."""
    if not 0 <= x < g.n_vertices:
        raise DomainError(f"vertex {x} not in graph")
    if g.is_boundary[x]:
        return True
    mask = open_mask(omega, top)
    if mask.size != g.n_edges:
        raise DomainError("edge configuration does not match the graph")
    uf = UnionFind(g.n_vertices)
    for (a, b), is_open in zip(g.edges, mask):
        if is_open:
            uf.union(a, b)
    root = uf.find(x)
    return any(uf.find(u) == root for u in g.boundary)


@numba.njit(cache=True)
def _cluster_roots(n_vertices, edges, mask):
    parent = np.arange(n_vertices)
    size = np.ones(n_vertices, dtype=np.int64)
    for i in range(edges.shape[0]):
        if not mask[i]:
            continue
        a = edges[i, 0]
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        b = edges[i, 1]
        while parent[b] != b:
            parent[b] = parent[parent[b]]
            b = parent[b]
        if a == b:
            continue
        if size[a] < size[b]:
            a, b = b, a
        parent[b] = a
        size[a] += size[b]
    for v in range(n_vertices):
        r = v
        while parent[r] != r:
            r = parent[r]
        parent[v] = r
    return parent


def cluster_roots(n_vertices: int, edges: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Root label of every vertex's open cluster (compiled union-find)."""
    return _cluster_roots(
        int(n_vertices),
        np.ascontiguousarray(edges, dtype=np.int64).reshape(-1, 2),
        np.ascontiguousarray(mask, dtype=np.bool_),
    )


def boundary_connected(g: Graph, mask: np.ndarray) -> np.ndarray:
    """Per-vertex flag: connected to ``U`` through open edges in ``mask``."""
    roots = cluster_roots(g.n_vertices, g.edge_array, mask)
    hit = np.zeros(g.n_vertices, dtype=bool)
    hit[roots[list(g.boundary)]] = True
    return hit[roots]


def load_graphs(path) -> list[Graph]:
    """Read a JSON manifest holding a list of graphs (or ``{"graphs": [...]}``)."""
    data = json.loads(Path(path).read_text())
    if isinstance(data, dict):
        data = data["graphs"]
    return [Graph.from_json(item) for item in data]
