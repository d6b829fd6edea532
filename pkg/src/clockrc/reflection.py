"""Constructive injection from spins pinned to ``a`` at ``x`` into spins pinned to 0.

The map reflects spins across the line at angle ``a/2`` (``R b = a - b``) on
the smallest vertex set ``A`` that contains ``x`` and is closed under "a
neighbour whose edge would become incompatible after the reflection".  All
comparisons of weights are integer comparisons of levels.

Anchors with index ``a > q/2`` are handled by a global negation of spins,
which maps them to the anchor ``q - a`` in ``(0, pi]``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from clockrc.clock import WeightTable, enumerate_spins, pair_class
from clockrc.cluster import is_compatible, level_caps
from clockrc.errors import DomainError, InvariantViolation
from clockrc.lattice import Graph


class Hemisphere(enum.Enum):
    HEM0 = "Hem(0)"
    HEMA = "Hem(a)"
    ON_LINE = "line"


def reflect(b, a, q: int):
    r = np.mod(np.subtract(a, b), q)
    return int(r) if np.ndim(r) == 0 else r


def _hem_code(b, a, q):
    return np.mod(2 * np.asarray(b) - a, 2 * q)


def hemisphere(b: int, a: int, q: int) -> Hemisphere:
    """Side of the reflection line on which spin ``b`` lies (exact integer test)."""
    if a % q == 0:
        raise DomainError("the reflection line is undefined for anchor 0")
    m = int(_hem_code(b, a, q))
    if m == 0 or m == q:
        return Hemisphere.ON_LINE
    return Hemisphere.HEMA if m < q else Hemisphere.HEM0


def _reduce_anchor(a: int, q: int) -> tuple[int, bool]:
    return (q - a, True) if 2 * a > q else (a, False)


@dataclass
class InjectionTrace:
    """Growth of the reflection set for one configuration.

    ``layers[n]`` is ``A_n``; when ``negated`` is set the layers were grown for
    the negated configuration and the reduced anchor ``anchor_used``.
    """

    anchor: int
    x: int
    y: int
    sigma: np.ndarray
    omega: np.ndarray
    anchor_used: int
    negated: bool
    reduced: np.ndarray | None = None  # sigma in the frame of anchor_used
    layers: list[frozenset] = field(default_factory=list)
    image: np.ndarray | None = None

    @property
    def A(self) -> frozenset:
        return self.layers[-1]

    def hemisphere_ok(self, q: int) -> bool:
        """Every vertex of ``A`` other than ``x`` carries a spin strictly in ``Hem(a)``."""
        return all(hemisphere(int(self.reduced[u]), self.anchor_used, q) is Hemisphere.HEMA
                   for u in self.A if u != self.x)

    def to_json(self) -> dict:
        return {
            "anchor": self.anchor, "x": self.x, "y": self.y,
            "anchor_used": self.anchor_used, "negated": self.negated,
            "sigma": self.sigma.tolist(), "omega": self.omega.tolist(),
            "layers": [sorted(layer) for layer in self.layers],
            "image": None if self.image is None else self.image.tolist(),
        }


def _check_domain(sigma, omega, x, a, g: Graph, wt: WeightTable):
    if len(g.boundary) != 1:
        raise DomainError("identify the boundary to a single vertex first")
    y = g.boundary[0]
    if x == y:
        raise DomainError("x must be a free vertex")
    if a % wt.q == 0:
        raise DomainError("anchor spin must be non-zero")
    sigma = np.asarray(sigma, dtype=np.int64)
    omega = np.asarray(omega, dtype=np.int64)
    if sigma[y] != 0 or sigma[x] != a or not is_compatible(omega, sigma, g, wt):
        raise DomainError("sigma is not in L_omega(a): needs sigma_y = 0, sigma_x = a and compatibility")
    return sigma, omega, y


def build_incompatibility_set(sigma, omega, x: int, a: int, g: Graph, wt: WeightTable) -> InjectionTrace:
    sigma, omega, y = _check_domain(sigma, omega, x, a, g, wt)
    q, k = wt.q, wt.k
    a_used, negated = _reduce_anchor(a, q)
    s = np.mod(-sigma, q) if negated else sigma
    trace = InjectionTrace(anchor=a, x=x, y=y, sigma=sigma, omega=omega,
                           anchor_used=a_used, negated=negated, reduced=s)
    current = frozenset([x])
    trace.layers.append(current)
    while True:
        grown = set(current)
        for e, (u, v) in enumerate(g.edges):
            for inner, outer in ((u, v), (v, u)):
                if inner in current and outer not in current:
                    # W(sigma_outer - R sigma_inner) < omega_e, as levels
                    level = k - pair_class(s[outer], reflect(s[inner], a_used, q), q)
                    if level < omega[e]:
                        grown.add(outer)
        if len(grown) == len(current):
            break
        current = frozenset(grown)
        trace.layers.append(current)
    return trace


def phi_map(sigma, omega, x: int, a: int, g: Graph, wt: WeightTable, trace: InjectionTrace | None = None):
    """Image of ``sigma`` under the injection; raises if the boundary vertex would be reflected."""
    trace = trace or build_incompatibility_set(sigma, omega, x, a, g, wt)
    if trace.y in trace.A:
        raise InvariantViolation(f"boundary vertex reached by the reflection set: {trace.to_json()}")
    q = wt.q
    s = trace.reduced.copy()
    idx = sorted(trace.A)
    s[idx] = reflect(s[idx], trace.anchor_used, q)
    image = np.mod(-s, q) if trace.negated else s
    trace.image = image
    return image


def phi_map_batch(sigmas: np.ndarray, omegas: np.ndarray, x: int, a: int, g: Graph, wt: WeightTable):
    """Vectorised ``phi_map`` over paired rows ``(omegas[p], sigmas[p])``.

    Returns ``(images, in_A, hemisphere_ok)``.  Inputs are assumed to lie in
    ``L_omega(a)``; no domain checks are made.
    """
    q, k = wt.q, wt.k
    a_used, negated = _reduce_anchor(a, q)
    s = np.mod(-sigmas, q) if negated else sigmas
    rs = reflect(s, a_used, q)
    e = g.edge_array
    u, v = e[:, 0], e[:, 1]
    grow_to_u = (k - pair_class(s[:, u], rs[:, v], q)) < omegas
    grow_to_v = (k - pair_class(s[:, v], rs[:, u], q)) < omegas
    in_A = np.zeros(s.shape, dtype=bool)
    in_A[:, x] = True
    while True:
        nxt = in_A.copy()
        for j in range(len(u)):
            nxt[:, u[j]] |= in_A[:, v[j]] & grow_to_u[:, j]
            nxt[:, v[j]] |= in_A[:, u[j]] & grow_to_v[:, j]
        if np.array_equal(nxt, in_A):
            break
        in_A = nxt
    images = np.where(in_A, rs, s)
    if negated:
        images = np.mod(-images, q)
    code = _hem_code(s, a_used, q)
    in_hem_a = (code > 0) & (code < q)
    others = in_A.copy()
    others[:, x] = False
    hem_ok = np.all(in_hem_a | ~others, axis=1)
    return images, in_A, hem_ok


@dataclass
class InjectionSweep:
    """Outcome of running the injection over every ``(omega, a)`` for one ``x``."""

    x: int
    pairs: int = 0
    not_injective: int = 0
    image_outside: int = 0
    boundary_hits: int = 0
    hemisphere_failures: int = 0
    lemma_disagreements: int = 0
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (self.not_injective == 0 and self.image_outside == 0 and self.boundary_hits == 0
                and self.hemisphere_failures == 0 and self.lemma_disagreements == 0)


def sweep_injection(g: Graph, wt: WeightTable, x: int, omegas=None, anchors=None,
                    spins=None, keep_failures: int = 5) -> InjectionSweep:
    """Check injectivity, image membership and ``y not in A`` for all ``(omega, a)``.

    Also checks, for every ``omega``, that an injective map implies the
    counting inequality computed independently by direct counting.
    """
    from clockrc.oracle import enumerate_levels

    if len(g.boundary) != 1:
        raise DomainError("identify the boundary to a single vertex first")
    y = g.boundary[0]
    q = wt.q
    spins = enumerate_spins(g, q) if spins is None else spins
    omegas = enumerate_levels(g.n_edges, wt.k) if omegas is None else np.atleast_2d(omegas)
    anchors = range(1, q) if anchors is None else anchors
    caps = level_caps(spins, g, wt)
    compat = np.all(omegas[:, None, :] <= caps[None, :, :], axis=2)
    report = InjectionSweep(x=x)
    zero_counts = (compat & (spins[:, x] == 0)[None, :]).sum(axis=1)
    for a in anchors:
        mask = compat & (spins[:, x] == a)[None, :]
        w_idx, s_idx = np.nonzero(mask)
        report.pairs += len(w_idx)
        a_counts = mask.sum(axis=1)
        injective_per_w = np.ones(len(omegas), dtype=bool)
        if len(w_idx):
            images, in_A, hem_ok = phi_map_batch(spins[s_idx], omegas[w_idx], x, a, g, wt)
            img_caps = level_caps(images, g, wt)
            inside = (np.all(omegas[w_idx] <= img_caps, axis=1)
                      & (images[:, x] == 0) & (images[:, y] == 0))
            keyed = np.column_stack([w_idx, images])
            _, first, multiplicity = np.unique(keyed, axis=0, return_index=True, return_counts=True)
            dup_rows = np.setdiff1d(np.arange(len(w_idx)), first)
            injective_per_w[w_idx[dup_rows]] = False
            report.not_injective += int((multiplicity - 1).sum())
            report.image_outside += int((~inside).sum())
            report.boundary_hits += int(in_A[:, y].sum())
            report.hemisphere_failures += int((~hem_ok).sum())
            bad = np.flatnonzero(~inside | in_A[:, y] | ~hem_ok)
            for p in bad[:max(0, keep_failures - len(report.failures))]:
                report.failures.append(_failure_dump(spins[s_idx[p]], omegas[w_idx[p]], x, a, g, wt))
        implied = a_counts <= zero_counts
        report.lemma_disagreements += int(np.sum(injective_per_w & ~implied))
    return report


def _failure_dump(sigma, omega, x, a, g, wt) -> dict:
    trace = build_incompatibility_set(sigma, omega, x, a, g, wt)
    out = trace.to_json()
    out["q"] = wt.q
    out["graph"] = g.to_json()
    return out


def verify_injection(omega, x: int, a: int, g: Graph, wt: WeightTable) -> bool:
    """Injectivity of the map on ``L_omega(a)`` with image inside ``L_omega(0)``."""
    if a % wt.q == 0:
        return True
    rep = sweep_injection(g, wt, x, omegas=np.asarray(omega)[None, :], anchors=[a % wt.q])
    return rep.passed
