"""Isomorph-free generation of connected square-free graphs.

Graphs grow one vertex at a time.  A new vertex may only be joined to a set
of old vertices no two of which share a neighbour (otherwise a 4-cycle
appears through the new vertex), so every partial graph stays square-free.

Duplicates are removed by canonical augmentation: the parent of a graph H is
H minus a distinguished non-cut vertex m(H), and a child is kept only when
the vertex just added lies in the automorphism orbit of m(H).  Children of a
single parent are deduplicated by orbits of the parent's automorphism group
acting on neighbourhood sets.  No global seen-set is kept.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Callable, Iterator

from .canon import canonical_labelling, orbits_from_generators
from .graph import OrthoGraph, chromatic_number, is_square_free, k_coloring, dsatur_coloring

MAX_N = 14


@dataclass
class GenTask:
    n_max: int
    filters: list = field(default_factory=list)
    n_min: int = 1

    def __post_init__(self):
        if not 1 <= self.n_max <= MAX_N:
            raise ValueError(f"n_max must be in 1..{MAX_N}")


def _connected_without(adj: list, n: int, skip: int) -> bool:
    full = ((1 << n) - 1) & ~(1 << skip)
    if not full:
        return True
    start = full & -full
    seen = frontier = start
    while frontier:
        nxt = 0
        m = frontier
        while m:
            low = m & -m
            nxt |= adj[low.bit_length() - 1]
            m ^= low
        frontier = nxt & full & ~seen
        seen |= frontier
    return seen == full


def _neighbourhoods(adj: list, n: int) -> Iterator[int]:
    """Nonempty vertex sets with pairwise no common neighbour."""
    conflict = []
    for a in range(n):
        m = 0
        nb = adj[a]
        while nb:
            low = nb & -nb
            m |= adj[low.bit_length() - 1]
            nb ^= low
        conflict.append(m & ~(1 << a))

    stack = [(0, 0, 0)]  # (next vertex, chosen set, forbidden set)
    while stack:
        start, chosen, forbidden = stack.pop()
        for v in range(n - 1, start - 1, -1):
            if forbidden >> v & 1:
                continue
            s = chosen | (1 << v)
            yield s
            stack.append((v + 1, s, forbidden | conflict[v]))


def _set_orbit(s: int, generators: list, n: int) -> set:
    orbit = {s}
    todo = [s]
    while todo:
        x = todo.pop()
        for g in generators:
            y = 0
            m = x
            while m:
                low = m & -m
                y |= 1 << g[low.bit_length() - 1]
                m ^= low
            if y not in orbit:
                orbit.add(y)
                todo.append(y)
    return orbit


def _accept(adj: list, n: int) -> bool:
    """Whether the last vertex of ``adj`` (n vertices) is in the orbit of m(H).

    m(H): among non-cut vertices minimising (degree, neighbour-degree sum),
    the one placed last by the canonical labelling.
    """
    v = n - 1
    deg = [r.bit_count() for r in adj]
    keys = []
    for u in range(n):
        s = 0
        m = adj[u]
        while m:
            low = m & -m
            s += deg[low.bit_length() - 1]
            m ^= low
        keys.append((deg[u], s))
    kv = keys[v]
    ties = []
    for u in range(n - 1):
        ku = keys[u]
        if ku < kv:
            if deg[u] == 1 or _connected_without(adj, n, u):
                return False
        elif ku == kv and (deg[u] == 1 or _connected_without(adj, n, u)):
            ties.append(u)
    if not ties:
        return True
    lab = canonical_labelling(adj)
    pos = {x: i for i, x in enumerate(lab.order)}
    w = max(ties + [v], key=pos.__getitem__)
    if w == v:
        return True
    orb = orbits_from_generators(n, lab.generators)
    return orb[v] == orb[w]


def _children(adj: list, n: int) -> Iterator[list]:
    lab = canonical_labelling(adj) if n > 1 else None
    gens = lab.generators if lab else []
    seen: set = set()
    for s in _neighbourhoods(adj, n):
        if s in seen:
            continue
        child = [row | ((s >> i & 1) << n) for i, row in enumerate(adj)]
        child.append(s)
        if not _accept(child, n + 1):
            continue
        if gens:
            seen |= _set_orbit(s, gens, n)
        yield child


def enumerate_connected_square_free(task: GenTask) -> Iterator[OrthoGraph]:
    """Each connected square-free graph with n_min..n_max vertices, once up to isomorphism.

    Order is deterministic: depth-first over the augmentation tree.
    """
    def walk(adj: list, n: int) -> Iterator[OrthoGraph]:
        if n >= task.n_min:
            g = OrthoGraph(n, tuple(adj))
            if all(f(g) for f in task.filters):
                yield g
        if n < task.n_max:
            for child in _children(adj, n):
                yield from walk(child, n + 1)

    yield from walk([0], 1)


def count_by_order(n_max: int) -> dict[int, int]:
    counts = {n: 0 for n in range(1, n_max + 1)}
    for g in enumerate_connected_square_free(GenTask(n_max)):
        counts[g.n] += 1
    return counts


def chi_exceeds(d: int) -> Callable[[OrthoGraph], bool]:
    """Filter for chi(G) > d; cheap greedy colouring first, exact search only on survivors."""
    def check(g: OrthoGraph) -> bool:
        if g.n <= d:
            return False
        if max(dsatur_coloring(g)) + 1 <= d:
            return False
        return k_coloring(g, d) is None
    return check


def find_sic_candidates(n_max: int, d: int = 3) -> list[OrthoGraph]:
    if d < 3:
        raise ValueError("d must be >= 3")
    task = GenTask(n_max, [chi_exceeds(d)])
    return [canonical_graph(g) for g in enumerate_connected_square_free(task)]


def canonical_graph(g: OrthoGraph) -> OrthoGraph:
    form = canonical_labelling(g.adj).form
    return OrthoGraph(form.n, form.rows)


def subgraph_contains(g: OrthoGraph, h: OrthoGraph) -> bool:
    """Whether h is isomorphic to a (not necessarily induced) subgraph of g."""
    return find_subgraph(g, h) is not None


def find_subgraph(g: OrthoGraph, h: OrthoGraph) -> list[int] | None:
    """Injective map from V(h) to V(g) preserving edges of h, or None."""
    if h.n > g.n or h.num_edges > g.num_edges:
        return None
    order = sorted(range(h.n), key=lambda v: -h.degree(v))
    # visit h vertices so that each one after the first touches an earlier one when possible
    placed = [order[0]] if order else []
    rest = order[1:]
    while rest:
        nxt = max(rest, key=lambda v: (sum(h.has_edge(v, p) for p in placed), h.degree(v)))
        placed.append(nxt)
        rest.remove(nxt)
    gdeg = [g.degree(v) for v in range(g.n)]
    image = [-1] * h.n
    used = 0

    def extend(k: int) -> bool:
        nonlocal used
        if k == len(placed):
            return True
        hv = placed[k]
        need = 0
        for p in placed[:k]:
            if h.has_edge(hv, p):
                need |= 1 << image[p]
        for gv in range(g.n):
            if used >> gv & 1 or gdeg[gv] < h.degree(hv):
                continue
            if g.adj[gv] & need != need:
                continue
            image[hv] = gv
            used |= 1 << gv
            if extend(k + 1):
                return True
            used &= ~(1 << gv)
        image[hv] = -1
        return False

    return list(image) if extend(0) else None


@dataclass
class EnumerationSummary:
    n: int
    counted: dict
    candidates: list
    wall_time_s: float

    def to_json(self) -> dict:
        return {"n": self.n, "counted": {str(k): v for k, v in self.counted.items()},
                "candidates": self.candidates, "wall_time_s": round(self.wall_time_s, 3)}


def run_enumeration(n_max: int, d: int | None = None, sink: Callable[[OrthoGraph], None] | None = None,
                    ) -> EnumerationSummary:
    """Enumerate, count per order, and collect graphs with chi > d when ``d`` is given."""
    t0 = time.perf_counter()
    counts = {n: 0 for n in range(1, n_max + 1)}
    check = chi_exceeds(d) if d is not None else None
    cands = []
    for g in enumerate_connected_square_free(GenTask(n_max)):
        counts[g.n] += 1
        if sink is not None:
            sink(g)
        if check is not None and check(g):
            cands.append(canonical_graph(g).to_graph6())
    return EnumerationSummary(n_max, counts, cands, time.perf_counter() - t0)
