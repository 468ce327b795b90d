"""Canonical labelling by partition refinement and individualisation.

The canonical form of a graph is the lexicographically largest relabelled
adjacency (as a tuple of bitmask rows) over all leaves of the search tree
rooted at the equitable refinement of the degree partition.  Subtrees that
are images of already explored subtrees under a discovered automorphism are
skipped, so highly symmetric graphs stay cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence


@dataclass(frozen=True)
class CanonicalForm:
    n: int
    rows: tuple

    def graph6(self) -> str:
        from .graph import OrthoGraph
        return OrthoGraph(self.n, self.rows).to_graph6()


@dataclass
class Labelling:
    form: CanonicalForm
    order: list          # order[i] = original vertex placed at canonical position i
    generators: list     # automorphisms as lists, gen[v] = image of v

    def orbits(self, n: int) -> list[int]:
        """Orbit representative (smallest vertex) for every vertex."""
        return orbits_from_generators(n, self.generators)


def orbits_from_generators(n: int, generators: Sequence[Sequence[int]]) -> list[int]:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for g in generators:
        for v in range(n):
            a, b = find(v), find(g[v])
            if a != b:
                if a < b:
                    parent[b] = a
                else:
                    parent[a] = b
    return [find(v) for v in range(n)]


def refine(adj: Sequence[int], cells: list) -> list:
    """Coarsest equitable refinement of an ordered partition (lists of vertices)."""
    while True:
        masks = []
        for c in cells:
            m = 0
            for v in c:
                m |= 1 << v
            masks.append(m)
        out = []
        changed = False
        for c in cells:
            if len(c) == 1:
                out.append(c)
                continue
            groups: dict = {}
            for v in c:
                row = adj[v]
                key = tuple((row & m).bit_count() for m in masks)
                groups.setdefault(key, []).append(v)
            if len(groups) == 1:
                out.append(c)
                continue
            changed = True
            for key in sorted(groups):
                out.append(groups[key])
        cells = out
        if not changed:
            return cells


def _leaf_rows(adj: Sequence[int], order: list) -> tuple:
    pos = [0] * len(adj)
    for i, v in enumerate(order):
        pos[v] = i
    rows = []
    for v in order:
        r = 0
        m = adj[v]
        while m:
            low = m & -m
            r |= 1 << pos[low.bit_length() - 1]
            m ^= low
        rows.append(r)
    return tuple(rows)


def canonical_labelling(adj: Sequence[int], initial: list | None = None) -> Labelling:
    """Canonical labelling of a graph given as bitmask rows.

    ``initial`` is an optional ordered vertex partition (vertex colouring);
    isomorphisms are then required to preserve it.
    """
    n = len(adj)
    if n == 0:
        return Labelling(CanonicalForm(0, ()), [], [])
    if initial is None:
        by_deg: dict = {}
        for v in range(n):
            by_deg.setdefault(adj[v].bit_count(), []).append(v)
        cells = [by_deg[k] for k in sorted(by_deg)]
    else:
        cells = [list(c) for c in initial if c]
    leaves: dict = {}      # certificate -> (order, path)
    state = {"first": None, "best": None}
    generators: list = []

    def record(order, path, rows):
        if state["first"] is None:
            state["first"] = state["best"] = rows
            leaves[rows] = (order, path)
            return None
        if rows in leaves:
            other_order, other_path = leaves[rows]
            gamma = [0] * n
            for a, b in zip(other_order, order):
                gamma[a] = b
            if any(gamma[v] != v for v in range(n)):
                generators.append(gamma)
            level = 0
            while level < len(path) and path[level] == other_path[level]:
                level += 1
            return level
        if rows > state["best"]:
            state["best"] = rows
        leaves[rows] = (order, path)
        return None

    def search(cells, path):
        cells = refine(adj, cells)
        if len(cells) == n:
            order = [c[0] for c in cells]
            return record(order, path, _leaf_rows(adj, order))
        ti = next(i for i, c in enumerate(cells) if len(c) > 1)
        target = cells[ti]
        depth = len(path)
        explored: list = []
        for v in sorted(target):
            if explored:
                fixing = [g for g in generators if all(g[p] == p for p in path)]
                if fixing:
                    orb = orbits_from_generators(n, fixing)
                    if any(orb[v] == orb[w] for w in explored):
                        continue
            child = cells[:ti] + [[v], [u for u in target if u != v]] + cells[ti + 1:]
            jump = search(child, path + [v])
            explored.append(v)
            if jump is not None and jump < depth:
                return jump
        return None

    search(cells, [])
    best = state["best"]
    return Labelling(CanonicalForm(n, best), leaves[best][0], generators)


def canonical_form(g) -> CanonicalForm:
    """Canonical form of an OrthoGraph (or a sequence of adjacency rows)."""
    adj = g.adj if hasattr(g, "adj") else g
    return canonical_labelling(adj).form


def same_orbit(adj: Sequence[int], u: int, v: int) -> bool:
    """Whether some automorphism maps u to v."""
    if u == v:
        return True
    n = len(adj)
    rest_u = [w for w in range(n) if w != u]
    rest_v = [w for w in range(n) if w != v]
    return (canonical_labelling(adj, [[u], rest_u]).form
            == canonical_labelling(adj, [[v], rest_v]).form)
