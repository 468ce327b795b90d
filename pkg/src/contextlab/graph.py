"""Orthogonality graphs: construction, chromatic number, cliques, KS assignments.

Graphs are stored as tuples of adjacency bitmasks (bit j of ``adj[i]`` set iff
i ~ j), capped at 64 vertices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .linalg import Ray, RaySet, is_orthogonal

MAX_VERTICES = 64


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def popcount(mask: int) -> int:
    return bin(mask).count("1")


@dataclass(frozen=True)
class OrthoGraph:
    n: int
    adj: tuple
    rays: RaySet | None = field(default=None, compare=False)
    labels: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        if not 0 <= self.n <= MAX_VERTICES:
            raise ValueError(f"vertex count {self.n} outside 0..{MAX_VERTICES}")
        adj = tuple(self.adj)
        if len(adj) != self.n:
            raise ValueError("adjacency length differs from n")
        for i, row in enumerate(adj):
            if row >> i & 1:
                raise ValueError(f"self-loop at {i}")
            if row >> self.n:
                raise ValueError(f"row {i} references vertices beyond n")
            for j in _bits(row):
                if not adj[j] >> i & 1:
                    raise ValueError(f"asymmetric adjacency between {i} and {j}")
        object.__setattr__(self, "adj", adj)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], labels=None) -> "OrthoGraph":
        rows = [0] * n
        for a, b in edges:
            if a == b:
                raise ValueError(f"self-loop at {a}")
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"edge ({a}, {b}) outside 0..{n - 1}")
            rows[a] |= 1 << b
            rows[b] |= 1 << a
        return cls(n, tuple(rows), labels=tuple(labels) if labels else None)

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.adj[i] >> j & 1)

    def neighbors(self, i: int) -> list[int]:
        return list(_bits(self.adj[i]))

    def degree(self, i: int) -> int:
        return popcount(self.adj[i])

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n) for j in _bits(self.adj[i] >> (i + 1) << (i + 1))]

    @property
    def num_edges(self) -> int:
        return sum(popcount(r) for r in self.adj) // 2

    def label(self, i: int) -> str:
        if self.labels:
            return self.labels[i]
        if self.rays is not None:
            return self.rays.label(i)
        return str(i)

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        seen = frontier = 1
        while frontier:
            nxt = 0
            for v in _bits(frontier):
                nxt |= self.adj[v]
            frontier = nxt & ~seen
            seen |= frontier
        return seen == (1 << self.n) - 1

    def relabel(self, perm: Sequence[int]) -> "OrthoGraph":
        """Graph with vertex ``v`` renamed to ``perm[v]``."""
        rows = [0] * self.n
        for v in range(self.n):
            m = 0
            for u in _bits(self.adj[v]):
                m |= 1 << perm[u]
            rows[perm[v]] = m
        return OrthoGraph(self.n, tuple(rows))

    def induced(self, vertices: Sequence[int]) -> "OrthoGraph":
        index = {v: k for k, v in enumerate(vertices)}
        edges = [(index[a], index[b]) for a, b in self.edges() if a in index and b in index]
        labels = [self.label(v) for v in vertices] if (self.labels or self.rays) else None
        return OrthoGraph.from_edges(len(vertices), edges, labels)

    def to_graph6(self) -> str:
        return to_graph6(self)

    @classmethod
    def from_graph6(cls, text: str) -> "OrthoGraph":
        return from_graph6(text)


def complete_graph(n: int) -> OrthoGraph:
    return OrthoGraph.from_edges(n, itertools.combinations(range(n), 2))


def cycle_graph(n: int) -> OrthoGraph:
    return OrthoGraph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def path_graph(n: int) -> OrthoGraph:
    return OrthoGraph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def build_orthogonality_graph(rays: RaySet, tol: float = 1e-9) -> OrthoGraph:
    if len(rays) == 0:
        raise ValueError("empty ray set")
    if len(rays) > MAX_VERTICES:
        raise ValueError(f"at most {MAX_VERTICES} rays supported")
    for i, a in enumerate(rays.rays):
        if a in rays.rays[:i]:
            raise ValueError(f"duplicate ray {a}")
    edges = [(i, j) for i, j in itertools.combinations(range(len(rays)), 2)
             if is_orthogonal(rays[i], rays[j], tol)]
    g = OrthoGraph.from_edges(len(rays), edges)
    return OrthoGraph(g.n, g.adj, rays=rays)


# --- graph6 ------------------------------------------------------------------

def to_graph6(g: OrthoGraph) -> str:
    n = g.n
    if n > 62:
        raise ValueError("graph6 encoding here supports at most 62 vertices")
    bits = [g.has_edge(i, j) for j in range(1, n) for i in range(j)]
    bits += [False] * (-len(bits) % 6)
    out = [chr(63 + n)]
    for k in range(0, len(bits), 6):
        v = 0
        for b in bits[k:k + 6]:
            v = (v << 1) | b
        out.append(chr(63 + v))
    return "".join(out)


def from_graph6(text: str) -> OrthoGraph:
    s = text.strip()
    if s.startswith(">>graph6<<"):
        s = s[10:]
    if not s or any(not 63 <= ord(c) <= 126 for c in s):
        raise ValueError(f"malformed graph6 string {text!r}")
    n = ord(s[0]) - 63
    if n == 63:
        raise ValueError("graph6 strings with more than 62 vertices are not supported")
    data = [ord(c) - 63 for c in s[1:]]
    need = (n * (n - 1) // 2 + 5) // 6
    if len(data) != need:
        raise ValueError(f"graph6 body has {len(data)} bytes, expected {need}")
    bits = [(x >> (5 - k)) & 1 for x in data for k in range(6)]
    edges = []
    pos = 0
    for j in range(1, n):
        for i in range(j):
            if bits[pos]:
                edges.append((i, j))
            pos += 1
    return OrthoGraph.from_edges(n, edges)


# --- colorings ---------------------------------------------------------------

@dataclass(frozen=True)
class Coloring:
    colors: tuple
    k: int

    def is_proper(self, g: OrthoGraph) -> bool:
        if len(self.colors) != g.n or any(not 0 <= c < self.k for c in self.colors):
            return False
        return all(self.colors[a] != self.colors[b] for a, b in g.edges())


@dataclass(frozen=True)
class ChromaticCertificate:
    chi: int
    coloring: Coloring
    clique: tuple
    exhaustive: bool

    def verify(self, g: OrthoGraph) -> bool:
        """Re-check the upper-bound witness and, when present, the clique witness."""
        if not self.coloring.is_proper(g) or len(set(self.coloring.colors)) != self.chi:
            return False
        if self.exhaustive:
            return True
        return len(self.clique) == self.chi and all(
            g.has_edge(a, b) for a, b in itertools.combinations(self.clique, 2))

    def to_json(self) -> dict:
        return {"chi": self.chi, "coloring": list(self.coloring.colors),
                "clique": list(self.clique),
                "lower_bound": "exhaustive" if self.exhaustive else "clique"}


def greedy_clique(g: OrthoGraph) -> list[int]:
    """Largest clique found by greedy growth from every start vertex."""
    best: list[int] = []
    for start in range(g.n):
        clique = [start]
        cand = g.adj[start]
        while cand:
            v = max(_bits(cand), key=lambda u: (popcount(g.adj[u] & cand), -u))
            clique.append(v)
            cand &= g.adj[v]
        if len(clique) > len(best):
            best = clique
    return sorted(best)


def dsatur_coloring(g: OrthoGraph) -> list[int]:
    colors = [-1] * g.n
    for _ in range(g.n):
        v = _dsatur_pick(g, colors)
        used = {colors[u] for u in _bits(g.adj[v]) if colors[u] >= 0}
        c = 0
        while c in used:
            c += 1
        colors[v] = c
    return colors


def _dsatur_pick(g: OrthoGraph, colors: list[int]) -> int:
    best, best_key = -1, None
    for v in range(g.n):
        if colors[v] >= 0:
            continue
        sat = len({colors[u] for u in _bits(g.adj[v]) if colors[u] >= 0})
        key = (sat, popcount(g.adj[v]))
        # strict comparison keeps the lowest index on ties
        if best_key is None or key > best_key:
            best, best_key = v, key
    return best


def k_coloring(g: OrthoGraph, k: int, order_hint: Sequence[int] = ()) -> list[int] | None:
    """A proper k-coloring by DSATUR-ordered backtracking, or None if none exists."""
    if k <= 0:
        return None if g.n else []
    colors = [-1] * g.n
    # vertices of a precolored clique get fixed colors, which breaks color symmetry
    for c, v in enumerate(order_hint[:k]):
        colors[v] = c

    def solve(remaining: int) -> bool:
        if remaining == 0:
            return True
        v = _dsatur_pick(g, colors)
        used = {colors[u] for u in _bits(g.adj[v]) if colors[u] >= 0}
        top = max(colors) + 1
        for c in range(min(k, top + 1)):
            if c in used:
                continue
            colors[v] = c
            if solve(remaining - 1):
                return True
        colors[v] = -1
        return False

    fixed = sum(1 for c in colors if c >= 0)
    if any(colors[a] >= 0 and colors[a] == colors[b] for a, b in g.edges()):
        return None
    return colors if solve(g.n - fixed) else None


def chromatic_number(g: OrthoGraph) -> ChromaticCertificate:
    """Exact chromatic number with a coloring witness and a lower-bound witness."""
    if g.n == 0:
        raise ValueError("empty graph")
    clique = greedy_clique(g)
    best = dsatur_coloring(g)
    upper = max(best) + 1
    lower = len(clique)
    k = upper - 1
    while k >= lower:
        found = k_coloring(g, k, clique)
        if found is None:
            break
        best, upper = found, max(found) + 1
        k = upper - 1
    exhaustive = upper > len(clique)
    return ChromaticCertificate(upper, Coloring(tuple(best), upper), tuple(clique), exhaustive)


def is_square_free(g: OrthoGraph) -> bool:
    """True iff no four vertices a, b, c, d carry edges ab, bc, cd, da."""
    for a in range(g.n):
        for b in range(a + 1, g.n):
            if popcount(g.adj[a] & g.adj[b]) >= 2:
                return False
    return True


def max_cliques(g: OrthoGraph) -> list[frozenset]:
    """All maximal cliques (Bron-Kerbosch with Tomita pivoting)."""
    out: list[frozenset] = []

    def expand(r: list[int], p: int, x: int) -> None:
        if not p and not x:
            out.append(frozenset(r))
            return
        pivot = max(_bits(p | x), key=lambda u: popcount(g.adj[u] & p))
        for v in _bits(p & ~g.adj[pivot]):
            expand(r + [v], p & g.adj[v], x & g.adj[v])
            p &= ~(1 << v)
            x |= 1 << v

    if g.n:
        expand([], (1 << g.n) - 1, 0)
    return sorted(out, key=lambda c: sorted(c))


def cliques_of_size(g: OrthoGraph, k: int) -> list[tuple]:
    out = []

    def grow(clique: list[int], cand: int) -> None:
        if len(clique) == k:
            out.append(tuple(clique))
            return
        for v in _bits(cand):
            grow(clique + [v], cand & g.adj[v] & ~((1 << (v + 1)) - 1))

    grow([], (1 << g.n) - 1)
    return out


@dataclass(frozen=True)
class KSAssignment:
    green: frozenset
    d: int

    def verify(self, g: OrthoGraph) -> bool:
        for a, b in g.edges():
            if a in self.green and b in self.green:
                return False
        return all(sum(v in self.green for v in c) == 1 for c in cliques_of_size(g, self.d))


def ks_colorable(g: OrthoGraph, d: int) -> KSAssignment | None:
    """Green set with exactly one green per d-clique and no adjacent greens.

    Returns None when no such assignment exists, i.e. the rays form a KS set.
    """
    bases = cliques_of_size(g, d)
    containing = [[] for _ in range(g.n)]
    for idx, c in enumerate(bases):
        for v in c:
            containing[v].append(idx)
    state = [0] * g.n  # 0 undecided, 1 green, -1 red
    order = sorted(range(len(bases)), key=lambda i: bases[i])

    def consistent(v: int) -> bool:
        if state[v] == 1 and any(state[u] == 1 for u in _bits(g.adj[v])):
            return False
        for idx in containing[v]:
            vals = [state[u] for u in bases[idx]]
            if vals.count(1) > 1 or vals.count(-1) == d:
                return False
        return True

    def solve(pos: int) -> bool:
        while pos < len(order) and any(state[u] == 1 for u in bases[order[pos]]):
            pos += 1
        if pos == len(order):
            return True
        basis = bases[order[pos]]
        for v in basis:
            if state[v] != 0:
                continue
            trail = [v]
            state[v] = 1
            ok = consistent(v)
            if ok:
                # the other members of this basis are forced red
                for u in basis:
                    if state[u] == 0:
                        state[u] = -1
                        trail.append(u)
                        if not consistent(u):
                            ok = False
                            break
            if ok and solve(pos + 1):
                return True
            for u in trail:
                state[u] = 0
        return False

    if not solve(0):
        return None
    return KSAssignment(frozenset(v for v in range(g.n) if state[v] == 1), d)


# --- fixtures ----------------------------------------------------------------

def fixture_s3() -> RaySet:
    """The 13 rays (0,0,1), (0,1,+-1), (1,1,+-1) and their coordinate permutations."""
    seeds = [(0, 0, 1), (0, 1, 1), (0, 1, -1), (1, 1, 1), (1, 1, -1)]
    rays: list[Ray] = []
    for s in seeds:
        for p in itertools.permutations(s):
            r = Ray(p)
            if r not in rays:
                rays.append(r)
    rays.sort(key=lambda r: (sum(1 for c in r.rep if c), [-c.re for c in r.rep]))
    return RaySet(3, rays)


def fixture_s3_plus(j: int) -> RaySet:
    """S_3 embedded in the first three coordinates plus the j coordinate rays e_4..e_{3+j}."""
    if j < 0:
        raise ValueError("j must be >= 0")
    if j == 0:
        return fixture_s3()
    d = 3 + j
    rays = [Ray(tuple(r.rep.components) + (0,) * j) for r in fixture_s3()]
    for k in range(3, d):
        unit = [0] * d
        unit[k] = 1
        rays.append(Ray(tuple(unit)))
    return RaySet(d, rays)
