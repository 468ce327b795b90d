"""Nonlocal game and Bell expression built from a ray set with chi(G_C) > d.

Rays are referred to by index into ``GameSpec.rays`` (the input set C followed
by the completion rays C').  Each party gets one basis per round and answers
with one ray of that basis.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .graph import (OrthoGraph, build_orthogonality_graph, chromatic_number, k_coloring,
                    max_cliques)
from .linalg import (EXACT, Ray, RaySet, complete_to_basis, is_orthogonal)
from .quantum import Observable, joint_distribution, supersinglet

DEFAULT_SEARCH_CAP = 10 ** 8


@dataclass
class GameSpec:
    d: int
    rays: list                  # C followed by C'
    n_base: int                 # rays[:n_base] is C
    bases: list                 # tuples of ray indices, sorted
    canonical_completion: bool = False

    @property
    def base_rays(self) -> list:
        return self.rays[:self.n_base]

    @property
    def completion_rays(self) -> list:
        return self.rays[self.n_base:]

    @property
    def n_parties(self) -> int:
        return self.d

    def ray_label(self, i: int) -> str:
        return str(self.rays[i])

    def basis_graph(self) -> OrthoGraph:
        """Rays of C and C' joined when they share a basis or are orthogonal rays of C."""
        edges = set()
        for b in self.bases:
            edges.update(itertools.combinations(sorted(b), 2))
        for i, j in itertools.combinations(range(self.n_base), 2):
            if is_orthogonal(self.rays[i], self.rays[j]):
                edges.add((i, j))
        return OrthoGraph.from_edges(len(self.rays), sorted(edges))

    def observables(self) -> list:
        return [Observable.from_basis([self.rays[i] for i in b], labels=list(b)) for b in self.bases]

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "mode": self.rays[0].mode if self.rays else EXACT,
            "rays": [{"ray": str(r), "in_C": i < self.n_base} for i, r in enumerate(self.rays)],
            "bases": [[str(self.rays[i]) for i in b] for b in self.bases],
            "canonical_completion": self.canonical_completion,
        }

    @classmethod
    def from_json(cls, data: dict) -> "GameSpec":
        from .linalg import parse_scalar, KVector
        rays, n_base = [], 0
        mode = data.get("mode", EXACT)
        for entry in data["rays"]:
            comps = entry["ray"].strip("()").split(",")
            rays.append(Ray(KVector(tuple(parse_scalar(c, mode) for c in comps), mode)))
            n_base += bool(entry["in_C"])
        index = {str(r): i for i, r in enumerate(rays)}
        bases = [tuple(sorted(index[s] for s in b)) for b in data["bases"]]
        return cls(int(data["d"]), rays, n_base, bases, bool(data.get("canonical_completion")))


def _find(rays: list, r: Ray) -> int:
    for i, x in enumerate(rays):
        if x == r:
            return i
    return -1


def build_game(c: RaySet, d: int) -> GameSpec:
    """Bases from every maximal orthogonal subset of C with two or more rays, completed."""
    if c.dim != d or any(r.dim != d for r in c):
        raise ValueError(f"all rays must have dimension {d}")
    rays = list(c.rays)
    n_base = len(rays)
    g = build_orthogonality_graph(c)
    bases = []
    flagged = False
    for clique in max_cliques(g):
        if len(clique) < 2:
            continue
        members = sorted(clique)
        basis = complete_to_basis([rays[i] for i in members], d)
        flagged |= basis.canonical_completion
        idx = []
        for r in basis.members:
            k = _find(rays, r)
            if k < 0:
                rays.append(r)
                k = len(rays) - 1
            idx.append(k)
        key = tuple(sorted(idx))
        if key not in bases:
            bases.append(key)
    bases.sort()
    return GameSpec(d, rays, n_base, bases, flagged)


# --- referee -----------------------------------------------------------------

@dataclass(frozen=True)
class Verdict:
    win: bool
    rule: str | None = None     # "i" or "ii" on a loss

    def __bool__(self):
        return self.win


def referee_check(question: Sequence[int], answers: Sequence[int], spec: GameSpec) -> Verdict:
    """Rule (i): no two players answer the same ray.  Rule (ii): when all players
    but one share a basis and answer distinct rays of it, the remaining player,
    if asked a basis containing the leftover ray, must answer that ray."""
    d = spec.d
    if len(question) != d or len(answers) != d:
        raise ValueError(f"need {d} questions and {d} answers")
    for q, a in zip(question, answers):
        if not 0 <= q < len(spec.bases):
            raise ValueError(f"no basis with index {q}")
        if a not in spec.bases[q]:
            raise ValueError(f"answer {a} is not in basis {q}")
    if len(set(answers)) < d:
        return Verdict(False, "i")
    for r in range(d):
        others = [p for p in range(d) if p != r]
        b = question[others[0]]
        if any(question[p] != b for p in others):
            continue
        leftover = set(spec.bases[b]) - {answers[p] for p in others}
        (v,) = leftover
        if v in spec.bases[question[r]] and answers[r] != v:
            return Verdict(False, "ii")
    return Verdict(True)


class _FastReferee:
    """Precomputed referee for exhaustive scans."""

    def __init__(self, spec: GameSpec):
        self.spec = spec
        self.sets = [frozenset(b) for b in spec.bases]

    def loses(self, question, answers) -> str | None:
        d = self.spec.d
        if len(set(answers)) < d:
            return "i"
        for r in range(d):
            b = None
            ok = True
            for p in range(d):
                if p == r:
                    continue
                if b is None:
                    b = question[p]
                elif question[p] != b:
                    ok = False
                    break
            if not ok:
                continue
            used = {answers[p] for p in range(d) if p != r}
            (v,) = self.sets[b] - used
            if v in self.sets[question[r]] and answers[r] != v:
                return "ii"
        return None


@dataclass
class ClassicalStrategy:
    """answers[p][k] = ray index answered by party p when asked basis k."""
    answers: list

    @classmethod
    def from_coloring(cls, spec: GameSpec, colors: Sequence[int]) -> "ClassicalStrategy":
        out = []
        for p in range(spec.d):
            row = []
            for b in spec.bases:
                hits = [i for i in b if colors[i] == p]
                if len(hits) != 1:
                    raise ValueError("coloring is not proper on the bases")
                row.append(hits[0])
            out.append(row)
        return cls(out)

    @classmethod
    def random(cls, spec: GameSpec, rng: np.random.Generator) -> "ClassicalStrategy":
        return cls([[int(b[rng.integers(len(b))]) for b in spec.bases] for _ in range(spec.d)])

    def answer(self, question: Sequence[int]) -> tuple:
        return tuple(self.answers[p][q] for p, q in enumerate(question))

    def validate(self, spec: GameSpec) -> None:
        if len(self.answers) != spec.d or any(len(r) != len(spec.bases) for r in self.answers):
            raise ValueError("strategy must give one answer per party and basis")
        for row in self.answers:
            for k, a in enumerate(row):
                if a not in spec.bases[k]:
                    raise ValueError(f"answer {a} not in basis {k}")


def all_questions(spec: GameSpec):
    return itertools.product(range(len(spec.bases)), repeat=spec.d)


def losing_questions(spec: GameSpec, strategy: ClassicalStrategy, limit: int | None = None) -> list:
    """Exhaustive scan of every question tuple; returns (question, rule) for each loss."""
    strategy.validate(spec)
    ref = _FastReferee(spec)
    out = []
    for q in all_questions(spec):
        rule = ref.loses(q, strategy.answer(q))
        if rule:
            out.append((q, rule))
            if limit and len(out) >= limit:
                break
    return out


def quantum_loss_mass(spec: GameSpec) -> float:
    """Largest total probability assigned to losing answers, over every question."""
    state = supersinglet(spec.d)
    obs = spec.observables()
    ref = _FastReferee(spec)
    worst = 0.0
    for q in all_questions(spec):
        probs = joint_distribution(state, [obs[k] for k in q])
        mass = 0.0
        for idx in itertools.product(range(spec.d), repeat=spec.d):
            p = probs[idx]
            if p < 1e-300:
                continue
            answers = tuple(spec.bases[k][i] for k, i in zip(q, idx))
            if ref.loses(q, answers):
                mass += p
        worst = max(worst, mass)
    return worst


@dataclass
class GameStats:
    rounds: int
    wins: int
    losses: dict

    @property
    def total_losses(self) -> int:
        return sum(self.losses.values())

    def to_json(self) -> dict:
        return {"rounds": self.rounds, "wins": self.wins, "losses": self.losses}


def simulate_game(spec: GameSpec, strategy: ClassicalStrategy | str, rounds: int, seed: int = 0) -> GameStats:
    """Referee rounds with uniformly random questions.

    ``strategy="quantum"``: each round the players share a fresh supersinglet and
    measure the observable of their basis.  Round k draws from the generator
    seeded by (seed, k), so results do not depend on evaluation order.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    quantum = strategy == "quantum"
    if not quantum:
        strategy.validate(spec)
    ref = _FastReferee(spec)
    nb = len(spec.bases)
    state = supersinglet(spec.d) if quantum else None
    obs = spec.observables() if quantum else None
    cache: dict = {}
    losses = {"i": 0, "ii": 0}
    for k in range(rounds):
        rng = np.random.default_rng([seed, k])
        q = tuple(int(x) for x in rng.integers(nb, size=spec.d))
        if quantum:
            if q not in cache:
                probs = joint_distribution(state, [obs[b] for b in q]).reshape(-1)
                cache[q] = probs / probs.sum()
            flat = int(rng.choice(spec.d ** spec.d, p=cache[q]))
            idx = np.unravel_index(flat, (spec.d,) * spec.d)
            answers = tuple(spec.bases[b][i] for b, i in zip(q, idx))
        else:
            answers = strategy.answer(q)
        rule = ref.loses(q, answers)
        if rule:
            losses[rule] += 1
    return GameStats(rounds, rounds - sum(losses.values()), losses)


# --- Bell expression -----------------------------------------------------------

@dataclass(frozen=True)
class Term:
    """One probability that quantum mechanics sets to zero.

    kind "i":  party p on basis b and party q on basis b2 both output ray v.
    kind "ii": party p on basis b2 outputs something other than v while every
               other party, on basis b, outputs a distinct ray of b other than v.
    """
    kind: str
    v: int
    p: int
    b: int
    b2: int
    q: int = -1

    def key(self):
        if self.kind == "i":
            return ("i", self.v, frozenset({(self.p, self.b), (self.q, self.b2)}))
        return ("ii", self.v, self.p, self.b, self.b2)

    def settings(self, d: int) -> list:
        """Basis index per party (None where the term does not involve the party)."""
        s = [None] * d
        if self.kind == "i":
            s[self.p], s[self.q] = self.b, self.b2
        else:
            s = [self.b] * d
            s[self.p] = self.b2
        return s

    def describe(self, spec: GameSpec) -> str:
        v = spec.ray_label(self.v)
        if self.kind == "i":
            return f"P({v},{v} | O{self.p}=B{self.b}, O{self.q}=B{self.b2})"
        return f"P(!={v} at {self.p}; others distinct !={v} | O{self.p}=B{self.b2}, rest=B{self.b})"


@dataclass
class BellExpression:
    spec: GameSpec
    terms: list
    raw_count: int
    counts: dict = field(default_factory=dict)

    @property
    def omega_qm(self) -> int:
        return len(self.terms)

    def to_json(self) -> dict:
        return {"omega_qm": self.omega_qm, "raw_count": self.raw_count, "counts": self.counts,
                "terms": [t.describe(self.spec) for t in self.terms]}


def build_bell_expression(spec: GameSpec) -> BellExpression:
    """All zero-probability constraints of the game, deduplicated.

    Pairs of observables sharing a ray include a basis paired with itself, which
    encodes "all players asked the same basis answer different rays".
    """
    d = spec.d
    nb = len(spec.bases)
    seen: dict = {}
    raw = 0
    counts = {"i_cross": 0, "i_same": 0, "ii_cross": 0, "ii_same": 0}
    for b, b2 in itertools.product(range(nb), repeat=2):
        shared = sorted(set(spec.bases[b]) & set(spec.bases[b2]))
        for v in shared:
            for p, q in itertools.permutations(range(d), 2):
                raw += 1
                t = Term("i", v, p, b, b2, q)
                if t.key() not in seen:
                    seen[t.key()] = t
                    counts["i_same" if b == b2 else "i_cross"] += 1
            for p in range(d):
                raw += 1
                t = Term("ii", v, p, b, b2)
                if t.key() not in seen:
                    seen[t.key()] = t
                    counts["ii_same" if b == b2 else "ii_cross"] += 1
    return BellExpression(spec, list(seen.values()), raw, counts)


def _term_probability_quantum(t: Term, spec: GameSpec, state, obs) -> float:
    d = spec.d
    settings = t.settings(d)
    if t.kind == "i":
        full = [obs[s] if s is not None else obs[t.b] for s in settings]
        probs = joint_distribution(state, full)
        idx = [slice(None)] * d
        idx[t.p] = spec.bases[t.b].index(t.v)
        idx[t.q] = spec.bases[t.b2].index(t.v)
        return float(probs[tuple(idx)].sum())
    probs = joint_distribution(state, [obs[s] for s in settings])
    rest = [x for x in spec.bases[t.b] if x != t.v]
    others = [k for k in range(d) if k != t.p]
    total = 0.0
    for perm in itertools.permutations(rest):
        idx = [0] * d
        for k, x in zip(others, perm):
            idx[k] = spec.bases[t.b].index(x)
        for j, x in enumerate(spec.bases[t.b2]):
            if x == t.v:
                continue
            idx[t.p] = j
            total += probs[tuple(idx)]
    return float(total)


def _term_probability_classical(t: Term, spec: GameSpec, s: ClassicalStrategy) -> int:
    a = s.answers
    if t.kind == "i":
        return int(a[t.p][t.b] == t.v and a[t.q][t.b2] == t.v)
    if a[t.p][t.b2] == t.v:
        return 0
    outs = [a[k][t.b] for k in range(spec.d) if k != t.p]
    return int(len(set(outs)) == len(outs) and t.v not in outs)


def term_probabilities(expr: BellExpression, strategy) -> list:
    spec = expr.spec
    if strategy == "quantum":
        state = supersinglet(spec.d)
        obs = spec.observables()
        return [_term_probability_quantum(t, spec, state, obs) for t in expr.terms]
    strategy.validate(spec)
    return [_term_probability_classical(t, spec, strategy) for t in expr.terms]


def evaluate_bell(expr: BellExpression, strategy) -> float:
    """Sum over terms of (1 - P)."""
    return float(sum(1 - p for p in term_probabilities(expr, strategy)))


@dataclass
class LHVCertificate:
    attains_max: bool
    coloring: list | None
    chi_base: int
    chi_certificate: dict

    def to_json(self) -> dict:
        return {"lhv_attains_max": self.attains_max, "coloring": self.coloring,
                "chi_G_C": self.chi_base, "certificate": self.chi_certificate}


def lhv_attains_max(spec: GameSpec) -> LHVCertificate:
    """A deterministic strategy reaches the algebraic maximum iff the rays of the
    game admit a proper d-colouring in which every basis is rainbow."""
    base = build_orthogonality_graph(RaySet(spec.d, spec.base_rays, mode=spec.base_rays[0].mode))
    cert = chromatic_number(base)
    if cert.chi > spec.d:
        return LHVCertificate(False, None, cert.chi, cert.to_json())
    colors = k_coloring(spec.basis_graph(), spec.d)
    if colors is None:
        full = chromatic_number(spec.basis_graph())
        return LHVCertificate(False, None, cert.chi, full.to_json())
    return LHVCertificate(True, colors, cert.chi, cert.to_json())


def _strategies_for_party(spec: GameSpec):
    return itertools.product(*spec.bases)


def lhv_bound_exact(expr: BellExpression, cap: int = DEFAULT_SEARCH_CAP) -> int | None:
    """Exact maximum over deterministic strategies, or None when the space exceeds ``cap``.

    The last party is optimised basis by basis: every term reads at most one of
    its answers, so only the other parties' strategies are enumerated.
    """
    spec = expr.spec
    d, nb = spec.d, len(spec.bases)
    if not expr.terms:
        return 0
    space = math.prod(len(b) for b in spec.bases) ** d
    if space > cap:
        return None
    last = d - 1
    # bucket terms by which answer of the last party they read
    by_basis: dict = {k: [] for k in range(nb)}
    fixed_terms = []
    for t in expr.terms:
        settings = t.settings(d)
        if settings[last] is None:
            fixed_terms.append(t)
        else:
            by_basis[settings[last]].append(t)
    best = -1
    per_party = list(_strategies_for_party(spec))
    for combo in itertools.product(per_party, repeat=d - 1):
        answers = [list(c) for c in combo] + [[b[0] for b in spec.bases]]
        s = ClassicalStrategy(answers)
        score = sum(1 - _term_probability_classical(t, spec, s) for t in fixed_terms)
        for k in range(nb):
            top = -1
            for a in spec.bases[k]:
                answers[last][k] = a
                val = sum(1 - _term_probability_classical(t, spec, s) for t in by_basis[k])
                top = max(top, val)
            answers[last][k] = spec.bases[k][0]
            score += top
        best = max(best, score)
    return best


def lhv_bound_brute_force(expr: BellExpression) -> int:
    """Plain maximum over every deterministic strategy of every party."""
    spec = expr.spec
    per_party = list(_strategies_for_party(spec))
    best = 0
    for combo in itertools.product(per_party, repeat=spec.d):
        s = ClassicalStrategy([list(c) for c in combo])
        best = max(best, int(evaluate_bell(expr, s)))
    return best


def search_classical(spec: GameSpec, n_random: int = 1000, seed: int = 0, sweeps: int = 3
                     ) -> tuple[ClassicalStrategy, int]:
    """Best strategy (fewest losing questions) from random sampling plus greedy
    single-answer improvement."""
    rng = np.random.default_rng(seed)
    ref = _FastReferee(spec)
    questions = list(all_questions(spec))

    def n_losses(s: ClassicalStrategy) -> int:
        return sum(1 for q in questions if ref.loses(q, s.answer(q)))

    best, best_loss = None, None
    for _ in range(n_random):
        s = ClassicalStrategy.random(spec, rng)
        loss = n_losses(s)
        if best_loss is None or loss < best_loss:
            best, best_loss = s, loss
    for _ in range(sweeps):
        improved = False
        for p in range(spec.d):
            for k, b in enumerate(spec.bases):
                for a in b:
                    if a == best.answers[p][k]:
                        continue
                    old = best.answers[p][k]
                    best.answers[p][k] = a
                    loss = n_losses(best)
                    if loss < best_loss:
                        best_loss, improved = loss, True
                    else:
                        best.answers[p][k] = old
        if not improved:
            break
    return best, best_loss


@dataclass
class BoundReport:
    omega_qm: int
    raw_count: int
    qm_value: float
    lhv_attains_max: bool
    lhv_bound: int | None
    lhv_upper: int
    method: str
    certificate: dict
    flags: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"omega_qm": self.omega_qm, "raw_count": self.raw_count, "qm_value": self.qm_value,
                "lhv_attains_max": self.lhv_attains_max, "lhv_bound": self.lhv_bound,
                "lhv_upper": self.lhv_upper, "method": self.method,
                "certificate": self.certificate, "flags": self.flags}


def bound_report(expr: BellExpression, cap: int = DEFAULT_SEARCH_CAP) -> BoundReport:
    spec = expr.spec
    qm = evaluate_bell(expr, "quantum")
    cert = lhv_attains_max(spec)
    exact = lhv_bound_exact(expr, cap)
    if exact is not None:
        method, upper = "exhaustive", exact
    else:
        method = "coloring-certificate"
        upper = expr.omega_qm if cert.attains_max else expr.omega_qm - 1
    flags = ["canonical-completion-dependent"] if spec.canonical_completion else []
    return BoundReport(expr.omega_qm, expr.raw_count, qm, cert.attains_max, exact, upper,
                       method, cert.to_json(), flags)
