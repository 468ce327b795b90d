"""Orthogonal representations: numeric search, verification, and the exact
refutation for the 10-vertex letter graph.

A faithful representation assigns unit vectors to vertices so that adjacent
vertices get orthogonal vectors, non-adjacent ones do not, and all rays are
distinct.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .graph import OrthoGraph
from .linalg import FLOAT, KVector, Ray, RaySet

APPENDIX_LABELS = ("AB", "AC", "AD", "BF", "BH", "CG", "DE", "EF", "EG", "GH")

DEFAULT_TOL_ORTH = 1e-7
DEFAULT_TOL_SEP = 1e-3
DEFAULT_RESTARTS = 200
DEFAULT_MAX_STEPS = 5000
STALL_WINDOW = 250
STALL_RATIO = 0.9
POLISH_TARGET = 1e-26     # sum of squared edge overlaps after polishing


def appendix_subgraph() -> OrthoGraph:
    """Ten rays named by letter pairs; two are adjacent iff they share a letter."""
    edges = [(i, j) for i, j in itertools.combinations(range(len(APPENDIX_LABELS)), 2)
             if set(APPENDIX_LABELS[i]) & set(APPENDIX_LABELS[j])]
    return OrthoGraph.from_edges(len(APPENDIX_LABELS), edges, APPENDIX_LABELS)


@dataclass
class RepProblem:
    graph: OrthoGraph
    d: int
    tol_orth: float = DEFAULT_TOL_ORTH
    tol_sep: float = DEFAULT_TOL_SEP

    def __post_init__(self):
        if not (0 < self.tol_orth < self.tol_sep < 1):
            raise ValueError("need 0 < tol_orth < tol_sep < 1")
        if self.d < 2:
            raise ValueError("d must be >= 2")


@dataclass
class RepResult:
    status: str                 # "found" | "not_found_after_restarts"
    rays: RaySet | None
    residual: float
    restarts_used: int
    field: str = "real"
    max_edge_overlap: float = math.nan

    @property
    def found(self) -> bool:
        return self.status == "found"


class _Penalty:
    """Squared edge overlaps plus squared hinges on non-edge overlap and ray distance."""

    def __init__(self, g: OrthoGraph, tol_sep: float):
        n = g.n
        self.edge = np.zeros((n, n), dtype=bool)
        for a, b in g.edges():
            self.edge[a, b] = self.edge[b, a] = True
        self.nonedge = ~self.edge & ~np.eye(n, dtype=bool)
        self.tau = tol_sep
        self.iu = np.triu_indices(n, 1)

    def value_grad(self, v: np.ndarray, want_grad: bool = True):
        gram = v @ v.conj().T
        a = np.abs(gram) ** 2
        tau = self.tau
        r = np.sqrt(a)
        dist = np.sqrt(np.clip(1.0 - a, 0.0, None))
        h1 = np.where(self.nonedge, np.clip(tau - r, 0.0, None), 0.0)
        h2 = np.where(self.nonedge, np.clip(tau - dist, 0.0, None), 0.0)
        terms = np.where(self.edge, a, 0.0) + h1 ** 2 + h2 ** 2
        value = float(terms[self.iu].sum())
        if not want_grad:
            return value, None
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(self.edge, 1.0, 0.0)
            w = w - np.where(h1 > 0, h1 / np.maximum(r, 1e-300), 0.0)
            w = w + np.where(h2 > 0, h2 / np.maximum(dist, 1e-300), 0.0)
        grad = 2.0 * (w * gram) @ v
        return value, grad

    def edge_overlaps(self, v: np.ndarray) -> np.ndarray:
        gram = v @ v.conj().T
        return np.abs(gram[self.edge])


def _normalize(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _descend(pen: _Penalty, v: np.ndarray, max_steps: int, target: float) -> tuple[np.ndarray, float]:
    value, grad = pen.value_grad(v)
    step = 1.0
    checkpoint = value
    for it in range(max_steps):
        if value < target:
            break
        if it and it % STALL_WINDOW == 0:
            # converging runs shrink by orders of magnitude per window; stalled ones do not
            if value > STALL_RATIO * checkpoint:
                break
            checkpoint = value
        # project the gradient onto the tangent space of each unit sphere
        radial = np.sum((grad * v.conj()).real, axis=1, keepdims=True)
        tangent = grad - radial * v
        gnorm2 = float(np.sum(np.abs(tangent) ** 2))
        if gnorm2 < 1e-32:
            break
        while True:
            cand = _normalize(v - step * tangent)
            new_value, _ = pen.value_grad(cand, want_grad=False)
            if new_value <= value - 1e-4 * step * gnorm2 or step < 1e-14:
                break
            step *= 0.5
        if new_value >= value:
            break
        v = cand
        value, grad = pen.value_grad(v)
        step = min(step * 2.0, 10.0)
    return v, value


def _random_start(rng: np.random.Generator, n: int, d: int, complex_field: bool) -> np.ndarray:
    v = rng.standard_normal((n, d))
    if complex_field:
        v = v + 1j * rng.standard_normal((n, d))
    return _normalize(v)


def numeric_represent(p: RepProblem, restarts: int = DEFAULT_RESTARTS, seed: int = 0,
                      max_steps: int = DEFAULT_MAX_STEPS, fields: Sequence[str] = ("real", "complex"),
                      ) -> RepResult:
    """Projected gradient descent over unit vectors with random restarts.

    Real vectors are tried first; complex ones only if every real restart fails.
    The first restart whose vectors pass ``verify_representation`` wins.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    g = p.graph
    pen = _Penalty(g, p.tol_sep)
    m = max(g.num_edges, 1)
    target = 0.1 * m * p.tol_orth ** 2
    best = math.inf
    used = 0
    for fld in fields:
        rng = np.random.default_rng([seed, 0 if fld == "real" else 1])
        for k in range(restarts):
            used += 1
            v = _random_start(rng, g.n, p.d, fld == "complex")
            v, value = _descend(pen, v, max_steps, target)
            best = min(best, value)
            if value >= m * p.tol_orth ** 2:
                continue
            try:
                rays = _to_rayset(v)
            except ValueError:
                continue
            if verify_representation(rays, g, p.tol_orth, p.tol_sep):
                # drive edge overlaps well below tol_orth before reporting
                pv, pvalue = _descend(pen, v, max_steps, POLISH_TARGET)
                if pvalue < value and verify_representation(_to_rayset(pv), g, p.tol_orth, p.tol_sep):
                    v, value, rays = pv, pvalue, _to_rayset(pv)
                overlaps = pen.edge_overlaps(v)
                return RepResult("found", rays, value, used, fld,
                                 float(overlaps.max()) if overlaps.size else 0.0)
    return RepResult("not_found_after_restarts", None, best, used)


def _to_rayset(v: np.ndarray) -> RaySet:
    rays = [Ray(KVector(tuple(complex(x) for x in row), FLOAT)) for row in v]
    return RaySet(v.shape[1], rays, mode=FLOAT)


def verify_representation(rays: RaySet, g: OrthoGraph, tol_orth: float = DEFAULT_TOL_ORTH,
                          tol_sep: float = DEFAULT_TOL_SEP) -> bool:
    """Both directions of faithfulness plus pairwise distinctness, on normalised overlaps."""
    if len(rays) != g.n:
        raise ValueError(f"{len(rays)} rays for {g.n} vertices")
    vecs = []
    for r in rays:
        c = r.rep.to_complex()
        norm = math.sqrt(sum(abs(x) ** 2 for x in c))
        vecs.append([x / norm for x in c])
    for i in range(g.n):
        for j in range(i + 1, g.n):
            ov = abs(sum(a.conjugate() * b for a, b in zip(vecs[i], vecs[j])))
            if g.has_edge(i, j):
                if ov >= tol_orth:
                    return False
            else:
                if ov < tol_sep:
                    return False
                if math.sqrt(max(0.0, 1.0 - ov * ov)) < tol_sep:
                    return False
    return True


# --- exact refutation ---------------------------------------------------------

class Poly:
    """Sparse multivariate polynomial with Fraction coefficients.

    Monomials are exponent tuples over a fixed variable list.
    """

    VARS = ("c1", "s1", "c2", "s2", "c3", "s3")

    def __init__(self, terms: dict | None = None):
        self.terms = {m: Fraction(c) for m, c in (terms or {}).items() if c}

    @classmethod
    def const(cls, c) -> "Poly":
        return cls({(0,) * len(cls.VARS): Fraction(c)})

    @classmethod
    def var(cls, name: str) -> "Poly":
        e = [0] * len(cls.VARS)
        e[cls.VARS.index(name)] = 1
        return cls({tuple(e): Fraction(1)})

    @staticmethod
    def _lift(x) -> "Poly":
        return x if isinstance(x, Poly) else Poly.const(x)

    def __add__(self, other):
        out = dict(self.terms)
        for m, c in Poly._lift(other).terms.items():
            out[m] = out.get(m, 0) + c
        return Poly(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-Poly._lift(other))

    def __rsub__(self, other):
        return Poly._lift(other) - self

    def __mul__(self, other):
        o = Poly._lift(other)
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in o.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                out[m] = out.get(m, 0) + c1 * c2
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = Poly.const(1)
        for _ in range(k):
            out = out * self
        return out

    def is_zero(self) -> bool:
        return not self.terms

    def degrees(self) -> list[int]:
        return [max((m[i] for m in self.terms), default=0) for i in range(len(self.VARS))]

    def __call__(self, point: dict) -> Fraction:
        vals = [Fraction(point[v]) for v in self.VARS]
        total = Fraction(0)
        for m, c in self.terms.items():
            t = c
            for x, e in zip(vals, m):
                if e:
                    t *= x ** e
            total += t
        return total

    def reduce_pythagorean(self) -> "Poly":
        """Normal form modulo c_i^2 + s_i^2 - 1 (rewrite s_i^2 -> 1 - c_i^2)."""
        p = self
        for k in range(0, len(self.VARS), 2):
            ci, si = k, k + 1
            changed = True
            while changed:
                changed = False
                out: dict = {}
                for m, c in p.terms.items():
                    if m[si] >= 2:
                        changed = True
                        base = list(m)
                        base[si] -= 2
                        b1 = tuple(base)
                        base[ci] += 2
                        b2 = tuple(base)
                        out[b1] = out.get(b1, 0) + c
                        out[b2] = out.get(b2, 0) - c
                    else:
                        out[m] = out.get(m, 0) + c
                p = Poly(out)
        return p

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, c in sorted(self.terms.items(), reverse=True):
            mono = "*".join(f"{v}^{e}" if e > 1 else v for v, e in zip(self.VARS, m) if e)
            parts.append(f"{c}*{mono}" if mono else str(c))
        return " + ".join(parts)


def _pcross(u, v):
    return (u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0])


def _pdot(u, v):
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


def _proportional_mod_pythagorean(u, v) -> bool:
    """u and v agree up to a sign-free scalar: all 2x2 minors vanish modulo c^2+s^2=1."""
    return all(m.reduce_pythagorean().is_zero() for m in _pcross(u, v))


def half_angle(t: Fraction) -> tuple[Fraction, Fraction]:
    """Rational point (cos, sin) on the unit circle from a tangent half-angle."""
    t = Fraction(t)
    return (1 - t * t) / (1 + t * t), 2 * t / (1 + t * t)


def _point(ts: Sequence) -> dict:
    pt = {}
    for i, t in enumerate(ts, 1):
        c, s = half_angle(t)
        pt[f"c{i}"], pt[f"s{i}"] = c, s
    return pt


def _eval_vec(vec, point) -> tuple:
    return tuple(x(point) for x in vec)


def _frac(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass
class RefutationReport:
    status: str
    checks: list = field(default_factory=list)
    sample_points: list = field(default_factory=list)
    identity: str = ""
    degenerate_cases: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def to_json(self) -> dict:
        return {"status": self.status, "passed": self.passed, "identity": self.identity,
                "checks": self.checks, "sample_points": self.sample_points,
                "degenerate_cases": self.degenerate_cases}


def refute_appendix_subgraph(n_samples: int = 8, seed: int = 0) -> RefutationReport:
    """Exact derivation that the letter graph has no faithful real representation in dim 3.

    Fix AB, AC, AD to the coordinate axes; BF, BH, CG, DE are then one-angle
    families.  GH and EF follow by cross products, and EG is obtained twice:
    from {CG, GH} and from {DE, EF}.  The minors Y, Z of those two candidates
    satisfy c1^2 c2^2 c3^2 (s2^2 + s3^2) = c3 s3 Y + c2 s2 Z, so proportional
    candidates force s2^2 = -s3^2 unless c1 c2 c3 = 0; every branch makes two
    of the ten rays coincide.
    """
    c1, s1, c2, s2, c3, s3 = (Poly.var(v) for v in Poly.VARS)
    zero, one = Poly.const(0), Poly.const(1)
    v_ab, v_ac, v_ad = (one, zero, zero), (zero, one, zero), (zero, zero, one)
    v_bf = (zero, c1, s1)
    v_bh = (zero, s1, -c1)
    v_cg = (c2, zero, s2)
    v_de = (c3, s3, zero)
    checks = []

    def check(name: str, passed: bool, detail: str = "") -> None:
        checks.append({"check": name, "passed": bool(passed), "detail": detail})

    # the fixed rays respect every letter-sharing orthogonality among themselves
    fixed = {"AB": v_ab, "AC": v_ac, "AD": v_ad, "BF": v_bf, "BH": v_bh, "CG": v_cg, "DE": v_de}
    ok = all(_pdot(fixed[a], fixed[b]).reduce_pythagorean().is_zero()
             for a, b in itertools.combinations(fixed, 2) if set(a) & set(b))
    check("parameterised rays orthogonal where letters are shared", ok)

    v_gh = _pcross(v_cg, v_bh)
    v_ef = _pcross(v_de, v_bf)
    closed_gh = (-s1 * s2, c1 * c2, s1 * c2)
    closed_ef = (s1 * s3, -s1 * c3, c1 * c3)
    check("GH = CG x BH matches (-s1 s2, c1 c2, s1 c2)", _proportional_mod_pythagorean(v_gh, closed_gh))
    check("EF = DE x BF matches (s1 s3, -s1 c3, c1 c3)", _proportional_mod_pythagorean(v_ef, closed_ef))

    eg_from_g = _pcross(v_cg, v_gh)
    eg_from_e = _pcross(v_de, v_ef)
    closed_eg_g = (c1 * c2 * s2, s1, -c1 * c2 ** 2)
    closed_eg_e = (-c1 * c3 * s3, c1 * c3 ** 2, s1)
    check("EG from {CG, GH} matches (c1 c2 s2, s1, -c1 c2^2)",
          _proportional_mod_pythagorean(eg_from_g, closed_eg_g))
    check("EG from {DE, EF} matches (-c1 c3 s3, c1 c3^2, s1)",
          _proportional_mod_pythagorean(eg_from_e, closed_eg_e))

    minors = _pcross(closed_eg_g, closed_eg_e)
    y, z = minors[1], minors[2]
    lhs = (c1 * c2 * c3) ** 2 * (s2 ** 2 + s3 ** 2)
    rhs = c3 * s3 * y + c2 * s2 * z
    identity = "c1^2 c2^2 c3^2 (s2^2 + s3^2) = c3 s3 Y + c2 s2 Z"
    check("identity holds symbolically", (lhs - rhs).is_zero(), identity)

    # independent exact test: lhs and rhs agree on a product grid of (deg_i + 1)
    # points per variable, which forces equality as polynomials
    degs = [max(a, b) for a, b in zip(lhs.degrees(), rhs.degrees())]
    grid = list(itertools.product(*[range(dg + 1) for dg in degs]))
    grid_ok = all(lhs(dict(zip(Poly.VARS, pt))) == rhs(dict(zip(Poly.VARS, pt))) for pt in grid)
    check("identity holds on the full degree grid", grid_ok,
          f"{len(grid)} grid points, per-variable degrees {degs}")

    rng = random.Random(seed)
    ts_list = [(Fraction(1, 2), Fraction(1, 3), Fraction(1, 5))]
    while len(ts_list) < max(n_samples, max(degs) + 1):
        ts_list.append(tuple(Fraction(rng.randint(1, 97), rng.randint(1, 97)) for _ in range(3)))
    samples = []
    sample_ok = True
    for ts in ts_list:
        pt = _point(ts)
        gh = _eval_vec(v_gh, pt)
        ef = _eval_vec(v_ef, pt)
        gh_ok = all(x == 0 for x in _cross_num(gh, _eval_vec(closed_gh, pt)))
        ef_ok = all(x == 0 for x in _cross_num(ef, _eval_vec(closed_ef, pt)))
        a, b = _eval_vec(closed_eg_g, pt), _eval_vec(closed_eg_e, pt)
        cr = _cross_num(a, b)
        id_ok = lhs(pt) == rhs(pt)
        pyth = all(pt[f"c{i}"] ** 2 + pt[f"s{i}"] ** 2 == 1 for i in (1, 2, 3))
        sample_ok &= gh_ok and ef_ok and id_ok and pyth and any(cr)
        samples.append({"t": [_frac(t) for t in ts], "gh_matches": gh_ok, "ef_matches": ef_ok,
                        "eg_candidates_cross": [_frac(x) for x in cr], "identity_holds": id_ok})
    check("half-angle sample points: GH/EF forms, identity, non-proportional EG candidates",
          sample_ok, f"{len(ts_list)} points")

    def ray(vec, pt):
        return Ray(tuple(_eval_vec(vec, pt)))

    # s2 = s3 = 0 (t2 = t3 = 0): the only real solution of s2^2 = -s3^2
    degenerate = []
    pt = _point((Fraction(1, 2), Fraction(0), Fraction(0)))
    collapse = ray(v_cg, pt) == ray(v_ab, pt)
    degenerate.append({"case": "s2 = s3 = 0", "collision": "CG = AB", "holds": collapse,
                       "eg_candidates": [[_frac(x) for x in _eval_vec(closed_eg_g, pt)],
                                         [_frac(x) for x in _eval_vec(closed_eg_e, pt)]]})
    # c1 c2 c3 = 0, the branch where the identity says nothing
    for name, ts, vec, other, label in [
        ("c1 = 0", (Fraction(1), Fraction(1, 3), Fraction(1, 5)), v_bf, v_ad, "BF = AD"),
        ("c2 = 0", (Fraction(1, 2), Fraction(1), Fraction(1, 5)), v_cg, v_ad, "CG = AD"),
        ("c3 = 0", (Fraction(1, 2), Fraction(1, 3), Fraction(1)), v_de, v_ac, "DE = AC"),
    ]:
        pt = _point(ts)
        degenerate.append({"case": name, "collision": label, "holds": ray(vec, pt) == ray(other, pt)})
    check("every degenerate branch identifies two of the ten rays", all(c["holds"] for c in degenerate))

    status = "refuted" if all(c["passed"] for c in checks) else "inconclusive"
    return RefutationReport(status, checks, samples, identity, degenerate)


def _cross_num(a, b):
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])
