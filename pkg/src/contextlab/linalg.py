"""Exact and floating complex vector arithmetic over rays.

Exact vectors hold Gaussian rationals (``GaussianRational``); float vectors hold
Python ``complex``.  The two modes never mix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence, Union

EXACT = "exact"
FLOAT = "float"
DEFAULT_TOL = 1e-9


class DimensionError(ValueError):
    pass


class ModeError(TypeError):
    pass


class NotOrthogonalError(ValueError):
    pass


@dataclass(frozen=True)
class GaussianRational:
    re: Fraction
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))

    @classmethod
    def coerce(cls, x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, (int, Fraction)):
            return cls(Fraction(x))
        raise ModeError(f"cannot use {type(x).__name__} as an exact scalar")

    def __add__(self, other):
        o = GaussianRational.coerce(other)
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = GaussianRational.coerce(other)
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return GaussianRational.coerce(other) - self

    def __mul__(self, other):
        o = GaussianRational.coerce(other)
        return GaussianRational(self.re * o.re - self.im * o.im,
                                self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = GaussianRational.coerce(other)
        n = o.abs2()
        if n == 0:
            raise ZeroDivisionError("division by exact zero")
        q = self * o.conjugate()
        return GaussianRational(q.re / n, q.im / n)

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        if isinstance(other, GaussianRational):
            return self.re == other.re and self.im == other.im
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __str__(self):
        if not self.im:
            return _frac_str(self.re)
        im = _frac_str(abs(self.im))
        im = "i" if im == "1" else im + "i"
        if not self.re:
            return ("-" if self.im < 0 else "") + im
        return f"{_frac_str(self.re)}{'-' if self.im < 0 else '+'}{im}"

    __repr__ = __str__


Scalar = Union[GaussianRational, complex]
ZERO = GaussianRational(Fraction(0))


def _frac_str(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class KVector:
    components: tuple
    mode: str = EXACT

    def __post_init__(self):
        comps = tuple(self.components)
        if self.mode == EXACT:
            comps = tuple(GaussianRational.coerce(c) for c in comps)
        elif self.mode == FLOAT:
            if any(isinstance(c, GaussianRational) for c in comps):
                raise ModeError("exact component in a float vector")
            comps = tuple(complex(c) for c in comps)
        else:
            raise ValueError(f"unknown mode {self.mode!r}")
        if len(comps) < 2:
            raise DimensionError("vectors need dim >= 2")
        if not any(_nonzero(c) for c in comps):
            raise ValueError("zero vector")
        object.__setattr__(self, "components", comps)

    @property
    def dim(self) -> int:
        return len(self.components)

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def norm2(self):
        if self.mode == EXACT:
            return sum((c.abs2() for c in self.components), Fraction(0))
        return sum(abs(c) ** 2 for c in self.components)

    def to_complex(self) -> list[complex]:
        return [complex(c) for c in self.components]

    def scale(self, s) -> "KVector":
        return KVector(tuple(c * s for c in self.components), self.mode)


def _nonzero(c) -> bool:
    return bool(c) if isinstance(c, GaussianRational) else c != 0


def vector(components: Iterable, mode: str | None = None) -> KVector:
    """Build a KVector, choosing exact mode when every entry is rational."""
    comps = list(components)
    if mode is None:
        exact = all(isinstance(c, (int, Fraction, GaussianRational)) for c in comps)
        mode = EXACT if exact else FLOAT
    return KVector(tuple(comps), mode)


def _check_pair(u: KVector, v: KVector) -> None:
    if u.dim != v.dim:
        raise DimensionError(f"dimension mismatch {u.dim} != {v.dim}")
    if u.mode != v.mode:
        raise ModeError(f"mode mismatch {u.mode} != {v.mode}")


def inner_product(u: KVector, v: KVector) -> Scalar:
    """<u|v>, conjugate-linear in ``u``."""
    _check_pair(u, v)
    if u.mode == EXACT:
        total = ZERO
        for a, b in zip(u.components, v.components):
            total = total + a.conjugate() * b
        return total
    return sum(a.conjugate() * b for a, b in zip(u.components, v.components))


def _as_vector(x) -> KVector:
    return x.rep if isinstance(x, Ray) else x


def canonicalize(v: KVector) -> KVector:
    if v.mode == EXACT:
        first = next(c for c in v.components if c)
        comps = [c / first for c in v.components]
        dens = [x.denominator for c in comps for x in (c.re, c.im)]
        lcm = reduce(lambda a, b: a * b // math.gcd(a, b), dens, 1)
        ints = [(int(c.re * lcm), int(c.im * lcm)) for c in comps]
        g = reduce(math.gcd, (abs(x) for pair in ints for x in pair), 0)
        return KVector(tuple(GaussianRational(Fraction(a // g), Fraction(b // g)) for a, b in ints), EXACT)
    comps = v.components
    norm = math.sqrt(sum(abs(c) ** 2 for c in comps))
    # pick the first component that is clearly nonzero so tiny noise doesn't set the phase
    first = next(c for c in comps if abs(c) > 1e-12 * norm)
    phase = first / abs(first)
    return KVector(tuple(c / phase / norm for c in comps), FLOAT)


class Ray:
    """Projective class of a nonzero vector, stored in canonical form."""

    __slots__ = ("rep", "_key")

    def __init__(self, v):
        if not isinstance(v, KVector):
            v = vector(v)
        self.rep = canonicalize(v)
        self._key = tuple((c.re, c.im) for c in self.rep.components) if self.rep.mode == EXACT else None

    @property
    def dim(self) -> int:
        return self.rep.dim

    @property
    def mode(self) -> str:
        return self.rep.mode

    @property
    def key(self):
        return self._key

    def __eq__(self, other):
        if not isinstance(other, Ray):
            return NotImplemented
        if self.dim != other.dim or self.mode != other.mode:
            return False
        if self.mode == EXACT:
            return self._key == other._key
        return abs(abs(inner_product(self.rep, other.rep)) - 1.0) < DEFAULT_TOL

    def __hash__(self):
        if self.mode == EXACT:
            return hash(self._key)
        return hash(("float", self.dim))

    def __str__(self):
        if self.mode == EXACT:
            return "(" + ",".join(str(c) for c in self.rep.components) + ")"
        return "(" + ",".join(_complex_str(c) for c in self.rep.components) + ")"

    def __repr__(self):
        return f"Ray{self}"


def _complex_str(c: complex) -> str:
    if abs(c.imag) < 1e-15:
        return repr(c.real)
    return f"{c.real!r}{'+' if c.imag >= 0 else '-'}{abs(c.imag)!r}i"


def is_orthogonal(u, v, tol: float = DEFAULT_TOL) -> bool:
    """Exact test in exact mode; normalized overlap below ``tol`` in float mode."""
    a, b = _as_vector(u), _as_vector(v)
    ip = inner_product(a, b)
    if a.mode == EXACT:
        return not ip
    return abs(ip) / math.sqrt(a.norm2() * b.norm2()) < tol


def cross(u: KVector, v: KVector) -> KVector:
    """Plain (bilinear) cross product of two 3-vectors."""
    _check_pair(u, v)
    if u.dim != 3:
        raise DimensionError("cross product needs dim 3")
    a, b = u.components, v.components
    return KVector((a[1] * b[2] - a[2] * b[1],
                    a[2] * b[0] - a[0] * b[2],
                    a[0] * b[1] - a[1] * b[0]), u.mode)


def _conj(v: KVector) -> KVector:
    return KVector(tuple(c.conjugate() for c in v.components), v.mode)


def complete_pair_d3(u, v) -> Ray:
    """The unique ray orthogonal to two orthogonal rays in dimension 3."""
    a, b = _as_vector(u), _as_vector(v)
    if a.dim != 3 or b.dim != 3:
        raise DimensionError("complete_pair_d3 needs dim 3")
    if not is_orthogonal(a, b):
        raise NotOrthogonalError(f"{Ray(a)} and {Ray(b)} are not orthogonal")
    return Ray(cross(_conj(a), _conj(b)))


@dataclass(frozen=True)
class OrthoBasis:
    dim: int
    members: tuple
    canonical_completion: bool = False

    def __post_init__(self):
        if len(self.members) != self.dim:
            raise DimensionError(f"a basis in dim {self.dim} needs {self.dim} members")
        for i, a in enumerate(self.members):
            for b in self.members[i + 1:]:
                if not is_orthogonal(a, b):
                    raise NotOrthogonalError(f"{a} and {b} are not orthogonal")

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, ray):
        return ray in self.members


def complete_to_basis(partial: Sequence, d: int) -> OrthoBasis:
    """Extend mutually orthogonal rays to a basis.

    Gram-Schmidt against e_0, e_1, ... in order, skipping dependent vectors.
    In dim 3 the completion of an orthogonal pair is unique, so this agrees
    with ``complete_pair_d3``.
    """
    rays = [r if isinstance(r, Ray) else Ray(r) for r in partial]
    if not rays:
        raise ValueError("need at least one ray")
    if any(r.dim != d for r in rays):
        raise DimensionError("ray dimension differs from d")
    if len(rays) > d:
        raise DimensionError("more rays than the dimension")
    for i, a in enumerate(rays):
        for b in rays[i + 1:]:
            if not is_orthogonal(a, b):
                raise NotOrthogonalError(f"{a} and {b} are not orthogonal")
    mode = rays[0].mode
    flagged = d > 3 and len(rays) < d - 1
    span = [r.rep for r in rays]
    k = 0
    while len(span) < d:
        unit = [0] * d
        unit[k] = 1
        w = KVector(tuple(unit), mode) if mode == EXACT else KVector(tuple(complex(x) for x in unit), FLOAT)
        comps = list(w.components)
        for b in span:
            coef = inner_product(b, w) / b.norm2()
            comps = [c - coef * bc for c, bc in zip(comps, b.components)]
        if mode == EXACT:
            dependent = not any(comps)
        else:
            dependent = math.sqrt(sum(abs(c) ** 2 for c in comps)) < 1e-9
        if not dependent:
            span.append(KVector(tuple(comps), mode))
        k += 1
    return OrthoBasis(d, tuple(rays) + tuple(Ray(v) for v in span[len(rays):]), flagged)


@dataclass
class RaySet:
    dim: int
    rays: list
    labels: list | None = None
    mode: str = EXACT

    def __post_init__(self):
        self.rays = [r if isinstance(r, Ray) else Ray(r) for r in self.rays]
        for r in self.rays:
            if r.dim != self.dim:
                raise DimensionError(f"ray {r} has dim {r.dim}, expected {self.dim}")
            if r.mode != self.mode:
                raise ModeError(f"ray {r} is {r.mode}, set is {self.mode}")
        for i, a in enumerate(self.rays):
            if a in self.rays[:i]:
                raise ValueError(f"duplicate ray {a}")
        if self.labels is not None and len(self.labels) != len(self.rays):
            raise ValueError("labels and rays differ in length")

    def __len__(self):
        return len(self.rays)

    def __iter__(self):
        return iter(self.rays)

    def __getitem__(self, i):
        return self.rays[i]

    def label(self, i: int) -> str:
        if self.labels and self.labels[i] is not None:
            return self.labels[i]
        return str(self.rays[i])

    @classmethod
    def from_vectors(cls, vectors, labels=None) -> "RaySet":
        rays = [v if isinstance(v, Ray) else Ray(v) for v in vectors]
        if not rays:
            raise ValueError("empty ray set")
        return cls(rays[0].dim, rays, labels, rays[0].mode)


# --- .rays text format -------------------------------------------------------

def _split_complex(s: str) -> tuple[str, str | None]:
    """Split 'a+bi' into ('a', '+b'); a purely real string gives (s, None)."""
    if not s.endswith("i"):
        return s, None
    body = s[:-1]
    for k in range(len(body) - 1, 0, -1):
        if body[k] in "+-" and body[k - 1] not in "eE":
            return body[:k], body[k:]
    return "0", body


def parse_scalar(text: str, mode: str):
    s = text.strip().replace(" ", "")
    if not s:
        raise ValueError("empty component")
    re_text, im_text = _split_complex(s)
    if im_text in ("", "+", "-"):
        im_text += "1"
    num = float if mode == FLOAT else Fraction
    try:
        re_val = num(re_text)
        im_val = num(im_text) if im_text is not None else num(0)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"cannot parse component {text!r}") from exc
    if mode == FLOAT:
        return complex(re_val, im_val)
    return GaussianRational(re_val, im_val)


def parse_rays(text: str) -> RaySet:
    header = None
    vectors, labels = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if header is None:
            fields = dict(tok.split("=", 1) for tok in line.split())
            if "dim" not in fields:
                raise ValueError(f"line {lineno}: expected header 'dim=<d> mode=<exact|float>'")
            header = (int(fields["dim"]), fields.get("mode", EXACT))
            continue
        label = None
        if "label=" in line:
            line, label = line.split("label=", 1)
            label = label.strip()
        comps = [parse_scalar(c, header[1]) for c in line.strip().rstrip(",").split(",")]
        if len(comps) != header[0]:
            raise DimensionError(f"line {lineno}: {len(comps)} components, header says {header[0]}")
        vectors.append(KVector(tuple(comps), header[1]))
        labels.append(label)
    if header is None:
        raise ValueError("missing header line")
    if not vectors:
        raise ValueError("no vectors")
    return RaySet(header[0], [Ray(v) for v in vectors],
                  labels if any(l is not None for l in labels) else None, header[1])


def format_rays(rays: RaySet) -> str:
    lines = [f"dim={rays.dim} mode={rays.mode}"]
    for i, r in enumerate(rays.rays):
        if r.mode == EXACT:
            body = ",".join(str(c) for c in r.rep.components)
        else:
            body = ",".join(_complex_str(c) for c in r.rep.components)
        if rays.labels and rays.labels[i]:
            body += f" label={rays.labels[i]}"
        lines.append(body)
    return "\n".join(lines) + "\n"
