"""Dense qudit state vectors: the supersinglet, local projective measurements,
joint outcome probabilities and sampling."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .linalg import OrthoBasis, Ray

MAX_D = 5
ATOL = 1e-10


def permutation_sign(perm: Sequence[int]) -> int:
    """(-1)^t for the number t of transpositions sorting ``perm``."""
    perm = list(perm)
    if sorted(perm) != list(range(len(perm))):
        raise ValueError(f"{perm} is not a permutation of 0..{len(perm) - 1}")
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


@dataclass(frozen=True, eq=False)
class StateVector:
    d: int
    n: int
    amps: np.ndarray   # shape (d,) * n

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex).reshape((self.d,) * self.n)
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state has norm {norm}")
        object.__setattr__(self, "amps", amps)

    def amplitude(self, digits: Sequence[int]) -> complex:
        return complex(self.amps[tuple(digits)])

    def dump(self, tol: float = 1e-15) -> str:
        """One line per nonzero amplitude: |ijk> re im."""
        lines = []
        for idx in itertools.product(range(self.d), repeat=self.n):
            a = self.amps[idx]
            if abs(a) > tol:
                lines.append(f"|{''.join(map(str, idx))}> {a.real:.17g} {a.imag:.17g}")
        return "\n".join(lines)


def product_state(vectors: Sequence[Sequence[complex]]) -> StateVector:
    out = np.array(1.0 + 0j)
    for v in vectors:
        v = np.asarray(v, dtype=complex)
        out = np.multiply.outer(out, v / np.linalg.norm(v))
    return StateVector(len(vectors[0]), len(vectors), out)


def supersinglet(d: int) -> StateVector:
    """Totally antisymmetric state of d parties with d levels each."""
    if not 2 <= d <= MAX_D:
        raise ValueError(f"d must be in 2..{MAX_D}")
    amps = np.zeros((d,) * d, dtype=complex)
    norm = 1.0 / math.sqrt(math.factorial(d))
    for perm in itertools.permutations(range(d)):
        amps[perm] = permutation_sign(perm) * norm
    return StateVector(d, d, amps)


def apply_local(state: StateVector, unitaries: Sequence[np.ndarray]) -> StateVector:
    """(U_0 x U_1 x ... ) |psi>."""
    psi = state.amps
    for k, u in enumerate(unitaries):
        psi = np.moveaxis(np.tensordot(u, psi, axes=([1], [k])), 0, k)
    return StateVector(state.d, state.n, psi)


def _check_unitary(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError("unitary must be a square matrix")
    if not np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=1e-10):
        raise ValueError("matrix is not unitary")
    return u


def random_unitary(d: int, rng: np.random.Generator, special: bool = True) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    if special:
        q = q / np.linalg.det(q) ** (1.0 / d)
    return q


def phase_aligned_distance(a: np.ndarray, b: np.ndarray) -> float:
    """||a e^{-i phi} - b|| with phi fixed on b's largest-magnitude amplitude."""
    flat_a, flat_b = a.reshape(-1), b.reshape(-1)
    k = int(np.argmax(np.abs(flat_b)))
    if abs(flat_a[k]) == 0:
        return float(np.linalg.norm(flat_a - flat_b))
    phase = (flat_a[k] / flat_b[k]) / abs(flat_a[k] / flat_b[k])
    return float(np.linalg.norm(flat_a / phase - flat_b))


def check_unitary_invariance(d: int, u: np.ndarray) -> float:
    """Deviation of U^{(x)d}|S_d> from |S_d> after removing a global phase."""
    u = _check_unitary(u)
    if u.shape[0] != d:
        raise ValueError("unitary dimension differs from d")
    s = supersinglet(d)
    rotated = apply_local(s, [u] * d)
    return phase_aligned_distance(rotated.amps, s.amps)


def reduced_single_party(state: StateVector, party: int = 0) -> np.ndarray:
    """Reduced density matrix of one party (all others traced out)."""
    psi = np.moveaxis(state.amps, party, 0).reshape(state.d, -1)
    return psi @ psi.conj().T


@dataclass(frozen=True, eq=False)
class Observable:
    """Projective measurement onto an orthonormal basis; outcomes carry global labels."""

    vectors: np.ndarray        # columns are unit basis vectors
    labels: tuple

    def __post_init__(self):
        vecs = np.asarray(self.vectors, dtype=complex)
        vecs = vecs / np.linalg.norm(vecs, axis=0, keepdims=True)
        if len(set(self.labels)) != len(self.labels) or len(self.labels) != vecs.shape[1]:
            raise ValueError("need one distinct label per basis vector")
        if not np.allclose(vecs.conj().T @ vecs, np.eye(vecs.shape[1]), atol=1e-10):
            raise ValueError("basis vectors are not orthonormal")
        object.__setattr__(self, "vectors", vecs)

    @classmethod
    def from_basis(cls, basis: OrthoBasis | Sequence[Ray], labels: Sequence | None = None) -> "Observable":
        rays = list(basis)
        cols = np.array([r.rep.to_complex() for r in rays]).T
        return cls(cols, tuple(labels) if labels is not None else tuple(str(r) for r in rays))

    def index(self, label) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"label {label!r} is not an outcome of this observable") from None

    def rotated(self, u: np.ndarray) -> "Observable":
        return Observable(u @ self.vectors, self.labels)


def _measurement_amplitudes(state: StateVector, obs: Sequence[Observable]) -> np.ndarray:
    if len(obs) != state.n:
        raise ValueError(f"{len(obs)} observables for {state.n} parties")
    return apply_local(state, [o.vectors.conj().T for o in obs]).amps


def joint_distribution(state: StateVector, obs: Sequence[Observable]) -> np.ndarray:
    """Probabilities over outcome indices, shape (d,) * n."""
    return np.abs(_measurement_amplitudes(state, obs)) ** 2


def joint_probability(state: StateVector, obs: Sequence[Observable], outcome: Sequence) -> float:
    """Probability of the given per-party labels; ``None`` entries are marginalised."""
    if len(outcome) != state.n:
        raise ValueError("one outcome entry per party required")
    psi = state.amps
    # contract the specified parties from the highest axis down so indices stay valid
    for k in reversed(range(state.n)):
        if outcome[k] is None:
            continue
        v = obs[k].vectors[:, obs[k].index(outcome[k])]
        psi = np.tensordot(psi, v.conj(), axes=([k], [0]))
    return float(np.sum(np.abs(psi) ** 2))


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def sample_joint(state: StateVector, obs: Sequence[Observable], seed) -> tuple:
    """One joint outcome (tuple of labels) drawn from the full joint distribution."""
    probs = joint_distribution(state, obs).reshape(-1)
    probs = probs / probs.sum()
    flat = int(_rng(seed).choice(probs.size, p=probs))
    idx = np.unravel_index(flat, (state.d,) * state.n)
    return tuple(o.labels[i] for o, i in zip(obs, idx))
