import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from contextlab.linalg import Ray
from contextlab.quantum import (Observable, apply_local, check_unitary_invariance, joint_distribution,
                                joint_probability, permutation_sign, product_state,
                                reduced_single_party, sample_joint, supersinglet, random_unitary)


def levi_civita(idx) -> int:
    """Sign from counting inversions; 0 for repeated indices."""
    if len(set(idx)) < len(idx):
        return 0
    inv = sum(1 for i, j in itertools.combinations(range(len(idx)), 2) if idx[i] > idx[j])
    return -1 if inv % 2 else 1


@pytest.mark.parametrize("perm,sign", [((0, 1, 2), 1), ((0, 2, 1), -1), ((1, 2, 0), 1)])
def test_permutation_sign(perm, sign):
    assert permutation_sign(perm) == sign


@given(st.permutations(range(6)))
def test_permutation_sign_matches_inversions(p):
    assert permutation_sign(p) == levi_civita(p)


def test_supersinglet_amplitudes():
    s2 = supersinglet(2)
    assert s2.amplitude((0, 1)) == pytest.approx(1 / math.sqrt(2))
    assert s2.amplitude((1, 0)) == pytest.approx(-1 / math.sqrt(2))
    s3 = supersinglet(3)
    want = {"012": 1, "021": -1, "102": -1, "120": 1, "201": 1, "210": -1}
    for k, sign in want.items():
        assert s3.amplitude([int(c) for c in k]) == pytest.approx(sign / math.sqrt(6))
    assert s3.amplitude((0, 0, 0)) == 0
    assert len(s3.dump().splitlines()) == 6


@pytest.mark.parametrize("d", [2, 3, 4])
def test_antisymmetry_is_exact(d):
    s = supersinglet(d).amps
    for a, b in itertools.combinations(range(d), 2):
        axes = list(range(d))
        axes[a], axes[b] = axes[b], axes[a]
        assert np.array_equal(np.transpose(s, axes), -s)


def test_supersinglet_bounds():
    with pytest.raises(ValueError):
        supersinglet(1)
    with pytest.raises(ValueError):
        supersinglet(6)


def test_invariance_examples():
    assert check_unitary_invariance(2, np.eye(2)) == 0
    rng = np.random.default_rng(0)
    u = random_unitary(3, rng)
    assert abs(np.linalg.det(u) - 1) < 1e-12
    assert check_unitary_invariance(3, u) < 1e-10
    # det != 1 only changes the global phase
    assert check_unitary_invariance(3, np.diag([1j, 1, 1]) @ u) < 1e-10


def test_invariance_rejects_non_unitary():
    with pytest.raises(ValueError):
        check_unitary_invariance(2, np.array([[1, 1], [0, 1]]))


def test_reduced_states():
    assert np.allclose(reduced_single_party(supersinglet(2)), np.eye(2) / 2, atol=1e-12)
    for party in range(3):
        assert np.allclose(reduced_single_party(supersinglet(3), party), np.eye(3) / 3, atol=1e-12)
    p = product_state([[1, 0], [1, 0]])
    assert np.allclose(reduced_single_party(p), np.diag([1, 0]))


def standard(d, labels=None):
    return Observable(np.eye(d), tuple(labels or range(d)))


def test_same_basis_outcomes():
    s = supersinglet(3)
    obs = [standard(3, "abc")] * 3
    total = 0.0
    for perm in itertools.permutations("abc"):
        p = joint_probability(s, obs, perm)
        assert p == pytest.approx(1 / 6, abs=1e-12)
        total += p
    assert total == pytest.approx(1.0)
    assert joint_probability(s, obs, ("a", "a", "b")) < 1e-30


def test_same_rotated_basis():
    # any basis measured by every party gives distinct outcomes
    s = supersinglet(3)
    rays = [Ray((0, 1, 1)), Ray((1, 1, -1)), Ray((2, -1, 1))]
    ob = Observable.from_basis(rays, labels=["x", "y", "z"])
    assert joint_probability(s, [ob] * 3, ("x", "x", None)) < 1e-30
    assert joint_probability(s, [ob] * 3, ("x", "y", None)) == pytest.approx(1 / 6)


def test_singlet_zero():
    assert joint_probability(supersinglet(2), [standard(2)] * 2, (0, 0)) < 1e-30


def amplitude_oracle(d, vectors, idx):
    """<v_0| x ... x <v_{d-1}| S_d> summed over the permutation expansion."""
    total = 0
    for perm in itertools.permutations(range(d)):
        term = levi_civita(perm) / math.sqrt(math.factorial(d))
        for k, p in enumerate(perm):
            term *= np.conj(vectors[k][p, idx[k]])
        total += term
    return abs(total) ** 2


@given(st.integers(0, 10 ** 6))
@settings(max_examples=25, deadline=None)
def test_joint_distribution_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    d = 3
    us = [random_unitary(d, rng, special=False) for _ in range(d)]
    obs = [Observable(u, tuple(range(d))) for u in us]
    dist = joint_distribution(supersinglet(d), obs)
    assert dist.sum() == pytest.approx(1.0)
    for idx in itertools.product(range(d), repeat=d):
        assert dist[idx] == pytest.approx(amplitude_oracle(d, us, idx), abs=1e-12)
    assert joint_probability(supersinglet(d), obs, (0, 1, 2)) == pytest.approx(dist[0, 1, 2], abs=1e-14)


def test_marginal_is_uniform():
    rng = np.random.default_rng(1)
    obs = [Observable(random_unitary(3, rng), (0, 1, 2)) for _ in range(3)]
    for k in range(3):
        assert joint_probability(supersinglet(3), obs, (k, None, None)) == pytest.approx(1 / 3)


def test_apply_local_matches_kron():
    rng = np.random.default_rng(2)
    us = [random_unitary(2, rng) for _ in range(2)]
    s = supersinglet(2)
    got = apply_local(s, us).amps.reshape(-1)
    assert np.allclose(got, np.kron(us[0], us[1]) @ s.amps.reshape(-1))


def test_sampling_never_repeats():
    s2 = supersinglet(2)
    rng = np.random.default_rng(3)
    for _ in range(200):
        a, b = sample_joint(s2, [standard(2)] * 2, rng)
        assert a != b
    s3 = supersinglet(3)
    for _ in range(200):
        assert len(set(sample_joint(s3, [standard(3)] * 3, rng))) == 3


def test_sampling_statistics():
    s = supersinglet(3)
    rng = np.random.default_rng(4)
    obs = [Observable(random_unitary(3, rng), (0, 1, 2)) for _ in range(3)]
    dist = joint_distribution(s, obs)
    n = 100_000
    counts = np.zeros_like(dist)
    for _ in range(n):
        counts[sample_joint(s, obs, rng)] += 1
    sigma = np.sqrt(n * dist * (1 - dist))
    assert np.all(np.abs(counts - n * dist) <= 3 * sigma + 1)


def test_sample_seed_reproducible():
    s = supersinglet(3)
    obs = [standard(3)] * 3
    assert sample_joint(s, obs, 9) == sample_joint(s, obs, 9)


def test_observable_validation():
    with pytest.raises(ValueError):
        Observable(np.array([[1, 1], [0, 1]]), (0, 1))
    with pytest.raises(KeyError):
        standard(2).index("z")
