import itertools

import numpy as np
import pytest

from contextlab.bell import (ClassicalStrategy, GameSpec, bound_report, build_bell_expression,
                             build_game, evaluate_bell, lhv_attains_max, lhv_bound_brute_force,
                             lhv_bound_exact, losing_questions, quantum_loss_mass, referee_check,
                             search_classical, simulate_game, term_probabilities)
from contextlab.graph import build_orthogonality_graph, chromatic_number, k_coloring, fixture_s3, fixture_s3_plus
from contextlab.linalg import Ray, RaySet
from contextlab.quantum import joint_probability, supersinglet
from oracles import int_cross, orthogonal_pairs, s3_vectors


@pytest.fixture(scope="module")
def s3_game():
    return build_game(fixture_s3(), 3)


@pytest.fixture(scope="module")
def s3_expr(s3_game):
    return build_bell_expression(s3_game)


def triad_game():
    return build_game(RaySet.from_vectors([(1, 0, 0), (0, 1, 0), (0, 0, 1)]), 3)


def toy_game():
    return build_game(RaySet.from_vectors([(1, 0, 0), (0, 1, 0), (0, 0, 1), (0, 1, 1), (0, 1, -1)]), 3)


def idx(spec, v):
    return spec.rays.index(Ray(v))


def test_s3_game_bases(s3_game):
    assert len(s3_game.bases) == 16
    triads = [{(1, 0, 0), (0, 1, 0), (0, 0, 1)}, {(1, 0, 0), (0, 1, 1), (0, 1, -1)},
              {(0, 1, 0), (1, 0, 1), (1, 0, -1)}, {(0, 0, 1), (1, 1, 0), (1, -1, 0)}]
    as_sets = [set(b) for b in s3_game.bases]
    for t in triads:
        assert {idx(s3_game, v) for v in t} in as_sets
    assert all(len(b) == 3 for b in s3_game.bases)


def test_s3_completion_rays_from_cross_products(s3_game):
    vecs = s3_vectors()
    s3 = {Ray(v) for v in vecs}
    want = {Ray(int_cross(vecs[i], vecs[j])) for i, j in orthogonal_pairs(vecs)} - s3
    assert set(s3_game.completion_rays) == want
    assert Ray((2, -1, 1)) in want
    assert not set(s3_game.completion_rays) & s3


def test_every_orthogonal_pair_is_in_a_basis(s3_game):
    for i, j in orthogonal_pairs([tuple(int(c.re) for c in r.rep) for r in s3_game.base_rays]):
        assert any(i in b and j in b for b in s3_game.bases)


def test_triad_game():
    g = triad_game()
    assert len(g.bases) == 1 and g.completion_rays == []


def test_mixed_dimension_rejected():
    with pytest.raises(ValueError):
        build_game(fixture_s3(), 4)


def test_spec_json_roundtrip(s3_game):
    again = GameSpec.from_json(s3_game.to_json())
    assert again.bases == s3_game.bases and again.rays == s3_game.rays


def oracle_referee(question, answers, bases):
    """Rules re-derived directly from their statement."""
    d = len(question)
    for p, q in itertools.combinations(range(d), 2):
        if answers[p] == answers[q]:
            return "i"
    for r in range(d):
        rest = [p for p in range(d) if p != r]
        if len({question[p] for p in rest}) == 1:
            b = question[rest[0]]
            leftover = [v for v in bases[b] if v not in [answers[p] for p in rest]]
            if leftover[0] in bases[question[r]] and answers[r] != leftover[0]:
                return "ii"
    return None


def test_referee_examples(s3_game):
    b0 = s3_game.bases[0]
    assert referee_check((0, 0, 0), b0, s3_game).win
    # basis sharing a vector with b0
    k, v = next((k, v) for k, b in enumerate(s3_game.bases[1:], 1) for v in b if v in b0)
    other = next(x for x in b0 if x != v)
    loss = referee_check((0, k, 0), (v, v, other), s3_game)
    assert not loss.win and loss.rule == "i"
    rest = [x for x in b0 if x != v]
    assert referee_check((0, 0, k), (rest[0], rest[1], v), s3_game).win
    bad = next(x for x in s3_game.bases[k] if x != v)
    verdict = referee_check((0, 0, k), (rest[0], rest[1], bad), s3_game)
    assert verdict.rule == "ii"


def test_referee_matches_oracle_and_is_symmetric(s3_game):
    rng = np.random.default_rng(0)
    nb = len(s3_game.bases)
    for _ in range(3000):
        q = tuple(int(x) for x in rng.integers(nb, size=3))
        a = tuple(int(s3_game.bases[k][rng.integers(3)]) for k in q)
        got = referee_check(q, a, s3_game)
        assert got.rule == oracle_referee(q, a, s3_game.bases)
        perm = rng.permutation(3)
        swapped = referee_check(tuple(q[i] for i in perm), tuple(a[i] for i in perm), s3_game)
        assert swapped.win == got.win


def test_referee_rejects_bad_answers(s3_game):
    with pytest.raises(ValueError):
        referee_check((0, 0), (0, 1), s3_game)
    outside = next(v for v in range(len(s3_game.rays)) if v not in s3_game.bases[0])
    with pytest.raises(ValueError):
        referee_check((0, 0, 0), (outside, 1, 2), s3_game)


def test_quantum_never_loses(s3_game):
    stats = simulate_game(s3_game, "quantum", 3000, seed=5)
    assert stats.total_losses == 0 and stats.wins == 3000
    assert quantum_loss_mass(s3_game) < 1e-10


def test_simulation_reproducible(s3_game):
    s = ClassicalStrategy.random(s3_game, np.random.default_rng(1))
    a = simulate_game(s3_game, s, 500, seed=3).to_json()
    assert a == simulate_game(s3_game, s, 500, seed=3).to_json()
    with pytest.raises(ValueError):
        simulate_game(s3_game, s, 0)


def test_every_classical_strategy_loses_somewhere(s3_game):
    rng = np.random.default_rng(2)
    for _ in range(50):
        assert losing_questions(s3_game, ClassicalStrategy.random(s3_game, rng), limit=1)
    best, loss = search_classical(s3_game, n_random=200, seed=0)
    assert loss >= 1 and len(losing_questions(s3_game, best)) == loss


def test_triad_coloring_strategy_never_loses():
    g = triad_game()
    s = ClassicalStrategy.from_coloring(g, [0, 1, 2])
    assert losing_questions(g, s) == []
    assert simulate_game(g, s, 200).total_losses == 0


def test_empty_and_triad_expression():
    expr = build_bell_expression(triad_game())
    # only the basis paired with itself remains
    assert expr.counts["i_cross"] == 0 and expr.counts["ii_cross"] == 0
    assert lhv_bound_exact(expr) == expr.omega_qm
    empty = build_bell_expression(GameSpec(3, [], 0, []))
    assert empty.omega_qm == 0
    assert evaluate_bell(empty, "quantum") == 0
    assert lhv_bound_exact(empty) == 0


def test_toy_cross_basis_count():
    g = toy_game()
    assert len(g.bases) == 2
    expr = build_bell_expression(g)
    shared = len(set(g.bases[0]) & set(g.bases[1]))
    # one unordered basis pair sharing one vector, six ordered party pairs, swapped duplicates merged
    assert expr.counts["i_cross"] == shared * 6 == 6
    assert expr.raw_count > expr.omega_qm


def test_s3_terms_vanish_quantum(s3_game, s3_expr):
    probs = term_probabilities(s3_expr, "quantum")
    assert max(probs) < 1e-10
    assert evaluate_bell(s3_expr, "quantum") == pytest.approx(s3_expr.omega_qm, abs=1e-8)


def test_type_i_terms_against_joint_probability(s3_game, s3_expr):
    state = supersinglet(3)
    obs = s3_game.observables()
    for t in [t for t in s3_expr.terms if t.kind == "i"][:60]:
        o = [obs[s] if s is not None else obs[0] for s in t.settings(3)]
        outcome = [None] * 3
        outcome[t.p] = outcome[t.q] = t.v
        assert joint_probability(state, o, outcome) < 1e-10


def oracle_term_value(t, answers, d):
    """1 - P for a deterministic strategy, evaluated from the term's wording."""
    if t.kind == "i":
        return 0 if answers[t.p][t.b] == t.v == answers[t.q][t.b2] else 1
    others = [answers[k][t.b] for k in range(d) if k != t.p]
    pattern = len(set(others)) == d - 1 and t.v not in others
    return 0 if pattern and answers[t.p][t.b2] != t.v else 1


def test_classical_evaluation_against_oracle(s3_game, s3_expr):
    rng = np.random.default_rng(7)
    for _ in range(20):
        s = ClassicalStrategy.random(s3_game, rng)
        want = sum(oracle_term_value(t, s.answers, 3) for t in s3_expr.terms)
        assert evaluate_bell(s3_expr, s) == want


def test_classical_strategies_fall_short(s3_game, s3_expr):
    rng = np.random.default_rng(8)
    top = max(evaluate_bell(s3_expr, ClassicalStrategy.random(s3_game, rng)) for _ in range(1000))
    assert top < s3_expr.omega_qm


def test_four_coloring_restricted_to_three_parties(s3_game, s3_expr):
    g = s3_game.basis_graph()
    cert = chromatic_number(g)
    colors = cert.coloring.colors
    # parties 0..2 answer their colour where possible, otherwise the first remaining vector
    answers = []
    for p in range(3):
        row = []
        for b in s3_game.bases:
            hits = [v for v in b if colors[v] == p]
            row.append(hits[0] if hits else b[0])
        answers.append(row)
    assert evaluate_bell(s3_expr, ClassicalStrategy(answers)) < s3_expr.omega_qm


def test_lhv_attains_max_examples(s3_game):
    cert = lhv_attains_max(s3_game)
    assert not cert.attains_max and cert.chi_base == 4
    assert cert.chi_certificate["chi"] == 4
    tri = lhv_attains_max(triad_game())
    assert tri.attains_max and sorted(tri.coloring) == [0, 1, 2]
    s4 = build_game(fixture_s3_plus(1), 4)
    c4 = lhv_attains_max(s4)
    assert not c4.attains_max and c4.chi_base == 5


def test_colorable_spec_reaches_maximum_both_ways():
    g = toy_game()
    cert = lhv_attains_max(g)
    assert cert.attains_max
    s = ClassicalStrategy.from_coloring(g, cert.coloring)
    assert losing_questions(g, s) == []
    expr = build_bell_expression(g)
    assert evaluate_bell(expr, s) == expr.omega_qm


def test_toy_exact_bound_matches_brute_force():
    expr = build_bell_expression(toy_game())
    assert lhv_bound_exact(expr) == lhv_bound_brute_force(expr) == expr.omega_qm


def test_colorable_partial_game_reaches_maximum():
    rays = RaySet.from_vectors([(1, 0, 0), (0, 1, 1), (0, 1, -1), (1, 1, 1), (0, 1, 0)])
    g = build_game(rays, 3)
    expr = build_bell_expression(g)
    assert len(g.bases) == 3 and lhv_attains_max(g).attains_max
    assert lhv_bound_exact(expr) == lhv_bound_brute_force(expr) == expr.omega_qm


def test_uncolorable_combinatorial_game_has_gap():
    # three abstract bases whose co-membership graph contains K4 on rays 0..3
    rays = [Ray((1, k, k * k)) for k in range(1, 6)]
    g = GameSpec(3, rays, 0, [(0, 1, 2), (0, 1, 3), (2, 3, 4)])
    assert k_coloring(g.basis_graph(), 3) is None
    expr = build_bell_expression(g)
    exact = lhv_bound_exact(expr)
    assert exact == lhv_bound_brute_force(expr)
    assert exact < expr.omega_qm


def test_s3_bounds(s3_expr):
    rep = bound_report(s3_expr)
    assert rep.lhv_bound is None
    assert rep.method == "coloring-certificate"
    assert not rep.lhv_attains_max
    assert rep.lhv_upper < rep.omega_qm
    assert rep.qm_value == pytest.approx(rep.omega_qm, abs=1e-8)
    assert rep.flags == []


def test_s4_flagged_as_canonical_completion():
    rays = RaySet.from_vectors([(1, 0, 0, 0), (0, 1, 1, 0)])
    assert build_game(rays, 4).canonical_completion
