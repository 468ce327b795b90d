from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from contextlab.linalg import (DimensionError, GaussianRational, KVector, ModeError,
                               NotOrthogonalError, Ray, RaySet, complete_pair_d3, complete_to_basis,
                               cross, format_rays, inner_product, is_orthogonal, parse_rays,
                               parse_scalar, vector)
from oracles import exact_dot, int_cross

G = GaussianRational


def test_inner_product_examples():
    assert inner_product(vector((1, 0, 0)), vector((0, 1, 0))) == 0
    assert inner_product(vector((0, 1, 1)), vector((1, 1, -1))) == 0
    assert inner_product(vector((1, 1, 1)), vector((1, 1, -1))) == 1


def test_inner_product_conjugates_left():
    u = vector((G(0, 1), 0))
    v = vector((1, 0))
    assert inner_product(u, v) == G(0, -1)
    assert inner_product(v, u) == G(0, 1)


def test_mode_and_dim_mismatch():
    with pytest.raises(ModeError):
        inner_product(vector((1, 0)), vector((1.0, 0.0)))
    with pytest.raises(DimensionError):
        inner_product(vector((1, 0)), vector((1, 0, 0)))


@pytest.mark.parametrize("u,v,want", [
    ((0, 0, 1), (1, -1, 0), True),
    ((0, 0, 1), (1, 1, 1), False),
    ((1, 0, 1), (1, -1, -1), True),
])
def test_is_orthogonal(u, v, want):
    assert is_orthogonal(Ray(u), Ray(v)) is want


def test_is_orthogonal_float_tolerance():
    a = Ray((1.0, 0.0, 0.0))
    b = Ray((1e-12, 1.0, 0.0))
    assert is_orthogonal(a, b)
    assert not is_orthogonal(a, b, tol=1e-14)


def test_ray_canonical_form():
    assert Ray((2, -4, 6)) == Ray((-1, 2, -3))
    assert str(Ray((0, 2, 4))) == "(0,1,2)"
    assert Ray((G(0, 1), 1)) == Ray((1, G(0, -1)))
    assert Ray((1, 1)) != Ray((1, -1))
    assert hash(Ray((3, 3))) == hash(Ray((1, 1)))


@pytest.mark.parametrize("u,v,want", [
    ((1, 0, 0), (0, 1, 0), (0, 0, 1)),
    ((0, 1, 1), (1, 1, -1), (2, -1, 1)),
    ((0, 1, 1), (0, 1, -1), (1, 0, 0)),
])
def test_complete_pair_d3(u, v, want):
    assert complete_pair_d3(Ray(u), Ray(v)) == Ray(want)
    # cross-product oracle
    assert Ray(int_cross(u, v)) == Ray(want)


def test_complete_pair_d3_rejects_non_orthogonal():
    with pytest.raises(NotOrthogonalError):
        complete_pair_d3(Ray((1, 1, 0)), Ray((1, 0, 0)))


def test_complete_pair_complex():
    u, v = Ray((1, G(0, 1), 0)), Ray((1, G(0, -1), 0))
    w = complete_pair_d3(u, v)
    assert w == Ray((0, 0, 1))
    a, b = Ray((1, 1, G(0, 1))), Ray((1, -1, 0))
    c = complete_pair_d3(a, b)
    assert is_orthogonal(c, a) and is_orthogonal(c, b)


def test_complete_to_basis_examples():
    b = complete_to_basis([Ray((1, 0, 0)), Ray((0, 1, 0))], 3)
    assert set(b.members) == {Ray((1, 0, 0)), Ray((0, 1, 0)), Ray((0, 0, 1))}
    b = complete_to_basis([Ray((0, 1, 1)), Ray((1, 0, 0))], 3)
    assert Ray((0, 1, -1)) in b
    b = complete_to_basis([Ray((1, 0, 0, 0)), Ray((0, 1, 0, 0))], 4)
    assert b.members[2:] == (Ray((0, 0, 1, 0)), Ray((0, 0, 0, 1)))
    # the complement of a plane in dim 4 has many bases, so the choice is flagged
    assert b.canonical_completion


def test_complete_to_basis_flags_underdetermined():
    b = complete_to_basis([Ray((1, 1, 0, 0))], 4)
    assert b.canonical_completion
    assert len(b.members) == 4


def test_complete_to_basis_errors():
    with pytest.raises(NotOrthogonalError):
        complete_to_basis([Ray((1, 1, 0)), Ray((1, 0, 0))], 3)
    with pytest.raises(DimensionError):
        complete_to_basis([Ray((1, 0))], 3)


small = st.integers(-3, 3)


@given(st.tuples(small, small, small).filter(any), st.tuples(small, small, small).filter(any))
def test_cross_matches_integer_oracle(u, v):
    if not any(int_cross(u, v)):
        return
    got = cross(vector(u), vector(v))
    assert tuple(c.re for c in got) == int_cross(u, v)
    assert all(c.im == 0 for c in got)


@given(st.lists(st.tuples(small, small, small).filter(any), min_size=1, max_size=2))
def test_completion_is_orthogonal(vecs):
    rays = [Ray(v) for v in vecs]
    if len(rays) == 2 and (exact_dot(vecs[0], vecs[1]) != 0 or rays[0] == rays[1]):
        return
    basis = complete_to_basis(rays, 3)
    for i, a in enumerate(basis.members):
        for b in basis.members[i + 1:]:
            assert exact_dot([c.re for c in a.rep], [c.re for c in b.rep]) == 0


@pytest.mark.parametrize("text,want", [
    ("3", G(3)), ("-1/2", G(Fraction(-1, 2))), ("i", G(0, 1)), ("-i", G(0, -1)),
    ("1+2i", G(1, 2)), ("1/2-3/4i", G(Fraction(1, 2), Fraction(-3, 4))),
])
def test_parse_scalar_exact(text, want):
    assert parse_scalar(text, "exact") == want
    assert parse_scalar(str(want), "exact") == want


def test_parse_scalar_float():
    assert parse_scalar("1e-3-2.5i", "float") == complex(1e-3, -2.5)


def test_rays_roundtrip():
    text = """# comment
dim=3 mode=exact
1,0,0  label=a
0,1,i
0,1,-i # trailing
"""
    rs = parse_rays(text)
    assert len(rs) == 3 and rs.label(0) == "a"
    again = parse_rays(format_rays(rs))
    assert again.rays == rs.rays
    assert again.label(0) == "a"


def test_parse_rays_errors():
    with pytest.raises(DimensionError):
        parse_rays("dim=3\n1,0\n")
    with pytest.raises(ValueError):
        parse_rays("1,0,0\n")
    with pytest.raises(ValueError):
        parse_rays("dim=2\n1,0\n2,0\n")  # duplicate ray


def test_rayset_rejects_mixed_modes():
    with pytest.raises(ModeError):
        RaySet(2, [Ray((1, 0)), Ray((0.0, 1.0))])


def test_kvector_zero_rejected():
    with pytest.raises(ValueError):
        Ray((0, 0, 0))
