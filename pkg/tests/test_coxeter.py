import itertools
import json
import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coxperc import cayley, coxeter
from coxperc.coxeter import INF
from coxperc.errors import (AsymmetricMatrix, DiagonalNotOne, OffDiagonalBelowTwo,
                            RadiusTooLarge, SphericalFourSubset, ValidationError)
from conftest import fixture_path


def test_validate_accepts_and_rejects():
    s = coxeter.validate([[1, 3], [3, 1]])
    assert s.k == 2 and s.label(0, 1) == 3
    with pytest.raises(AsymmetricMatrix) as exc:
        coxeter.validate([[1, 3], [4, 1]])
    assert "m(0,1)" in str(exc.value)
    with pytest.raises(DiagonalNotOne):
        coxeter.validate([[2, 3], [3, 1]])
    with pytest.raises(OffDiagonalBelowTwo):
        coxeter.validate([[1, 1], [1, 1]])


def test_validate_reports_every_violation():
    with pytest.raises(AsymmetricMatrix) as exc:
        coxeter.validate([[1, 3, 2], [4, 1, 2], [2, 5, 1]])
    assert len(exc.value.violations) == 2


def test_infinity_labels_parse():
    s = coxeter.validate([[1, "inf"], ["inf", 1]])
    assert s.label(0, 1) == INF and s.is_right_angled()
    assert not coxeter.is_spherical(s, [0, 1])


def test_json_roundtrip_and_hash(dodeca):
    text = coxeter.dump_nerve_json(dodeca)
    back = coxeter.load_nerve_json(json.loads(text))
    assert back == dodeca
    assert back.content_hash() == dodeca.content_hash()
    assert coxeter.pentagon().content_hash() != dodeca.content_hash()
    with pytest.raises(ValidationError):
        coxeter.load_nerve_json({"edges": []})


@pytest.mark.parametrize("name,maker", [
    ("dodecahedron.json", coxeter.dodecahedron),
    ("pentagon.json", coxeter.pentagon),
    ("free-product-4.json", lambda: coxeter.free_product(4)),
])
def test_presets_match_hand_written_fixtures(name, maker):
    assert coxeter.load_nerve_json(fixture_path(name)) == maker()


def test_preset_lookup():
    assert coxeter.preset("free-product-5") == coxeter.free_product(5)
    assert coxeter.preset("polygon-6").k == 6
    with pytest.raises(ValidationError):
        coxeter.preset("cube")


def test_icosahedron_is_the_icosahedral_graph():
    g = nx.Graph(coxeter.icosahedron_edges())
    assert nx.is_isomorphic(g, nx.icosahedral_graph())


@pytest.mark.parametrize("m,expected", [
    ([[1, 3, 2], [3, 1, 3], [2, 3, 1]], ("A3", 0)),
    ([[1, 4, 2], [4, 1, 3], [2, 3, 1]], ("B3", 0)),
    ([[1, 3, 2], [3, 1, 5], [2, 5, 1]], ("H3", 0)),
    ([[1, 2, 2], [2, 1, 7], [2, 7, 1]], ("I2m_x_Z2", 7)),
    ([[1, 2, 2], [2, 1, 2], [2, 2, 1]], ("I2m_x_Z2", 2)),
])
def test_rank3_tags(m, expected):
    assert coxeter.rank3_tag(coxeter.validate(m), (0, 1, 2)) == expected


@pytest.mark.parametrize("m", [
    [[1, 3, 3], [3, 1, 3], [3, 3, 1]],  # affine A2
    [[1, 4, 2], [4, 1, 4], [2, 4, 1]],  # affine C2
    [[1, 3, 2], [3, 1, 6], [2, 6, 1]],  # affine G2
    [[1, 3, 2], [3, 1, 7], [2, 7, 1]],  # hyperbolic
])
def test_rank3_infinite(m):
    assert not coxeter.is_spherical(coxeter.validate(m), (0, 1, 2))


def test_dodecahedral_nerve(dodeca):
    nerve = coxeter.build_nerve(dodeca, assert_h3=True)
    assert (nerve.f0, nerve.f1, nerve.f2) == (12, 30, 20)
    assert nerve.maxdim == 2 and nerve.h3_admissible
    assert nerve.euler_characteristic() == 2
    assert all(nerve.degree(s) == 5 for s in range(12))


def test_small_nerves():
    pent = coxeter.build_nerve(coxeter.pentagon())
    assert (pent.f0, pent.f1, pent.f2) == (5, 5, 0)
    free = coxeter.build_nerve(coxeter.free_product(4))
    assert (free.f0, free.f1, free.f2) == (4, 0, 0)


def test_labeled_fixture_is_h3_triangle():
    s = coxeter.load_nerve_json(fixture_path("labeled-h3.json"))
    nerve = coxeter.build_nerve(s)
    assert nerve.triangle_tags() == {(0, 1, 2): ("H3", 0)}


def test_labeled_icosahedral_keeps_nerve():
    nerve = coxeter.build_nerve(coxeter.labeled_icosahedral_system(), assert_h3=True)
    assert (nerve.f0, nerve.f1, nerve.f2) == (12, 30, 20)
    tags = list(nerve.triangle_tags().values())
    assert tags.count(("H3", 0)) == 1


def test_assert_h3_rejects_spherical_four():
    # right-angled on the complete graph K4: every subset spherical
    s = coxeter.right_angled(4, itertools.combinations(range(4), 2))
    with pytest.raises(SphericalFourSubset):
        coxeter.build_nerve(s, assert_h3=True)
    nerve = coxeter.build_nerve(s)
    assert nerve.maxdim == 3 and not nerve.h3_admissible


@pytest.mark.parametrize("k", [12, 13, 14, 16, 20])
def test_flag_sphere_triangulations(k):
    edges, tris = coxeter.flag_sphere_triangulation(k)
    assert (len(edges), len(tris)) == (3 * (k - 2), 2 * (k - 2))
    assert coxeter.is_flag_sphere_triangulation(k, edges, tris)
    nerve = coxeter.build_nerve(coxeter.flag_sphere_system(k), assert_h3=True)
    assert sorted(nerve.triangles) == sorted(tris)
    g = nx.Graph(edges)
    assert nx.check_planarity(g)[0]


def test_flag_check_rejects_non_flag():
    # octahedron is flag; removing nothing but adding a missing triangle breaks it
    edges, tris = coxeter.flag_sphere_triangulation(12)
    assert not coxeter.is_flag_sphere_triangulation(12, edges, tris[:-1])
    # a tetrahedron boundary is a sphere but its 4-clique is not a face
    tet_e = list(itertools.combinations(range(4), 2))
    tet_t = list(itertools.combinations(range(4), 3))
    assert not coxeter.is_flag_sphere_triangulation(4, tet_e, tet_t)


def _finite_by_enumeration(system, subset, R, budget):
    """Independent oracle: the parabolic subgroup is finite iff its Cayley ball stops growing.

    ``R`` must exceed the longest element length and ``budget`` the order
    of every finite group that can occur.
    """
    sub = [[system.label(s, t) for t in subset] for s in subset]
    sys_t = coxeter.validate(sub)
    try:
        ball = cayley.build_ball(sys_t, R, mode="word", budget=budget, profile=False)
    except RadiusTooLarge:
        return False
    return ball.spheres[-1] == 0


def _finite_by_gram(system):
    """Second oracle: finite iff the form ``B(s, t) = -cos(pi / m)`` is positive definite."""
    k = system.k
    B = np.array([[-math.cos(math.pi / system.label(s, t)) if system.label(s, t) != INF else -1.0
                   for t in range(k)] for s in range(k)])
    return bool(np.linalg.eigvalsh(B).min() > 1e-9)


labels3 = st.sampled_from([2, 3, 4, 5, 6, INF])
labels4 = st.sampled_from([2, 2, 3, 4, 5, INF])


@settings(max_examples=40, deadline=None)
@given(st.tuples(labels3, labels3, labels3))
def test_rank3_sphericity_matches_enumeration(labs):
    a, b, c = labs
    s = coxeter.validate([[1, a, b], [a, 1, c], [b, c, 1]])
    assert coxeter.is_spherical(s, (0, 1, 2)) == _finite_by_enumeration(s, (0, 1, 2), 16, 400)


@settings(max_examples=80, deadline=None)
@given(st.lists(labels4, min_size=6, max_size=6))
def test_rank4_sphericity_matches_enumeration(labs):
    m = [[1] * 4 for _ in range(4)]
    for (s, t), lab in zip(itertools.combinations(range(4), 2), labs):
        m[s][t] = m[t][s] = lab
    s = coxeter.validate(m)
    assert coxeter.is_spherical(s, range(4)) == _finite_by_gram(s)


@settings(max_examples=40, deadline=None)
@given(st.integers(4, 7).flatmap(
    lambda k: st.tuples(st.just(k), st.lists(st.sampled_from([2, 2, 3, INF]),
                                             min_size=k * (k - 1) // 2,
                                             max_size=k * (k - 1) // 2))))
def test_nerve_is_downward_closed_and_complete(data):
    k, labs = data
    m = [[1] * k for _ in range(k)]
    for (s, t), lab in zip(itertools.combinations(range(k), 2), labs):
        m[s][t] = m[t][s] = lab
    s = coxeter.validate(m)
    nerve = coxeter.build_nerve(s)
    found = {simp for level in nerve.simplices for simp in level}
    for simp in found:
        for r in range(1, len(simp)):
            assert all(face in found for face in itertools.combinations(simp, r))
    brute = {sub for r in range(1, k + 1) for sub in itertools.combinations(range(k), r)
             if coxeter.is_spherical(s, sub)}
    assert found == brute
