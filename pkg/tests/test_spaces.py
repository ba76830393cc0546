import pytest

from gerbekit.errors import ValidationError
from gerbekit.spaces import (CoveredComplex, FiniteGroupoid, GroupAction, SimplicialComplex, SimplicialMap,
                             cech_space, check_space, cyclic_group, manifold_space, nerve, pair_groupoid,
                             permutation_sign, product_group, stack_dimension, transformation_space,
                             underlying_groupoid, validate_space)


def circle():
    return SimplicialComplex.from_facets([[0, 1], [1, 2], [0, 2]])


def test_permutation_sign():
    assert permutation_sign([0, 1, 2]) == 1
    assert permutation_sign([1, 0, 2]) == -1
    assert permutation_sign([2, 0, 1]) == 1


def test_complex_closure_and_counts():
    K = SimplicialComplex.from_facets([[0, 1, 2], [2, 3]])
    assert [len(K.simplices(k)) for k in range(3)] == [4, 4, 1]
    assert K.dimension == 2
    assert not K.is_pure()
    assert sorted(len(s) for s in K.maximal_simplices()) == [2, 3]
    assert K.violations() == []


def test_complex_equality_is_structural():
    assert circle() == circle()
    assert circle() != SimplicialComplex.from_facets([[0, 1], [1, 2]])


def test_simplicial_map_image_sign_and_degeneracy():
    K = circle()
    swap = SimplicialMap.from_labels(K, K, {0: 1, 1: 0, 2: 2}.__getitem__)
    assert swap.violations() == []
    img, sign = swap.image((0, 1))
    assert img == (0, 1) and sign == -1
    collapse = SimplicialMap.from_labels(K, K, lambda v: 0)
    assert collapse.image((0, 1)) is None
    assert not swap.is_monotone()


@pytest.mark.parametrize("P", [2, 3, 4])
@pytest.mark.parametrize("group", [cyclic_group(2), cyclic_group(3), product_group(2, 2)])
def test_nerve_satisfies_simplicial_identities(group, P):
    S = nerve(group, P)
    assert validate_space(S) == []
    assert [len(S.levels[p].simplices(0)) for p in range(P + 1)] == [len(group.arrows) ** p for p in range(P + 1)]


def test_validate_space_detects_broken_identity():
    S = nerve(cyclic_group(3), 3)
    faces = [list(fs) for fs in S.faces]
    # replace d_0 on level 2 by d_1: the identity d_0 d_0 = d_0 d_1 then fails
    faces[2][0] = faces[2][1]
    from gerbekit.spaces import SemiSimplicialSpace
    broken = SemiSimplicialSpace(S.levels, faces)
    assert validate_space(broken)
    with pytest.raises(ValidationError):
        check_space(broken)


def test_groupoid_axioms_detected():
    G = cyclic_group(3)
    assert G.violations() == []
    bad = dict(G.compose)
    bad[(1, 1)] = 0
    H = FiniteGroupoid(G.objects, G.arrows, G.source, G.target, bad)
    assert H.violations()
    assert not H.is_valid()


def test_pair_groupoid_and_underlying_groupoid():
    G = pair_groupoid(["a", "b", "c"])
    assert G.is_valid()
    S = nerve(G, 2)
    H = underlying_groupoid(S)
    assert len(H.arrows) == 9 and set(H.objects) == {"a", "b", "c"}


def test_cech_space_of_circle_cover():
    K = circle()
    C = CoveredComplex.from_facets(K, [[[0, 1], [1, 2]], [[0, 2]]])
    assert C.violations() == []
    S = cech_space(C, 3)
    assert validate_space(S) == []
    # X_1 holds U_00, U_01, U_10, U_11; U_01 is the two points {0, 2}
    assert len(S.levels[1].simplices(0)) == 3 + 2 + 2 + 2


def test_cover_must_span():
    K = circle()
    C = CoveredComplex.from_facets(K, [[[0, 1]]])
    assert C.violations()
    with pytest.raises(ValidationError):
        cech_space(C, 2)


def test_transformation_space_of_rotation():
    K = circle()
    G = cyclic_group(3)
    act = {g: {v: (v + g) % 3 for v in range(3)} for g in range(3)}
    A = GroupAction(G, K, act)
    assert A.violations() == []
    S = transformation_space(A, 3)
    assert validate_space(S) == []


def test_bad_action_rejected():
    K = circle()
    G = cyclic_group(2)
    act = {0: {0: 0, 1: 1, 2: 2}, 1: {0: 1, 1: 1, 2: 2}}
    assert GroupAction(G, K, act).violations()


def test_stack_dimension():
    assert stack_dimension(manifold_space(circle(), 2)) == 1
    assert stack_dimension(nerve(cyclic_group(2), 2)) == 0


def test_nerve_counts():
    assert len(nerve(pair_groupoid(["a", "b"]), 2).levels[2].simplices(0)) == 8
    assert len(nerve(cyclic_group(2), 3).levels[3].simplices(0)) == 8


def test_nerve_face_convention():
    G = pair_groupoid(["a", "b", "c"])
    S = nerve(G, 2)
    X1, X2 = S.levels[1], S.levels[2]
    x = next(a for a in G.arrows if G.source[a] != G.target[a])
    (v,) = [i for i, lab in enumerate(X1.labels) if lab == (x,)]
    # on X_1: d_0 = target, d_1 = source
    assert S.levels[0].labels[S.face(1, 0).vertex_map[v]] == G.target[x]
    assert S.levels[0].labels[S.face(1, 1).vertex_map[v]] == G.source[x]
    y = next(b for b in G.arrows if G.source[b] == G.target[x])
    (w,) = [i for i, lab in enumerate(X2.labels) if lab == (x, y)]
    images = [X1.labels[S.face(2, i).vertex_map[w]] for i in range(3)]
    assert images == [(y,), (G.compose[(x, y)],), (x,)]


def test_cech_circle_example():
    K = SimplicialComplex.from_facets([[1, 2], [2, 3], [1, 3]])
    C = CoveredComplex.from_facets(K, [[[1, 2]], [[2, 3]], [[1, 3]]])
    S = cech_space(C, 2)
    X1 = S.levels[1]
    diagonal = {lab[0] for lab in X1.labels if lab[0][0] == lab[0][1]}
    off = [lab for lab in X1.labels if lab[0][0] != lab[0][1]]
    assert diagonal == {(0, 0), (1, 1), (2, 2)} and len(X1.simplices(1)) == 3
    assert len(off) == 6
    assert not any(len(set(lab[0])) == 3 for lab in S.levels[2].labels)


def test_one_set_cover_gives_constant_space():
    K = circle()
    S = cech_space(CoveredComplex.trivial(K), 3)
    for p in range(4):
        assert [len(S.levels[p].simplices(k)) for k in range(2)] == [3, 3]


def test_boundary_of_4_simplex_star_cover():
    K = SimplicialComplex.from_facets([[v for v in range(5) if v != skip] for skip in range(5)])
    # closed facets as the cover sets: any four of them share exactly one vertex
    C = CoveredComplex.from_facets(K, [[[v for v in range(5) if v != skip]] for skip in range(5)])
    S = cech_space(C, 3)
    quads = {lab[0] for lab in S.levels[3].labels if len(set(lab[0])) == 4}
    assert len(quads) == 5 * 4 * 3 * 2


def test_swap_transformation_counts():
    two = SimplicialComplex.from_facets([["a"], ["b"]])
    A = GroupAction(cyclic_group(2), two, {0: {"a": "a", "b": "b"}, 1: {"a": "b", "b": "a"}})
    S = transformation_space(A, 2)
    assert [len(S.levels[p].simplices(0)) for p in range(3)] == [2, 4, 8]


def test_trivial_group_action_is_manifold_space():
    K = circle()
    A = GroupAction(cyclic_group(1), K, {0: {v: v for v in K.labels}})
    T = transformation_space(A, 3)
    M = manifold_space(K, 3)
    for p in range(4):
        assert [len(T.levels[p].simplices(k)) for k in range(3)] == [len(M.levels[p].simplices(k)) for k in range(3)]


def test_stack_dimension_examples():
    assert stack_dimension(nerve(pair_groupoid(["a", "b"]), 1)) == 0
    K = circle()
    A = GroupAction(cyclic_group(1), K, {0: {v: v for v in K.labels}})
    assert stack_dimension(transformation_space(A, 1)) == 1
    mixed = SimplicialComplex.from_facets([[0, 1], [2]])
    with pytest.raises(ValidationError):
        stack_dimension(manifold_space(mixed, 1))
