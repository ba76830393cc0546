import random
from fractions import Fraction
from math import gcd

import pytest

from gerbekit.cochains import Q, Z, Cochain, QmodZ, TotalCochain, Zmod, delta_matrix, random_total_cochain, \
    total_delta, total_dimension
from gerbekit.errors import NotACocycleError, TruncationError, ValidationError
from gerbekit.homology import bockstein, cohomology, is_coboundary, is_integral_class, simplicial_cohomology
from gerbekit.linalg import rank_over_prime
from gerbekit.spaces import (CoveredComplex, SimplicialComplex, cech_space, cyclic_group, manifold_space, nerve,
                             product_group)


def sphere(dim):
    return SimplicialComplex.from_facets([[v for v in range(dim + 2) if v != skip] for skip in range(dim + 2)])


BZ = {n: nerve(cyclic_group(n), 5) for n in (2, 3, 4)}
V4 = nerve(product_group(2, 2), 4)
S2 = manifold_space(sphere(2), 4)
CIRCLE = cech_space(CoveredComplex.from_facets(SimplicialComplex.from_facets([[0, 1], [1, 2], [0, 2]]),
                                               [[[0, 1], [1, 2]], [[0, 2]]]), 4)


def mod_p_dimension(space, p, n):
    # dim H^n over GF(p) from ranks alone, no Smith form involved
    dim = total_dimension(space, n)
    r_out = rank_over_prime(delta_matrix(space, n), p)
    r_in = rank_over_prime(delta_matrix(space, n - 1), p) if n else 0
    return dim - r_out - r_in


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("degree", [0, 1, 2, 3])
def test_integral_cohomology_of_cyclic_groups(n, degree):
    H = cohomology(BZ[n], Z, degree)
    if degree == 0:
        assert (H.free_rank, H.torsion) == (1, [])
    elif degree % 2:
        assert H.is_trivial
    else:
        assert (H.free_rank, H.torsion) == (0, [n])


@pytest.mark.parametrize("p", [2, 3])
@pytest.mark.parametrize("degree", [0, 1, 2, 3])
def test_mod_p_cohomology_by_ranks(p, degree):
    H = cohomology(BZ[p], Zmod(p), degree)
    assert H.order() == p
    assert p ** mod_p_dimension(BZ[p], p, degree) == H.order()


@pytest.mark.parametrize("space", [BZ[2], BZ[4], V4, CIRCLE, S2], ids=["bz2", "bz4", "v4", "circle", "s2"])
@pytest.mark.parametrize("degree", [0, 1, 2])
def test_universal_coefficients(space, degree):
    Hn = cohomology(space, Z, degree)
    Hn1 = cohomology(space, Z, degree + 1)
    assert cohomology(space, Q, degree).free_rank == Hn.free_rank
    for p in (2, 3):
        Hp = cohomology(space, Zmod(p), degree)
        expected = Hn.free_rank + sum(1 for t in Hn.torsion if t % p == 0) + sum(1 for t in Hn1.torsion if t % p == 0)
        assert Hp.free_rank + len(Hp.torsion) == expected
        assert mod_p_dimension(space, p, degree) == expected
    if degree + 2 <= space.truncation:
        Hq = cohomology(space, QmodZ, degree)
        assert Hq.free_rank == Hn.free_rank
        assert Hq.torsion == Hn1.torsion


def test_v4_integral_cohomology():
    assert cohomology(V4, Z, 2).torsion == [2, 2]
    assert cohomology(V4, Z, 3).torsion == [2]


@pytest.mark.parametrize("dim", [1, 2])
def test_manifold_space_matches_simplicial_cohomology(dim):
    K = sphere(dim)
    X = manifold_space(K, dim + 2)
    for k in range(dim + 1):
        a = simplicial_cohomology(K, Z, k)
        b = cohomology(X, Z, k)
        assert (a.free_rank, a.torsion) == (b.free_rank, b.torsion)
    assert cohomology(X, Z, dim).free_rank == 1


def test_cech_circle_matches_circle():
    assert [cohomology(CIRCLE, Z, n).free_rank for n in range(3)] == [1, 1, 0]


def test_truncation_guard():
    with pytest.raises(TruncationError):
        cohomology(CIRCLE, Z, 4)
    with pytest.raises(ValidationError):
        cohomology(CIRCLE, Z, -1)


def test_coordinates_are_invariant_under_coboundaries():
    rng = random.Random(5)
    H = cohomology(BZ[4], Z, 2)
    for coords in H.elements():
        z = TotalCochain.from_vector(BZ[4], 2, Z, H.element(coords))
        y = random_total_cochain(BZ[4], 1, Z, rng)
        assert H.coordinates(z + total_delta(y)) == tuple(coords)


def test_is_coboundary_returns_primitive():
    rng = random.Random(2)
    y = random_total_cochain(CIRCLE, 1, Q, rng)
    ok, prim = is_coboundary(total_delta(y))
    assert ok and total_delta(prim) == total_delta(y)
    gen = cohomology(CIRCLE, Z, 1).generators[0]
    assert is_coboundary(gen) == (False, None)


def test_non_cocycle_rejected():
    c = TotalCochain.from_cochain(Cochain.constant(BZ[2], 1, Z, 1))
    with pytest.raises(NotACocycleError):
        is_coboundary(c)


def test_bockstein_of_characters():
    # the character a -> a/n generates H^1(BZ/n; Q/Z) and maps to the generator of H^2(BZ/n; Z)
    for n in (2, 3, 4):
        X = BZ[n]
        chi = Cochain(X, 0, 1, QmodZ, [Fraction(a, n) for a in range(n)])
        b = bockstein(TotalCochain.from_cochain(chi))
        H = cohomology(X, Z, 2)
        (coord,) = H.coordinates(b)
        assert gcd(coord, n) == 1


def test_bockstein_rejects_non_qmodz():
    with pytest.raises(ValidationError):
        bockstein(TotalCochain.zero(BZ[2], 1, Z))


def test_integrality():
    X = S2
    gen = cohomology(X, Z, 2).generators[0].cast(Q)
    half = gen * Fraction(1, 2)
    assert not is_integral_class(half).integral
    rng = random.Random(11)
    y = random_total_cochain(X, 1, Q, rng)
    res = is_integral_class(gen + total_delta(y))
    assert res.integral
    assert res.representative.cast(Q) + total_delta(res.correction) == gen + total_delta(y)
    # on BZ/2 every rational 2-class is trivial, so a half-integral cocycle is integral
    carry = cohomology(BZ[2], Z, 2).generators[0].cast(Q) * Fraction(1, 2)
    assert is_integral_class(carry).integral


@pytest.mark.parametrize("ring", [Z, Q, Zmod(2), QmodZ], ids=str)
def test_point_cohomology(ring):
    P = nerve(cyclic_group(1), 4)
    H0 = cohomology(P, ring, 0)
    if ring.tag == "Zmod":
        assert (H0.free_rank, H0.torsion) == (0, [ring.n])
    else:
        assert (H0.free_rank, H0.torsion) == (1, [])
    assert all(cohomology(P, ring, n).is_trivial for n in (1, 2))


def test_quarter_is_not_a_cocycle_on_bz2():
    b = TotalCochain.from_cochain(Cochain(BZ[2], 0, 1, QmodZ, [0, Fraction(1, 4)]))
    assert not total_delta(b).is_zero()
    X2 = BZ[2].levels[2]
    assert total_delta(b)[2][(X2.vertex((1, 1)),)] == Fraction(1, 2)
    with pytest.raises(NotACocycleError):
        bockstein(b)


def test_bockstein_of_integer_valued_cocycle_is_zero():
    rng = random.Random(8)
    z = total_delta(random_total_cochain(CIRCLE, 0, Z, rng)) + cohomology(CIRCLE, Z, 1).generators[0]
    assert bockstein(z.cast(QmodZ)).is_zero()


@pytest.mark.parametrize("n", [2, 3, 4])
def test_bockstein_is_the_carry_cocycle(n):
    X = BZ[n]
    chi = TotalCochain.from_cochain(Cochain(X, 0, 1, QmodZ, [Fraction(k, n) for k in range(n)]))
    carry = bockstein(chi)[2]
    X2 = X.levels[2]
    for (i,), v in zip(X2.simplices(0), carry.data):
        g, h = X2.labels[i]
        assert v == (g + h - (g + h) % n) // n
    assert cohomology(X, Z, 2).coordinates(bockstein(chi)) != (0,)


def test_bockstein_is_independent_of_the_lift():
    rng = random.Random(9)
    X = BZ[3]
    chi = TotalCochain.from_cochain(Cochain(X, 0, 1, QmodZ, [0, Fraction(1, 3), Fraction(2, 3)]))
    lift = chi.lift() + random_total_cochain(X, 1, Z, rng).cast(Q)
    diff = total_delta(lift).cast(Z) - bockstein(chi)
    assert is_coboundary(diff)[0]


def test_integrality_examples():
    gen = cohomology(CIRCLE, Z, 1).generators[0]
    assert is_integral_class(gen).integral
    assert not is_integral_class(gen.cast(Q) * Fraction(1, 2)).integral
    rng = random.Random(10)
    res = is_integral_class(total_delta(random_total_cochain(CIRCLE, 0, Q, rng)))
    assert res.integral and res.representative.is_zero()
