"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Every criterion loads a fresh copy of the corpus so that its timing includes
all matrix assembly and Smith normal forms (nothing is reused from caches
filled by other tests).
"""

from __future__ import annotations

import itertools
import random
import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np
import pytest

from gerbekit import io
from gerbekit.cochains import (Q, Z, Cochain, QmodZ, TotalCochain, Zmod, boundary_partial, coboundary_d, cup,
                               pullback, random_cochain, random_total_cochain, total_delta)
from gerbekit.errors import ExtensionError, NonIntegralClassError, PrequantizationObstruction
from gerbekit.gerbes import (BundleCocycle, GerbeCocycle, PseudoConnection, associator, build_extension, chern_class,
                             dd_class, is_flat, prequantize_bundle, prequantize_gerbe, pullback_cocycle, tau_maps,
                             tensor, validate_bundle, validate_gerbe)
from gerbekit.homology import bockstein, cohomology, is_coboundary
from gerbekit.linalg import smith_normal_form
from gerbekit.morita import compare_cohomology, identity_morphism

RINGS = (Z, Q, Zmod(2), Zmod(3), QmodZ)


@contextmanager
def criterion(log, number: int, title: str, limit: float | None = None):
    """Time the body, record one PASS/FAIL line, and fail on overtime."""
    state = {"ok": False, "note": ""}
    start = time.perf_counter()
    try:
        yield state
        state["ok"] = True
    finally:
        elapsed = time.perf_counter() - start
        within = limit is None or elapsed < limit
        ok = state["ok"] and within
        budget = f"{elapsed:.1f} s" + (f" / limit {limit:.0f} s" if limit else "")
        note = f"; {state['note']}" if state["note"] else ""
        line = f"criterion {number} {'PASS' if ok else 'FAIL'}  {title} ({budget}{note})"
        log.append(line)
        print(line)
    assert within, f"criterion {number} took {elapsed:.1f} s, limit {limit} s"


def fresh():
    return io.load([], include_corpus=True)


def reduce_coords(coords, orders):
    return tuple(c % o if o else c for c, o in zip(coords, orders))


def random_gerbe(space, rng: random.Random) -> GerbeCocycle:
    """A random valid gerbe: random Q/Z class plus a random coboundary."""
    H2 = cohomology(space, QmodZ, 2)
    acc = TotalCochain(space, 2, QmodZ)
    for order, gen in zip(H2.orders, H2.generator_cochains()):
        if order == 0:
            acc = acc + (gen.cast(Q) * Fraction(rng.randint(0, 11), 12)).cast(QmodZ)
        else:
            acc = acc + gen * rng.randrange(order)
    acc = acc + total_delta(random_total_cochain(space, 1, QmodZ, rng))
    G = GerbeCocycle(acc)
    assert validate_gerbe(G) == []
    return G


# ---------------------------------------------------------------------------


def test_criterion_1_differential_algebra(acceptance_log):
    ws = fresh()
    checks = 0
    with criterion(acceptance_log, 1, "differential algebra: dd=0, d and boundary commute, cup unit/assoc/Leibniz",
                   10) as st:
        for name in ws.names("spaces"):
            S = ws.get("spaces", name)
            P = S.truncation
            one = TotalCochain.from_cochain(Cochain.constant(S, 0, Z, 1))
            for ring in RINGS:
                rng = random.Random(f"{name}/{ring}")
                # Q/Z has no self-pairing: its cups take integral left factors
                left = Z if ring == QmodZ else ring
                for _ in range(50):
                    da = rng.randint(0, P - 1)
                    dc = rng.randint(0, P - 1 - da)
                    db = rng.randint(0, P - da - dc)
                    A = random_total_cochain(S, da, left, rng)
                    B = random_total_cochain(S, db, left, rng)
                    C = random_total_cochain(S, dc, ring, rng)
                    for X in (A, B, C):
                        if X.degree + 2 <= P:
                            assert total_delta(total_delta(X)).is_zero()
                    for comp in C.components.values():
                        if comp.p + 1 <= P:
                            assert coboundary_d(boundary_partial(comp)) == boundary_partial(coboundary_d(comp))
                    assert cup(one, C) == C and cup(C, one) == C
                    assert cup(cup(A, B), C) == cup(A, cup(B, C))
                    lhs = total_delta(cup(A, C))
                    rhs = cup(total_delta(A), C) + cup(A, total_delta(C)) * (-1) ** da
                    assert lhs == rhs
                    checks += 1
        st["note"] = f"{checks} samples, 3 cochains each, {len(ws.names('spaces'))} spaces x {len(RINGS)} rings"


def test_criterion_2_classical_cohomology(acceptance_log):
    ws = fresh()
    with criterion(acceptance_log, 2, "cohomology of BZ/n and of circle/sphere Cech spaces", 60):
        for n in (2, 3, 4):
            S = ws.get("spaces", f"bz{n}")
            got = [cohomology(S, Z, k).describe() for k in range(5)]
            assert got == ["Z", "0", f"Z/{n}", "0", f"Z/{n}"], (n, got)
        for name in ("circle-cech", "hexagon-cech"):
            assert [cohomology(ws.get("spaces", name), Z, k).describe() for k in range(4)] == ["Z", "Z", "0", "0"]
        assert [cohomology(ws.get("spaces", "s2-cech"), Z, k).describe() for k in range(4)] == ["Z", "0", "Z", "0"]


MORITA_PAIRS = ("hexagon-refinement", "circle3-forget", "doubling", "swap-collapse")


def test_criterion_3_morita_invariance(acceptance_log):
    ws = fresh()
    with criterion(acceptance_log, 3, "Morita invariance of cohomology for corpus morphisms", 120) as st:
        for name in MORITA_PAIRS:
            m = ws.get("morphisms", name)
            for ring in RINGS:
                comps = compare_cohomology(m, ring, 3)
                bad = [(c.degree, c.source_group, c.target_group) for c in comps if not c.iso]
                assert not bad, (name, str(ring), bad)
        st["note"] = f"{len(MORITA_PAIRS)} morphisms x {len(RINGS)} rings x degrees 0-3"


def test_criterion_4_dd_via_pseudo_curvature(acceptance_log):
    ws = fresh()
    count = 0
    with criterion(acceptance_log, 4, "DD class via pseudo-curvature equals Bockstein and ignores the lift") as st:
        for name in ws.names("spaces"):
            S = ws.get("spaces", name)
            H3 = cohomology(S, Z, 3)
            rng = random.Random(name)
            for _ in range(20):
                G = random_gerbe(S, rng)
                cc = dd_class(G)
                assert cc.coordinates == H3.coordinates(bockstein(G.cocycle))
                shift = random_total_cochain(S, 2, Z, rng).cast(Q)
                other = dd_class(G, PseudoConnection(G.cocycle.lift() + shift))
                assert other.coordinates == cc.coordinates
                count += 1
        st["note"] = f"{count} random gerbes"


def test_criterion_5_dd_functoriality(acceptance_log):
    ws = fresh()
    with criterion(acceptance_log, 5, "DD additivity, naturality, Heisenberg and BZ/2 examples"):
        rng = random.Random(5)
        for name in ws.names("spaces"):
            S = ws.get("spaces", name)
            for _ in range(5):
                G1, G2 = random_gerbe(S, rng), random_gerbe(S, rng)
                c1, c2 = dd_class(G1), dd_class(G2)
                total = dd_class(tensor(G1, G2))
                orders = total.group.orders
                expect = reduce_coords([a + b for a, b in zip(c1.coordinates, c2.coordinates)], orders)
                assert reduce_coords(total.coordinates, orders) == expect
                ident = identity_morphism(S)
                assert dd_class(pullback_cocycle(ident, G1)).coordinates == c1.coordinates
        for mname in MORITA_PAIRS:
            m = ws.get("morphisms", mname)
            H3s = cohomology(m.source, Z, 3)
            for _ in range(5):
                G = random_gerbe(m.target, rng)
                pulled = dd_class(pullback_cocycle(m, G))
                assert pulled.coordinates == H3s.coordinates(pullback(m, dd_class(G).curvature.cochain))
        heis = dd_class(ws.get("gerbes", "heisenberg"))
        assert heis.group.describe() == "Z/2" and heis.coordinates == (1,)
        half = dd_class(ws.get("gerbes", "bz2-half"))
        assert half.is_zero
        exact, witness = is_coboundary(half.curvature.cochain)
        assert exact and total_delta(witness) == half.curvature.cochain


def test_criterion_6_extension_iff_associator_vanishes(acceptance_log):
    ws = fresh()
    with criterion(acceptance_log, 6, "extension exists iff associator vanishes; BZ/2 half gives Z/4", 30) as st:
        successes = 0
        for m, name, samples in ((2, "bz2", None), (3, "bz3", 300)):
            S = ws.get("spaces", name)
            size = len(S.levels[2].simplices(0))
            grid = itertools.product(range(m), repeat=size)
            if samples is not None:
                rng = random.Random(6)
                pool = [tuple(rng.randrange(m) for _ in range(size)) for _ in range(samples)]
                # plant cocycles so both outcomes occur
                H2 = cohomology(S, QmodZ, 2)
                for _ in range(30):
                    c = total_delta(TotalCochain.from_cochain(random_cochain(S, 0, 1, QmodZ, rng)))[2]
                    c = c + H2.generator_cochains()[0][2] * rng.randrange(3) if H2.orders else c
                    pool.append(tuple(int(v * m) % m for v in c.data))
                grid = pool
            for vals in grid:
                c = Cochain(S, 0, 2, QmodZ, [Fraction(v, m) for v in vals])
                assoc_zero = associator(c).is_zero()
                try:
                    R = build_extension(c, m)
                    built = True
                except ExtensionError:
                    built = False
                assert built == assoc_zero, (name, vals)
                if built:
                    successes += 1
                    Rg = R.groupoid
                    for obj in Rg.objects:
                        for k in R.kernel(obj):
                            for x in Rg.arrows:
                                if Rg.source[x] == obj and Rg.target[x] == obj:
                                    assert Rg.compose[(k, x)] == Rg.compose[(x, k)]
                    assert R.central
        R = build_extension(ws.get("gerbes", "bz2-half"))
        assert R.order == 4 and R.is_cyclic()
        st["note"] = f"{successes} associative cochains checked for centrality"


def test_criterion_7_prequantization_round_trip(acceptance_log):
    ws = fresh()
    with criterion(acceptance_log, 7, "prequantization round trips in degrees 2 and 3") as st:
        inputs = []
        for name in ws.names("cochains"):
            w = ws.get("cochains", name)
            if w.ring.tag in ("Z", "Q") and w.degree in (2, 3):
                inputs.append((name, w))
        for section, fn in (("bundles", chern_class), ("gerbes", dd_class)):
            for name in ws.names(section):
                inputs.append((f"curvature of {name}", fn(ws.get(section, name)).curvature.cochain))
        assert {w.degree for _, w in inputs} == {2, 3}
        for name, w in inputs:
            res = (prequantize_bundle if w.degree == 2 else prequantize_gerbe)(w)
            out = (chern_class if w.degree == 2 else dd_class)(res.cocycle)
            assert out.coordinates == out.group.coordinates(res.integral_representative), name
            if w.ring == Z:
                assert out.coordinates == out.group.coordinates(w), name
        # non-integral input is rejected
        for space, degree in (("s2-cech", 2), ("s3-id", 3)):
            S = ws.get("spaces", space)
            gen = cohomology(S, Z, degree).generator_cochains()[0]
            half = gen.cast(Q) * Fraction(1, 2)
            with pytest.raises(NonIntegralClassError):
                (prequantize_bundle if degree == 2 else prequantize_gerbe)(half)
            # an integral class of infinite order has no finite-model prequantization
            with pytest.raises(PrequantizationObstruction):
                (prequantize_bundle if degree == 2 else prequantize_gerbe)(gen)
        # two outputs for one input differ by a flat bundle
        rng = random.Random(7)
        sampled = 0
        for space in ("bz2", "bz3", "circle-cech", "s2-cech"):
            S = ws.get("spaces", space)
            H1 = cohomology(S, Q, 1)
            for name, w in [(n, x) for n, x in inputs if x.degree == 2 and x.space == S] or [(space, None)]:
                if w is None:
                    w = total_delta(random_total_cochain(S, 1, Z, rng))
                base = prequantize_bundle(w)
                for _ in range(5):
                    twist = total_delta(random_total_cochain(S, 0, Q, rng))
                    for gen in H1.generator_cochains():
                        twist = twist + gen * Fraction(rng.randint(-5, 5), rng.randint(1, 4))
                    other = prequantize_bundle(w, twist)
                    diff = BundleCocycle(other.cocycle.cocycle - base.cocycle.cocycle)
                    assert validate_bundle(diff) == []
                    assert is_flat(diff).flat
                    sampled += 1
        st["note"] = f"{len(inputs)} integral inputs, {sampled} twisted pairs"


def test_criterion_8_tau_exactness(acceptance_log):
    ws = fresh()
    with criterion(acceptance_log, 8, "tau sequence exact for n=2,3 on point, BZ/2, circle Cech", 120):
        for name in ("point", "bz2", "circle-cech"):
            for n in (2, 3):
                rep = tau_maps(ws.get("spaces", name), n)
                assert rep.exact, (name, n, rep.nodes)


def test_criterion_9_smith_normal_form(acceptance_log):
    with criterion(acceptance_log, 9, "Smith normal form on 200 random matrices", 30):
        rng = np.random.default_rng(9)
        for _ in range(200):
            m, n = rng.integers(1, 61, size=2)
            A = rng.integers(-9, 10, size=(m, n))
            S = smith_normal_form(A)
            U, V, D = (np.asarray(x, dtype=object) for x in (S.U, S.V, S.D))
            assert (U @ np.asarray(A, dtype=object) @ V == D).all()
            assert (U @ np.asarray(S.Uinv, dtype=object) == np.eye(m, dtype=int)).all()
            assert (V @ np.asarray(S.Vinv, dtype=object) == np.eye(n, dtype=int)).all()
            off = D.copy()
            for i in range(min(m, n)):
                off[i, i] = 0
            assert not off.any()
            d = S.diagonal
            assert all(x >= 0 for x in d)
            for a, b in zip(d, d[1:]):
                assert (a == 0 and b == 0) or (a != 0 and b % a == 0)
        assert smith_normal_form(np.array([[2, 4], [6, 8]])).diagonal == [2, 4]


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q", "-s"]))
