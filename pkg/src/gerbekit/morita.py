"""Morita morphisms between presented spaces, bitorsors, and cohomology comparison."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Hashable, Sequence

import numpy as np

from .cochains import CoefficientRing, pullback
from .errors import TruncationError, ValidationError
from .homology import cohomology
from .linalg import smith_normal_form
from .spaces import (CoveredComplex, FiniteGroupoid, SemiSimplicialSpace, SimplicialMap, SpaceMap, cech_space,
                     manifold_space, nerve, underlying_groupoid)

KINDS = ("refinement", "pullback", "explicit")


class MoritaMorphism(SpaceMap):
    """Level maps ``X_p -> Y_p`` with a surjective level-0 map and a cartesian arrow square."""

    def __init__(self, source, target, level_maps, kind: str = "explicit"):
        if kind not in KINDS:
            raise ValidationError(f"morphism kind must be one of {KINDS}")
        super().__init__(source, target, level_maps)
        self.kind = kind

    def violations(self) -> list:
        out = super().violations()
        if out:
            return out
        if not self.level_maps[0].is_surjective():
            out.append("level-0 map is not surjective on simplices")
        if self.source.is_groupoid_like() and self.target.is_groupoid_like() and self.truncation >= 1:
            out.extend(cartesian_violations(self))
        elif self.kind != "explicit":
            out.append(f"{self.kind} morphisms need nerve-type spaces on both sides")
        return out

    def check(self) -> "MoritaMorphism":
        problems = self.violations()
        if problems:
            raise ValidationError("not a Morita morphism", problems)
        return self


def cartesian_violations(m: SpaceMap) -> list:
    """Check ``X_1 = Y_1 x_{Y_0 x Y_0} (X_0 x X_0)`` on vertices and simplices."""
    X, Y = m.source, m.target
    X0, X1 = X.levels[0], X.levels[1]
    Y1 = Y.levels[1]
    f0, f1 = m.level_maps[0].vertex_map, m.level_maps[1].vertex_map
    xs, xt = X.faces[1][1].vertex_map, X.faces[1][0].vertex_map
    ys, yt = Y.faces[1][1].vertex_map, Y.faces[1][0].vertex_map
    out = []
    triples = {}
    for v in range(X1.num_vertices):
        key = (f1[v], xs[v], xt[v])
        if key in triples:
            out.append(f"arrows {X1.labels[triples[key]]!r} and {X1.labels[v]!r} have the same image and endpoints")
        triples[key] = v
    by_src = defaultdict(list)
    for a in range(X0.num_vertices):
        by_src[f0[a]].append(a)
    for y in range(Y1.num_vertices):
        for a in by_src[ys[y]]:
            for b in by_src[yt[y]]:
                if (y, a, b) not in triples:
                    out.append(f"no arrow of the source over {Y1.labels[y]!r} from {X0.labels[a]!r} to {X0.labels[b]!r}")
    if out:
        return out[:20]
    # simplexwise: a vertex set of X_1 spans a simplex iff its three projections do
    max_dim = max(Y1.dimension, X0.dimension)
    for s in X1.all_simplices():
        if len(s) > 1:
            a = tuple(sorted({f1[v] for v in s}))
            b = tuple(sorted({xs[v] for v in s}))
            c = tuple(sorted({xt[v] for v in s}))
            if a not in Y1 or b not in X0 or c not in X0:
                out.append(f"simplex {X1.simplex_labels(s)} has a non-simplex projection")
    # converse: every vertex set whose projections are simplices is a simplex of X_1
    for ysimp in Y1.all_simplices():
        if len(ysimp) < 2 or len(ysimp) - 1 > max_dim:
            continue
        fibers = [[triples[(y, a, b)] for a in by_src[ys[y]] for b in by_src[yt[y]] if (y, a, b) in triples]
                  for y in ysimp]
        for choice in product(*fibers):
            if len(set(choice)) != len(choice):
                continue
            b = tuple(sorted({xs[v] for v in choice}))
            c = tuple(sorted({xt[v] for v in choice}))
            if b in X0 and c in X0 and tuple(sorted(choice)) not in X1:
                out.append(f"vertices {[X1.labels[v] for v in choice]} project to simplices but are not a simplex")
    return out[:20]


# ---------------------------------------------------------------------------
# constructors


def _maps_from_label_fn(source: SemiSimplicialSpace, target: SemiSimplicialSpace, fn: Callable[[int, Hashable], Hashable]):
    P = min(source.truncation, target.truncation)
    return [SimplicialMap.from_labels(source.levels[p], target.levels[p], (lambda p: lambda lab: fn(p, lab))(p))
            for p in range(P + 1)]


@dataclass
class PullbackGroupoid:
    groupoid: FiniteGroupoid
    original: FiniteGroupoid
    cover_map: dict


def pullback_groupoid(G: FiniteGroupoid, objects: Sequence[Hashable], u: Callable | dict) -> PullbackGroupoid:
    """Groupoid over ``objects`` with arrows ``(a, x, b)``, ``s(x) = u(a)``, ``t(x) = u(b)``."""
    umap = dict(u) if isinstance(u, dict) else {a: u(a) for a in objects}
    objects = tuple(objects)
    if set(umap.values()) != set(G.objects) or set(umap) != set(objects):
        raise ValidationError("cover map must be a surjection onto the objects")
    arrows = [(a, x, b) for a in objects for x in G.arrows for b in objects
              if G.source[x] == umap[a] and G.target[x] == umap[b]]
    by_first = defaultdict(list)
    for arr in arrows:
        by_first[arr[0]].append(arr)
    compose = {}
    for (a, x, b) in arrows:
        for (b2, y, c) in by_first[b]:
            compose[((a, x, b), (b2, y, c))] = (a, G.compose[(x, y)], c)
    H = FiniteGroupoid(objects, arrows, {r: r[0] for r in arrows}, {r: r[2] for r in arrows}, compose,
                       name=f"pullback of {G.name}" if G.name else None)
    return PullbackGroupoid(H, G, umap)


def pullback_morphism(pb: PullbackGroupoid, P: int) -> MoritaMorphism:
    """Projection from the nerve of the pullback groupoid to the nerve of the original."""
    X = nerve(pb.groupoid, P)
    Y = nerve(pb.original, P)

    def fn(p, lab):
        if p == 0:
            return pb.cover_map[lab]
        return tuple(x for (_, x, _) in lab)

    return MoritaMorphism(X, Y, _maps_from_label_fn(X, Y, fn), kind="pullback")


def refinement_morphism(coarse: CoveredComplex, fine: CoveredComplex, index_map: Sequence[int], P: int) -> MoritaMorphism:
    """Cech space of a refining cover mapped to the Cech space of the coarse one."""
    if fine.total != coarse.total:
        raise ValidationError("covers live on different complexes")
    index_map = list(index_map)
    if len(index_map) != len(fine.sets):
        raise ValidationError("index map must assign a coarse set to every fine set")
    bad = [a for a, U in enumerate(fine.sets) if not U <= coarse.sets[index_map[a]]]
    if bad:
        raise ValidationError("not a refinement", [f"fine set {a} is not inside coarse set {index_map[a]}" for a in bad])
    X = cech_space(fine, P)
    Y = cech_space(coarse, P)

    def fn(p, lab):
        return (tuple(index_map[a] for a in lab[0]), lab[1])

    return MoritaMorphism(X, Y, _maps_from_label_fn(X, Y, fn), kind="refinement")


def identity_morphism(space: SemiSimplicialSpace) -> MoritaMorphism:
    return MoritaMorphism(space, space, [SimplicialMap.identity(lvl) for lvl in space.levels], kind="explicit")


def cech_to_manifold(C: CoveredComplex, P: int) -> MoritaMorphism:
    """Forget the cover: ``((i_0..i_p), v) -> v``."""
    X = cech_space(C, P)
    Y = manifold_space(C.total, P)
    return MoritaMorphism(X, Y, _maps_from_label_fn(X, Y, lambda p, lab: lab[1]), kind="explicit")


def collapse_morphism(source: SemiSimplicialSpace, target: SemiSimplicialSpace,
                      fn: Callable[[int, Hashable], Hashable], kind: str = "explicit") -> MoritaMorphism:
    """Morphism given by a label function ``fn(level, label)``."""
    return MoritaMorphism(source, target, _maps_from_label_fn(source, target, fn), kind=kind)


# ---------------------------------------------------------------------------
# comparison of cohomology


@dataclass
class DegreeComparison:
    degree: int
    source_group: str
    target_group: str
    matrix: list
    iso: bool


def _is_surjective_onto(F: np.ndarray, orders: list) -> bool:
    """Is ``Z^k -> (+) Z/orders`` given by the columns of ``F`` surjective?"""
    rows = len(orders)
    if rows == 0:
        return True
    rel = np.zeros((rows, rows), dtype=object)
    for i, o in enumerate(orders):
        rel[i, i] = o
    M = np.concatenate([np.asarray(F, dtype=object).reshape(rows, -1), rel], axis=1)
    S = smith_normal_form(M, transforms=False)
    d = S.diagonal
    return len(d) == rows and all(x == 1 for x in d)


def compare_degree(m: SpaceMap, ring, n: int) -> DegreeComparison:
    ring = CoefficientRing.parse(ring)
    Hs = cohomology(m.source, ring, n)
    Ht = cohomology(m.target, ring, n)
    gens = Ht.generator_cochains()
    cols = [Hs.coordinates(pullback(m, g)) for g in gens]
    F = [[cols[j][i] for j in range(len(cols))] for i in range(len(Hs.orders))]
    iso = Hs.orders == Ht.orders
    if iso:
        if ring.tag == "Q":
            k = len(Hs.orders)
            iso = k == 0 or smith_normal_form(_frac_to_int_matrix(F), transforms=False).rank == k
        elif ring.tag in ("Z", "Zmod"):
            iso = _is_surjective_onto(np.array(F, dtype=object), Hs.orders)
        else:
            iso = _qz_iso(m, Hs, Ht, F)
    if ring.tag == "QmodZ":
        # free Q/Z summands stand for z (x) Q/Z; report their integral coefficients
        F = _with_free_block(m, Hs, Ht, F)
    return DegreeComparison(n, Hs.describe(), Ht.describe(), [[_plain(v) for v in row] for row in F], iso)


def _plain(v):
    v = Fraction(v)
    return int(v) if v.denominator == 1 else v


def _frac_to_int_matrix(F):
    if not F or not F[0]:
        return np.zeros((len(F), 0), dtype=object)
    den = 1
    for row in F:
        for v in row:
            den = den * Fraction(v).denominator // np.gcd(den, Fraction(v).denominator)
    return np.array([[int(Fraction(v) * den) for v in row] for row in F], dtype=object)


def _free_block(m, Hs, Ht):
    free = [i for i, o in enumerate(Hs.orders) if o == 0]
    tfree = [j for j, o in enumerate(Ht.orders) if o == 0]
    gens = Ht.generator_cochains()
    rows = Hs.presentation.coordinate_rows
    block = np.zeros((len(free), len(tfree)), dtype=object)
    for b, j in enumerate(tfree):
        vec = pullback(m, gens[j]).to_vector()
        for a, i in enumerate(free):
            block[a, b] = int(np.asarray(rows[i], dtype=object) @ vec)
    return free, tfree, block


def _with_free_block(m, Hs, Ht, F):
    free, tfree, block = _free_block(m, Hs, Ht)
    F = [list(row) for row in F]
    for a, i in enumerate(free):
        for b, j in enumerate(tfree):
            F[i][j] = block[a, b]
    return F


def _qz_iso(m, Hs, Ht, F) -> bool:
    """``T + (Q/Z)^f`` on both sides: torsion block iso and free block of determinant +-1."""
    tors = [i for i, o in enumerate(Hs.orders) if o]
    free = [i for i, o in enumerate(Hs.orders) if o == 0]
    ttors = [j for j, o in enumerate(Ht.orders) if o]
    # torsion generators must land in the torsion part
    for j in ttors:
        if any(F[i][j] != 0 for i in free):
            return False
    T = np.array([[F[i][j] for j in ttors] for i in tors], dtype=object).reshape(len(tors), len(ttors))
    if not _is_surjective_onto(T, [Hs.orders[i] for i in tors]):
        return False
    if not free:
        return True
    # the free generators are integral cocycles; read their pullbacks in the lattice exactly
    _, _, block = _free_block(m, Hs, Ht)
    S = smith_normal_form(block, transforms=False)
    return S.rank == len(free) and all(d == 1 for d in S.diagonal)


def compare_cohomology(m: SpaceMap, ring, n_max: int) -> list:
    """Per-degree induced map ``H^n(target) -> H^n(source)`` and whether it is an isomorphism."""
    ring = CoefficientRing.parse(ring)
    P = min(m.source.truncation, m.target.truncation, m.truncation)
    if n_max + 1 > P:
        raise TruncationError(f"comparison up to degree {n_max} needs truncation {n_max + 1}")
    if isinstance(m, MoritaMorphism):
        m.check()
    return [compare_degree(m, ring, n) for n in range(n_max + 1)]


# ---------------------------------------------------------------------------
# bitorsors


@dataclass
class Bitorsor:
    """A set ``Q`` with a left ``X``-action along ``f`` and a right ``Y``-action along ``g``.

    ``x . q`` is defined iff ``t(x) = f(q)`` and lands in ``f^{-1}(s(x))``;
    ``q . y`` is defined iff ``g(q) = s(y)`` and lands in ``g^{-1}(t(y))``.
    """

    left: FiniteGroupoid
    right: FiniteGroupoid
    carrier: tuple
    f: dict
    g: dict
    left_action: dict
    right_action: dict = field(default_factory=dict)


def verify_bitorsor(B: Bitorsor) -> list:
    X, Y = B.left, B.right
    out = []
    Qs = list(B.carrier)
    if set(B.f) != set(Qs) or set(B.g) != set(Qs):
        return ["anchors must be defined on the whole carrier"]
    if set(B.f.values()) != set(X.objects):
        out.append("f is not surjective onto the left objects")
    if set(B.g.values()) != set(Y.objects):
        out.append("g is not surjective onto the right objects")
    if any(B.f[q] not in set(X.objects) for q in Qs) or any(B.g[q] not in set(Y.objects) for q in Qs):
        out.append("anchor values are not objects")
        return out
    carrier = set(Qs)
    for x in X.arrows:
        for q in Qs:
            defined = (x, q) in B.left_action
            if defined != (X.target[x] == B.f[q]):
                out.append(f"left action at ({x!r}, {q!r}) defined={defined}")
            elif defined:
                r = B.left_action[(x, q)]
                if r not in carrier or B.f[r] != X.source[x] or B.g[r] != B.g[q]:
                    out.append(f"left action at ({x!r}, {q!r}) has wrong anchors")
    for q in Qs:
        for y in Y.arrows:
            defined = (q, y) in B.right_action
            if defined != (B.g[q] == Y.source[y]):
                out.append(f"right action at ({q!r}, {y!r}) defined={defined}")
            elif defined:
                r = B.right_action[(q, y)]
                if r not in carrier or B.g[r] != Y.target[y] or B.f[r] != B.f[q]:
                    out.append(f"right action at ({q!r}, {y!r}) has wrong anchors")
    if out:
        return out
    L, R = B.left_action, B.right_action
    for q in Qs:
        if L[(X.identity[B.f[q]], q)] != q:
            out.append(f"left identity does not fix {q!r}")
        if R[(q, Y.identity[B.g[q]])] != q:
            out.append(f"right identity does not fix {q!r}")
    for (x, x2), xx in X.compose.items():
        for q in Qs:
            if X.target[x2] == B.f[q] and L[(xx, q)] != L[(x, L[(x2, q)])]:
                out.append(f"left action law fails for ({x!r}, {x2!r}, {q!r})")
    for (y, y2), yy in Y.compose.items():
        for q in Qs:
            if B.g[q] == Y.source[y] and R[(q, yy)] != R[(R[(q, y)], y2)]:
                out.append(f"right action law fails for ({q!r}, {y!r}, {y2!r})")
    for (x, q), xq in L.items():
        for y in Y.arrows:
            if Y.source[y] == B.g[q] and R[(xq, y)] != L[(x, R[(q, y)])]:
                out.append(f"actions do not commute at ({x!r}, {q!r}, {y!r})")
    # principality: Y acts simply transitively on fibers of f, X on fibers of g
    for q in Qs:
        for q2 in Qs:
            if B.f[q] == B.f[q2]:
                hits = [y for y in Y.arrows if (q, y) in R and R[(q, y)] == q2]
                if len(hits) != 1:
                    out.append(f"{len(hits)} right arrows take {q!r} to {q2!r} (need exactly 1)")
            if B.g[q] == B.g[q2]:
                hits = [x for x in X.arrows if (x, q) in L and L[(x, q)] == q2]
                if len(hits) != 1:
                    out.append(f"{len(hits)} left arrows take {q!r} to {q2!r} (need exactly 1)")
    return out


def identity_bitorsor(G: FiniteGroupoid) -> Bitorsor:
    """``G_1`` with left and right multiplication."""
    Qs = tuple(G.arrows)
    L = {(x, q): G.compose[(x, q)] for x in G.arrows for q in G.arrows if (x, q) in G.compose}
    R = {(q, y): G.compose[(q, y)] for q in G.arrows for y in G.arrows if (q, y) in G.compose}
    return Bitorsor(G, G, Qs, {q: G.source[q] for q in Qs}, {q: G.target[q] for q in Qs}, L, R)


def compose_bitorsors(B1: Bitorsor, B2: Bitorsor) -> Bitorsor:
    """``(Q x_{Y_0} Q') / Y_1`` with ``(q . y, q') ~ (q, y . q')``."""
    Y = B1.right
    if Y is not B2.left and (set(Y.arrows) != set(B2.left.arrows) or set(Y.objects) != set(B2.left.objects)):
        raise ValidationError("middle groupoids differ")
    pairs = [(q, q2) for q in B1.carrier for q2 in B2.carrier if B1.g[q] == B2.f[q2]]
    parent = {p: p for p in pairs}

    def find(p):
        while parent[p] != p:
            parent[p] = parent[parent[p]]
            p = parent[p]
        return p

    for q in B1.carrier:
        for y in Y.arrows:
            if B1.g[q] != Y.source[y]:
                continue
            for q2 in B2.carrier:
                if Y.target[y] == B2.f[q2]:
                    a = find((B1.right_action[(q, y)], q2))
                    b = find((q, B2.left_action[(y, q2)]))
                    if a != b:
                        parent[max(a, b, key=repr)] = min(a, b, key=repr)
    classes = defaultdict(list)
    for p in pairs:
        classes[find(p)].append(p)
    reps = sorted(classes, key=repr)
    rep_of = {p: find(p) for p in pairs}
    f = {r: B1.f[r[0]] for r in reps}
    g = {r: B2.g[r[1]] for r in reps}
    L = {}
    for x in B1.left.arrows:
        for r in reps:
            if B1.left.target[x] == f[r]:
                L[(x, r)] = rep_of[(B1.left_action[(x, r[0])], r[1])]
    R = {}
    for r in reps:
        for z in B2.right.arrows:
            if g[r] == B2.right.source[z]:
                R[(r, z)] = rep_of[(r[0], B2.right_action[(r[1], z)])]
    return Bitorsor(B1.left, B2.right, tuple(reps), f, g, L, R)


def morphism_bitorsor(m: SpaceMap) -> Bitorsor:
    """Bitorsor ``X_0 x_{Y_0} Y_1`` attached to a morphism of nerve-type spaces."""
    X = underlying_groupoid(m.source)
    Y = underlying_groupoid(m.target)
    X0, Y1 = m.source.levels[0], m.target.levels[1]
    Y0 = m.target.levels[0]
    f0 = {X0.labels[i]: Y0.labels[j] for i, j in enumerate(m.level_maps[0].vertex_map)}
    f1 = {m.source.levels[1].labels[i]: Y1.labels[j] for i, j in enumerate(m.level_maps[1].vertex_map)}
    Qs = tuple((a, y) for a in X.objects for y in Y.arrows if Y.source[y] == f0[a])
    L = {}
    for x in X.arrows:
        for (a, y) in Qs:
            if X.target[x] == a:
                L[(x, (a, y))] = (X.source[x], Y.compose[(f1[x], y)])
    R = {}
    for (a, y) in Qs:
        for y2 in Y.arrows:
            if Y.target[y] == Y.source[y2]:
                R[((a, y), y2)] = (a, Y.compose[(y, y2)])
    return Bitorsor(X, Y, Qs, {q: q[0] for q in Qs}, {q: Y.target[q[1]] for q in Qs}, L, R)
