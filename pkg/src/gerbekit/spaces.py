"""Finite simplicial complexes and semi-simplicial spaces built from them.

A semi-simplicial space here is a finite truncation ``X_0, ..., X_P`` of
simplicial complexes with face maps ``d_i: X_p -> X_{p-1}``.  Constructors
turn finite groupoids (nerves), covers (Cech spaces), group actions and
plain complexes into such spaces.

Face convention, used everywhere downstream: on ``X_1`` we have ``d_0 = t``
and ``d_1 = s``; on composable tuples ``d_0`` drops the first arrow,
``d_p`` drops the last one and ``d_i`` (``0 < i < p``) composes
``x_i x_{i+1}``.
"""

from __future__ import annotations

from collections import defaultdict
from itertools import combinations, product
from typing import Any, Callable, Hashable, Iterable, Sequence

from .errors import ValidationError

Simplex = tuple  # sorted tuple of vertex indices


def _sorted_labels(labels: Iterable[Hashable]) -> list:
    labels = list(dict.fromkeys(labels))
    try:
        return sorted(labels)
    except TypeError:
        return sorted(labels, key=repr)


def permutation_sign(seq: Sequence[int]) -> int:
    sign = 1
    seq = list(seq)
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


class SimplicialComplex:
    """A finite abstract simplicial complex with a fixed vertex order.

    Vertices are stored as indices ``0..n-1``; ``labels[i]`` is the
    user-facing name of vertex ``i``.  Simplices are sorted index tuples, so
    the vertex order induces every orientation.
    """

    __slots__ = ("labels", "_by_dim", "_index", "_label_index", "_hash")

    def __init__(self, labels: Sequence[Hashable], simplices: Iterable[Iterable[int]] = ()):
        self.labels = tuple(labels)
        self._label_index = {lab: i for i, lab in enumerate(self.labels)}
        if len(self._label_index) != len(self.labels):
            raise ValidationError("duplicate vertex labels")
        n = len(self.labels)
        buckets: dict[int, set] = defaultdict(set)
        for i in range(n):
            buckets[0].add((i,))
        for s in simplices:
            s = tuple(sorted(set(s)))
            if not s:
                continue
            if s[0] < 0 or s[-1] >= n:
                raise ValidationError(f"simplex {s} uses an unknown vertex")
            buckets[len(s) - 1].add(s)
        top = max(buckets) if n else -1
        self._by_dim = tuple(tuple(sorted(buckets.get(k, ()))) for k in range(top + 1))
        self._index = tuple({s: i for i, s in enumerate(level)} for level in self._by_dim)
        self._hash = None

    @classmethod
    def from_facets(cls, facets: Iterable[Iterable[Hashable]], vertices: Sequence[Hashable] | None = None):
        """Build the closure of ``facets`` (given by vertex labels)."""
        facets = [tuple(f) for f in facets]
        if vertices is None:
            vertices = _sorted_labels(v for f in facets for v in f)
        index = {lab: i for i, lab in enumerate(vertices)}
        simplices = set()
        for f in facets:
            idx = sorted({index[v] for v in f})
            for k in range(1, len(idx) + 1):
                simplices.update(combinations(idx, k))
        return cls(vertices, simplices)

    @classmethod
    def discrete(cls, labels: Sequence[Hashable]):
        return cls(labels, ())

    @property
    def dimension(self) -> int:
        return len(self._by_dim) - 1

    @property
    def num_vertices(self) -> int:
        return len(self.labels)

    def simplices(self, k: int) -> tuple:
        if 0 <= k < len(self._by_dim):
            return self._by_dim[k]
        return ()

    def simplex_index(self, k: int) -> dict:
        if 0 <= k < len(self._index):
            return self._index[k]
        return {}

    def all_simplices(self):
        for level in self._by_dim:
            yield from level

    def __contains__(self, simplex) -> bool:
        simplex = tuple(simplex)
        return simplex in self.simplex_index(len(simplex) - 1)

    def vertex(self, label: Hashable) -> int:
        return self._label_index[label]

    def has_label(self, label: Hashable) -> bool:
        return label in self._label_index

    def simplex_labels(self, simplex: Simplex) -> tuple:
        return tuple(self.labels[v] for v in simplex)

    def simplex_from_labels(self, labels: Iterable[Hashable]) -> Simplex:
        return tuple(sorted(self._label_index[lab] for lab in labels))

    def maximal_simplices(self) -> list:
        faces_of_bigger = set()
        for k in range(1, len(self._by_dim)):
            for s in self._by_dim[k]:
                faces_of_bigger.update(combinations(s, k))
        return [s for s in self.all_simplices() if s not in faces_of_bigger]

    def is_pure(self) -> bool:
        dims = {len(s) - 1 for s in self.maximal_simplices()}
        return len(dims) <= 1

    def violations(self) -> list[str]:
        out = []
        for k in range(1, len(self._by_dim)):
            lower = self._index[k - 1]
            for s in self._by_dim[k]:
                for face in combinations(s, k):
                    if face not in lower:
                        out.append(f"face {self.simplex_labels(face)} of {self.simplex_labels(s)} missing")
        return out

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, SimplicialComplex):
            return NotImplemented
        return self.labels == other.labels and self._by_dim == other._by_dim

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.labels, self._by_dim))
        return self._hash

    def __repr__(self):
        counts = [len(level) for level in self._by_dim]
        return f"SimplicialComplex(vertices={self.num_vertices}, f-vector={counts})"


def point_complex(label: Hashable = "*") -> SimplicialComplex:
    return SimplicialComplex([label])


class SimplicialMap:
    """A vertex map between complexes; orientation signs come from sorting."""

    __slots__ = ("source", "target", "vertex_map")

    def __init__(self, source: SimplicialComplex, target: SimplicialComplex, vertex_map: Sequence[int]):
        self.source = source
        self.target = target
        self.vertex_map = tuple(vertex_map)
        if len(self.vertex_map) != source.num_vertices:
            raise ValidationError("vertex map has the wrong length")

    @classmethod
    def from_labels(cls, source, target, fn: Callable[[Hashable], Hashable]):
        return cls(source, target, [target.vertex(fn(lab)) for lab in source.labels])

    @classmethod
    def identity(cls, complex_: SimplicialComplex):
        return cls(complex_, complex_, range(complex_.num_vertices))

    def image(self, simplex: Simplex):
        """Return ``(sorted_image, sign)`` or ``None`` if the image is degenerate."""
        img = [self.vertex_map[v] for v in simplex]
        srt = sorted(img)
        for a, b in zip(srt, srt[1:]):
            if a == b:
                return None
        if img == srt:
            return tuple(srt), 1
        return tuple(srt), permutation_sign(img)

    def compose(self, other: "SimplicialMap") -> "SimplicialMap":
        """``self o other``."""
        return SimplicialMap(other.source, self.target, [self.vertex_map[v] for v in other.vertex_map])

    def violations(self) -> list[str]:
        out = []
        for s in self.source.all_simplices():
            img = tuple(sorted({self.vertex_map[v] for v in s}))
            if img not in self.target:
                out.append(f"image of {self.source.simplex_labels(s)} is not a simplex")
        return out

    def is_monotone(self) -> bool:
        for s in self.source.all_simplices():
            img = [self.vertex_map[v] for v in s]
            if any(a > b for a, b in zip(img, img[1:])):
                return False
        return True

    def is_surjective(self) -> bool:
        hit = set()
        for s in self.source.all_simplices():
            img = tuple(sorted({self.vertex_map[v] for v in s}))
            hit.add(img)
        return all(t in hit for t in self.target.all_simplices())

    def __eq__(self, other):
        if not isinstance(other, SimplicialMap):
            return NotImplemented
        return self.vertex_map == other.vertex_map and self.source == other.source and self.target == other.target

    def __hash__(self):
        return hash(self.vertex_map)


class SemiSimplicialSpace:
    """Levels ``X_0..X_P`` with face maps ``faces[p][i]: X_p -> X_{p-1}``.

    ``faces[0]`` is empty.  ``kind`` records which constructor produced the
    space; nerve-like kinds ("nerve", "cech", "transformation", "manifold")
    present a groupoid in levels 0-2 and take part in the cartesian check
    for Morita morphisms.
    """

    GROUPOID_KINDS = frozenset({"nerve", "cech", "transformation", "manifold"})

    def __init__(self, levels: Sequence[SimplicialComplex], faces: Sequence[Sequence[SimplicialMap]],
                 kind: str = "explicit", name: str | None = None):
        self.levels = tuple(levels)
        faces = [tuple(f) for f in faces]
        if len(faces) == len(self.levels) - 1:
            faces = [()] + faces
        if len(faces) != len(self.levels):
            raise ValidationError("need one list of face maps per positive level")
        for p in range(1, len(self.levels)):
            if len(faces[p]) != p + 1:
                raise ValidationError(f"level {p} needs {p + 1} face maps, got {len(faces[p])}")
        self.faces = tuple(faces)
        self.kind = kind
        self.name = name
        self._cache: dict[Any, Any] = {}

    @property
    def truncation(self) -> int:
        return len(self.levels) - 1

    def face(self, p: int, i: int) -> SimplicialMap:
        return self.faces[p][i]

    def is_groupoid_like(self) -> bool:
        return self.kind in self.GROUPOID_KINDS

    def front_map(self, n: int, p: int) -> SimplicialMap:
        """Composite of last faces ``X_n -> X_p`` (first ``p`` arrows on a nerve)."""
        key = ("front", n, p)
        if key not in self._cache:
            vm = list(range(self.levels[n].num_vertices))
            for m in range(n, p, -1):
                last = self.faces[m][m].vertex_map
                vm = [last[v] for v in vm]
            self._cache[key] = SimplicialMap(self.levels[n], self.levels[p], vm)
        return self._cache[key]

    def back_map(self, n: int, q: int) -> SimplicialMap:
        """Composite of zeroth faces ``X_n -> X_q`` (last ``q`` arrows on a nerve)."""
        key = ("back", n, q)
        if key not in self._cache:
            vm = list(range(self.levels[n].num_vertices))
            for m in range(n, q, -1):
                first = self.faces[m][0].vertex_map
                vm = [first[v] for v in vm]
            self._cache[key] = SimplicialMap(self.levels[n], self.levels[q], vm)
        return self._cache[key]

    def truncated(self, P: int) -> "SemiSimplicialSpace":
        if P > self.truncation:
            raise ValidationError(f"cannot extend truncation {self.truncation} to {P}")
        return SemiSimplicialSpace(self.levels[:P + 1], self.faces[:P + 1], kind=self.kind, name=self.name)

    def has_monotone_faces(self) -> bool:
        key = ("monotone",)
        if key not in self._cache:
            self._cache[key] = all(f.is_monotone() for fs in self.faces for f in fs)
        return self._cache[key]

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, SemiSimplicialSpace):
            return NotImplemented
        return (self.levels == other.levels
                and all(a.vertex_map == b.vertex_map
                        for fa, fb in zip(self.faces, other.faces) for a, b in zip(fa, fb)))

    def __hash__(self):
        return hash(self.levels)

    def __repr__(self):
        sizes = [lvl.num_vertices for lvl in self.levels]
        return f"SemiSimplicialSpace(kind={self.kind!r}, P={self.truncation}, vertices={sizes})"


def validate_space(space: SemiSimplicialSpace) -> list[str]:
    """Return the violated invariants (empty list means the space is valid)."""
    out = []
    for p, level in enumerate(space.levels):
        out.extend(f"X_{p}: {v}" for v in level.violations())
    for p in range(1, space.truncation + 1):
        for i, f in enumerate(space.faces[p]):
            if f.source is not space.levels[p] and f.source != space.levels[p]:
                out.append(f"d_{i} on X_{p} has the wrong source")
                continue
            if f.target is not space.levels[p - 1] and f.target != space.levels[p - 1]:
                out.append(f"d_{i} on X_{p} has the wrong target")
                continue
            out.extend(f"d_{i} on X_{p}: {v}" for v in f.violations())
    # d_i d_j = d_{j-1} d_i for i < j, on X_p with p >= 2
    for p in range(2, space.truncation + 1):
        for j in range(p + 1):
            for i in range(j):
                left = space.faces[p - 1][i].compose(space.faces[p][j]).vertex_map
                right = space.faces[p - 1][j - 1].compose(space.faces[p][i]).vertex_map
                if left != right:
                    out.append(f"X_{p}: d_{i} d_{j} != d_{j - 1} d_{i}")
    return out


def check_space(space: SemiSimplicialSpace) -> SemiSimplicialSpace:
    problems = validate_space(space)
    if problems:
        raise ValidationError("invalid semi-simplicial space", problems)
    return space


class SpaceMap:
    """Level-wise simplicial maps ``X_p -> Y_p`` commuting with all faces."""

    def __init__(self, source: SemiSimplicialSpace, target: SemiSimplicialSpace, level_maps: Sequence[SimplicialMap]):
        self.source = source
        self.target = target
        self.level_maps = tuple(level_maps)

    @property
    def truncation(self) -> int:
        return len(self.level_maps) - 1

    def __eq__(self, other):
        if not isinstance(other, SpaceMap):
            return NotImplemented
        return self.source == other.source and self.target == other.target and self.level_maps == other.level_maps

    __hash__ = None

    @classmethod
    def identity(cls, space: SemiSimplicialSpace):
        return cls(space, space, [SimplicialMap.identity(lvl) for lvl in space.levels])

    @classmethod
    def from_label_functions(cls, source, target, fns: Sequence[Callable[[Hashable], Hashable]]):
        P = min(source.truncation, target.truncation)
        maps = [SimplicialMap.from_labels(source.levels[p], target.levels[p], fns[p]) for p in range(P + 1)]
        return cls(source, target, maps)

    def violations(self) -> list[str]:
        out = []
        P = self.truncation
        if P > min(self.source.truncation, self.target.truncation):
            out.append("map defined beyond the truncation of its spaces")
            return out
        for p, f in enumerate(self.level_maps):
            out.extend(f"level {p}: {v}" for v in f.violations())
        for p in range(1, P + 1):
            for i in range(p + 1):
                a = self.target.faces[p][i].compose(self.level_maps[p]).vertex_map
                b = self.level_maps[p - 1].compose(self.source.faces[p][i]).vertex_map
                if a != b:
                    out.append(f"level {p}: map does not commute with d_{i}")
        return out


def stack_dimension(space: SemiSimplicialSpace) -> int:
    """``2 dim X_0 - dim X_1`` for pure-dimensional ``X_0`` and ``X_1``."""
    if space.truncation < 1:
        raise ValidationError("dimension needs levels 0 and 1")
    bad = [p for p in (0, 1) if not space.levels[p].is_pure()]
    if bad:
        raise ValidationError(f"level(s) {bad} are not pure-dimensional",
                              [f"X_{p} maximal simplices have mixed dimensions" for p in bad])
    return 2 * space.levels[0].dimension - space.levels[1].dimension


# ---------------------------------------------------------------------------
# finite groupoids


class FiniteGroupoid:
    """A finite groupoid; ``compose[(x, y)]`` is defined iff ``t(x) == s(y)``."""

    def __init__(self, objects, arrows, source, target, compose, identity=None, inverse=None, name=None):
        self.objects = tuple(objects)
        self.arrows = tuple(arrows)
        self.source = dict(source)
        self.target = dict(target)
        self.compose = dict(compose)
        self.name = name
        self.identity = dict(identity) if identity is not None else self._find_identities()
        self.inverse = dict(inverse) if inverse is not None else self._find_inverses()

    def _find_identities(self):
        ident = {}
        for x in self.arrows:
            o = self.source.get(x)
            if o is not None and o == self.target.get(x) and self.compose.get((x, x)) == x:
                ident.setdefault(o, x)
        return ident

    def _find_inverses(self):
        inv = {}
        by_source = defaultdict(list)
        for y in self.arrows:
            by_source[self.source.get(y)].append(y)
        for x in self.arrows:
            e = self.identity.get(self.source.get(x))
            for y in by_source.get(self.target.get(x), ()):
                if self.compose.get((x, y)) == e and self.target.get(y) == self.source.get(x):
                    inv[x] = y
                    break
        return inv

    def arrows_from(self, obj):
        key = "_from"
        if not hasattr(self, key):
            table = defaultdict(list)
            for x in self.arrows:
                table[self.source[x]].append(x)
            setattr(self, key, table)
        return getattr(self, key)[obj]

    def violations(self) -> list[str]:
        out = []
        objs = set(self.objects)
        arrows = set(self.arrows)
        if len(objs) != len(self.objects) or len(arrows) != len(self.arrows):
            out.append("duplicate objects or arrows")
        for x in self.arrows:
            if self.source.get(x) not in objs or self.target.get(x) not in objs:
                out.append(f"arrow {x!r} has undefined source/target")
        if out:
            return out
        for x in self.arrows:
            for y in self.arrows:
                composable = self.target[x] == self.source[y]
                defined = (x, y) in self.compose
                if composable != defined:
                    out.append(f"compose({x!r}, {y!r}) defined={defined} but composable={composable}")
                elif defined:
                    z = self.compose[(x, y)]
                    if z not in arrows or self.source[z] != self.source[x] or self.target[z] != self.target[y]:
                        out.append(f"compose({x!r}, {y!r}) has wrong endpoints")
        if out:
            return out
        for o in self.objects:
            if o not in self.identity:
                out.append(f"object {o!r} has no identity arrow")
        for x in self.arrows:
            if x not in self.inverse:
                out.append(f"arrow {x!r} has no inverse")
        if out:
            return out
        for x in self.arrows:
            if self.compose[(self.identity[self.source[x]], x)] != x or self.compose[(x, self.identity[self.target[x]])] != x:
                out.append(f"unit law fails at {x!r}")
            xi = self.inverse[x]
            if (self.compose.get((x, xi)) != self.identity[self.source[x]]
                    or self.compose.get((xi, x)) != self.identity[self.target[x]]):
                out.append(f"inverse law fails at {x!r}")
        for x in self.arrows:
            for y in self.arrows_from(self.target[x]):
                xy = self.compose[(x, y)]
                for z in self.arrows_from(self.target[y]):
                    if self.compose[(xy, z)] != self.compose[(x, self.compose[(y, z)])]:
                        out.append(f"associativity fails at ({x!r}, {y!r}, {z!r})")
        return out

    def is_valid(self) -> bool:
        return not self.violations()

    def __eq__(self, other):
        if not isinstance(other, FiniteGroupoid):
            return NotImplemented
        return (set(self.objects) == set(other.objects) and set(self.arrows) == set(other.arrows)
                and self.source == other.source and self.target == other.target and self.compose == other.compose)

    __hash__ = None

    def __repr__(self):
        return f"FiniteGroupoid(objects={len(self.objects)}, arrows={len(self.arrows)})"


def group_groupoid(elements: Sequence[Hashable], op: Callable, obj: Hashable = "*", name=None) -> FiniteGroupoid:
    """A finite group as a one-object groupoid."""
    elements = tuple(elements)
    compose = {(a, b): op(a, b) for a in elements for b in elements}
    return FiniteGroupoid([obj], elements, {g: obj for g in elements}, {g: obj for g in elements}, compose, name=name)


def cyclic_group(n: int) -> FiniteGroupoid:
    return group_groupoid(range(n), lambda a, b: (a + b) % n, name=f"Z/{n}")


def product_group(*orders: int) -> FiniteGroupoid:
    """``Z/n_1 x ... x Z/n_k`` with elements as integer tuples."""
    elements = list(product(*[range(n) for n in orders]))
    return group_groupoid(elements, lambda a, b: tuple((x + y) % n for x, y, n in zip(a, b, orders)))


def pair_groupoid(objects: Sequence[Hashable]) -> FiniteGroupoid:
    objects = tuple(objects)
    arrows = [(a, b) for a in objects for b in objects]
    compose = {((a, b), (b2, c)): (a, c) for (a, b) in arrows for (b2, c) in arrows if b == b2}
    return FiniteGroupoid(objects, arrows, {x: x[0] for x in arrows}, {x: x[1] for x in arrows}, compose)


def action_groupoid(elements, op, points, act) -> FiniteGroupoid:
    """Transformation groupoid ``M x| G``: arrow ``(x, g)`` goes from ``x`` to ``act(x, g)``."""
    elements, points = tuple(elements), tuple(points)
    arrows = [(x, g) for x in points for g in elements]
    src = {a: a[0] for a in arrows}
    tgt = {a: act(a[0], a[1]) for a in arrows}
    compose = {}
    for a in arrows:
        for b in arrows:
            if tgt[a] == b[0]:
                compose[(a, b)] = (a[0], op(a[1], b[1]))
    return FiniteGroupoid(points, arrows, src, tgt, compose)


def nerve(G: FiniteGroupoid, P: int) -> SemiSimplicialSpace:
    """Truncated nerve: level ``p`` is the discrete set of composable ``p``-tuples."""
    if P < 1:
        raise ValidationError("truncation must be at least 1")
    problems = G.violations()
    if problems:
        raise ValidationError("groupoid axioms violated", problems)
    from_obj = defaultdict(list)
    for x in G.arrows:
        from_obj[G.source[x]].append(x)
    tuples = [[()]]
    tuples.append([(x,) for x in G.arrows])
    for p in range(2, P + 1):
        tuples.append([t + (y,) for t in tuples[-1] for y in from_obj[G.target[t[-1]]]])
    levels = [SimplicialComplex.discrete(G.objects)]
    levels += [SimplicialComplex.discrete(tuples[p]) for p in range(1, P + 1)]
    faces: list[list[SimplicialMap]] = [[]]
    faces.append([
        SimplicialMap.from_labels(levels[1], levels[0], lambda t: G.target[t[0]]),
        SimplicialMap.from_labels(levels[1], levels[0], lambda t: G.source[t[0]]),
    ])
    for p in range(2, P + 1):
        fs = []
        for i in range(p + 1):
            if i == 0:
                fn = lambda t: t[1:]
            elif i == p:
                fn = lambda t: t[:-1]
            else:
                fn = (lambda i: lambda t: t[:i - 1] + (G.compose[(t[i - 1], t[i])],) + t[i + 1:])(i)
            fs.append(SimplicialMap.from_labels(levels[p], levels[p - 1], fn))
        faces.append(fs)
    return SemiSimplicialSpace(levels, faces, kind="nerve", name=G.name)


# ---------------------------------------------------------------------------
# covers, Cech spaces, actions


class CoveredComplex:
    """A complex with a finite family of subcomplexes ``U_i`` (as simplex sets)."""

    def __init__(self, total: SimplicialComplex, sets: Sequence[Iterable[Simplex]]):
        self.total = total
        self.sets = tuple(frozenset(tuple(s) for s in U) for U in sets)

    @classmethod
    def from_facets(cls, total: SimplicialComplex, cover_facets: Sequence[Iterable[Iterable[Hashable]]]):
        sets = []
        for facets in cover_facets:
            U = set()
            for f in facets:
                idx = total.simplex_from_labels(f)
                for k in range(1, len(idx) + 1):
                    U.update(combinations(idx, k))
            sets.append(U)
        return cls(total, sets)

    @classmethod
    def trivial(cls, total: SimplicialComplex):
        return cls(total, [set(total.all_simplices())])

    def __eq__(self, other):
        if not isinstance(other, CoveredComplex):
            return NotImplemented
        return self.total == other.total and self.sets == other.sets

    __hash__ = None

    def violations(self) -> list[str]:
        out = []
        union = set()
        for i, U in enumerate(self.sets):
            for s in U:
                if s not in self.total:
                    out.append(f"U_{i} contains {s}, which is not a simplex of the total complex")
                    continue
                for k in range(1, len(s)):
                    for face in combinations(s, k):
                        if face not in U:
                            out.append(f"U_{i} is not closed: {self.total.simplex_labels(face)} missing")
            union |= U
        missing = [s for s in self.total.all_simplices() if s not in union]
        if missing:
            out.append(f"cover does not span the total complex ({len(missing)} simplices uncovered)")
        return out

    def intersection(self, indices: Sequence[int]) -> frozenset:
        inter = self.sets[indices[0]]
        for i in indices[1:]:
            inter = inter & self.sets[i]
            if not inter:
                break
        return inter

    def refines(self, coarse: "CoveredComplex", index_map: Sequence[int]) -> bool:
        return all(U <= coarse.sets[index_map[a]] for a, U in enumerate(self.sets))


def cech_space(C: CoveredComplex, P: int) -> SemiSimplicialSpace:
    """Nerve of the Cech groupoid: ``X_p`` is the disjoint union of ``U_{i_0...i_p}``.

    Vertex labels are ``(index_tuple, total_vertex_label)``; empty
    intersections are omitted.
    """
    if P < 1:
        raise ValidationError("truncation must be at least 1")
    problems = C.violations()
    if problems:
        raise ValidationError("invalid cover", problems)
    m = len(C.sets)
    total = C.total
    levels = []
    for p in range(P + 1):
        labels, simplices = [], []
        for tup in product(range(m), repeat=p + 1):
            inter = C.intersection(tup)
            if not inter:
                continue
            verts = sorted(s[0] for s in inter if len(s) == 1)
            base = len(labels)
            local = {v: base + j for j, v in enumerate(verts)}
            labels.extend((tup, total.labels[v]) for v in verts)
            simplices.extend(tuple(local[v] for v in s) for s in inter if len(s) > 1)
        levels.append(SimplicialComplex(labels, simplices))
    faces = [[]]
    for p in range(1, P + 1):
        fs = []
        for i in range(p + 1):
            fn = (lambda i: lambda lab: (lab[0][:i] + lab[0][i + 1:], lab[1]))(i)
            fs.append(SimplicialMap.from_labels(levels[p], levels[p - 1], fn))
        faces.append(fs)
    space = SemiSimplicialSpace(levels, faces, kind="cech")
    space._cache["cover"] = C
    return space


class GroupAction:
    """A finite group acting on a complex from the right by simplicial automorphisms.

    ``act[g]`` maps vertex labels to vertex labels; ``v.(gh) = (v.g).h``.
    """

    def __init__(self, group: FiniteGroupoid, complex_: SimplicialComplex, act: dict):
        if len(group.objects) != 1:
            raise ValidationError("acting groupoid must have a single object")
        self.group = group
        self.complex = complex_
        self.act = {g: dict(act[g]) for g in group.arrows}

    def apply(self, v, g):
        return self.act[g][v]

    def __eq__(self, other):
        if not isinstance(other, GroupAction):
            return NotImplemented
        return self.group == other.group and self.complex == other.complex and self.act == other.act

    __hash__ = None

    def violations(self) -> list[str]:
        out = []
        K, G = self.complex, self.group
        labels = set(K.labels)
        for g in G.arrows:
            m = self.act.get(g)
            if m is None or set(m) != labels or set(m.values()) != labels:
                out.append(f"element {g!r} does not act by a bijection of the vertices")
                continue
            f = SimplicialMap.from_labels(K, K, m.__getitem__)
            for s in K.all_simplices():
                img = tuple(sorted(f.vertex_map[v] for v in s))
                if img not in K:
                    out.append(f"element {g!r} maps {K.simplex_labels(s)} outside the complex")
                    break
        if out:
            return out
        e = G.identity[G.objects[0]]
        if any(self.act[e][v] != v for v in K.labels):
            out.append("identity element acts nontrivially")
        for g in G.arrows:
            for h in G.arrows:
                gh = G.compose[(g, h)]
                if any(self.act[gh][v] != self.act[h][self.act[g][v]] for v in K.labels):
                    out.append(f"action law fails for ({g!r}, {h!r})")
        return out

    def groupoid(self) -> FiniteGroupoid:
        G = self.group
        return action_groupoid(G.arrows, lambda a, b: G.compose[(a, b)], self.complex.labels, self.apply)


def transformation_space(action: GroupAction, P: int) -> SemiSimplicialSpace:
    """``X_p = K x G^p``; vertex ``(g_tuple, v)`` is the tuple of arrows starting at ``v``."""
    if P < 1:
        raise ValidationError("truncation must be at least 1")
    problems = action.violations()
    if problems:
        raise ValidationError("invalid group action", problems)
    G, K = action.group, action.complex
    elements = G.arrows
    levels = []
    for p in range(P + 1):
        labels, simplices = [], []
        for gt in product(elements, repeat=p):
            base = len(labels)
            labels.extend((gt, v) for v in K.labels)
            simplices.extend(tuple(base + v for v in s) for s in K.all_simplices() if len(s) > 1)
        levels.append(SimplicialComplex(labels, simplices))
    mul = G.compose
    faces = [[]]
    for p in range(1, P + 1):
        fs = []
        for i in range(p + 1):
            if i == 0:
                fn = lambda lab: (lab[0][1:], action.apply(lab[1], lab[0][0]))
            elif i == p:
                fn = lambda lab: (lab[0][:-1], lab[1])
            else:
                fn = (lambda i: lambda lab: (lab[0][:i - 1] + (mul[(lab[0][i - 1], lab[0][i])],) + lab[0][i + 1:], lab[1]))(i)
            fs.append(SimplicialMap.from_labels(levels[p], levels[p - 1], fn))
        faces.append(fs)
    space = SemiSimplicialSpace(levels, faces, kind="transformation")
    space._cache["action"] = action
    return space


def manifold_space(K: SimplicialComplex, P: int) -> SemiSimplicialSpace:
    """The unit groupoid ``K => K``: every level is ``K``, every face the identity."""
    if P < 1:
        raise ValidationError("truncation must be at least 1")
    ident = SimplicialMap.identity(K)
    faces = [[]] + [[ident] * (p + 1) for p in range(1, P + 1)]
    return SemiSimplicialSpace([K] * (P + 1), faces, kind="manifold")


def underlying_groupoid(space: SemiSimplicialSpace) -> FiniteGroupoid:
    """Read the vertex-level groupoid off levels 0-2 of a nerve-like space.

    Arrows are the vertices of ``X_1`` with ``s = d_1`` and ``t = d_0``;
    composable pairs are the vertices of ``X_2`` via ``(d_2, d_0)``, and the
    composite is ``d_1``.
    """
    if "groupoid" in space._cache:
        return space._cache["groupoid"]
    if space.truncation < 2:
        raise ValidationError("need levels 0..2 to read off a groupoid")
    X0, X1, X2 = space.levels[:3]
    d10, d11 = space.faces[1][0].vertex_map, space.faces[1][1].vertex_map
    d20, d21, d22 = (space.faces[2][i].vertex_map for i in range(3))
    objects = X0.labels
    arrows = X1.labels
    src = {arrows[a]: objects[d11[a]] for a in range(len(arrows))}
    tgt = {arrows[a]: objects[d10[a]] for a in range(len(arrows))}
    compose = {}
    for v in range(X2.num_vertices):
        pair = (arrows[d22[v]], arrows[d20[v]])
        if pair in compose:
            raise ValidationError("X_2 is not the set of composable pairs (duplicate pair)")
        compose[pair] = arrows[d21[v]]
    G = FiniteGroupoid(objects, arrows, src, tgt, compose)
    problems = G.violations()
    if problems:
        raise ValidationError("levels 0..2 do not present a groupoid", problems)
    space._cache["groupoid"] = G
    return G


def pair_vertex_index(space: SemiSimplicialSpace) -> dict:
    """Map ``(x, y)`` (indices of ``X_1`` vertices) to the ``X_2`` vertex index."""
    key = ("pair_index",)
    if key not in space._cache:
        d20, d22 = space.faces[2][0].vertex_map, space.faces[2][2].vertex_map
        space._cache[key] = {(d22[v], d20[v]): v for v in range(space.levels[2].num_vertices)}
    return space._cache[key]
