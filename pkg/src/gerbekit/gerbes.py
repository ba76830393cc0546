"""S^1-bundles and S^1-gerbes presented by Q/Z-valued total cocycles.

A bundle is a degree-1 cocycle ``(sigma on X_1, a on X_0)``, a gerbe a
degree-2 cocycle ``(c on X_2, beta on X_1, b on X_0)``.  A pseudo-connection
is any rational lift of the cocycle; its ``delta`` is an integral cocycle
(the pseudo-curvature) whose class is the Chern / Dixmier-Douady class.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Mapping

import numpy as np

from .cochains import (Cochain, Q, QmodZ, TotalCochain, Z, Zmod, apply_matrix,
                       boundary_partial, coboundary_d, delta_matrix, pullback, simplicial_coboundary_matrix,
                       total_delta)
from .errors import (ExtensionError, NonIntegralClassError, NotACocycleError, NotFlatError,
                     PrequantizationObstruction, TruncationError, ValidationError)
from .homology import (CohomologyGroup, _group_from_presentation, cohomology, is_integral_class,
                       quotient_presentation, simplicial_cohomology, solve_coboundary)
from .linalg import RingSolver
from .spaces import FiniteGroupoid, SemiSimplicialSpace, SpaceMap, pair_vertex_index, underlying_groupoid


def bidegree_label(k: int, p: int) -> str:
    return f"({k},{p})"


# ---------------------------------------------------------------------------
# data types


@dataclass
class _QZCocycle:
    cocycle: TotalCochain
    degree = -1

    def __post_init__(self):
        if self.cocycle.ring != QmodZ:
            raise ValidationError(f"{type(self).__name__} needs a Q/Z cochain, got {self.cocycle.ring}")
        if self.cocycle.degree != self.degree:
            raise ValidationError(f"{type(self).__name__} needs total degree {self.degree}")

    @property
    def space(self) -> SemiSimplicialSpace:
        return self.cocycle.space

    def component(self, p: int) -> Cochain:
        return self.cocycle[p]

    def __add__(self, other):
        return type(self)(self.cocycle + other.cocycle)

    def __neg__(self):
        return type(self)(-self.cocycle)

    def __sub__(self, other):
        return type(self)(self.cocycle - other.cocycle)

    def __eq__(self, other):
        return type(self) is type(other) and self.cocycle == other.cocycle

    @classmethod
    def zero(cls, space):
        return cls(TotalCochain(space, cls.degree, QmodZ))

    @classmethod
    def from_components(cls, space, components: Mapping[int, Mapping]):
        """``components[p]`` maps simplices of ``X_p`` (index or label tuples) to values."""
        comps = {p: Cochain.from_values(space, cls.degree - p, p, QmodZ, vals) for p, vals in components.items()}
        return cls(TotalCochain(space, cls.degree, QmodZ, comps))


class BundleCocycle(_QZCocycle):
    """Degree-1 Q/Z cocycle: transition data on ``X_1`` and local data on ``X_0``."""

    degree = 1

    @property
    def transition(self) -> Cochain:
        return self.cocycle[1]

    @property
    def local(self) -> Cochain:
        return self.cocycle[0]


class GerbeCocycle(_QZCocycle):
    """Degree-2 Q/Z cocycle ``(c, beta, b)`` on levels 2, 1, 0."""

    degree = 2

    @property
    def c(self) -> Cochain:
        return self.cocycle[2]

    @property
    def beta(self) -> Cochain:
        return self.cocycle[1]

    @property
    def b(self) -> Cochain:
        return self.cocycle[0]

    def is_groupoid_cocycle(self) -> bool:
        return self.beta.is_zero() and self.b.is_zero()


@dataclass
class PseudoConnection:
    """A rational lift of a Q/Z cocycle."""

    lift: TotalCochain

    def reduces_to(self, cocycle: TotalCochain) -> bool:
        return self.lift.cast(QmodZ) == cocycle


@dataclass
class PseudoCurvature:
    """The integral cocycle ``delta(lift)``, with its components labelled by bidegree."""

    cochain: TotalCochain

    @property
    def components(self) -> dict:
        return {bidegree_label(c.k, p): c for p, c in self.cochain.components.items()}

    def support(self) -> list:
        return [bidegree_label(k, p) for k, p in self.cochain.nonzero_bidegrees()]


@dataclass
class CharacteristicClass:
    """A class in integral cohomology plus the pseudo-curvature realizing it."""

    group: CohomologyGroup
    coordinates: tuple
    curvature: PseudoCurvature
    connection: PseudoConnection

    @property
    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coordinates)


# ---------------------------------------------------------------------------
# validation


def _violations(obj: _QZCocycle) -> list:
    out = []
    c = obj.cocycle
    if c.ring != QmodZ:
        out.append(f"ring is {c.ring}, expected QmodZ")
    if c.degree != obj.degree:
        out.append(f"degree is {c.degree}, expected {obj.degree}")
    if out:
        return out
    if c.space.truncation < obj.degree + 1:
        return [f"truncation {c.space.truncation} too small to check the cocycle condition"]
    d = total_delta(c)
    for k, p in d.nonzero_bidegrees():
        out.append(f"delta has nonzero component at bidegree {bidegree_label(k, p)}")
    return out


def validate_bundle(B: BundleCocycle) -> list:
    return _violations(B)


def validate_gerbe(G: GerbeCocycle) -> list:
    return _violations(G)


def _require_valid(obj):
    problems = _violations(obj)
    if problems:
        raise NotACocycleError(f"invalid {type(obj).__name__}", problems)


# ---------------------------------------------------------------------------
# characteristic classes


def _curvature(obj: _QZCocycle, connection: PseudoConnection | None):
    space = obj.space
    if connection is None:
        connection = PseudoConnection(obj.cocycle.lift())
    elif not connection.reduces_to(obj.cocycle):
        raise ValidationError("pseudo-connection does not reduce to the cocycle mod 1")
    n = obj.degree
    if n + 2 > space.truncation:
        raise TruncationError(f"the class in degree {n + 1} needs truncation {n + 2}")
    # matrix route: delta(lift) = M_n @ lift
    vec = apply_matrix(delta_matrix(space, n), connection.lift.to_vector(), Q)
    if any(Fraction(v).denominator != 1 for v in vec):
        raise NotACocycleError("delta of the lift is not integral")
    curv = TotalCochain.from_vector(space, n + 1, Z, [int(v) for v in vec])
    group = cohomology(space, Z, n + 1)
    return CharacteristicClass(group, group.coordinates(curv), PseudoCurvature(curv), connection)


def chern_class(B: BundleCocycle, connection: PseudoConnection | None = None) -> CharacteristicClass:
    """Chern class in ``H^2(X, Z)`` read off the pseudo-curvature of a lift."""
    _require_valid(B)
    return _curvature(B, connection)


def dd_class(G: GerbeCocycle, connection: PseudoConnection | None = None) -> CharacteristicClass:
    """Dixmier-Douady class in ``H^3(X, Z)`` read off the pseudo-curvature of a lift."""
    _require_valid(G)
    return _curvature(G, connection)


def qz_class(obj: _QZCocycle) -> tuple:
    """Coordinates of the cocycle's class in ``H^n(X, Q/Z)``."""
    _require_valid(obj)
    group = cohomology(obj.space, QmodZ, obj.degree)
    return group, group.coordinates(obj.cocycle.lift())


# ---------------------------------------------------------------------------
# operations on cocycles


def tensor(a: _QZCocycle, b: _QZCocycle):
    if type(a) is not type(b):
        raise ValidationError("can only tensor two bundles or two gerbes")
    if a.space is not b.space and a.space != b.space:
        raise ValidationError("tensor product needs both cocycles on the same space")
    return type(a)(a.cocycle + b.cocycle)


def negate(a: _QZCocycle):
    return -a


def pullback_cocycle(f: SpaceMap, obj: _QZCocycle):
    if obj.space is not f.target and obj.space != f.target:
        raise ValidationError("space map target does not match the cocycle's space")
    return type(obj)(pullback(f, obj.cocycle))


# ---------------------------------------------------------------------------
# central extensions


@dataclass
class CentralExtension:
    """The finite groupoid ``X_1 x Z/m`` with multiplication twisted by ``m * c``."""

    groupoid: FiniteGroupoid
    base: FiniteGroupoid
    m: int
    cocycle_values: dict = field(repr=False)
    central: bool = True

    def projection(self, arrow):
        return arrow[0]

    def kernel(self, obj) -> list:
        e = self.base.identity[obj]
        return [(e, lam) for lam in range(self.m)]

    @property
    def order(self) -> int:
        return len(self.groupoid.arrows)

    def is_group(self) -> bool:
        return len(self.groupoid.objects) == 1

    def element_order(self, x) -> int:
        G = self.groupoid
        e = G.identity[G.source[x]]
        if G.source[x] != G.target[x]:
            raise ValidationError("element order needs a loop")
        k, y = 1, x
        while y != e:
            y = G.compose[(y, x)]
            k += 1
        return k

    def is_abelian(self) -> bool:
        G = self.groupoid
        return all(G.compose[(x, y)] == G.compose[(y, x)] for (x, y) in G.compose if (y, x) in G.compose)

    def center(self) -> list:
        G = self.groupoid
        if not self.is_group():
            raise ValidationError("center is only computed for groups")
        return [x for x in G.arrows if all(G.compose[(x, y)] == G.compose[(y, x)] for y in G.arrows)]

    def is_cyclic(self) -> bool:
        return self.is_group() and any(self.element_order(x) == self.order for x in self.groupoid.arrows)


def associator(c) -> Cochain:
    """Boundary of a candidate 2-cochain on ``X_2``; zero iff the extension law is associative."""
    if isinstance(c, GerbeCocycle):
        c = c.c
    if c.bidegree != (0, 2):
        raise ValidationError("associator expects a cochain of bidegree (0,2)")
    return boundary_partial(c)


def _common_denominator(values) -> int:
    m = 1
    for v in values:
        m = lcm(m, Fraction(v).denominator)
    return m


def build_extension(G, m: int | None = None) -> CentralExtension:
    """Build the extension groupoid of a gerbe with ``beta = b = 0``.

    The multiplication ``(x, l)(y, u) = (xy, l + u + m c(x, y))`` is checked
    against the groupoid axioms by exhaustive enumeration; a failure raises
    :class:`ExtensionError` carrying the associator.
    """
    if isinstance(G, Cochain):
        c = G
        space = c.space
    else:
        if not G.is_groupoid_cocycle():
            raise ValidationError("central extension needs beta = b = 0",
                                  [f"nonzero component at {bidegree_label(*b)}" for b in G.cocycle.nonzero_bidegrees()
                                   if b != (0, 2)])
        c = G.c
        space = G.space
    if c.ring != QmodZ or c.bidegree != (0, 2):
        raise ValidationError("expected a Q/Z cochain of bidegree (0,2)")
    if space.levels[2].dimension > 0 and not coboundary_d(c).is_zero():
        raise ValidationError("c is not locally constant (d c != 0)")
    if m is None:
        m = _common_denominator(c.data)
    if any((Fraction(v) * m).denominator != 1 for v in c.data):
        raise ValidationError(f"values of c do not lie in (1/{m})Z/Z")
    base = underlying_groupoid(space)
    X1 = space.levels[1]
    X2 = space.levels[2]
    pairs = pair_vertex_index(space)
    index1 = {lab: i for i, lab in enumerate(X1.labels)}
    cv = {}
    for (xi, yi), v in pairs.items():
        cv[(X1.labels[xi], X1.labels[yi])] = int(Fraction(c.data[X2.simplex_index(0)[(v,)]]) * m) % m
    arrows = [(x, lam) for x in base.arrows for lam in range(m)]
    src = {a: base.source[a[0]] for a in arrows}
    tgt = {a: base.target[a[0]] for a in arrows}
    compose = {}
    for (x, y), z in base.compose.items():
        k = cv[(x, y)]
        for lam in range(m):
            for mu in range(m):
                compose[((x, lam), (y, mu))] = (z, (lam + mu + k) % m)
    R = FiniteGroupoid(base.objects, arrows, src, tgt, compose)
    problems = R.violations()
    if problems:
        assoc = associator(c) if space.truncation >= 3 else None
        raise ExtensionError("extension law violates the groupoid axioms", assoc)
    central = True
    for x in base.arrows:
        s, t = base.source[x], base.target[x]
        ks, kt = R.identity[s], R.identity[t]
        for a in range(m):
            left = (ks[0], (ks[1] + a) % m)
            right = (kt[0], (kt[1] + a) % m)
            for lam in range(m):
                xx = (x, lam)
                if R.compose[(left, xx)] != R.compose[(xx, right)]:
                    central = False
    del index1
    return CentralExtension(R, base, m, cv, central)


# ---------------------------------------------------------------------------
# flatness and holonomy


@dataclass
class FlatnessResult:
    flat: bool
    lift: TotalCochain | None = None


def is_flat(obj: _QZCocycle) -> FlatnessResult:
    """Flat iff some rational lift is itself a cocycle (integer system ``M k = -M lift``)."""
    _require_valid(obj)
    space, n = obj.space, obj.degree
    base = obj.cocycle.lift()
    r = apply_matrix(delta_matrix(space, n), base.to_vector(), Q)
    target = [-int(v) for v in r]
    k = solve_coboundary(space, target, n + 1, Z)
    if k is None:
        return FlatnessResult(False)
    lift = base + TotalCochain.from_vector(space, n, Z, k).cast(Q)
    return FlatnessResult(True, lift)


@dataclass
class Holonomy:
    group: CohomologyGroup
    coordinates: tuple
    flat_lift: TotalCochain

    @property
    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coordinates)


def holonomy(obj: _QZCocycle) -> Holonomy:
    """Q/Z class of a flat cocycle; non-flat input is rejected."""
    res = is_flat(obj)
    if not res.flat:
        raise NotFlatError("cocycle is not flat: no rational lift is a cocycle (its integral class is nonzero)")
    group = cohomology(obj.space, QmodZ, obj.degree)
    return Holonomy(group, group.coordinates(res.lift), res.lift)


# ---------------------------------------------------------------------------
# prequantization


@dataclass
class Prequantization:
    cocycle: _QZCocycle
    connection: PseudoConnection
    curvature: PseudoCurvature
    integral_representative: TotalCochain
    correction: TotalCochain | None = None
    extension_form: bool | None = None


def _prequantize(w: TotalCochain, twist: TotalCochain | None, cls, check_top=False) -> Prequantization:
    n = w.degree
    space = w.space
    if w.ring.tag not in ("Q", "Z"):
        raise ValidationError("prequantization input must be a rational cocycle")
    w = w.cast(Q)
    res = is_integral_class(w)
    if not res.integral:
        raise NonIntegralClassError(f"the degree-{n} class is not integral: no z integral with w - z exact")
    z = res.representative
    if check_top:
        top = z[0]
        if not top.is_zero():
            D = simplicial_coboundary_matrix(space.levels[0], n - 1)
            sol = RingSolver(D).solve(top.data, Z) if D.size else None
            if sol is None:
                raise PrequantizationObstruction(
                    f"component {bidegree_label(n, 0)} is not exact on level 0", bidegree_label(n, 0))
    y = solve_coboundary(space, z.to_vector(), n, Q)
    if y is None:
        raise PrequantizationObstruction(
            "the integral class is rationally nontrivial; a finite model only realizes torsion classes")
    lift = TotalCochain.from_vector(space, n - 1, Q, y)
    if twist is not None:
        if twist.degree != n - 1:
            raise ValidationError(f"twist must have degree {n - 1}")
        twist = twist.cast(Q)
        if not total_delta(twist).is_zero():
            raise NotACocycleError("twist must be a rational cocycle")
        lift = lift + twist
    extension_form = None
    if check_top:
        b = lift[0]
        D = simplicial_coboundary_matrix(space.levels[0], n - 2)
        sol = RingSolver(D).solve(b.data, QmodZ) if D.size else None
        if sol is not None and D.size:
            a = Cochain(space, n - 2, 0, Q, [Fraction(v) % 1 for v in sol])
            lift = lift - total_delta(TotalCochain(space, n - 2, Q, {0: a}))
        extension_form = all(Fraction(v).denominator == 1 for p in (0, 1) for v in lift[p].data)
    curv = total_delta(lift)
    if curv != z.cast(Q):
        raise AssertionError("pseudo-curvature does not reproduce the integral representative")
    return Prequantization(cls(lift.cast(QmodZ)), PseudoConnection(lift), PseudoCurvature(curv.cast(Z)),
                           z, res.correction, extension_form)


def prequantize_bundle(w: TotalCochain, twist: TotalCochain | None = None) -> Prequantization:
    """Bundle with pseudo-connection whose pseudo-curvature is the integral representative of ``[w]``.

    ``twist`` (a rational 1-cocycle) moves the output within its orbit of flat bundles.
    """
    if w.degree != 2:
        raise ValidationError("bundle prequantization takes a degree-2 cocycle")
    return _prequantize(w, twist, BundleCocycle)


def prequantize_gerbe(w: TotalCochain, twist: TotalCochain | None = None) -> Prequantization:
    """Gerbe with pseudo-connection whose pseudo-curvature is the integral representative of ``[w]``."""
    if w.degree != 3:
        raise ValidationError("gerbe prequantization takes a degree-3 cocycle")
    return _prequantize(w, twist, GerbeCocycle, check_top=True)


# ---------------------------------------------------------------------------
# the exact sequence H^1(X) -> H^1(X_0) -> E -> H^2(X) -> H^2(X_0)


@dataclass
class TauNode:
    name: str
    image_size: int
    kernel_size: int
    exact: bool


@dataclass
class TauReport:
    n: int
    groups: dict
    nodes: list

    @property
    def exact(self) -> bool:
        return all(node.exact for node in self.nodes)

    @property
    def extension_classes(self) -> int:
        return self.groups["E"].order()


def _level_slices(space, degree):
    out, off = {}, 0
    for p in range(0, min(degree, space.truncation) + 1):
        size = len(space.levels[p].simplices(degree - p))
        out[p] = slice(off, off + size)
        off += size
    return out, off


def tau_maps(space: SemiSimplicialSpace, n: int) -> TauReport:
    """Verify exactness of the tau sequence with coefficients ``(1/n)Z/Z = Z/n`` by enumeration."""
    if n < 2:
        raise ValidationError("tau_maps needs n >= 2")
    if space.truncation < 3:
        raise TruncationError("tau_maps needs truncation >= 3")
    ring = Zmod(n)
    H1 = cohomology(space, ring, 1)
    H2 = cohomology(space, ring, 2)
    X0 = space.levels[0]
    H1X0 = simplicial_cohomology(X0, ring, 1)
    H2X0 = simplicial_cohomology(X0, ring, 2)
    s1, _ = _level_slices(space, 1)
    s2, N2 = _level_slices(space, 2)
    M2 = delta_matrix(space, 2)
    M1 = delta_matrix(space, 1)
    e_cols = np.arange(s2[1].start, N2)
    A_E = M2[:, e_cols]
    B_E = M1[s2[1].start:N2][:, s1[1]]
    E = _group_from_presentation(quotient_presentation(A_E, B_E, ring), 2)

    def tau1(vec):
        return vec[s1[0]]

    def tau2(vec):
        a = Cochain(space, 1, 0, ring, vec)
        beta = boundary_partial(a)
        zero_c = np.array([0] * len(space.levels[2].simplices(0)), dtype=object)
        return np.concatenate([beta.data, zero_c])

    def tau3(vec):
        full = np.array([0] * N2, dtype=object)
        full[s2[1].start:] = vec
        return full

    def tau4(vec):
        return vec[s2[0]]

    chain = [("H1(X)", H1, tau1), ("H1(X0)", H1X0, tau2), ("E", E, tau3), ("H2(X)", H2, tau4), ("H2(X0)", H2X0, None)]
    images, kernels = {}, {}
    for i, (name, grp, fn) in enumerate(chain[:-1]):
        tgt = chain[i + 1][1]
        img, ker = set(), set()
        for coords in grp.elements():
            vec = grp.element(coords)
            out = tgt.presentation.coordinates(fn(vec))
            img.add(out)
            if all(o == 0 for o in out):
                ker.add(tuple(coords))
        images[chain[i + 1][0]] = img
        kernels[name] = ker
    nodes = []
    for name in ("H1(X0)", "E", "H2(X)"):
        img, ker = images[name], kernels[name]
        nodes.append(TauNode(name, len(img), len(ker), img == ker))
    groups = {"H1(X)": H1, "H1(X0)": H1X0, "E": E, "H2(X)": H2, "H2(X0)": H2X0}
    return TauReport(n, groups, nodes)
