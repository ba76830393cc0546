"""Cohomology of the total complex with coefficients in Z, Q, Z/m and Q/Z.

Everything is derived from the integer matrices of the total differential.
For a degree ``n`` with ``A = M_n`` and ``B = M_{n-1}`` we compute the
subquotient ``ker A / im B`` from the Smith form of ``A`` (which gives a
basis of integral cocycles) and the Smith form of ``B`` expressed in that
basis.  Generators are the first vectors of the resulting bases, so reports
are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import gcd
from typing import Sequence

import numpy as np

from .cochains import (CoefficientRing, Q, QmodZ, TotalCochain, Z, apply_matrix, delta_matrix,
                       simplicial_coboundary_matrix, total_delta, total_dimension)
from .errors import NotACocycleError, TruncationError, ValidationError
from .linalg import RingSolver, as_object, smith_normal_form
from .spaces import SemiSimplicialSpace, SimplicialComplex


# ---------------------------------------------------------------------------
# presentations of ker A / im B


@dataclass
class Presentation:
    """A finitely generated abelian group ``ker A / im B`` in invariant-factor form.

    ``orders[j]`` is the order of summand ``j`` (``0`` for an infinite
    summand: ``Z``, ``Q`` or ``Q/Z`` depending on the ring).  ``generators``
    are cochain vectors; ``coordinate_rows[j] @ x`` gives the coordinate of a
    cocycle ``x`` (reduced mod ``orders[j]`` / mod 1 by :meth:`coordinates`).
    """

    ring: CoefficientRing
    orders: list
    generators: list
    coordinate_rows: list
    scales: list = field(default_factory=list)
    dim: int = 0

    def coordinates(self, x) -> tuple:
        x = np.asarray(list(x), dtype=object)
        out = []
        for j, (o, row) in enumerate(zip(self.orders, self.coordinate_rows)):
            scale = self.scales[j] if self.scales else 1
            v = (np.asarray(row, dtype=object) @ x) * scale if len(x) else 0
            out.append(_reduce_coordinate(v, o, self.ring))
        return tuple(out)


def _reduce_coordinate(v, order, ring):
    if ring.tag == "Q":
        return Fraction(v)
    if ring.tag == "QmodZ" and order == 0:
        return Fraction(v) % 1
    v = Fraction(v)
    if v.denominator != 1:
        raise ValidationError("non-integral coordinate; input is not a cocycle representative")
    return int(v) % order if order else int(v)


def _combine_finite(ring, orders, gens, rows, scales):
    """Bring a direct sum of cyclic groups into invariant-factor form."""
    if not orders:
        return orders, gens, rows, scales
    k = len(orders)
    S = smith_normal_form(np.diag(np.array(orders, dtype=object)))
    d = S.diagonal
    U = as_object(S.U)
    Ui = as_object(S.Uinv)
    new_orders, new_gens, new_rows, new_scales = [], [], [], []
    gens_mat = np.array([list(g) for g in gens], dtype=object).T if gens else None
    for j in range(k):
        if d[j] == 1:
            continue
        new_orders.append(int(d[j]))
        new_gens.append(ring.reduce_array(gens_mat @ Ui[:, j]))
        # coordinate j is sum_i U[j, i] * c_i, with c_i = rows[i] @ x * scales[i]
        combined = [Fraction(0)] * len(rows[0])
        combined = np.array(combined, dtype=object)
        for i in range(k):
            if U[j, i]:
                combined = combined + np.asarray(rows[i], dtype=object) * (U[j, i] * scales[i])
        new_rows.append(combined)
        new_scales.append(1)
    return new_orders, new_gens, new_rows, new_scales


def quotient_presentation(A, B, ring) -> Presentation:
    """``ker A / im B`` over ``ring`` for integer matrices with ``A @ B == 0``."""
    ring = CoefficientRing.parse(ring)
    A = np.asarray(A)
    B = np.asarray(B)
    N = A.shape[1]
    if B.shape[0] != N:
        raise ValidationError("A and B are not composable")
    if N == 0:
        return Presentation(ring, [], [], [], [], 0)
    if A.shape[0]:
        sA = smith_normal_form(A)
        dA = sA.diagonal
        r = sA.rank
        V = as_object(sA.V)
        Vi = as_object(sA.Vinv)
    else:
        dA, r = [], 0
        V = as_object(np.eye(N, dtype=np.int64))
        Vi = V.copy()
    Vk = V[:, r:]
    Vik = Vi[r:]
    C = Vik @ as_object(B) if B.shape[1] else np.zeros((N - r, 0), dtype=object)
    if C.size:
        sC = smith_normal_form(C)
        dC, rc = sC.diagonal, sC.rank
        Uc, Uci = as_object(sC.U), as_object(sC.Uinv)
    else:
        dC, rc = [], 0
        Uc = as_object(np.eye(N - r, dtype=np.int64))
        Uci = Uc.copy()
    kdim = N - r
    coord_rows = Uc @ Vik if kdim else np.zeros((0, N), dtype=object)
    gens_all = Vk @ Uci if kdim else np.zeros((N, 0), dtype=object)

    orders, gens, rows, scales = [], [], [], []
    tag = ring.tag
    if tag in ("Z", "Q"):
        for j in range(kdim):
            order = dC[j] if j < rc else 0
            if tag == "Q" and order:
                continue
            if order == 1:
                continue
            orders.append(order)
            g = gens_all[:, j]
            gens.append(np.array([ring.normalize(v) for v in g], dtype=object))
            rows.append(coord_rows[j])
            scales.append(1)
        return Presentation(ring, orders, gens, rows, scales, N)
    if tag == "Zmod":
        m = ring.n
        for i in range(r):
            g = gcd(dA[i], m)
            if g > 1:
                orders.append(g)
                gens.append(ring.reduce_array(V[:, i] * (m // g)))
                rows.append(Vi[i])
                scales.append(Fraction(1, m // g))
        for j in range(kdim):
            g = gcd(dC[j], m) if j < rc else m
            if g > 1:
                orders.append(g)
                gens.append(ring.reduce_array(gens_all[:, j].copy()))
                rows.append(coord_rows[j])
                scales.append(1)
        o, gg, rr, ss = _combine_finite(ring, orders, gens, rows, scales)
        return Presentation(ring, o, gg, rr, ss, N)
    # Q/Z: torsion summands from the cocycle condition, divisible summands from the free part
    for i in range(r):
        if dA[i] > 1:
            orders.append(dA[i])
            gens.append(np.array([Fraction(v, dA[i]) % 1 for v in V[:, i]], dtype=object))
            rows.append(Vi[i])
            scales.append(dA[i])
    tors = _combine_finite(ring, orders, gens, rows, scales)
    orders, gens, rows, scales = [list(x) for x in tors]
    for j in range(rc, kdim):
        orders.append(0)
        gens.append(np.array([int(v) for v in gens_all[:, j]], dtype=object))
        rows.append(coord_rows[j])
        scales.append(1)
    return Presentation(ring, orders, gens, rows, scales, N)


# ---------------------------------------------------------------------------
# cohomology groups


@dataclass
class CohomologyGroup:
    """``H^n`` of a space (or complex) with coefficients in ``ring``.

    For ``QmodZ`` the group is ``(Q/Z)^free_rank + torsion`` and the free
    generators are integral cocycles ``z`` standing for ``z (x) Q/Z``.
    """

    degree: int
    ring: CoefficientRing
    free_rank: int
    torsion: list
    generators: list
    presentation: Presentation = field(repr=False)
    space: object = field(repr=False, default=None)

    @property
    def orders(self) -> list:
        return list(self.presentation.orders)

    @property
    def is_trivial(self) -> bool:
        return not self.presentation.orders

    def order(self):
        """Number of elements, or ``None`` if infinite."""
        if any(o == 0 for o in self.orders):
            return None
        out = 1
        for o in self.orders:
            out *= o
        return out

    def coordinates(self, cocycle) -> tuple:
        """Coordinates of the class of ``cocycle`` in the generator basis."""
        x = cocycle.to_vector() if isinstance(cocycle, TotalCochain) else cocycle
        if isinstance(cocycle, TotalCochain):
            _check_ring_for_coordinates(cocycle.ring, self.ring)
        return self.presentation.coordinates(x)

    def is_zero_class(self, cocycle) -> bool:
        return all(c == 0 for c in self.coordinates(cocycle))

    def element(self, coords: Sequence) -> np.ndarray:
        """A cocycle vector with the given coordinates."""
        if len(coords) != len(self.orders):
            raise ValidationError("wrong number of coordinates")
        N = self.presentation.dim
        acc = np.array([self.ring.zero()] * N, dtype=object)
        for c, g in zip(coords, self.presentation.generators):
            acc = acc + np.asarray(g, dtype=object) * c
        return self.ring.reduce_array(acc)

    def elements(self):
        """Iterate over all coordinate tuples of a finite group."""
        if self.order() is None:
            raise ValidationError("cannot enumerate an infinite group")
        return product(*[range(o) for o in self.orders])

    def generator_cochains(self) -> list:
        if self.space is None:
            raise ValidationError("group is not attached to a semi-simplicial space")
        out = []
        for o, g in zip(self.orders, self.presentation.generators):
            ring = Z if (self.ring.tag == "QmodZ" and o == 0) else self.ring
            out.append(TotalCochain.from_vector(self.space, self.degree, ring, g))
        return out

    def describe(self) -> str:
        names = {"Z": "Z", "Q": "Q", "QmodZ": "Q/Z", "Zmod": f"Z/{self.ring.n}"}
        parts = []
        if self.free_rank:
            base = names[self.ring.tag]
            parts.append(base if self.free_rank == 1 else f"{base}^{self.free_rank}")
        parts += [f"Z/{t}" for t in self.torsion]
        return " + ".join(parts) if parts else "0"


def _check_ring_for_coordinates(have, want):
    if have == want:
        return
    if want.tag == "QmodZ" and have.tag in ("Z", "Q"):
        return
    if want.tag == "Q" and have.tag == "Z":
        return
    raise ValidationError(f"cochain over {have} cannot be read in a group over {want}")


def _group_from_presentation(pres: Presentation, degree: int, space=None) -> CohomologyGroup:
    free = sum(1 for o in pres.orders if o == 0)
    torsion = sorted(o for o in pres.orders if o)
    gens = []
    for o, g in zip(pres.orders, pres.generators):
        gens.append(g)
    group = CohomologyGroup(degree, pres.ring, free, torsion, gens, pres, space)
    if space is not None:
        group.generators = group.generator_cochains()
    return group


def cohomology(space: SemiSimplicialSpace, ring, n: int) -> CohomologyGroup:
    """``H^n`` of the total complex of ``space``; needs truncation ``>= n + 1``."""
    ring = CoefficientRing.parse(ring)
    if n < 0:
        raise ValidationError("negative degree")
    if n + 1 > space.truncation:
        raise TruncationError(f"H^{n} needs truncation >= {n + 1}, space has {space.truncation}")
    key = ("cohomology", str(ring), n)
    if key in space._cache:
        return space._cache[key]
    A = delta_matrix(space, n)
    B = delta_matrix(space, n - 1) if n > 0 else np.zeros((A.shape[1], 0), dtype=np.int64)
    group = _group_from_presentation(quotient_presentation(A, B, ring), n, space)
    space._cache[key] = group
    return group


def simplicial_cohomology(K: SimplicialComplex, ring, k: int) -> CohomologyGroup:
    """Ordinary cohomology ``H^k(K)`` of a single complex."""
    ring = CoefficientRing.parse(ring)
    A = simplicial_coboundary_matrix(K, k)
    B = simplicial_coboundary_matrix(K, k - 1) if k > 0 else np.zeros((A.shape[1], 0), dtype=np.int64)
    return _group_from_presentation(quotient_presentation(A, B, ring), k)


# ---------------------------------------------------------------------------
# cocycle-level operations


def _require_cocycle(c: TotalCochain):
    if c.degree + 1 > c.space.truncation:
        raise TruncationError(f"checking the cocycle condition in degree {c.degree} needs truncation {c.degree + 1}")
    if not total_delta(c).is_zero():
        raise NotACocycleError(f"degree-{c.degree} cochain is not a cocycle over {c.ring}",
                               [f"delta has nonzero component at {b}" for b in total_delta(c).nonzero_bidegrees()])


def _solver(space: SemiSimplicialSpace, n: int) -> RingSolver:
    key = ("solver", n)
    if key not in space._cache:
        space._cache[key] = RingSolver(delta_matrix(space, n))
    return space._cache[key]


def solve_coboundary(space: SemiSimplicialSpace, target_vector, degree: int, ring):
    """Find ``y`` of degree ``degree - 1`` with ``delta y = target`` over ``ring`` (or ``None``)."""
    ring = CoefficientRing.parse(ring)
    if degree == 0:
        ok = all(_zero_in(v, ring) for v in target_vector)
        return np.zeros(0, dtype=object) if ok else None
    y = _solver(space, degree - 1).solve(target_vector, ring)
    return y


def _zero_in(v, ring):
    v = Fraction(v)
    if ring.tag == "QmodZ":
        return v.denominator == 1
    if ring.tag == "Zmod":
        return v % ring.n == 0
    return v == 0


def is_cocycle(c: TotalCochain) -> bool:
    return total_delta(c).is_zero()


def is_coboundary(c: TotalCochain):
    """``(True, primitive)`` if ``c = delta(primitive)`` over its ring, else ``(False, None)``."""
    _require_cocycle(c)
    y = solve_coboundary(c.space, c.to_vector(), c.degree, c.ring)
    if y is None:
        return False, None
    if c.degree == 0:
        return True, None
    return True, TotalCochain.from_vector(c.space, c.degree - 1, c.ring, y)


def bockstein(c: TotalCochain) -> TotalCochain:
    """Connecting map ``Q/Z -> Z``: ``delta`` of the ``[0, 1)`` lift, as an integral cocycle."""
    if c.ring.tag != "QmodZ":
        raise ValidationError("bockstein expects a Q/Z cochain")
    _require_cocycle(c)
    d = total_delta(c.lift())
    return d.cast(Z)


@dataclass
class IntegralityResult:
    integral: bool
    representative: TotalCochain | None = None
    correction: TotalCochain | None = None


def is_integral_class(c: TotalCochain) -> IntegralityResult:
    """Decide whether a rational cocycle ``c`` has ``c = z + delta(y)`` with ``z`` integral.

    Returns the integral representative ``z`` and the rational correction ``y``.
    """
    if c.ring.tag not in ("Q", "Z"):
        raise ValidationError("is_integral_class expects a rational cocycle")
    c = c.cast(Q)
    _require_cocycle(c)
    vec = c.to_vector()
    space = c.space
    if all(Fraction(v).denominator == 1 for v in vec):
        return IntegralityResult(True, c.cast(Z), TotalCochain.zero(space, c.degree - 1, Q) if c.degree else None)
    y = solve_coboundary(space, vec, c.degree, Q)
    if y is not None:
        return IntegralityResult(True, TotalCochain.zero(space, c.degree, Z),
                                 TotalCochain.from_vector(space, c.degree - 1, Q, y))
    y = solve_coboundary(space, vec, c.degree, QmodZ)
    if y is None:
        return IntegralityResult(False)
    y = TotalCochain.from_vector(space, c.degree - 1, Q, [Fraction(v) % 1 for v in y])
    z = c - total_delta(y)
    return IntegralityResult(True, z.cast(Z), y)


def class_coordinates(c: TotalCochain, ring=None) -> tuple:
    """Coordinates of ``[c]`` in ``cohomology(c.space, ring, c.degree)``."""
    ring = CoefficientRing.parse(ring) if ring is not None else c.ring
    return cohomology(c.space, ring, c.degree).coordinates(c)


def apply_delta_matrix(space, vector, degree, ring):
    return apply_matrix(delta_matrix(space, degree), vector, ring)


__all__ = [
    "Presentation", "quotient_presentation", "CohomologyGroup", "cohomology", "simplicial_cohomology",
    "is_cocycle", "is_coboundary", "bockstein", "is_integral_class", "IntegralityResult",
    "solve_coboundary", "class_coordinates", "smith_normal_form", "total_dimension",
]
