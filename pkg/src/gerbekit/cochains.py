"""Cochains on semi-simplicial spaces: the double complex and its cup product.

A :class:`Cochain` of bidegree ``(k, p)`` assigns a ring element to every
oriented ``k``-simplex of level ``X_p``.  Values are kept densely, aligned with
``space.levels[p].simplices(k)``, in a numpy object array so exact Python
integers and :class:`fractions.Fraction` survive unchanged.

Total degree ``n`` cochains collect the components ``(n - p, p)`` for
``0 <= p <= min(n, P)``.  The total differential is ``(-1)^p d + boundary``
where ``d`` is the simplicial coboundary and ``boundary`` the alternating sum
of face pullbacks.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, Mapping

import numpy as np

from .errors import TruncationError, ValidationError
from .spaces import SemiSimplicialSpace, SimplicialComplex, SimplicialMap, SpaceMap


# ---------------------------------------------------------------------------
# coefficient rings


@dataclass(frozen=True)
class CoefficientRing:
    """One of ``Z``, ``Q``, ``Zmod`` (with modulus ``n``) or ``QmodZ``."""

    tag: str
    n: int = 0

    def __post_init__(self):
        if self.tag not in ("Z", "Q", "Zmod", "QmodZ"):
            raise ValidationError(f"unknown coefficient ring {self.tag!r}")
        if self.tag == "Zmod" and self.n < 2:
            raise ValidationError("Zmod needs a modulus n >= 2")

    @classmethod
    def parse(cls, text: "str | CoefficientRing") -> "CoefficientRing":
        if isinstance(text, CoefficientRing):
            return text
        text = text.strip()
        if text in ("Z", "Q", "QmodZ"):
            return cls(text)
        if text.startswith("Zmod:"):
            try:
                return cls("Zmod", int(text[5:]))
            except ValueError:
                pass
        raise ValidationError(f"cannot parse ring {text!r}; expected Z, Q, Zmod:n or QmodZ")

    def __str__(self):
        return f"Zmod:{self.n}" if self.tag == "Zmod" else self.tag

    @property
    def is_integral(self) -> bool:
        return self.tag in ("Z", "Zmod")

    @property
    def is_rational(self) -> bool:
        return self.tag in ("Q", "QmodZ")

    def zero(self):
        return Fraction(0) if self.is_rational else 0

    def one(self):
        if self.tag == "QmodZ":
            raise ValidationError("QmodZ has no unit")
        return Fraction(1) if self.tag == "Q" else 1

    def normalize(self, value):
        """Coerce ``value`` into the canonical representative of this ring."""
        if self.tag == "Z":
            value = Fraction(value)
            if value.denominator != 1:
                raise ValidationError(f"{value} is not an integer")
            return int(value)
        if self.tag == "Zmod":
            value = Fraction(value)
            if value.denominator != 1:
                raise ValidationError(f"{value} is not an integer")
            return int(value) % self.n
        value = Fraction(value)
        return value % 1 if self.tag == "QmodZ" else value

    def reduce_array(self, arr: np.ndarray) -> np.ndarray:
        if self.tag == "Zmod":
            return arr % self.n
        if self.tag == "QmodZ":
            return arr % 1
        return arr

    def product_ring(self, other: "CoefficientRing") -> "CoefficientRing":
        """Ring in which the product of values from ``self`` and ``other`` lands."""
        if self.tag == "Z":
            return other
        if other.tag == "Z":
            return self
        if self == other and self.tag != "QmodZ":
            return self
        raise ValidationError(f"no product pairing {self} x {other}")


Z = CoefficientRing("Z")
Q = CoefficientRing("Q")
QmodZ = CoefficientRing("QmodZ")


def Zmod(n: int) -> CoefficientRing:
    return CoefficientRing("Zmod", n)


def parse_value(value):
    """Parse a JSON scalar or ``"p/q"`` string into an exact number."""
    if isinstance(value, bool):
        raise ValidationError("booleans are not ring values")
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError):
            raise ValidationError(f"cannot parse {value!r} as a rational") from None
    if isinstance(value, Fraction):
        return value
    raise ValidationError(f"cannot parse {value!r} as an exact ring value")


def format_value(value) -> "int | str":
    value = Fraction(value)
    if value.denominator == 1:
        return int(value)
    return f"{value.numerator}/{value.denominator}"


def _zeros(size: int, ring: CoefficientRing) -> np.ndarray:
    arr = np.empty(size, dtype=object)
    arr[:] = [ring.zero()] * size
    return arr


def _as_ring_array(values, ring: CoefficientRing) -> np.ndarray:
    arr = np.empty(len(values), dtype=object)
    arr[:] = [ring.normalize(v) for v in values]
    return arr


# Linear operators run on integer numerators over one common denominator:
# exact, and far cheaper than Fraction arithmetic element by element.

_SAFE = 1 << 62


def _scaled(values: np.ndarray, ring: CoefficientRing):
    """``(numerators, den)`` with ``values == numerators / den``."""
    if not ring.is_rational:
        return _int_array(values), 1
    den = lcm(*{v.denominator for v in values}) if len(values) else 1
    return _int_array([v.numerator * (den // v.denominator) for v in values]), den


def _int_array(nums, bound: int = 1) -> np.ndarray:
    """int64 if ``bound * max|x|`` stays clear of overflow, else Python integers."""
    arr = np.asarray(nums, dtype=object) if not isinstance(nums, np.ndarray) else nums
    if arr.dtype != object:
        arr = arr.astype(object)
    if not arr.size:
        return np.zeros(0, dtype=np.int64)
    if max(abs(int(arr.max())), abs(int(arr.min()))) * bound < _SAFE:
        return arr.astype(np.int64)
    return arr


def _unscale(nums: np.ndarray, den: int, ring: CoefficientRing) -> np.ndarray:
    """Canonical ring values of ``nums / den``."""
    out = np.empty(len(nums), dtype=object)
    ints = nums.tolist()
    if ring.tag == "Z":
        out[:] = ints
    elif ring.tag == "Zmod":
        out[:] = [x % ring.n for x in ints]
    elif ring.tag == "QmodZ":
        out[:] = [Fraction(x % den, den) for x in ints]
    else:
        out[:] = [Fraction(x, den) for x in ints]
    return out


def _widen(nums: np.ndarray, factor: int) -> np.ndarray:
    """Switch to Python integers when a sum of ``factor`` terms could overflow."""
    if nums.dtype == object or not nums.size:
        return nums
    if int(np.abs(nums).max()) * factor >= _SAFE:
        return nums.astype(object)
    return nums


# ---------------------------------------------------------------------------
# cached combinatorial structure


def _face_table(K: SimplicialComplex, k: int) -> np.ndarray:
    """Row ``j`` lists the indices of the ``k``-faces of the ``j``-th ``(k+1)``-simplex."""
    key = ("faces", k)
    cache = _complex_cache(K)
    if key not in cache:
        simplices = K.simplices(k + 1)
        index = K.simplex_index(k)
        table = np.zeros((len(simplices), k + 2), dtype=np.int64)
        for j, s in enumerate(simplices):
            for i in range(k + 2):
                table[j, i] = index[s[:i] + s[i + 1:]]
        cache[key] = table
    return cache[key]


_COMPLEX_CACHES: dict = {}


def _complex_cache(K: SimplicialComplex) -> dict:
    key = id(K)
    entry = _COMPLEX_CACHES.get(key)
    if entry is None or entry[0] is not K:
        entry = (K, {})
        _COMPLEX_CACHES[key] = entry
    return entry[1]


def pullback_table(f: SimplicialMap, k: int):
    """``(idx, sign)`` arrays: ``(f^* c)[j] = sign[j] * c[idx[j]]``, ``idx = -1`` when degenerate."""
    cache = _complex_cache(f.source)
    key = ("pull", id(f), k)
    hit = cache.get(key)
    if hit is not None and hit[0] is f:
        return hit[1], hit[2]
    simplices = f.source.simplices(k)
    index = f.target.simplex_index(k)
    idx = np.full(len(simplices), -1, dtype=np.int64)
    sign = np.zeros(len(simplices), dtype=np.int64)
    for j, s in enumerate(simplices):
        img = f.image(s)
        if img is None:
            continue
        t, sg = img
        if t not in index:
            raise ValidationError(f"simplicial map sends {s} to a non-simplex")
        idx[j] = index[t]
        sign[j] = sg
    cache[key] = (f, idx, sign)
    return idx, sign


def _pull_nums(nums: np.ndarray, f: SimplicialMap, k: int) -> np.ndarray:
    idx, sign = pullback_table(f, k)
    ext = np.zeros(len(nums) + 1, dtype=nums.dtype)
    ext[:-1] = nums
    return ext[idx] * sign


def _pull_values(values: np.ndarray, f: SimplicialMap, k: int, ring: CoefficientRing) -> np.ndarray:
    nums, den = _scaled(values, ring)
    return _unscale(_pull_nums(nums, f, k), den, ring)


def _d_nums(nums: np.ndarray, K: SimplicialComplex, k: int) -> np.ndarray:
    table = _face_table(K, k)
    nums = _widen(nums, k + 2)
    out = np.zeros(len(table), dtype=nums.dtype)
    for i in range(k + 2):
        if len(table):
            term = nums[table[:, i]]
            out = out + term if i % 2 == 0 else out - term
    return out


def _partial_nums(nums: np.ndarray, space: SemiSimplicialSpace, k: int, p: int) -> np.ndarray:
    faces = space.faces[p + 1]
    nums = _widen(nums, len(faces))
    acc = np.zeros(len(space.levels[p + 1].simplices(k)), dtype=nums.dtype)
    for i, f in enumerate(faces):
        term = _pull_nums(nums, f, k)
        acc = acc + term if i % 2 == 0 else acc - term
    return acc


def _d_values(values: np.ndarray, K: SimplicialComplex, k: int, ring: CoefficientRing) -> np.ndarray:
    nums, den = _scaled(values, ring)
    return _unscale(_d_nums(nums, K, k), den, ring)


# ---------------------------------------------------------------------------
# cochains


class Cochain:
    """A ring-valued function on the oriented ``k``-simplices of ``X_p``."""

    __slots__ = ("space", "k", "p", "ring", "data")

    def __init__(self, space: SemiSimplicialSpace, k: int, p: int, ring, data=None):
        ring = CoefficientRing.parse(ring)
        if p < 0 or p > space.truncation:
            raise TruncationError(f"level {p} is outside the truncation 0..{space.truncation}")
        if k < 0:
            raise ValidationError("negative simplicial degree")
        self.space, self.k, self.p, self.ring = space, k, p, ring
        size = len(space.levels[p].simplices(k))
        if data is None:
            self.data = _zeros(size, ring)
        else:
            if len(data) != size:
                raise ValidationError(f"expected {size} values for bidegree ({k},{p}), got {len(data)}")
            self.data = ring.reduce_array(_as_ring_array(data, ring))

    @classmethod
    def from_values(cls, space, k: int, p: int, ring, values: Mapping):
        """Build from ``{simplex: value}``; simplices may be index tuples or label tuples."""
        c = cls(space, k, p, ring)
        K = space.levels[p]
        index = K.simplex_index(k)
        for simplex, value in values.items():
            key = tuple(simplex)
            if key not in index:
                key = K.simplex_from_labels(simplex)
                if key not in index:
                    raise ValidationError(f"{simplex!r} is not a {k}-simplex of level {p}")
            c.data[index[key]] = c.ring.normalize(value)
        return c

    @classmethod
    def constant(cls, space, p: int, ring, value):
        ring = CoefficientRing.parse(ring)
        n = len(space.levels[p].simplices(0))
        return cls(space, 0, p, ring, [value] * n)

    @property
    def bidegree(self) -> tuple:
        return (self.k, self.p)

    @property
    def simplices(self) -> tuple:
        return self.space.levels[self.p].simplices(self.k)

    def values(self) -> dict:
        """Nonzero values keyed by simplex (index tuples)."""
        return {s: v for s, v in zip(self.simplices, self.data) if v != 0}

    def __getitem__(self, simplex):
        index = self.space.levels[self.p].simplex_index(self.k)
        return self.data[index[tuple(simplex)]]

    def is_zero(self) -> bool:
        return not any(v != 0 for v in self.data)

    def _check_compatible(self, other: "Cochain"):
        if not isinstance(other, Cochain):
            raise TypeError("expected a Cochain")
        if other.space is not self.space and other.space != self.space:
            raise ValidationError("cochains live on different spaces")
        if other.bidegree != self.bidegree or other.ring != self.ring:
            raise ValidationError("bidegree or ring mismatch")

    def _new(self, data, ring=None) -> "Cochain":
        out = Cochain.__new__(Cochain)
        out.space, out.k, out.p = self.space, self.k, self.p
        out.ring = ring or self.ring
        out.data = out.ring.reduce_array(data)
        return out

    def __add__(self, other):
        self._check_compatible(other)
        return self._new(self.data + other.data)

    def __sub__(self, other):
        self._check_compatible(other)
        return self._new(self.data - other.data)

    def __neg__(self):
        return self._new(-self.data)

    def __mul__(self, scalar):
        if isinstance(scalar, (int, Fraction)) and not isinstance(scalar, bool):
            if self.ring.is_integral and Fraction(scalar).denominator != 1:
                raise ValidationError("cannot scale an integral cochain by a fraction")
            return self._new(self.data * scalar)
        return NotImplemented

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, Cochain):
            return NotImplemented
        return (self.bidegree == other.bidegree and self.ring == other.ring
                and (self.space is other.space or self.space == other.space)
                and all(a == b for a, b in zip(self.data, other.data)))

    __hash__ = None

    def cast(self, ring) -> "Cochain":
        """Change of coefficients along ``Z -> Q -> QmodZ``, ``Z -> Zmod n -> QmodZ``."""
        ring = CoefficientRing.parse(ring)
        src = self.ring
        if ring == src:
            return self._new(self.data.copy())
        if src.tag == "Z":
            return self._new(_as_ring_array(self.data, ring), ring)
        if src.tag == "Q" and ring.tag == "QmodZ":
            return self._new(self.data % 1, ring)
        if src.tag == "Zmod" and ring.tag == "QmodZ":
            return self._new(_as_ring_array([Fraction(int(v), src.n) for v in self.data], ring), ring)
        if src.tag == "Zmod" and ring.tag == "Zmod" and src.n % ring.n == 0:
            return self._new(self.data % ring.n, ring)
        if src.tag == "Q" and ring.tag == "Z":
            return self._new(_as_ring_array(self.data, ring), ring)
        raise ValidationError(f"no coefficient map {src} -> {ring}")

    def lift(self) -> "Cochain":
        """Canonical lift: ``QmodZ -> Q`` with values in ``[0, 1)``, ``Zmod -> Z`` in ``[0, n)``."""
        if self.ring.tag == "QmodZ":
            return self._new(self.data.copy(), Q)
        if self.ring.tag == "Zmod":
            return self._new(self.data.copy(), Z)
        raise ValidationError(f"{self.ring} has no canonical lift")

    def to_vector(self) -> np.ndarray:
        return self.data.copy()

    def __repr__(self):
        return f"Cochain(bidegree=({self.k},{self.p}), ring={self.ring}, nonzero={len(self.values())})"


def coboundary_d(c: Cochain) -> Cochain:
    """Simplicial coboundary on one level: bidegree ``(k, p) -> (k+1, p)``."""
    K = c.space.levels[c.p]
    out = Cochain(c.space, c.k + 1, c.p, c.ring)
    if out.data.size:
        out.data = c.ring.reduce_array(_d_values(c.data, K, c.k, c.ring))
    return out


def boundary_partial(c: Cochain) -> Cochain:
    """Alternating sum of face pullbacks: bidegree ``(k, p) -> (k, p+1)``."""
    P = c.space.truncation
    if c.p + 1 > P:
        raise TruncationError(f"boundary from level {c.p} needs level {c.p + 1}, truncation is {P}")
    out = Cochain(c.space, c.k, c.p + 1, c.ring)
    nums, den = _scaled(c.data, c.ring)
    out.data = _unscale(_partial_nums(nums, c.space, c.k, c.p), den, c.ring)
    return out


def pullback_cochain(f: SimplicialMap, c: Cochain, target_space: SemiSimplicialSpace, level: int) -> Cochain:
    out = Cochain(target_space, c.k, level, c.ring)
    out.data = _pull_values(c.data, f, c.k, c.ring)
    return out


# ---------------------------------------------------------------------------
# total cochains


class TotalCochain:
    """Components ``(n - p, p)`` for ``0 <= p <= min(n, P)`` sharing a space and ring."""

    __slots__ = ("space", "degree", "ring", "components")

    def __init__(self, space: SemiSimplicialSpace, degree: int, ring, components: Mapping[int, Cochain] | None = None):
        ring = CoefficientRing.parse(ring)
        if degree < 0:
            raise ValidationError("negative total degree")
        self.space, self.degree, self.ring = space, degree, ring
        given = components or {}
        for p, c in given.items():
            if p not in self.levels:
                raise ValidationError(f"no component at level {p} for total degree {degree}")
            if c.bidegree != (degree - p, p) or c.ring != ring:
                raise ValidationError(f"component at level {p} has bidegree {c.bidegree} / ring {c.ring}")
        self.components = {p: given[p] if p in given else Cochain(space, degree - p, p, ring) for p in self.levels}

    @property
    def levels(self) -> range:
        return range(0, min(self.degree, self.space.truncation) + 1)

    @classmethod
    def zero(cls, space, degree, ring):
        return cls(space, degree, ring)

    @classmethod
    def from_cochain(cls, c: Cochain) -> "TotalCochain":
        return cls(c.space, c.k + c.p, c.ring, {c.p: c})

    @classmethod
    def from_vector(cls, space, degree, ring, vector) -> "TotalCochain":
        ring = CoefficientRing.parse(ring)
        out = cls(space, degree, ring)
        pos = 0
        vector = list(vector)
        for p in out.levels:
            size = len(out.components[p].data)
            out.components[p] = Cochain(space, degree - p, p, ring, vector[pos:pos + size])
            pos += size
        if pos != len(vector):
            raise ValidationError(f"vector has length {len(vector)}, basis has {pos}")
        return out

    def __getitem__(self, p: int) -> Cochain:
        return self.components[p]

    def to_vector(self) -> np.ndarray:
        parts = [self.components[p].data for p in self.levels]
        return np.concatenate(parts) if parts else np.empty(0, dtype=object)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components.values())

    def _check_compatible(self, other):
        if not isinstance(other, TotalCochain):
            raise TypeError("expected a TotalCochain")
        if other.degree != self.degree or other.ring != self.ring:
            raise ValidationError("degree or ring mismatch")
        if other.space is not self.space and other.space != self.space:
            raise ValidationError("total cochains live on different spaces")

    def _map(self, fn) -> "TotalCochain":
        return TotalCochain(self.space, self.degree, self.ring, {p: fn(c) for p, c in self.components.items()})

    def __add__(self, other):
        self._check_compatible(other)
        return TotalCochain(self.space, self.degree, self.ring,
                            {p: self.components[p] + other.components[p] for p in self.levels})

    def __sub__(self, other):
        self._check_compatible(other)
        return TotalCochain(self.space, self.degree, self.ring,
                            {p: self.components[p] - other.components[p] for p in self.levels})

    def __neg__(self):
        return self._map(lambda c: -c)

    def __mul__(self, scalar):
        if isinstance(scalar, (int, Fraction)) and not isinstance(scalar, bool):
            return self._map(lambda c: c * scalar)
        return NotImplemented

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, TotalCochain):
            return NotImplemented
        return (self.degree == other.degree and self.ring == other.ring
                and all(self.components[p] == other.components[p] for p in self.levels))

    __hash__ = None

    def cast(self, ring) -> "TotalCochain":
        ring = CoefficientRing.parse(ring)
        return TotalCochain(self.space, self.degree, ring, {p: c.cast(ring) for p, c in self.components.items()})

    def lift(self) -> "TotalCochain":
        comps = {p: c.lift() for p, c in self.components.items()}
        ring = next(iter(comps.values())).ring if comps else Q
        return TotalCochain(self.space, self.degree, ring, comps)

    def nonzero_bidegrees(self) -> list:
        return [(c.k, p) for p, c in self.components.items() if not c.is_zero()]

    def __repr__(self):
        return f"TotalCochain(degree={self.degree}, ring={self.ring}, support={self.nonzero_bidegrees()})"


def total_delta(c: TotalCochain) -> TotalCochain:
    """``delta = (-1)^p d + boundary``; raises if a nonzero component would leave the truncation."""
    P = c.space.truncation
    n = c.degree
    out = TotalCochain(c.space, n + 1, c.ring)
    if n >= P and not c.components[P].is_zero():
        raise TruncationError(
            f"degree-{n} cochain has a nonzero level-{P} component; its boundary needs level {P + 1}")
    nums, den = _scaled_total(c)
    for p in out.levels:
        acc = None
        if p <= n and out.components[p].data.size:
            term = _d_nums(nums[p], c.space.levels[p], n - p)
            acc = term if p % 2 == 0 else -term
        if p >= 1:
            term = _partial_nums(nums[p - 1], c.space, n - p + 1, p - 1)
            if acc is None:
                acc = term
            else:
                if acc.dtype != term.dtype:
                    acc, term = acc.astype(object), term.astype(object)
                acc = _widen(acc, 2) + _widen(term, 2)
        if acc is not None:
            out.components[p].data = _unscale(acc, den, c.ring)
    return out


def is_cocycle(c: TotalCochain) -> bool:
    return total_delta(c).is_zero()


def pullback(f: SpaceMap, c):
    """Pull a (total) cochain on ``f.target`` back to ``f.source`` level by level."""
    if isinstance(c, TotalCochain):
        if max(c.levels) > f.truncation:
            raise TruncationError("space map is not defined on every level of the cochain")
        return TotalCochain(f.source, c.degree, c.ring,
                            {p: pullback_cochain(f.level_maps[p], comp, f.source, p) for p, comp in c.components.items()})
    if c.p > f.truncation:
        raise TruncationError("space map is not defined on the cochain's level")
    return pullback_cochain(f.level_maps[c.p], c, f.source, c.p)


# ---------------------------------------------------------------------------
# cup product


def _cup_tables(space: SemiSimplicialSpace, k: int, p: int, l: int, q: int):
    key = ("cup", k, p, l, q)
    if key in space._cache:
        return space._cache[key]
    n = p + q
    K = space.levels[n]
    front = space.front_map(n, p)
    back = space.back_map(n, q)
    fidx = space.levels[p].simplex_index(k)
    bidx = space.levels[q].simplex_index(l)
    rows = K.simplices(k + l)
    ia = np.full(len(rows), -1, dtype=np.int64)
    ib = np.full(len(rows), -1, dtype=np.int64)
    sg = np.zeros(len(rows), dtype=np.int64)
    for j, s in enumerate(rows):
        fa = front.image(s[:k + 1])
        fb = back.image(s[k:])
        if fa is None or fb is None:
            continue
        ia[j] = fidx[fa[0]]
        ib[j] = bidx[fb[0]]
        sg[j] = fa[1] * fb[1]
    space._cache[key] = (ia, ib, sg)
    return ia, ib, sg


def _cup_nums(space, k, p, na, l, q, nb):
    """Integer core of the cup product on numerators."""
    ia, ib, sg = _cup_tables(space, k, p, l, q)
    if na.dtype != object and nb.dtype != object and na.size and nb.size:
        if int(np.abs(na).max()) * int(np.abs(nb).max()) >= _SAFE // 64:
            na, nb = na.astype(object), nb.astype(object)
    za = np.zeros(len(na) + 1, dtype=na.dtype)
    za[:-1] = na
    zb = np.zeros(len(nb) + 1, dtype=nb.dtype)
    zb[:-1] = nb
    vals = za[ia] * zb[ib] * sg
    return -vals if (k * q) % 2 else vals


def _scaled_total(c: "TotalCochain"):
    """Numerators of every component over one common denominator."""
    if not c.ring.is_rational:
        return {p: _int_array(comp.data) for p, comp in c.components.items()}, 1
    den = 1
    for comp in c.components.values():
        for v in comp.data:
            den = lcm(den, v.denominator)
    nums = {p: _int_array([v.numerator * (den // v.denominator) for v in comp.data])
            for p, comp in c.components.items()}
    return nums, den


def cup(a, b):
    """Cup product ``a u b = (-1)^{kq} front^* a  AW  back^* b``.

    Works on bidegree cochains and on total cochains (by bilinearity).  The
    ``front``/``back`` projections are composites of last/zeroth faces, i.e.
    the first ``p`` and last ``q`` arrows on a nerve.
    """
    if isinstance(a, TotalCochain) or isinstance(b, TotalCochain):
        if isinstance(a, Cochain):
            a = TotalCochain.from_cochain(a)
        if isinstance(b, Cochain):
            b = TotalCochain.from_cochain(b)
        if a.space is not b.space and a.space != b.space:
            raise ValidationError("cochains live on different spaces")
        ring = a.ring.product_ring(b.ring)
        out = TotalCochain(a.space, a.degree + b.degree, ring)
        P = a.space.truncation
        na, da = _scaled_total(a)
        nb, db = _scaled_total(b)
        acc = {}
        for p, xa in na.items():
            for q, xb in nb.items():
                if not (xa.any() and xb.any()):
                    continue
                if p + q > P:
                    raise TruncationError(f"cup of levels {p} and {q} needs level {p + q} > {P}")
                if p + q not in out.components or not out.components[p + q].data.size:
                    continue
                vals = _cup_nums(a.space, a.degree - p, p, xa, b.degree - q, q, xb)
                prev = acc.get(p + q)
                if prev is None:
                    acc[p + q] = vals
                else:
                    if prev.dtype != vals.dtype:
                        prev, vals = prev.astype(object), vals.astype(object)
                    acc[p + q] = _widen(prev, 2) + _widen(vals, 2)
        for n, vals in acc.items():
            out.components[n].data = _unscale(vals, da * db, ring)
        return out
    if a.space is not b.space and a.space != b.space:
        raise ValidationError("cochains live on different spaces")
    ring = a.ring.product_ring(b.ring)
    k, p, l, q = a.k, a.p, b.k, b.p
    if p + q > a.space.truncation:
        raise TruncationError(f"cup needs level {p + q}, truncation is {a.space.truncation}")
    out = Cochain(a.space, k + l, p + q, ring)
    if not out.data.size:
        return out
    na, da = _scaled(a.data, a.ring)
    nb, db = _scaled(b.data, b.ring)
    out.data = _unscale(_cup_nums(a.space, k, p, na, l, q, nb), da * db, ring)
    return out


# ---------------------------------------------------------------------------
# matrices


def total_basis(space: SemiSimplicialSpace, n: int) -> list:
    """Basis of total degree ``n``: ``(p, simplex)`` in lexicographic order."""
    return [(p, s) for p in range(0, min(n, space.truncation) + 1)
            for s in space.levels[p].simplices(n - p)]


def total_dimension(space: SemiSimplicialSpace, n: int) -> int:
    if n < 0:
        return 0
    return sum(len(space.levels[p].simplices(n - p)) for p in range(0, min(n, space.truncation) + 1))


def simplicial_coboundary_matrix(K: SimplicialComplex, k: int) -> np.ndarray:
    """Integer matrix of ``d: C^k(K) -> C^{k+1}(K)``; ``k = -1`` gives the zero map from 0."""
    if k < 0:
        return np.zeros((len(K.simplices(0)), 0), dtype=np.int64)
    table = _face_table(K, k)
    M = np.zeros((len(table), len(K.simplices(k))), dtype=np.int64)
    for i in range(k + 2):
        if len(table):
            np.add.at(M, (np.arange(len(table)), table[:, i]), 1 if i % 2 == 0 else -1)
    return M


def _pullback_matrix(f: SimplicialMap, k: int) -> np.ndarray:
    idx, sign = pullback_table(f, k)
    M = np.zeros((len(idx), len(f.target.simplices(k))), dtype=np.int64)
    ok = idx >= 0
    np.add.at(M, (np.nonzero(ok)[0], idx[ok]), sign[ok])
    return M


def delta_matrix(space: SemiSimplicialSpace, n: int) -> np.ndarray:
    """Integer matrix of ``delta`` from total degree ``n`` to ``n + 1``."""
    key = ("delta_matrix", n)
    if key in space._cache:
        return space._cache[key]
    P = space.truncation
    if n < 0:
        M = np.zeros((total_dimension(space, 0), 0), dtype=np.int64)
        space._cache[key] = M
        return M
    if n + 1 > P:
        raise TruncationError(f"delta from degree {n} needs level {n + 1}, truncation is {P}")
    col_off, off = {}, 0
    for p in range(0, n + 1):
        col_off[p] = off
        off += len(space.levels[p].simplices(n - p))
    ncols = off
    row_off, off = {}, 0
    for p in range(0, n + 2):
        row_off[p] = off
        off += len(space.levels[p].simplices(n + 1 - p))
    M = np.zeros((off, ncols), dtype=np.int64)
    for p in range(0, n + 1):
        k = n - p
        ncp = len(space.levels[p].simplices(k))
        if ncp == 0:
            continue
        D = simplicial_coboundary_matrix(space.levels[p], k)
        if D.size:
            M[row_off[p]:row_off[p] + D.shape[0], col_off[p]:col_off[p] + ncp] += D if p % 2 == 0 else -D
        for i, f in enumerate(space.faces[p + 1]):
            F = _pullback_matrix(f, k)
            if F.size:
                M[row_off[p + 1]:row_off[p + 1] + F.shape[0], col_off[p]:col_off[p] + ncp] += F if i % 2 == 0 else -F
    M.setflags(write=False)
    space._cache[key] = M
    return M


def assemble_matrices(space: SemiSimplicialSpace, ring, n_max: int) -> list:
    """``[M_0, ..., M_{n_max}]`` with ``M_n`` the matrix of ``delta`` in degree ``n``.

    Entries are integers for every ring (the differential has integer
    coefficients); apply with ``ring`` arithmetic afterwards.
    """
    CoefficientRing.parse(ring)
    if n_max + 1 > space.truncation:
        raise TruncationError(f"matrices up to degree {n_max} need truncation {n_max + 1}")
    return [delta_matrix(space, n) for n in range(n_max + 1)]


def apply_matrix(M: np.ndarray, vector, ring) -> np.ndarray:
    ring = CoefficientRing.parse(ring)
    v = np.asarray(list(vector), dtype=object)
    if M.shape[1] == 0:
        return _zeros(M.shape[0], ring)
    return ring.reduce_array(M.astype(object) @ v)


# ---------------------------------------------------------------------------
# random cochains (for property tests and the corpus runner)


def _random_value(rng: random.Random, ring: CoefficientRing, bound: int = 3):
    if ring.tag == "Z":
        return rng.randint(-bound, bound)
    if ring.tag == "Zmod":
        return rng.randrange(ring.n)
    den = rng.choice([1, 2, 3, 4, 6])
    num = rng.randint(-bound * den, bound * den)
    return ring.normalize(Fraction(num, den))


def random_cochain(space, k: int, p: int, ring, rng: random.Random, density: float = 0.6) -> Cochain:
    ring = CoefficientRing.parse(ring)
    size = len(space.levels[p].simplices(k))
    vals = [_random_value(rng, ring) if rng.random() < density else ring.zero() for _ in range(size)]
    out = Cochain(space, k, p, ring)
    out.data[:] = vals  # already canonical
    return out


def random_total_cochain(space, n: int, ring, rng: random.Random, density: float = 0.6) -> TotalCochain:
    ring = CoefficientRing.parse(ring)
    comps = {p: random_cochain(space, n - p, p, ring, rng, density)
             for p in range(0, min(n, space.truncation) + 1)}
    return TotalCochain(space, n, ring, comps)


def as_total(values: Iterable, space, degree, ring) -> TotalCochain:
    return TotalCochain.from_vector(space, degree, ring, values)
