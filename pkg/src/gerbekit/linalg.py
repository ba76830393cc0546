"""Exact integer linear algebra: Smith normal form and solves over Z, Q, Z/m, Q/Z.

Matrices are numpy arrays.  Work starts in ``int64`` and switches to
``object`` (Python integers) as soon as an update could overflow, so results
are always exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

import numpy as np

from .errors import ValidationError

_LIMIT = 1 << 62


@dataclass
class SmithDecomposition:
    """``U @ A @ V == D`` with ``U``, ``V`` unimodular and ``D`` diagonal, ``d_1 | d_2 | ...``."""

    U: np.ndarray
    D: np.ndarray
    V: np.ndarray
    Uinv: np.ndarray = field(repr=False, default=None)
    Vinv: np.ndarray = field(repr=False, default=None)

    @property
    def diagonal(self) -> list:
        k = min(self.D.shape) if self.D.ndim == 2 else 0
        return [int(self.D[i, i]) for i in range(k)]

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d != 0)

    @property
    def invariant_factors(self) -> list:
        return [d for d in self.diagonal if d != 0]


class _Work:
    """Matrix being reduced plus the optional transforms, kept in a common dtype."""

    def __init__(self, A, track_u: bool, track_v: bool):
        A = np.asarray(A)
        if A.dtype != object:
            A = A.astype(np.int64)
        m, n = A.shape
        self.A = A.copy()
        dt = A.dtype
        self.U = np.eye(m, dtype=dt) if track_u else None
        self.Ui = np.eye(m, dtype=dt) if track_u else None
        self.V = np.eye(n, dtype=dt) if track_v else None
        self.Vi = np.eye(n, dtype=dt) if track_v else None
        if dt == object:
            self._to_object()
        elif self.A.size and int(np.abs(self.A).max()) >= (1 << 31):
            self._to_object()

    @property
    def is_object(self):
        return self.A.dtype == object

    def _to_object(self):
        def conv(x):
            if x is None:
                return None
            out = np.empty(x.shape, dtype=object)
            out[...] = [[int(v) for v in row] for row in x.tolist()] if x.ndim == 2 else x.tolist()
            return out
        self.A, self.U, self.Ui, self.V, self.Vi = map(conv, (self.A, self.U, self.Ui, self.V, self.Vi))

    def _guard(self, q, *arrays):
        """Switch to Python integers if ``x - q * y`` might overflow ``int64``."""
        if self.is_object or not len(q):
            return
        qmax = int(np.abs(q).max())
        bound = 0
        for arr in arrays:
            if arr is not None and arr.size:
                bound = max(bound, int(np.abs(arr).max()))
        if qmax * bound * len(q) + bound >= _LIMIT:
            self._to_object()

    # row i -= q * row t for each i in rows
    def row_eliminate(self, t, rows, q):
        self._guard(q, self.A, self.U, self.Ui)
        if self.is_object:
            q = q.astype(object)
        A = self.A
        A[rows] -= np.outer(q, A[t])
        if self.U is not None:
            self.U[rows] -= np.outer(q, self.U[t])
            self.Ui[:, t] += self.Ui[:, rows] @ q

    # col j -= q * col t for each j in cols
    def col_eliminate(self, t, cols, q):
        self._guard(q, self.A, self.V, self.Vi)
        if self.is_object:
            q = q.astype(object)
        A = self.A
        A[:, cols] -= np.outer(A[:, t], q)
        if self.V is not None:
            self.V[:, cols] -= np.outer(self.V[:, t], q)
            self.Vi[t] += q @ self.Vi[cols]

    def swap_rows(self, i, j):
        if i == j:
            return
        self.A[[i, j]] = self.A[[j, i]]
        if self.U is not None:
            self.U[[i, j]] = self.U[[j, i]]
            self.Ui[:, [i, j]] = self.Ui[:, [j, i]]

    def swap_cols(self, i, j):
        if i == j:
            return
        self.A[:, [i, j]] = self.A[:, [j, i]]
        if self.V is not None:
            self.V[:, [i, j]] = self.V[:, [j, i]]
            self.Vi[[i, j]] = self.Vi[[j, i]]

    def negate_row(self, i):
        self.A[i] = -self.A[i]
        if self.U is not None:
            self.U[i] = -self.U[i]
            self.Ui[:, i] = -self.Ui[:, i]

    def add_row(self, src, dst):
        """row dst += row src."""
        q = np.array([-1], dtype=self.A.dtype)
        self.row_eliminate(src, np.array([dst]), q)


def _round_quotient(a: np.ndarray, p: int) -> np.ndarray:
    """Nearest-integer quotient ``a / p`` for ``p > 0`` (remainder in ``[-p/2, p/2)``)."""
    return (2 * a + p) // (2 * p)


def _smith(A, track_u=True, track_v=True) -> _Work:
    W = _Work(A, track_u, track_v)
    m, n = W.A.shape
    t = 0
    while t < m and t < n:
        sub = W.A[t:, t:]
        nz = sub != 0
        if not nz.any():
            break
        absub = np.abs(sub)
        # pivot: a unit if there is one, else the smallest magnitude entry
        ones = np.argwhere(absub == 1)
        if len(ones):
            i, j = ones[0]
        else:
            where = np.argwhere(nz)
            i, j = where[int(np.argmin(absub[nz]))]
        W.swap_rows(t, t + int(i))
        W.swap_cols(t, t + int(j))
        while True:
            if W.A[t, t] < 0:
                W.negate_row(t)
            p = int(W.A[t, t])
            col = W.A[t + 1:, t]
            rows = np.nonzero(col)[0]
            if len(rows):
                q = _round_quotient(col[rows], p)
                W.row_eliminate(t, rows + t + 1, q)
            row = W.A[t, t + 1:]
            cols = np.nonzero(row)[0]
            if len(cols):
                q = _round_quotient(row[cols], p)
                W.col_eliminate(t, cols + t + 1, q)
            col = W.A[t + 1:, t]
            row = W.A[t, t + 1:]
            rest_r = np.nonzero(col)[0]
            rest_c = np.nonzero(row)[0]
            if len(rest_r) or len(rest_c):
                # a remainder smaller than the pivot survived; move it to the pivot
                best, where = None, None
                for r in rest_r:
                    v = abs(int(col[r]))
                    if best is None or v < best:
                        best, where = v, ("r", int(r))
                for c in rest_c:
                    v = abs(int(row[c]))
                    if best is None or v < best:
                        best, where = v, ("c", int(c))
                if where[0] == "r":
                    W.swap_rows(t, t + 1 + where[1])
                else:
                    W.swap_cols(t, t + 1 + where[1])
                continue
            if p != 1:
                rest = W.A[t + 1:, t + 1:]
                bad = np.argwhere(rest % p != 0)
                if len(bad):
                    W.add_row(t + 1 + int(bad[0][0]), t)
                    continue
            break
        t += 1
    return W


def smith_normal_form(A, transforms: bool = True) -> SmithDecomposition:
    """Smith normal form of an integer matrix (exact, arbitrary precision)."""
    A = np.asarray(A)
    if A.ndim != 2:
        raise ValidationError("smith_normal_form expects a 2-d matrix")
    W = _smith(A, transforms, transforms)
    D = W.A
    if D.dtype == object:
        small = all(abs(int(v)) < (1 << 62) for v in D.flat)
        if small:
            D = D.astype(np.int64)
    return SmithDecomposition(W.U, D, W.V, W.Ui, W.Vi)


def invariant_factors(A) -> list:
    return smith_normal_form(A, transforms=False).invariant_factors


def rank_over_prime(A, p: int) -> int:
    """Rank of an integer matrix over ``GF(p)`` (plain Gaussian elimination)."""
    M = (np.asarray(A, dtype=object) % p).tolist()
    rows = len(M)
    cols = len(M[0]) if rows else 0
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if M[i][c] % p), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = pow(int(M[r][c]), -1, p)
        M[r] = [(v * inv) % p for v in M[r]]
        for i in range(rows):
            if i != r and M[i][c] % p:
                f = M[i][c]
                M[i] = [(a - f * b) % p for a, b in zip(M[i], M[r])]
        r += 1
    return r


def rational_rank(A) -> int:
    return smith_normal_form(A, transforms=False).rank


def as_object(M) -> np.ndarray:
    M = np.asarray(M)
    if M.dtype == object:
        return M
    out = np.empty(M.shape, dtype=object)
    if M.size:
        out[...] = M.tolist()
    return out


# ---------------------------------------------------------------------------
# solving B y = b


class RingSolver:
    """Solve ``B @ y = b`` over a coefficient ring using one Smith decomposition of ``B``.

    ``ring`` is a :class:`~gerbekit.cochains.CoefficientRing`.  Free
    parameters are set to zero, so solutions are deterministic.
    """

    def __init__(self, B):
        B = np.asarray(B)
        self.shape = B.shape
        self.snf = smith_normal_form(B) if B.size else None

    def solve(self, b, ring):
        m, n = self.shape
        b = list(b)
        if len(b) != m:
            raise ValidationError(f"right-hand side has length {len(b)}, expected {m}")
        tag = ring.tag
        if tag == "QmodZ":
            b = [Fraction(v) % 1 for v in b]
        elif tag == "Zmod":
            b = [int(v) % ring.n for v in b]
        elif tag == "Z":
            b = [Fraction(v) for v in b]
            if any(v.denominator != 1 for v in b):
                return None
            b = [int(v) for v in b]
        else:
            b = [Fraction(v) for v in b]
        if self.snf is None:
            ok = all(_is_zero_in(v, ring) for v in b)
            return np.array([ring.zero()] * n, dtype=object) if ok else None
        S = self.snf
        Ub = as_object(S.U) @ np.array(b, dtype=object)
        diag = S.diagonal
        r = S.rank
        y = [ring.zero()] * n
        for i in range(r):
            d = diag[i]
            v = Ub[i]
            if tag == "Z":
                if v % d:
                    return None
                y[i] = v // d
            elif tag == "Q":
                y[i] = Fraction(v) / d
            elif tag == "Zmod":
                mod = ring.n
                g = gcd(d, mod)
                if v % g:
                    return None
                mg = mod // g
                y[i] = ((v // g) * pow((d // g) % mg, -1, mg)) % mg if mg > 1 else 0
            else:
                y[i] = Fraction(v) / d
        for i in range(r, m):
            if not _is_zero_in(Ub[i], ring):
                return None
        x = as_object(S.V) @ np.array(y, dtype=object)
        return ring.reduce_array(x)


def _is_zero_in(v, ring) -> bool:
    if ring.tag == "Zmod":
        return int(v) % ring.n == 0
    if ring.tag == "QmodZ":
        return Fraction(v).denominator == 1
    return v == 0
