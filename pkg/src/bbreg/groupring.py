"""Group rings R[G], the augmentation filtration and its graded pieces.

Elements are stored densely: an array of shape ``(|G|, d)`` indexed by the
lexicographic enumeration of the group (see :mod:`bbreg.groups`).  Elements
of M (x) R[G] for a free module M of rank k are arrays of shape
``(k, |G|, d)``.

The augmentation ideal I is generated by the elements x_i = g_i - 1 for the
cyclic generators g_i.  Its powers are computed as R-submodules of R[G] in
one of two ways:

* ``direct``: I^1 is spanned by g - 1 and I^(r+1) is the Howell closure of
  {(g_i - 1) b : b in a basis of I^r}.  Exact but quadratic in |G|.
* ``graded``: in the monomial basis x^f (0 <= f_i < |g_i|) of R[G], every
  x^f with |f| >= r lies in I^r, so I^r is determined by its projection U_r
  onto the few coordinates with |f| < r.  That projection is assembled from
  one-variable ideals by truncated tensor products.

Both routes produce the same submodules; the test suite checks this.  The
coordinates of an element in the monomial basis are exactly its Taylor
coefficients, the change of basis being sigma^j = sum_k C(j, k) x^k.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping

import numpy as np

from .coeffring import CoeffRing, HowellBasis, RingElem
from .errors import (
    DepthExceeded,
    DimensionMismatch,
    NotInFiltrationLevel,
    RingMismatch,
    SizeCapExceeded,
)
from .groups import GroupElem, TowerGroup

DEFAULT_SIZE_CAP = 2000
DIRECT_METHOD_LIMIT = 300


# ---------------------------------------------------------------------------
# index tables


@lru_cache(maxsize=64)
def _tables(group: TowerGroup) -> tuple[np.ndarray, np.ndarray]:
    """(sub_table, neg_table) with sub_table[k, g] = index(k - g)."""
    n = group.size
    orders = group.orders
    if not orders:
        return np.zeros((1, 1), dtype=np.int64), np.zeros(1, dtype=np.int64)
    coords = np.array(np.unravel_index(np.arange(n), orders)).T  # (n, axes)
    diff = (coords[:, None, :] - coords[None, :, :]) % np.array(orders)
    sub = np.ravel_multi_index(tuple(diff.transpose(2, 0, 1)), orders)
    neg = np.ravel_multi_index(tuple(((-coords) % np.array(orders)).T), orders)
    return sub.astype(np.int64), neg.astype(np.int64)


def check_size(group: TowerGroup, ring: CoeffRing, cap: int = DEFAULT_SIZE_CAP) -> None:
    if group.size * ring.d > cap:
        raise SizeCapExceeded(f"|G|*d = {group.size * ring.d} exceeds the cap {cap}")


def convolve(ring: CoeffRing, group: TowerGroup, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Group-ring product of arrays with trailing axes (|G|, d), broadcasting leading axes."""
    sub, _ = _tables(group)
    b_circ = b[..., sub, :]  # (..., k, g, d) = b[k - g]
    if ring.d == 1:
        out = np.einsum("...g,...kg->...k", a[..., 0], b_circ[..., 0])
        return (out % ring.q)[..., None]
    prod = ring.mul(a[..., None, :, :], b_circ)
    return prod.sum(axis=-2) % ring.q


def convolve_outer(ring: CoeffRing, group: TowerGroup, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """L[i, j] = X[i] * Y[j] in R[G] for X (a, |G|, d), Y (b, |G|, d)."""
    sub, _ = _tables(group)
    n = group.size
    a, b = X.shape[0], Y.shape[0]
    q = ring.q
    Ycirc = Y[:, sub, :]  # (b, k, g, d)
    if ring.d == 1:
        Ym = Ycirc[..., 0].transpose(2, 0, 1).reshape(n, b * n)  # (g, b*k)
        out = (X[..., 0] @ Ym) % q
        return out.reshape(a, b, n)[..., None]
    out = np.zeros((a, b, n, ring.d), dtype=np.int64)
    T = ring.mul_table
    for i in range(ring.d):
        Xi = X[..., i]
        for j in range(ring.d):
            Ym = Ycirc[..., j].transpose(2, 0, 1).reshape(n, b * n)
            prod = ((Xi @ Ym) % q).reshape(a, b, n)
            out += prod[..., None] * T[i, j][None, None, None, :]
            out %= q
    return out


# ---------------------------------------------------------------------------
# elements


@dataclass(frozen=True, eq=False)
class GroupRingElem:
    """An element of R[G], stored densely with a sparse view at the boundary."""

    ring: CoeffRing
    group: TowerGroup
    data: np.ndarray = field(repr=False)  # (|G|, d)

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.int64) % self.ring.q
        if data.shape != (self.group.size, self.ring.d):
            raise DimensionMismatch(f"expected shape {(self.group.size, self.ring.d)}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    # construction ---------------------------------------------------------------

    @classmethod
    def zero(cls, ring: CoeffRing, group: TowerGroup) -> "GroupRingElem":
        return cls(ring, group, ring.zeros(group.size))

    @classmethod
    def from_dict(cls, ring: CoeffRing, group: TowerGroup, coeffs: Mapping) -> "GroupRingElem":
        """Build from {GroupElem: coefficient}; coefficients may be ints or RingElems."""
        data = ring.zeros(group.size)
        for g, c in coeffs.items():
            data[group.index(g)] += np.array(ring(c).coeffs)
        return cls(ring, group, data)

    @classmethod
    def basis(cls, ring: CoeffRing, group: TowerGroup, g: GroupElem, coeff=1) -> "GroupRingElem":
        return cls.from_dict(ring, group, {g: coeff})

    @classmethod
    def from_ints(cls, ring: CoeffRing, group: TowerGroup, ints) -> "GroupRingElem":
        return cls(ring, group, ring.scalars(np.asarray(ints).reshape(group.size)))

    # views ------------------------------------------------------------------------

    @property
    def coeffs(self) -> dict[GroupElem, RingElem]:
        """Sparse map from group elements to nonzero coefficients."""
        out = {}
        for idx in np.flatnonzero(self.data.any(axis=1)):
            out[self.group.element(int(idx))] = self.ring(self.data[idx].tolist())
        return out

    def ambient(self) -> np.ndarray:
        return self.data.reshape(self.group.ambient_shape + (self.ring.d,))

    # arithmetic -------------------------------------------------------------------

    def _check(self, other: "GroupRingElem") -> None:
        if not isinstance(other, GroupRingElem):
            raise TypeError("expected a GroupRingElem")
        if other.ring != self.ring or other.group != self.group:
            raise RingMismatch("group ring elements over different rings or groups")

    def __add__(self, other):
        if isinstance(other, (int, RingElem)):
            other = GroupRingElem.basis(self.ring, self.group, self.group.identity(), other)
        self._check(other)
        return GroupRingElem(self.ring, self.group, self.data + other.data)

    __radd__ = __add__

    def __neg__(self):
        return GroupRingElem(self.ring, self.group, -self.data)

    def __sub__(self, other):
        return self + (-other if isinstance(other, GroupRingElem) else -self.ring(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, np.integer, RingElem)):
            c = np.array(self.ring(other).coeffs)
            return GroupRingElem(self.ring, self.group, self.ring.mul(self.data, c[None]))
        return gr_mul(self, other)

    def __rmul__(self, other):
        return self * other

    def __eq__(self, other) -> bool:
        if not isinstance(other, GroupRingElem):
            return NotImplemented
        return (
            self.ring == other.ring
            and self.group == other.group
            and np.array_equal(self.data, other.data)
        )

    def __hash__(self):
        return hash((self.ring, self.group, self.data.tobytes()))

    def is_zero(self) -> bool:
        return not self.data.any()

    def __repr__(self) -> str:
        terms = [f"{c.coeffs[0] if self.ring.d == 1 else list(c.coeffs)}*{g}" for g, c in self.coeffs.items()]
        return " + ".join(terms) if terms else "0"


def gr_mul(a: GroupRingElem, b: GroupRingElem) -> GroupRingElem:
    """Convolution product in R[G]."""
    a._check(b)
    return GroupRingElem(a.ring, a.group, convolve(a.ring, a.group, a.data, b.data))


def star(a: GroupRingElem) -> GroupRingElem:
    """The involution sum a_g g -> sum a_g g^-1."""
    _, neg = _tables(a.group)
    return GroupRingElem(a.ring, a.group, a.data[neg])


def aug(a: GroupRingElem) -> RingElem:
    """Augmentation: the sum of all coefficients."""
    return a.ring((a.data.sum(axis=0) % a.ring.q).tolist())


def star_array(group: TowerGroup, arr: np.ndarray, axis: int = -2) -> np.ndarray:
    """Apply the involution to a dense array whose ``axis`` runs over the group."""
    _, neg = _tables(group)
    return np.take(arr, neg, axis=axis)


# ---------------------------------------------------------------------------
# Taylor coordinates


def binomial_matrix(n: int, rows: int | None = None) -> np.ndarray:
    """C[k, j] = binom(j, k) for 0 <= k < rows, 0 <= j < n (exact integers)."""
    rows = n if rows is None else rows
    return np.array([[math.comb(j, k) for j in range(n)] for k in range(rows)], dtype=object)


def inverse_binomial_matrix(n: int) -> np.ndarray:
    """B[k, j] = binom(k, j) (-1)^(k-j): coefficients of (sigma - 1)^k."""
    return np.array(
        [[math.comb(k, j) * (-1) ** (k - j) if j <= k else 0 for j in range(n)] for k in range(n)],
        dtype=object,
    )


def to_taylor(ring: CoeffRing, group: TowerGroup, arr: np.ndarray, degree_below: int | None = None) -> np.ndarray:
    """Coordinates in the monomial basis x^f, x_i = g_i - 1.

    Args:
        arr: array (k, |G|, d) in group coordinates.
        degree_below: if given, keep only exponents f_i < degree_below per axis
            (a box truncation; callers select |f| < r afterwards).

    Returns:
        Array of shape (k,) + box + (d,) with box the truncated exponent box.
    """
    orders = group.orders
    k = arr.shape[0]
    cur = arr.reshape((k,) + orders + (ring.d,))
    for ax, n in enumerate(orders):
        rows = n if degree_below is None else min(n, degree_below)
        C = (binomial_matrix(n, rows) % ring.q).astype(np.int64)
        cur = np.moveaxis(np.tensordot(C, cur, axes=([1], [ax + 1])), 0, ax + 1) % ring.q
    return cur


def from_taylor(ring: CoeffRing, group: TowerGroup, arr: np.ndarray) -> np.ndarray:
    """Inverse of :func:`to_taylor` on the full box; returns (k, |G|, d)."""
    orders = group.orders
    k = arr.shape[0]
    cur = arr.reshape((k,) + orders + (ring.d,))
    for ax, n in enumerate(orders):
        B = (inverse_binomial_matrix(n) % ring.q).astype(np.int64)
        cur = np.moveaxis(np.tensordot(B.T, cur, axes=([1], [ax + 1])), 0, ax + 1) % ring.q
    return cur.reshape(k, group.size, ring.d)


# ---------------------------------------------------------------------------
# filtration


def _univariate_powers(n: int, count: int, q: int) -> np.ndarray:
    """Rows red(x^e) for e < count in Z/q[x]/((1+x)^n - 1), basis x^0..x^(n-1)."""
    # x^n = -sum_{k=1}^{n-1} C(n, k) x^k
    rel = np.array([0] + [-math.comb(n, k) % q for k in range(1, n)], dtype=np.int64)
    out = np.zeros((count, n), dtype=np.int64)
    cur = np.zeros(n, dtype=np.int64)
    cur[0] = 1 % q
    for e in range(count):
        out[e] = cur
        top = cur[-1]
        cur = np.concatenate([[0], cur[:-1]])
        cur = (cur + top * rel) % q
    return out


def _low_coords(orders: tuple[int, ...], r: int) -> list[tuple[int, ...]]:
    boxes = [range(min(n, r)) for n in orders]
    return [f for f in itertools.product(*boxes) if sum(f) < r]


class FiltrationTable:
    """Powers I^r of the augmentation ideal of R[G], computed lazily.

    The ideal is computed over Z/p^m; for a Galois ring of degree d > 1 the
    ideal is the scalar extension, so membership is tested coefficient-wise.

    Attributes:
        group: the group G.
        ring: coefficient ring R used by callers.
        depth: largest level available.
        method: "direct" or "graded".
    """

    def __init__(self, group: TowerGroup, ring: CoeffRing, depth: int = 8, method: str | None = None,
                 size_cap: int = DEFAULT_SIZE_CAP):
        check_size(group, ring, size_cap)
        if depth < 1:
            raise ValueError("depth must be >= 1")
        self.group = group
        self.ring = ring
        self.base = CoeffRing(ring.p, ring.m)
        self.depth = depth
        if method is None:
            method = "direct" if group.size <= DIRECT_METHOD_LIMIT else "graded"
        if method not in ("direct", "graded"):
            raise ValueError("method must be 'direct' or 'graded'")
        self.method = method
        self._direct: list[HowellBasis] = []
        self._graded: dict[int, tuple[list[tuple[int, ...]], HowellBasis]] = {}
        self._group_basis: dict[int, HowellBasis] = {}
        self.stabilized_at: int | None = None

    # direct construction ----------------------------------------------------------

    def _direct_level(self, r: int) -> HowellBasis:
        n = self.group.size
        base = self.base
        if not self._direct:
            self._direct.append(HowellBasis.from_rows(base, np.eye(n, dtype=np.int64)))
            rows = np.eye(n, dtype=np.int64)[1:] - np.eye(n, dtype=np.int64)[0]
            self._direct.append(HowellBasis.from_rows(base, rows, n))
        while len(self._direct) <= r:
            prev = self._direct[-1]
            if self.stabilized_at is not None:
                self._direct.append(prev)
                continue
            gens = []
            prev_amb = prev.rows[..., 0].reshape((prev.rank,) + self.group.ambient_shape)
            for g in self.group.generators():
                shifted = prev_amb
                for ax, s in enumerate(self.group.shift_vector(g)):
                    if s:
                        shifted = np.roll(shifted, s, axis=ax + 1)
                gens.append((shifted - prev_amb).reshape(prev.rank, n))
            rows = np.concatenate(gens) if gens else np.zeros((0, n), dtype=np.int64)
            nxt = HowellBasis.from_rows(base, rows % base.q, n)
            if nxt.same_span(prev):
                self.stabilized_at = len(self._direct) - 1
            self._direct.append(nxt)
        return self._direct[r]

    # graded construction ----------------------------------------------------------

    def _graded_level(self, r: int) -> tuple[list[tuple[int, ...]], HowellBasis]:
        if r in self._graded:
            return self._graded[r]
        base = self.base
        q = base.q
        orders = self.group.orders
        # one-variable pieces V_i(b) = P_{<r}(x^b A_i), b = 0..r
        uni = []
        for n in orders:
            w = min(n, r)
            pw = _univariate_powers(n, n + r + 1, q)
            pieces = []
            for b in range(r + 1):
                rows = pw[b : b + n, :w]
                pieces.append(HowellBasis.from_rows(base, rows, w))
            uni.append(pieces)
        # prefix spaces W(s) = P_{<r}(span{x^f : |f| >= s}) over leading axes
        coords: list[tuple[int, ...]] = [()]
        W = [HowellBasis.from_rows(base, np.ones((1, 1), dtype=np.int64))] + [
            HowellBasis.from_rows(base, np.zeros((0, 1), dtype=np.int64), 1) for _ in range(r)
        ]
        for ax, n in enumerate(orders):
            w = min(n, r)
            new_coords = [f + (e,) for f in coords for e in range(w) if sum(f) + e < r]
            keep = np.array(
                [sum(f) + e < r for f in coords for e in range(w)], dtype=bool
            )
            new_W = []
            for s in range(r + 1):
                blocks = []
                for b in range(s + 1):
                    A = W[s - b].rows[..., 0]
                    B = uni[ax][b].rows[..., 0]
                    if A.shape[0] == 0 or B.shape[0] == 0:
                        continue
                    prod = (A[:, None, :, None] * B[None, :, None, :]) % q
                    prod = prod.reshape(A.shape[0] * B.shape[0], -1)[:, keep]
                    blocks.append(prod)
                rows = np.concatenate(blocks) if blocks else np.zeros((0, len(new_coords)), dtype=np.int64)
                new_W.append(HowellBasis.from_rows(base, rows, len(new_coords)))
            coords, W = new_coords, new_W
        self._graded[r] = (coords, W[r])
        return self._graded[r]

    # membership -------------------------------------------------------------------

    def _split(self, V: np.ndarray) -> np.ndarray:
        """(k, |G|, d) -> (k*d, |G|, 1) over the base ring."""
        V = np.asarray(V, dtype=np.int64)
        if V.ndim == 2:
            V = V[..., None]
        if V.shape[1] != self.group.size or V.shape[2] != self.ring.d:
            raise DimensionMismatch(f"expected (k, {self.group.size}, {self.ring.d})")
        k = V.shape[0]
        return V.transpose(0, 2, 1).reshape(k * self.ring.d, self.group.size)[..., None] % self.base.q

    def contains_many(self, V: np.ndarray, r: int) -> np.ndarray:
        """Row-wise membership of V (k, |G|, d) in I^r; returns a (k,) bool array."""
        V = np.asarray(V, dtype=np.int64)
        if V.ndim == 2:
            V = V[..., None]
        k = V.shape[0]
        if r <= 0 or k == 0:
            return np.ones(k, dtype=bool)
        if r > self.depth:
            raise DepthExceeded(f"level {r} beyond depth {self.depth}")
        flat = self._split(V)
        if self.method == "direct":
            ok = self._direct_level(r).contains_many(flat)
        else:
            coords, U = self._graded_level(r)
            tay = to_taylor(self.base, self.group, flat, degree_below=r)
            idx = tuple(np.array(c) for c in zip(*coords)) if coords and coords[0] else None
            if idx is None:
                low = tay.reshape(flat.shape[0], 1, 1)
            else:
                low = tay[(slice(None),) + idx]  # (k*d, ncoords, 1)
            ok = U.contains_many(low)
        return ok.reshape(k, self.ring.d).all(axis=1)

    def contains(self, V: np.ndarray, r: int) -> bool:
        """True iff every row of V lies in I^r (i.e. V in M (x) I^r for free M)."""
        return bool(self.contains_many(V, r).all())

    def level(self, V: np.ndarray, r_max: int | None = None) -> int:
        """Largest r <= r_max with V in M (x) I^r."""
        r_max = self.depth if r_max is None else min(r_max, self.depth)
        V = np.asarray(V, dtype=np.int64)
        if V.ndim == 2:
            V = V[..., None]
        live = V[V.reshape(V.shape[0], -1).any(axis=1)]
        r = 0
        while r < r_max and self.contains(live, r + 1):
            r += 1
        return r

    # bases in group coordinates -----------------------------------------------------

    def basis(self, r: int) -> HowellBasis:
        """Howell basis of I^r over Z/p^m in group coordinates."""
        if r > self.depth:
            raise DepthExceeded(f"level {r} beyond depth {self.depth}")
        if self.method == "direct":
            return self._direct_level(r)
        if r not in self._group_basis:
            self._group_basis[r] = self._graded_group_basis(r)
        return self._group_basis[r]

    def _graded_group_basis(self, r: int) -> HowellBasis:
        n = self.group.size
        orders = self.group.orders
        if r == 0:
            return HowellBasis.from_rows(self.base, np.eye(n, dtype=np.int64))
        coords, U = self._graded_level(r)
        rows = []
        box = list(itertools.product(*[range(k) for k in orders])) if orders else [()]
        for f in box:
            if sum(f) >= r:
                v = np.zeros(orders, dtype=np.int64) if orders else np.zeros(1, dtype=np.int64)
                v[f] = 1
                rows.append(v.reshape(-1))
        for u in U.rows[..., 0]:
            v = np.zeros(orders if orders else (1,), dtype=np.int64)
            for c, val in zip(coords, u):
                v[c if orders else 0] = val
            rows.append(v.reshape(-1))
        tay = np.array(rows, dtype=np.int64).reshape(len(rows), n, 1) if rows else np.zeros((0, n, 1), dtype=np.int64)
        grp = from_taylor(self.base, self.group, tay)[..., 0] if rows else np.zeros((0, n), dtype=np.int64)
        return HowellBasis.from_rows(self.base, grp, n)

    def ranks(self, r_max: int | None = None) -> list[int]:
        """log_p of |I^r| for r = 0..r_max (a strictly informative size sequence)."""
        r_max = self.depth if r_max is None else r_max
        return [self.basis(r).log_order() for r in range(r_max + 1)]


_FILTRATIONS: dict = {}


def build_filtration(group: TowerGroup, ring: CoeffRing, depth: int = 8, method: str | None = None,
                     size_cap: int = DEFAULT_SIZE_CAP) -> FiltrationTable:
    """Return a (cached) filtration table for R[G] with levels up to ``depth``."""
    key = (group, ring.p, ring.m, ring.d, ring.poly, depth, method)
    table = _FILTRATIONS.get(key)
    if table is None:
        table = FiltrationTable(group, ring, depth, method, size_cap)
        _FILTRATIONS[key] = table
    return table


def as_module_array(ring: CoeffRing, x) -> np.ndarray:
    """Normalise a GroupRingElem or array into shape (k, |G|, d)."""
    if isinstance(x, GroupRingElem):
        return x.data[None]
    arr = np.asarray(x, dtype=np.int64)
    if arr.ndim == 2:
        arr = arr[None]
    return arr % ring.q


def vanishing_order(theta, filt: FiltrationTable, r_max: int | None = None) -> int:
    """Largest r <= r_max with theta in the image of M (x) I^r in M (x) R[G].

    For a free module M with coordinates the image is (I^r)^k, so the test
    is row-wise membership.
    """
    return filt.level(as_module_array(filt.ring, theta), r_max)


# ---------------------------------------------------------------------------
# graded classes


@dataclass(frozen=True, eq=False)
class GradedClass:
    """The class of an element of M (x) I^r in M (x) I^r / I^(r+1).

    ``rep`` has shape (k, |G|, d); k = 1 for plain group-ring elements.
    """

    level: int
    rep: np.ndarray = field(repr=False)
    filt: FiltrationTable = field(repr=False)

    def __post_init__(self):
        rep = as_module_array(self.filt.ring, self.rep)
        object.__setattr__(self, "rep", rep)
        if self.level > self.filt.depth:
            raise DepthExceeded(f"level {self.level} beyond depth {self.filt.depth}")
        if not self.filt.contains(rep, self.level):
            raise NotInFiltrationLevel(f"representative is not in I^{self.level}")

    def is_zero(self) -> bool:
        if self.level + 1 > self.filt.depth:
            raise DepthExceeded("cannot test the class at the top computed level")
        return self.filt.contains(self.rep, self.level + 1)

    def __add__(self, other: "GradedClass") -> "GradedClass":
        _same(self, other)
        return GradedClass(self.level, self.rep + other.rep, self.filt)

    def __sub__(self, other: "GradedClass") -> "GradedClass":
        _same(self, other)
        return GradedClass(self.level, self.rep - other.rep, self.filt)

    def __neg__(self) -> "GradedClass":
        return GradedClass(self.level, -self.rep, self.filt)

    def scale(self, c) -> "GradedClass":
        """Multiply by a scalar in R."""
        ring = self.filt.ring
        cv = np.array(ring(c).coeffs, dtype=np.int64)
        return GradedClass(self.level, ring.mul(self.rep, cv), self.filt)

    def __eq__(self, other) -> bool:
        return graded_eq(self, other)

    __hash__ = None


def _same(x: GradedClass, y: GradedClass) -> None:
    if x.filt is not y.filt and (x.filt.group != y.filt.group or x.filt.ring != y.filt.ring):
        raise RingMismatch("graded classes from different filtrations")
    if x.level != y.level:
        raise ValueError(f"levels differ: {x.level} vs {y.level}")
    if x.rep.shape != y.rep.shape:
        raise DimensionMismatch("module shapes differ")


def leading_term(theta, r: int, filt: FiltrationTable) -> GradedClass:
    """The class of theta in M (x) I^r / I^(r+1)."""
    return GradedClass(r, as_module_array(filt.ring, theta), filt)


def graded_eq(x: GradedClass, y: GradedClass) -> bool:
    """Equality of classes: the difference lies in I^(level+1)."""
    _same(x, y)
    if x.level + 1 > x.filt.depth:
        raise DepthExceeded("cannot compare classes at the top computed level")
    return x.filt.contains(x.rep - y.rep, x.level + 1)


def graded_mul(x: GradedClass, y: GradedClass) -> GradedClass:
    """Product of classes of levels a and b, a class of level a + b.

    Module legs multiply as a tensor product: shapes (k1, ...) and (k2, ...)
    give (k1 * k2, ...).
    """
    if x.filt.group != y.filt.group or x.filt.ring != y.filt.ring:
        raise RingMismatch("graded classes from different filtrations")
    level = x.level + y.level
    if level > x.filt.depth:
        raise DepthExceeded(f"level {level} beyond depth {x.filt.depth}")
    ring, group = x.filt.ring, x.filt.group
    prod = convolve_outer(ring, group, x.rep, y.rep)
    return GradedClass(level, prod.reshape(-1, group.size, ring.d), x.filt)
