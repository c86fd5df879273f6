"""Arithmetic in Galois rings GR(p^m, d) and canonical linear algebra over them.

An element of R = (Z/p^m)[x]/(f) is stored as its coefficient vector of
length d.  Arrays of ring elements keep the coefficient axis last, so a
matrix over R is an integer array of shape ``(rows, cols, d)``.  For d = 1
this is just Z/p^m with a trailing singleton axis.

R is a chain ring: every ideal is p^t R.  Submodule membership is decided
with the Howell canonical form, which (unlike a plain echelon form) stays
complete when pivots are zero divisors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    InsufficientValuation,
    NonUnit,
    RingMismatch,
)


def is_prime(n: int) -> bool:
    """Deterministic trial-division primality test for small integers."""
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


# ---------------------------------------------------------------------------
# polynomials over F_p (coefficient lists, low degree first)


def _ptrim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmod(a: list[int], f: list[int], p: int) -> list[int]:
    a = _ptrim([c % p for c in a])
    f = _ptrim([c % p for c in f])
    inv_lead = pow(f[-1], -1, p)
    while len(a) >= len(f):
        coef = a[-1] * inv_lead % p
        shift = len(a) - len(f)
        for i, c in enumerate(f):
            a[shift + i] = (a[shift + i] - coef * c) % p
        _ptrim(a)
    return a


def _pmulmod(a: list[int], b: list[int], f: list[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _pmod(out, f, p)


def _ppowmod(a: list[int], e: int, f: list[int], p: int) -> list[int]:
    result = [1]
    base = _pmod(a, f, p)
    while e:
        if e & 1:
            result = _pmulmod(result, base, f, p)
        base = _pmulmod(base, base, f, p)
        e >>= 1
    return result


def _pgcd(a: list[int], b: list[int], p: int) -> list[int]:
    a = _ptrim([c % p for c in a])
    b = _ptrim([c % p for c in b])
    while b:
        a, b = b, _pmod(a, b, p)
    return a


def _psub(a: list[int], b: list[int], p: int) -> list[int]:
    n = max(len(a), len(b))
    a = a + [0] * (n - len(a))
    b = b + [0] * (n - len(b))
    return _ptrim([(x - y) % p for x, y in zip(a, b)])


def _prime_factors(n: int) -> list[int]:
    out, f = [], 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1
    if n > 1:
        out.append(n)
    return out


def is_irreducible_mod_p(poly: Sequence[int], p: int) -> bool:
    """Rabin's irreducibility test for a monic polynomial over F_p."""
    f = _ptrim([c % p for c in poly])
    d = len(f) - 1
    if d < 1:
        return False
    if d == 1:
        return True
    x = [0, 1]
    if _psub(_ppowmod(x, p**d, f, p), x, p):
        return False
    for q in _prime_factors(d):
        h = _psub(_ppowmod(x, p ** (d // q), f, p), x, p)
        if len(_pgcd(f, h, p)) > 1:
            return False
    return True


def _default_poly(p: int, d: int) -> tuple[int, ...]:
    if d == 1:
        return (0, 1)
    for idx in range(p**d):
        coeffs = []
        v = idx
        for _ in range(d):
            coeffs.append(v % p)
            v //= p
        cand = tuple(coeffs) + (1,)
        if coeffs[0] != 0 and is_irreducible_mod_p(cand, p):
            return cand
    raise ValueError(f"no irreducible polynomial of degree {d} mod {p}")


# ---------------------------------------------------------------------------
# the ring


@dataclass(frozen=True)
class CoeffRing:
    """The Galois ring GR(p^m, d) = (Z/p^m)[x]/(poly).

    Attributes:
        p: odd prime.
        m: exponent, so that p^m annihilates the ring.  m = 0 is allowed only
            as the zero ring produced by ``exact_divide_p_power(a, m)``.
        d: residue degree.
        poly: monic defining polynomial, coefficients low degree first.  The
            reduction mod p must be irreducible.  Defaults to x for d = 1 and
            to the first irreducible polynomial in lexicographic order otherwise.
    """

    p: int
    m: int
    d: int = 1
    poly: tuple[int, ...] | None = None

    def __post_init__(self):
        if not is_prime(self.p) or self.p < 3:
            raise ValueError(f"p must be an odd prime, got {self.p}")
        if self.m < 0:
            raise ValueError("m must be >= 1")
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.p ** max(self.m, 1) >= 2**31:
            raise ValueError("p^m too large for int64 matrix arithmetic")
        poly = self.poly
        if poly is None:
            poly = _default_poly(self.p, self.d)
        poly = tuple(int(c) for c in poly)
        if len(poly) != self.d + 1 or poly[-1] != 1:
            raise ValueError("defining polynomial must be monic of degree d")
        if self.d > 1 and not is_irreducible_mod_p(poly, self.p):
            raise ValueError(f"{poly} is reducible mod {self.p}")
        q = self.p**self.m
        poly = tuple(c % q for c in poly[:-1]) + (1,)
        object.__setattr__(self, "poly", poly)

    # -- basic data ---------------------------------------------------------

    @property
    def q(self) -> int:
        """The characteristic p^m."""
        return self.p**self.m

    @property
    def size(self) -> int:
        return self.q**self.d

    def __repr__(self) -> str:
        if self.d == 1:
            return f"Z/{self.p}^{self.m}"
        return f"GR({self.p}^{self.m}, {self.d}; poly={list(self.poly)})"

    def with_m(self, m: int) -> "CoeffRing":
        """Same residue field and polynomial, different exponent."""
        return CoeffRing(self.p, m, self.d, self.poly)

    @cached_property
    def mul_table(self) -> np.ndarray:
        """Structure tensor T with x^i * x^j = sum_k T[i, j, k] x^k."""
        d, q = self.d, max(self.q, 1)
        powers = []
        cur = [0] * d
        cur[0] = 1 % q
        for _ in range(2 * d - 1):
            powers.append(cur)
            # multiply by x and reduce with x^d = -sum poly[i] x^i
            top = cur[-1]
            nxt = [0] + cur[:-1]
            nxt = [(c - top * self.poly[i]) % q for i, c in enumerate(nxt)]
            cur = nxt
        table = np.zeros((d, d, d), dtype=np.int64)
        for i in range(d):
            for j in range(d):
                table[i, j] = powers[i + j]
        return table

    # -- element construction ------------------------------------------------

    def __call__(self, value) -> "RingElem":
        if isinstance(value, RingElem):
            if value.ring != self:
                raise RingMismatch(f"{value.ring} vs {self}")
            return value
        if isinstance(value, (int, np.integer)):
            vec = [int(value)] + [0] * (self.d - 1)
        else:
            vec = [int(v) for v in value]
            if len(vec) != self.d:
                raise DimensionMismatch(f"expected {self.d} coefficients")
        q = max(self.q, 1)
        return RingElem(self, tuple(v % q if self.q > 1 else 0 for v in vec))

    @property
    def zero(self) -> "RingElem":
        return self(0)

    @property
    def one(self) -> "RingElem":
        return self(1)

    def elements(self) -> Iterable["RingElem"]:
        """Enumerate all elements (small rings only)."""
        for idx in range(self.size):
            vec = []
            for _ in range(self.d):
                vec.append(idx % self.q)
                idx //= self.q
            yield self(vec)

    # -- array helpers ---------------------------------------------------------

    def asarray(self, values) -> np.ndarray:
        """Coerce ints, RingElems or nested lists into an array with trailing d axis.

        A plain integer array whose last axis is not d (or any integer array
        when d = 1 and the last axis is not a singleton) is read as scalars.
        """
        if isinstance(values, RingElem):
            return np.array(values.coeffs, dtype=np.int64)
        arr = np.asarray(values)
        if arr.dtype == object:
            arr = np.array(
                [self(v).coeffs for v in arr.ravel()], dtype=np.int64
            ).reshape(arr.shape + (self.d,))
            return arr
        arr = arr.astype(np.int64)
        return arr % self.q if self.q > 1 else np.zeros_like(arr)

    def scalars(self, ints) -> np.ndarray:
        """Embed an integer array as constant ring elements (adds the d axis)."""
        ints = np.asarray(ints, dtype=np.int64) % max(self.q, 1)
        out = np.zeros(ints.shape + (self.d,), dtype=np.int64)
        out[..., 0] = ints
        return out

    def zeros(self, shape) -> np.ndarray:
        if isinstance(shape, int):
            shape = (shape,)
        return np.zeros(tuple(shape) + (self.d,), dtype=np.int64)

    def reduce(self, arr: np.ndarray) -> np.ndarray:
        return np.mod(arr, self.q)

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Broadcast product of element arrays (trailing axis d)."""
        q = self.q
        if self.d == 1:
            return (np.asarray(a) * np.asarray(b)) % q
        a = np.asarray(a) % q
        b = np.asarray(b) % q
        outer = (a[..., :, None] * b[..., None, :]) % q
        return np.einsum("...ij,ijk->...k", outer, self.mul_table) % q

    def vals(self, arr: np.ndarray) -> np.ndarray:
        """Valuations of an element array, with m standing in for zero."""
        arr = np.asarray(arr) % self.q
        out = np.zeros(arr.shape, dtype=np.int64)
        for t in range(1, self.m + 1):
            out += (arr % self.p**t == 0)
        return out.min(axis=-1)

    def unit_inverse_array(self, a: np.ndarray) -> np.ndarray:
        """Inverse of a single unit given as a length-d coefficient array."""
        return np.array(invert(self(a)).coeffs, dtype=np.int64)


@dataclass(frozen=True)
class RingElem:
    """An element of a :class:`CoeffRing`."""

    ring: CoeffRing
    coeffs: tuple[int, ...]

    def _coerce(self, other) -> "RingElem":
        if isinstance(other, RingElem):
            if other.ring != self.ring:
                raise RingMismatch(f"{self.ring} vs {other.ring}")
            return other
        if isinstance(other, (int, np.integer)):
            return self.ring(int(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self.ring([a + b for a, b in zip(self.coeffs, other.coeffs)])

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self.ring([a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __neg__(self):
        return self.ring([-a for a in self.coeffs])

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.ring.d == 1:
            return self.ring(self.coeffs[0] * other.coeffs[0])
        prod = self.ring.mul(np.array(self.coeffs), np.array(other.coeffs))
        return self.ring(prod.tolist())

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return invert(self) ** (-e)
        result, base = self.ring.one, self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __int__(self) -> int:
        if any(self.coeffs[1:]):
            raise ValueError("element is not a constant")
        return self.coeffs[0]

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_unit(self) -> bool:
        return valuation(self) == 0

    def __repr__(self) -> str:
        if self.ring.d == 1:
            return f"{self.coeffs[0]} (mod {self.ring.q})"
        return f"{list(self.coeffs)} in {self.ring}"


def ring_arith(a: RingElem, b: RingElem, op: str) -> RingElem:
    """Add, subtract or multiply two elements of the same ring."""
    if a.ring != b.ring:
        raise RingMismatch(f"{a.ring} vs {b.ring}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def valuation(a: RingElem) -> float:
    """Largest t <= m with a in p^t R, or ``math.inf`` for zero."""
    if a.is_zero():
        return math.inf
    p = a.ring.p
    best = a.ring.m
    for c in a.coeffs:
        if c:
            t = 0
            while c % p == 0:
                c //= p
                t += 1
            best = min(best, t)
    return best


def invert(a: RingElem) -> RingElem:
    """Multiplicative inverse of a unit."""
    ring = a.ring
    if ring.m == 0:
        return a
    if valuation(a) != 0:
        raise NonUnit(f"{a} is not a unit")
    if ring.d == 1:
        return ring(pow(a.coeffs[0], -1, ring.q))
    # a^(p^d - 2) inverts a modulo p; Newton steps lift to p^m
    x = a ** (ring.p**ring.d - 2)
    prec = 1
    while prec < ring.m:
        x = x * (2 - a * x)
        prec *= 2
    return x


def exact_divide_p_power(a: RingElem, t: int) -> RingElem:
    """Return b in GR(p^(m-t), d) with p^t * b == a.

    Raises:
        InsufficientValuation: if a is not divisible by p^t.
    """
    ring = a.ring
    if t < 0 or t > ring.m or valuation(a) < t:
        raise InsufficientValuation(f"{a} is not divisible by {ring.p}^{t}")
    small = ring.with_m(ring.m - t)
    return small([c // ring.p**t for c in a.coeffs])


# ---------------------------------------------------------------------------
# Howell form


def _as_matrix(ring: CoeffRing, rows) -> tuple[np.ndarray, bool]:
    """Return an (r, c, d) array and whether the input lacked the d axis."""
    arr = np.asarray(rows)
    if arr.dtype == object:
        return ring.asarray(arr), False
    arr = arr.astype(np.int64)
    if arr.ndim == 2:
        return ring.scalars(arr), True
    if arr.ndim == 3 and arr.shape[-1] == ring.d:
        return arr % ring.q, False
    if arr.ndim == 1 and arr.size == 0:
        return np.zeros((0, 0, ring.d), dtype=np.int64), True
    raise DimensionMismatch(f"cannot read a matrix of shape {arr.shape}")


def _howell_array(ring: CoeffRing, A: np.ndarray) -> np.ndarray:
    p, m, q = ring.p, ring.m, ring.q
    A = np.asarray(A, dtype=np.int64) % q
    r, c, d = A.shape
    buf = np.zeros((r + c, c, d), dtype=np.int64)
    buf[:r] = A
    n = r
    pr = 0
    pivots = []
    for col in range(c):
        if pr >= n:
            break
        entries = buf[pr:n, col]
        nz = np.flatnonzero(entries.any(axis=1))
        if nz.size == 0:
            continue
        vals = ring.vals(entries[nz])
        i = pr + int(nz[np.argmin(vals)])
        t = int(vals.min())
        if i != pr:
            buf[[pr, i]] = buf[[i, pr]]
        pt = p**t
        unit = buf[pr, col] // pt
        buf[pr] = ring.mul(ring.unit_inverse_array(unit), buf[pr])
        if n > pr + 1:
            below = buf[pr + 1 : n]
            hit = np.flatnonzero(below[:, col].any(axis=1))
            if hit.size:
                factor = below[hit, col] // pt
                below[hit] = (below[hit] - ring.mul(factor[:, None, :], buf[pr][None])) % q
        if t > 0:
            buf[n] = (buf[pr] * p ** (m - t)) % q
            n += 1
        pivots.append((col, t))
        pr += 1
    H = buf[:pr].copy()
    for i, (col, t) in enumerate(pivots):
        if i == 0:
            continue
        factor = H[:i, col] // p**t
        if factor.any():
            H[:i] = (H[:i] - ring.mul(factor[:, None, :], H[i][None])) % q
    return H


def howell_form(ring: CoeffRing, rows) -> np.ndarray:
    """Howell canonical form of the row span of ``rows``.

    Pivots are normalised to p^t, entries above a pivot p^t are reduced into
    [0, p^t) coefficient-wise, and zero rows are dropped.  The result has the
    Howell property: every element of the span whose first nonzero position
    is j is a multiple of the row with pivot column j.

    Args:
        ring: coefficient ring.
        rows: matrix of shape (r, c) of integers or (r, c, d) of coefficient
            vectors.

    Returns:
        Array with the same trailing layout as the input.
    """
    A, squeeze = _as_matrix(ring, rows)
    H = _howell_array(ring, A)
    return H[..., 0] if squeeze else H


@dataclass(frozen=True)
class HowellBasis:
    """A Howell form together with its pivot data, for fast membership tests."""

    ring: CoeffRing
    rows: np.ndarray  # (k, c, d)
    ncols: int
    pivot_cols: tuple[int, ...] = field(repr=False)
    pivot_vals: tuple[int, ...] = field(repr=False)

    @classmethod
    def from_rows(cls, ring: CoeffRing, rows, ncols: int | None = None) -> "HowellBasis":
        A, _ = _as_matrix(ring, rows)
        if ncols is not None and A.shape[0] == 0:
            A = np.zeros((0, ncols, ring.d), dtype=np.int64)
        H = _howell_array(ring, A)
        return cls.from_howell(ring, H, A.shape[1])

    @classmethod
    def from_howell(cls, ring: CoeffRing, H: np.ndarray, ncols: int) -> "HowellBasis":
        cols, vals = [], []
        for row in H:
            nzc = np.flatnonzero(row.any(axis=1))
            col = int(nzc[0])
            cols.append(col)
            vals.append(int(ring.vals(row[col])))
        return cls(ring, H, ncols, tuple(cols), tuple(vals))

    @property
    def rank(self) -> int:
        """Number of Howell rows (not an R-rank when pivots are non-units)."""
        return self.rows.shape[0]

    def log_order(self) -> int:
        """log_p of the number of elements of the span."""
        return self.ring.d * sum(self.ring.m - t for t in self.pivot_vals)

    def contains_many(self, V: np.ndarray) -> np.ndarray:
        """Membership of each row of V (shape (k, c, d)) in the span."""
        ring = self.ring
        V = np.array(V, dtype=np.int64) % ring.q
        if V.ndim != 3 or V.shape[1:] != (self.ncols, ring.d):
            raise DimensionMismatch(f"expected vectors of length {self.ncols}")
        ok = np.ones(V.shape[0], dtype=bool)
        for row, col, t in zip(self.rows, self.pivot_cols, self.pivot_vals):
            entries = V[:, col]
            pt = ring.p**t
            ok &= ~(entries % pt).any(axis=1)
            factor = entries // pt
            hit = np.flatnonzero(factor.any(axis=1))
            if hit.size:
                V[hit] = (V[hit] - ring.mul(factor[hit][:, None, :], row[None])) % ring.q
        return ok & ~V.reshape(V.shape[0], -1).any(axis=1)

    def contains(self, v) -> bool:
        arr = np.asarray(v, dtype=np.int64)
        if arr.ndim == 1:
            arr = self.ring.scalars(arr)
        return bool(self.contains_many(arr[None])[0])

    def contains_span(self, other: "HowellBasis") -> bool:
        return bool(self.contains_many(other.rows).all()) if other.rank else True

    def same_span(self, other: "HowellBasis") -> bool:
        return self.contains_span(other) and other.contains_span(self)


def submodule_membership(ring: CoeffRing, v, basis) -> bool:
    """True iff vector ``v`` lies in the row span of ``basis``.

    ``basis`` may be a :class:`HowellBasis` or any matrix, which is first put
    into Howell form.
    """
    if not isinstance(basis, HowellBasis):
        arr = np.asarray(basis)
        vec = np.asarray(v)
        ncols = vec.shape[0]
        if arr.size and arr.shape[1] != ncols:
            raise DimensionMismatch("vector length does not match basis width")
        basis = HowellBasis.from_rows(ring, arr if arr.size else np.zeros((0, ncols), dtype=np.int64), ncols)
    return basis.contains(v)


# ---------------------------------------------------------------------------
# module invariants


@dataclass(frozen=True)
class RModule:
    """A finite R-module given by invariant factors p^e_1, ..., p^e_s.

    Attributes:
        ring: coefficient ring.
        invariant_exponents: exponents e_i in [1, m], sorted descending.
        generators: number of generators of the presentation it came from.
    """

    ring: CoeffRing
    invariant_exponents: tuple[int, ...]
    generators: int = 0

    def __post_init__(self):
        exps = tuple(sorted((int(e) for e in self.invariant_exponents), reverse=True))
        if any(e < 1 or e > self.ring.m for e in exps):
            raise ValueError(f"exponents must lie in [1, {self.ring.m}]")
        object.__setattr__(self, "invariant_exponents", exps)

    @property
    def log_order(self) -> int:
        return self.ring.d * sum(self.invariant_exponents)

    @property
    def order(self) -> int:
        return self.ring.p**self.log_order


def r_pm(M: RModule) -> int:
    """Number of free R-summands, i.e. the residue dimension of p^(m-1) M."""
    return sum(1 for e in M.invariant_exponents if e == M.ring.m)


def r_p(M: RModule) -> int:
    """Residue dimension of M / pM, the total number of invariant factors."""
    return len(M.invariant_exponents)


def smith_valuations(ring: CoeffRing, rows) -> list[int]:
    """Valuations of the nonzero diagonal entries of a Smith form over R."""
    A, _ = _as_matrix(ring, rows)
    A = A.copy()
    p, m, q = ring.p, ring.m, ring.q
    r, c, _ = A.shape
    diag = []
    k = 0
    while k < min(r, c):
        sub = A[k:, k:]
        vals = ring.vals(sub)
        if vals.min() >= m:
            break
        i, j = np.unravel_index(int(np.argmin(vals)), vals.shape)
        t = int(vals[i, j])
        A[[k, k + i]] = A[[k + i, k]]
        A[:, [k, k + j]] = A[:, [k + j, k]]
        pt = p**t
        A[k] = ring.mul(ring.unit_inverse_array(A[k, k] // pt), A[k])
        factor = A[k + 1 :, k] // pt
        A[k + 1 :] = (A[k + 1 :] - ring.mul(factor[:, None, :], A[k][None])) % q
        factor = A[k, k + 1 :] // pt
        A[:, k + 1 :] = (A[:, k + 1 :] - ring.mul(A[:, k][:, None, :], factor[None])) % q
        diag.append(t)
        k += 1
    return diag


def cokernel_invariants(ring: CoeffRing, rows, ncols: int | None = None) -> RModule:
    """Invariant factors of R^n / rowspan(rows).

    Args:
        ring: coefficient ring.
        rows: relation matrix, shape (r, n) or (r, n, d).
        ncols: n, required when ``rows`` has no rows.
    """
    A, _ = _as_matrix(ring, rows)
    n = A.shape[1] if ncols is None else ncols
    if A.shape[0] == 0:
        return RModule(ring, (ring.m,) * n, n)
    diag = smith_valuations(ring, A)
    exps = [t for t in diag if t >= 1] + [ring.m] * (n - len(diag))
    return RModule(ring, tuple(exps), n)


def module_from_exponents(ring: CoeffRing, exponents: Sequence[int]) -> RModule:
    """The module R/p^e_1 + ... + R/p^e_s (exponents of 0 are dropped)."""
    return RModule(ring, tuple(e for e in exponents if e > 0), len(exponents))


def ring_to_json(ring: CoeffRing) -> dict:
    """Serialise a ring; integers are written as decimal strings."""
    return {
        "p": str(ring.p),
        "m": str(ring.m),
        "d": str(ring.d),
        "poly": [str(c) for c in ring.poly],
    }


def ring_from_json(obj: dict) -> CoeffRing:
    return CoeffRing(
        int(obj["p"]),
        int(obj["m"]),
        int(obj.get("d", 1)),
        tuple(int(c) for c in obj["poly"]) if "poly" in obj else None,
    )
