"""Rank-two Frobenius models at an inert prime.

The local representation at l is modelled by W = R^2 with Frobenius acting
through the companion matrix F of X^2 - u X + w, where u is the image of
a_l / l^(k/2 - 1) and w the image of l.  The Frobenius of the prime of K over
the inert l is F^2, and the unramified classes are W / (F^2 - 1) W.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coeffring import CoeffRing, RModule, RingElem, cokernel_invariants, invert, smith_valuations
from .errors import DivisibilityViolated, NonInvertibleDenominator, NonUnit
from .groups import kronecker


def mat_mul(ring: CoeffRing, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Product of (r, s, d) and (s, t, d) matrices over R."""
    return ring.mul(A[:, :, None, :], B[None, :, :, :]).sum(axis=1) % ring.q


def identity(ring: CoeffRing, n: int = 2) -> np.ndarray:
    out = ring.zeros((n, n))
    for i in range(n):
        out[i, i, 0] = 1
    return out


@dataclass(frozen=True, eq=False)
class FrobeniusModel:
    """Companion-matrix model of Frobenius at l.

    Attributes:
        ring: coefficient ring R.
        ell: the prime l.
        a: the integer Fourier coefficient a_l (None if built from u).
        k: weight.
        u: trace, the image of a_l / l^(k/2 - 1).
        w: determinant, the image of l.
        F: the matrix [[0, -w], [1, u]] as a (2, 2, d) array.
    """

    ring: CoeffRing
    ell: int
    a: int | None
    k: int
    u: RingElem
    w: RingElem
    F: np.ndarray

    @classmethod
    def from_unit(cls, ell: int, u: RingElem, k: int = 2, a: int | None = None) -> "FrobeniusModel":
        ring = u.ring
        w = ring(ell)
        F = ring.zeros((2, 2))
        F[0, 1] = (-w).coeffs
        F[1, 0, 0] = 1
        F[1, 1] = u.coeffs
        return cls(ring, ell, a, k, u, w, F)

    def trace(self) -> RingElem:
        return self.ring(list(self.F[0, 0] + self.F[1, 1]))

    def det(self) -> RingElem:
        r = self.ring
        prod = r.mul(self.F[0, 0], self.F[1, 1]) - r.mul(self.F[0, 1], self.F[1, 0])
        return r(list(prod % r.q))

    def frob_lambda(self) -> np.ndarray:
        """F^2, the Frobenius of the prime of K above l."""
        return mat_mul(self.ring, self.F, self.F)

    def cayley_hamilton(self) -> np.ndarray:
        """F^2 - u F + w (zero for every model)."""
        r = self.ring
        uF = r.mul(np.asarray(self.u.coeffs, dtype=np.int64), self.F)
        wI = r.mul(np.asarray(self.w.coeffs, dtype=np.int64), identity(r))
        return (self.frob_lambda() - uF + wI) % r.q

    def squares_to_one(self) -> bool:
        return np.array_equal(self.frob_lambda(), identity(self.ring))


def build_model(ell: int, a: int, k: int, ring: CoeffRing) -> FrobeniusModel:
    """Model with trace a / l^(k/2 - 1) and determinant l.

    Raises:
        NonInvertibleDenominator: if l^(k/2 - 1) is not a unit in R.
    """
    if k % 2:
        raise ValueError("weight must be even")
    denom = ring(pow(ell, k // 2 - 1, ring.q))
    try:
        inv = invert(denom)
    except NonUnit as exc:
        raise NonInvertibleDenominator(f"{ell}^{k // 2 - 1} is not a unit mod {ring.p}") from exc
    return FrobeniusModel.from_unit(ell, ring(a) * inv, k, a)


def h1f_model(fm: FrobeniusModel) -> RModule:
    """Cokernel of F^2 - 1 acting on R^2."""
    M = (fm.frob_lambda() - identity(fm.ring)) % fm.ring.q
    # rows of the relation matrix are the images of the basis vectors
    return cokernel_invariants(fm.ring, np.transpose(M, (1, 0, 2)), ncols=2)


def _free_rank(ring: CoeffRing, M: np.ndarray) -> int:
    return sum(1 for t in smith_valuations(ring, M) if t == 0)


def eigenspace_ranks(fm: FrobeniusModel) -> tuple[int, int]:
    """Ranks of the images of (1 + F)/2 and (1 - F)/2.

    Raises:
        ValueError: unless F^2 = 1 in R.
    """
    if not fm.squares_to_one():
        raise ValueError("eigenspace ranks need F^2 = 1")
    r = fm.ring
    half = invert(r(2))
    h = np.asarray(half.coeffs, dtype=np.int64)
    one = identity(r)
    plus = r.mul(h, (one + fm.F) % r.q)
    minus = r.mul(h, (one - fm.F) % r.q)
    return _free_rank(r, plus), _free_rank(r, minus)


@dataclass(frozen=True)
class DividedScalar:
    """(a +- (l + 1)) / p^m reduced mod p^m, flagged if a p-adic unit."""

    value: int
    is_unit: bool


def frob_division(a: int, ell: int, p: int, m: int) -> tuple[DividedScalar, DividedScalar]:
    """Scalars (a + (l + 1)) / p^m and (a - (l + 1)) / p^m.

    Raises:
        DivisibilityViolated: unless p^m divides both a and l + 1.
    """
    q = p**m
    if a % q or (ell + 1) % q:
        raise DivisibilityViolated(f"{p}^{m} must divide a = {a} and l + 1 = {ell + 1}")
    out = []
    for s in (a + ell + 1, a - ell - 1):
        v = s // q
        out.append(DividedScalar(v % q, v % p != 0))
    return out[0], out[1]


def kolyvagin_prime_test(ell: int, a: int, D: int, N: int, p: int, m: int) -> bool:
    """Whether l is inert in K, coprime to N p, and p^m divides l + 1 and a."""
    q = p**m
    return (
        kronecker(D, ell) == -1
        and N % ell != 0
        and ell != p
        and (ell + 1) % q == 0
        and a % q == 0
    )
