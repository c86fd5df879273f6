"""Derivative operators D_l^k = sum_{i=k}^{l} C(i, k) sigma_l^i and their calculus.

Module elements are arrays in "module layout": shape ``(g,) + ambient + (d,)``
where ``ambient`` is the ambient shape of the tower group acting on the
module (see :meth:`bbreg.groups.TowerGroup.ambient_shape`).  Axis ``a + 1``
carries ambient group axis ``a``.  The generator sigma_l acts by rolling
the axis of l by one step.

Derivative expansions are computed with exact Python integers and reduced
into R only at the end, so binomial coefficients never wrap mid-computation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .coeffring import CoeffRing
from .groupring import FiltrationTable, GroupRingElem
from .groups import TowerGroup, TowerSpec


def vp(n: int, p: int) -> float:
    """p-adic valuation of an integer, with inf for zero."""
    if n == 0:
        return math.inf
    n, t = abs(n), 0
    while n % p == 0:
        n //= p
        t += 1
    return t


@dataclass(frozen=True)
class DerivativeOp:
    """D_kappa = prod_i D_{l_i}^{k_i} over distinct tower primes.

    Attributes:
        factors: ((l_1, k_1), ..., (l_t, k_t)) with 0 <= k_i <= l_i.
    """

    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        facs = tuple((int(ell), int(k)) for ell, k in self.factors)
        ells = [ell for ell, _ in facs]
        if len(set(ells)) != len(ells):
            raise ValueError("derivative primes must be distinct")
        for ell, k in facs:
            if not 0 <= k <= ell:
                raise ValueError(f"exponent {k} out of range for l = {ell}")
        object.__setattr__(self, "factors", facs)

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(ell for ell, _ in self.factors)

    @property
    def exponents(self) -> tuple[int, ...]:
        return tuple(k for _, k in self.factors)

    @property
    def order(self) -> int:
        return sum(self.exponents)

    @property
    def support(self) -> int:
        return math.prod(self.primes)

    @property
    def conductor(self) -> int:
        return math.prod(ell for ell, k in self.factors if k > 0)

    def eta(self, p: int) -> float:
        """min v_p(l_i + 1) over slots with k_i > 0; inf when the order is 0."""
        vals = [vp(ell + 1, p) for ell, k in self.factors if k > 0]
        return min(vals) if vals else math.inf

    def with_factor(self, ell: int, k: int) -> "DerivativeOp":
        return DerivativeOp(self.factors + ((ell, k),))

    def k_of(self, ell: int) -> int:
        for q, k in self.factors:
            if q == ell:
                return k
        return 0

    def __repr__(self) -> str:
        return "D[" + ",".join(f"{ell}^{k}" for ell, k in self.factors) + "]"


def metadata(D: DerivativeOp, p: int) -> tuple[int, int, int, float]:
    """(order, support, conductor, eta) of a derivative operator."""
    return D.order, D.support, D.conductor, D.eta(p)


def slot_vector(ell: int, k: int) -> list[int]:
    """Integer coefficients of D_l^k on sigma^0..sigma^l."""
    return [math.comb(i, k) for i in range(ell + 1)]


def expand_integer(D: DerivativeOp) -> np.ndarray:
    """Exact integer coefficient tensor of D over prod_i Z/(l_i + 1).

    Axis i is indexed by the exponent of sigma_{l_i}.
    """
    out = np.array(1, dtype=object)
    for ell, k in D.factors:
        out = np.multiply.outer(out, np.array(slot_vector(ell, k), dtype=object))
    return out


def expand(D: DerivativeOp, ring: CoeffRing, group: TowerGroup) -> GroupRingElem:
    """Image of D in R[group]; every prime of D must divide the level."""
    coeffs = expand_integer(D)
    amb = np.zeros(group.ambient_shape, dtype=object)
    idx = []
    for a, ell in enumerate(group.tower.primes):
        if ell in D.primes:
            idx.append(slice(None))
        else:
            idx.append(0)
    idx += [0] * len(group.tower.gamma1_invariants)
    # coefficient axes follow the order of D.factors; reorder into tower order
    order = sorted(range(len(D.factors)), key=lambda i: group.tower.primes.index(D.factors[i][0]))
    for ell in D.primes:
        if ell not in group.primes:
            raise ValueError(f"{ell} does not divide the level of {group}")
    coeffs = np.transpose(coeffs, order) if len(order) > 1 else coeffs
    amb[tuple(idx)] = coeffs
    ints = np.array([int(c) % ring.q for c in amb.reshape(-1)], dtype=np.int64)
    return GroupRingElem.from_ints(ring, group, ints)


# ---------------------------------------------------------------------------
# actions on module arrays


def _axis(tower: TowerSpec, ell: int) -> int:
    return tower.primes.index(ell) + 1


def roll_stack(arr: np.ndarray, axis: int) -> np.ndarray:
    """Stack of all translates: out[j] = sigma^j(arr) along ``axis``."""
    n = arr.shape[axis]
    idx = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n  # [j, i] -> i - j
    taken = np.take(arr, idx, axis=axis)  # axis replaced by (j, i)
    return np.moveaxis(taken, axis, 0)


def apply_slot(ring: CoeffRing, m: np.ndarray, axis: int, ell: int, k: int) -> np.ndarray:
    """D_l^k applied to m along ``axis``."""
    vec = slot_vector(ell, k)
    out = np.zeros_like(m)
    for i in range(k, ell + 1):
        c = vec[i] % ring.q
        if c:
            out = (out + c * np.roll(m, i, axis=axis)) % ring.q
    return out


def apply_derivative(ring: CoeffRing, tower: TowerSpec, D: DerivativeOp, m: np.ndarray) -> np.ndarray:
    """D(m) for a module array m."""
    out = np.asarray(m, dtype=np.int64) % ring.q
    for ell, k in D.factors:
        out = apply_slot(ring, out, _axis(tower, ell), ell, k)
    return out


def apply_sigma_minus_one(ring: CoeffRing, tower: TowerSpec, ell: int, m: np.ndarray, power: int = 1) -> np.ndarray:
    """(sigma_l - 1)^power applied to m."""
    ax = _axis(tower, ell)
    out = np.asarray(m, dtype=np.int64)
    for _ in range(power):
        out = (np.roll(out, 1, axis=ax) - out) % ring.q
    return out


def apply_norm(ring: CoeffRing, tower: TowerSpec, ell: int, m: np.ndarray) -> np.ndarray:
    """The norm of G_l acting on m (a broadcast fiber sum)."""
    ax = _axis(tower, ell)
    return np.broadcast_to(m.sum(axis=ax, keepdims=True) % ring.q, m.shape).copy()


def _binom_int64(rows: int, n: int, q: int) -> np.ndarray:
    return np.array([[math.comb(j, k) % q for j in range(n)] for k in range(rows)], dtype=np.int64)


def _inv_binom_int64(n: int, q: int) -> np.ndarray:
    return np.array(
        [[(math.comb(k, j) * (-1) ** (k - j)) % q if j <= k else 0 for j in range(n)] for k in range(n)],
        dtype=np.int64,
    )


# ---------------------------------------------------------------------------
# Taylor expansion


@dataclass(frozen=True)
class TaylorExpansion:
    """All derivatives D_kappa(m) over the box prod [0, l_i].

    ``coeffs`` has shape ``box + m.shape``; the box axes follow ``primes``.
    """

    primes: tuple[int, ...]
    coeffs: np.ndarray

    def __getitem__(self, kappa: Sequence[int]) -> np.ndarray:
        return self.coeffs[tuple(kappa)]

    def items(self) -> Iterator[tuple[tuple[int, ...], np.ndarray]]:
        box = [range(ell + 1) for ell in self.primes]
        for kappa in itertools.product(*box):
            yield kappa, self.coeffs[kappa]

    def op(self, kappa: Sequence[int]) -> DerivativeOp:
        return DerivativeOp(tuple(zip(self.primes, kappa)))


def resolvent(ring: CoeffRing, tower: TowerSpec, S: int, m: np.ndarray) -> np.ndarray:
    """theta_m = sum_{sigma in G_S} sigma(m) (x) sigma, as an array box + m.shape.

    Entry [j_1, ..., j_t] holds sigma_1^{j_1} ... sigma_t^{j_t} (m).
    """
    primes = tower.primes_of(S)
    out = np.asarray(m, dtype=np.int64) % ring.q
    for depth, ell in enumerate(primes):
        out = roll_stack(out, _axis(tower, ell) + depth)
        # bring the new translate axis behind the earlier ones
        out = np.moveaxis(out, 0, depth)
    return out


def taylor_expand(ring: CoeffRing, tower: TowerSpec, S: int, m: np.ndarray, check: bool = True) -> TaylorExpansion:
    """All D_kappa(m) for kappa in the box of G_S, with the exact reconstruction check.

    The check compares sum_sigma sigma(m) (x) sigma with
    sum_kappa D_kappa(m) (x) prod_i (sigma_i - 1)^{k_i}, both expanded in the
    group basis.

    Raises:
        AssertionError: if the reconstruction fails (an internal error).
    """
    primes = tower.primes_of(S)
    q = ring.q
    theta = resolvent(ring, tower, S, m)
    t = len(primes)
    coeffs = theta
    for i, ell in enumerate(primes):
        C = _binom_int64(ell + 1, ell + 1, q)  # [k, j] = C(j, k)
        coeffs = np.moveaxis(np.tensordot(C, coeffs, axes=([1], [i])), 0, i) % q
    if check:
        back = coeffs
        for i, ell in enumerate(primes):
            B = _inv_binom_int64(ell + 1, q)  # [k, j]: (sigma - 1)^k = sum_j B[k, j] sigma^j
            back = np.moveaxis(np.tensordot(B.T, back, axes=([1], [i])), 0, i) % q
        if not np.array_equal(back, theta):
            raise AssertionError("Taylor reconstruction failed")
    return TaylorExpansion(primes, coeffs)


def divisibility_criterion(ring: CoeffRing, tower: TowerSpec, S: int, m: np.ndarray, r: int,
                           filt: FiltrationTable) -> tuple[bool, bool]:
    """Check the derivative criterion for theta_m to lie in M (x) I^r.

    Hypothesis: D_kappa(m) = 0 mod p^{min(eta(kappa), m)} for every kappa of
    order < r.  Conclusion: theta_m lies in M (x) I_{G_S}^r, tested by direct
    membership against ``filt``.

    Returns:
        (hypothesis_holds, conclusion_holds).
    """
    if r > ring.p:
        raise ValueError("the criterion requires r <= p")
    if r <= 0:
        return True, True
    tay = taylor_expand(ring, tower, S, m, check=False)
    hyp = True
    for kappa, val in tay.items():
        if sum(kappa) >= r:
            continue
        eta = tay.op(kappa).eta(ring.p)
        t = ring.m if eta == math.inf else min(int(eta), ring.m)
        if (val % ring.p**t).any():
            hyp = False
            break
    theta = theta_rows(ring, tower, S, m)
    concl = filt.contains(theta, r)
    return hyp, concl


def theta_rows(ring: CoeffRing, tower: TowerSpec, S: int, m: np.ndarray) -> np.ndarray:
    """theta_m as a (module coordinate, |G_S|, d) array for filtration tests."""
    theta = resolvent(ring, tower, S, m)
    t = len(tower.primes_of(S))
    gsize = int(np.prod(theta.shape[:t])) if t else 1
    body = theta.reshape((gsize,) + theta.shape[t:])
    d = body.shape[-1]
    body = body.reshape(gsize, -1, d)
    return np.ascontiguousarray(body.transpose(1, 0, 2))


# ---------------------------------------------------------------------------
# one-variable identities


def basis_convert(xi: Sequence[int]) -> list[int]:
    """Coefficients alpha with xi = sum_k alpha_k D_l^k in Z[G_l].

    ``xi`` lists the integer coefficients of sigma^0..sigma^l.  Solved by
    forward substitution in sum_{k <= i} C(i, k) alpha_k = xi_i.
    """
    alpha: list[int] = []
    for i, a in enumerate(xi):
        alpha.append(int(a) - sum(alpha[k] * math.comb(i, k) for k in range(i)))
    return alpha


def expand_combination(ell: int, alpha: Sequence[int]) -> list[int]:
    """Coefficients of sum_k alpha_k D_l^k on sigma^0..sigma^l."""
    out = [0] * (ell + 1)
    for k, a in enumerate(alpha):
        if a:
            for i, c in enumerate(slot_vector(ell, k)):
                out[i] += a * c
    return out


def _conj_slot(ell: int, k: int) -> list[int]:
    n = ell + 1
    a = [0] * n
    for i, c in enumerate(slot_vector(ell, k)):
        a[(-i) % n] += c
    return basis_convert(a)


def conj_formula_coeffs(D: DerivativeOp) -> dict[tuple[int, ...], int]:
    """Exact integer coefficients of c D c^-1 in the derivative basis.

    Conjugation by c inverts group elements, so the result is computed slot by
    slot and multiplied out.  Keys are exponent tuples aligned with
    ``D.factors``; zero coefficients are omitted.

    Over Z the expansion contains terms with k' > k whose coefficients are
    multiples of binomials C(l + 1, j).  Reduced mod p^m with p^m | l + 1 and
    k < p it collapses to (-1)^ord D plus lower terms; see
    :func:`conj_formula_holds`.
    """
    slots = [_conj_slot(ell, k) for ell, k in D.factors]
    out = {}
    for kappa in itertools.product(*[range(len(s)) for s in slots]):
        c = 1
        for s, kk in zip(slots, kappa):
            c *= s[kk]
            if c == 0:
                break
        if c:
            out[kappa] = c
    return out


def conj_formula_holds(D: DerivativeOp, p: int, m: int) -> bool:
    """Whether c D c^-1 = (-1)^ord D + (terms with kappa' < kappa) mod p^m."""
    q = p**m
    coeffs = conj_formula_coeffs(D)
    kappa = D.exponents
    lead = coeffs.get(kappa, 0)
    if (lead - (-1) ** D.order) % q:
        return False
    for kp, c in coeffs.items():
        if kp == kappa or c % q == 0:
            continue
        if not all(a <= b for a, b in zip(kp, kappa)):
            return False
    return True


def _times_sigma_minus_one(v: list[int]) -> list[int]:
    n = len(v)
    return [v[(i - 1) % n] - v[i] for i in range(n)]


def _times_sigma(v: list[int]) -> list[int]:
    n = len(v)
    return [v[(i - 1) % n] for i in range(n)]


def sigma_derivative_identity(ell: int, k: int, ring: CoeffRing | None = None) -> bool:
    """Check (sigma - 1) D^k = C(l + 1, k) - sigma D^(k-1) in Z[G_l].

    For k = 0 the check is the norm annihilation (sigma - 1) D^0 = 0.  When a
    ring with p^m | l + 1 is given and 0 < k < p, also checks the congruence
    (sigma - 1) D^k = -sigma D^(k-1) mod p^m.
    """
    if not 0 <= k <= ell:
        raise ValueError("need 0 <= k <= l")
    lhs = _times_sigma_minus_one(slot_vector(ell, k))
    if k == 0:
        return not any(lhs)
    rhs = [-c for c in _times_sigma(slot_vector(ell, k - 1))]
    rhs[0] += math.comb(ell + 1, k)
    if lhs != rhs:
        return False
    if ring is not None and (ell + 1) % ring.q == 0 and 0 < k < ring.p:
        cong = [-c for c in _times_sigma(slot_vector(ell, k - 1))]
        if any((a - b) % ring.q for a, b in zip(lhs, cong)):
            return False
    return True


def aug_derivative(ell: int, k: int) -> int:
    """Augmentation of D_l^k over Z."""
    return sum(slot_vector(ell, k))


def kappa_box(primes: Sequence[int], max_order: int | None = None) -> Iterator[tuple[int, ...]]:
    """Exponent tuples in prod [0, l_i], optionally restricted to order <= max_order."""
    for kappa in itertools.product(*[range(ell + 1) for ell in primes]):
        if max_order is None or sum(kappa) <= max_order:
            yield kappa
