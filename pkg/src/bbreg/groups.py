"""Finite abelian model of the Galois groups of a ring class field tower.

For an imaginary quadratic field K of discriminant D and distinct primes
l_1, ..., l_t inert in K, the model takes

    G_T     = prod_{l | T} Z/(l+1)          (Galois group of K_T over K_1)
    Gamma_T = G_T x Gamma_1,   |Gamma_1| = h_K

with Gamma_1 a user-chosen product of cyclic groups.  Group elements carry a
full exponent vector over all tower primes, with zeros in slots that do not
divide the level, so inclusions G_T -> G_S are literal zero padding.

Dense arrays over a group use the C-order flattening of its exponent box,
which is lexicographic order on exponent vectors.  Axes of primes not
dividing the level can be kept as singleton axes ("ambient shape"), which
turns restriction and corestriction maps into broadcasting and summation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .coeffring import is_prime


# ---------------------------------------------------------------------------
# elementary number theory


def kronecker(D: int, n: int) -> int:
    """Kronecker symbol (D / n) for integers D and n >= 1 (or any n)."""
    if n == 0:
        return 1 if abs(D) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if D < 0:
            result = -result
    while n % 2 == 0:
        n //= 2
        if D % 2 == 0:
            return 0
        if D % 8 in (3, 5):
            result = -result
    # Jacobi symbol (D / n) for odd n
    a = D % n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def prime_factors(n: int) -> list[int]:
    """Distinct prime factors in ascending order."""
    out, f = [], 2
    n = abs(n)
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1
    if n > 1:
        out.append(n)
    return out


def is_squarefree(n: int) -> bool:
    n = abs(n)
    f = 2
    while f * f <= n:
        if n % (f * f) == 0:
            return False
        f += 1
    return n != 0


def mobius(T: int) -> int:
    """Moebius function of a squarefree positive integer."""
    if T < 1 or not is_squarefree(T):
        raise ValueError(f"{T} is not a positive squarefree integer")
    return (-1) ** len(prime_factors(T))


def chi_K(D: int, T: int) -> int:
    """Quadratic character of K evaluated multiplicatively on squarefree T."""
    if T < 1 or not is_squarefree(T):
        raise ValueError(f"{T} is not a positive squarefree integer")
    out = 1
    for ell in prime_factors(T):
        out *= kronecker(D, ell)
    return out


def is_fundamental_discriminant(D: int) -> bool:
    if D % 4 == 1:
        return is_squarefree(D)
    if D % 4 == 0:
        m = D // 4
        return m % 4 in (2, 3) and is_squarefree(m)
    return False


def class_number(D: int) -> int:
    """Class number of discriminant D < 0 by counting reduced forms."""
    if D >= 0 or D % 4 not in (0, 1):
        raise ValueError("D must be a negative discriminant")
    h = 0
    a = 1
    while 3 * a * a <= -D:
        for b in range(-a + 1, a + 1):
            if (b * b - D) % (4 * a):
                continue
            c = (b * b - D) // (4 * a)
            if c < a:
                continue
            if b < 0 and c == a:
                continue
            h += 1
        a += 1
    return h


# ---------------------------------------------------------------------------
# tower data


@dataclass(frozen=True)
class TowerSpec:
    """An imaginary quadratic field and an ordered list of inert primes.

    Attributes:
        disc: negative fundamental discriminant D.
        primes: distinct primes, each inert in K (kronecker(D, l) = -1).
        h_K: class number; computed from D when omitted.  It is a model
            parameter and only its value (with p not dividing it) matters.
        gamma1_invariants: cyclic factor orders of Gamma_1, multiplying to
            h_K.  Defaults to a single cyclic factor.
    """

    disc: int
    primes: tuple[int, ...]
    h_K: int | None = None
    gamma1_invariants: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.disc >= 0 or not is_fundamental_discriminant(self.disc):
            raise ValueError(f"{self.disc} is not a negative fundamental discriminant")
        primes = tuple(int(x) for x in self.primes)
        if len(set(primes)) != len(primes):
            raise ValueError("tower primes must be distinct")
        for ell in primes:
            if not is_prime(ell):
                raise ValueError(f"{ell} is not prime")
            if kronecker(self.disc, ell) != -1:
                raise ValueError(f"{ell} is not inert in Q(sqrt({self.disc}))")
        object.__setattr__(self, "primes", primes)
        h = class_number(self.disc) if self.h_K is None else int(self.h_K)
        if h < 1:
            raise ValueError("h_K must be positive")
        object.__setattr__(self, "h_K", h)
        inv = self.gamma1_invariants
        if inv is None:
            inv = (h,) if h > 1 else ()
        inv = tuple(int(x) for x in inv if int(x) != 1)
        if math.prod(inv) != h:
            raise ValueError("gamma1_invariants must multiply to h_K")
        object.__setattr__(self, "gamma1_invariants", inv)

    @property
    def top(self) -> int:
        return math.prod(self.primes)

    def check_ring_prime(self, p: int) -> None:
        """Enforce p not dividing h_K, required once a coefficient ring is attached."""
        if self.h_K % p == 0:
            raise ValueError(f"p = {p} divides h_K = {self.h_K}")

    def primes_of(self, T: int) -> tuple[int, ...]:
        """Tower primes dividing T, in tower order; checks T is a tower divisor."""
        if T < 1 or self.top % T:
            raise ValueError(f"{T} does not divide the tower product {self.top}")
        return tuple(ell for ell in self.primes if T % ell == 0)

    def divisors(self, S: int | None = None) -> list[int]:
        """Divisors of S (default: the tower product), by number of primes then value."""
        ps = self.primes_of(self.top if S is None else S)
        out = []
        for k in range(len(ps) + 1):
            out.extend(sorted(math.prod(c) for c in itertools.combinations(ps, k)))
        return out

    def to_json(self) -> dict:
        return {
            "disc": str(self.disc),
            "primes": [str(x) for x in self.primes],
            "h_K": str(self.h_K),
            "gamma1_invariants": [str(x) for x in self.gamma1_invariants],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "TowerSpec":
        return cls(
            disc=int(obj["disc"]),
            primes=tuple(int(x) for x in obj["primes"]),
            h_K=int(obj["h_K"]) if "h_K" in obj else None,
            gamma1_invariants=(
                tuple(int(x) for x in obj["gamma1_invariants"])
                if "gamma1_invariants" in obj
                else None
            ),
        )


@dataclass(frozen=True)
class GroupElem:
    """An element of Gamma_S for the full tower, as exponent vectors.

    ``gs_part[i]`` is the exponent of the generator sigma of G_{l_i}, reduced
    mod l_i + 1; ``gamma1_part`` holds exponents over the Gamma_1 factors.
    """

    gs_part: tuple[int, ...]
    gamma1_part: tuple[int, ...]
    primes: tuple[int, ...]
    gamma1_invariants: tuple[int, ...]

    def __post_init__(self):
        gs = tuple(int(e) % (ell + 1) for e, ell in zip(self.gs_part, self.primes))
        g1 = tuple(int(e) % n for e, n in zip(self.gamma1_part, self.gamma1_invariants))
        if len(gs) != len(self.primes) or len(g1) != len(self.gamma1_invariants):
            raise ValueError("exponent vector length mismatch")
        object.__setattr__(self, "gs_part", gs)
        object.__setattr__(self, "gamma1_part", g1)

    def __mul__(self, other: "GroupElem") -> "GroupElem":
        return GroupElem(
            tuple(a + b for a, b in zip(self.gs_part, other.gs_part)),
            tuple(a + b for a, b in zip(self.gamma1_part, other.gamma1_part)),
            self.primes,
            self.gamma1_invariants,
        )

    def __pow__(self, e: int) -> "GroupElem":
        return GroupElem(
            tuple(a * e for a in self.gs_part),
            tuple(a * e for a in self.gamma1_part),
            self.primes,
            self.gamma1_invariants,
        )

    def inverse(self) -> "GroupElem":
        return self ** (-1)

    def is_identity(self) -> bool:
        return not any(self.gs_part) and not any(self.gamma1_part)

    def __repr__(self) -> str:
        parts = [
            f"s{ell}^{e}" for ell, e in zip(self.primes, self.gs_part) if e
        ] + [f"g{j}^{e}" for j, e in enumerate(self.gamma1_part) if e]
        return "*".join(parts) if parts else "1"


def invert_action(g: GroupElem) -> GroupElem:
    """Action of complex conjugation on Gamma_S, g -> g^-1."""
    return g.inverse()


def project(g: GroupElem, S: int, T: int) -> GroupElem:
    """Image of g in Gamma_T under the projection Gamma_S -> Gamma_T."""
    if S % T:
        raise ValueError(f"{T} does not divide {S}")
    for ell, e in zip(g.primes, g.gs_part):
        if e and S % ell:
            raise ValueError(f"{g} does not lie in level {S}")
    gs = tuple(e if T % ell == 0 else 0 for ell, e in zip(g.primes, g.gs_part))
    return GroupElem(gs, g.gamma1_part, g.primes, g.gamma1_invariants)


@dataclass(frozen=True)
class TowerGroup:
    """The group G_T (kind "G") or Gamma_T (kind "Gamma") of a tower."""

    tower: TowerSpec
    T: int
    kind: str = "G"

    def __post_init__(self):
        if self.kind not in ("G", "Gamma"):
            raise ValueError("kind must be 'G' or 'Gamma'")
        self.tower.primes_of(self.T)

    @cached_property
    def primes(self) -> tuple[int, ...]:
        return self.tower.primes_of(self.T)

    @property
    def has_gamma1(self) -> bool:
        return self.kind == "Gamma"

    @cached_property
    def orders(self) -> tuple[int, ...]:
        """Cyclic factor orders, in axis order (tower primes, then Gamma_1)."""
        g1 = self.tower.gamma1_invariants if self.has_gamma1 else ()
        return tuple(ell + 1 for ell in self.primes) + tuple(g1)

    @property
    def size(self) -> int:
        return math.prod(self.orders)

    @cached_property
    def ambient_shape(self) -> tuple[int, ...]:
        """One axis per tower prime and per Gamma_1 factor; absent axes have size 1.

        Gamma_1 axes are present (full size) for both kinds so that arrays on
        G_T and Gamma_T share axis positions; for kind G they are singleton.
        """
        shape = [ell + 1 if ell in self.primes else 1 for ell in self.tower.primes]
        for n in self.tower.gamma1_invariants:
            shape.append(n if self.has_gamma1 else 1)
        return tuple(shape)

    @property
    def naxes(self) -> int:
        return len(self.tower.primes) + len(self.tower.gamma1_invariants)

    def axis_of(self, ell: int) -> int:
        """Ambient axis index of the tower prime ell."""
        return self.tower.primes.index(ell)

    def gamma_axes(self) -> tuple[int, ...]:
        k = len(self.tower.primes)
        return tuple(range(k, k + len(self.tower.gamma1_invariants)))

    def _elem(self, gs, g1) -> GroupElem:
        return GroupElem(tuple(gs), tuple(g1), self.tower.primes, self.tower.gamma1_invariants)

    def identity(self) -> GroupElem:
        return self._elem([0] * len(self.tower.primes), [0] * len(self.tower.gamma1_invariants))

    def sigma(self, ell: int) -> GroupElem:
        """The canonical generator of G_ell (exponent 1 in the ell slot)."""
        if ell not in self.primes:
            raise ValueError(f"{ell} does not divide the level {self.T}")
        gs = [1 if q == ell else 0 for q in self.tower.primes]
        return self._elem(gs, [0] * len(self.tower.gamma1_invariants))

    def gamma(self, j: int) -> GroupElem:
        """Generator of the j-th cyclic factor of Gamma_1."""
        if not self.has_gamma1:
            raise ValueError("G_T has no Gamma_1 factor")
        g1 = [1 if i == j else 0 for i in range(len(self.tower.gamma1_invariants))]
        return self._elem([0] * len(self.tower.primes), g1)

    def generators(self) -> list[GroupElem]:
        gens = [self.sigma(ell) for ell in self.primes]
        if self.has_gamma1:
            gens += [self.gamma(j) for j in range(len(self.tower.gamma1_invariants))]
        return gens

    def contains(self, g: GroupElem) -> bool:
        if g.primes != self.tower.primes:
            return False
        for ell, e in zip(g.primes, g.gs_part):
            if e and ell not in self.primes:
                return False
        return self.has_gamma1 or not any(g.gamma1_part)

    def exponents(self, g: GroupElem) -> tuple[int, ...]:
        """Compact exponent vector (one entry per axis of ``orders``)."""
        if not self.contains(g):
            raise ValueError(f"{g} is not in {self}")
        out = [g.gs_part[self.tower.primes.index(ell)] for ell in self.primes]
        if self.has_gamma1:
            out += list(g.gamma1_part)
        return tuple(out)

    def index(self, g: GroupElem) -> int:
        """Position of g in the dense lexicographic enumeration."""
        if not self.orders:
            return 0
        return int(np.ravel_multi_index(self.exponents(g), self.orders))

    def element(self, idx: int) -> GroupElem:
        exps = np.unravel_index(idx, self.orders) if self.orders else ()
        gs = [0] * len(self.tower.primes)
        for ell, e in zip(self.primes, exps):
            gs[self.tower.primes.index(ell)] = int(e)
        g1 = [0] * len(self.tower.gamma1_invariants)
        if self.has_gamma1:
            g1 = [int(e) for e in exps[len(self.primes):]]
        return self._elem(gs, g1)

    def elements(self) -> Iterator[GroupElem]:
        for idx in range(self.size):
            yield self.element(idx)

    def shift_vector(self, g: GroupElem) -> tuple[int, ...]:
        """Roll amounts along ambient axes realising translation by g."""
        return tuple(g.gs_part) + tuple(g.gamma1_part)

    def __repr__(self) -> str:
        name = "G" if self.kind == "G" else "Gamma"
        return f"{name}_{self.T}{list(self.orders)}"


def group_for(T: int, ambient: TowerSpec, kind: str = "G") -> TowerGroup:
    """The group G_T or Gamma_T inside the tower ``ambient``."""
    return TowerGroup(ambient, T, kind)


def norm_lift(T: int, tower: TowerSpec) -> list[GroupElem]:
    """Canonical transversal {(0, gamma)} of Gamma_T -> Gamma_1.

    Summing these elements gives the lift N_T in Z[Gamma_T] of the norm of
    Gamma_1.  Every term has trivial G_T-part, so the lifts are compatible
    with projection between levels.
    """
    grp = TowerGroup(tower, T, "Gamma")
    k = len(tower.primes)
    out = []
    for exps in itertools.product(*[range(n) for n in tower.gamma1_invariants]):
        out.append(grp._elem([0] * k, list(exps)))
    return out


def translate(arr: np.ndarray, g: GroupElem, group_axes: Sequence[int]) -> np.ndarray:
    """Translate an array in ambient layout by g (an np.roll per group axis).

    ``group_axes`` lists the array axes carrying the ambient group axes, in
    ambient order.  Axes of size 1 are left untouched.
    """
    shifts = tuple(g.gs_part) + tuple(g.gamma1_part)
    for ax, s in zip(group_axes, shifts):
        if s and arr.shape[ax] > 1:
            arr = np.roll(arr, s, axis=ax)
    return arr


def invert_axes(arr: np.ndarray, group_axes: Sequence[int]) -> np.ndarray:
    """Apply g -> g^-1 to the group indices of an ambient-layout array."""
    for ax in group_axes:
        if arr.shape[ax] > 1:
            arr = np.roll(np.flip(arr, axis=ax), 1, axis=ax)
    return arr
