"""Synthetic Euler systems over a ring class field tower.

At each level T dividing the top level S the module is M_T = R[Gamma_T]^g,
stored in module layout ``(g,) + ambient(Gamma_T) + (d,)`` (singleton axes
for primes not dividing T).  With that layout the level maps are

* ``sec``   (section of corestriction): zero padding at the identity,
* ``res``   (restriction): broadcasting along the new axes, so that
  res(x) = sum_{tau in G_l} tau * sec(x),
* ``cores`` (corestriction): summation over the fibres of the projection.

Hence cores o sec = id, cores o res = (l + 1) id and res o cores is the norm
of G_l.  Complex conjugation c acts by g -> g^-1 on the group coordinates.

A system is "coherent" when cores_{Tl -> T}(y_{Tl}) = u_l y_T for every
level, and c(y_T) = -eps * sigma(y_T) for some sigma in Gamma_T.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .coeffring import CoeffRing, HowellBasis, RingElem, ring_from_json, ring_to_json
from .derivatives import (
    DerivativeOp,
    apply_derivative,
    apply_sigma_minus_one,
    kappa_box,
)
from .errors import NotFixed, SchemaError
from .groups import GroupElem, TowerGroup, TowerSpec, invert_axes, translate

SCHEMA = "bbreg/1"


# ---------------------------------------------------------------------------
# level maps in module layout


def _new_axes(tower: TowerSpec, T: int, T2: int) -> list[int]:
    """Array axes of the primes dividing T2 / T."""
    if T2 % T:
        raise ValueError(f"{T} does not divide {T2}")
    return [tower.primes.index(ell) + 1 for ell in tower.primes_of(T2 // T)]


def sec(tower: TowerSpec, x: np.ndarray, T: int, T2: int) -> np.ndarray:
    """Zero-padding lift from level T to level T2."""
    out = x
    for ax in _new_axes(tower, T, T2):
        ell = tower.primes[ax - 1]
        shape = list(out.shape)
        shape[ax] = ell + 1
        padded = np.zeros(shape, dtype=np.int64)
        idx = [slice(None)] * len(shape)
        idx[ax] = slice(0, 1)
        padded[tuple(idx)] = out
        out = padded
    return out


def res(tower: TowerSpec, x: np.ndarray, T: int, T2: int) -> np.ndarray:
    """Restriction from level T to level T2 (constant along the new axes)."""
    out = x
    for ax in _new_axes(tower, T, T2):
        ell = tower.primes[ax - 1]
        out = np.repeat(out, ell + 1, axis=ax)
    return out


def cores(ring: CoeffRing, tower: TowerSpec, x: np.ndarray, T2: int, T: int) -> np.ndarray:
    """Corestriction from level T2 down to level T (fibre sums)."""
    out = x
    for ax in _new_axes(tower, T, T2):
        out = out.sum(axis=ax, keepdims=True)
    return out % ring.q


def c_action(x: np.ndarray) -> np.ndarray:
    """Complex conjugation: g -> g^-1 on every group axis."""
    axes = range(1, x.ndim - 1)
    return invert_axes(x, axes)


def act(x: np.ndarray, g: GroupElem) -> np.ndarray:
    """Translate a module element by g in Gamma."""
    return translate(x, g, range(1, x.ndim - 1))


def _mul_unit(ring: CoeffRing, u: RingElem, x: np.ndarray) -> np.ndarray:
    return ring.mul(x, np.array(u.coeffs, dtype=np.int64))


# ---------------------------------------------------------------------------
# systems


@dataclass(frozen=True, eq=False)
class MockEulerSystem:
    """A family (M_T, y_T) over all divisors T of the top level.

    Attributes:
        tower: tower data.
        ring: coefficient ring.
        top: top level S (a product of tower primes).
        eps: the sign epsilon.
        units: u_l for each prime dividing ``top``.
        rank: g, the number of R[Gamma_T] summands.
        y: level T -> element of M_T in module layout.
        params: generation parameters kept for provenance.
    """

    tower: TowerSpec
    ring: CoeffRing
    top: int
    eps: int
    units: Mapping[int, RingElem]
    rank: int
    y: Mapping[int, np.ndarray] = field(repr=False)
    params: Mapping[str, object] = field(default_factory=dict)

    def group(self, T: int) -> TowerGroup:
        return TowerGroup(self.tower, T, "Gamma")

    def shape(self, T: int) -> tuple[int, ...]:
        return (self.rank,) + self.group(T).ambient_shape + (self.ring.d,)

    def levels(self) -> list[int]:
        return self.tower.divisors(self.top)

    def module_dim(self, T: int) -> int:
        return self.rank * self.group(T).size

    def flat(self, T: int) -> np.ndarray:
        """y_T as a flat coordinate vector (|M_T|, d)."""
        return self.y[T].reshape(-1, self.ring.d)

    def sub_system(self, T: int) -> "MockEulerSystem":
        """The system truncated at level T (same arrays for divisors of T)."""
        keep = {L: v for L, v in self.y.items() if T % L == 0}
        units = {ell: u for ell, u in self.units.items() if T % ell == 0}
        return MockEulerSystem(self.tower, self.ring, T, self.eps, units, self.rank, keep, dict(self.params))

    def replace_level(self, T: int, value: np.ndarray) -> "MockEulerSystem":
        ys = dict(self.y)
        ys[T] = np.asarray(value, dtype=np.int64) % self.ring.q
        return MockEulerSystem(self.tower, self.ring, self.top, self.eps, dict(self.units), self.rank, ys, dict(self.params))

    # serialisation ------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA,
            "kind": "mock_euler_system",
            "tower": self.tower.to_json(),
            "ring": ring_to_json(self.ring),
            "top": str(self.top),
            "eps": str(self.eps),
            "rank": str(self.rank),
            "units": {str(ell): [str(c) for c in u.coeffs] for ell, u in sorted(self.units.items())},
            "levels": {
                str(T): [str(int(v)) for v in self.y[T].reshape(-1)] for T in self.levels()
            },
            "params": {k: str(v) for k, v in sorted(self.params.items())},
        }

    @classmethod
    def from_json(cls, obj: dict) -> "MockEulerSystem":
        try:
            if obj.get("schema") != SCHEMA or obj.get("kind") != "mock_euler_system":
                raise SchemaError("not a bbreg/1 mock_euler_system document")
            tower = TowerSpec.from_json(obj["tower"])
            ring = ring_from_json(obj["ring"])
            top = int(obj["top"])
            eps = int(obj["eps"])
            if eps not in (1, -1):
                raise SchemaError("eps must be +1 or -1")
            rank = int(obj["rank"])
            units = {int(k): ring([int(c) for c in v]) for k, v in obj["units"].items()}
            ys = {}
            for T in tower.divisors(top):
                vals = obj["levels"][str(T)]
                shape = (rank,) + TowerGroup(tower, T, "Gamma").ambient_shape + (ring.d,)
                arr = np.array([int(v) for v in vals], dtype=np.int64)
                if arr.size != math.prod(shape):
                    raise SchemaError(f"level {T} has {arr.size} entries, expected {math.prod(shape)}")
                ys[T] = arr.reshape(shape) % ring.q
            for ell in tower.primes_of(top):
                if ell not in units:
                    raise SchemaError(f"missing unit for l = {ell}")
            params = dict(obj.get("params", {}))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, SchemaError):
                raise
            raise SchemaError(f"malformed mock system: {exc}") from exc
        return cls(tower, ring, top, eps, units, rank, ys, params)


def symmetrize(z: np.ndarray, eps: int, q: int) -> np.ndarray:
    """z - eps * c(z), which satisfies c(y) = -eps * y."""
    return (z - eps * c_action(z)) % q


def gen_system(
    seed: int,
    tower: TowerSpec,
    ring: CoeffRing,
    eps: int,
    units: Mapping[int, object],
    rank: int = 1,
    noise: bool = True,
    top: int | None = None,
    vanishing_order: int | None = None,
) -> MockEulerSystem:
    """Generate a coherent mock Euler system.

    y_1 = z - eps c(z) for random z.  At a level T > 1 with prime set P,

        y_T = sum_{0 != Q <= P} (-1)^(|Q|+1) u_Q sec_{T/Q -> T}(y_{T/Q}) + n_T

    with u_Q the product of the units over Q.  Inclusion-exclusion makes
    cores_l(y_T) = u_l y_{T/l} hold for every l in P simultaneously.  The
    noise n_T is the c-symmetrisation of prod_{l | T} (sigma_l - 1)^{e_l} w,
    which lies in the kernel of every cores_l.

    Args:
        seed: RNG seed; generation is deterministic in it.
        units: u_l for each tower prime dividing ``top`` (ints or RingElems).
        noise: add kernel noise at levels above 1.
        top: top level, default the full tower product.
        vanishing_order: if given, noise exponents satisfy sum e_l >= this
            value, so the noise part has all derivatives of smaller order
            divisible by p^eta.  Combine with units = 0 (mod p^m) to force
            derivative vanishing of the whole element.
    """
    if eps not in (1, -1):
        raise ValueError("eps must be +1 or -1")
    tower.check_ring_prime(ring.p)
    top = tower.top if top is None else top
    rng = np.random.default_rng(seed)
    units = {int(ell): ring(u) for ell, u in units.items()}
    for ell in tower.primes_of(top):
        if ell not in units:
            raise ValueError(f"missing unit for l = {ell}")
    q = ring.q
    sys_shape = lambda T: (rank,) + TowerGroup(tower, T, "Gamma").ambient_shape + (ring.d,)
    ys: dict[int, np.ndarray] = {}
    for T in tower.divisors(top):
        primes = tower.primes_of(T)
        if T == 1:
            z = rng.integers(0, q, size=sys_shape(1))
            ys[1] = symmetrize(z, eps, q)
            continue
        acc = np.zeros(sys_shape(T), dtype=np.int64)
        for size in range(1, len(primes) + 1):
            sign = 1 if size % 2 else -1
            for Q in itertools.combinations(primes, size):
                uQ = ring.one
                for ell in Q:
                    uQ = uQ * units[ell]
                lower = T // math.prod(Q)
                term = _mul_unit(ring, uQ, sec(tower, ys[lower], lower, T))
                acc = (acc + sign * term) % q
        if noise or vanishing_order is not None:
            w = rng.integers(0, q, size=sys_shape(T))
            exps = {ell: 1 for ell in primes}
            if vanishing_order is not None:
                extra = max(0, vanishing_order - len(primes))
                for _ in range(extra):
                    exps[primes[int(rng.integers(len(primes)))]] += 1
            for ell, e in exps.items():
                w = apply_sigma_minus_one(ring, tower, ell, w, e)
            acc = (acc + symmetrize(w, eps, q)) % q
        ys[T] = acc
    params = {"seed": seed, "noise": noise}
    if vanishing_order is not None:
        params["vanishing_order"] = vanishing_order
    return MockEulerSystem(tower, ring, top, eps, units, rank, ys, params)


# ---------------------------------------------------------------------------
# relation checks


@dataclass(frozen=True)
class NormReport:
    """Outcome of the corestriction checks; ``failures`` lists (T, l) pairs."""

    checked: tuple[tuple[int, int], ...]
    failures: tuple[tuple[int, int], ...]

    @property
    def ok(self) -> bool:
        return not self.failures


def check_norm_relations(sys: MockEulerSystem) -> NormReport:
    """Check cores_{Tl -> T}(y_{Tl}) = u_l y_T for every T l dividing the top.

    Pairs are reported as (T, l) with T the lower level.
    """
    checked, failures = [], []
    for T2 in sys.levels():
        for ell in sys.tower.primes_of(T2):
            T = T2 // ell
            lhs = cores(sys.ring, sys.tower, sys.y[T2], T2, T)
            rhs = _mul_unit(sys.ring, sys.units[ell], sys.y[T])
            checked.append((T, ell))
            if not np.array_equal(lhs % sys.ring.q, rhs % sys.ring.q):
                failures.append((T, ell))
    return NormReport(tuple(sorted(checked)), tuple(sorted(failures)))


def check_conjugation(sys: MockEulerSystem) -> dict[int, GroupElem | None]:
    """For each level, a sigma with c(y_T) = -eps sigma(y_T), or None."""
    out = {}
    q = sys.ring.q
    for T in sys.levels():
        y = sys.y[T]
        target = (-sys.eps * c_action(y)) % q
        found = None
        for g in sys.group(T).elements():
            if np.array_equal(act(y, g) % q, target):
                found = g
                break
        out[T] = found
    return out


# ---------------------------------------------------------------------------
# derived classes


def _level_of(sys: MockEulerSystem, kappa: DerivativeOp, ell: int) -> int:
    if ell in kappa.primes:
        raise ValueError(f"{ell} is already in the support of {kappa}")
    level = kappa.support * ell
    if sys.top % level:
        raise ValueError(f"level {level} does not divide the top level {sys.top}")
    return level


def derived_class_P(sys: MockEulerSystem, kappa: DerivativeOp, ell: int) -> np.ndarray:
    """P(l) = D_kappa D_l^1 (y_{S l}) mod p^m, with S the support of kappa."""
    level = _level_of(sys, kappa, ell)
    return apply_derivative(sys.ring, sys.tower, kappa.with_factor(ell, 1), sys.y[level])


def assumption_check(sys: MockEulerSystem, kappa: DerivativeOp, ell: int) -> list[DerivativeOp]:
    """Operators D' strictly below D_kappa D_l^1 with D'(y_{S l}) != 0."""
    level = _level_of(sys, kappa, ell)
    full = kappa.with_factor(ell, 1)
    y = sys.y[level]
    failing = []
    ranges = [range(k + 1) for k in full.exponents]
    for kp in itertools.product(*ranges):
        if kp == full.exponents:
            continue
        op = DerivativeOp(tuple(zip(full.primes, kp)))
        if apply_derivative(sys.ring, sys.tower, op, y).any():
            failing.append(op)
    return failing


def is_fixed(sys: MockEulerSystem, x: np.ndarray, group: TowerGroup) -> bool:
    q = sys.ring.q
    return all(np.array_equal(act(x, g) % q, x % q) for g in group.generators())


def _norm_with_lift(sys: MockEulerSystem, x: np.ndarray, lift: Sequence[GroupElem]) -> np.ndarray:
    out = np.zeros_like(x)
    for g in lift:
        out = (out + act(x, g)) % sys.ring.q
    return out


def descend(sys: MockEulerSystem, P: np.ndarray, T: int, seed: int = 0, lifts: int = 10):
    """d = N_T(P) for a G_T-fixed P, with a lift-independence certificate.

    Returns:
        (d, certificate) where certificate is True iff ``lifts`` random lifts
        sum_gamma (g_gamma, gamma) of the Gamma_1-norm all give the same d and
        d is Gamma_T-fixed.

    Raises:
        NotFixed: if P is not fixed by G_T.
    """
    G = TowerGroup(sys.tower, T, "G")
    Gam = TowerGroup(sys.tower, T, "Gamma")
    if not is_fixed(sys, P, G):
        raise NotFixed("P is not fixed by G_T")
    gamma_axes = [a + 1 for a in Gam.gamma_axes()]
    d = P
    for ax in gamma_axes:
        d = np.broadcast_to(d.sum(axis=ax, keepdims=True), d.shape)
    d = np.ascontiguousarray(d) % sys.ring.q
    ok = is_fixed(sys, d, Gam)
    rng = np.random.default_rng(seed)
    from .groups import norm_lift

    base = norm_lift(T, sys.tower)
    for _ in range(lifts):
        lift = []
        for g in base:
            h = G.element(int(rng.integers(G.size)))
            lift.append(g * h)
        if not np.array_equal(_norm_with_lift(sys, P, lift), d):
            ok = False
    return d, ok


def epsilon_kappa(kappa: DerivativeOp, eps: int) -> int:
    return (-1) ** kappa.order * eps


def eigen_check(sys: MockEulerSystem, d: np.ndarray, kappa: DerivativeOp) -> bool:
    """c(d) = eps_kappa * d mod p^m.

    ``kappa`` is the operator D_kappa of P(l) = D_kappa D_l^1 (y_{S l}),
    without the D_l^1 factor.
    """
    q = sys.ring.q
    return np.array_equal(c_action(d) % q, (epsilon_kappa(kappa, sys.eps) * d) % q)


def galois_span_dim(sys: MockEulerSystem, ell: int) -> int:
    """Residue-field dimension of the span of sigma^i(y_l) mod p."""
    y = sys.y[ell] % sys.ring.p
    ax = sys.tower.primes.index(ell) + 1
    rows = np.stack([np.roll(y, i, axis=ax).reshape(-1, sys.ring.d) for i in range(ell + 1)])
    field_ring = CoeffRing(sys.ring.p, 1, sys.ring.d, sys.ring.poly)
    if not rows.any():
        return 0
    return HowellBasis.from_rows(field_ring, rows % sys.ring.p).rank


def factorization_check(sys: MockEulerSystem, kappa: DerivativeOp) -> bool:
    """D_kappa(y_S) = res(D_kappa'(y_{S'})) * prod_{k_l = 0} u_l.

    S is the support of kappa, S' its conductor and kappa' the restriction of
    kappa to primes with k_l > 0.  Vacuously true when S' = S.
    """
    S = kappa.support
    Sp = kappa.conductor
    if S == Sp:
        return True
    ring, tower = sys.ring, sys.tower
    lhs = apply_derivative(ring, tower, kappa, sys.y[S])
    kp = DerivativeOp(tuple((ell, k) for ell, k in kappa.factors if k > 0))
    inner = apply_derivative(ring, tower, kp, sys.y[Sp])
    rhs = res(tower, inner, Sp, S)
    u = ring.one
    for ell, k in kappa.factors:
        if k == 0:
            u = u * sys.units[ell]
    rhs = _mul_unit(ring, u, rhs)
    return np.array_equal(lhs % ring.q, rhs % ring.q)


def cores_res_check(sys: MockEulerSystem) -> bool:
    """cores o res = (l + 1) on every level and prime."""
    q = sys.ring.q
    for T in sys.levels():
        for ell in sys.tower.primes_of(sys.top // T):
            x = sys.y[T]
            back = cores(sys.ring, sys.tower, res(sys.tower, x, T, T * ell), T * ell, T)
            if not np.array_equal(back % q, ((ell + 1) * x) % q):
                return False
    return True
