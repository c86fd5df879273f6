"""Theta elements, traced theta elements and the arithmetic L-function.

Tensor objects M_T (x) R[H] (H a group G_T or Gamma_S) are stored as arrays
of shape ``(n, |H|, d)``: row i is the group-ring coefficient vector of the
i-th module coordinate, n = g * |Gamma_T| being the flattened module layout
of :mod:`bbreg.mockeuler`.  L-function values M_S (x) M_S (x) R[Gamma_S] are
``(n, n, |Gamma_S|, d)`` arrays.

Module legs are moved between levels by restriction (the broadcast map) and
group-ring legs by the inclusions G_T in G_S in Gamma_S.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .coeffring import CoeffRing, RingElem
from .derivatives import DerivativeOp, resolvent, taylor_expand
from .errors import DimensionMismatch, SizeCapExceeded
from .groupring import (
    FiltrationTable,
    GradedClass,
    GroupRingElem,
    build_filtration,
    convolve,
    convolve_outer,
    leading_term,
    star_array,
    vanishing_order,
)
from .groups import TowerGroup, TowerSpec, chi_K, mobius
from .mockeuler import MockEulerSystem, act, res

L_SIZE_CAP = 20_000_000


@dataclass(frozen=True, eq=False)
class TensorElement:
    """An element of M_level (x) R[group].

    Attributes:
        level: module level T (the module is M_T).
        group: group of the group-ring leg.
        value: array (n_T, |group|, d).
    """

    level: int
    group: TowerGroup
    value: np.ndarray = field(repr=False)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TensorElement)
            and self.level == other.level
            and self.group == other.group
            and np.array_equal(self.value, other.value)
        )

    __hash__ = None


ThetaElement = TensorElement


@dataclass(frozen=True, eq=False)
class LFunctionElement:
    """L_S in M_level (x) M_level (x) R[group], with its two factors.

    Attributes:
        level: module level of both legs.
        group: Gamma_S, or Gamma_T after projection.
        value: array (n, n, |group|, d).
        left, right: the two factors (None after projection).
    """

    level: int
    group: TowerGroup
    value: np.ndarray = field(repr=False)
    left: TensorElement | None = field(default=None, repr=False)
    right: TensorElement | None = field(default=None, repr=False)

    def rows(self) -> np.ndarray:
        """Value as (n*n, |group|, d), module legs flattened."""
        n = self.value.shape[0]
        return self.value.reshape(n * n, self.group.size, -1)


# ---------------------------------------------------------------------------
# layout helpers


def _module_shape(sys: MockEulerSystem, T: int) -> tuple[int, ...]:
    return sys.shape(T)


def _to_ambient(x: np.ndarray, group: TowerGroup) -> np.ndarray:
    """(..., |H|, d) -> (...,) + ambient(H) + (d,)."""
    lead = x.shape[:-2]
    return x.reshape(lead + group.ambient_shape + (x.shape[-1],))


def _from_ambient(x: np.ndarray, group: TowerGroup) -> np.ndarray:
    k = len(group.ambient_shape)
    lead = x.shape[: x.ndim - k - 1]
    return x.reshape(lead + (group.size, x.shape[-1]))


def _res_leg(sys: MockEulerSystem, flat: np.ndarray, T: int, S: int) -> np.ndarray:
    """Restrict the leading flattened module axis of ``flat`` from level T to S."""
    if T == S:
        return flat
    rest = flat.shape[1:]
    mod = _module_shape(sys, T)[:-1]  # the trailing d lives in ``rest``
    arr = flat.reshape(mod + rest)
    arr = res(sys.tower, arr, T, S)
    return arr.reshape((-1,) + rest)


# ---------------------------------------------------------------------------
# theta and zeta


def norm_lift_apply(sys: MockEulerSystem, y: np.ndarray) -> np.ndarray:
    """N_T(y) for the canonical lift: sum over the Gamma_1 axes."""
    out = y
    for ax in TowerGroup(sys.tower, 1, "Gamma").gamma_axes():
        out = np.broadcast_to(out.sum(axis=ax + 1, keepdims=True), out.shape)
    return np.ascontiguousarray(out) % sys.ring.q


def _resolvent_element(sys: MockEulerSystem, T: int, m: np.ndarray) -> TensorElement:
    ring, tower = sys.ring, sys.tower
    G = TowerGroup(tower, T, "G")
    box = resolvent(ring, tower, T, m)  # box + (g,) + amb + (d,)
    t = len(G.primes)
    body = box.reshape((G.size, -1, ring.d))
    return TensorElement(T, G, np.ascontiguousarray(body.transpose(1, 0, 2)))


def theta(sys: MockEulerSystem, T: int) -> TensorElement:
    """theta_T = sum_{sigma in G_T} sigma(y_T) (x) sigma."""
    return _resolvent_element(sys, T, sys.y[T])


def zeta(sys: MockEulerSystem, T: int) -> TensorElement:
    """zeta_T = sum_{sigma in G_T} sigma(N_T y_T) (x) sigma."""
    return _resolvent_element(sys, T, norm_lift_apply(sys, sys.y[T]))


def star(x: TensorElement) -> TensorElement:
    """Apply sigma -> sigma^-1 to the group-ring leg."""
    return TensorElement(x.level, x.group, star_array(x.group, x.value, axis=-2))


def zeta_star(sys: MockEulerSystem, T: int) -> TensorElement:
    return star(zeta(sys, T))


def embed(sys: MockEulerSystem, x: TensorElement, S: int) -> TensorElement:
    """Move x to M_S (x) R[Gamma_S]: restriction on the module leg, inclusion on the group leg."""
    T = x.level
    if S % T:
        raise ValueError(f"{T} does not divide {S}")
    big = TowerGroup(sys.tower, S, "Gamma")
    if S % x.group.T:
        raise ValueError("group leg does not embed")
    mod = _res_leg(sys, x.value, T, S)
    # group leg: place the ambient array at index 0 of missing axes
    amb = _to_ambient(mod, x.group)
    out = np.zeros((mod.shape[0],) + big.ambient_shape + (sys.ring.d,), dtype=np.int64)
    idx = [slice(None)]
    for n_small, n_big in zip(x.group.ambient_shape, big.ambient_shape):
        idx.append(slice(0, n_small))
    out[tuple(idx)] = amb
    return TensorElement(S, big, _from_ambient(out, big))


# ---------------------------------------------------------------------------
# coefficients and L


def _quotient_axes(tower: TowerSpec, S: int, T: int) -> list[int]:
    return [tower.primes.index(ell) for ell in tower.primes_of(S // T)]


def coefficients_aT(tower: TowerSpec, ring: CoeffRing, S: int, T: int) -> tuple[GroupRingElem, GroupRingElem]:
    """a_T = mu(T) sum_{sigma in Gal(K_S/K_T)} sigma and a_T* = chi_K(T) a_T in R[Gamma_S]."""
    if S % T:
        raise ValueError(f"{T} does not divide {S}")
    grp = TowerGroup(tower, S, "Gamma")
    amb = np.zeros(grp.ambient_shape + (ring.d,), dtype=np.int64)
    idx = []
    quotient = set(_quotient_axes(tower, S, T))
    for ax, n in enumerate(grp.ambient_shape):
        idx.append(slice(None) if ax in quotient else slice(0, 1))
    amb[tuple(idx) + (0,)] = mobius(T) % ring.q
    a = GroupRingElem(ring, grp, amb.reshape(grp.size, ring.d))
    b = GroupRingElem(ring, grp, (chi_K(tower.disc, T) * a.data) % ring.q)
    return a, b


def _apply_aT(sys: MockEulerSystem, x: TensorElement, S: int, T: int, sign: int) -> np.ndarray:
    """sign * mu(T) * sum over Gal(K_S/K_T) acting on the group leg of x (already at level S)."""
    amb = _to_ambient(x.value, x.group)
    for ax in _quotient_axes(sys.tower, S, T):
        amb = np.broadcast_to(amb.sum(axis=ax + 1, keepdims=True), amb.shape)
    return (sign * mobius(T) * _from_ambient(np.ascontiguousarray(amb), x.group)) % sys.ring.q


def l_factors(
    sys: MockEulerSystem,
    S: int,
    b: Mapping[int, GroupRingElem] | None = None,
    b_prime: Mapping[int, GroupRingElem] | None = None,
) -> tuple[TensorElement, TensorElement]:
    """(sum_T b_T zeta_T, sum_T b'_T zeta*_T) in M_S (x) R[Gamma_S]; default b = a, b' = a*."""
    ring, tower = sys.ring, sys.tower
    grp = TowerGroup(tower, S, "Gamma")
    n = sys.module_dim(S)
    X = np.zeros((n, grp.size, ring.d), dtype=np.int64)
    Y = np.zeros_like(X)
    for T in tower.divisors(S):
        z = embed(sys, zeta(sys, T), S)
        zs = embed(sys, zeta_star(sys, T), S)
        if b is None:
            X = (X + _apply_aT(sys, z, S, T, 1)) % ring.q
        else:
            X = (X + convolve(ring, grp, b[T].data, z.value)) % ring.q
        if b_prime is None:
            Y = (Y + _apply_aT(sys, zs, S, T, chi_K(tower.disc, T))) % ring.q
        else:
            Y = (Y + convolve(ring, grp, b_prime[T].data, zs.value)) % ring.q
    return TensorElement(S, grp, X), TensorElement(S, grp, Y)


def l_function(
    sys: MockEulerSystem,
    S: int,
    b: Mapping[int, GroupRingElem] | None = None,
    b_prime: Mapping[int, GroupRingElem] | None = None,
    size_cap: int = L_SIZE_CAP,
) -> LFunctionElement:
    """L_S = (sum_T a_T zeta_T) (x) (sum_T a*_T zeta*_T) in M_S (x) M_S (x) R[Gamma_S].

    Raises:
        SizeCapExceeded: if n^2 |Gamma_S| d exceeds ``size_cap``.
    """
    grp = TowerGroup(sys.tower, S, "Gamma")
    n = sys.module_dim(S)
    if n * n * grp.size * sys.ring.d > size_cap:
        raise SizeCapExceeded(f"L_{S} would have {n * n * grp.size * sys.ring.d} entries")
    X, Y = l_factors(sys, S, b, b_prime)
    value = convolve_outer(sys.ring, grp, X.value, Y.value)
    return LFunctionElement(S, grp, value, X, Y)


def mu_map(sys: MockEulerSystem, x, T: int):
    """Project the group leg from Gamma_S to Gamma_T; module legs are unchanged."""
    grp = x.group
    S = grp.T
    if S % T:
        raise ValueError(f"{T} does not divide {S}")
    small = TowerGroup(sys.tower, T, "Gamma")
    amb = _to_ambient(x.value, grp)
    lead = x.value.ndim - 2
    for ax in _quotient_axes(sys.tower, S, T):
        amb = amb.sum(axis=lead + ax, keepdims=True)
    out = _from_ambient(amb % sys.ring.q, small)
    if isinstance(x, LFunctionElement):
        return LFunctionElement(x.level, small, out)
    return TensorElement(x.level, small, out)


def euler_factor(sys: MockEulerSystem, S: int, T: int) -> RingElem:
    """prod_{l | S/T} (l + 1 - u_l)(l + 1 + u_l)."""
    out = sys.ring.one
    for ell in sys.tower.primes_of(S // T):
        u = sys.units[ell]
        out = out * ((ell + 1) - u) * (u + (ell + 1))
    return out


def embed_l(sys: MockEulerSystem, L: LFunctionElement, S: int) -> LFunctionElement:
    """Restrict both module legs of L from its level to S (group leg unchanged)."""
    T = L.level
    v = _res_leg(sys, L.value, T, S)
    v = np.moveaxis(_res_leg(sys, np.moveaxis(v, 1, 0), T, S), 0, 1)
    return LFunctionElement(S, L.group, np.ascontiguousarray(v))


@dataclass(frozen=True)
class CompatibilityResult:
    S: int
    T: int
    factor: int
    ok: bool


def compatibility_check(sys: MockEulerSystem, S: int, T: int) -> CompatibilityResult:
    """mu_{S,T}(L_S) == L_T * prod_{l | S/T} (l + 1 - u_l)(l + 1 + u_l), both legs at level S."""
    LS = l_function(sys, S)
    lhs = mu_map(sys, LS, T)
    LT = embed_l(sys, l_function(sys.sub_system(T), T), S)
    f = euler_factor(sys, S, T)
    rhs = sys.ring.mul(LT.value, np.asarray(f.coeffs, dtype=np.int64))
    ok = np.array_equal(lhs.value % sys.ring.q, rhs % sys.ring.q)
    return CompatibilityResult(S, T, int(f), bool(ok))


# ---------------------------------------------------------------------------
# orders of vanishing and leading terms


def _filt(group: TowerGroup, ring: CoeffRing, depth: int) -> FiltrationTable:
    return build_filtration(group, ring, depth)


def vanishing_report(sys: MockEulerSystem, S: int, rho: int | None = None, depth: int = 8) -> dict:
    """Orders of vanishing of theta, zeta, zeta*, the two L factors and L.

    theta, zeta and zeta* are measured against I_{G_S}; the factors and L
    against I_{Gamma_S}.  Orders are capped at ``depth`` (an all-zero element
    reports the cap).  With ``rho`` given the report includes the predicted
    lower bounds order >= rho for the single elements and >= 2 rho for L.
    """
    ring = sys.ring
    G = TowerGroup(sys.tower, S, "G")
    Gam = TowerGroup(sys.tower, S, "Gamma")
    fG = _filt(G, ring, depth)
    fGam = _filt(Gam, ring, depth)
    th = theta(sys, S)
    z = zeta(sys, S)
    zs = star(z)
    L = l_function(sys, S)
    orders = {
        "theta": vanishing_order(th.value, fG),
        "zeta": vanishing_order(z.value, fG),
        "zeta_star": vanishing_order(zs.value, fG),
        "zeta_gamma": vanishing_order(embed(sys, z, S).value, fGam),
        "left": vanishing_order(L.left.value, fGam),
        "right": vanishing_order(L.right.value, fGam),
        "L": vanishing_order(L.rows(), fGam),
    }
    report = {"S": S, "depth": depth, "orders": orders}
    report["product_bound"] = orders["L"] >= min(depth, orders["left"] + orders["right"])
    if rho is not None:
        report["rho"] = rho
        report["meets_rho"] = {k: v >= min(rho, depth) for k, v in orders.items() if k != "L"}
        report["meets_rho"]["L"] = orders["L"] >= min(2 * rho, depth)
    return report


@dataclass(frozen=True, eq=False)
class LeadingTerms:
    """Leading terms at level r and the mod-p invariance data.

    Attributes:
        r: the filtration level.
        theta: class of theta_S in M (x) I^r / I^(r+1) over G_S.
        zeta: class of zeta_S in the same graded piece.
        coefficients: kappa -> D_kappa(N_S y_S) mod p for ord(kappa) = r.
        invariant: kappa -> whether that coefficient is Gamma_S-fixed mod p.
    """

    r: int
    theta: GradedClass
    zeta: GradedClass
    coefficients: Mapping[tuple[int, ...], np.ndarray] = field(repr=False)
    invariant: Mapping[tuple[int, ...], bool]

    @property
    def all_invariant(self) -> bool:
        return all(self.invariant.values())


def leading_terms(sys: MockEulerSystem, S: int, r: int, depth: int = 8) -> LeadingTerms:
    """Leading terms of theta_S and zeta_S at level r.

    The mod-p graded piece of zeta_S is represented by the Taylor
    coefficients D_kappa(N_S y_S) with ord(kappa) = r; each is tested for
    Gamma_S-invariance modulo p.

    Raises:
        NotInFiltrationLevel: if theta_S or zeta_S is not in M (x) I^r.
    """
    ring = sys.ring
    G = TowerGroup(sys.tower, S, "G")
    Gam = TowerGroup(sys.tower, S, "Gamma")
    f = _filt(G, ring, depth)
    th = leading_term(theta(sys, S).value, r, f)
    z = leading_term(zeta(sys, S).value, r, f)
    Ny = norm_lift_apply(sys, sys.y[S])
    tay = taylor_expand(ring, sys.tower, S, Ny, check=False)
    coeffs, inv = {}, {}
    p = ring.p
    for kappa, val in tay.items():
        if sum(kappa) != r:
            continue
        v = val % p
        coeffs[kappa] = v
        inv[kappa] = all(np.array_equal(act(v, g) % p, v) for g in Gam.generators())
    return LeadingTerms(r, th, z, coeffs, inv)


@dataclass(frozen=True)
class RankProfile:
    rho: int
    rho_tilde: int
    parity_flag: bool


def rank_profile(rho_plus: int, rho_minus: int) -> RankProfile:
    """rho = max(rho+, rho-) - 1 if they differ, else rho+; rho~ = rho+ + rho-."""
    if rho_plus < 0 or rho_minus < 0:
        raise ValueError("ranks must be nonnegative")
    rho = max(rho_plus, rho_minus) - 1 if rho_plus != rho_minus else rho_plus
    return RankProfile(rho, rho_plus + rho_minus, abs(rho_plus - rho_minus) == 1)
