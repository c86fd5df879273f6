"""Randomised property suites behind ``bbreg verify``.

Each suite returns per-property counts of checked and failed instances.  The
report is a deterministic function of (suite, seed, trials, system file).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import derivatives as dv
from . import localmodel as lm
from . import mockeuler as me
from . import regulator as rg
from . import thetal as tl
from .coeffring import CoeffRing
from .groupring import build_filtration
from .groups import TowerGroup, TowerSpec, mobius

SCHEMA = "bbreg/1"
DEMO_DISC = -163
TAYLOR_PRIMES = (5, 11, 17)
SUITES = ("taylor", "identities", "compat", "regulator", "local")


@dataclass
class Tally:
    """Counts per named property, keeping the first failing instance."""

    counts: dict = field(default_factory=dict)

    def record(self, name: str, ok: bool, detail: str = "") -> None:
        entry = self.counts.setdefault(name, {"checked": 0, "failed": 0})
        entry["checked"] += 1
        if not ok:
            entry["failed"] += 1
            entry.setdefault("first_failure", detail)

    @property
    def ok(self) -> bool:
        return all(e["failed"] == 0 for e in self.counts.values())

    def to_json(self) -> dict:
        return {"ok": self.ok, "properties": {k: self.counts[k] for k in sorted(self.counts)}}


def _rings() -> list[CoeffRing]:
    return [CoeffRing(3, 1), CoeffRing(3, 2), CoeffRing(3, 2, 2)]


def _random_tower(rng: np.random.Generator, primes=TAYLOR_PRIMES, max_size: int | None = None) -> TowerSpec:
    while True:
        k = int(rng.integers(1, len(primes) + 1))
        chosen = tuple(sorted(rng.choice(primes, size=k, replace=False).tolist()))
        if max_size is None or math.prod(ell + 1 for ell in chosen) <= max_size:
            return TowerSpec(DEMO_DISC, chosen)


def suite_taylor(rng: np.random.Generator, trials: int) -> Tally:
    """Taylor reconstruction and the divisibility criterion."""
    tally = Tally()
    rings = _rings()
    for i in range(trials):
        tower = _random_tower(rng)
        ring = rings[int(rng.integers(len(rings)))]
        shape = (1,) + TowerGroup(tower, tower.top, "Gamma").ambient_shape + (ring.d,)
        m = rng.integers(0, ring.q, size=shape)
        try:
            dv.taylor_expand(ring, tower, tower.top, m, check=True)
            tally.record("taylor_reconstruction", True)
        except AssertionError:
            tally.record("taylor_reconstruction", False, f"trial {i}: {tower.primes} {ring}")
    for i in range(max(1, trials // 4)):
        tower = _random_tower(rng, max_size=216)
        ring = CoeffRing(3, 1 + int(rng.integers(2)))
        r = 1 + int(rng.integers(3))
        ok, _ = divisibility_instance(int(rng.integers(2**31)), tower, ring, r)
        tally.record("divisibility_criterion", ok, f"trial {i}: {tower.primes} {ring} r={r}")
    return tally


def divisibility_instance(seed: int, tower: TowerSpec, ring: CoeffRing, r: int) -> tuple[bool, bool]:
    """Build a system with derivatives vanishing below order r at the top level.

    Returns:
        (implication_holds, hypothesis_holds).
    """
    units = {ell: 0 for ell in tower.primes}
    sys = me.gen_system(seed, tower, ring, 1, units, vanishing_order=r)
    filt = build_filtration(TowerGroup(tower, tower.top, "G"), ring, max(r + 1, 2), method="direct")
    hyp, concl = dv.divisibility_criterion(ring, tower, tower.top, sys.y[tower.top], r, filt)
    return (not hyp) or concl, hyp


def suite_identities(rng: np.random.Generator, trials: int) -> Tally:
    """One-variable derivative identities and group-ring coefficients."""
    tally = Tally()
    for ell in TAYLOR_PRIMES:
        for k in range(ell + 1):
            for ring in [None] + _rings():
                tally.record("sigma_minus_one_identity", dv.sigma_derivative_identity(ell, k, ring), f"l={ell} k={k} {ring}")
            tally.record(
                "augmentation_binomial",
                dv.aug_derivative(ell, k) == math.comb(ell + 1, k + 1),
                f"l={ell} k={k}",
            )
        for _ in range(trials):
            xi = rng.integers(-50, 51, size=ell + 1).tolist()
            alpha = dv.basis_convert(xi)
            tally.record("basis_round_trip", dv.expand_combination(ell, alpha) == xi, f"l={ell} xi={xi}")
    worked = dv.basis_convert([0, 1, 0, 0, 0, 0])
    tally.record("basis_worked_example", worked == [0, 1, -2, 3, -4, 5], str(worked))
    tower = TowerSpec(DEMO_DISC, TAYLOR_PRIMES)
    ring = CoeffRing(3, 2)
    S = tower.top
    grp = TowerGroup(tower, S, "Gamma")
    for T in tower.divisors(S):
        a, a_star = tl.coefficients_aT(tower, ring, S, T)
        support = np.count_nonzero(a_star.data[:, 0])
        expect = math.prod(ell + 1 for ell in tower.primes_of(S // T))
        unit = bool(np.all((a_star.data[:, 0] == 0) | (a_star.data[:, 0] == 1)))
        tally.record("a_star_unit_coefficients", unit and support == expect, f"T={T}")
        aug = int(a.data[:, 0].sum()) % ring.q
        tally.record("a_T_augmentation", aug == (mobius(T) * expect) % ring.q, f"T={T}")
    for ell in TAYLOR_PRIMES:
        for p, m in ((3, 1), (3, 2)):
            if (ell + 1) % p**m:
                continue
            for k in range(1, p):
                D = dv.DerivativeOp(((ell, k),))
                tally.record("conjugation_formula", dv.conj_formula_holds(D, p, m), f"l={ell} k={k} p^m={p**m}")
    return tally


def _demo_units(q: int, rng: np.random.Generator) -> dict:
    return {5: int(rng.integers(q)), 11: int(rng.integers(q))}


def check_system(sys: me.MockEulerSystem, tally: Tally, label: str = "system") -> None:
    """Relations and compatibilities that every coherent system must satisfy."""
    norm = me.check_norm_relations(sys)
    tally.record("norm_relations", norm.ok, f"{label}: failing (T, l) = {list(norm.failures)}")
    wit = me.check_conjugation(sys)
    bad = [T for T, g in wit.items() if g is None]
    tally.record("conjugation_relation", not bad, f"{label}: no witness at levels {bad}")
    tally.record("cores_res", me.cores_res_check(sys), label)
    if not norm.ok:
        return
    S = sys.top
    for T in sys.tower.divisors(S):
        res = tl.compatibility_check(sys, S, T)
        tally.record("l_function_compatibility", res.ok, f"{label}: S={S} T={T}")


def suite_compat(rng: np.random.Generator, trials: int, system: me.MockEulerSystem | None = None) -> Tally:
    """Mock Euler system relations, descent and L-function compatibility."""
    tally = Tally()
    if system is not None:
        check_system(system, tally, "input")
        return tally
    tower = TowerSpec(DEMO_DISC, (5, 11))
    for i in range(trials):
        ring = CoeffRing(3, 2 + int(rng.integers(2)))
        eps = 1 if rng.integers(2) else -1
        seed = int(rng.integers(2**31))
        sys = me.gen_system(seed, tower, ring, eps, _demo_units(ring.q, rng))
        check_system(sys, tally, f"seed {seed}")
        for kappa in (dv.DerivativeOp(((5, 0),)), dv.DerivativeOp(((5, 0), (11, 0))), dv.DerivativeOp(((5, 1), (11, 0)))):
            tally.record("factorization", me.factorization_check(sys, kappa), f"seed {seed} {kappa}")
        # derived classes need p^m | l + 1, which on this tower means Z/3
        low = CoeffRing(3, 1)
        van = me.gen_system(seed, tower, low, eps, {5: 0, 11: 0}, vanishing_order=1)
        for kappa, ell in ((dv.DerivativeOp(()), 5), (dv.DerivativeOp(()), 11), (dv.DerivativeOp(((5, 1),)), 11)):
            if me.assumption_check(van, kappa, ell):
                continue
            level = kappa.support * ell
            P = me.derived_class_P(van, kappa, ell)
            fixed = me.is_fixed(van, P, TowerGroup(tower, level, "G"))
            tally.record("derived_class_fixed", fixed, f"seed {seed} {kappa} l={ell}")
            if fixed:
                d, cert = me.descend(van, P, level, seed=seed)
                tally.record("descent_lift_independence", cert, f"seed {seed} {kappa} l={ell}")
                tally.record("descent_eigenspace", me.eigen_check(van, d, kappa), f"seed {seed} {kappa} l={ell}")
    return tally


def suite_regulator(rng: np.random.Generator, trials: int) -> Tally:
    """Graded determinants, cokernel orders and regulator compatibility."""
    tally = Tally()
    tower = TowerSpec(DEMO_DISC, (5, 11))
    ring = CoeffRing(3, 2)
    for i in range(trials):
        rank = 1 + int(rng.integers(3))
        seed = int(rng.integers(2**31))
        cfg = rg.random_configuration(seed, tower, ring, rank, 55)
        primes = tower.primes_of(55)
        tally.record(
            "b_order_matches_cokernel",
            abs(rg.b_order(rank, cfg.local, primes)) == rg.b_cokernel_order(rank, cfg.local, primes),
            f"seed {seed}",
        )
        for T in (5, 11):
            res = rg.regulator_compatibility_check(cfg.pair, cfg.lattice, cfg.local, 55, T)
            tally.record("regulator_compatibility", res.ok, f"seed {seed} rank {rank} T={T}")
        if rank >= 2:
            R = rg.pairing_matrix(cfg.pair, cfg.lattice, 55)
            dup = [list(row) for row in R]
            dup[1] = dup[0]
            tally.record("det_alternating", rg.graded_det(dup).is_zero(), f"seed {seed}")
    return tally


def suite_local(rng: np.random.Generator, trials: int) -> Tally:
    """Frobenius models at Kolyvagin-type primes and divided Frobenius scalars."""
    tally = Tally()
    for ell in (5, 17, 53):
        for p in (3, 5, 7, 11, 13):
            if p == ell:
                continue
            m = 1
            while (ell + 1) % p ** (m + 1) == 0:
                m += 1
            if (ell + 1) % p:
                continue
            for mm in range(1, m + 1):
                ring = CoeffRing(p, mm)
                for a in (0, p**mm, -(p**mm), 2 * p**mm):
                    fm = lm.build_model(ell, a, 2, ring)
                    tag = f"l={ell} p^m={p}^{mm} a={a}"
                    tally.record("cayley_hamilton", not fm.cayley_hamilton().any(), tag)
                    tally.record("frobenius_squares_to_one", fm.squares_to_one(), tag)
                    tally.record("h1f_order", lm.h1f_model(fm).order == p ** (2 * mm), tag)
                    tally.record("eigenspace_ranks", lm.eigenspace_ranks(fm) == (1, 1), tag)
    for i in range(trials * 10):
        p = int(rng.choice([3, 5, 7]))
        m = 1 + int(rng.integers(2))
        q = p**m
        ell1 = q * int(rng.integers(1, 200))
        a = q * int(rng.integers(-200, 201))
        plus, minus = lm.frob_division(a, ell1 - 1, p, m)
        want_plus = dv.vp((a + ell1) // q, p) == 0
        want_minus = dv.vp((a - ell1) // q, p) == 0
        tally.record("frob_division_units", plus.is_unit == want_plus and minus.is_unit == want_minus, f"a={a} l+1={ell1}")
    return tally


RUNNERS: dict[str, Callable] = {
    "taylor": suite_taylor,
    "identities": suite_identities,
    "compat": suite_compat,
    "regulator": suite_regulator,
    "local": suite_local,
}


def run(suite: str, seed: int, trials: int, system: me.MockEulerSystem | None = None) -> dict:
    """Run one suite (or "all") and return the JSON report."""
    names = SUITES if suite == "all" else (suite,)
    if system is not None and suite not in ("compat", "all"):
        raise ValueError("an input system can only be checked by the compat suite")
    out = {}
    for idx, name in enumerate(names):
        if name not in RUNNERS:
            raise ValueError(f"unknown suite {name!r}")
        rng = np.random.default_rng([seed, idx])
        if name == "compat":
            tally = suite_compat(rng, trials, system)
        else:
            tally = RUNNERS[name](rng, trials)
        out[name] = tally.to_json()
    failing = sorted(f"{s}.{p}" for s, rep in out.items() for p, e in rep["properties"].items() if e["failed"])
    return {
        "schema": SCHEMA,
        "kind": "verify_report",
        "suite": suite,
        "seed": seed,
        "trials": trials,
        "ok": not failing,
        "failing": failing,
        "suites": out,
    }
