"""Mazur-Tate style regulators built from pairings valued in I/I^2.

The global lattice is Lambda = Z^n (n = rho~).  At each prime l of a level S
a local module H_l = Z^2 / M_l Z^2 is attached, with M_l = F^2 - 1 and F the
integer companion matrix of X^2 - u~ X + l (u~ an integer lift of the unit
u_l), so det M_l = (l + 1 - u~)(l + 1 + u~).  A localisation map
phi_l: Lambda -> H_l is an integer 2 x n matrix and

    Lambda_S = ker(Lambda -> sum_{l | S} H_l),    B(S) = coker of that map.

Orders and indices are signed determinants, so that
|B(S)| [Lambda : Lambda_S] = prod_{l | S} det M_l holds exactly in Z.

A mock pairing is <x, y>_S = (x^T G y) t_S with t_S = sum_{l | S} c_l (sigma_l - 1),
which is compatible with the projections Gamma_S -> Gamma_T by construction.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .coeffring import CoeffRing, RingElem, invert
from .errors import DepthExceeded, DimensionMismatch, IndexNotInvertible, SchemaError
from .groupring import FiltrationTable, GradedClass, build_filtration, convolve, vanishing_order
from .groups import TowerGroup, TowerSpec

SCHEMA = "bbreg/1"
MAX_DET_SIZE = 6

IntMatrix = Sequence[Sequence[int]]


# ---------------------------------------------------------------------------
# integer linear algebra (exact, Python integers)


def int_det(M: IntMatrix) -> int:
    """Determinant of a square integer matrix (fraction-free Bareiss elimination)."""
    A = [list(map(int, row)) for row in M]
    n = len(A)
    if n == 0:
        return 1
    if any(len(row) != n for row in A):
        raise DimensionMismatch("matrix is not square")
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if A[i][k] != 0), None)
            if swap is None:
                return 0
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def hnf_rows(rows: IntMatrix, ncols: int | None = None) -> list[list[int]]:
    """Row Hermite normal form: a basis of the row lattice, echelon with positive pivots."""
    A = [list(map(int, r)) for r in rows]
    n = ncols if ncols is not None else (len(A[0]) if A else 0)
    out: list[list[int]] = []
    col = 0
    while A and col < n:
        live = [r for r in A if r[col] != 0]
        rest = [r for r in A if r[col] == 0]
        if not live:
            col += 1
            continue
        while len(live) > 1:
            live.sort(key=lambda r: abs(r[col]))
            piv = live[0]
            nxt = [piv]
            for r in live[1:]:
                f = r[col] // piv[col]
                r2 = [a - f * b for a, b in zip(r, piv)]
                (nxt if r2[col] != 0 else rest).append(r2)
            live = nxt
        piv = live[0]
        if piv[col] < 0:
            piv = [-a for a in piv]
        for prev in out:
            f = prev[col] // piv[col]
            if f:
                prev[:] = [a - f * b for a, b in zip(prev, piv)]
        out.append(piv)
        A = [r for r in rest if any(r)]
        col += 1
    return out


def int_kernel(A: IntMatrix, ncols: int) -> list[list[int]]:
    """Z-basis of {x in Z^ncols : A x = 0}."""
    r = len(A)
    aug = [[A[i][j] for i in range(r)] + [1 if k == j else 0 for k in range(ncols)] for j in range(ncols)]
    H = hnf_rows(aug, r + ncols)
    return [row[r:] for row in H if not any(row[:r])]


def solve_in_lattice(v: Sequence[int], basis: list[list[int]]) -> list[int] | None:
    """Integer coordinates of v in a square echelon basis, or None if v is not in the lattice."""
    v = list(map(int, v))
    n = len(basis)
    coords = [0] * n
    for i, row in enumerate(basis):
        col = next(j for j, a in enumerate(row) if a)
        if v[col] % row[col]:
            return None
        c = v[col] // row[col]
        coords[i] = c
        v = [a - c * b for a, b in zip(v, row)]
    return coords if not any(v) else None


def int_matmul(A: IntMatrix, B: IntMatrix) -> list[list[int]]:
    return [[sum(int(a) * int(b) for a, b in zip(row, col)) for col in zip(*B)] for row in A]


# ---------------------------------------------------------------------------
# local data and the lattices Lambda_S


@dataclass(frozen=True)
class LocalData:
    """Integer model of H^1_f at the prime above l.

    Attributes:
        ell: the prime l.
        u_lift: integer lift of a_l / l^(k/2 - 1).
        phi: localisation map, a 2 x n integer matrix.
    """

    ell: int
    u_lift: int
    phi: tuple[tuple[int, ...], ...]

    @property
    def frobenius(self) -> list[list[int]]:
        return [[0, -self.ell], [1, self.u_lift]]

    @property
    def relations(self) -> list[list[int]]:
        """M = F^2 - 1; H = Z^2 / M Z^2 (columns of M are the relations)."""
        F = self.frobenius
        F2 = int_matmul(F, F)
        return [[F2[i][j] - (1 if i == j else 0) for j in range(2)] for i in range(2)]

    @property
    def det(self) -> int:
        return int_det(self.relations)

    def euler_factor(self) -> int:
        return (self.ell + 1 - self.u_lift) * (self.ell + 1 + self.u_lift)


def lambda_S(rank: int, local: Mapping[int, LocalData], primes: Sequence[int]) -> list[list[int]]:
    """HNF basis of Lambda_S = {x : phi_l x in M_l Z^2 for all l in primes}."""
    primes = list(primes)
    k = len(primes)
    if k == 0:
        return [[1 if i == j else 0 for j in range(rank)] for i in range(rank)]
    # kernel of [Phi | -M] acting on (x, z) in Z^(rank + 2k)
    rows = []
    for b, ell in enumerate(primes):
        loc = local[ell]
        if len(loc.phi) != 2 or any(len(r) != rank for r in loc.phi):
            raise DimensionMismatch(f"phi at {ell} must be 2 x {rank}")
        M = loc.relations
        for i in range(2):
            row = list(loc.phi[i]) + [0] * (2 * k)
            for j in range(2):
                row[rank + 2 * b + j] = -M[i][j]
            rows.append(row)
    ker = int_kernel(rows, rank + 2 * k)
    basis = hnf_rows([v[:rank] for v in ker], rank)
    if len(basis) != rank:
        raise ArithmeticError("local relation matrices must be nonsingular")
    return basis


def b_order(rank: int, local: Mapping[int, LocalData], primes: Sequence[int]) -> int:
    """Signed |B(S)| = prod det M_l / det(basis of Lambda_S)."""
    num = math.prod(local[ell].det for ell in primes)
    idx = int_det(lambda_S(rank, local, primes))
    if num % idx:
        raise ArithmeticError("index does not divide the local order")
    return num // idx


def b_cokernel_order(rank: int, local: Mapping[int, LocalData], primes: Sequence[int]) -> int:
    """|B(S)| as the order of (sum H_l) / image(Lambda), an independent route."""
    primes = list(primes)
    k = len(primes)
    if k == 0:
        return 1
    gens = []
    for b, ell in enumerate(primes):
        M = local[ell].relations
        for j in range(2):
            v = [0] * (2 * k)
            v[2 * b] = M[0][j]
            v[2 * b + 1] = M[1][j]
            gens.append(v)
    for i in range(rank):
        v = []
        for ell in primes:
            v += [local[ell].phi[0][i], local[ell].phi[1][i]]
        gens.append(v)
    H = hnf_rows(gens, 2 * k)
    return abs(int_det(H))


# ---------------------------------------------------------------------------
# pairings and lattices


@dataclass(frozen=True, eq=False)
class MockPairing:
    """<x, y>_S = (x^T G y) * t_S with t_S = sum_{l | S} c_l (sigma_l - 1).

    Attributes:
        tower: tower data (the groups Gamma_S).
        ring: coefficient ring.
        form: the n x n integer matrix G.
        weights: c_l for the tower primes.
    """

    tower: TowerSpec
    ring: CoeffRing
    form: tuple[tuple[int, ...], ...]
    weights: Mapping[int, int]

    @property
    def rank(self) -> int:
        return len(self.form)

    def t_element(self, S: int) -> np.ndarray:
        """t_S as a dense (|Gamma_S|, d) array."""
        grp = TowerGroup(self.tower, S, "Gamma")
        out = np.zeros((grp.size, self.ring.d), dtype=np.int64)
        for ell in self.tower.primes_of(S):
            c = int(self.weights.get(ell, 0)) % self.ring.q
            out[grp.index(grp.sigma(ell)), 0] += c
            out[0, 0] -= c
        return out % self.ring.q

    def bilinear(self, x: Sequence[int], y: Sequence[int]) -> int:
        return sum(int(x[i]) * int(self.form[i][j]) * int(y[j]) for i in range(self.rank) for j in range(self.rank))

    def value(self, x: Sequence[int], y: Sequence[int], S: int) -> np.ndarray:
        return (self.bilinear(x, y) % self.ring.q * self.t_element(S)) % self.ring.q

    def to_json(self) -> dict:
        return {
            "form": [[str(a) for a in row] for row in self.form],
            "weights": {str(ell): str(c) for ell, c in sorted(self.weights.items())},
        }


@dataclass(frozen=True)
class LatticePair:
    """Bases of A in Lambda and B in Lambda_S (rows are P_i and Q_j)."""

    A: tuple[tuple[int, ...], ...]
    B: tuple[tuple[int, ...], ...]

    @property
    def rank(self) -> int:
        return len(self.A)

    def index_A(self) -> int:
        """[Lambda : A] as the signed determinant of the basis."""
        return int_det(self.A)

    def index_B(self, lam_S: list[list[int]]) -> int:
        """[Lambda_S : B] as the signed determinant of B in Lambda_S coordinates.

        Raises:
            ValueError: if some Q_j is not in Lambda_S.
        """
        coords = []
        for q in self.B:
            c = solve_in_lattice(q, lam_S)
            if c is None:
                raise ValueError(f"{list(q)} is not in Lambda_S")
            coords.append(c)
        return int_det(coords)


def _check_dims(pair: MockPairing, lat: LatticePair) -> None:
    n = pair.rank
    if lat.rank != n or len(lat.B) != n or any(len(r) != n for r in lat.A + lat.B):
        raise DimensionMismatch(f"lattice bases must be {n} x {n}")
    if any(len(r) != n for r in pair.form):
        raise DimensionMismatch("pairing form must be square")


def filtration_for(pair: MockPairing, S: int, depth: int | None = None) -> FiltrationTable:
    depth = max(pair.rank + 1, 2) if depth is None else depth
    return build_filtration(TowerGroup(pair.tower, S, "Gamma"), pair.ring, depth)


def pairing_matrix(pair: MockPairing, lat: LatticePair, S: int, filt: FiltrationTable | None = None) -> list[list[GradedClass]]:
    """R(A, B) = (<P_i, Q_j>_S) as level-1 classes.

    Raises:
        DimensionMismatch: unless all matrices are rho~ x rho~.
    """
    _check_dims(pair, lat)
    filt = filtration_for(pair, S) if filt is None else filt
    return [[GradedClass(1, pair.value(P, Q, S)[None], filt) for Q in lat.B] for P in lat.A]


def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def graded_det(Mx: Sequence[Sequence[GradedClass]], filt: FiltrationTable | None = None) -> GradedClass:
    """Leibniz expansion of the determinant of a matrix of level-1 classes.

    The result has level n; the empty matrix has determinant 1 in level 0
    (``filt`` is then required).

    Raises:
        DepthExceeded: if n exceeds the filtration depth.
        ValueError: if n > 6.
    """
    n = len(Mx)
    if n == 0:
        if filt is None:
            raise ValueError("an empty determinant needs a filtration")
        one = np.zeros((1, filt.group.size, filt.ring.d), dtype=np.int64)
        one[0, 0, 0] = 1
        return GradedClass(0, one, filt)
    if n > MAX_DET_SIZE:
        raise ValueError(f"determinants are limited to {MAX_DET_SIZE} x {MAX_DET_SIZE}")
    if any(len(row) != n for row in Mx):
        raise DimensionMismatch("matrix is not square")
    filt = Mx[0][0].filt
    levels = {c.level for row in Mx for c in row}
    level = sum(Mx[i][0].level for i in range(n)) if len(levels) == 1 else None
    if level is None:
        raise ValueError("entries must share one level")
    if level > filt.depth:
        raise DepthExceeded(f"level {level} beyond depth {filt.depth}")
    ring, group = filt.ring, filt.group
    total = np.zeros((group.size, ring.d), dtype=np.int64)
    for perm in itertools.permutations(range(n)):
        term = Mx[0][perm[0]].rep[0]
        for i in range(1, n):
            term = convolve(ring, group, term, Mx[i][perm[i]].rep[0])
        total = (total + _perm_sign(perm) * term) % ring.q
    return GradedClass(level, total[None], filt)


def _minor(Mx, i: int, j: int):
    return [[Mx[a][b] for b in range(len(Mx)) if b != j] for a in range(len(Mx)) if a != i]


def regulator_AB(pair: MockPairing, lat: LatticePair, S: int, filt: FiltrationTable | None = None) -> GradedClass:
    """Reg(A, B) = sum_{i,j} (-1)^(i+j) (P_i (x) Q_j) (x) det R_ij(A, B).

    The value lies in Lambda (x) Lambda (x) I^(n-1)/I^n; its representative
    has one row per basis tensor e_a (x) e_b (row a * n + b).
    """
    filt = filtration_for(pair, S) if filt is None else filt
    R = pairing_matrix(pair, lat, S, filt)
    n = lat.rank
    q = pair.ring.q
    rep = np.zeros((n * n, filt.group.size, pair.ring.d), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            minor = graded_det(_minor(R, i, j), filt).rep[0]
            sign = -1 if (i + j) % 2 else 1
            outer = np.outer(lat.A[i], lat.B[j]).reshape(-1) % q
            rep = (rep + sign * outer[:, None, None] * minor[None]) % q
    return GradedClass(n - 1, rep, filt)


def _unit_inverse(ring: CoeffRing, value: int, what: str) -> RingElem:
    if value % ring.p == 0:
        raise IndexNotInvertible(f"{what} = {value} is divisible by p = {ring.p}")
    return invert(ring(value))


def regulator_S(
    pair: MockPairing,
    lat: LatticePair,
    local: Mapping[int, LocalData],
    S: int,
    filt: FiltrationTable | None = None,
) -> GradedClass:
    """Reg(S) = Reg(A, B) / ([Lambda : A] [Lambda_S : B]).

    Raises:
        IndexNotInvertible: if p divides either index.
    """
    lam = lambda_S(pair.rank, local, pair.tower.primes_of(S))
    iA = lat.index_A()
    iB = lat.index_B(lam)
    reg = regulator_AB(pair, lat, S, filt)
    inv = _unit_inverse(pair.ring, iA, "[Lambda : A]") * _unit_inverse(pair.ring, iB, "[Lambda_S : B]")
    return reg.scale(inv)


def mu_class(x: GradedClass, tower: TowerSpec, T: int, depth: int | None = None) -> GradedClass:
    """Project a class on Gamma_S to Gamma_T (levels are preserved)."""
    big = x.filt.group
    small = TowerGroup(tower, T, "Gamma")
    amb = x.rep.reshape((x.rep.shape[0],) + big.ambient_shape + (x.rep.shape[-1],))
    for ell in tower.primes_of(big.T // T):
        amb = amb.sum(axis=1 + tower.primes.index(ell), keepdims=True)
    rep = amb.reshape(x.rep.shape[0], small.size, -1) % x.filt.ring.q
    filt = build_filtration(small, x.filt.ring, x.filt.depth if depth is None else depth)
    return GradedClass(x.level, rep, filt)


@dataclass(frozen=True)
class RegulatorCompatibility:
    S: int
    T: int
    b_S: int
    b_T: int
    factor: int
    ok: bool


def regulator_compatibility_check(
    pair: MockPairing,
    lat: LatticePair,
    local: Mapping[int, LocalData],
    S: int,
    T: int,
    lat_T: LatticePair | None = None,
) -> RegulatorCompatibility:
    """mu_{S,T}(|B(S)| Reg(S)) == |B(T)| Reg(T) prod_{l | S/T} (l + 1 - u_l)(l + 1 + u_l).

    ``lat`` supplies the bases at level S; ``lat_T`` those at level T,
    defaulting to the same A and the HNF basis of Lambda_T (index 1).  The
    two sides are computed independently and compared as classes in
    Lambda (x) Lambda (x) I^(n-1)/I^n over Gamma_T.
    """
    if lat_T is None:
        lam_T = lambda_S(pair.rank, local, pair.tower.primes_of(T))
        lat_T = LatticePair(lat.A, tuple(map(tuple, lam_T)))
    tower, ring = pair.tower, pair.ring
    bS = b_order(pair.rank, local, tower.primes_of(S))
    bT = b_order(pair.rank, local, tower.primes_of(T))
    lhs = mu_class(regulator_S(pair, lat, local, S).scale(ring(bS)), tower, T)
    factor = math.prod(local[ell].euler_factor() for ell in tower.primes_of(S // T))
    fT = filtration_for(pair, T)
    rhs = regulator_S(pair, lat_T, local, T, fT).scale(ring(bT * factor))
    lhs = GradedClass(lhs.level, lhs.rep, fT)
    return RegulatorCompatibility(S, T, bS, bT, factor, lhs == rhs)


# ---------------------------------------------------------------------------
# random configurations


@dataclass(frozen=True, eq=False)
class RegulatorConfig:
    """A complete mock configuration: pairing, local data, level and bases."""

    pair: MockPairing
    local: Mapping[int, LocalData]
    S: int
    lattice: LatticePair

    def to_json(self) -> dict:
        from .coeffring import ring_to_json

        return {
            "schema": SCHEMA,
            "kind": "regulator_config",
            "tower": self.pair.tower.to_json(),
            "ring": ring_to_json(self.pair.ring),
            "S": str(self.S),
            "pairing": self.pair.to_json(),
            "local": {
                str(ell): {"u_lift": str(loc.u_lift), "phi": [[str(a) for a in row] for row in loc.phi]}
                for ell, loc in sorted(self.local.items())
            },
            "A": [[str(a) for a in row] for row in self.lattice.A],
            "B": [[str(a) for a in row] for row in self.lattice.B],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "RegulatorConfig":
        from .coeffring import ring_from_json

        try:
            if obj.get("schema") != SCHEMA or obj.get("kind") != "regulator_config":
                raise SchemaError("not a bbreg/1 regulator_config document")
            tower = TowerSpec.from_json(obj["tower"])
            ring = ring_from_json(obj["ring"])
            mat = lambda rows: tuple(tuple(int(a) for a in row) for row in rows)
            pair = MockPairing(
                tower,
                ring,
                mat(obj["pairing"]["form"]),
                {int(k): int(v) for k, v in obj["pairing"]["weights"].items()},
            )
            local = {
                int(k): LocalData(int(k), int(v["u_lift"]), mat(v["phi"])) for k, v in obj["local"].items()
            }
            cfg = cls(pair, local, int(obj["S"]), LatticePair(mat(obj["A"]), mat(obj["B"])))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, SchemaError):
                raise
            raise SchemaError(f"malformed regulator config: {exc}") from exc
        _check_dims(cfg.pair, cfg.lattice)
        return cfg


def _random_unimodular_mod_p(rng: np.random.Generator, n: int, p: int, bound: int = 3) -> list[list[int]]:
    while True:
        M = rng.integers(-bound, bound + 1, size=(n, n)).tolist()
        if int_det(M) % p:
            return M


def random_configuration(
    seed: int,
    tower: TowerSpec,
    ring: CoeffRing,
    rank: int,
    S: int,
    units: Mapping[int, int] | None = None,
) -> RegulatorConfig:
    """A random mock configuration with p-unit indices.

    Args:
        units: optional integer lifts u~_l; random otherwise.
    """
    rng = np.random.default_rng(seed)
    form = tuple(tuple(int(a) for a in row) for row in rng.integers(-4, 5, size=(rank, rank)))
    weights = {ell: int(rng.integers(0, ring.q)) for ell in tower.primes}
    pair = MockPairing(tower, ring, form, weights)
    local = {}
    for ell in tower.primes_of(S):
        u = int(units[ell]) if units and ell in units else int(rng.integers(-2 * ell, 2 * ell + 1))
        if abs(u) == ell + 1:
            u += 1
        phi = tuple(tuple(int(a) for a in row) for row in rng.integers(-3, 4, size=(2, rank)))
        local[ell] = LocalData(ell, u, phi)
    A = _random_unimodular_mod_p(rng, rank, ring.p)
    lam = lambda_S(rank, local, tower.primes_of(S))
    C = _random_unimodular_mod_p(rng, rank, ring.p)
    B = int_matmul(C, lam)
    lat = LatticePair(tuple(map(tuple, A)), tuple(map(tuple, B)))
    return RegulatorConfig(pair, local, S, lat)


# ---------------------------------------------------------------------------
# comparison with the L-function leading term


def _iota_rows(sys, S: int, rank: int) -> np.ndarray:
    """Images of e_i in M_S: the restriction of N * (i-th free generator of M_1)."""
    if rank > sys.rank:
        raise DimensionMismatch(f"rho~ = {rank} exceeds the module rank g = {sys.rank}")
    shape = sys.shape(S)
    out = np.zeros((rank,) + shape, dtype=np.int64)
    for i in range(rank):
        out[i, i] = 1
    return out.reshape(rank, -1, sys.ring.d)[..., 0]


def leading_term_report(
    sys,
    cfg: RegulatorConfig,
    sha_order: int = 1,
    depth: int | None = None,
) -> dict:
    """Compare the leading term of L_S with |Sha| |B(S)| Reg(S).

    ``in_target_level`` records whether L_S lies in M (x) M (x) I^(n-1).
    ``rational_leading_term`` records whether its leading term has module
    legs constant along the group.  ``regulator_match`` and ``c_candidates``
    give the scalars c in R with L~ = c |Sha| |B(S)| Reg(S), where Reg(S) is
    mapped into M_S (x) M_S by e_i -> res(N gen_i).  Purely observational.
    """
    from .thetal import l_function

    pair, S = cfg.pair, cfg.S
    n = pair.rank
    ring = sys.ring
    depth = max(n + 1, 2) if depth is None else depth
    filt = build_filtration(TowerGroup(sys.tower, S, "Gamma"), ring, depth)
    L = l_function(sys, S)
    rows = L.rows()
    order = vanishing_order(rows, filt)
    r = n - 1
    report: dict = {"S": S, "rho_tilde": n, "target_level": r, "order_L": order, "in_target_level": order >= r}
    bS = b_order(n, cfg.local, sys.tower.primes_of(S))
    report["B_S"] = bS
    report["sha"] = sha_order
    if order < r:
        report["rational_leading_term"] = None
        report["regulator_match"] = "not applicable: L is not in the target level"
        return report
    # rational leading term: L[(i, a), (j, b)] - L[(i, 0), (j, 0)] in I^(r+1) and L[(i, 0), (j, 0)] in I^r
    g = sys.rank
    m = sys.module_dim(S) // g
    Lv = L.value.reshape(g, m, g, m, filt.group.size, ring.d)
    base = Lv[:, :1, :, :1]
    diff = (Lv - base).reshape(-1, filt.group.size, ring.d)
    report["rational_leading_term"] = bool(filt.contains(diff, r + 1)) if r + 1 <= depth else None
    # comparison with the regulator
    reg = regulator_S(pair, cfg.lattice, cfg.local, S, filt)
    iota = _iota_rows(sys, S, n)  # (n, dimM)
    nm = iota.shape[1]
    mapped = np.einsum("ai,bj,abgk->ijgk", iota, iota, reg.rep.reshape(n, n, filt.group.size, ring.d))
    target = GradedClass(r, mapped.reshape(nm * nm, filt.group.size, ring.d) % ring.q, filt)
    target = target.scale(ring(sha_order * bS))
    lead = GradedClass(r, rows, filt)
    if r + 1 > depth:
        report["regulator_match"] = "undecidable at this depth"
        return report
    lead_zero = lead.is_zero()
    target_zero = target.is_zero()
    cs = [c for c in ring.elements() if lead == target.scale(c)]
    report["leading_term_zero"] = lead_zero
    report["regulator_side_zero"] = target_zero
    report["c_candidates"] = [str(int(c)) if ring.d == 1 else str(list(c.coeffs)) for c in cs]
    if lead_zero and target_zero:
        report["regulator_match"] = "consistent, c undetermined"
    elif cs:
        report["regulator_match"] = "consistent"
    else:
        report["regulator_match"] = "inconsistent"
    return report
