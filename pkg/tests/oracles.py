"""Independent reference computations used as test oracles.

Nothing in this file imports the package.  Inputs and outputs are plain
integers, tuples and numpy arrays, and every routine is written from the
defining formula rather than from the package's algorithms.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np

# ---------------------------------------------------------------------------
# primes, characters and the sieve


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def primes_upto(bound: int) -> list[int]:
    return [n for n in range(2, bound + 1) if is_prime(n)]


def is_inert(D: int, ell: int) -> bool:
    """l inert in Q(sqrt(D)): D is a non-square unit mod l (D = 5 mod 8 for l = 2)."""
    if ell == 2:
        return D % 8 == 5
    if D % ell == 0:
        return False
    squares = {x * x % ell for x in range(1, ell)}
    return D % ell not in squares


def sieve_oracle(D: int, N: int, p: int, m: int, bound: int) -> list[int]:
    q = p**m
    return [ell for ell in primes_upto(bound) if N % ell and (ell + 1) % q == 0 and is_inert(D, ell)]


# ---------------------------------------------------------------------------
# Ramanujan tau by the divisor-sum recursion


def sigma1(n: int) -> int:
    return sum(d for d in range(1, n + 1) if n % d == 0)


def tau_oracle(n_max: int) -> list[int]:
    """tau(0..n_max) from (n - 1) tau(n) = -24 sum_{k=1}^{n-1} sigma(k) tau(n - k)."""
    sig = [0] + [0] * n_max
    for d in range(1, n_max + 1):
        for k in range(d, n_max + 1, d):
            sig[k] += d
    tau = [0, 1] + [0] * (n_max - 1)
    for n in range(2, n_max + 1):
        s = sum(sig[k] * tau[n - k] for k in range(1, n))
        assert (-24 * s) % (n - 1) == 0
        tau[n] = -24 * s // (n - 1)
    return tau[: n_max + 1]


# ---------------------------------------------------------------------------
# span membership over Z/p^k (pivot on minimal valuation, keep annihilator rows)


def _vals(x: np.ndarray, p: int, k: int) -> np.ndarray:
    out = np.zeros(x.shape, dtype=np.int64)
    y = x.copy()
    for _ in range(k):
        div = (y % p == 0) & (out < k)
        out += div
        y = np.where(div, y // p, y)
    return np.where(x == 0, k, out)


def span_basis(rows: np.ndarray, p: int, k: int) -> list[tuple[int, int, np.ndarray]]:
    """Echelon data (column, pivot valuation, row) spanning the Z/p^k row span."""
    q = p**k
    A = np.asarray(rows, dtype=np.int64) % q
    A = A[A.any(axis=1)]
    basis = []
    for col in range(A.shape[1] if A.ndim == 2 else 0):
        if A.shape[0] == 0:
            break
        v = _vals(A[:, col], p, k)
        i = int(np.argmin(v))
        t = int(v[i])
        if t >= k:
            continue
        unit = int(A[i, col]) // p**t
        piv = (A[i] * pow(unit, -1, q)) % q
        rest = np.delete(A, i, axis=0)
        factor = rest[:, col] // p**t
        rest = (rest - factor[:, None] * piv[None]) % q
        if t:
            rest = np.vstack([rest, (piv * p ** (k - t)) % q])
        rest = rest[rest.any(axis=1)]
        basis.append((col, t, piv))
        A = rest
    return basis


def in_span(basis, v: np.ndarray, p: int, k: int) -> bool:
    q = p**k
    v = np.asarray(v, dtype=np.int64) % q
    for col, t, piv in basis:
        e = int(v[col])
        if e % p**t:
            return False
        if e:
            v = (v - (e // p**t) * piv) % q
    return not v.any()


# ---------------------------------------------------------------------------
# group rings of finite abelian groups prod Z/n_i in lexicographic order


def sigma_minus_one_power(n: int, k: int) -> np.ndarray:
    """(sigma - 1)^k in Z[Z/n] as integer coefficients on sigma^0..sigma^(n-1)."""
    out = np.zeros(n, dtype=object)
    for j in range(k + 1):
        out[j % n] += math.comb(k, j) * (-1) ** (k - j)
    return out


def derivative_vector(n: int, k: int) -> list[int]:
    """D^k = sum_i C(i, k) sigma^i in Z[Z/n]."""
    return [math.comb(i, k) for i in range(n)]


def monomial(orders: tuple[int, ...], ks: tuple[int, ...]) -> np.ndarray:
    """prod_i (sigma_i - 1)^{k_i} as an integer array of shape ``orders``."""
    out = np.ones((), dtype=object)
    for n, k in zip(orders, ks):
        out = np.multiply.outer(out, sigma_minus_one_power(n, k))
    return out


@lru_cache(maxsize=128)
def augmentation_power_basis(orders: tuple[int, ...], r: int, p: int, k: int):
    """Echelon data for I^r in (Z/p^k)[prod Z/n_i] from the translates g (sigma - 1)^kappa, |kappa| = r."""
    q = p**k
    size = math.prod(orders)
    if r == 0:
        return span_basis(np.eye(size, dtype=np.int64), p, k)
    rows = []
    for ks in itertools.product(*[range(r + 1)] * len(orders)):
        if sum(ks) != r:
            continue
        mono = np.array(monomial(orders, ks), dtype=object) % q
        mono = mono.astype(np.int64)
        for g in itertools.product(*[range(n) for n in orders]):
            rows.append(np.roll(mono, g, axis=tuple(range(len(orders)))).reshape(-1))
    return span_basis(np.array(rows, dtype=np.int64), p, k)


def in_augmentation_power(vecs: np.ndarray, orders: tuple[int, ...], r: int, p: int, k: int) -> bool:
    """Every row of ``vecs`` (shape (rows, |G|) or (rows, |G|, d)) lies in I^r, coefficient-wise."""
    vecs = np.asarray(vecs, dtype=np.int64)
    if vecs.ndim == 3:
        vecs = vecs.transpose(0, 2, 1).reshape(-1, vecs.shape[1])
    if r <= 0:
        return True
    basis = augmentation_power_basis(tuple(orders), r, p, k)
    return all(in_span(basis, v, p, k) for v in vecs if v.any())


def group_ring_mul(a: dict, b: dict, orders: tuple[int, ...], q: int) -> dict:
    out: dict = {}
    for g, x in a.items():
        for h, y in b.items():
            key = tuple((i + j) % n for i, j, n in zip(g, h, orders))
            out[key] = (out.get(key, 0) + x * y) % q
    return {g: c for g, c in out.items() if c}


def dict_to_dense(x: dict, orders: tuple[int, ...]) -> np.ndarray:
    out = np.zeros(orders if orders else (1,), dtype=np.int64)
    for g, c in x.items():
        out[g if orders else 0] += c
    return out.reshape(-1)


# ---------------------------------------------------------------------------
# Taylor reconstruction


def resolvent_box(m: np.ndarray, orders: tuple[int, ...], axes: tuple[int, ...], q: int) -> np.ndarray:
    """theta[j] = sigma^j (m): translate m by j along ``axes``; result box + m.shape."""
    out = np.zeros(tuple(orders) + m.shape, dtype=np.int64)
    for j in itertools.product(*[range(n) for n in orders]):
        out[j] = np.roll(m, j, axis=axes) % q
    return out


def taylor_reconstruct(coeffs: np.ndarray, orders: tuple[int, ...], q: int) -> np.ndarray:
    """sum_kappa c_kappa (x) prod (sigma_i - 1)^{k_i} in group coordinates (box + module)."""
    out = np.asarray(coeffs, dtype=np.int64) % q
    for axis, n in enumerate(orders):
        P = np.zeros((n, n), dtype=np.int64)  # P[j, k] = coefficient of sigma^j in (sigma - 1)^k
        for kk in range(n):
            P[:, kk] = np.array(sigma_minus_one_power(n, kk), dtype=object).astype(np.int64) % q
        out = np.moveaxis(np.tensordot(P, out, axes=([1], [axis])), 0, axis) % q
    return out


def derivative_by_definition(m: np.ndarray, orders, axes, kappa, q: int) -> np.ndarray:
    """D_kappa(m) = sum_j prod C(j_i, k_i) sigma^j (m)."""
    out = np.zeros_like(m)
    for j in itertools.product(*[range(n) for n in orders]):
        c = math.prod(math.comb(ji, ki) for ji, ki in zip(j, kappa)) % q
        if c:
            out = (out + c * np.roll(m, j, axis=axes)) % q
    return out


# ---------------------------------------------------------------------------
# L-function of a rank-one system over Z/q with trivial Gamma_1


def _primes_of(tower_primes, T):
    return [ell for ell in tower_primes if T % ell == 0]


def _mu(T: int, tower_primes) -> int:
    return (-1) ** len(_primes_of(tower_primes, T))


def l_function_oracle(levels: dict, tower_primes: tuple[int, ...], S: int, q: int, chi) -> dict:
    """L_S as {group exponent tuple: (n, n) array}, module coordinates in C order.

    ``levels[T]`` is y_T as an integer array over the full ambient shape
    (size l + 1 on the axes of primes dividing T, size 1 otherwise).
    """
    shape_S = tuple(ell + 1 if S % ell == 0 else 1 for ell in tower_primes)
    n = math.prod(shape_S)
    axes = tuple(range(len(tower_primes)))
    X: dict = {}
    Y: dict = {}
    for T in _divisors(tower_primes, S):
        y = np.asarray(levels[T], dtype=np.int64)
        # restriction to level S: constant along the new axes
        yS = np.broadcast_to(y, shape_S)
        shape_T = y.shape
        fibre = [range(ell + 1) if (S // T) % ell == 0 else range(1) for ell in tower_primes]
        a = _mu(T, tower_primes)
        astar = chi(T) * a
        for g in itertools.product(*[range(s) for s in shape_T]):
            vec = np.roll(yS, g, axis=axes).reshape(-1) % q
            ginv = tuple((-x) % s for x, s in zip(g, shape_S))
            for tau in itertools.product(*fibre):
                h = tuple((x + t) % s for x, t, s in zip(g, tau, shape_S))
                X[h] = (X.get(h, 0) + a * vec) % q
                hs = tuple((x + t) % s for x, t, s in zip(ginv, tau, shape_S))
                Y[hs] = (Y.get(hs, 0) + astar * vec) % q
    L: dict = {}
    for g, x in X.items():
        for h, y in Y.items():
            key = tuple((i + j) % s for i, j, s in zip(g, h, shape_S))
            L[key] = (L.get(key, np.zeros((n, n), dtype=np.int64)) + np.outer(x, y)) % q
    return {k: v for k, v in L.items() if v.any()}


def _divisors(tower_primes, S):
    ps = _primes_of(tower_primes, S)
    out = []
    for k in range(len(ps) + 1):
        for c in itertools.combinations(ps, k):
            out.append(math.prod(c))
    return sorted(out)


def project_group(L: dict, tower_primes, S: int, T: int, q: int) -> dict:
    """Send the generators of primes dividing S / T to 1 in the group leg."""
    out: dict = {}
    for g, v in L.items():
        key = tuple(0 if (S // T) % ell == 0 else x for x, ell in zip(g, tower_primes))
        out[key] = (out.get(key, 0) + v) % q
    return {k: v for k, v in out.items() if np.any(v)}


def restrict_legs(L: dict, tower_primes, T: int, S: int) -> dict:
    """Restrict both module legs of L from level T to level S (broadcast)."""
    shape_T = tuple(ell + 1 if T % ell == 0 else 1 for ell in tower_primes)
    shape_S = tuple(ell + 1 if S % ell == 0 else 1 for ell in tower_primes)
    k = len(tower_primes)
    out = {}
    for g, v in L.items():
        arr = v.reshape(shape_T + shape_T)
        arr = np.broadcast_to(arr, shape_S + shape_S)
        out[g] = arr.reshape(math.prod(shape_S), math.prod(shape_S)).copy()
    assert k == len(shape_S)
    return out


# ---------------------------------------------------------------------------
# regulators of the scalar pairing x^T G y t_S


def int_det(M) -> int:
    """Determinant by Laplace expansion (small integer matrices)."""
    n = len(M)
    if n == 0:
        return 1
    if n == 1:
        return int(M[0][0])
    return sum((-1) ** j * int(M[0][j]) * int_det([row[:j] + row[j + 1:] for row in M[1:]]) for j in range(n))


def cofactor_matrix(M) -> list[list[int]]:
    n = len(M)
    M = [list(map(int, row)) for row in M]
    return [
        [(-1) ** (i + j) * int_det([r[:j] + r[j + 1:] for a, r in enumerate(M) if a != i]) for j in range(n)]
        for i in range(n)
    ]


def _column_lattice_reducer(M):
    """Canonical reduction of Z^2 modulo the column span of a nonsingular 2 x 2 matrix."""
    (m00, m01), (m10, m11) = M
    det = m00 * m11 - m01 * m10
    g, s, t = _xgcd(m00, m01)
    a = abs(g)
    sign = 1 if g > 0 else -1
    b0 = sign * (s * m10 + t * m11)
    d = abs(det) // a

    def reduce(v):
        x, y = v
        k = x // a
        x -= k * a
        y -= k * b0
        return (x, y % d)

    return reduce, abs(det)


def _xgcd(a: int, b: int):
    old_r, r, old_s, s, old_t, t = a, b, 1, 0, 0, 1
    while r:
        qq = old_r // r
        old_r, r = r, old_r - qq * r
        old_s, s = s, old_s - qq * s
        old_t, t = t, old_t - qq * t
    return old_r, old_s, old_t


def relation_matrix(ell: int, u: int):
    F = [[0, -ell], [1, u]]
    F2 = [[sum(F[i][k] * F[k][j] for k in range(2)) for j in range(2)] for i in range(2)]
    return [[F2[i][j] - (i == j) for j in range(2)] for i in range(2)]


def lattice_index_bruteforce(rank: int, local: dict, primes) -> int:
    """[Z^n : Lambda_S] as the size of the image of Z^n in sum_l Z^2 / M_l Z^2."""
    reducers = []
    for ell in primes:
        u, phi = local[ell]
        red, _ = _column_lattice_reducer(relation_matrix(ell, u))
        reducers.append((red, phi))

    def image(i):
        return tuple(red((phi[0][i], phi[1][i])) for red, phi in reducers)

    def add(x, y):
        return tuple(red((a[0] + b[0], a[1] + b[1])) for (red, _), a, b in zip(reducers, x, y))

    zero = tuple((0, 0) for _ in reducers)
    subgroup = {zero}
    for i in range(rank):
        g = image(i)
        multiples = [zero]
        cur = g
        while cur not in subgroup:
            multiples.append(cur)
            cur = add(cur, g)
        if len(multiples) > 1:
            subgroup = {add(s, m) for s in subgroup for m in multiples}
    return len(subgroup)


def local_order(local: dict, primes) -> int:
    return math.prod(int_det(relation_matrix(ell, local[ell][0])) for ell in primes)


def t_element(weights: dict, tower_primes, S: int) -> dict:
    """t_S = sum_{l | S} c_l (sigma_l - 1) as {exponent tuple: coeff} over Gamma_S."""
    k = len(tower_primes)
    out: dict = {}
    for i, ell in enumerate(tower_primes):
        if S % ell:
            continue
        c = weights.get(ell, 0)
        e = [0] * k
        e[i] = 1
        out[tuple(e)] = out.get(tuple(e), 0) + c
        out[(0,) * k] = out.get((0,) * k, 0) - c
    return out


def regulator_oracle(form, weights, local, tower_primes, S: int, q: int) -> tuple[list[list[int]], dict, int]:
    """Reg(S) for the scalar pairing as (integer tensor Z, group element t_S^(n-1), index).

    For <x, y> = (x^T G y) t_S every entry of the pairing matrix is a multiple
    of t_S, and the cofactor identity A^T Cof(A G B^T) B = det A det B Cof(G)
    turns Reg(A, B) / ([Lambda : A][Lambda_S : B]) into [Z^n : Lambda_S] Cof(G) t_S^(n-1).
    """
    n = len(form)
    primes = _primes_of(tower_primes, S)
    idx = lattice_index_bruteforce(n, local, primes)
    cof = cofactor_matrix([list(r) for r in form]) if n > 1 else [[1]]
    orders = tuple(ell + 1 if S % ell == 0 else 1 for ell in tower_primes)
    t = {g: c % q for g, c in t_element(weights, tower_primes, S).items()}
    power = {(0,) * len(tower_primes): 1}
    for _ in range(n - 1):
        power = group_ring_mul(power, t, orders, q)
    return cof, power, idx


def regulator_rep(cof, power, scale: int, tower_primes, S: int, q: int) -> np.ndarray:
    """Dense (n*n, |Gamma_S|) representative of scale * Cof(G) * t^(n-1)."""
    orders = tuple(ell + 1 if S % ell == 0 else 1 for ell in tower_primes)
    dense = dict_to_dense(power, orders)
    n = len(cof)
    return np.array([(scale * cof[a][b] * dense) % q for a in range(n) for b in range(n)], dtype=np.int64)


# ---------------------------------------------------------------------------
# 2 x 2 Frobenius matrices over Z/q by enumeration


def mat2_mul(A, B, q):
    return [[sum(A[i][k] * B[k][j] for k in range(2)) % q for j in range(2)] for i in range(2)]


def image_size(M, q) -> int:
    return len({((M[0][0] * x + M[0][1] * y) % q, (M[1][0] * x + M[1][1] * y) % q) for x in range(q) for y in range(q)})


def fixed_count(M, q, sign: int) -> int:
    """|{v in (Z/q)^2 : M v = sign v}|."""
    return sum(
        1
        for x in range(q)
        for y in range(q)
        if ((M[0][0] * x + M[0][1] * y - sign * x) % q, (M[1][0] * x + M[1][1] * y - sign * y) % q) == (0, 0)
    )


def vp_int(n: int, p: int) -> float:
    if n == 0:
        return math.inf
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v
