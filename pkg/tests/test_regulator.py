import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from bbreg import mockeuler as me
from bbreg import regulator as rg
from bbreg.coeffring import CoeffRing
from bbreg.errors import DimensionMismatch, IndexNotInvertible, SchemaError
from bbreg.groupring import GradedClass, build_filtration, convolve
from bbreg.groups import TowerGroup, TowerSpec

DATA = Path(rg.__file__).parent / "data"
TOWER = TowerSpec(-163, (5, 11))
Z9 = CoeffRing(3, 2)
CONFIG_SEEDS = range(25)


def config(seed):
    return rg.random_configuration(seed, TOWER, Z9, 1 + seed % 3, 55)


def oracle_local(cfg):
    return {ell: (loc.u_lift, [list(r) for r in loc.phi]) for ell, loc in cfg.local.items()}


matrices = st.integers(1, 5).flatmap(
    lambda n: st.lists(st.lists(st.integers(-20, 20), min_size=n, max_size=n), min_size=n, max_size=n)
)


@settings(max_examples=200, deadline=None)
@given(M=matrices)
def test_int_det_matches_laplace(M):
    assert rg.int_det(M) == oracles.int_det(M)


@settings(max_examples=100, deadline=None)
@given(M=matrices)
def test_hnf_preserves_the_row_lattice(M):
    H = rg.hnf_rows(M, len(M))
    det = oracles.int_det(M)
    if det:
        assert len(H) == len(M) and rg.int_det(H) == abs(det)
        # every original row has integer coordinates in the echelon basis
        assert all(rg.solve_in_lattice(row, H) is not None for row in M)
    else:
        assert len(H) < len(M)


def test_int_kernel():
    A = [[1, 2, 3], [2, 4, 6]]
    ker = rg.int_kernel(A, 3)
    assert len(ker) == 2
    assert all(rg.int_matmul(A, [[x] for x in v]) == [[0], [0]] for v in ker)


@pytest.mark.parametrize("seed", CONFIG_SEEDS)
def test_lattice_index_and_cokernel_order(seed):
    cfg = config(seed)
    n = cfg.pair.rank
    loc = oracle_local(cfg)
    for S in (5, 11, 55):
        primes = TOWER.primes_of(S)
        idx = oracles.lattice_index_bruteforce(n, loc, primes)
        assert rg.int_det(rg.lambda_S(n, cfg.local, primes)) == idx
        b = rg.b_order(n, cfg.local, primes)
        assert b * idx == oracles.local_order(loc, primes)
        assert abs(b) == rg.b_cokernel_order(n, cfg.local, primes)
    assert rg.b_order(n, cfg.local, ()) == 1


def test_local_data():
    loc = rg.LocalData(5, 2, ((1,), (0,)))
    assert loc.relations == oracles.relation_matrix(5, 2)
    assert loc.det == loc.euler_factor() == (6 - 2) * (6 + 2)


def _filt(S, depth=4):
    return build_filtration(TowerGroup(TOWER, S, "Gamma"), Z9, depth)


def _level_one(rng, filt):
    """A random element of I as a level-1 class: a sum of c (g - 1)."""
    size = filt.group.size
    rep = np.zeros((size, 1), dtype=np.int64)
    for _ in range(3):
        g = int(rng.integers(1, size))
        c = int(rng.integers(0, 9))
        rep[g, 0] += c
        rep[0, 0] -= c
    return GradedClass(1, (rep % 9)[None], filt)


def _product_of_two(rng, filt):
    a, b = _level_one(rng, filt), _level_one(rng, filt)
    return convolve(Z9, filt.group, a.rep[0], b.rep[0])


@pytest.mark.parametrize("n", [1, 2, 3])
def test_graded_det_is_alternating_and_multilinear(n):
    rng = np.random.default_rng(n)
    filt = _filt(55)
    for _ in range(5):
        M = [[_level_one(rng, filt) for _ in range(n)] for _ in range(n)]
        det = rg.graded_det(M)
        assert det.level == n
        if n == 1:
            assert det == M[0][0]
            continue
        for i in range(n):
            for j in range(i + 1, n):
                dup = [list(r) for r in M]
                dup[j] = dup[i]
                assert rg.graded_det(dup).is_zero()
                swapped = [list(r) for r in M]
                swapped[i], swapped[j] = swapped[j], swapped[i]
                assert rg.graded_det(swapped) == det.scale(Z9(-1))
        extra = [_level_one(rng, filt) for _ in range(n)]
        summed = [list(r) for r in M]
        summed[0] = [GradedClass(1, (a.rep + b.rep) % 9, filt) for a, b in zip(M[0], extra)]
        other = [list(r) for r in M]
        other[0] = extra
        assert rg.graded_det(summed) == det + rg.graded_det(other)
        transposed = [[M[j][i] for j in range(n)] for i in range(n)]
        assert rg.graded_det(transposed) == det


def test_graded_det_edge_cases():
    filt = _filt(55)
    one = rg.graded_det([], filt)
    assert one.level == 0 and not one.is_zero()
    with pytest.raises(ValueError):
        rg.graded_det([])
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        rg.graded_det([[_level_one(rng, filt)] * 7 for _ in range(7)])


def test_graded_det_ignores_representatives():
    rng = np.random.default_rng(7)
    filt = _filt(55)
    for n in (2, 3):
        M = [[_level_one(rng, filt) for _ in range(n)] for _ in range(n)]
        det = rg.graded_det(M)
        for _ in range(20):
            moved = [
                [GradedClass(1, (c.rep + _product_of_two(rng, filt)[None]) % 9, filt) for c in row] for row in M
            ]
            assert rg.graded_det(moved) == det


@pytest.mark.parametrize("seed", CONFIG_SEEDS)
def test_regulator_matches_closed_form(seed):
    cfg = config(seed)
    pair = cfg.pair
    filt = rg.filtration_for(pair, 55)
    reg = rg.regulator_S(pair, cfg.lattice, cfg.local, 55, filt)
    cof, power, idx = oracles.regulator_oracle(pair.form, pair.weights, oracle_local(cfg), TOWER.primes, 55, 9)
    want = oracles.regulator_rep(cof, power, idx, TOWER.primes, 55, 9)
    assert reg.level == pair.rank - 1
    assert reg == GradedClass(pair.rank - 1, want[..., None], filt)


@pytest.mark.parametrize("seed", CONFIG_SEEDS)
def test_regulator_compatibility(seed):
    cfg = config(seed)
    for T in (1, 5, 11, 55):
        res = rg.regulator_compatibility_check(cfg.pair, cfg.lattice, cfg.local, 55, T)
        assert res.ok
        want = 1
        for ell in TOWER.primes_of(55 // T):
            u = cfg.local[ell].u_lift
            want *= (ell + 1 - u) * (ell + 1 + u)
        assert res.factor == want


def test_compatibility_with_level_t_bases():
    cfg = config(4)
    n = cfg.pair.rank
    lam5 = rg.lambda_S(n, cfg.local, (5,))
    C = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    C[0][0] = 2
    lat_T = rg.LatticePair(cfg.lattice.A, tuple(map(tuple, rg.int_matmul(C, lam5))))
    assert rg.regulator_compatibility_check(cfg.pair, cfg.lattice, cfg.local, 55, 5, lat_T).ok


def test_index_not_invertible():
    cfg = config(2)
    n = cfg.pair.rank
    A = [list(r) for r in cfg.lattice.A]
    A[0] = [3 * a for a in A[0]]
    lat = rg.LatticePair(tuple(map(tuple, A)), cfg.lattice.B)
    with pytest.raises(IndexNotInvertible):
        rg.regulator_S(cfg.pair, lat, cfg.local, 55)
    B = [list(r) for r in cfg.lattice.B]
    B[-1] = [3 * b for b in B[-1]]
    with pytest.raises(IndexNotInvertible):
        rg.regulator_S(cfg.pair, rg.LatticePair(cfg.lattice.A, tuple(map(tuple, B))), cfg.local, 55)
    assert n == 3


def test_b_not_in_lambda_s():
    cfg = rg.RegulatorConfig.from_json(json.loads((DATA / "regulator_rank1.json").read_text()))
    lat = rg.LatticePair(cfg.lattice.A, ((1,),))
    with pytest.raises(ValueError):
        rg.regulator_S(cfg.pair, lat, cfg.local, 55)


def test_dimension_checks():
    cfg = config(1)
    bad = rg.LatticePair(cfg.lattice.A[:1], cfg.lattice.B)
    with pytest.raises(DimensionMismatch):
        rg.pairing_matrix(cfg.pair, bad, 55)


@pytest.mark.parametrize("name", ["regulator_rank1.json", "regulator_demo.json"])
def test_config_json_round_trip(name):
    doc = json.loads((DATA / name).read_text())
    cfg = rg.RegulatorConfig.from_json(doc)
    assert cfg.to_json() == doc
    with pytest.raises(SchemaError):
        rg.RegulatorConfig.from_json({**doc, "kind": "other"})
    with pytest.raises(SchemaError):
        rg.RegulatorConfig.from_json({k: v for k, v in doc.items() if k != "local"})
    broken = {**doc, "A": [["1", "0"]]}
    with pytest.raises(DimensionMismatch):
        rg.RegulatorConfig.from_json(broken)


def test_random_configuration_round_trip():
    cfg = config(5)
    back = rg.RegulatorConfig.from_json(json.loads(json.dumps(cfg.to_json())))
    assert back.to_json() == cfg.to_json()
    assert rg.regulator_S(back.pair, back.lattice, back.local, 55) == rg.regulator_S(
        cfg.pair, cfg.lattice, cfg.local, 55
    )


def test_rank_one_regulator_is_the_index():
    cfg = rg.RegulatorConfig.from_json(json.loads((DATA / "regulator_rank1.json").read_text()))
    reg = rg.regulator_S(cfg.pair, cfg.lattice, cfg.local, 55)
    idx = oracles.lattice_index_bruteforce(1, oracle_local(cfg), (5, 11))
    assert idx % 3
    assert reg.level == 0 and reg.rep[0, 0, 0] == idx % 9
    assert not reg.rep[0, 1:].any()


def test_leading_term_report():
    sys = me.MockEulerSystem.from_json(json.loads((DATA / "demo_system.json").read_text()))
    cfg = rg.RegulatorConfig.from_json(json.loads((DATA / "regulator_rank1.json").read_text()))
    rep = rg.leading_term_report(sys, cfg)
    assert rep["target_level"] == 0 and rep["in_target_level"]
    assert rep["B_S"] == rg.b_order(1, cfg.local, (5, 11))
    assert rep["regulator_match"] in {"consistent", "consistent, c undetermined", "inconsistent"}
    if rep["regulator_match"] == "consistent":
        assert rep["c_candidates"]
    big = rg.RegulatorConfig.from_json(json.loads((DATA / "regulator_demo.json").read_text()))
    with pytest.raises(DimensionMismatch):
        rg.leading_term_report(sys, big)


def test_mu_class_sums_fibres():
    filt = _filt(55)
    rng = np.random.default_rng(2)
    x = _level_one(rng, filt)
    down = rg.mu_class(x, TOWER, 5)
    want = x.rep.reshape(1, 6, 12, 1).sum(axis=2) % 9
    assert np.array_equal(down.rep, want.reshape(1, 6, 1))
