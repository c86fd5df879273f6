import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from bbreg import localmodel as lm
from bbreg.coeffring import CoeffRing
from bbreg.errors import DivisibilityViolated, NonInvertibleDenominator


def as_lists(fm):
    return [[int(fm.F[i, j, 0]) for j in range(2)] for i in range(2)]


def sieved_cases():
    for ell in (5, 17, 53):
        for p in (3, 5, 7, 13):
            m = 0
            while (ell + 1) % p ** (m + 1) == 0:
                m += 1
            for mm in range(1, m + 1):
                yield ell, p, mm


CASES = list(sieved_cases())


@pytest.mark.parametrize("ell,p,m", CASES)
def test_local_model_at_sieved_primes(ell, p, m):
    q = p**m
    ring = CoeffRing(p, m)
    for a in (0, q, -q, 2 * q):
        fm = lm.build_model(ell, a, 2, ring)
        F = as_lists(fm)
        assert oracles.mat2_mul(F, F, q) == [[1, 0], [0, 1]]
        assert fm.squares_to_one() and not fm.cayley_hamilton().any()
        # F^2 - 1 = 0, so the cokernel is all of R^2
        assert lm.h1f_model(fm).order == q**2
        plus, minus = lm.eigenspace_ranks(fm)
        assert (plus, minus) == (1, 1)
        assert oracles.fixed_count(F, q, 1) == q and oracles.fixed_count(F, q, -1) == q


@settings(max_examples=60, deadline=None)
@given(ell=st.sampled_from([5, 7, 11, 13, 17, 19]), a=st.integers(-50, 50), m=st.integers(1, 2))
def test_model_trace_det_and_h1f_match_enumeration(ell, a, m):
    ring = CoeffRing(3, m)
    q = ring.q
    fm = lm.build_model(ell, a, 2, ring)
    assert fm.trace() == ring(a) and fm.det() == ring(ell)
    assert not fm.cayley_hamilton().any()
    F = as_lists(fm)
    F2 = oracles.mat2_mul(F, F, q)
    rel = [[(F2[i][j] - (i == j)) % q for j in range(2)] for i in range(2)]
    assert lm.h1f_model(fm).order == q * q // oracles.image_size(rel, q)


def test_weight_twelve_trace_for_delta():
    ring = CoeffRing(3, 1)
    fm = lm.build_model(5, 4830, 12, ring)
    assert fm.u == ring(0)
    with pytest.raises(NonInvertibleDenominator):
        lm.build_model(3, 252, 12, CoeffRing(3, 1))
    with pytest.raises(ValueError):
        lm.build_model(5, 0, 3, ring)


def test_eigenspace_ranks_of_diagonal_models():
    ring = CoeffRing(5, 1)
    # trace 0, det -1 gives F = [[0, 1], [1, 0]] with eigenvalues +-1
    fm = lm.FrobeniusModel.from_unit(4, ring(0))
    assert lm.eigenspace_ranks(fm) == (1, 1)
    ident = lm.FrobeniusModel(ring, 4, None, 2, ring(2), ring(1), lm.identity(ring))
    assert lm.eigenspace_ranks(ident) == (2, 0)
    assert lm.h1f_model(ident).order == 25
    with pytest.raises(ValueError):
        lm.eigenspace_ranks(lm.FrobeniusModel.from_unit(6, ring(1)))


def test_generic_model_has_trivial_h1f():
    ring = CoeffRing(3, 2)
    # det(F^2 - 1) = (1 - u + l)(1 + u + l) = 64 for l = 7, u = 0
    fm = lm.build_model(7, 0, 2, ring)
    F = as_lists(fm)
    F2 = oracles.mat2_mul(F, F, 9)
    det = ((F2[0][0] - 1) * (F2[1][1] - 1) - F2[0][1] * F2[1][0]) % 3
    assert det != 0
    assert lm.h1f_model(fm).order == 1


def test_frob_division_examples():
    plus, minus = lm.frob_division(0, 8, 3, 2)
    assert (plus.value, minus.value) == (1, 8) and plus.is_unit and minus.is_unit
    plus, minus = lm.frob_division(9, 8, 3, 2)
    assert (plus.value, minus.value) == (2, 0) and plus.is_unit and not minus.is_unit
    plus, minus = lm.frob_division(18, 26, 3, 2)
    assert (plus.value, minus.value) == (5, 8 % 9) and plus.is_unit and minus.is_unit
    with pytest.raises(DivisibilityViolated):
        lm.frob_division(1, 8, 3, 2)
    with pytest.raises(DivisibilityViolated):
        lm.frob_division(9, 10, 3, 2)


@settings(max_examples=1000, deadline=None)
@given(p=st.sampled_from([3, 5, 7]), m=st.integers(1, 2), s=st.integers(1, 300), t=st.integers(-300, 300))
def test_frob_division_units_match_valuations(p, m, s, t):
    q = p**m
    ell, a = q * s - 1, q * t
    plus, minus = lm.frob_division(a, ell, p, m)
    assert plus.is_unit == (oracles.vp_int((a + ell + 1) // q, p) == 0)
    assert minus.is_unit == (oracles.vp_int((a - ell - 1) // q, p) == 0)
    assert plus.value == ((a + ell + 1) // q) % q


def test_kolyvagin_prime_test():
    assert lm.kolyvagin_prime_test(5, 4830, -7, 11, 3, 1)
    assert not lm.kolyvagin_prime_test(11, 534612, -7, 11, 3, 1)
    assert not lm.kolyvagin_prime_test(7, 0, -163, 1, 3, 1)
    assert not lm.kolyvagin_prime_test(5, 4830, -7, 11, 3, 2)
    assert not lm.kolyvagin_prime_test(5, 1, -7, 11, 3, 1)


def test_matrix_product_over_galois_ring():
    ring = CoeffRing(3, 1, 2)
    rng = np.random.default_rng(0)
    A = rng.integers(0, 3, size=(2, 2, 2))
    B = lm.identity(ring)
    assert np.array_equal(lm.mat_mul(ring, A, B), A)
