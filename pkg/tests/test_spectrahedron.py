import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pinchlab.matrix_core import Tolerance
from pinchlab.spectrahedron import (
    NotInteriorError,
    SignStructure,
    b_sign_structure,
    in_A3_closed_form,
    in_A_direct,
    in_A_recursive,
    in_B_direct,
    sample_A_boundary,
    sample_B2_boundary,
    schur_threshold,
    weight_vector,
)

BAND = Tolerance().equality_band


def reciprocal_sum_oracle(alpha):
    """diag(a) - J >= 0 iff every a_i > 0 and sum(1/a_i) <= 1 (rank-one update)."""
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha <= 0):
        return False, -math.inf
    return bool(np.sum(1 / alpha) <= 1 + 1e-12), 1 - float(np.sum(1 / alpha))


@pytest.mark.parametrize("n", [2, 3, 4, 5, 8])
def test_constant_vector_n_is_member(n):
    v = in_A_direct([n] * n)
    assert v.member
    # sum of 1/n over n entries is exactly 1, so the point sits on the boundary
    assert v.on_boundary


def test_direct_examples():
    v = in_A_direct([2, 2])
    assert v.member and v.on_boundary
    assert not in_A_direct([1, 10]).member


def test_recursive_examples():
    assert in_A_recursive([2, 2]).member
    assert in_A_recursive([2, 3, 6]).member
    assert in_A_recursive([2, 3, 6]).on_boundary
    assert not in_A_recursive([2, 3, 5.99]).member
    assert in_A_recursive([2, 3, 6.01]).member


def test_schur_threshold_2_3_is_6():
    # 1/2 + 1/3 + 1/6 = 1
    assert schur_threshold([2, 3]) == pytest.approx(6, rel=1e-14)


def test_closed_form_examples():
    v = in_A3_closed_form([3, 3, 3])
    assert v.member and v.on_boundary and v.certificate == pytest.approx(0, abs=1e-12)
    v = in_A3_closed_form([2, 3, 6])
    assert v.member and v.on_boundary
    for x in [0.0, 2.0, 100.0, 1e6]:
        assert not in_A3_closed_form([2, 1.5, x]).member
    with pytest.raises(ValueError):
        in_A3_closed_form([2, 2])


def test_boundary_points_have_zero_eigenvalue():
    assert abs(in_A_direct([3, 3, 3]).certificate) <= 1e-12
    assert abs(in_A_direct([2, 3, 6]).certificate) <= 1e-12


def test_B_examples():
    assert in_B_direct([0, 0]).member
    v = in_B_direct([-1, 0.5])
    assert v.member and v.on_boundary
    assert not in_B_direct([0.5, 0.5]).member


def test_sign_structure_examples():
    assert b_sign_structure([-1, -2, 0]) is SignStructure.ALL_NONPOSITIVE
    assert b_sign_structure([0.5, -3]) is SignStructure.ONE_POSITIVE
    assert b_sign_structure([0.5, 0.5]) is SignStructure.VIOLATING
    assert b_sign_structure([0.5, 0.0]) is SignStructure.VIOLATING


@pytest.mark.parametrize("t", [0.1, 0.5, 1.0, 2.0, 7.0])
def test_sample_A_boundary_two_dimensional(t):
    out = sample_A_boundary(2, [1 + t])
    np.testing.assert_allclose(out, [1 + t, 1 + 1 / t], rtol=1e-14)


def test_sample_A_boundary_prefix_examples():
    np.testing.assert_allclose(sample_A_boundary(3, [2, 3]), [2, 3, 6], rtol=1e-14)
    np.testing.assert_allclose(sample_A_boundary(2, [2]), [2, 2], rtol=1e-14)


def test_sample_A_boundary_rejects_non_interior():
    with pytest.raises(NotInteriorError):
        sample_A_boundary(3, [2, 2])
    with pytest.raises(NotInteriorError):
        sample_A_boundary(2, [1.0])


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_sample_A_boundary_random_is_tight(n):
    for seed in range(20):
        alpha = sample_A_boundary(n, rng_seed=seed)
        v = in_A_direct(alpha)
        assert v.member and v.on_boundary
        assert abs(v.certificate) <= BAND
        assert reciprocal_sum_oracle(alpha)[1] == pytest.approx(0, abs=1e-12)


def test_sample_A_boundary_seed_determinism():
    np.testing.assert_array_equal(sample_A_boundary(4, rng_seed=9), sample_A_boundary(4, rng_seed=9))


def test_sample_B2_boundary_examples():
    np.testing.assert_allclose(sample_B2_boundary(1), [0, 0])
    np.testing.assert_allclose(sample_B2_boundary(0.5), [0.5, -1])
    np.testing.assert_allclose(sample_B2_boundary(4), [-3, 0.75])
    for t in [0.5, 1, 4]:
        v = in_B_direct(sample_B2_boundary(t))
        assert v.member and v.on_boundary
    with pytest.raises(ValueError):
        sample_B2_boundary(0)


def test_weight_vector_validation():
    with pytest.raises(ValueError):
        weight_vector([1.0])
    with pytest.raises(ValueError):
        weight_vector([1.0, np.nan])


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_direct_and_recursive_match_oracle(n, rng):
    for _ in range(2000):
        alpha = rng.uniform(0.5, 2 * n, size=n)
        expected, margin = reciprocal_sum_oracle(alpha)
        direct = in_A_direct(alpha)
        if abs(direct.certificate) <= BAND:
            continue
        assert direct.member == expected
        rec = in_A_recursive(alpha)
        assert not rec.indeterminate
        assert rec.member == expected
        if n == 3:
            assert in_A3_closed_form(alpha).member == expected


def test_recursive_indeterminate_on_boundary_prefix():
    v = in_A_recursive([2, 2, 50])
    assert v.indeterminate and not v.member
    assert not in_A_direct([2, 2, 50]).member


def test_members_have_all_weights_above_one(rng):
    seen = 0
    for _ in range(3000):
        n = int(rng.integers(2, 6))
        alpha = rng.uniform(-1, 2 * n, size=n)
        if in_A_direct(alpha).member:
            seen += 1
            assert np.all(alpha > 1)
    assert seen > 100


def test_B_members_have_admissible_sign_structure(rng):
    seen = 0
    for _ in range(5000):
        n = int(rng.integers(2, 6))
        beta = rng.uniform(-3, 1.2, size=n)
        if in_B_direct(beta).member:
            seen += 1
            assert b_sign_structure(beta) is not SignStructure.VIOLATING
            assert np.all(beta < 1)
    assert seen > 100


@settings(max_examples=200, deadline=None)
@given(
    st.integers(2, 5).flatmap(
        lambda n: st.tuples(
            st.integers(0, 2**32 - 1),
            st.lists(st.floats(0, 5), min_size=n, max_size=n),
            st.just(n),
        )
    )
)
def test_upward_closed(data):
    seed, bump, n = data
    alpha = sample_A_boundary(n, rng_seed=seed)
    assert in_A_direct(alpha + np.array(bump)).member


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**32 - 1), st.integers(0, 2**32 - 1), st.floats(0, 1))
def test_convex_combinations_stay_inside(n, s1, s2, lam):
    a = sample_A_boundary(n, rng_seed=s1)
    b = sample_A_boundary(n, rng_seed=s2)
    assert in_A_direct(lam * a + (1 - lam) * b).member
    ta, tb = 10 ** ((s1 % 400) / 100 - 2), 10 ** ((s2 % 400) / 100 - 2)
    assert in_B_direct(lam * sample_B2_boundary(ta) + (1 - lam) * sample_B2_boundary(tb)).member


def test_verdict_json_keys():
    doc = in_A_direct([2, 2]).to_json()
    assert {"member", "on_boundary", "certificate"} <= set(doc)
