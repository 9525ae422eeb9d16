from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crosscal.exterior import (
    AlternatingTensor,
    ComplexAlternatingTensor,
    ExteriorError,
    dx,
    evaluate,
    hodge_star,
    inner,
    interior,
    interior_vectors,
    norm,
    restrict,
    sort_with_sign,
    volume_form,
    wedge,
)

G2_TERMS = {(0, 1, 2): 1, (0, 5, 6): -1, (0, 3, 4): 1, (1, 4, 6): 1,
            (1, 3, 5): 1, (2, 4, 5): -1, (2, 3, 6): 1}


def g2():
    return AlternatingTensor(7, 3, G2_TERMS)


def perm_sign_det(seq):
    # oracle: determinant of the permutation matrix
    order = np.argsort(seq, kind="stable")
    return int(round(np.linalg.det(np.eye(len(seq))[order])))


def dense(a: AlternatingTensor):
    """Full antisymmetric array of ``a`` (oracle for evaluation)."""
    out = np.zeros((a.dim,) * a.grade)
    for key, c in a.coeffs.items():
        for p in itertools.permutations(range(a.grade)):
            out[tuple(key[i] for i in p)] += c * perm_sign_det(p)
    return out


def random_tensor(rng, dim, grade):
    keys = list(itertools.combinations(range(dim), grade))
    return AlternatingTensor(dim, grade, {k: rng.normal() for k in keys})


def test_sort_with_sign_matches_permutation_matrix():
    for p in itertools.permutations(range(5)):
        key, sign = sort_with_sign(p)
        assert key == tuple(range(5))
        assert sign == perm_sign_det(p)
    assert sort_with_sign((1, 3, 1)) == (None, 0)


def test_wedge_examples():
    assert wedge(dx(4, 1), dx(4, 2)).coeffs == {(0, 1): 1.0}
    assert wedge(dx(6, 2, 1), dx(6, 6, 5)).coeffs == {(0, 1, 4, 5): 1.0}
    assert wedge(dx(3, 1), dx(3, 1)).is_zero()


def test_wedge_errors():
    with pytest.raises(ExteriorError):
        wedge(dx(3, 1), dx(4, 1))
    with pytest.raises(ExteriorError):
        wedge(dx(3, 1, 2), dx(3, 2, 3))


def test_interior_examples():
    assert interior(AlternatingTensor.from_vector([1, 0]), dx(2, 1, 2)).coeffs == {(1,): 1.0}
    e12 = AlternatingTensor.from_vectors(np.eye(7)[:2])
    assert interior(e12, g2()).coeffs == {(2,): 1.0}
    res = interior_vectors(np.eye(7)[6:7], g2())
    assert res.coeffs == {(0, 5): -1.0, (1, 4): 1.0, (2, 3): 1.0}
    # oracle: full tensor evaluation on basis pairs
    full = dense(g2())
    assert np.array_equal(res.to_matrix(), full[6])


def test_interior_errors():
    with pytest.raises(ExteriorError):
        interior(dx(3, 1, 2), dx(3, 1))
    with pytest.raises(ExteriorError):
        interior(dx(4, 1), dx(3, 1))


def test_hodge_examples():
    assert hodge_star(dx(3, 1)).coeffs == {(1, 2): 1.0}
    assert hodge_star(AlternatingTensor.scalar(5, 1.0)) == volume_form(5)
    assert hodge_star(dx(4, 1, 2)).coeffs == {(2, 3): 1.0}


def test_hodge_double_star_all_basis():
    for n in range(1, 9):
        vol = volume_form(n)
        for k in range(n + 1):
            for key in itertools.combinations(range(n), k):
                e = AlternatingTensor(n, k, {key: 1.0})
                assert hodge_star(hodge_star(e)) == e * (-1) ** (k * (n - k))
                assert wedge(e, hodge_star(e)) == vol


def test_inner_and_norm_examples():
    assert norm(dx(2, 1, 2)) == 1.0
    assert inner(g2(), g2()) == 7.0
    dz = ComplexAlternatingTensor(dx(2, 1), dx(2, 2))
    assert math.isclose(norm(dz), math.sqrt(2))


def test_restrict_examples():
    omega = dx(4, 1, 2) + dx(4, 3, 4)
    assert restrict(omega, np.eye(4)[[0, 2]]).is_zero()
    assert restrict(g2(), np.eye(7)[3:]).is_zero()
    assert restrict(volume_form(3), np.eye(3)) == volume_form(3)
    with pytest.raises(ExteriorError):
        restrict(g2(), 2 * np.eye(7)[:3])


def test_evaluate_matches_dense_oracle():
    rng = np.random.default_rng(0)
    a = random_tensor(rng, 6, 3)
    vecs = rng.normal(size=(20, 3, 6))
    full = dense(a)
    expect = np.einsum("ijk,ni,nj,nk->n", full, vecs[:, 0], vecs[:, 1], vecs[:, 2])
    assert np.allclose(evaluate(a, vecs), expect, atol=1e-12)


def test_anticommutativity_random_pairs():
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(300):
        n = int(rng.integers(2, 8))
        p = int(rng.integers(0, n + 1))
        q = int(rng.integers(0, n - p + 1))
        a, b = random_tensor(rng, n, p), random_tensor(rng, n, q)
        diff = wedge(a, b) - wedge(b, a) * (-1) ** (p * q)
        worst = max(worst, norm(diff))
    assert worst < 1e-12


def test_interior_adjoint_to_wedge():
    rng = np.random.default_rng(2)
    for _ in range(200):
        n = int(rng.integers(2, 8))
        k = int(rng.integers(1, n + 1))
        v = AlternatingTensor.from_vector(rng.normal(size=n))
        a, b = random_tensor(rng, n, k), random_tensor(rng, n, k - 1)
        assert abs(inner(interior(v, a), b) - inner(a, wedge(v, b))) < 1e-10


def test_leibniz_rule():
    rng = np.random.default_rng(3)
    n = 6
    v = AlternatingTensor.from_vector(rng.normal(size=n))
    a, b = random_tensor(rng, n, 2), random_tensor(rng, n, 3)
    lhs = interior(v, wedge(a, b))
    rhs = wedge(interior(v, a), b) + wedge(a, interior(v, b)) * (-1) ** a.grade
    assert norm(lhs - rhs) < 1e-12


def test_json_round_trip_and_one_based():
    data = g2().to_json()
    assert {"idx": [1, 2, 3], "c": 1.0} in data["terms"]
    assert AlternatingTensor.from_json(data) == g2()
    with pytest.raises(ExteriorError):
        AlternatingTensor.from_json({"dim": 3, "grade": 2, "terms": [{"idx": [2, 1], "c": 1}]})


def test_invariants_on_construction():
    assert AlternatingTensor(3, 1, {(0,): 1e-15}).coeffs == {}
    with pytest.raises(ExteriorError):
        AlternatingTensor(11, 1)
    with pytest.raises(ExteriorError):
        AlternatingTensor(3, 1, {(3,): 1.0})


def test_complex_phase_rotation():
    dz = ComplexAlternatingTensor(dx(2, 1), dx(2, 2))
    rot = dz.phase_rotate(math.pi / 2)
    assert rot.re == -dx(2, 2) and rot.im == dx(2, 1)
    back = rot.phase_rotate(-math.pi / 2)
    assert norm(back - dz) < 1e-15


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 7), st.integers(0, 2**31 - 1))
def test_inner_is_coefficient_sum(n, seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(0, n + 1))
    a, b = random_tensor(rng, n, k), random_tensor(rng, n, k)
    expect = sum(c * b.coeffs.get(key, 0.0) for key, c in a.coeffs.items())
    assert math.isclose(inner(a, b), expect, rel_tol=1e-12, abs_tol=1e-12)
