from __future__ import annotations

import math

import numpy as np
import pytest

from crosscal.complex_vcp import (
    CvcpError,
    complex_structure,
    cvcp_defect,
    cvcp_form_defect,
    dz,
    hamilton_residuals,
    hk_block_triple,
    hk_triple,
    kahler_compatibility_residual,
    make_cvcp,
    phase_rotate,
    random_unitary_frames,
    type_10,
    volume_pairing,
)
from crosscal.exterior import ComplexAlternatingTensor, dx, evaluate, norm, volume_form

X1, Y1, X2, Y2 = np.eye(4)


def test_complex_structure_convention():
    J = complex_structure(2)
    assert np.array_equal(J @ X1, Y1) and np.array_equal(J @ Y1, -X1)
    assert np.array_equal(J @ J, -np.eye(4))
    assert np.array_equal(J.T @ J, np.eye(4))


def test_make_cvcp_examples():
    cy2 = make_cvcp("cy", 2)
    assert cy2.Omega.re == dx(4, 1, 3) - dx(4, 2, 4)
    for n in range(1, 5):
        S = make_cvcp("cy", n)
        real_slice = np.eye(2 * n)[0::2]
        assert S.Omega.evaluate(real_slice) == 1.0
    hk1 = make_cvcp("hk", 1)
    # x^1, y^1, x^2, y^2 -> labels 1..4: omega_K = -dx^1 ^ dy^2 - dy^1 ^ dx^2
    assert hk1.omega_K == -dx(4, 1, 4) - dx(4, 2, 3)
    with pytest.raises(CvcpError):
        make_cvcp("cy", 0)
    with pytest.raises(CvcpError):
        make_cvcp("hk", 3)
    with pytest.raises(CvcpError):
        make_cvcp("g2", 1)


def test_expansion_oracle():
    # (dx^1 + i dy^1) ^ (dx^2 + i dy^2) expanded by hand
    S = make_cvcp("cy", 2)
    assert S.Omega.im == dx(4, 1, 4) + dx(4, 2, 3)
    assert math.isclose(norm(dz(1, 1)), math.sqrt(2))


@pytest.mark.parametrize("kind,param", [("cy", 2), ("cy", 3), ("cy", 4), ("hk", 1), ("hk", 2)])
def test_normalization_and_type(kind, param):
    S = make_cvcp(kind, param)
    rep = cvcp_defect(S, 1000, seed=1)
    assert rep["defect"] < 1e-9
    assert rep["type_residual"] < 1e-10
    assert rep["target"] == (2.0 ** (param / 2) if kind == "cy" else 2.0)


def test_defect_rejects_non_holomorphic():
    J = complex_structure(2)
    vol = ComplexAlternatingTensor.from_real(volume_form(4))
    rep = cvcp_form_defect(vol, J, 3, 100, seed=0)
    assert rep["defect"] == math.inf and rep["type_residual"] > 0.1
    rep = cvcp_form_defect(ComplexAlternatingTensor.from_real(dx(4, 1, 3)), J, 1, 100, seed=0)
    assert rep["defect"] > 0.1 and rep["type_residual"] > 0.1


def test_unitary_frames_are_j_orthonormal():
    f = random_unitary_frames(np.random.default_rng(0), 4, 3, 50)
    J = complex_structure(4)
    both = np.concatenate([f, f @ J.T], axis=1)
    assert np.max(np.abs(both @ np.swapaxes(both, 1, 2) - np.eye(6))) < 1e-12
    e = type_10(X1, complex_structure(2))
    assert np.allclose(dz(2, 1).evaluate(e[None]), math.sqrt(2))


def test_phase_rotate_examples():
    S = make_cvcp("hk", 1)
    assert phase_rotate(S, 0.0) == S.Omega
    assert norm(phase_rotate(S, math.pi / 2).re - S.omega_K) < 1e-15
    assert norm(phase_rotate(S, math.pi) + S.Omega) < 1e-15
    theta = 0.7
    rot = phase_rotate(S, theta)
    assert norm(rot.re - (math.cos(theta) * S.omega_I + math.sin(theta) * S.omega_K)) < 1e-15


def test_hk_triple_examples():
    I, J, K = hk_triple(make_cvcp("hk", 1))
    assert np.array_equal(I @ X1, X2)
    assert np.array_equal(K @ X1, -Y2)
    assert np.array_equal(J @ X1, Y1)
    with pytest.raises(CvcpError):
        hk_triple(make_cvcp("cy", 2))


@pytest.mark.parametrize("m", [1, 2, 3])
def test_hamilton_relation(m):
    triple = hk_triple(make_cvcp("hk", m)) if m <= 2 else hk_block_triple(m)
    res = hamilton_residuals(*triple)
    assert max(res.values()) < 1e-12
    if m <= 2:
        for a, b in zip(triple, hk_block_triple(m)):
            assert np.array_equal(a, b)


def test_raised_index_matches_form():
    S = make_cvcp("hk", 2)
    rng = np.random.default_rng(3)
    u, v = rng.normal(size=(2, 8))
    assert abs(evaluate(S.omega_I, np.stack([u, v])) - (S.I @ u) @ v) < 1e-12
    assert abs(evaluate(S.omega_K, np.stack([u, v])) - (S.K @ u) @ v) < 1e-12
    assert abs(evaluate(S.omega, np.stack([u, v])) - (S.J @ u) @ v) < 1e-12


@pytest.mark.parametrize("kind,param", [("cy", 3), ("hk", 2)])
def test_kahler_compatibility(kind, param):
    assert kahler_compatibility_residual(make_cvcp(kind, param)) == 0.0


def test_volume_pairing_constants():
    # brute-force values, frozen: c_n = (-2i)^n (-1)^{n(n-1)/2} / n!
    expected = {1: -2j, 2: 2.0, 3: -4j / 3, 4: 2.0 / 3}
    for n, c in expected.items():
        rep = volume_pairing(make_cvcp("cy", n))
        assert rep["residual"] < 1e-10 and rep["nonzero"]
        assert abs(complex(*rep["c"]) - c) < 1e-12
    # the closed-form constant quoted alongside does not agree at n = 1
    rep = volume_pairing(make_cvcp("cy", 1))
    assert rep["quoted_constant"] == [0.0, 0.5] and not rep["matches_quoted"]
