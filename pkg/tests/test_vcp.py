from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crosscal.exterior import AlternatingTensor, ExteriorError, dx, norm, volume_form, wedge
from crosscal.normed_algebras import Octonion, cross2
from crosscal.vcp import (
    StructureError,
    automorphism_algebra,
    cayley_form,
    chi,
    chi_axiom_residuals,
    derivation_rows,
    frame_defect,
    g_perp_pairing,
    gram_det,
    induced_hypersurface_vcp,
    make_structure,
    norm_identity_residual,
    parse_selector,
    phi_value,
    random_frames,
    so_basis,
    tau,
    tau_norm_sq,
    tau_pairing_residual,
    vcp_form_defect,
)

ALL = [("complex", 1), ("complex", 2), ("complex", 3), ("volume", 3), ("volume", 5), ("g2", None), ("spin7", None)]
E7, E8 = np.eye(7), np.eye(8)


def test_make_structure_coefficients():
    assert make_structure("g2").phi.coeff((0, 1, 2)) == 1.0
    spin7 = make_structure("spin7").phi
    assert spin7.coeff((0, 1, 2, 3)) == -1.0
    assert spin7.coeff((4, 5, 6, 7)) == -1.0
    # oracle: wedge of the first factored pair
    piece = -wedge(dx(8, 2, 1) + dx(8, 3, 4), dx(8, 6, 5) + dx(8, 7, 8))
    assert piece.coeff((0, 1, 4, 5)) == -1.0
    assert spin7.coeff((0, 1, 4, 5)) == -1.0
    assert len(spin7.coeffs) == 14
    assert make_structure("complex", 2).phi == dx(4, 1, 2) + dx(4, 3, 4)
    assert make_structure("volume", 4).phi == volume_form(4)


def test_make_structure_errors():
    for kind, p in [("complex", 0), ("volume", 1), ("e8", None), ("complex", None)]:
        with pytest.raises(StructureError):
            make_structure(kind, p)
    assert parse_selector("complex:3") == ("complex", 3)
    assert parse_selector("G2") == ("g2", None)


def test_chi_examples():
    assert np.array_equal(chi(make_structure("g2"), E7[:2]), E7[2])
    assert np.array_equal(chi(make_structure("complex", 2), np.eye(4)[:1]), np.eye(4)[1])
    assert np.array_equal(chi(make_structure("volume", 3), np.eye(3)[:2]), np.eye(3)[2])
    with pytest.raises(StructureError):
        chi(make_structure("g2"), E7[:3])


def test_g2_chi_matches_octonions():
    rng = np.random.default_rng(0)
    S = make_structure("g2")
    for _ in range(200):
        a, b = rng.normal(size=(2, 7))
        oct_val = cross2(Octonion.from_array(np.r_[0, a]), Octonion.from_array(np.r_[0, b])).array()[1:]
        assert np.allclose(chi(S, np.stack([a, b])), oct_val, atol=1e-12)


@pytest.mark.parametrize("kind,param", ALL)
def test_vcp_axioms(kind, param):
    S = make_structure(kind, param)
    assert vcp_form_defect(S.phi, S.r, 10_000, seed=1)[0] < 1e-10
    res = chi_axiom_residuals(S, 10_000, seed=2)
    assert res["orthogonality"] < 1e-10 and res["norm"] < 1e-10


def test_vcp_form_defect_non_vcp():
    phi = dx(7, 1, 2, 3)
    assert frame_defect(phi, E7[[0, 3]]) == 1.0
    defect, frame = vcp_form_defect(phi, 2, 2000, seed=0)
    assert defect > 0.5 and frame.shape == (2, 7)
    with pytest.raises(ExteriorError):
        vcp_form_defect(phi, 3)


def test_vcp_form_defect_deterministic():
    a = vcp_form_defect(cayley_form(), 3, 500, seed=9)
    b = vcp_form_defect(cayley_form(), 3, 500, seed=9)
    assert a[0] == b[0] and np.array_equal(a[1], b[1])


def test_tau_examples():
    S = make_structure("g2")
    assert norm(tau(S, E7[:3])) == 0.0
    assert math.isclose(norm(tau(S, E7[[0, 1, 3]])) ** 2, 1.0, abs_tol=1e-15)
    rng = np.random.default_rng(0)
    v = rng.normal(size=7)
    assert norm(tau(S, np.stack([v, v, rng.normal(size=7)]))) < 1e-14


@pytest.mark.parametrize("kind,param", ALL)
def test_norm_identity(kind, param):
    S = make_structure(kind, param)
    assert norm_identity_residual(S, 10_000, seed=3) < 1e-9


def test_norm_identity_unnormalized_oracle():
    # direct check on raw Gaussian tuples
    S = make_structure("spin7")
    rng = np.random.default_rng(4)
    v = rng.normal(size=(500, 4, 8))
    lhs = phi_value(S, v) ** 2 + tau_norm_sq(S, v)
    assert np.max(np.abs(lhs / gram_det(v) - 1)) < 1e-10


@pytest.mark.parametrize("kind,param,dim", [("complex", 1, 1), ("complex", 2, 4), ("complex", 3, 9),
                                            ("g2", None, 14), ("spin7", None, 21)]
                         + [("volume", n, n * (n - 1) // 2) for n in range(3, 9)])
def test_automorphism_dimensions(kind, param, dim):
    S = make_structure(kind, param)
    alg = automorphism_algebra(S)
    assert alg.dim == dim
    assert alg.gap > 1e6
    z = np.stack(alg.elements)
    gram = 0.5 * np.einsum("iab,jab->ij", z, z)
    assert np.allclose(gram, np.eye(dim), atol=1e-12)
    for e in alg.elements:
        assert np.allclose(e, -e.T)
        assert np.max(np.abs(derivation_rows(S.phi, e))) < 1e-9


def test_g2_algebra_acts_by_octonion_derivations():
    # independent oracle: zeta(ab) = (zeta a) b + a (zeta b) on Im O
    from crosscal.normed_algebras import oct_mul_array
    alg = automorphism_algebra(make_structure("g2"))
    rng = np.random.default_rng(7)
    a, b = rng.normal(size=(2, 50, 8))
    a[:, 0] = b[:, 0] = 0.0
    for z in alg.elements:
        big = np.zeros((8, 8))
        big[1:, 1:] = z
        lhs = oct_mul_array(a, b) @ big.T
        rhs = oct_mul_array(a @ big.T, b) + oct_mul_array(a, b @ big.T)
        assert np.max(np.abs(lhs - rhs)) < 1e-12


@pytest.mark.parametrize("kind,param", ALL)
def test_tau_annihilates_g(kind, param):
    assert tau_pairing_residual(make_structure(kind, param), samples=1000, seed=5) < 1e-9


def test_g_perp_pairing_examples():
    _, rot = so_basis(3)[0]
    e12 = dx(3, 1, 2)
    assert abs(g_perp_pairing(e12, rot)) == 1.0
    assert g_perp_pairing(AlternatingTensor.zero(3, 2), rot) == 0.0
    with pytest.raises(StructureError):
        g_perp_pairing(e12, np.eye(4))


def test_induced_hypersurface():
    g2 = make_structure("g2")
    out = induced_hypersurface_vcp(g2, E7[6])
    assert out == -dx(6, 1, 6) + dx(6, 2, 5) + dx(6, 3, 4)
    vol = make_structure("volume", 5)
    assert induced_hypersurface_vcp(vol, np.eye(5)[4]) == volume_form(4)
    spin7 = induced_hypersurface_vcp(make_structure("spin7"), E8[7])
    assert vcp_form_defect(spin7, 2, 10_000, seed=6)[0] < 1e-9
    with pytest.raises(StructureError):
        induced_hypersurface_vcp(g2, np.zeros(7))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_induced_hypersurface_random_normal(seed):
    rng = np.random.default_rng(seed)
    nu = rng.normal(size=8)
    nu /= np.linalg.norm(nu)
    out = induced_hypersurface_vcp(make_structure("spin7"), nu)
    assert vcp_form_defect(out, 2, 500, seed=seed)[0] < 1e-9


def test_random_frames_orthonormal():
    f = random_frames(np.random.default_rng(0), 7, 3, 100)
    assert np.max(np.abs(f @ np.swapaxes(f, 1, 2) - np.eye(3))) < 1e-12
