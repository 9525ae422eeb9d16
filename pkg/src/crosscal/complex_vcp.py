"""Complex vector cross products on C^n = R^{2n} (interleaved x^1, y^1, x^2, y^2, ...).

Two models exist: the holomorphic volume form dz^1 ^ ... ^ dz^n (Calabi-Yau,
r = n - 1) and the holomorphic symplectic form sum dz^{2k-1} ^ dz^{2k}
(hyperkahler, r = 1). With dz = dx + i dy a unit (1,0)-vector
(a - iJa)/sqrt(2) has |dz(.)| = sqrt(2), which is where the normalization
2^{(r+1)/2} comes from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exterior import (
    MAX_DIM,
    AlternatingTensor,
    ComplexAlternatingTensor,
    complex_wedge,
    dx,
    interior_coefficients,
    norm,
    wedge_all,
)
from .vcp import kahler_form


class CvcpError(ValueError):
    pass


def complex_structure(n: int) -> np.ndarray:
    """J on R^{2n}: J d/dx^j = d/dy^j, J d/dy^j = -d/dx^j."""
    block = np.array([[0.0, -1.0], [1.0, 0.0]])
    return np.kron(np.eye(n), block)


def dz(n: int, j: int) -> ComplexAlternatingTensor:
    """dz^j = dx^j + i dy^j on C^n (j is 1-based)."""
    return ComplexAlternatingTensor(dx(2 * n, 2 * j - 1), dx(2 * n, 2 * j))


def raise_index(omega: AlternatingTensor) -> np.ndarray:
    """Endomorphism A with omega(u, v) = <A u, v>."""
    return omega.to_matrix().T


@dataclass(frozen=True)
class CVcpStructure:
    kind: str
    param: int
    dim_real: int
    r: int
    J: np.ndarray = field(repr=False)
    omega: AlternatingTensor = field(repr=False)
    Omega: ComplexAlternatingTensor = field(repr=False)
    omega_I: AlternatingTensor | None = field(default=None, repr=False)
    omega_K: AlternatingTensor | None = field(default=None, repr=False)
    I: np.ndarray | None = field(default=None, repr=False)
    K: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        """Complex dimension."""
        return self.dim_real // 2

    @property
    def label(self) -> str:
        return f"CalabiYau({self.param})" if self.kind == "cy" else f"Hyperkahler({self.param})"

    @property
    def target(self) -> float:
        return 2.0 ** ((self.r + 1) / 2)


def make_cvcp(kind: str, param: int) -> CVcpStructure:
    kind = kind.lower()
    param = int(param)
    if kind in ("cy", "calabiyau"):
        n = param
        if not 1 <= n <= MAX_DIM // 2:
            raise CvcpError(f"CalabiYau(n) needs 1 <= n <= {MAX_DIM // 2}, got {n}")
        Omega = dz(n, 1)
        for j in range(2, n + 1):
            Omega = complex_wedge(Omega, dz(n, j))
        return CVcpStructure("cy", n, 2 * n, n - 1, complex_structure(n), kahler_form(n), Omega)
    if kind in ("hk", "hyperkahler"):
        m = param
        if not 1 <= m <= MAX_DIM // 4:
            raise CvcpError(f"Hyperkahler(m) needs 1 <= m <= {MAX_DIM // 4}, got {m}")
        n = 2 * m
        Omega = complex_wedge(dz(n, 1), dz(n, 2))
        for k in range(2, m + 1):
            Omega = Omega + complex_wedge(dz(n, 2 * k - 1), dz(n, 2 * k))
        omega_I, omega_K = Omega.re, -Omega.im
        return CVcpStructure("hk", m, 2 * n, 1, complex_structure(n), kahler_form(n), Omega,
                             omega_I, omega_K, raise_index(omega_I), raise_index(omega_K))
    raise CvcpError(f"unknown complex structure kind {kind!r}")


# sampling ---------------------------------------------------------------

def realify(u) -> np.ndarray:
    """C^n vectors (..., n) to interleaved real vectors (..., 2n)."""
    u = np.asarray(u)
    out = np.empty(u.shape[:-1] + (2 * u.shape[-1],))
    out[..., 0::2] = u.real
    out[..., 1::2] = u.imag
    return out


def random_unitary_frames(rng: np.random.Generator, n: int, r: int, count: int) -> np.ndarray:
    """Real frames (count, r, 2n) whose spans are complex lines in general position.

    Each frame is the realification of a unitary r-frame in C^n, so the 2r
    vectors (a_k, J a_k) are orthonormal.
    """
    g = rng.standard_normal((count, n, r)) + 1j * rng.standard_normal((count, n, r))
    q, rr = np.linalg.qr(g)
    phase = np.diagonal(rr, axis1=-2, axis2=-1)
    phase = phase / np.where(np.abs(phase) == 0, 1.0, np.abs(phase))
    q = q * phase[:, None, :]
    return realify(np.swapaxes(q, -1, -2))


def type_10(a, J) -> np.ndarray:
    """(a - iJa)/sqrt(2) for real vectors on the last axis."""
    a = np.asarray(a, dtype=float)
    return (a - 1j * (a @ J.T)) / math.sqrt(2.0)


def complex_interior_norm(Omega: ComplexAlternatingTensor, front) -> np.ndarray:
    """|iota_front Omega| for complex vectors ``front`` of shape (..., j, n)."""
    re = interior_coefficients(Omega.re, front)
    im = interior_coefficients(Omega.im, front)
    c = re + 1j * im
    return np.sqrt(np.sum(np.abs(c) ** 2, axis=-1))


def cvcp_defect(S: CVcpStructure, samples: int = 1000, seed: int = 0) -> dict:
    return cvcp_form_defect(S.Omega, S.J, S.r, samples, seed)


def cvcp_form_defect(Omega: ComplexAlternatingTensor, J, r: int, samples: int = 1000,
                     seed: int = 0) -> dict:
    """Normalization and type check for a candidate C-VCP form.

    ``defect`` is max | |iota_{e~ frame} Omega| - 2^{(r+1)/2} | over random
    unitary (1,0)-frames; ``type_residual`` is max |iota_{v + iJv} Omega| / |v|
    over random real v, which vanishes exactly for forms of type (r+1, 0).
    """
    J = np.asarray(J, dtype=float)
    n2 = J.shape[0]
    rng = np.random.default_rng(seed)
    target = 2.0 ** ((r + 1) / 2)
    if r <= n2 // 2 and r < Omega.grade:
        frames = random_unitary_frames(rng, n2 // 2, r, samples)
        vals = complex_interior_norm(Omega, type_10(frames, J))
        dev = np.abs(vals - target)
        defect = float(dev.max())
    else:
        defect = math.inf
    v = rng.standard_normal((samples, n2))
    v /= np.linalg.norm(v, axis=-1, keepdims=True)
    anti = (v + 1j * (v @ J.T))[:, None, :]
    type_residual = float(complex_interior_norm(Omega, anti).max())
    return {"defect": defect, "type_residual": type_residual, "target": target, "samples": samples}


# derived data ------------------------------------------------------------

def phase_rotate(S: CVcpStructure, theta: float) -> ComplexAlternatingTensor:
    return S.Omega.phase_rotate(theta)


def hk_triple(S: CVcpStructure) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if S.kind != "hk":
        raise CvcpError(f"{S.label} is not hyperkahler")
    return S.I, S.J, S.K


def hk_block_triple(m: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(I, J, K) on R^{4m} as m diagonal copies of the Hyperkahler(1) triple.

    Valid for any m, including those beyond the tensor dimension cap, since
    the holomorphic symplectic form is a sum over independent C^2 factors.
    """
    I1, J1, K1 = hk_triple(make_cvcp("hk", 1))
    eye = np.eye(int(m))
    return np.kron(eye, I1), np.kron(eye, J1), np.kron(eye, K1)


def hamilton_residuals(I, J, K) -> dict:
    ident = np.eye(I.shape[0])

    def res(m):
        return float(np.max(np.abs(m)))

    return {
        "I2": res(I @ I + ident),
        "J2": res(J @ J + ident),
        "K2": res(K @ K + ident),
        "IJK": res(I @ J @ K + ident),
        "IJ+JI": res(I @ J + J @ I),
        "KJ+JK": res(K @ J + J @ K),
        "I+KJ": res(I + K @ J),
        "K-IJ": res(K - I @ J),
    }


def kahler_compatibility_residual(S: CVcpStructure) -> float:
    w = S.omega.to_matrix()
    return float(np.max(np.abs(S.J.T @ w @ S.J - w)))


def volume_pairing(S: CVcpStructure) -> dict:
    """Find c with Omega ^ conj(Omega) = c * omega^n (Calabi-Yau only).

    Also reports the closed-form constant i^n (-1)^{n(n-1)/2} 2^{-n} / n!
    for comparison; it is recorded, not asserted.
    """
    if S.kind != "cy":
        raise CvcpError("volume pairing is defined for the Calabi-Yau model")
    n = S.n
    lhs = complex_wedge(S.Omega, S.Omega.conj())
    top = wedge_all([S.omega] * n)
    key = tuple(range(2 * n))
    base = top.coeffs[key]
    c = complex(lhs.re.coeff(key), lhs.im.coeff(key)) / base
    residual = math.hypot(norm(lhs.re - top * c.real), norm(lhs.im - top * c.imag))
    quoted = (1j ** n) * (-1) ** (n * (n - 1) // 2) * 2.0 ** (-n) / math.factorial(n)
    return {
        "n": n,
        "c": [c.real, c.imag],
        "residual": residual,
        "nonzero": abs(c) > 0,
        "quoted_constant": [quoted.real, quoted.imag],
        "matches_quoted": abs(c - quoted) < 1e-12,
    }


def j_invariance_residual(J, frame) -> float:
    """|| P J P - J P || for the orthogonal projector P onto span(frame)."""
    frame = np.atleast_2d(np.asarray(frame, dtype=float))
    proj = frame.T @ frame
    return float(np.linalg.norm(proj @ J @ proj - J @ proj))
