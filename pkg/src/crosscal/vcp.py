"""Real vector cross products: the four model structures and their invariants.

A structure is fixed by its VCP form phi of grade r+1; the product itself is
derived as ``chi(v_1..v_r)_j = phi(v_1, ..., v_r, e_j)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .exterior import (
    AlternatingTensor,
    ExteriorError,
    dx,
    evaluate,
    interior_vectors,
    restrict,
    volume_form,
    wedge,
)
from .normed_algebras import G2_COEFFS

KINDS = ("complex", "volume", "g2", "spin7")
NULLSPACE_TOL = 1e-9


class StructureError(ValueError):
    pass


@dataclass(frozen=True)
class VcpStructure:
    kind: str
    n: int
    r: int
    phi: AlternatingTensor = field(repr=False)
    param: int | None = None

    @property
    def label(self) -> str:
        if self.kind == "complex":
            return f"Complex({self.param})"
        if self.kind == "volume":
            return f"Volume({self.param})"
        return {"g2": "G2", "spin7": "Spin7"}[self.kind]


def kahler_form(m: int) -> AlternatingTensor:
    """sum_j dx^j ^ dy^j on C^m with interleaved real coordinates."""
    n = 2 * m
    out = AlternatingTensor.zero(n, 2)
    for j in range(m):
        out = out + dx(n, 2 * j + 1, 2 * j + 2)
    return out


def g2_form() -> AlternatingTensor:
    return AlternatingTensor(7, 3, G2_COEFFS)


def cayley_form() -> AlternatingTensor:
    """The Cayley 4-form, expanded from its factored coordinate expression."""
    def d(*labels):
        return dx(8, *labels)

    theta = -d(1, 2, 3, 4) - d(5, 6, 7, 8)
    theta = theta - wedge(d(2, 1) + d(3, 4), d(6, 5) + d(7, 8))
    theta = theta - wedge(d(3, 1) + d(4, 2), d(7, 5) + d(8, 6))
    theta = theta - wedge(d(4, 1) + d(2, 3), d(8, 5) + d(6, 7))
    return theta


def make_structure(kind: str, param: int | None = None) -> VcpStructure:
    kind = kind.lower()
    if kind == "complex":
        if param is None or int(param) < 1 or 2 * int(param) > 10:
            raise StructureError(f"Complex(m) needs 1 <= m <= 5, got {param}")
        m = int(param)
        return VcpStructure("complex", 2 * m, 1, kahler_form(m), m)
    if kind == "volume":
        if param is None or not 2 <= int(param) <= 10:
            raise StructureError(f"Volume(n) needs 2 <= n <= 10, got {param}")
        n = int(param)
        return VcpStructure("volume", n, n - 1, volume_form(n), n)
    if kind == "g2":
        return VcpStructure("g2", 7, 2, g2_form())
    if kind == "spin7":
        return VcpStructure("spin7", 8, 3, cayley_form())
    raise StructureError(f"unknown structure kind {kind!r}")


def parse_selector(text: str) -> tuple[str, int | None]:
    """'complex:2' -> ('complex', 2); 'g2' -> ('g2', None)."""
    name, _, arg = text.strip().lower().partition(":")
    if arg:
        try:
            return name, int(arg)
        except ValueError as exc:
            raise StructureError(f"bad selector parameter in {text!r}") from exc
    return name, None


# sampling ---------------------------------------------------------------

def random_frames(rng: np.random.Generator, n: int, k: int, count: int) -> np.ndarray:
    """``count`` orthonormal k-frames in R^n, shape (count, k, n).

    Gaussian draw followed by QR with the sign of diag(R) fixed, which gives
    the rotation-invariant distribution.
    """
    g = rng.standard_normal((count, n, k))
    q, r = np.linalg.qr(g)
    signs = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    signs[signs == 0] = 1.0
    q = q * signs[:, None, :]
    return np.swapaxes(q, -1, -2)


def gram_det(vectors) -> np.ndarray:
    """|v_1 ^ ... ^ v_k|^2 for stacks of shape (..., k, n)."""
    vectors = np.asarray(vectors)
    return np.linalg.det(vectors @ np.swapaxes(vectors, -1, -2))


# the product ------------------------------------------------------------

def _check_vectors(S: VcpStructure, vectors, count: int) -> np.ndarray:
    vectors = np.asarray(vectors, dtype=float)
    if vectors.ndim < 2 or vectors.shape[-2:] != (count, S.n):
        raise StructureError(f"{S.label} expects {count} vectors in R^{S.n}, got shape {vectors.shape}")
    return vectors


def chi(S: VcpStructure, vectors) -> np.ndarray:
    """The cross product of r vectors, stacked as (..., r, n)."""
    vectors = _check_vectors(S, vectors, S.r)
    lead = vectors.shape[:-2]
    eye = np.broadcast_to(np.eye(S.n), lead + (S.n, S.n))
    rep = np.broadcast_to(vectors[..., None, :, :], lead + (S.n, S.r, S.n))
    stacked = np.concatenate([rep, eye[..., :, None, :]], axis=-2)
    return evaluate(S.phi, stacked)


def phi_value(S: VcpStructure, vectors) -> np.ndarray:
    return evaluate(S.phi, _check_vectors(S, vectors, S.r + 1))


def vcp_form_defect(phi: AlternatingTensor, r: int, samples: int = 10_000, seed: int = 0):
    """Max over random orthonormal r-frames of | |iota_frame phi| - 1 |.

    Returns ``(defect, worst_frame)``.
    """
    if phi.grade != r + 1:
        raise ExteriorError(f"a degree-{r} VCP form has grade {r + 1}, got {phi.grade}")
    n = phi.dim
    rng = np.random.default_rng(seed)
    frames = random_frames(rng, n, r, samples)
    eye = np.broadcast_to(np.eye(n), (samples, n, n))
    rep = np.broadcast_to(frames[:, None], (samples, n, r, n))
    vals = evaluate(phi, np.concatenate([rep, eye[:, :, None, :]], axis=-2))
    dev = np.abs(np.linalg.norm(vals, axis=-1) - 1.0)
    worst = int(np.argmax(dev))
    return float(dev[worst]), frames[worst]


def frame_defect(phi: AlternatingTensor, frame) -> float:
    """| |iota_frame phi| - 1 | for a single frame."""
    return abs(math.sqrt(sum(c * c for c in interior_vectors(frame, phi).coeffs.values())) - 1.0)


def chi_axiom_residuals(S: VcpStructure, samples: int = 10_000, seed: int = 0) -> dict:
    """Sampled residuals of the two defining axioms on Gaussian tuples.

    orthogonality: max |<chi(v), v_i>| / |v|^(r+1); norm: max | |chi|^2 - Gram | / |v|^(2r).
    """
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((samples, S.r, S.n))
    c = chi(S, v)
    scale = np.prod(np.linalg.norm(v, axis=-1), axis=-1)
    ortho = np.abs(np.einsum("sn,skn->sk", c, v)).max(axis=-1) / (scale * np.linalg.norm(v, axis=-1).max(axis=-1))
    normres = np.abs(np.sum(c * c, axis=-1) - gram_det(v)) / scale**2
    return {"orthogonality": float(ortho.max()), "norm": float(normres.max())}


# tau --------------------------------------------------------------------

def tau_matrix(S: VcpStructure, vectors) -> np.ndarray:
    """tau(v_1..v_{r+1}) as a skew matrix T with T[a, b] the e_a ^ e_b coefficient."""
    vectors = _check_vectors(S, vectors, S.r + 1)
    k = S.r + 1
    out = np.zeros(vectors.shape[:-2] + (S.n, S.n))
    for i in range(k):
        rest = np.delete(vectors, i, axis=-2)
        w = chi(S, rest)
        v = vectors[..., i, :]
        outer = v[..., :, None] * w[..., None, :]
        out += (-1) ** i * (outer - np.swapaxes(outer, -1, -2))
    return out / math.sqrt(k)


def tau(S: VcpStructure, vectors) -> AlternatingTensor:
    vectors = np.asarray(vectors, dtype=float)
    if vectors.ndim != 2:
        raise StructureError("tau takes a single tuple of vectors")
    return AlternatingTensor.from_matrix(tau_matrix(S, vectors))


def tau_norm_sq(S: VcpStructure, vectors) -> np.ndarray:
    t = tau_matrix(S, vectors)
    return 0.5 * np.sum(t * t, axis=(-1, -2))


def norm_identity_residual(S: VcpStructure, samples: int = 10_000, seed: int = 0) -> float:
    """max | phi(xi)^2 + |tau|^2 - |v_1^...^v_{r+1}|^2 |, scaled by the Gram term."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((samples, S.r + 1, S.n))
    v /= np.linalg.norm(v, axis=-1, keepdims=True)
    lhs = phi_value(S, v) ** 2 + tau_norm_sq(S, v)
    return float(np.max(np.abs(lhs - gram_det(v))))


# automorphism algebra ---------------------------------------------------

@dataclass(frozen=True)
class LieSubalgebraBasis:
    elements: list = field(repr=False)
    singular_values: np.ndarray = field(repr=False)
    gap: float = math.inf

    @property
    def dim(self) -> int:
        return len(self.elements)


def so_basis(n: int) -> list[tuple[tuple[int, int], np.ndarray]]:
    """E_ab = e_a e_b^T - e_b e_a^T for a < b, orthonormal for tr(A^T B) / 2."""
    out = []
    for a, b in itertools.combinations(range(n), 2):
        e = np.zeros((n, n))
        e[a, b], e[b, a] = 1.0, -1.0
        out.append(((a, b), e))
    return out


def derivation_rows(phi: AlternatingTensor, zeta) -> np.ndarray:
    """(sum_i phi(e_J1, .., zeta e_Ji, .., e_Jk))_J over all grade-subsets J."""
    n, k = phi.dim, phi.grade
    zeta = np.asarray(zeta, dtype=float)
    eye = np.eye(n)
    subsets = list(itertools.combinations(range(n), k))
    frames = np.stack([eye[list(s)] for s in subsets])            # (S, k, n)
    total = np.zeros(len(subsets))
    for i in range(k):
        moved = frames.copy()
        moved[:, i, :] = frames[:, i, :] @ zeta.T                # zeta applied to e_Ji
        total += evaluate(phi, moved)
    return total


def automorphism_algebra(S_or_phi, tol: float = NULLSPACE_TOL) -> LieSubalgebraBasis:
    phi = S_or_phi.phi if isinstance(S_or_phi, VcpStructure) else S_or_phi
    basis = so_basis(phi.dim)
    cols = [derivation_rows(phi, e) for _, e in basis]
    mat = np.column_stack(cols)
    _, s, vt = np.linalg.svd(mat)
    svals = np.zeros(len(basis))
    svals[: len(s)] = s
    null = svals <= tol
    elements = [sum(c * e for c, (_, e) in zip(vt[i], basis)) for i in np.nonzero(null)[0]]
    nonzero = svals[~null]
    small = svals[null]
    if len(nonzero) == 0:
        gap = math.inf
    else:
        floor = small.max() if len(small) else 0.0
        gap = math.inf if floor == 0.0 else float(nonzero.min() / floor)
    return LieSubalgebraBasis(elements, svals, gap)


def g_perp_pairing(beta: AlternatingTensor, zeta) -> float:
    """<beta, zeta-bar> with zeta-bar(a, b) = g(zeta a, b)."""
    zeta = np.asarray(zeta, dtype=float)
    if beta.grade != 2 or zeta.shape != (beta.dim, beta.dim):
        raise StructureError("pairing needs a 2-vector and a matching square matrix")
    return math.fsum(c * zeta[b, a] for (a, b), c in beta.coeffs.items())


def tau_pairing_residual(S: VcpStructure, algebra: LieSubalgebraBasis | None = None,
                         samples: int = 1000, seed: int = 0) -> float:
    if algebra is None:
        algebra = automorphism_algebra(S)
    if algebra.dim == 0:
        return 0.0
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((samples, S.r + 1, S.n))
    v /= np.linalg.norm(v, axis=-1, keepdims=True)
    t = tau_matrix(S, v)
    # sum_{a<b} T_ab zeta_ba = -tr(T zeta) / 2 ... written out for clarity
    z = np.stack(algebra.elements)
    pair = 0.5 * np.einsum("sab,zba->sz", t, z)
    return float(np.max(np.abs(pair)))


# hypersurfaces ----------------------------------------------------------

def complement_basis(nu) -> np.ndarray:
    """Orthonormal basis of nu-perp, oriented so (nu, basis) is positive.

    For nu = e_n this is e_1..e_{n-1}.
    """
    nu = np.asarray(nu, dtype=float)
    length = np.linalg.norm(nu)
    if length < 1e-12:
        raise StructureError("normal vector is zero")
    nu = nu / length
    n = nu.size
    skip = int(np.argmax(np.abs(nu)))
    basis = []
    for i in range(n):
        if i == skip:
            continue
        v = np.eye(n)[i] - nu[i] * nu
        for b in basis:
            v = v - (v @ b) * b
        basis.append(v / np.linalg.norm(v))
    basis = np.array(basis)
    if np.linalg.det(np.vstack([nu, basis])) < 0:
        basis[-1] *= -1
    return basis


def induced_hypersurface_vcp(S: VcpStructure, nu) -> AlternatingTensor:
    nu = np.asarray(nu, dtype=float)
    if abs(np.linalg.norm(nu) - 1.0) > 1e-10:
        if np.linalg.norm(nu) < 1e-12:
            raise StructureError("normal vector is zero")
        raise StructureError("normal vector must have unit length")
    return restrict(interior_vectors(nu[None], S.phi), complement_basis(nu))
