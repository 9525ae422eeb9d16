"""Discretized knot spaces.

A knot is an embedded closed s-manifold sampled at m vertices with positive
quadrature weights and oriented orthonormal tangent s-frames. Normal fields
are per-vertex vectors. Transgressed forms are vertex-weighted sums; every
reduction goes through ``math.fsum`` so the result does not depend on
evaluation order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .complex_vcp import CVcpStructure
from .exterior import AlternatingTensor, evaluate, interior_vectors, norm, wedge
from .vcp import VcpStructure, chi


class KnotError(ValueError):
    pass


def _fsum(values) -> float:
    return math.fsum(np.asarray(values, dtype=float).ravel().tolist())


@dataclass(frozen=True, eq=False)
class DiscretizedKnot:
    n: int
    s: int
    vertices: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    frames: np.ndarray = field(repr=False)
    faces: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        f = np.asarray(self.frames, dtype=float)
        if self.s < 1:
            raise KnotError("knots of dimension 0 are not supported")
        if v.ndim != 2 or v.shape[1] != self.n:
            raise KnotError(f"vertices must have shape (m, {self.n})")
        m = v.shape[0]
        if w.shape != (m,) or f.shape != (m, self.s, self.n):
            raise KnotError("weights/frames do not match the vertex count")
        if np.any(w <= 0):
            raise KnotError("weights must be positive")
        gram = f @ np.swapaxes(f, 1, 2)
        if np.max(np.abs(gram - np.eye(self.s))) > 1e-10:
            raise KnotError("tangent frames are not orthonormal")
        for name, arr in (("vertices", v), ("weights", w), ("frames", f)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.faces is not None:
            faces = np.asarray(self.faces, dtype=int)
            faces.setflags(write=False)
            object.__setattr__(self, "faces", faces)

    @property
    def m(self) -> int:
        return self.vertices.shape[0]

    def to_json(self) -> dict:
        out = {"n": self.n, "s": self.s, "vertices": self.vertices.tolist(),
               "weights": self.weights.tolist(), "frames": self.frames.tolist()}
        if self.faces is not None:
            out["faces"] = self.faces.tolist()
        return out

    @classmethod
    def from_json(cls, data) -> DiscretizedKnot:
        try:
            return cls(int(data["n"]), int(data["s"]), np.asarray(data["vertices"], dtype=float),
                       np.asarray(data["weights"], dtype=float), np.asarray(data["frames"], dtype=float),
                       np.asarray(data["faces"], dtype=int) if data.get("faces") is not None else None)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, KnotError):
                raise
            raise KnotError(f"malformed knot JSON: {exc}") from exc


@dataclass(frozen=True, eq=False)
class NormalField:
    vectors: np.ndarray = field(repr=False)

    @classmethod
    def on(cls, knot: DiscretizedKnot, vectors, tol: float = 1e-8) -> NormalField:
        vectors = np.asarray(vectors, dtype=float)
        if vectors.shape != (knot.m, knot.n):
            raise KnotError(f"field must have shape ({knot.m}, {knot.n})")
        tangential = np.einsum("msn,mn->ms", knot.frames, vectors)
        if tangential.size and np.max(np.abs(tangential)) > tol:
            raise KnotError("field is not normal to the knot")
        return cls(vectors)

    def to_json(self) -> dict:
        return {"vectors": self.vectors.tolist()}

    @classmethod
    def from_json(cls, knot: DiscretizedKnot, data) -> NormalField:
        try:
            return cls.on(knot, data["vectors"])
        except (KeyError, TypeError) as exc:
            raise KnotError(f"malformed field JSON: {exc}") from exc


def project_normal(knot: DiscretizedKnot, vectors) -> np.ndarray:
    """Remove the tangential part of per-vertex vectors (works on stacks (..., m, n))."""
    vectors = np.asarray(vectors, dtype=float)
    coeff = np.einsum("msn,...mn->...ms", knot.frames, vectors)
    return vectors - np.einsum("...ms,msn->...mn", coeff, knot.frames)


def _vectors(u) -> np.ndarray:
    return u.vectors if isinstance(u, NormalField) else np.asarray(u, dtype=float)


# built-in shapes --------------------------------------------------------------

def make_circle(n: int = 3, m: int = 100) -> DiscretizedKnot:
    """Unit circle in the (x^1, x^2)-plane, counterclockwise."""
    if m < 3:
        raise KnotError("a circle needs at least 3 vertices")
    if n < 3:
        raise KnotError("the circle lives in R^n with n >= 3")
    theta = 2 * np.pi * np.arange(m) / m
    verts = np.zeros((m, n))
    verts[:, 0], verts[:, 1] = np.cos(theta), np.sin(theta)
    frames = np.zeros((m, 1, n))
    frames[:, 0, 0], frames[:, 0, 1] = -np.sin(theta), np.cos(theta)
    return DiscretizedKnot(n, 1, verts, np.full(m, 2 * np.pi / m), frames)


def _subdivided_octahedron(depth: int):
    verts = [np.array(v, dtype=float) for v in
             [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]]
    faces = [(0, 2, 4), (2, 1, 4), (1, 3, 4), (3, 0, 4),
             (2, 0, 5), (1, 2, 5), (3, 1, 5), (0, 3, 5)]
    for _ in range(depth):
        cache: dict[tuple[int, int], int] = {}

        def mid(a, b):
            key = (min(a, b), max(a, b))
            if key not in cache:
                p = verts[a] + verts[b]
                verts.append(p / np.linalg.norm(p))
                cache[key] = len(verts) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]
        faces = new
    return np.array(verts), np.array(faces, dtype=int)


def _surface_frames(points, normals) -> np.ndarray:
    """Tangent frames from projected coordinate directions, (f1, f2, normal) positive."""
    frames = np.zeros((len(points), 2, 3))
    eye = np.eye(3)
    for i, nrm in enumerate(normals):
        skip = int(np.argmax(np.abs(nrm)))
        cols = [eye[j] - (eye[j] @ nrm) * nrm for j in range(3) if j != skip]
        f1 = cols[0] / np.linalg.norm(cols[0])
        f2 = cols[1] - (cols[1] @ f1) * f1
        f2 /= np.linalg.norm(f2)
        if np.linalg.det(np.stack([f1, f2, nrm])) < 0:
            f2 = -f2
        frames[i] = (f1, f2)
    return frames


def make_sphere(m_subdiv: int = 3) -> DiscretizedKnot:
    """Unit sphere in R^3 from a subdivided octahedron, faces oriented outward."""
    if not 0 <= int(m_subdiv) <= 6:
        raise KnotError("subdivision depth must lie in 0..6")
    verts, faces = _subdivided_octahedron(int(m_subdiv))
    a, b, c = verts[faces[:, 0]], verts[faces[:, 1]], verts[faces[:, 2]]
    areas = 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)
    weights = np.zeros(len(verts))
    for corner in range(3):
        np.add.at(weights, faces[:, corner], areas / 3.0)
    return DiscretizedKnot(3, 2, verts, weights, _surface_frames(verts, verts), faces)


def embed(knot: DiscretizedKnot, basis) -> DiscretizedKnot:
    """Push a knot forward along the isometry x -> x @ basis (orthonormal rows)."""
    basis = np.asarray(basis, dtype=float)
    if basis.shape[0] != knot.n or np.max(np.abs(basis @ basis.T - np.eye(knot.n))) > 1e-12:
        raise KnotError("embedding basis must have orthonormal rows, one per coordinate")
    return DiscretizedKnot(basis.shape[1], knot.s, knot.vertices @ basis, knot.weights,
                           knot.frames @ basis, knot.faces)


# transgressed structures ---------------------------------------------------------

def _check_fold(S: VcpStructure, knot: DiscretizedKnot) -> None:
    if knot.s != S.r - 1:
        raise KnotError(f"{S.label} transgresses over {S.r - 1}-dimensional knots, got s={knot.s}")
    if knot.n != S.n:
        raise KnotError(f"knot in R^{knot.n} for a structure on R^{S.n}")


def g_k(knot: DiscretizedKnot, u, v) -> float:
    u, v = _vectors(u), _vectors(v)
    if u.shape != (knot.m, knot.n) or v.shape != u.shape:
        raise KnotError("field size does not match the knot")
    return _fsum(knot.weights * np.einsum("mn,mn->m", u, v))


def _pointwise_phi(S: VcpStructure, knot: DiscretizedKnot, u, v) -> np.ndarray:
    """phi(frame_i, u_i, v_i) for fields of shape (..., m, n)."""
    lead = np.broadcast_shapes(u.shape[:-2], v.shape[:-2])
    frames = np.broadcast_to(knot.frames, lead + knot.frames.shape)
    u = np.broadcast_to(u, lead + (knot.m, knot.n))[..., None, :]
    v = np.broadcast_to(v, lead + (knot.m, knot.n))[..., None, :]
    return evaluate(S.phi, np.concatenate([frames, u, v], axis=-2))


def omega_k(S: VcpStructure, knot: DiscretizedKnot, u, v) -> float:
    _check_fold(S, knot)
    u, v = _vectors(u), _vectors(v)
    if u.shape != (knot.m, knot.n) or v.shape != u.shape:
        raise KnotError("field size does not match the knot")
    return _fsum(knot.weights * _pointwise_phi(S, knot, u, v))


def omega_k_batch(S: VcpStructure, knot: DiscretizedKnot, u, v) -> np.ndarray:
    """omega_k over stacks of fields (F, m, n); per-item sums via fsum."""
    _check_fold(S, knot)
    vals = _pointwise_phi(S, knot, np.asarray(u, float), np.asarray(v, float)) * knot.weights
    return np.array([_fsum(row) for row in vals.reshape(-1, knot.m)]).reshape(vals.shape[:-1])


def j_k(S: VcpStructure, knot: DiscretizedKnot, u) -> NormalField:
    return NormalField(j_k_array(S, knot, _vectors(u)))


def j_k_array(S: VcpStructure, knot: DiscretizedKnot, u) -> np.ndarray:
    _check_fold(S, knot)
    u = np.asarray(u, dtype=float)
    frames = np.broadcast_to(knot.frames, u.shape[:-2] + knot.frames.shape)
    return chi(S, np.concatenate([frames, u[..., None, :]], axis=-2))


def compatibility_residuals(S: VcpStructure, knot: DiscretizedKnot, samples: int = 1000,
                            seed: int = 0) -> dict:
    """(J^K)^2 = -id and omega^K(u, v) = g^K(J^K u, v) on random normal fields."""
    rng = np.random.default_rng(seed)
    u = project_normal(knot, rng.standard_normal((samples, knot.m, knot.n)))
    v = project_normal(knot, rng.standard_normal((samples, knot.m, knot.n)))
    ju = j_k_array(S, knot, u)
    jju = j_k_array(S, knot, ju)
    sq = float(np.max(np.abs(jju + u)))
    om = omega_k_batch(S, knot, u, v)
    gk = np.array([_fsum(row) for row in (knot.weights * np.einsum("fmn,fmn->fm", ju, v))])
    normal = float(np.max(np.abs(np.einsum("msn,fmn->fms", knot.frames, ju)))) if knot.s else 0.0
    return {"j_squared": sq, "omega_vs_metric": float(np.max(np.abs(om - gk))), "j_normal": normal}


# Hamiltonian functions ---------------------------------------------------------

@dataclass(frozen=True)
class AffineForm:
    """eta(x) = const + sum_a x^a * linear[a], a form with affine coefficients."""

    const: AlternatingTensor
    linear: tuple = ()

    @classmethod
    def build(cls, dim: int, grade: int, terms) -> AffineForm:
        """``terms``: iterable of (coordinate label or None, AlternatingTensor); labels are 1-based."""
        const = AlternatingTensor.zero(dim, grade)
        linear = [AlternatingTensor.zero(dim, grade) for _ in range(dim)]
        for label, form in terms:
            if form.dim != dim or form.grade != grade:
                raise KnotError("affine form term has the wrong dim/grade")
            if label is None:
                const = const + form
            else:
                linear[label - 1] = linear[label - 1] + form
        return cls(const, tuple(linear))

    @property
    def dim(self) -> int:
        return self.const.dim

    @property
    def grade(self) -> int:
        return self.const.grade

    def evaluate(self, points, vectors) -> np.ndarray:
        """eta_{x}(v_1..v_k) for points (..., n) and vectors (..., k, n)."""
        points = np.asarray(points, dtype=float)
        out = evaluate(self.const, vectors)
        for a, form in enumerate(self.linear):
            if form.coeffs:
                out = out + points[..., a] * evaluate(form, vectors)
        return out

    def exterior_derivative(self) -> AlternatingTensor:
        out = AlternatingTensor.zero(self.dim, self.grade + 1)
        for a, form in enumerate(self.linear):
            if form.coeffs:
                out = out + wedge(AlternatingTensor(self.dim, 1, {(a,): 1.0}), form)
        return out


@dataclass(frozen=True)
class LinearField:
    """V(x) = const + matrix @ x."""

    const: np.ndarray
    matrix: np.ndarray | None = None

    def at(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        out = np.broadcast_to(np.asarray(self.const, dtype=float), points.shape).copy()
        if self.matrix is not None:
            out = out + points @ np.asarray(self.matrix, dtype=float).T
        return out


def hamiltonian_value(knot: DiscretizedKnot, eta: AffineForm) -> float:
    """Vertex quadrature of the pullback of eta over the knot."""
    if eta.grade != knot.s or eta.dim != knot.n:
        raise KnotError(f"need a {knot.s}-form on R^{knot.n}")
    return _fsum(knot.weights * eta.evaluate(knot.vertices, knot.frames))


def _periodic_derivative(points: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order central difference along a closed polygon."""
    p = points
    return (-np.roll(p, -2, 0) + 8 * np.roll(p, -1, 0) - 8 * np.roll(p, 1, 0) + np.roll(p, 2, 0)) / (12 * h)


def knot_functional(knot: DiscretizedKnot, vertices, eta: AffineForm) -> float:
    """F_eta on a (deformed) vertex set that shares the knot's combinatorics.

    Closed curves (s = 1, vertices in cyclic order) use fourth-order periodic
    differences of the vertex positions for the tangent; meshed surfaces
    (faces present) integrate the affine form exactly over each flat triangle.
    """
    vertices = np.asarray(vertices, dtype=float)
    if knot.faces is not None and knot.s == 2:
        a, b, c = (vertices[knot.faces[:, i]] for i in range(3))
        centroid = (a + b + c) / 3.0
        vals = eta.evaluate(centroid, np.stack([b - a, c - a], axis=-2)) / 2.0
        return _fsum(vals)
    if knot.s == 1:
        h = float(np.mean(knot.weights))
        tangent = _periodic_derivative(vertices, h)
        return _fsum(h * eta.evaluate(vertices, tangent[:, None, :]))
    raise KnotError("deformation functional needs a closed curve or a triangulated surface")


def hamiltonian_pair_residual(S: VcpStructure, eta: AffineForm, v: LinearField,
                              samples: int = 20, seed: int = 0) -> float:
    """max | iota_{V(x)} phi - d eta | at random points."""
    d_eta = eta.exterior_derivative()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for x in rng.standard_normal((samples, S.n)):
        worst = max(worst, norm(interior_vectors(v.at(x)[None], S.phi) - d_eta))
    return worst


def hamiltonian_pairing_check(S: VcpStructure, knot: DiscretizedKnot, eta: AffineForm,
                              v: LinearField, delta, fd_step: float = 1e-4) -> dict:
    """| (F(knot + eps delta) - F(knot)) / eps - omega^K(V, delta) |."""
    _check_fold(S, knot)
    pair = hamiltonian_pair_residual(S, eta, v)
    if pair > 1e-9:
        raise KnotError(f"(v, eta) is not a Hamiltonian pair (residual {pair:.3g})")
    delta = _vectors(delta)
    f0 = knot_functional(knot, knot.vertices, eta)
    f1 = knot_functional(knot, knot.vertices + fd_step * delta, eta)
    slope = (f1 - f0) / fd_step
    om = omega_k(S, knot, v.at(knot.vertices), delta)
    return {"residual": abs(slope - om), "fd_slope": slope, "omega": om, "F": f0,
            "pair_residual": pair}


# branes and Lagrangians ------------------------------------------------------------

def _inside(plane_frame, vectors, tol=1e-10) -> bool:
    proj = plane_frame.T @ plane_frame
    vectors = np.asarray(vectors, dtype=float).reshape(-1, plane_frame.shape[1])
    return bool(np.max(np.abs(vectors - vectors @ proj)) < tol)


def bump_fields(knot: DiscretizedKnot, vertex: int, directions) -> np.ndarray:
    """Fields supported at one vertex, one per direction, normal-projected."""
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    out = np.zeros((len(directions), knot.m, knot.n))
    out[:, vertex, :] = directions
    return project_normal(knot, out)


def lagrangian_probe(S: VcpStructure, C, knot: DiscretizedKnot, tangent_fields, outward_field,
                     tol: float = 1e-8) -> dict:
    """Discrete check that fields tangent to C pair to zero under omega^K, plus a witness
    that the tangent family cannot be enlarged by the outward field.

    The witness search scans bump fields at each vertex along C's frame directions,
    a finite proxy for the localization argument.
    """
    _check_fold(S, knot)
    cframe = np.asarray(getattr(C, "frame", C), dtype=float)
    if not (_inside(cframe, knot.vertices) and _inside(cframe, knot.frames)):
        raise KnotError("knot is not contained in the plane")
    fields = np.stack([_vectors(u) for u in tangent_fields])
    if not _inside(cframe, fields):
        raise KnotError("tangent fields leave the plane")
    worst = 0.0
    for a, b in itertools.combinations(range(len(fields)), 2):
        worst = max(worst, abs(omega_k(S, knot, fields[a], fields[b])))
    outward = _vectors(outward_field)
    witness = None
    for i in range(knot.m):
        bumps = bump_fields(knot, i, cframe)
        vals = omega_k_batch(S, knot, bumps, np.broadcast_to(outward, bumps.shape))
        j = int(np.argmax(np.abs(vals)))
        if abs(vals[j]) > tol:
            witness = {"vertex": i, "direction": cframe[j].tolist(), "value": float(vals[j])}
            break
    return {"vanishes_on_C": worst < tol, "max_pairing": worst, "maximality_witness": witness}


def isotropy_check(knot: DiscretizedKnot, omega: AlternatingTensor) -> float:
    if knot.s < 2:
        return 0.0
    worst = 0.0
    for a, b in itertools.combinations(range(knot.s), 2):
        vals = evaluate(omega, knot.frames[:, [a, b], :])
        worst = max(worst, float(np.max(np.abs(vals))))
    return worst


# isotropic-knot quotient ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class QuotientFiberData:
    basis: np.ndarray = field(repr=False)      # (m, 4, 2n): rows a, Ja, b, Jb
    omega_J: np.ndarray = field(repr=False)    # (m, 4, 4) form matrices in the fiber basis
    omega_I: np.ndarray = field(repr=False)
    omega_K: np.ndarray = field(repr=False)
    I: np.ndarray = field(repr=False)          # (m, 4, 4) endomorphisms in the fiber basis
    J: np.ndarray = field(repr=False)
    K: np.ndarray = field(repr=False)
    rank: np.ndarray = field(repr=False)       # fiber rank per vertex
    j_invariance: float = 0.0

    @property
    def m(self) -> int:
        return self.basis.shape[0]


def _fiber_basis(frame: np.ndarray, J: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    dist = np.vstack([frame, frame @ J.T])
    _, sv, vt = np.linalg.svd(dist)
    rank = int(np.sum(sv > tol))
    comp = vt[rank:]
    basis = []
    for v in comp:
        for b in basis:
            v = v - (v @ b) * b
        if np.linalg.norm(v) < tol:
            continue
        v = v / np.linalg.norm(v)
        jv = J @ v
        for b in basis:
            jv = jv - (jv @ b) * b
        jv /= np.linalg.norm(jv)
        basis += [v, jv]
        if len(basis) == len(comp):
            break
    return np.array(basis), rank


def quotient_structures(S: CVcpStructure, knot: DiscretizedKnot, tol: float = 1e-8) -> QuotientFiberData:
    if S.kind != "cy":
        raise KnotError("quotient fibers are built for the Calabi-Yau model")
    if knot.n != S.dim_real or knot.s != S.n - 2:
        raise KnotError(f"need an {S.n - 2}-dimensional knot in R^{S.dim_real}")
    iso = isotropy_check(knot, S.omega)
    if iso >= tol:
        raise KnotError(f"knot is not isotropic (residual {iso:.3g})")
    bases, ranks = [], []
    for frame in knot.frames:
        b, rank = _fiber_basis(frame, S.J)
        if rank != 2 * knot.s or len(b) != 4:
            raise KnotError("distribution T + JT has the wrong rank")
        bases.append(b)
        ranks.append(len(b))
    basis = np.array(bases)
    pairs = np.stack([np.stack([basis[:, p], basis[:, q]], axis=1) for p in range(4) for q in range(4)], axis=1)
    wj = evaluate(S.omega, pairs).reshape(-1, 4, 4)
    front = np.broadcast_to(knot.frames[:, None], (knot.m, 16) + knot.frames.shape[1:])
    full = np.concatenate([front, pairs], axis=2)
    c = S.Omega.evaluate(full).reshape(-1, 4, 4)
    wi, wk = c.real, -c.imag
    jmat = basis @ S.J @ np.swapaxes(basis, 1, 2)
    # J-invariance of the fiber: J maps basis vectors back into the fiber
    proj = np.swapaxes(basis, 1, 2) @ basis
    jb = basis @ S.J.T
    jinv = float(np.max(np.abs(jb - jb @ proj)))
    return QuotientFiberData(basis, wj, wi, wk, np.swapaxes(wi, 1, 2), jmat,
                             np.swapaxes(wk, 1, 2), np.array(ranks), jinv)


def hamilton_check(q: QuotientFiberData) -> dict:
    I, J, K = q.I, q.J, q.K
    ident = np.eye(4)
    parts = {
        "I2+1": I @ I + ident, "K2+1": K @ K + ident, "J2+1": J @ J + ident,
        "IJ+JI": I @ J + J @ I, "KJ+JK": K @ J + J @ K, "I+KJ": I + K @ J, "K-IJ": K - I @ J,
    }
    res = {name: float(np.max(np.abs(m))) for name, m in parts.items()}
    res["max"] = max(res.values())
    return res


def fiber_cvcp_defect(q: QuotientFiberData, samples: int = 200, seed: int = 0) -> float:
    """max | |iota_e (omega_I - i omega_K)| - 2 | over unit (1,0) fiber vectors."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    c = q.omega_I - 1j * q.omega_K
    for i in range(q.m):
        a = rng.standard_normal((samples, 4))
        a /= np.linalg.norm(a, axis=1, keepdims=True)
        e = (a - 1j * a @ q.J[i].T) / math.sqrt(2.0)
        covec = e @ c[i]
        worst = max(worst, float(np.max(np.abs(np.linalg.norm(covec, axis=1) - 2.0))))
    return worst


def _fiber_project(q: QuotientFiberData, fields) -> np.ndarray:
    """Fiber coordinates (F, m, 4) of fields (F, m, 2n)."""
    return np.einsum("mpn,fmn->fmp", q.basis, fields)


def complex_lagrangian_probe(S: CVcpStructure, q: QuotientFiberData, knot: DiscretizedKnot, C,
                             fields=None, tol: float = 1e-9) -> dict:
    """Which transgressed fiber forms vanish on fields tangent to C.

    By default the fields are the constant fields along C's frame directions
    together with their products with each coordinate function (constant
    fields alone can cancel around a closed knot). Each form's value is the
    max |omega_X^K(u, v)| over field pairs.
    """
    cframe = np.asarray(getattr(C, "frame", C), dtype=float)
    if not (_inside(cframe, knot.vertices) and _inside(cframe, knot.frames)):
        raise KnotError("knot is not contained in the plane")
    if fields is None:
        const = np.broadcast_to(cframe[:, None, :], (len(cframe), knot.m, knot.n))
        coords = [knot.vertices[:, a] for a in range(knot.n) if np.max(np.abs(knot.vertices[:, a])) > 1e-12]
        fields = np.concatenate([const] + [const * x[None, :, None] for x in coords])
    fields = np.asarray([_vectors(u) for u in fields])
    if not _inside(cframe, fields):
        raise KnotError("fields are not tangent to the plane")
    coords = _fiber_project(q, fields)
    out = {}
    for name, mats in (("omegaJ", q.omega_J), ("omegaI", q.omega_I), ("omegaK", q.omega_K)):
        worst = 0.0
        for a, b in itertools.combinations(range(len(coords)), 2):
            vals = np.einsum("mp,mpq,mq->m", coords[a], mats, coords[b])
            worst = max(worst, abs(_fsum(knot.weights * vals)))
        out[name] = worst
        out[f"{name}_vanishes"] = worst < tol
    return out


# the submersion inequality -----------------------------------------------------------------

def submersion_inequality_check(S: VcpStructure, knot: DiscretizedKnot, nu, mu) -> dict:
    nu, mu = _vectors(nu), _vectors(mu)
    lhs = omega_k(S, knot, nu, mu)
    nn, mm, nm = g_k(knot, nu, nu), g_k(knot, mu, mu), g_k(knot, nu, mu)
    rhs = math.sqrt(max(nn * mm - nm * nm, 0.0))
    ln, lm = np.linalg.norm(nu, axis=1), np.linalg.norm(mu, axis=1)
    ok = (ln > 1e-14) & (lm > 1e-14)
    w = knot.weights[ok]
    diag = {"ratio_variance": None, "angle_variance": None}
    if np.any(ok):
        ratio = ln[ok] / lm[ok]
        cosang = np.clip(np.einsum("mn,mn->m", nu[ok], mu[ok]) / (ln[ok] * lm[ok]), -1, 1)
        ang = np.arccos(cosang)

        def wvar(x):
            mean = _fsum(w * x) / _fsum(w)
            return _fsum(w * (x - mean) ** 2) / _fsum(w)

        diag = {"ratio_variance": wvar(ratio), "angle_variance": wvar(ang)}
    return {"lhs": lhs, "rhs": rhs, "slack": rhs - lhs, "holds": rhs - lhs >= -1e-10,
            "equality_diagnostics": diag}


# convenience fields ---------------------------------------------------------------------

def radial_field(knot: DiscretizedKnot, center=None) -> np.ndarray:
    """Unit outward field of a curve in its spanning plane (built-in circle: e_r)."""
    center = np.zeros(knot.n) if center is None else np.asarray(center, dtype=float)
    r = project_normal(knot, knot.vertices - center)
    return r / np.linalg.norm(r, axis=1, keepdims=True)


def constant_field(knot: DiscretizedKnot, vector) -> np.ndarray:
    return np.broadcast_to(np.asarray(vector, dtype=float), (knot.m, knot.n)).copy()
