"""Oriented planes and pointwise calibration predicates.

Every predicate takes an explicit tolerance (default 1e-8). Predicates that
only make sense up to orientation align the plane first by flipping its last
frame vector and say so in the returned record.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .complex_vcp import CVcpStructure, j_invariance_residual
from .exterior import (
    AlternatingTensor,
    evaluate,
    hodge_star,
    interior_vectors,
    norm,
    restrict,
    wedge_all,
)
from .vcp import VcpStructure, chi, random_frames, tau_matrix, tau_norm_sq

DEFAULT_TOL = 1e-8


class PlaneError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class OrientedPlane:
    dim_ambient: int
    k: int
    frame: np.ndarray = field(repr=False)
    xi: AlternatingTensor = field(repr=False)

    @classmethod
    def from_frame(cls, frame, tol: float = 1e-12) -> OrientedPlane:
        frame = np.atleast_2d(np.asarray(frame, dtype=float)).copy()
        k, n = frame.shape
        if not 1 <= k <= n:
            raise PlaneError(f"cannot have a {k}-plane in R^{n}")
        err = np.max(np.abs(frame @ frame.T - np.eye(k)))
        if err > tol:
            raise PlaneError(f"frame is not orthonormal (residual {err:.3g})")
        frame.setflags(write=False)
        return cls(n, k, frame, AlternatingTensor.from_vectors(frame))

    @classmethod
    def from_vectors(cls, vectors) -> OrientedPlane:
        """Orthonormalize independent vectors, keeping their orientation."""
        vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
        q, r = np.linalg.qr(vectors.T)
        d = np.diag(r)
        if np.min(np.abs(d)) < 1e-10 * max(1.0, np.max(np.abs(d))):
            raise PlaneError("vectors are linearly dependent")
        return cls.from_frame((q * np.sign(d)).T)

    @classmethod
    def coordinate(cls, n: int, labels) -> OrientedPlane:
        """span(e_i for i in labels), 1-based labels, in the given order."""
        return cls.from_frame(np.eye(n)[[i - 1 for i in labels]])

    def flipped(self) -> OrientedPlane:
        f = np.array(self.frame)
        f[-1] *= -1
        return OrientedPlane.from_frame(f)

    def projector(self) -> np.ndarray:
        return self.frame.T @ self.frame

    def contains(self, vectors, tol: float = 1e-10) -> bool:
        v = np.atleast_2d(np.asarray(vectors, dtype=float))
        return bool(np.max(np.abs(v - v @ self.projector())) < tol)

    def to_json(self) -> dict:
        return {"dim": self.dim_ambient, "frame": self.frame.tolist()}

    @classmethod
    def from_json(cls, data) -> OrientedPlane:
        try:
            frame = np.asarray(data["frame"], dtype=float)
            dim = int(data["dim"])
        except (KeyError, TypeError, ValueError) as exc:
            raise PlaneError(f"malformed plane JSON: {exc}") from exc
        if frame.ndim != 2 or frame.shape[1] != dim:
            raise PlaneError("frame rows must have length dim")
        return cls.from_frame(frame, tol=1e-10)


def calibration_value(phi: AlternatingTensor, P: OrientedPlane) -> float:
    if phi.grade != P.k:
        raise PlaneError(f"grade {phi.grade} form on a {P.k}-plane")
    return float(evaluate(phi, P.frame))


def instanton_test(S: VcpStructure, P: OrientedPlane, tol: float = DEFAULT_TOL) -> dict:
    if P.k != S.r + 1 or P.dim_ambient != S.n:
        raise PlaneError(f"{S.label} instantons are {S.r + 1}-planes in R^{S.n}")
    cal = calibration_value(S.phi, P)
    tau_norm = math.sqrt(max(float(tau_norm_sq(S, P.frame)), 0.0))
    is_inst = tau_norm < tol
    return {
        "is_instanton": is_inst,
        "tau_norm": tau_norm,
        "cal_value": abs(cal),
        "orientation_flipped": cal < 0,
        "equivalence_holds": is_inst == (abs(cal) > 1 - tol),
    }


def brane_test(S: VcpStructure, C: OrientedPlane, tol: float = DEFAULT_TOL) -> dict:
    residual = norm(restrict(S.phi, C))
    form_vanishes = residual < tol
    dim_ok = 2 * C.k == S.n + S.r - 1
    return {"form_vanishes": form_vanishes, "dim_ok": dim_ok,
            "is_brane": form_vanishes and dim_ok, "residual": residual}


def g2_orientation_sign(phi: AlternatingTensor) -> int:
    """Sign of the orientation a G2 3-form induces relative to e_1 ^ ... ^ e_7.

    Uses (iota_u phi)^2 ^ phi, which is a positive multiple of |u|^2 vol_phi.
    """
    if phi.dim != 7 or phi.grade != 3:
        raise PlaneError("induced orientation is defined for 3-forms on R^7")
    a = interior_vectors(np.eye(7)[:1], phi)
    top = wedge_all([a, a, phi])
    c = top.coeff(tuple(range(7)))
    if abs(c) < 1e-12:
        raise PlaneError("form is degenerate")
    return 1 if c > 0 else -1


def orient_coassociative(S: VcpStructure, C: OrientedPlane) -> tuple[OrientedPlane, bool]:
    """Orient a G2 brane so that it is calibrated by the dual 4-form *phi.

    The Hodge star is taken with respect to the orientation phi induces.
    """
    star = hodge_star(S.phi) * g2_orientation_sign(S.phi)
    if calibration_value(star, C) < 0:
        return C.flipped(), True
    return C, False


def t_map(S: VcpStructure, C: OrientedPlane, alpha, tol: float = DEFAULT_TOL) -> dict:
    """t(alpha)(u_1..u_r) = alpha(chi(u_1..u_r)) as a form on C's frame basis.

    For G2 the plane is first oriented by the induced orientation and the
    report includes the self-duality residual of t(alpha) on C.
    """
    alpha = np.asarray(alpha, dtype=float)
    if not brane_test(S, C, tol)["is_brane"]:
        raise PlaneError(f"plane is not a brane for {S.label}")
    if abs(np.linalg.norm(alpha) - 1.0) > 1e-10:
        raise PlaneError("alpha must be a unit covector")
    if np.max(np.abs(C.frame @ alpha)) > 1e-10:
        raise PlaneError("alpha is not normal to the plane")
    flipped = False
    if S.kind == "g2":
        C, flipped = orient_coassociative(S, C)
    keys = list(itertools.combinations(range(C.k), S.r))
    vals = chi(S, np.stack([C.frame[list(key)] for key in keys])) @ alpha
    form = AlternatingTensor(C.k, S.r, dict(zip(keys, vals)))
    out = {"form": form, "plane": C, "orientation_flipped": flipped}
    if S.kind == "g2":
        out["self_dual_residual"] = norm(form - hodge_star(form))
        out["anti_self_dual_residual"] = norm(form + hodge_star(form))
    return out


def boundary_orthogonality_check(S: VcpStructure, A: OrientedPlane, u, C: OrientedPlane,
                                 tol: float = DEFAULT_TOL) -> dict:
    """Whether chi(u_1..u_r) is perpendicular to C for u_i spanning a hyperplane of A in C."""
    u = np.atleast_2d(np.asarray(u, dtype=float))
    failures = []
    if A.k != S.r + 1 or not instanton_test(S, A, tol)["is_instanton"]:
        failures.append("A is not an instanton")
    if u.shape != (S.r, S.n) or np.max(np.abs(u @ u.T - np.eye(len(u)))) > 1e-10:
        failures.append("u is not an orthonormal r-frame")
    elif not (A.contains(u) and C.contains(u)):
        failures.append("u does not lie in both A and C")
    if norm(restrict(S.phi, C)) >= tol:
        failures.append("phi does not vanish on C")
    if failures:
        return {"preconditions_ok": False, "failures": failures, "orthogonal": None, "residual": None}
    w = chi(S, u)
    residual = float(np.linalg.norm(C.frame @ w))
    return {"preconditions_ok": True, "failures": [], "orthogonal": residual < 1e-10, "residual": residual}


def classify_complex_plane(S: CVcpStructure, P: OrientedPlane, theta: float = 0.0,
                           tol: float = DEFAULT_TOL) -> dict:
    n = S.n
    rot = S.Omega.phase_rotate(theta)
    omega_res = norm(restrict(S.omega, P))
    re_res = norm(restrict(rot.re, P))
    im_res = norm(restrict(rot.im, P))
    out = {"slag_phase_theta": False, "nbrane": False, "dbrane_phase_theta": False,
           "orientation_flipped": False, "omega_residual": omega_res,
           "re_residual": re_res, "im_residual": im_res}
    if P.k == n:
        if S.Omega.grade == P.k:
            val = calibration_value(rot.re, P)
            out["cal_value"] = abs(val)
            out["orientation_flipped"] = val < 0
            out["slag_phase_theta"] = omega_res < tol and im_res < tol and abs(abs(val) - 1) < tol
        out["dbrane_phase_theta"] = omega_res < tol and re_res < tol
    if P.k == n + S.r - 1:
        j_res = j_invariance_residual(S.J, P.frame)
        out["j_invariance_residual"] = j_res
        out["nbrane"] = (norm(restrict(S.Omega.re, P)) < tol and norm(restrict(S.Omega.im, P)) < tol
                         and j_res < tol)
    return out


def hk_instanton_test(S: CVcpStructure, P: OrientedPlane, theta: float = 0.0,
                      tol: float = DEFAULT_TOL) -> dict:
    if S.kind != "hk":
        raise PlaneError("hyperkahler structure required")
    if P.k != 2:
        raise PlaneError("hyperkahler instantons are 2-planes")
    value = calibration_value(S.Omega.phase_rotate(theta).re, P)
    j_theta = math.cos(theta) * S.I + math.sin(theta) * S.K
    invariant = j_invariance_residual(j_theta, P.frame) < tol
    is_inst = abs(value - 1.0) < tol
    return {"is_instanton": is_inst, "value": value, "j_theta_invariant": invariant,
            "consistent": (not is_inst) or invariant}


def involution_fixed_check(S: VcpStructure, sigma, samples: int = 1000, seed: int = 0,
                           tol: float = DEFAULT_TOL) -> dict:
    sigma = np.asarray(sigma, dtype=float)
    ident = np.eye(S.n)
    if sigma.shape != (S.n, S.n) or np.max(np.abs(sigma @ sigma - ident)) > 1e-10:
        raise PlaneError("sigma is not an involution")
    if np.max(np.abs(sigma.T @ sigma - ident)) > 1e-10:
        raise PlaneError("sigma is not orthogonal")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((samples, S.r, S.n))
    res = np.max(np.abs(chi(S, v) @ sigma.T - chi(S, v @ sigma.T)))
    evals, evecs = np.linalg.eigh(0.5 * (sigma + sigma.T))
    fixed = evecs[:, evals > 0].T
    out = {"preserves_chi": bool(res < 1e-9), "chi_residual": float(res),
           "fixed_dim": int(fixed.shape[0]), "fixed_is_instanton": None}
    if fixed.shape[0] == S.r + 1:
        rep = instanton_test(S, OrientedPlane.from_frame(fixed, tol=1e-10), tol)
        out["fixed_is_instanton"] = rep["is_instanton"]
    return out


# sampled invariants ---------------------------------------------------------

def equivalence_scan(S: VcpStructure, samples: int = 10_000, seed: int = 0,
                     tol: float = DEFAULT_TOL, extra_planes=()) -> dict:
    """Count planes where |phi(xi)| = 1 and tau = 0 disagree."""
    rng = np.random.default_rng(seed)
    frames = random_frames(rng, S.n, S.r + 1, samples)
    if extra_planes:
        frames = np.concatenate([frames, np.stack([P.frame for P in extra_planes])])
    cal = np.abs(evaluate(S.phi, frames))
    tn = np.sqrt(np.maximum(tau_norm_sq(S, frames), 0.0))
    calibrated = cal > 1 - tol
    instanton = tn < tol
    return {"samples": int(len(frames)), "discrepancies": int(np.sum(calibrated != instanton)),
            "calibrated": int(calibrated.sum()), "max_cal": float(cal.max())}


def comass_scan(S: VcpStructure, samples: int = 100_000, seed: int = 0) -> float:
    rng = np.random.default_rng(seed)
    frames = random_frames(rng, S.n, S.r + 1, samples)
    return float(np.max(np.abs(evaluate(S.phi, frames))))


def normal_closure_residual(S: VcpStructure, P: OrientedPlane, samples: int = 200, seed: int = 0) -> float:
    """Tangential part of chi(u_1..u_{r-1}, nu) for u_i in P and nu normal to P."""
    rng = np.random.default_rng(seed)
    proj = P.projector()
    u = rng.standard_normal((samples, S.r - 1, P.k)) @ P.frame
    nu = rng.standard_normal((samples, S.n))
    nu = nu - nu @ proj
    w = chi(S, np.concatenate([u, nu[:, None, :]], axis=1))
    return float(np.max(np.linalg.norm(w @ proj, axis=-1)))


def tau_decomposition_residual(S: VcpStructure, P: OrientedPlane, samples: int = 200, seed: int = 0) -> float:
    """Components of tau(p_1..p_r, n) in Lambda^2 P and Lambda^2 N."""
    rng = np.random.default_rng(seed)
    proj = P.projector()
    nproj = np.eye(S.n) - proj
    p = rng.standard_normal((samples, S.r, P.k)) @ P.frame
    nvec = rng.standard_normal((samples, S.n)) @ nproj
    t = tau_matrix(S, np.concatenate([p, nvec[:, None, :]], axis=1))
    tp = proj @ t @ proj
    tn = nproj @ t @ nproj
    return float(max(np.max(np.abs(tp)), np.max(np.abs(tn))))
