"""Invariant suites, one per structure, reported as flat records.

Each record is ``{"check", "samples", "max_residual", "tol", "pass"}`` plus
optional extra fields. Suites are lists of independent thunks so they can
be evaluated on a thread pool and still come back in a fixed order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .calibration import OrientedPlane, classify_complex_plane, comass_scan, equivalence_scan
from .complex_vcp import (
    CVcpStructure,
    cvcp_defect,
    hamilton_residuals,
    hk_triple,
    kahler_compatibility_residual,
    make_cvcp,
    volume_pairing,
)
from .vcp import (
    VcpStructure,
    automorphism_algebra,
    chi_axiom_residuals,
    make_structure,
    norm_identity_residual,
    tau_pairing_residual,
    vcp_form_defect,
)

VCP_KINDS = ("complex", "volume", "g2", "spin7")
CVCP_KINDS = ("cy", "hk")


def expected_algebra_dim(S: VcpStructure) -> int:
    if S.kind == "complex":
        return S.param ** 2
    if S.kind == "volume":
        return S.n * (S.n - 1) // 2
    return {"g2": 14, "spin7": 21}[S.kind]


def load_structure(kind: str, param: int | None):
    if kind in CVCP_KINDS:
        if param is None:
            raise ValueError(f"{kind} needs a parameter, e.g. {kind}:2")
        return make_cvcp(kind, param)
    return make_structure(kind, param)


def record(check: str, samples: int, residual: float, tol: float, ok: bool | None = None, **extra) -> dict:
    residual = float(residual)
    out = {"check": check, "samples": int(samples), "max_residual": residual, "tol": tol,
           "pass": bool(residual < tol) if ok is None else bool(ok)}
    out.update(extra)
    return out


def _known_planes(S: VcpStructure) -> list[OrientedPlane]:
    planes = [OrientedPlane.coordinate(S.n, range(1, S.r + 2))]
    if S.kind == "complex":
        planes = [OrientedPlane.coordinate(S.n, (2 * j + 1, 2 * j + 2)) for j in range(S.param)]
    return planes


def vcp_suite(S: VcpStructure, samples: int, seed: int, tol: float) -> list:
    def form():
        d, _ = vcp_form_defect(S.phi, S.r, samples, seed)
        return record("vcp_form_defect", samples, d, tol)

    def axioms():
        res = chi_axiom_residuals(S, samples, seed + 1)
        return [record("chi_orthogonality", samples, res["orthogonality"], tol),
                record("chi_norm", samples, res["norm"], tol)]

    def norm_identity():
        return record("tau_norm_identity", samples, norm_identity_residual(S, samples, seed + 2), tol)

    def algebra():
        alg = automorphism_algebra(S)
        want = expected_algebra_dim(S)
        gap_ok = alg.gap > 1e6
        return [
            record("automorphism_dim", 0, abs(alg.dim - want), 0.5, ok=alg.dim == want and gap_ok,
                   dim=alg.dim, expected=want, gap=alg.gap),
            record("tau_g_pairing", min(samples, 1000),
                   tau_pairing_residual(S, alg, min(samples, 1000), seed + 3), tol),
        ]

    def equivalence():
        scan = equivalence_scan(S, samples, seed + 4, 1e-8, _known_planes(S))
        return record("instanton_calibration_equivalence", scan["samples"], scan["discrepancies"], 0.5,
                      calibrated=scan["calibrated"])

    def comass():
        top = comass_scan(S, samples, seed + 5)
        return record("comass", samples, max(top - 1.0, 0.0), tol, max_value=top)

    return [form, axioms, norm_identity, algebra, equivalence, comass]


def cvcp_suite(S: CVcpStructure, samples: int, seed: int, tol: float, theta: float = 0.0) -> list:
    def normalization():
        res = cvcp_defect(S, samples, seed)
        return [record("cvcp_defect", samples, res["defect"], tol, target=res["target"]),
                record("cvcp_type", samples, res["type_residual"], tol)]

    def kahler():
        return record("kahler_compatibility", 0, kahler_compatibility_residual(S), tol)

    thunks = [normalization, kahler]
    if S.kind == "hk":
        def hamilton():
            res = hamilton_residuals(*hk_triple(S))
            return record("hamilton_relation", 0, max(res.values()), tol, residuals=res)
        thunks.append(hamilton)
    else:
        def pairing():
            res = volume_pairing(S)
            return record("volume_pairing", 0, res["residual"], tol, ok=res["residual"] < tol and res["nonzero"],
                          c=res["c"], quoted_constant=res["quoted_constant"],
                          matches_quoted=res["matches_quoted"])

        def model_planes():
            n = S.n
            real = OrientedPlane.coordinate(2 * n, [2 * j + 1 for j in range(n)])
            rotated = OrientedPlane.coordinate(2 * n, [2 * j + 1 for j in range(n - 1)] + [2 * n])
            hyper = OrientedPlane.coordinate(2 * n, list(range(3, 2 * n + 1)))
            a = classify_complex_plane(S, real, theta, tol)
            b = classify_complex_plane(S, rotated, theta - math.pi / 2, tol)
            c = classify_complex_plane(S, hyper, theta, tol)
            worst = max(a["omega_residual"], a["im_residual"], b["im_residual"], c["re_residual"], c["im_residual"])
            ok = a["slag_phase_theta"] and b["slag_phase_theta"] and c["nbrane"]
            return record("model_plane_classification", 3, worst, tol, ok=ok, theta=theta)

        thunks += [pairing, model_planes]
    return thunks


def run_suite(S, samples: int = 10_000, seed: int = 0, tol: float = 1e-9, theta: float = 0.0,
              workers: int = 1) -> list:
    thunks = cvcp_suite(S, samples, seed, tol, theta) if isinstance(S, CVcpStructure) else vcp_suite(S, samples, seed, tol)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda t: t(), thunks))
    else:
        results = [t() for t in thunks]
    out = []
    for res in results:
        out.extend(res if isinstance(res, list) else [res])
    return out


def jsonable(obj):
    """Replace non-finite floats and numpy scalars so the report is strict JSON."""
    if isinstance(obj, dict):
        return {k: jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    return obj
