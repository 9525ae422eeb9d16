"""Defect minimization over Grassmannians.

Planes are represented by orthonormal row frames F (k x n). Gradients are
central finite differences in the frame entries, projected horizontally
(G (I - F^T F)), followed by a QR retraction and a backtracking line search
that only accepts strict decrease.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .calibration import OrientedPlane, brane_test, instanton_test
from .exterior import evaluate
from .vcp import VcpStructure, tau_norm_sq

OBJECTIVES = ("instanton", "brane")
# descent continues below config.tol down to tol * POLISH so that converged
# planes also pass the square-root predicates (|tau| < tol rather than |tau|^2)
POLISH = 1e-10


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 50
    max_iter: int = 500
    step0: float = 0.1
    shrink: float = 0.5
    tol: float = 1e-10
    fd_step: float = 1e-5
    seed: int = 0

    def __post_init__(self):
        for name in ("restarts", "max_iter", "step0", "tol", "fd_step"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink must lie in (0, 1)")

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class OptResult:
    plane: OrientedPlane
    defect: float
    iterations: int
    converged: bool
    history: list = field(default_factory=list)
    seed: int | None = None

    def to_json(self, verbose: bool = False) -> dict:
        out = {"plane": self.plane.to_json(), "defect": self.defect,
               "iterations": self.iterations, "converged": self.converged, "seed": self.seed}
        if verbose:
            out["history"] = list(self.history)
        return out


def orthonormal_rows(rng: np.random.Generator, n: int, k: int, pivot_tol: float = 1e-8) -> np.ndarray:
    while True:
        g = rng.standard_normal((n, k))
        q, r = np.linalg.qr(g)
        d = np.diag(r)
        if np.min(np.abs(d)) > pivot_tol:
            return (q * np.sign(d)).T


def random_plane(n: int, k: int, seed: int | np.random.SeedSequence) -> OrientedPlane:
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    return OrientedPlane.from_frame(orthonormal_rows(np.random.default_rng(seed), n, k))


# objectives on (possibly batched) frames ------------------------------------

def _instanton_values(S: VcpStructure, frames) -> np.ndarray:
    return tau_norm_sq(S, frames)


def _brane_values(S: VcpStructure, frames) -> np.ndarray:
    frames = np.asarray(frames)
    k = frames.shape[-2]
    if S.phi.grade > k:
        return np.zeros(frames.shape[:-2])
    subsets = [list(s) for s in itertools.combinations(range(k), S.phi.grade)]
    vals = evaluate(S.phi, np.stack([frames[..., s, :] for s in subsets], axis=-3))
    return np.sum(vals * vals, axis=-1)


def objective_function(S: VcpStructure, objective: str):
    if objective == "instanton":
        return lambda frames: _instanton_values(S, frames)
    if objective == "brane":
        return lambda frames: _brane_values(S, frames)
    raise ValueError(f"unknown objective {objective!r}")


def instanton_defect(S: VcpStructure, P: OrientedPlane) -> float:
    if P.k != S.r + 1:
        raise ValueError(f"{S.label} instanton defect needs a {S.r + 1}-plane")
    return float(_instanton_values(S, P.frame))


def brane_residual(S: VcpStructure, C: OrientedPlane) -> float:
    return float(_brane_values(S, C.frame))


# gradient --------------------------------------------------------------------

def fd_gradient(f, frame: np.ndarray, h: float) -> np.ndarray:
    k, n = frame.shape
    eye = np.eye(k * n).reshape(k * n, k, n)
    batch = np.concatenate([frame + h * eye, frame - h * eye])
    vals = f(batch)
    return ((vals[: k * n] - vals[k * n:]) / (2 * h)).reshape(k, n)


def horizontal(frame: np.ndarray, grad: np.ndarray) -> np.ndarray:
    return grad - grad @ frame.T @ frame


def retract(frame: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(frame.T)
    return (q * np.sign(np.diag(r))).T


def richardson_gradient_check(S: VcpStructure, objective: str = "instanton", samples: int = 20,
                              seed: int = 0, h: float = 1e-3) -> float:
    """Relative disagreement of two Richardson extrapolants of the FD gradient.

    Central differences carry error c h^2 + O(h^4), so (4 g(h/2) - g(h)) / 3
    and (4 g(h/4) - g(h/2)) / 3 agree to O(h^4) when the objective is smooth
    and the difference code is consistent.
    """
    f = objective_function(S, objective)
    rng = np.random.default_rng(seed)
    k = S.r + 1 if objective == "instanton" else (S.n + S.r - 1) // 2
    worst = 0.0
    for _ in range(samples):
        frame = orthonormal_rows(rng, S.n, k)
        g1 = fd_gradient(f, frame, h)
        g2 = fd_gradient(f, frame, h / 2)
        g4 = fd_gradient(f, frame, h / 4)
        rich_a = (4 * g2 - g1) / 3
        rich_b = (4 * g4 - g2) / 3
        scale = max(np.linalg.norm(g4), 1e-12)
        worst = max(worst, float(np.linalg.norm(rich_a - rich_b) / scale))
    return worst


# descent ----------------------------------------------------------------------

def _descend(f, frame: np.ndarray, config: OptimizerConfig):
    value = float(f(frame))
    history = [value]
    step = config.step0
    it = 0
    floor = config.tol * POLISH
    while it < config.max_iter and value >= floor:
        grad = horizontal(frame, fd_gradient(f, frame, config.fd_step))
        gnorm2 = float(np.sum(grad * grad))
        if gnorm2 == 0.0:
            break
        t = min(2 * step, 1.0)
        accepted = False
        while t > 1e-14:
            cand = retract(frame - t * grad)
            cval = float(f(cand))
            if cval < value - 1e-4 * t * gnorm2 or (cval < value and t < 1e-8):
                accepted = True
                break
            t *= config.shrink
        if not accepted:
            break
        frame, value, step = cand, cval, t
        it += 1
        history.append(value)
    return frame, value, it, history


def _one_run(S, objective, k, config, seed_seq) -> OptResult:
    rng = np.random.default_rng(seed_seq)
    frame = orthonormal_rows(rng, S.n, k)
    f = objective_function(S, objective)
    frame, value, it, history = _descend(f, frame, config)
    return OptResult(OrientedPlane.from_frame(frame, tol=1e-10), value, it,
                     value < config.tol, history, int(seed_seq.generate_state(1)[0]))


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("CROSSCAL_THREADS", "1")))
    except ValueError:
        return 1


def minimize(S: VcpStructure, objective: str, k: int, config: OptimizerConfig | None = None,
             workers: int | None = None) -> list[OptResult]:
    """Run ``config.restarts`` independent descents; results are in restart order."""
    config = config or OptimizerConfig()
    if objective not in OBJECTIVES:
        raise ValueError(f"unknown objective {objective!r}")
    if objective == "instanton" and k != S.r + 1:
        raise ValueError(f"{S.label} instantons have dimension {S.r + 1}")
    if not 1 <= k <= S.n:
        raise ValueError(f"bad plane dimension {k}")
    seeds = np.random.SeedSequence(config.seed).spawn(config.restarts)
    workers = workers or thread_count()
    if workers == 1:
        return [_one_run(S, objective, k, config, s) for s in seeds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda s: _one_run(S, objective, k, config, s), seeds))


def summarize(S: VcpStructure, objective: str, results: list[OptResult], check_tol: float) -> dict:
    """Aggregate restarts and cross-check converged planes with the predicates."""
    verified = 0
    for res in results:
        if not res.converged:
            continue
        if objective == "instanton":
            ok = instanton_test(S, res.plane, check_tol)["is_instanton"]
        else:
            ok = brane_test(S, res.plane, check_tol)["form_vanishes"]
        verified += bool(ok)
    converged = sum(r.converged for r in results)
    return {
        "restarts": len(results),
        "converged": converged,
        "converged_fraction": converged / len(results) if results else 0.0,
        "verified": verified,
        "min_defect": min(r.defect for r in results),
        "max_defect": max(r.defect for r in results),
    }


def nonexistence_scan(S: VcpStructure, k: int = 5, config: OptimizerConfig | None = None,
                      workers: int | None = None) -> dict:
    """Search for Spin(7) branes; a positive floor on the residual is the expected outcome."""
    if S.kind != "spin7" or k != 5:
        raise ValueError("the nonexistence scan is defined for Spin7 with k = 5")
    config = config or OptimizerConfig(restarts=100)
    if config.restarts < 100:
        config = OptimizerConfig(**{**config.to_json(), "restarts": 100})
    runs = minimize(S, "brane", k, config, workers)
    return {
        "min_residual": min(r.defect for r in runs),
        "converged": sum(r.converged for r in runs),
        "restarts": len(runs),
        "runs": runs,
    }
