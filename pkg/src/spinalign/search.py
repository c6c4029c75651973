"""Randomized local search over pure-state tuples.

Results are evidence only: a search that finds nothing proves nothing, and
a reported violation is either a counterexample or a bug.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .alignment import ProblemInstance, build_alignment_operator, conjectured_operator
from .majorization import DEFAULT_TOL, descending_version, majorization_gaps, majorizes
from .norms import Objective
from .tensor import all_subsets, hermitian_eig, hermitian_spectrum, projector_onto, random_density, random_unitary

NO_VIOLATION = "no_violation"
VIOLATION = "violation"
EVIDENCE = "evidence"

PRESETS = ("schatten-nonint", "separable-kyfan")


@dataclass(frozen=True)
class SearchConfig:
    objective: Objective
    restarts: int = 20
    steps: int = 200
    step_size: float = 0.5
    seed: int = 0
    tol: float = 1e-7

    def __post_init__(self):
        if isinstance(self.objective, str):
            object.__setattr__(self, "objective", Objective.parse(self.objective))
        if self.restarts < 1 or self.steps < 1:
            raise ValueError("restarts and steps must be at least 1")
        if self.step_size <= 0:
            raise ValueError("step_size must be positive")

    def echo(self) -> dict:
        return {
            "objective": str(self.objective),
            "restarts": self.restarts,
            "steps": self.steps,
            "step_size": self.step_size,
            "seed": self.seed,
            "tol": self.tol,
        }


@dataclass
class SearchReport:
    best_value: float
    best_tuple: dict
    conjectured_value: float
    gap: float
    traces: list
    verdict: str
    best_restart: int
    label: str = EVIDENCE

    def summary(self) -> dict:
        return {
            "best_value": self.best_value,
            "conjectured_value": self.conjectured_value,
            "gap": self.gap,
            "verdict": self.verdict,
            "best_restart": self.best_restart,
            "label": self.label,
        }


def restart_rng(seed: int, restart: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, restart]))


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _climb(inst: ProblemInstance, cfg: SearchConfig, rng: np.random.Generator):
    support = inst.support
    sizes = [inst.d ** len(s) for s in support]

    def value(vecs):
        states = {s: projector_onto(v) for s, v in zip(support, vecs)}
        return cfg.objective.on_operator(build_alignment_operator(inst, states, check=False))

    vecs = [_unit(rng.standard_normal(k) + 1j * rng.standard_normal(k)) for k in sizes]
    cur = value(vecs)
    trace = [cur]
    for t in range(cfg.steps):
        # geometric anneal from step_size down to step_size / 100
        step = cfg.step_size * 0.01 ** (t / max(cfg.steps - 1, 1))
        cand = [_unit(v + step * (rng.standard_normal(k) + 1j * rng.standard_normal(k))) for v, k in zip(vecs, sizes)]
        val = value(cand)
        if val > cur:
            vecs, cur = cand, val
        trace.append(cur)
    return vecs, cur, trace


def hill_climb(inst: ProblemInstance, cfg: SearchConfig) -> SearchReport:
    """Best objective over pure tuples found by perturb-and-accept, versus the conjectured tuple."""
    conj = cfg.objective.on_operator(conjectured_operator(inst))
    best_val, best_vecs, best_r = -np.inf, None, -1
    traces = []
    for r in range(cfg.restarts):
        vecs, val, trace = _climb(inst, cfg, restart_rng(cfg.seed, r))
        traces.append(trace)
        if val > best_val:
            best_val, best_vecs, best_r = val, vecs, r
    gap = float(best_val - conj)
    return SearchReport(
        best_value=float(best_val),
        best_tuple=dict(zip(inst.support, best_vecs)),
        conjectured_value=float(conj),
        gap=gap,
        traces=traces,
        verdict=VIOLATION if gap > cfg.tol else NO_VIOLATION,
        best_restart=best_r,
    )


def counterexample_hunt(instances, cfg: SearchConfig) -> list[SearchReport]:
    """Run ``hill_climb`` on each instance, splitting ``cfg.restarts`` between them."""
    instances = list(instances)
    if not instances:
        return []
    share = max(1, cfg.restarts // len(instances))
    out = []
    for i, inst in enumerate(instances):
        sub = SearchConfig(cfg.objective, share, cfg.steps, cfg.step_size, cfg.seed + i, cfg.tol)
        out.append(hill_climb(inst, sub))
    return out


def violations(reports) -> list[int]:
    return [i for i, r in enumerate(reports) if r.verdict == VIOLATION]


# ---------------------------------------------------------------------------
# mixing a state with a rotated pure state


@dataclass
class GammaSweep:
    gammas: np.ndarray
    spectra: np.ndarray
    reference: np.ndarray
    flagged: list = field(default_factory=list)
    label: str = EVIDENCE


def gamma_sweep(tau, alpha_index: int, grid: int, p=(0.5, 0.5), tol: float = DEFAULT_TOL) -> GammaSweep:
    """Spectra of ``p1 tau + p2 |v_g><v_g|`` with ``v_g = sqrt(g) alpha + sqrt(1-g) e``.

    ``alpha`` is the ``alpha_index``-th eigenvector of ``tau`` (1-based,
    eigenvalues descending, must lie in the support) and ``e`` is the last
    kernel eigenvector. Grid points whose spectrum is not majorized by the
    ``g = 1`` spectrum are flagged.
    """
    if grid < 2:
        raise ValueError("grid needs at least two points")
    p1, p2 = (float(x) for x in p)
    if p1 < 0 or p2 < 0 or abs(p1 + p2 - 1) > 1e-9:
        raise ValueError("p must be a probability pair")
    lam, vecs = hermitian_eig(tau)
    scale = max(1.0, float(np.abs(lam).sum()))
    rank = int(np.sum(lam > 1e-10 * scale))
    if rank == lam.size:
        raise ValueError("tau has full rank: no kernel vector")
    if not 1 <= alpha_index <= rank:
        raise ValueError(f"alpha_index must lie in 1..{rank} (the support of tau)")
    alpha, e = vecs[:, alpha_index - 1], vecs[:, -1]
    gammas = np.linspace(0.0, 1.0, grid)
    spectra = np.array(
        [hermitian_spectrum(p1 * tau + p2 * projector_onto(np.sqrt(g) * alpha + np.sqrt(1 - g) * e)) for g in gammas]
    )
    ref = spectra[-1]
    flagged = [float(g) for g, s in zip(gammas, spectra) if not majorizes(ref, s, tol)]
    return GammaSweep(gammas, spectra, ref, flagged)


# ---------------------------------------------------------------------------
# presets for open questions


def random_instance(d: int, n: int, rng: np.random.Generator, flat: bool = False) -> ProblemInstance:
    """Random ``Q`` spectrum and a random measure on a random family of subsets."""
    if flat:
        q = np.full(d, 1.0 / d)
    else:
        q = -np.sort(-rng.dirichlet(np.ones(d)))
    subsets = all_subsets(n)
    mask = rng.random(len(subsets)) < 0.5
    if not mask.any():
        mask[rng.integers(len(subsets))] = True
    chosen = [s for s, m in zip(subsets, mask) if m]
    w = rng.dirichlet(np.ones(len(chosen)))
    return ProblemInstance(d, n, tuple(q / q.sum()), {s: x for s, x in zip(chosen, w / w.sum())})


def _kyfan_excess(a0, a1, b0, b1) -> float:
    given = np.kron(a0, b0) + np.kron(a1, b1)
    aligned = np.kron(descending_version(a0), descending_version(b0)) + np.kron(
        descending_version(a1), descending_version(b1)
    )
    return float(-majorization_gaps(hermitian_spectrum(aligned), hermitian_spectrum(given)).min())


def separable_kyfan_search(dims=(2, 2), restarts: int = 10, steps: int = 100, seed: int = 0, tol: float = 1e-7) -> dict:
    """Hill-climb the largest prefix-sum excess of the separable sum over the aligned one.

    The four positive operators keep their spectra; only their eigenbases move.
    """
    da, db = dims
    best, traces = -np.inf, []
    for r in range(restarts):
        rng = restart_rng(seed, r)
        spectra = [np.diag(hermitian_spectrum(random_density(k, rng))) for k in (da, da, db, db)]
        frames = [random_unitary(k, rng) for k in (da, da, db, db)]

        def excess(fr):
            ops = [u @ s @ u.conj().T for u, s in zip(fr, spectra)]
            return _kyfan_excess(*ops)

        cur = excess(frames)
        trace = [cur]
        for t in range(steps):
            step = 0.5 * 0.01 ** (t / max(steps - 1, 1))
            cand = []
            for u in frames:
                g = rng.standard_normal(u.shape) + 1j * rng.standard_normal(u.shape)
                q, rr = np.linalg.qr(u + step * g)
                cand.append(q * (np.diag(rr) / np.abs(np.diag(rr))))
            val = excess(cand)
            if val > cur:
                frames, cur = cand, val
            trace.append(cur)
        traces.append(trace)
        best = max(best, cur)
    return {
        "preset": "separable-kyfan",
        "dims": list(dims),
        "max_excess": float(best),
        "verdict": VIOLATION if best > tol else NO_VIOLATION,
        "label": EVIDENCE,
        "final_per_restart": [float(t[-1]) for t in traces],
    }


def schatten_nonint_search(restarts: int = 10, steps: int = 100, seed: int = 0, tol: float = 1e-7) -> dict:
    """Hill-climb Schatten orders 1.5 and 2.5 on a few small random instances."""
    rng = np.random.default_rng(seed)
    shapes = [(2, 2), (2, 3), (3, 2)]
    runs = []
    for i, (d, n) in enumerate(shapes):
        inst = random_instance(d, n, rng)
        for p in (1.5, 2.5):
            cfg = SearchConfig(Objective("schatten", p), restarts, steps, 0.5, seed + i, tol)
            rep = hill_climb(inst, cfg)
            runs.append({"d": d, "n": n, "p": p, **rep.summary()})
    worst = max(r["gap"] for r in runs)
    return {
        "preset": "schatten-nonint",
        "runs": runs,
        "max_gap": worst,
        "verdict": VIOLATION if worst > tol else NO_VIOLATION,
        "label": EVIDENCE,
    }


def run_preset(name: str, restarts: int = 10, steps: int = 100, seed: int = 0) -> dict:
    if name == "schatten-nonint":
        return schatten_nonint_search(restarts, steps, seed)
    if name == "separable-kyfan":
        return separable_kyfan_search((2, 2), restarts, steps, seed)
    raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
