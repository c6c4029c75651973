"""Spin alignment instances, alignment operators and the alignment preorder.

An instance fixes a local dimension ``d``, ``n`` sites, the spectrum of a
qudit state ``Q`` (taken diagonal in the computational basis, entries
non-increasing) and a probability measure ``mu`` on subsets of sites. For a
state tuple ``(rho_I)`` the alignment operator is

    sum_I mu_I  rho_I (x) Q^(x) I^c

with each factor at its true site position. The conjectured optimum puts
``|q_1><q_1|`` (the first computational basis vector) on every site of every
``I``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .majorization import DEFAULT_TOL, descending_version, majorization_gaps
from .norms import Objective
from .tensor import (
    SiteLayout,
    all_subsets,
    as_subset,
    check_dimension,
    dimension_cap,
    hermitian_eig,
    hermitian_spectrum,
    hermitize,
    kron_all,
    lift,
    partial_trace,
    projector_onto,
)

WEIGHT_TOL = 1e-12
STATE_TOL = 1e-10

MORE_ALIGNED = "more_aligned_on_samples"
VIOLATED = "violated"


def subset_key(subset: Iterable[int]) -> tuple:
    s = sorted(subset)
    return (len(s), tuple(s))


@dataclass(frozen=True)
class ProblemInstance:
    d: int
    n: int
    qspec: tuple
    mu: Mapping[frozenset, float] = field(compare=True)
    cap: int | None = None

    def __post_init__(self):
        if self.d < 1 or self.n < 0:
            raise ValueError("need d >= 1 and n >= 0")
        q = tuple(float(x) for x in self.qspec)
        object.__setattr__(self, "qspec", q)
        if len(q) != self.d:
            raise ValueError(f"Q spectrum must have length d={self.d}")
        if any(q[i] < q[i + 1] for i in range(len(q) - 1)):
            raise ValueError("Q spectrum must be non-increasing")
        if min(q) < -STATE_TOL or abs(sum(q) - 1) > WEIGHT_TOL:
            raise ValueError("Q spectrum must be a probability vector")
        mu = {}
        for key, w in dict(self.mu).items():
            sub = as_subset(key)
            if any(not 1 <= s <= self.n for s in sub):
                raise ValueError(f"subset {sorted(sub)} has sites outside 1..{self.n}")
            if sub in mu:
                raise ValueError(f"duplicate subset {sorted(sub)}")
            if w < 0:
                raise ValueError("mu weights must be non-negative")
            mu[sub] = float(w)
        if abs(sum(mu.values()) - 1) > WEIGHT_TOL:
            raise ValueError("mu weights must sum to 1")
        object.__setattr__(self, "mu", mu)
        check_dimension(self.d**self.n, self.cap if self.cap is not None else dimension_cap())

    @property
    def layout(self) -> SiteLayout:
        return SiteLayout(self.d, self.n)

    @property
    def dim(self) -> int:
        return self.d**self.n

    @property
    def q(self) -> np.ndarray:
        return np.array(self.qspec)

    @property
    def support(self) -> list[frozenset]:
        """Subsets with positive weight in a canonical order (size, then sites)."""
        return sorted((s for s, w in self.mu.items() if w > 0), key=subset_key)

    def weight(self, subset) -> float:
        return self.mu.get(as_subset(subset), 0.0)


@dataclass
class Witness:
    p: list
    k: int
    gap: float


@dataclass
class AlignmentVerdict:
    outcome: str
    witness: Witness | None
    samples_checked: int

    @property
    def ok(self) -> bool:
        return self.outcome == MORE_ALIGNED


# ---------------------------------------------------------------------------
# operators


def check_state_tuple(inst: ProblemInstance, states: Mapping) -> None:
    for sub in inst.support:
        if sub not in states:
            raise KeyError(f"state tuple is missing subset {sorted(sub)}")
        rho = np.asarray(states[sub])
        k = inst.d ** len(sub)
        if rho.shape != (k, k):
            raise ValueError(f"bad term dimension for subset {sorted(sub)}")
        lam = hermitian_spectrum(rho)
        if lam[-1] < -STATE_TOL or abs(lam.sum() - 1) > STATE_TOL:
            raise ValueError(f"entry for subset {sorted(sub)} is not a density operator")


def alignment_terms(inst: ProblemInstance, states: Mapping) -> list[np.ndarray]:
    """Unweighted lifted terms ``rho_I (x) Q^I^c`` in support order."""
    states = {as_subset(k): v for k, v in states.items()}
    out = []
    for sub in inst.support:
        if sub not in states:
            raise KeyError(f"state tuple is missing subset {sorted(sub)}")
        out.append(lift(inst.layout, sub, states[sub], inst.q))
    return out


def build_alignment_operator(inst: ProblemInstance, states: Mapping, check: bool = True) -> np.ndarray:
    states = {as_subset(k): v for k, v in states.items()}
    if check:
        check_state_tuple(inst, states)
    op = np.zeros((inst.dim, inst.dim), dtype=complex)
    for sub, term in zip(inst.support, alignment_terms(inst, states)):
        op += inst.mu[sub] * term
    return (op + op.conj().T) / 2


def conjectured_tuple(inst: ProblemInstance) -> dict:
    out = {}
    for sub in inst.support:
        k = inst.d ** len(sub)
        rho = np.zeros((k, k), dtype=complex)
        rho[0, 0] = 1.0
        out[sub] = rho
    return out


def conjectured_operator(inst: ProblemInstance) -> np.ndarray:
    return build_alignment_operator(inst, conjectured_tuple(inst), check=False)


def pure_tuple(inst: ProblemInstance, vectors: Mapping) -> dict:
    return {as_subset(k): projector_onto(v) for k, v in vectors.items()}


def random_pure_tuple(inst: ProblemInstance, rng: np.random.Generator) -> dict:
    out = {}
    for sub in inst.support:
        k = inst.d ** len(sub)
        v = rng.standard_normal(k) + 1j * rng.standard_normal(k)
        out[sub] = projector_onto(v / np.linalg.norm(v))
    return out


def random_mixed_tuple(inst: ProblemInstance, rng: np.random.Generator) -> dict:
    out = {}
    for sub in inst.support:
        k = inst.d ** len(sub)
        g = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        rho = g @ g.conj().T
        out[sub] = rho / np.trace(rho).real
    return out


def lambda1_bound(inst: ProblemInstance) -> float:
    """``sum_I mu_I lambda_1(Q)^|I^c|``: the largest eigenvalue any alignment operator can reach."""
    q1 = inst.qspec[0]
    return float(sum(w * q1 ** (inst.n - len(s)) for s, w in inst.mu.items()))


def pure_vertices(states: Mapping, tol: float = 1e-12):
    """Yield the pure tuples obtained by picking one eigenvector per entry.

    Every mixed tuple is a convex combination of these, so a convex objective
    is at least as large at one of them.
    """
    keys = list(states)
    options = []
    for k in keys:
        lam, vecs = hermitian_eig(states[k])
        options.append([projector_onto(vecs[:, i]) for i in range(lam.size) if lam[i] > tol])
    for combo in itertools.product(*options):
        yield dict(zip(keys, combo))


def best_pure_vertex(inst: ProblemInstance, states: Mapping, objective: Objective) -> tuple[dict, float]:
    best, best_val = None, -np.inf
    for cand in pure_vertices(states):
        val = objective.on_operator(build_alignment_operator(inst, cand, check=False))
        if val > best_val:
            best, best_val = cand, val
    return best, best_val


# ---------------------------------------------------------------------------
# the alignment preorder


def simplex_samples(ell: int, samples: int, seed: int) -> Iterable[np.ndarray]:
    """Vertices, then the uniform point, then ``samples`` Dirichlet(1) draws."""
    for i in range(ell):
        e = np.zeros(ell)
        e[i] = 1.0
        yield e
    if ell > 1:
        yield np.full(ell, 1.0 / ell)
    for idx in range(samples):
        rng = np.random.default_rng(seed + idx)
        yield rng.dirichlet(np.ones(ell))


def more_aligned(
    first: Sequence,
    second: Sequence,
    samples: int = 64,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
) -> AlignmentVerdict:
    """Check that ``sum p_i first_i`` majorizes ``sum p_i second_i`` on sampled ``p``.

    The universal quantifier over measures is only sampled, so a pass reads
    ``more_aligned_on_samples``; the first failing measure is the witness.
    """
    if len(first) != len(second):
        raise ValueError("tuples must have equal length")
    first = [hermitize(a) for a in first]
    second = [hermitize(b) for b in second]
    for a, b in zip(first, second):
        if a.shape != b.shape:
            raise ValueError("not spectrally comparable: dimension mismatch")
        la, lb = hermitian_spectrum(a), hermitian_spectrum(b)
        if np.max(np.abs(la - lb)) > max(tol, 1e-9) * max(1.0, np.abs(la).sum()):
            raise ValueError("not spectrally comparable")
    checked = 0
    for p in simplex_samples(len(first), samples, seed):
        lhs = sum(w * a for w, a in zip(p, first))
        rhs = sum(w * b for w, b in zip(p, second))
        gaps = majorization_gaps(hermitian_spectrum(lhs), hermitian_spectrum(rhs))
        checked += 1
        eps = tol * max(1.0, float(np.abs(hermitian_spectrum(lhs)).sum()))
        worst = int(np.argmin(gaps))
        if gaps[worst] < -eps:
            return AlignmentVerdict(VIOLATED, Witness([float(x) for x in p], worst + 1, float(-gaps[worst])), checked)
    return AlignmentVerdict(MORE_ALIGNED, None, checked)


def strong_conjecture_check(
    inst: ProblemInstance, states: Mapping, samples: int = 64, seed: int = 0, tol: float = DEFAULT_TOL
) -> AlignmentVerdict:
    """Is the conjectured tuple of lifted terms more aligned than the given one?"""
    return more_aligned(
        alignment_terms(inst, conjectured_tuple(inst)), alignment_terms(inst, states), samples, seed, tol
    )


def commuting_factor_check(
    c_list: Sequence, a_list: Sequence, samples: int = 64, seed: int = 0, tol: float = DEFAULT_TOL
) -> AlignmentVerdict:
    """``(C_i (x) A_i^down)`` versus ``(C_i (x) A_i)`` for commuting positive ``C_i``."""
    if len(c_list) != len(a_list):
        raise ValueError("tuples must have equal length")
    cs = [hermitize(c) for c in c_list]
    scale = max(1.0, max(float(np.max(np.abs(c))) for c in cs))
    for i in range(len(cs)):
        if hermitian_spectrum(cs[i])[-1] < -tol * scale:
            raise ValueError("factors C_i must be positive semi-definite")
        for j in range(i + 1, len(cs)):
            if np.max(np.abs(cs[i] @ cs[j] - cs[j] @ cs[i])) > tol * scale:
                raise ValueError("factors C_i do not commute")
    aligned = [np.kron(c, descending_version(a)) for c, a in zip(cs, a_list)]
    given = [np.kron(c, hermitize(a)) for c, a in zip(cs, a_list)]
    return more_aligned(aligned, given, samples, seed, tol)


# ---------------------------------------------------------------------------
# structural reductions


def reduce_flat_top(inst: ProblemInstance, conserve: bool = True) -> tuple[ProblemInstance, float]:
    """Rewrite the instance with a ``Q`` whose top two eigenvalues agree.

    Uses ``Q = (1 - eps) Q~ + eps |q1><q1|`` with ``eps = lambda_1 - lambda_2``
    and redistributes the measure over supersets. With ``conserve=False``
    subsets that end up with zero weight are dropped from the measure.
    Returns the reduced instance and ``eps``.
    """
    q = inst.q
    if inst.d < 2 or q[1] <= STATE_TOL:
        raise ValueError("Q must have rank >= 2")
    eps = float(q[0] - q[1])
    qt = q.copy()
    qt[0] = q[1]
    qt = qt / (1 - eps)
    full = frozenset(range(1, inst.n + 1))
    mu_t = {}
    for k in all_subsets(inst.n):
        total = 0.0
        for sub, w in inst.mu.items():
            if sub <= k:
                total += w * eps ** len(k - sub) * (1 - eps) ** len(full - k)
        if conserve or total > 0:
            mu_t[k] = total
    return ProblemInstance(inst.d, inst.n, tuple(qt), mu_t, inst.cap), eps


def pad_instance(inst: ProblemInstance, extra: int) -> ProblemInstance:
    """Append ``extra`` sites carrying only ``Q`` (the measure is unchanged)."""
    return ProblemInstance(inst.d, inst.n + extra, inst.qspec, dict(inst.mu), inst.cap)


# ---------------------------------------------------------------------------
# depolarizing channels


def _check_q(qvec: Sequence[float]) -> np.ndarray:
    q = np.asarray(qvec, dtype=float)
    if np.any(q < 0) or np.any(q > 1):
        raise ValueError("depolarizing parameters must lie in [0, 1]")
    return q


def depolarizing_output(qvec: Sequence[float], rho_global, d: int) -> np.ndarray:
    """Apply ``q rho + (1 - q) tr(rho) I/d`` independently on each site."""
    q = _check_q(qvec)
    n = q.size
    layout = SiteLayout(d, n)
    rho = np.asarray(rho_global, dtype=complex)
    if rho.shape != (layout.dim, layout.dim):
        raise ValueError("state dimension does not match d**n")
    flat = np.full(d, 1.0 / d)
    for site in range(1, n + 1):
        rest = [s for s in range(1, n + 1) if s != site]
        reduced = partial_trace(layout, rho, rest)
        rho = q[site - 1] * rho + (1 - q[site - 1]) * lift(layout, rest, reduced, flat)
    return rho


def depolarizing_alignment_form(qvec: Sequence[float], rho_global, d: int) -> np.ndarray:
    """The same output written as an alignment operator with ``Q = I/d``."""
    q = _check_q(qvec)
    n = q.size
    layout = SiteLayout(d, n)
    rho = np.asarray(rho_global, dtype=complex)
    flat = np.full(d, 1.0 / d)
    out = np.zeros_like(rho)
    for sub in all_subsets(n):
        nu = float(np.prod([q[i - 1] if i in sub else 1 - q[i - 1] for i in range(1, n + 1)]))
        if nu == 0:
            continue
        out += nu * lift(layout, sub, partial_trace(layout, rho, sub), flat)
    return out


def depolarizing_weights(qvec: Sequence[float]) -> dict:
    q = _check_q(qvec)
    n = q.size
    return {
        sub: float(np.prod([q[i - 1] if i in sub else 1 - q[i - 1] for i in range(1, n + 1)]))
        for sub in all_subsets(n)
    }


def product_q(inst: ProblemInstance, count: int) -> np.ndarray:
    return kron_all([np.diag(inst.q)] * count)
