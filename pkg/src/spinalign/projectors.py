"""Pairs of projectors: Jordan blocks, overlap-constrained feasibility and optimal pairs.

Any two projectors split the space into mutually orthogonal invariant blocks
of dimension one or two. On a two-dimensional block both act as rank-one
projectors onto unit vectors ``alpha`` and ``beta``; ``|<alpha|beta>|`` is the
block cosine and is a nonzero singular value of ``P1 P2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space

from .majorization import majorization_gaps
from .tensor import hermitian_spectrum, hermitize, random_unitary, sorted_desc

BOTH, ONLY1, ONLY2, NEITHER = "both", "only1", "only2", "neither"
COS_TOL = 1e-8


@dataclass
class JordanDecomposition:
    """``one_d_blocks``: (unit vector, label); ``two_d_blocks``: (d x 2 frame, cosine).

    In a two-dimensional block the first frame column is the ``P1`` vector
    and ``cos * f0 + sin * f1`` is the ``P2`` vector.
    """

    dim: int
    one_d_blocks: list = field(default_factory=list)
    two_d_blocks: list = field(default_factory=list)

    def labels(self) -> list[str]:
        return [lab for _, lab in self.one_d_blocks]

    def cosines(self) -> list[float]:
        return [c for _, c in self.two_d_blocks]

    def reconstruct(self) -> tuple[np.ndarray, np.ndarray]:
        p1 = np.zeros((self.dim, self.dim), dtype=complex)
        p2 = np.zeros_like(p1)
        for v, lab in self.one_d_blocks:
            proj = np.outer(v, v.conj())
            if lab in (BOTH, ONLY1):
                p1 += proj
            if lab in (BOTH, ONLY2):
                p2 += proj
        for frame, c in self.two_d_blocks:
            a = frame[:, 0]
            b = c * frame[:, 0] + math.sqrt(max(1 - c * c, 0.0)) * frame[:, 1]
            p1 += np.outer(a, a.conj())
            p2 += np.outer(b, b.conj())
        return p1, p2


@dataclass(frozen=True)
class OverlapConstraint:
    """Ranks ``r1, r2`` and overlap budget ``c`` for projector pairs on ``C^d``.

    ``c`` is capped at ``min(r1, r2)``; larger budgets constrain nothing.
    """

    d: int
    r1: int
    r2: int
    c: float

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be positive")
        for r in (self.r1, self.r2):
            if not 0 <= r <= self.d:
                raise ValueError(f"rank {r} out of range 0..{self.d}")
        if self.c < 0:
            raise ValueError("overlap budget c must be non-negative")
        object.__setattr__(self, "c", float(min(self.c, self.r1, self.r2)))


def _support_frame(p: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(p)
    return vecs[:, vals > 0.5]


def _check_projector(p, tol: float) -> np.ndarray:
    p = hermitize(p, max(tol, 1e-9))
    if np.max(np.abs(p @ p - p)) > tol:
        raise ValueError("input is not a projector")
    return p


def jordan_blocks(p1, p2, tol: float = 1e-9) -> JordanDecomposition:
    """Split ``C^d`` into joint invariant blocks via principal angles of the supports."""
    p1 = _check_projector(p1, tol)
    p2 = _check_projector(p2, tol)
    dim = p1.shape[0]
    if p2.shape != p1.shape:
        raise ValueError("projectors must have equal dimensions")
    g1, g2 = _support_frame(p1), _support_frame(p2)
    r1, r2 = g1.shape[1], g2.shape[1]
    dec = JordanDecomposition(dim)
    used = []
    if r1 and r2:
        u, s, vh = np.linalg.svd(g1.conj().T @ g2)
        v = vh.conj().T
    else:
        u, s, v = np.eye(r1), np.zeros(0), np.eye(r2)
    a_vecs = g1 @ u
    b_vecs = g2 @ v
    m = s.size
    for k in range(m):
        a, b, c = a_vecs[:, k], b_vecs[:, k], float(min(s[k], 1.0))
        if c >= 1 - COS_TOL:
            dec.one_d_blocks.append((a, BOTH))
            used.append(a)
        elif c <= COS_TOL:
            dec.one_d_blocks.append((a, ONLY1))
            dec.one_d_blocks.append((b, ONLY2))
            used += [a, b]
        else:
            # b = (<a|b>) a + w with w orthogonal to a; rotate the phase of a into b
            phase = np.vdot(a, b) / abs(np.vdot(a, b))
            b = b / phase
            w = b - c * a
            w = w / np.linalg.norm(w)
            frame = np.column_stack([a, w])
            dec.two_d_blocks.append((frame, c))
            used += [a, w]
    for k in range(m, r1):
        dec.one_d_blocks.append((a_vecs[:, k], ONLY1))
        used.append(a_vecs[:, k])
    for k in range(m, r2):
        dec.one_d_blocks.append((b_vecs[:, k], ONLY2))
        used.append(b_vecs[:, k])
    if len(used) < dim:
        rest = null_space(np.array(used).conj()) if used else np.eye(dim, dtype=complex)
        for k in range(rest.shape[1]):
            dec.one_d_blocks.append((rest[:, k], NEITHER))
    return dec


def feasible(con: OverlapConstraint) -> bool:
    """Whether some pair with ranks ``r1, r2`` has ``tr|P1 P2| <= c``."""
    return con.r1 + con.r2 - con.d <= math.floor(con.c + 1e-12)


def _block_pair(d: int, shared: int, cosines, only1: int, only2: int) -> tuple[np.ndarray, np.ndarray]:
    """Computational-basis pair: shared vectors, then 2D blocks, then the remainders."""
    p1 = np.zeros((d, d), dtype=complex)
    p2 = np.zeros_like(p1)
    k = 0
    for _ in range(shared):
        p1[k, k] = p2[k, k] = 1.0
        k += 1
    for c in cosines:
        s = math.sqrt(max(1 - c * c, 0.0))
        p1[k, k] = 1.0
        b = np.zeros(d)
        b[k], b[k + 1] = c, s
        p2 += np.outer(b, b)
        k += 2
    for _ in range(only1):
        p1[k, k] = 1.0
        k += 1
    for _ in range(only2):
        p2[k, k] = 1.0
        k += 1
    if k > d:
        raise ValueError("blocks do not fit in the ambient dimension")
    return p1, p2


def optimal_pair(con: OverlapConstraint) -> tuple[np.ndarray, np.ndarray]:
    """Pair maximal in the alignment order among pairs obeying ``con``.

    ``floor(c)`` shared directions, one two-dimensional block of cosine
    ``c - floor(c)`` when that is nonzero, and mutually orthogonal remainders.
    """
    if not feasible(con):
        raise ValueError("infeasible: r1+r2-d > floor(c)")
    whole = math.floor(con.c + 1e-12)
    frac = con.c - whole
    if frac < 1e-12:
        frac = 0.0
    extra = 1 if frac > 0 else 0
    return _block_pair(con.d, whole, [frac] * extra, con.r1 - whole - extra, con.r2 - whole - extra)


def pair_spectrum(dec: JordanDecomposition, s1: float, s2: float) -> np.ndarray:
    """Eigenvalues of ``s1 P1 + s2 P2`` from the block structure."""
    if s1 < 0 or s2 < 0:
        raise ValueError("coefficients must be non-negative")
    value = {BOTH: s1 + s2, ONLY1: s1, ONLY2: s2, NEITHER: 0.0}
    vals = [value[lab] for _, lab in dec.one_d_blocks]
    for _, c in dec.two_d_blocks:
        root = math.sqrt((s1 - s2) ** 2 + 4 * s1 * s2 * c * c)
        vals += [0.5 * (s1 + s2 + root), 0.5 * (s1 + s2 - root)]
    return sorted_desc(vals)


def overlap(p1, p2) -> float:
    """``tr|P1 P2|``."""
    return float(np.sum(np.linalg.svd(np.asarray(p1) @ np.asarray(p2), compute_uv=False)))


def random_feasible_pair(con: OverlapConstraint, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """A random pair obeying ``con``: random block structure, then a random unitary."""
    if not feasible(con):
        raise ValueError("infeasible: r1+r2-d > floor(c)")
    lo = max(con.r1 + con.r2 - con.d, 0)
    hi = min(math.floor(con.c + 1e-12), con.r1, con.r2)
    shared = int(rng.integers(lo, hi + 1))
    # total footprint is r1 + r2 - shared <= d whatever the number of 2D blocks
    m2 = int(rng.integers(0, min(con.r1, con.r2) - shared + 1))
    budget = con.c - shared
    cos = rng.uniform(0, 1, size=m2)
    if cos.sum() > budget:
        cos *= budget / cos.sum() * rng.uniform(0.5, 1.0)
    p1, p2 = _block_pair(con.d, shared, list(cos), con.r1 - shared - m2, con.r2 - shared - m2)
    u = random_unitary(con.d, rng)
    return u @ p1 @ u.conj().T, u @ p2 @ u.conj().T


@dataclass
class SweepResult:
    constraint: OverlapConstraint
    optimal_overlap: float
    commutator_norm: float
    pairs_checked: int
    worst_gap: float
    formula_error: float
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def projector_sweep(
    con: OverlapConstraint,
    trials: int,
    s_pairs,
    seed: int,
    tol: float = 1e-9,
) -> SweepResult:
    """Compare the optimal pair against random feasible pairs at each ``(s1, s2)``.

    ``worst_gap`` is the most negative prefix-sum slack seen (0 if none).
    """
    rng = np.random.default_rng(seed)
    q1, q2 = optimal_pair(con)
    dec_opt = jordan_blocks(q1, q2)
    comm = float(np.linalg.norm(q1 @ q2 - q2 @ q1, 2))
    worst = 0.0
    formula_err = 0.0
    violations = []
    for (s1, s2) in s_pairs:
        top = hermitian_spectrum(s1 * q1 + s2 * q2)
        formula_err = max(formula_err, float(np.max(np.abs(top - pair_spectrum(dec_opt, s1, s2)))))
    for trial in range(trials):
        p1, p2 = random_feasible_pair(con, rng)
        for (s1, s2) in s_pairs:
            top = hermitian_spectrum(s1 * q1 + s2 * q2)
            gaps = majorization_gaps(top, hermitian_spectrum(s1 * p1 + s2 * p2))
            g = float(min(gaps.min(), 0.0))
            worst = min(worst, g)
            if g < -tol * max(1.0, s1 * con.r1 + s2 * con.r2):
                violations.append({"trial": trial, "s1": float(s1), "s2": float(s2), "gap": -g})
    return SweepResult(con, overlap(q1, q2), comm, trials, worst, formula_err, violations)
