"""Maximizing a sum of marginal objectives under a global spectrum bound.

Maximize ``sum_I f_I(tau_I)`` over states ``tau`` on ``K_1 (x) ... (x) K_n``
with ``lambda(tau)`` majorized by a fixed probability vector ``p``; each
``f_I`` is a unitarily invariant convex objective of the marginal on the
sites ``I``. When the subsets partition the sites, a classical state (one
diagonal in the computational basis) with spectrum exactly ``p`` is optimal.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.optimize import linear_sum_assignment

from .majorization import DEFAULT_TOL, TTransform, apply_t_transform, chain_matrix, majorizes, transfer_chain
from .norms import Objective
from .tensor import as_subset, check_dimension, hermitian_eig, hermitian_spectrum, partial_trace_dims, random_unitary

DUAL_CAP = 10**6
_BATCH = 4096


@dataclass(frozen=True)
class DualInstance:
    dims: tuple
    terms: Mapping[frozenset, Objective]
    p: tuple

    def __post_init__(self):
        dims = tuple(int(x) for x in self.dims)
        if not dims or min(dims) < 1:
            raise ValueError("dims must be a non-empty list of positive integers")
        object.__setattr__(self, "dims", dims)
        check_dimension(self.dim)
        n = len(dims)
        terms = {}
        for key, obj in dict(self.terms).items():
            sub = as_subset(key)
            if any(not 1 <= s <= n for s in sub):
                raise ValueError(f"subset {sorted(sub)} has sites outside 1..{n}")
            if sub in terms:
                raise ValueError(f"duplicate subset {sorted(sub)}")
            obj = Objective.parse(obj) if isinstance(obj, str) else obj
            if obj.kind == "fan" and obj.param > self.marginal_dim(sub):
                raise ValueError(f"Fan order {int(obj.param)} exceeds marginal dimension for {sorted(sub)}")
            terms[sub] = obj
        if not terms:
            raise ValueError("need at least one objective term")
        object.__setattr__(self, "terms", terms)
        p = np.asarray(self.p, dtype=float)
        if p.shape != (self.dim,):
            raise ValueError(f"p must have length {self.dim}")
        if p.min() < 0 or abs(p.sum() - 1) > 1e-9:
            raise ValueError("p must be a probability vector")
        if np.any(np.diff(p) > 0):
            raise ValueError("p must be sorted non-increasingly")
        object.__setattr__(self, "p", tuple(float(x) for x in p))

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def n(self) -> int:
        return len(self.dims)

    def marginal_dim(self, sub) -> int:
        return int(np.prod([self.dims[s - 1] for s in sub])) if sub else 1

    def ordered_terms(self) -> list:
        return sorted(self.terms.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))

    def is_partition(self) -> bool:
        seen: set = set()
        for sub in self.terms:
            if not sub or seen & sub:
                return False
            seen |= sub
        return seen == set(range(1, self.n + 1))


def dual_objective(inst: DualInstance, tau) -> float:
    tau = np.asarray(tau)
    if tau.shape != (inst.dim, inst.dim):
        raise ValueError("state dimension does not match the site dimensions")
    total = 0.0
    for sub, obj in inst.ordered_terms():
        total += obj.on_operator(partial_trace_dims(tau, inst.dims, sub))
    return total


def classical_values(inst: DualInstance, xs) -> np.ndarray:
    """Objective of ``diag(x)`` for each row ``x`` (a distribution on basis strings)."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    b = xs.shape[0]
    cube = xs.reshape((b,) + inst.dims)
    total = np.zeros(b)
    for sub, obj in inst.ordered_terms():
        drop = tuple(s for s in range(1, inst.n + 1) if s not in sub)
        marg = cube.sum(axis=drop) if drop else cube
        total += obj.on_spectra(marg.reshape(b, -1))
    return total


def feasible_spectrum(tau, p, tol: float = DEFAULT_TOL) -> bool:
    return majorizes(np.asarray(p, dtype=float), hermitian_spectrum(tau), tol)


# ---------------------------------------------------------------------------
# exhaustive classical oracle


def placement_count(inst: DualInstance) -> int:
    """Placements of the nonzero entries of ``p`` on basis strings, equal entries identified."""
    nz = [x for x in inst.p if x > 0]
    count = math.perm(inst.dim, len(nz))
    for _, grp in itertools.groupby(nz):
        count //= math.factorial(len(list(grp)))
    return count


def _placements(dim: int, groups: list[int]):
    """Yield position tuples: ``groups[g]`` increasing positions per group, all distinct."""

    def rec(g, used):
        if g == len(groups):
            yield ()
            return
        free = [i for i in range(dim) if i not in used]
        for combo in itertools.combinations(free, groups[g]):
            for rest in rec(g + 1, used | set(combo)):
                yield combo + rest

    yield from rec(0, frozenset())


def _best_over(inst: DualInstance, rows_iter, values: np.ndarray):
    best_val, best_x = -np.inf, None
    buf = []

    def flush():
        nonlocal best_val, best_x
        pos = np.array(buf)
        xs = np.zeros((len(buf), inst.dim))
        np.put_along_axis(xs, pos, values[None, :], axis=1)
        vals = classical_values(inst, xs)
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best_val, best_x = float(vals[i]), xs[i]
        buf.clear()

    for row in rows_iter:
        buf.append(row)
        if len(buf) == _BATCH:
            flush()
    if buf:
        flush()
    return best_x, best_val


def dual_brute_force(inst: DualInstance, cap: int = DUAL_CAP) -> tuple[np.ndarray, float]:
    """Best classical state with spectrum exactly ``p`` by full enumeration.

    Restricting to spectrum exactly ``p`` placed on basis strings is a
    modeling assumption for non-partition term sets.
    """
    total = placement_count(inst)
    if total > cap:
        raise ValueError(f"enumeration too large: {total} placements exceeds cap {cap}")
    nz = np.array([x for x in inst.p if x > 0])
    groups = [len(list(g)) for _, g in itertools.groupby(nz)]
    x, val = _best_over(inst, _placements(inst.dim, groups), nz)
    return np.diag(x).astype(complex), val


# ---------------------------------------------------------------------------
# partition case


def block_order(dims: tuple, blocks: list) -> np.ndarray:
    """``idx[j]``: site-order index of position ``j`` when sites are regrouped block by block."""
    axes = [s - 1 for blk in blocks for s in sorted(blk)]
    return np.arange(int(np.prod(dims))).reshape(dims).transpose(axes).ravel()


def _canonical_placements(block_dims: list[int], count: int, cap: int):
    """Cell tuples for ``count`` entries, one representative per relabelling orbit.

    Along each block axis labels are introduced in order of first use, so
    relabelling letters within a block never produces a second visit.
    """
    nodes = 0

    def rec(t, cells, used):
        nonlocal nodes
        nodes += 1
        if nodes > cap:
            raise ValueError(f"enumeration too large: more than {cap} search nodes")
        if t == count:
            yield tuple(cells)
            return
        ranges = [range(min(u + 1, d)) for u, d in zip(used, block_dims)]
        for cell in itertools.product(*ranges):
            if cell in cells:
                continue
            new_used = [max(u, c + 1) for u, c in zip(used, cell)]
            yield from rec(t + 1, cells + [cell], new_used)

    yield from rec(0, [], [0] * len(block_dims))


def dual_partition_solve(inst: DualInstance, cap: int = DUAL_CAP) -> tuple[np.ndarray, float]:
    """Exact optimum when the term subsets partition the sites.

    The value of a classical placement only depends on the block marginals,
    which are invariant under relabelling the basis of each block, so one
    placement per relabelling orbit suffices.
    """
    if not inst.is_partition():
        raise ValueError("objective subsets do not form a partition of the sites")
    blocks = [sub for sub, _ in inst.ordered_terms()]
    block_dims = [inst.marginal_dim(b) for b in blocks]
    index = block_order(inst.dims, blocks).reshape(block_dims)
    nz = np.array([x for x in inst.p if x > 0])
    rows = (
        tuple(int(index[cell]) for cell in cells)
        for cells in _canonical_placements(block_dims, nz.size, cap)
    )
    x, val = _best_over(inst, rows, nz)
    return np.diag(x).astype(complex), val


def _marginal_frame(inst: DualInstance, tau: np.ndarray):
    if not inst.is_partition():
        raise ValueError("objective subsets do not form a partition of the sites")
    blocks = [sub for sub, _ in inst.ordered_terms()]
    u = np.ones((1, 1))
    for blk in blocks:
        _, vecs = hermitian_eig(partial_trace_dims(tau, inst.dims, blk))
        u = np.kron(u, vecs)
    idx = block_order(inst.dims, blocks)
    # u acts in block order; move it back to site order
    frame = np.zeros_like(u)
    frame[np.ix_(idx, idx)] = u
    return frame, idx


def pinch_operator(inst: DualInstance, tau) -> np.ndarray:
    """Dephase ``tau`` in the product of the eigenbases of its block marginals."""
    tau = np.asarray(tau, dtype=complex)
    frame, _ = _marginal_frame(inst, tau)
    probs = np.einsum("ji,jk,ki->i", frame.conj(), tau, frame).real
    return (frame * probs) @ frame.conj().T


def pinch_to_classical(inst: DualInstance, tau) -> np.ndarray:
    """Distribution on basis strings with the same block-marginal spectra as ``tau``.

    It is the pinched state rotated so each block eigenbasis becomes the
    computational one; its spectrum is majorized by that of ``tau``.
    """
    tau = np.asarray(tau, dtype=complex)
    frame, _ = _marginal_frame(inst, tau)
    probs = np.clip(np.einsum("ji,jk,ki->i", frame.conj(), tau, frame).real, 0.0, None)
    return probs / probs.sum()


def _birkhoff(m: np.ndarray, tol: float = 1e-12) -> list[tuple[float, np.ndarray]]:
    """Convex decomposition of a doubly-stochastic matrix into permutations."""
    m = m.copy()
    out = []
    for _ in range(m.shape[0] ** 2):
        if m.sum() < 1e-9:
            break
        rows, cols = linear_sum_assignment(-(m > tol).astype(float))
        theta = float(m[rows, cols].min())
        if theta <= tol:
            break
        perm = np.empty(m.shape[0], dtype=int)
        perm[rows] = cols
        out.append((theta, perm))
        m[rows, cols] -= theta
    return out


def refine_to_spectrum(inst: DualInstance, x) -> tuple[np.ndarray, float]:
    """A placement of ``p`` on basis strings at least as good as the distribution ``x``.

    ``x`` (majorized by ``p``) is written as a mixture of permutations of
    ``p``; by convexity the best of them does not lose value.
    """
    x = np.asarray(x, dtype=float)
    p = np.array(inst.p)
    chain = transfer_chain(p, x, tol=1e-8)
    d = chain_matrix(p.size, chain)
    z = d @ p
    # z is a rearrangement of x; match them up
    fix = np.zeros_like(d)
    fix[np.argsort(-x, kind="stable"), np.argsort(-z, kind="stable")] = 1.0
    parts = _birkhoff(fix @ d)
    cands = np.array([p[perm] for _, perm in parts])
    vals = classical_values(inst, cands)
    i = int(np.argmax(vals))
    return cands[i], float(vals[i])


# ---------------------------------------------------------------------------
# sampling feasible states


def random_feasible_state(inst: DualInstance, rng: np.random.Generator, moves: int | None = None) -> np.ndarray:
    """``U diag(q) U^dagger`` with ``q`` from random T-transforms applied to ``p``."""
    q = np.array(inst.p)
    m = q.size
    if moves is None:
        moves = int(rng.integers(0, 2 * m + 1))
    for _ in range(moves):
        if m < 2:
            break
        i, j = rng.choice(m, size=2, replace=False)
        q = apply_t_transform(q, TTransform(int(i), int(j), float(rng.uniform(0, 0.5))))
    u = random_unitary(m, rng)
    rho = (u * q) @ u.conj().T
    return (rho + rho.conj().T) / 2
