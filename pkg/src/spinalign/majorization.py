"""Majorization preorder on real vectors and self-adjoint operators.

Vector positions are 0-based throughout. Constructive witnesses come in two
flavours: T-transforms (two-coordinate convex mixing) and transfers (moving
an amount between two coordinates). A transfer is *unjust* when its receiver
is not smaller than its giver.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .tensor import hermitian_spectrum, hermitize, sorted_desc

DEFAULT_TOL = 1e-9
DEGENERACY_GAP = 1e-8


@dataclass(frozen=True)
class Transfer:
    receiver: int
    giver: int
    amount: float

    def __post_init__(self):
        if self.receiver == self.giver:
            raise ValueError("transfer needs distinct receiver and giver")
        if self.amount < 0:
            raise ValueError("transfer amount must be non-negative")


@dataclass(frozen=True)
class TTransform:
    i: int
    j: int
    t: float

    def __post_init__(self):
        if self.i == self.j:
            raise ValueError("T-transform needs distinct indices")
        if not 0.0 <= self.t <= 1.0:
            raise ValueError("T-transform parameter must lie in [0, 1]")

    def matrix(self, m: int) -> np.ndarray:
        a = np.eye(m)
        a[self.i, self.i] = a[self.j, self.j] = 1 - self.t
        a[self.i, self.j] = a[self.j, self.i] = self.t
        return a


def _scaled_tol(x: np.ndarray, tol: float) -> float:
    return tol * max(1.0, float(np.sum(np.abs(x))))


def majorization_gaps(x, y) -> np.ndarray:
    """Prefix-sum slack ``sum_{i<=k} x_i^down - y_i^down`` for ``k = 1..m``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("vectors must have equal length")
    return np.cumsum(sorted_desc(x)) - np.cumsum(sorted_desc(y))


def majorizes(x, y, tol: float = DEFAULT_TOL) -> bool:
    """True iff ``x`` majorizes ``y`` (prefix sums dominate, totals agree)."""
    gaps = majorization_gaps(x, y)
    if gaps.size == 0:
        return True
    eps = _scaled_tol(np.asarray(x, dtype=float), tol)
    return bool(np.all(gaps[:-1] >= -eps) and abs(gaps[-1]) <= eps)


def operator_majorizes(a, b, tol: float = DEFAULT_TOL) -> bool:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError("operators must have equal dimensions")
    return majorizes(hermitian_spectrum(a), hermitian_spectrum(b), tol)


def _check_index(x: np.ndarray, *idx: int) -> None:
    for k in idx:
        if not 0 <= k < x.shape[0]:
            raise IndexError(f"index {k} out of range for length {x.shape[0]}")


def apply_t_transform(x, tt: TTransform) -> np.ndarray:
    x = np.array(x, dtype=float)
    _check_index(x, tt.i, tt.j)
    xi, xj = x[tt.i], x[tt.j]
    shift = tt.t * (xj - xi)
    x[tt.i] = xi + shift
    x[tt.j] = xj - shift
    return x


def apply_transfer(x, tr: Transfer) -> tuple[np.ndarray, bool]:
    x = np.array(x, dtype=float)
    _check_index(x, tr.receiver, tr.giver)
    unjust = bool(x[tr.receiver] >= x[tr.giver])
    x[tr.receiver] += tr.amount
    x[tr.giver] -= tr.amount
    return x, unjust


def unjust_up_to_transposition(x, tr: Transfer, tol: float = 0.0) -> bool:
    """True if the transfer, possibly composed with a swap of the pair, is unjust.

    Equivalently: the larger entry of the pair does not decrease.
    """
    x = np.asarray(x, dtype=float)
    _check_index(x, tr.receiver, tr.giver)
    a, b = x[tr.receiver], x[tr.giver]
    return bool(a + tr.amount >= max(a, b) - tol)


def _desc_positions(v: np.ndarray) -> np.ndarray:
    """``pos[k]`` = position of entry ``k`` after a stable descending sort."""
    order = np.argsort(-v, kind="stable")
    pos = np.empty_like(order)
    pos[order] = np.arange(v.size)
    return pos


def transfer_of_ttransform(x, tt: TTransform) -> Transfer:
    """Unjust transfer taking ``(T x)^down`` to a permutation of ``x^down``.

    Indices of the returned transfer refer to positions in ``(T x)^down``.
    """
    x = np.asarray(x, dtype=float)
    y = apply_t_transform(x, tt)
    pos = _desc_positions(y)
    big, small = (tt.i, tt.j) if y[tt.i] >= y[tt.j] else (tt.j, tt.i)
    eps = max(x[tt.i], x[tt.j]) - y[big]
    return Transfer(int(pos[big]), int(pos[small]), float(max(eps, 0.0)))


def ttransform_of_transfer(y, tr: Transfer) -> TTransform:
    """T-transform taking ``x^down`` to a permutation of ``y^down``.

    ``tr`` acts on ``y^down`` and must be unjust there; ``x`` is its result.
    Indices of the returned T-transform refer to positions in ``x^down``.
    """
    yd = sorted_desc(y)
    z, unjust = apply_transfer(yd, tr)
    if not unjust:
        raise ValueError("transfer is not unjust on the sorted vector")
    gap = yd[tr.receiver] - yd[tr.giver]
    denom = gap + 2 * tr.amount
    t = tr.amount / denom if denom > 0 else 0.0
    pos = _desc_positions(z)
    return TTransform(int(pos[tr.receiver]), int(pos[tr.giver]), float(min(max(t, 0.0), 1.0)))


def transfer_chain(x, y, tol: float = DEFAULT_TOL) -> list[TTransform]:
    """T-transforms carrying ``x`` to a permutation of ``y`` (at most ``m - 1``).

    Greedy construction: take the last position where the running vector
    still exceeds the target, the first later position where it falls short,
    and move the smaller of the two discrepancies. Indices refer to ``x`` as
    given (not sorted).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if not majorizes(x, y, tol):
        raise ValueError("not comparable: x does not majorize y")
    order = np.argsort(-x, kind="stable")
    z = x[order].copy()
    target = sorted_desc(y)
    eps = _scaled_tol(x, tol)
    chain: list[TTransform] = []
    for _ in range(x.size):
        diff = z - target
        over = np.nonzero(diff > eps)[0]
        if over.size == 0:
            break
        j = int(over[-1])
        under = np.nonzero(diff[j + 1 :] < -eps)[0]
        if under.size == 0:
            break
        k = j + 1 + int(under[0])
        delta = min(diff[j], -diff[k])
        t = float(min(delta / (z[j] - z[k]), 1.0))
        step = TTransform(j, k, t)
        z = apply_t_transform(z, step)
        # pin the coordinate that now matches to kill drift
        if diff[j] <= -diff[k]:
            z[j] = target[j]
        else:
            z[k] = target[k]
        chain.append(step)
    return [TTransform(int(order[s.i]), int(order[s.j]), s.t) for s in chain]


def replay_chain(x, chain: Sequence[TTransform]) -> np.ndarray:
    out = np.asarray(x, dtype=float)
    for tt in chain:
        out = apply_t_transform(out, tt)
    return out


def chain_matrix(m: int, chain: Sequence[TTransform]) -> np.ndarray:
    """Doubly-stochastic matrix of the composed chain (first step applied first)."""
    a = np.eye(m)
    for tt in chain:
        a = tt.matrix(m) @ a
    return a


def majorant_box_simplex(m: int, e: float) -> np.ndarray:
    """``(1, ..., 1, e - floor(e), 0, ..., 0)``: majorant of ``[0,1]^m`` points summing to ``e``."""
    if e < 0:
        raise ValueError("e must be non-negative")
    if e > m:
        raise ValueError(f"e = {e} exceeds m = {m}")
    out = np.zeros(m)
    whole = int(np.floor(e))
    out[:whole] = 1.0
    if whole < m:
        out[whole] = e - whole
    return out


def isotone_map(v, t: float, g: Callable[[float], float]) -> np.ndarray:
    """``(t + g(v_i))_i`` followed by ``(t - g(v_i))_i``.

    Preserves majorization when ``g`` is convex and non-negative; that is the
    caller's contract and is not checked.
    """
    gv = np.array([g(float(a)) for a in np.asarray(v, dtype=float)])
    return np.concatenate([t + gv, t - gv])


# ---------------------------------------------------------------------------
# perfect alignment


def _codiagonalize(ops: list[np.ndarray], gap: float) -> np.ndarray:
    """Orthonormal basis (columns) diagonalizing commuting Hermitian ``ops``."""
    dim = ops[0].shape[0]
    if dim == 0:
        return np.zeros((0, 0), dtype=complex)
    if dim == 1 or not ops:
        return np.eye(dim, dtype=complex)
    vals, vecs = np.linalg.eigh(ops[0])
    rest = ops[1:]
    if not rest:
        return vecs
    blocks = []
    start = 0
    for k in range(1, dim + 1):
        if k == dim or vals[k] - vals[k - 1] > gap:
            blocks.append((start, k))
            start = k
    cols = []
    for a, b in blocks:
        v = vecs[:, a:b]
        sub = [v.conj().T @ op @ v for op in rest]
        sub = [(s + s.conj().T) / 2 for s in sub]
        cols.append(v @ _codiagonalize(sub, gap))
    return np.hstack(cols)


def similarly_ordered(vectors: Sequence[np.ndarray], tol: float = DEFAULT_TOL) -> bool:
    """True iff one permutation sorts every vector non-increasingly."""
    vs = np.array([np.asarray(v, dtype=float) for v in vectors])
    if vs.size == 0:
        return True
    diff = vs[:, :, None] - vs[:, None, :]
    up = np.any(diff > tol, axis=0)
    down = np.any(diff < -tol, axis=0)
    return not bool(np.any(up & down))


def perfectly_aligned(ops: Sequence, tol: float = DEFAULT_TOL) -> bool:
    """True iff some orthonormal basis realizes every spectrum in descending order."""
    ops = [hermitize(o, max(tol, 1e-9)) for o in ops]
    if len(ops) <= 1:
        return True
    dim = ops[0].shape[0]
    if any(o.shape != (dim, dim) for o in ops):
        raise ValueError("operators must have equal dimensions")
    scale = max(1.0, max(float(np.max(np.abs(o))) for o in ops))
    for a in range(len(ops)):
        for b in range(a + 1, len(ops)):
            comm = ops[a] @ ops[b] - ops[b] @ ops[a]
            if np.max(np.abs(comm)) > tol * scale:
                return False
    basis = _codiagonalize(ops, DEGENERACY_GAP * scale)
    diags = []
    for o in ops:
        m = basis.conj().T @ o @ basis
        if np.max(np.abs(m - np.diag(np.diag(m)))) > 1e3 * tol * scale:
            return False
        diags.append(np.diag(m).real)
    return similarly_ordered(diags, 1e2 * tol * scale)


def aligned_basis_order(ops: Sequence, tol: float = DEFAULT_TOL) -> np.ndarray | None:
    """A common eigenbasis ordered so every operator's diagonal is non-increasing.

    Returns ``None`` when the operators are not perfectly aligned.
    """
    if not perfectly_aligned(ops, tol):
        return None
    ops = [hermitize(o, max(tol, 1e-9)) for o in ops]
    scale = max(1.0, max(float(np.max(np.abs(o))) for o in ops))
    basis = _codiagonalize(ops, DEGENERACY_GAP * scale)
    total = sum(np.diag(basis.conj().T @ o @ basis).real for o in ops)
    return basis[:, np.argsort(-total, kind="stable")]


def descending_version(op) -> np.ndarray:
    """``diag(lambda(op))`` in the computational basis."""
    return np.diag(hermitian_spectrum(op)).astype(complex)
