"""Dense linear algebra on n-fold qudit tensor spaces.

Basis convention: the computational basis string ``t_1 ... t_n`` (letters
``0..d-1`` here) sits at index ``sum_i t_i * d**(n - i)``, so site 1 is the
most significant digit. Subsets of sites are frozensets of 1-based site
labels; :func:`subset_mask` and :func:`mask_subset` convert to and from the
n-bit mask form where bit ``i - 1`` stands for site ``i``.
"""

from __future__ import annotations

import os
import string
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

DEFAULT_CAP = 4096
CAP_ENV = "SPINALIGN_CAP"

Subset = frozenset


class DecompositionError(np.linalg.LinAlgError):
    pass


def dimension_cap() -> int:
    """Largest total Hilbert space dimension accepted (``SPINALIGN_CAP`` overrides)."""
    raw = os.environ.get(CAP_ENV)
    if raw is None:
        return DEFAULT_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise ValueError(f"{CAP_ENV} must be an integer, got {raw!r}") from None
    if cap < 1:
        raise ValueError(f"{CAP_ENV} must be positive")
    return cap


def check_dimension(dim: int, cap: int | None = None) -> None:
    cap = dimension_cap() if cap is None else cap
    if dim > cap:
        raise ValueError(f"dimension {dim} exceeds cap {cap}")


def as_subset(sites: Iterable[int]) -> frozenset:
    return frozenset(int(s) for s in sites)


def subset_mask(subset: Iterable[int]) -> int:
    mask = 0
    for s in subset:
        mask |= 1 << (s - 1)
    return mask


def mask_subset(mask: int, n: int) -> frozenset:
    return frozenset(i + 1 for i in range(n) if mask >> i & 1)


def all_subsets(n: int) -> list[frozenset]:
    return [mask_subset(m, n) for m in range(1 << n)]


@dataclass(frozen=True)
class SiteLayout:
    """``n`` qudit sites of local dimension ``d``."""

    d: int
    n: int

    def __post_init__(self):
        if self.d < 1 or self.n < 0:
            raise ValueError("need d >= 1 and n >= 0")

    @property
    def dim(self) -> int:
        return self.d**self.n

    def index(self, letters: Sequence[int]) -> int:
        """Basis index of a string of 0-based letters, site 1 first."""
        if len(letters) != self.n:
            raise ValueError("string length must equal n")
        idx = 0
        for t in letters:
            if not 0 <= t < self.d:
                raise ValueError(f"letter {t} out of range")
            idx = idx * self.d + int(t)
        return idx

    def letters(self, index: int) -> tuple[int, ...]:
        out = []
        for _ in range(self.n):
            index, t = divmod(index, self.d)
            out.append(t)
        return tuple(reversed(out))

    def complement(self, subset: Iterable[int]) -> frozenset:
        return frozenset(range(1, self.n + 1)) - frozenset(subset)


# ---------------------------------------------------------------------------
# basic operations


def kron(a, b) -> np.ndarray:
    return np.kron(np.asarray(a), np.asarray(b))


def kron_all(factors: Iterable) -> np.ndarray:
    out = np.ones((1, 1))
    for f in factors:
        out = np.kron(out, np.asarray(f))
    return out


def hermitize(m, tol: float = 1e-9) -> np.ndarray:
    """Return ``(M + M^*)/2``; reject inputs farther than ``tol`` from self-adjoint."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("operator must be a square matrix")
    if m.size == 0:
        return m
    dev = np.max(np.abs(m - m.conj().T))
    scale = max(1.0, float(np.max(np.abs(m))))
    if dev > tol * scale:
        raise ValueError(f"operator is not self-adjoint (deviation {dev:.3g})")
    return (m + m.conj().T) / 2


def hermitian_spectrum(h, tol: float = 1e-9) -> np.ndarray:
    """Eigenvalues of a self-adjoint operator, non-increasing."""
    h = hermitize(h, tol)
    try:
        vals = np.linalg.eigvalsh(h)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError("decomposition failed") from exc
    return vals[::-1].copy()


def hermitian_eig(h, tol: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs with eigenvalues non-increasing (columns of the second output)."""
    h = hermitize(h, tol)
    try:
        vals, vecs = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError("decomposition failed") from exc
    return vals[::-1].copy(), vecs[:, ::-1].copy()


def singular_values(a) -> np.ndarray:
    a = np.asarray(a)
    return np.linalg.svd(a, compute_uv=False)


def sorted_desc(x) -> np.ndarray:
    return np.sort(np.asarray(x, dtype=float))[::-1]


# ---------------------------------------------------------------------------
# lifting terms to the full space


@lru_cache(maxsize=4096)
def _site_permutation(d: int, n: int, first: tuple[int, ...]) -> np.ndarray:
    """Index map from the true site order to the order ``first + rest``.

    ``first`` lists 0-based sites whose factors come first in a Kronecker
    product; the remaining sites follow in ascending order.
    """
    if n == 0:
        return np.zeros(1, dtype=int)
    rest = tuple(s for s in range(n) if s not in first)
    order = first + rest
    digits = np.indices((d,) * n).reshape(n, -1)
    src = np.ravel_multi_index(tuple(digits[list(order)]), (d,) * n)
    src.setflags(write=False)
    return src


def _permute_to_sites(layout: SiteLayout, subset_sorted: tuple[int, ...], big: np.ndarray) -> np.ndarray:
    perm = _site_permutation(layout.d, layout.n, tuple(s - 1 for s in subset_sorted))
    return big[np.ix_(perm, perm)]


def lift(layout: SiteLayout, subset: Iterable[int], r, qspec) -> np.ndarray:
    """Place ``r`` on the sites in ``subset`` and ``diag(qspec)`` on every other site."""
    sites = tuple(sorted(subset))
    if any(not 1 <= s <= layout.n for s in sites):
        raise ValueError("bad term dimension: site out of range")
    r = np.asarray(r)
    qspec = np.asarray(qspec, dtype=float)
    k = layout.d ** len(sites)
    if r.shape != (k, k) or qspec.shape != (layout.d,):
        raise ValueError("bad term dimension")
    qc = np.ones(1)
    for _ in range(layout.n - len(sites)):
        qc = np.kron(qc, qspec)
    big = np.kron(r, np.diag(qc))
    return _permute_to_sites(layout, sites, big)


def lift_general(layout: SiteLayout, subset: Iterable[int], r, site_factors) -> np.ndarray:
    """Like :func:`lift` but with an arbitrary ``d x d`` factor per complement site.

    ``site_factors`` maps each site outside ``subset`` to its matrix.
    """
    sites = tuple(sorted(subset))
    r = np.asarray(r)
    k = layout.d ** len(sites)
    if r.shape != (k, k):
        raise ValueError("bad term dimension")
    rest = sorted(layout.complement(sites))
    factors = []
    for s in rest:
        f = np.asarray(site_factors[s])
        if f.shape != (layout.d, layout.d):
            raise ValueError("bad term dimension")
        factors.append(f)
    big = np.kron(r, kron_all(factors))
    return _permute_to_sites(layout, sites, big)


def partial_trace_dims(h, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every site not in ``keep`` (1-based) for per-site dimensions ``dims``."""
    dims = tuple(int(x) for x in dims)
    n = len(dims)
    keep = sorted(set(keep))
    if any(not 1 <= s <= n for s in keep):
        raise ValueError("site out of range")
    h = np.asarray(h)
    total = int(np.prod(dims)) if n else 1
    if h.shape != (total, total):
        raise ValueError("operator does not match site dimensions")
    if len(keep) == n:
        return h.copy()
    if 2 * n > len(string.ascii_letters):
        raise ValueError("too many sites")
    row = list(string.ascii_letters[:n])
    col = list(string.ascii_letters[n : 2 * n])
    for s in range(n):
        if s + 1 not in keep:
            col[s] = row[s]
    out = [row[s - 1] for s in keep] + [col[s - 1] for s in keep]
    spec = "".join(row) + "".join(col) + "->" + "".join(out)
    res = np.einsum(spec, h.reshape(dims + dims))
    k = int(np.prod([dims[s - 1] for s in keep])) if keep else 1
    return np.asarray(res).reshape(k, k)


def partial_trace(layout: SiteLayout, h, keep: Iterable[int]) -> np.ndarray:
    return partial_trace_dims(h, (layout.d,) * layout.n, keep)


# ---------------------------------------------------------------------------
# seeded sampling


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_pure_state(dim: int, seed=None) -> np.ndarray:
    rng = _rng(seed)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_unitary(dim: int, seed=None) -> np.ndarray:
    rng = _rng(seed)
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_frame(dim: int, rank: int, seed=None) -> np.ndarray:
    """Orthonormal ``dim x rank`` frame from a complex Gaussian matrix."""
    rng = _rng(seed)
    z = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    q, _ = np.linalg.qr(z)
    return q


def random_projector(dim: int, rank: int, seed=None) -> np.ndarray:
    if not 1 <= rank <= dim:
        raise ValueError(f"rank {rank} out of range for dimension {dim}")
    f = random_frame(dim, rank, seed)
    p = f @ f.conj().T
    return (p + p.conj().T) / 2


def random_hermitian(dim: int, seed=None) -> np.ndarray:
    rng = _rng(seed)
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (z + z.conj().T) / 2


def random_density(dim: int, seed=None, rank: int | None = None) -> np.ndarray:
    """Random state ``G G^* / tr`` with ``G`` a ``dim x rank`` Gaussian matrix."""
    rng = _rng(seed)
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    return rho / np.trace(rho).real


def projector_onto(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def basis_vector(dim: int, index: int) -> np.ndarray:
    e = np.zeros(dim, dtype=complex)
    e[index] = 1.0
    return e
