"""Classical (computational-basis) spin alignment.

A classical assignment maps each subset ``I`` in the support of ``mu`` to a
string over the letters ``1..d`` of length ``|I|``; letters are listed in
ascending site order. The alignment operator is then diagonal and the
improvement procedure flips letters to ``1`` one site at a time, moving
weight between basis strings with transfers that never lower the larger
entry of the affected pair.
"""

from __future__ import annotations

import itertools
from typing import Mapping, Sequence

import numpy as np

from .alignment import ProblemInstance
from .majorization import Transfer
from .norms import Objective
from .tensor import as_subset, sorted_desc

BRUTE_FORCE_CAP = 10**6
_BLOCK = 1 << 15


def check_assignment(inst: ProblemInstance, asg: Mapping) -> dict:
    out = {}
    for key, letters in asg.items():
        out[as_subset(key)] = tuple(int(t) for t in letters)
    for sub in inst.support:
        if sub not in out:
            raise ValueError(f"malformed assignment: missing subset {sorted(sub)}")
        t = out[sub]
        if len(t) != len(sub):
            raise ValueError(f"malformed assignment: string for {sorted(sub)} has length {len(t)}")
        if any(not 1 <= x <= inst.d for x in t):
            raise ValueError(f"malformed assignment: letters for {sorted(sub)} must lie in 1..{inst.d}")
    return out


def conjectured_assignment(inst: ProblemInstance) -> dict:
    return {sub: (1,) * len(sub) for sub in inst.support}


def random_assignment(inst: ProblemInstance, rng: np.random.Generator) -> dict:
    return {sub: tuple(int(x) for x in rng.integers(1, inst.d + 1, size=len(sub))) for sub in inst.support}


def _term_vector(inst: ProblemInstance, sub: frozenset, letters: Sequence[int]) -> np.ndarray:
    q = inst.q
    it = iter(letters)
    vec = np.ones(1)
    for site in range(1, inst.n + 1):
        if site in sub:
            e = np.zeros(inst.d)
            e[next(it) - 1] = 1.0
            vec = np.kron(vec, e)
        else:
            vec = np.kron(vec, q)
    return vec


def classical_diagonal(inst: ProblemInstance, asg: Mapping) -> np.ndarray:
    asg = check_assignment(inst, asg)
    out = np.zeros(inst.dim)
    for sub in inst.support:
        out += inst.mu[sub] * _term_vector(inst, sub, asg[sub])
    return out


def classical_operator(inst: ProblemInstance, asg: Mapping) -> np.ndarray:
    return np.diag(classical_diagonal(inst, asg)).astype(complex)


def classical_align_step(inst: ProblemInstance, asg: Mapping, site: int) -> tuple[dict, list[Transfer]]:
    """Flip the letter at ``site`` to 1 in every string, one letter value at a time.

    Returns the new assignment and the transfers that carry the old diagonal
    to the new one, in application order. Transfers for one letter value act
    on disjoint pairs of entries.
    """
    if not 1 <= site <= inst.n:
        raise ValueError(f"site {site} out of range 1..{inst.n}")
    new = check_assignment(inst, asg)
    stride = inst.d ** (inst.n - site)
    transfers: list[Transfer] = []
    for j in range(2, inst.d + 1):
        moved = []
        for sub in inst.support:
            if site in sub:
                pos = sorted(sub).index(site)
                if new[sub][pos] == j:
                    moved.append((sub, pos))
        if not moved:
            continue
        contrib = sum(inst.mu[sub] * _term_vector(inst, sub, new[sub]) for sub, _ in moved)
        for idx in np.nonzero(contrib > 0)[0]:
            transfers.append(Transfer(int(idx - (j - 1) * stride), int(idx), float(contrib[idx])))
        for sub, pos in moved:
            letters = list(new[sub])
            letters[pos] = 1
            new[sub] = tuple(letters)
    return new, transfers


def classical_align(inst: ProblemInstance, asg: Mapping) -> list[tuple[dict, np.ndarray]]:
    """Trajectory of (assignment, spectrum) from ``asg`` to the all-ones assignment."""
    cur = check_assignment(inst, asg)
    traj = [(cur, sorted_desc(classical_diagonal(inst, cur)))]
    for site in range(1, inst.n + 1):
        nxt, _ = classical_align_step(inst, cur, site)
        if nxt != cur:
            cur = nxt
            traj.append((cur, sorted_desc(classical_diagonal(inst, cur))))
    return traj


# ---------------------------------------------------------------------------
# exhaustive oracle


def enumeration_size(inst: ProblemInstance) -> int:
    return inst.d ** sum(len(s) for s in inst.support)


def _choice_table(inst: ProblemInstance, sub: frozenset) -> tuple[list[tuple], np.ndarray]:
    strings = list(itertools.product(range(1, inst.d + 1), repeat=len(sub)))
    rows = np.array([inst.mu[sub] * _term_vector(inst, sub, t) for t in strings])
    return strings, rows


def iter_classical_diagonals(inst: ProblemInstance, cap: int = BRUTE_FORCE_CAP):
    """Yield ``(prefix_choice, block)`` covering every assignment in lexicographic order.

    ``block`` has one row per completion of ``prefix_choice`` (a tuple of
    string indices for the leading subsets); rows enumerate the remaining
    subsets' strings with the last subset varying fastest.
    """
    total = enumeration_size(inst)
    if total > cap:
        raise ValueError(f"enumeration too large: {total} assignments exceeds cap {cap}")
    support = inst.support
    tables = [_choice_table(inst, s) for s in support]
    split = len(tables)
    inner = 1
    while split > 0 and inner * len(tables[split - 1][0]) <= _BLOCK:
        split -= 1
        inner *= len(tables[split][0])
    tail = np.zeros((1, inst.dim))
    for _, rows in tables[split:]:
        tail = (tail[:, None, :] + rows[None, :, :]).reshape(-1, inst.dim)
    for prefix in itertools.product(*[range(len(t[0])) for t in tables[:split]]):
        head = sum((tables[i][1][c] for i, c in enumerate(prefix)), np.zeros(inst.dim))
        yield prefix, head[None, :] + tail


def _decode(inst: ProblemInstance, prefix: tuple, row: int) -> dict:
    support = inst.support
    tables = [_choice_table(inst, s) for s in support]
    split = len(prefix)
    choice = list(prefix)
    sizes = [len(t[0]) for t in tables[split:]]
    rest = []
    for size in reversed(sizes):
        row, c = divmod(row, size)
        rest.append(c)
    choice += list(reversed(rest))
    return {sub: tables[i][0][c] for i, (sub, c) in enumerate(zip(support, choice))}


def classical_brute_force_many(
    inst: ProblemInstance, objectives: Sequence[Objective], cap: int = BRUTE_FORCE_CAP
) -> list[tuple[dict, float]]:
    """Exact maximum of each objective over all classical assignments.

    Ties go to the lexicographically first assignment.
    """
    best = [(-np.inf, None, None) for _ in objectives]
    for prefix, block in iter_classical_diagonals(inst, cap):
        for k, obj in enumerate(objectives):
            vals = obj.on_spectra(block)
            i = int(np.argmax(vals))
            if vals[i] > best[k][0]:
                best[k] = (float(vals[i]), prefix, i)
    return [(_decode(inst, prefix, row), val) for val, prefix, row in best]


def classical_brute_force(
    inst: ProblemInstance, objective: Objective, cap: int = BRUTE_FORCE_CAP
) -> tuple[dict, float]:
    return classical_brute_force_many(inst, [objective], cap)[0]


def classical_majorization_gap(inst: ProblemInstance, cap: int = BRUTE_FORCE_CAP) -> float:
    """Largest prefix-sum excess of any classical assignment over the conjectured one.

    Non-positive (up to rounding) exactly when the conjectured diagonal
    majorizes every classical alignment operator.
    """
    ref = np.cumsum(sorted_desc(classical_diagonal(inst, conjectured_assignment(inst))))
    worst = -np.inf
    for _, block in iter_classical_diagonals(inst, cap):
        prefix = np.cumsum(-np.sort(-block, axis=1), axis=1)
        worst = max(worst, float(np.max(prefix - ref[None, :])))
    return worst
