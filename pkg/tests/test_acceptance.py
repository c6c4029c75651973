"""The eleven acceptance criteria, each at its stated sample count and tolerance.

Every test records a pass/fail line (printed in the terminal summary) before
asserting, so a failure still shows up in the table.
"""

import json
import time

import numpy as np

from conftest import record
from spinalign import cli
from spinalign.alignment import ProblemInstance
from spinalign.classical import (
    classical_align,
    classical_brute_force_many,
    classical_diagonal,
    conjectured_assignment,
    random_assignment,
)
from spinalign.dual import (
    DualInstance,
    dual_brute_force,
    dual_objective,
    dual_partition_solve,
    placement_count,
    random_feasible_state,
)
from spinalign.majorization import (
    TTransform,
    apply_t_transform,
    apply_transfer,
    chain_matrix,
    isotone_map,
    majorant_box_simplex,
    majorizes,
    replay_chain,
    transfer_chain,
    transfer_of_ttransform,
    ttransform_of_transfer,
)
from spinalign.norms import Objective, top_k_sum
from spinalign.overlap import ProductSpec, overlap_bound_check, random_contraction, random_trace_ball, trace_norm_contraction_check
from spinalign.projectors import (
    OverlapConstraint,
    feasible,
    jordan_blocks,
    optimal_pair,
    pair_spectrum,
    projector_sweep,
)
from spinalign.search import SearchConfig, hill_climb, random_instance
from spinalign.tensor import hermitian_spectrum, random_density, random_projector, random_unitary

F = frozenset


def random_doubly_stochastic(m, rng):
    # convex combination of permutation matrices
    w = rng.dirichlet(np.ones(4))
    return sum(wi * np.eye(m)[rng.permutation(m)] for wi in w)


def test_criterion_01_majorization_core():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst_replay = worst_round = 0.0
    ok = True
    for _ in range(1000):
        m = int(rng.integers(2, 9))
        x = rng.dirichlet(np.ones(m)) * rng.uniform(0.5, 3)
        y = random_doubly_stochastic(m, rng) @ x
        ok &= majorizes(x, y, 1e-9)
        chain = transfer_chain(x, y)
        worst_replay = max(worst_replay, float(np.max(np.abs(np.sort(replay_chain(x, chain)) - np.sort(y)))))
        d = chain_matrix(m, chain)
        ok &= bool(np.allclose(d.sum(0), 1) and np.allclose(d.sum(1), 1) and d.min() >= -1e-15)
        i, j = (int(v) for v in rng.choice(m, 2, replace=False))
        tt = TTransform(i, j, float(rng.random()))
        z = apply_t_transform(x, tt)
        tr = transfer_of_ttransform(x, tt)
        back, _ = apply_transfer(np.sort(z)[::-1], tr)
        again = apply_t_transform(np.sort(back)[::-1], ttransform_of_transfer(np.sort(z)[::-1], tr))
        worst_round = max(
            worst_round,
            float(np.max(np.abs(np.sort(back) - np.sort(x)))),
            float(np.max(np.abs(np.sort(again) - np.sort(z)))),
        )
    elapsed = time.perf_counter() - start
    passed = bool(ok and worst_replay <= 1e-9 and worst_round <= 1e-12 and elapsed < 10)
    record(1, "majorization core", passed, f"replay {worst_replay:.1e}, round trip {worst_round:.1e}, {elapsed:.1f}s")
    assert passed


def test_criterion_02_ky_fan_relation():
    rng = np.random.default_rng(102)
    ok = True
    worst_sat = 0.0
    for _ in range(1000):
        d = int(rng.integers(1, 9))
        ell = int(rng.integers(1, 5))
        p = rng.dirichlet(np.ones(ell))
        rhos = [random_density(d, rng) for _ in range(ell)]
        mix = hermitian_spectrum(sum(pi * r for pi, r in zip(p, rhos)))
        avg = sum(pi * hermitian_spectrum(r) for pi, r in zip(p, rhos))
        ok &= majorizes(avg, mix, 1e-9)
        u = random_unitary(d, rng)
        aligned = [u @ np.diag(hermitian_spectrum(r)) @ u.conj().T for r in rhos]
        sat = hermitian_spectrum(sum(pi * r for pi, r in zip(p, aligned)))
        worst_sat = max(worst_sat, float(np.max(np.abs(sat - avg))))
    passed = bool(ok and worst_sat <= 1e-9)
    record(2, "Ky Fan relation for mixtures", passed, f"saturation error {worst_sat:.1e}")
    assert passed


def test_criterion_03_fan_max_principle():
    rng = np.random.default_rng(103)
    ok = True
    worst_eq = 0.0
    pairs = 0
    for d in range(2, 7):
        for _ in range(2):
            g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            t = (g + g.conj().T) / 2
            vals, vecs = np.linalg.eigh(t)
            for k in range(1, d + 1):
                pairs += 1
                top = top_k_sum(t, k)
                for _ in range(500):
                    p = random_projector(d, k, rng)
                    ok &= bool(np.trace(t @ p).real <= top + 1e-9)
                frame = vecs[:, ::-1][:, :k]
                worst_eq = max(worst_eq, abs(np.trace(t @ frame @ frame.conj().T).real - top))
    passed = bool(ok and worst_eq <= 1e-9)
    record(3, "Fan maximum principle", passed, f"{pairs} (T, k) pairs, equality error {worst_eq:.1e}")
    assert passed


def test_criterion_04_classical_theorem():
    rng = np.random.default_rng(104)
    start = time.perf_counter()
    ok = True
    worst = -np.inf
    for _ in range(200):
        d = int(rng.integers(2, 4))
        n = int(rng.integers(1, 4))
        inst = random_instance(d, n, rng)
        traj = classical_align(inst, random_assignment(inst, rng))
        ok &= all(majorizes(traj[i][1], traj[i - 1][1], 1e-9) for i in range(1, len(traj)))
        objs = [Objective("fan", k) for k in range(1, inst.dim + 1)]
        objs += [Objective("schatten", 2.0), Objective("schatten", 3.0)]
        conj = classical_diagonal(inst, conjectured_assignment(inst))
        for obj, (_, best) in zip(objs, classical_brute_force_many(inst, objs)):
            gap = best - obj.on_spectrum(conj)
            worst = max(worst, gap)
            ok &= gap <= 1e-9
    elapsed = time.perf_counter() - start
    passed = bool(ok and elapsed < 60)
    record(4, "classical theorem", passed, f"worst excess {worst:.1e}, {elapsed:.1f}s")
    assert passed


def test_criterion_05_schatten_integer_theorem():
    start = time.perf_counter()
    rng = np.random.default_rng(105)
    worst = -np.inf
    for d, n in [(2, 2), (2, 3), (3, 2)]:
        inst = random_instance(d, n, rng)
        for m in (2, 3, 4):
            rep = hill_climb(inst, SearchConfig(Objective("schatten", m), restarts=200, steps=100, seed=10 * d + n + m))
            worst = max(worst, rep.gap)
    elapsed = time.perf_counter() - start
    passed = bool(worst <= 1e-7 and elapsed < 300)
    record(5, "integer Schatten theorem (search)", passed, f"worst gap {worst:.1e}, {elapsed:.1f}s")
    assert passed


def test_criterion_06_strong_conjecture_two_qubits():
    rng = np.random.default_rng(106)
    subsets = [F(), F({1}), F({2}), F({1, 2})]
    worst = -np.inf
    for trial in range(5):
        w = rng.dirichlet(np.ones(4))
        inst = ProblemInstance(2, 2, (0.5, 0.5), dict(zip(subsets, w)))
        for k in range(1, 5):
            rep = hill_climb(inst, SearchConfig(Objective("fan", k), restarts=200, steps=60, seed=100 * trial + k))
            worst = max(worst, rep.gap)
    passed = bool(worst <= 1e-7)
    record(6, "strong conjecture at n = d = 2 (search)", passed, f"worst gap {worst:.1e}")
    assert passed


def random_constraint(rng):
    while True:
        d = int(rng.integers(2, 9))
        r1, r2 = (int(v) for v in rng.integers(1, d + 1, size=2))
        c = float(rng.choice([rng.integers(0, min(r1, r2) + 1), rng.uniform(0, min(r1, r2))]))
        con = OverlapConstraint(d, r1, r2, c)
        if feasible(con):
            return con


def test_criterion_07_two_projector_theorem():
    rng = np.random.default_rng(107)
    ok = True
    worst_overlap = worst_comm = worst_formula = 0.0
    for i in range(20):
        con = random_constraint(rng)
        pairs = [tuple(rng.uniform(0.05, 2.0, size=2)) for _ in range(20)]
        res = projector_sweep(con, 500, pairs, seed=1000 + i, tol=1e-9)
        ok &= res.ok
        worst_overlap = max(worst_overlap, abs(res.optimal_overlap - con.c))
        if float(con.c).is_integer():
            worst_comm = max(worst_comm, res.commutator_norm)
        # block formula versus the dense eigensolver, on the optimum and a random pair
        q1, q2 = optimal_pair(con)
        dec = jordan_blocks(q1, q2)
        for s1, s2 in pairs:
            dense = hermitian_spectrum(s1 * q1 + s2 * q2)
            worst_formula = max(worst_formula, float(np.max(np.abs(dense - pair_spectrum(dec, s1, s2)))))
    passed = bool(ok and worst_overlap <= 1e-10 and worst_comm <= 1e-10 and worst_formula <= 1e-10)
    record(
        7,
        "two-projector theorem",
        passed,
        f"overlap err {worst_overlap:.1e}, commutator {worst_comm:.1e}, formula err {worst_formula:.1e}",
    )
    assert passed


def test_criterion_08_overlap_lemmas():
    rng = np.random.default_rng(108)
    ok = True
    worst = -np.inf
    for _ in range(500):
        d = int(rng.integers(2, 4))
        n = int(rng.integers(1, 4))
        q = np.sort(rng.dirichlet(np.ones(d)))[::-1]
        inst = ProblemInstance(d, n, tuple(q), {F(range(1, n + 1)): 1.0})
        ell = int(rng.integers(1, 4))
        family = [F(int(s) + 1 for s in np.nonzero(rng.random(n) < 0.5)[0]) for _ in range(ell)]
        spec = ProductSpec(family, [random_trace_ball(d ** len(s), rng) for s in family])
        for norm in ("trace", "operator", "fan:2"):
            lhs, rhs, holds = overlap_bound_check(inst, spec, norm)
            worst = max(worst, lhs - rhs)
            ok &= holds
    worst_c = 0.0
    for _ in range(500):
        d1, d2, d3 = (int(v) for v in rng.integers(1, 4, size=3))
        value, holds = trace_norm_contraction_check(
            random_contraction(d1, rng), random_contraction(d3, rng), random_trace_ball(d1 * d2, rng), random_trace_ball(d2 * d3, rng)
        )
        worst_c = max(worst_c, value)
        ok &= holds
    passed = bool(ok)
    record(8, "overlap lemmas", passed, f"worst product excess {worst:.1e}, largest contraction value {worst_c:.3f}")
    assert passed


def sample_box_simplex(m, e, rng):
    """A random point of [0, 1]^m with coordinate sum e."""
    y = rng.dirichlet(np.ones(m)) * e
    for _ in range(100):
        over = y > 1
        if not over.any():
            break
        spill = float(np.sum(y[over] - 1))
        y[over] = 1
        room = 1 - y
        room[over] = 0
        y += spill * room / room.sum()
    return np.clip(y, 0, 1)


def test_criterion_09_majorant_and_isotone():
    rng = np.random.default_rng(109)
    convex = [lambda v: v * v, abs, np.exp, lambda v: max(v - 0.3, 0.0), lambda v: 0.0]
    ok_iso = True
    for i in range(1000):
        m = int(rng.integers(2, 7))
        x = rng.uniform(-1, 1, size=m)
        y = random_doubly_stochastic(m, rng) @ x
        g = convex[i % len(convex)]
        t = float(rng.uniform(-1, 3))
        ok_iso &= majorizes(isotone_map(x, t, g), isotone_map(y, t, g), 1e-9)
    ok_box = True
    for _ in range(1000):
        m = int(rng.integers(1, 8))
        e = float(rng.uniform(0, m))
        pt = sample_box_simplex(m, e, rng)
        ok_box &= abs(pt.sum() - e) < 1e-9 and majorizes(majorant_box_simplex(m, e), pt, 1e-9)
    passed = bool(ok_iso and ok_box)
    record(9, "isotone map and box-simplex majorant", passed, f"isotone {ok_iso}, majorant {ok_box}")
    assert passed


def random_partition_instance(rng, max_count=200_000):
    while True:
        n = int(rng.integers(1, 5))
        dims = tuple(int(v) for v in rng.integers(2, 5, size=n))
        dim = int(np.prod(dims))
        if dim > 64:
            continue
        sites = rng.permutation(np.arange(1, n + 1))
        cuts = sorted(rng.choice(np.arange(1, n), size=int(rng.integers(0, n)), replace=False)) if n > 1 else []
        terms = {}
        for block in np.split(sites, cuts):
            sub = F(int(s) for s in block)
            size = int(np.prod([dims[s - 1] for s in sub]))
            kind = rng.choice(["fan", "schatten", "const"], p=[0.5, 0.4, 0.1])
            if kind == "fan":
                terms[sub] = Objective("fan", int(rng.integers(1, size + 1)))
            elif kind == "schatten":
                terms[sub] = Objective("schatten", float(rng.choice([1.5, 2.0, 3.0, 4.0])))
            else:
                terms[sub] = Objective("const", float(rng.random()))
        k = int(rng.integers(1, min(dim, 5) + 1))
        p = np.zeros(dim)
        p[:k] = np.sort(rng.dirichlet(np.ones(k)))[::-1]
        inst = DualInstance(dims, terms, tuple(p))
        if placement_count(inst) <= max_count:
            return inst


def test_criterion_10_dual_partition():
    rng = np.random.default_rng(110)
    ok = True
    worst_diff = 0.0
    worst_excess = -np.inf
    for _ in range(50):
        inst = random_partition_instance(rng)
        _, solved = dual_partition_solve(inst)
        _, brute = dual_brute_force(inst)
        worst_diff = max(worst_diff, abs(solved - brute))
        for _ in range(500):
            excess = dual_objective(inst, random_feasible_state(inst, rng)) - solved
            worst_excess = max(worst_excess, excess)
    ok = worst_diff <= 1e-9 and worst_excess <= 1e-9
    passed = bool(ok)
    record(10, "dual problem with a partition", passed, f"solver vs oracle {worst_diff:.1e}, sampled excess {worst_excess:.1e}")
    assert passed


QUBITS = {
    "d": 2,
    "n": 2,
    "Q": {"eigenvalues": [0.7, 0.3]},
    "mu": [{"subset": [1], "weight": 0.25}, {"subset": [2], "weight": 0.25}, {"subset": [1, 2], "weight": 0.5}],
}
DUAL = {
    "dims": [2, 3],
    "terms": [{"subset": [1], "objective": "fan:1"}, {"subset": [2], "objective": "schatten:2"}],
    "p": [0.5, 0.3, 0.2, 0, 0, 0],
}


def test_criterion_11_reproducible_reports(tmp_path):
    inst = tmp_path / "inst.json"
    inst.write_text(json.dumps(QUBITS))
    dual = tmp_path / "dual.json"
    dual.write_text(json.dumps(DUAL))
    commands = {
        "verify": ["verify", "--instance", str(inst), "--objective", "schatten:2", "--samples", "8", "--tuples", "3", "--seed", "7"],
        "search": ["search", "--instance", str(inst), "--objective", "fan:2", "--restarts", "3", "--steps", "20", "--seed", "7"],
        "search-preset": ["search", "--preset", "schatten-nonint", "--restarts", "2", "--steps", "10", "--seed", "7"],
        "classical": ["classical", "--instance", str(inst), "--seed", "7"],
        "projectors": ["projectors", "--dim", "5", "--r1", "2", "--r2", "3", "--c", "1.4", "--trials", "20", "--extra-s", "3", "--seed", "7"],
        "dual": ["dual", "--instance", str(dual), "--samples", "20", "--seed", "7"],
        "sweep-gamma": ["sweep-gamma", "--dim", "4", "--rank", "2", "--alpha", "2", "--grid", "9", "--seed", "7"],
    }
    mismatched = []
    for name, argv in commands.items():
        outputs = []
        for run in range(2):
            out, table = tmp_path / f"{name}{run}.json", tmp_path / f"{name}{run}.csv"
            code = cli.run(argv + ["--out", str(out), "--csv", str(table)])
            outputs.append((code, out.read_bytes(), table.read_bytes()))
        if outputs[0] != outputs[1] or outputs[0][0] != 0:
            mismatched.append(name)
    passed = not mismatched
    record(11, "reproducible CLI reports", passed, f"{len(commands)} invocations" + (f", differing: {mismatched}" if mismatched else ""))
    assert passed
