"""Command line front end: read instance files, run checks, write JSON reports.

Exit codes: 0 when nothing was violated, 1 when a check found a violation,
2 on malformed input.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .alignment import (
    ProblemInstance,
    build_alignment_operator,
    conjectured_operator,
    conjectured_tuple,
    lambda1_bound,
    random_pure_tuple,
    strong_conjecture_check,
)
from .classical import (
    BRUTE_FORCE_CAP,
    classical_align,
    classical_brute_force_many,
    classical_diagonal,
    conjectured_assignment,
    enumeration_size,
    random_assignment,
)
from .dual import (
    DUAL_CAP,
    DualInstance,
    dual_brute_force,
    dual_objective,
    dual_partition_solve,
    placement_count,
    random_feasible_state,
)
from .majorization import majorizes
from .norms import Objective
from .overlap import schatten_power_value
from .projectors import OverlapConstraint, feasible, optimal_pair, projector_sweep
from .search import EVIDENCE, NO_VIOLATION, PRESETS, VIOLATION, SearchConfig, gamma_sweep, hill_climb, run_preset
from .tensor import hermitian_spectrum, random_density

SUM_TOL = 1e-9
CHECK_TOL = 1e-9


class SchemaError(ValueError):
    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


# ---------------------------------------------------------------------------
# input files


def _read_json(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SchemaError(path, f"cannot read file ({exc.strerror})") from None
    try:
        return json.loads(text), text.encode()
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from None


def _need(doc: dict, key: str, kind, where: str = ""):
    field = f"{where}{key}"
    if not isinstance(doc, dict) or key not in doc:
        raise SchemaError(field, "missing field")
    value = doc[key]
    if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise SchemaError(field, "must be an integer")
    if kind is float and (isinstance(value, bool) or not isinstance(value, (int, float))):
        raise SchemaError(field, "must be a number")
    if kind is list and not isinstance(value, list):
        raise SchemaError(field, "must be a list")
    if kind is str and not isinstance(value, str):
        raise SchemaError(field, "must be a string")
    if kind is dict and not isinstance(value, dict):
        raise SchemaError(field, "must be an object")
    return value


def _probability(values, field: str, sort: bool) -> np.ndarray:
    if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in values):
        raise SchemaError(field, "entries must be numbers")
    arr = np.array(values, dtype=float)
    if arr.size == 0:
        raise SchemaError(field, "must not be empty")
    if arr.min() < 0:
        raise SchemaError(field, "entries must be non-negative")
    if abs(arr.sum() - 1) > SUM_TOL:
        raise SchemaError(field, f"must sum to 1 within {SUM_TOL:g} (got {arr.sum():.12g})")
    if sort and np.any(np.diff(arr) > 0):
        raise SchemaError(field, "must be sorted non-increasingly")
    return arr / arr.sum()


def _sites(raw, n: int, field: str) -> frozenset:
    if not isinstance(raw, list) or not all(isinstance(s, int) and not isinstance(s, bool) for s in raw):
        raise SchemaError(field, "must be a list of site indices")
    if any(not 1 <= s <= n for s in raw):
        raise SchemaError(field, f"site indices must lie in 1..{n}")
    if len(set(raw)) != len(raw):
        raise SchemaError(field, "repeated site index")
    return frozenset(raw)


def parse_instance(doc) -> ProblemInstance:
    d = _need(doc, "d", int)
    n = _need(doc, "n", int)
    if d < 1 or n < 0:
        raise SchemaError("d" if d < 1 else "n", "out of range")
    qdoc = _need(doc, "Q", dict)
    eig = _need(qdoc, "eigenvalues", list, "Q.")
    if len(eig) != d:
        raise SchemaError("Q.eigenvalues", f"must have length d={d}")
    q = _probability(eig, "Q.eigenvalues", sort=True)
    terms = _need(doc, "mu", list)
    mu = {}
    for i, term in enumerate(terms):
        sub = _sites(_need(term, "subset", list, f"mu[{i}]."), n, f"mu[{i}].subset")
        if sub in mu:
            raise SchemaError(f"mu[{i}].subset", f"duplicate subset {sorted(sub)}")
        mu[sub] = _need(term, "weight", float, f"mu[{i}].")
    if not mu:
        raise SchemaError("mu", "must not be empty")
    w = _probability(list(mu.values()), "mu", sort=False)
    cap = doc.get("cap")
    if cap is not None and (isinstance(cap, bool) or not isinstance(cap, int) or cap < 1):
        raise SchemaError("cap", "must be a positive integer")
    try:
        return ProblemInstance(d, n, tuple(q), dict(zip(mu, w)), cap)
    except ValueError as exc:
        raise SchemaError("instance", str(exc)) from None


def parse_dual_instance(doc) -> DualInstance:
    dims = _need(doc, "dims", list)
    if not dims or not all(isinstance(x, int) and not isinstance(x, bool) and x >= 1 for x in dims):
        raise SchemaError("dims", "must be a non-empty list of positive integers")
    n = len(dims)
    terms = {}
    for i, term in enumerate(_need(doc, "terms", list)):
        sub = _sites(_need(term, "subset", list, f"terms[{i}]."), n, f"terms[{i}].subset")
        if sub in terms:
            raise SchemaError(f"terms[{i}].subset", f"duplicate subset {sorted(sub)}")
        text = _need(term, "objective", str, f"terms[{i}].")
        try:
            terms[sub] = Objective.parse(text)
        except ValueError as exc:
            raise SchemaError(f"terms[{i}].objective", str(exc)) from None
    if not terms:
        raise SchemaError("terms", "must not be empty")
    p = _probability(_need(doc, "p", list), "p", sort=True)
    try:
        return DualInstance(tuple(dims), terms, tuple(p))
    except ValueError as exc:
        raise SchemaError("instance", str(exc)) from None


def _objective(text: str) -> Objective:
    try:
        return Objective.parse(text)
    except ValueError as exc:
        raise SchemaError("--objective", str(exc)) from None


# ---------------------------------------------------------------------------
# output


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, frozenset):
        return sorted(x)
    return x


def _digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _write_report(args, command: str, instance_bytes: bytes, body: dict, spectra: dict) -> None:
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out", "csv")}
    report = {
        "tool": "spinalign",
        "version": __version__,
        "command": command,
        "config": config,
        "seed": getattr(args, "seed", None),
        "instance_sha256": _digest(instance_bytes),
        "spectra": {k: list(v) for k, v in spectra.items()},
        **body,
    }
    Path(args.out).write_text(json.dumps(_plain(report), sort_keys=True, indent=2) + "\n")
    if getattr(args, "csv", None):
        with open(args.csv, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["label", "index", "eigenvalue"])
            for label in sorted(spectra):
                for i, v in enumerate(spectra[label]):
                    writer.writerow([label, i + 1, repr(float(v))])


def _config_bytes(args) -> bytes:
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out", "csv")}
    return json.dumps(config, sort_keys=True).encode()


def _exit_code(violated: bool) -> int:
    return 1 if violated else 0


# ---------------------------------------------------------------------------
# subcommands


def cmd_verify(args) -> int:
    doc, raw = _read_json(args.instance)
    inst = parse_instance(doc)
    obj = _objective(args.objective)
    rng = np.random.default_rng(args.seed)
    conj_op = conjectured_operator(inst)
    conj_val = obj.on_operator(conj_op)
    conj_spec = hermitian_spectrum(conj_op)
    bound = lambda1_bound(inst)
    checks = []
    witnesses = []
    violated = False
    top_err = abs(conj_spec[0] - bound)
    checks.append({"check": "top_eigenvalue_bound_attained", "error": top_err, "ok": top_err <= 1e-9})
    violated |= top_err > 1e-9
    power = int(obj.param) if obj.kind == "schatten" and float(obj.param).is_integer() and obj.param <= 8 else None
    for t in range(args.tuples):
        states = random_pure_tuple(inst, rng)
        op = build_alignment_operator(inst, states, check=False)
        val = obj.on_operator(op)
        entry = {"tuple": t, "objective": val, "conjectured": conj_val, "ok": val <= conj_val + args.tol}
        lam1 = hermitian_spectrum(op)[0]
        entry["top_eigenvalue_ok"] = bool(lam1 <= bound + args.tol)
        if power is not None:
            entry["power_trace_ok"] = bool(
                schatten_power_value(inst, states, power) <= schatten_power_value(inst, conjectured_tuple(inst), power) + args.tol
            )
        verdict = strong_conjecture_check(inst, states, args.samples, args.seed + t, args.tol)
        entry["preorder"] = verdict.outcome
        entry["measures_checked"] = verdict.samples_checked
        if verdict.witness is not None:
            witnesses.append({"tuple": t, "p": verdict.witness.p, "k": verdict.witness.k, "gap": verdict.witness.gap})
        bad = not (entry["ok"] and entry["top_eigenvalue_ok"] and entry.get("power_trace_ok", True) and verdict.ok)
        violated |= bad
        checks.append(entry)
    body = {
        "verdict": VIOLATION if violated else NO_VIOLATION,
        "label": EVIDENCE,
        "values": {"conjectured": conj_val, "top_eigenvalue_bound": bound},
        "checks": checks,
        "witnesses": witnesses,
    }
    _write_report(args, "verify", raw, body, {"conjectured": conj_spec})
    return _exit_code(violated)


def _vectors(tup: dict) -> list:
    out = []
    for sub in sorted(tup, key=lambda s: (len(s), sorted(s))):
        v = tup[sub]
        out.append({"subset": sorted(sub), "real": np.real(v).tolist(), "imag": np.imag(v).tolist()})
    return out


def cmd_search(args) -> int:
    if args.preset:
        res = run_preset(args.preset, args.restarts, args.steps, args.seed)
        _write_report(args, "search", _config_bytes(args), res, {})
        return _exit_code(res["verdict"] == VIOLATION)
    if not args.instance:
        raise SchemaError("--instance", "required unless --preset is given")
    doc, raw = _read_json(args.instance)
    inst = parse_instance(doc)
    cfg = SearchConfig(_objective(args.objective), args.restarts, args.steps, args.step_size, args.seed, args.tol)
    rep = hill_climb(inst, cfg)
    best_op = build_alignment_operator(
        inst, {s: np.outer(v, v.conj()) for s, v in rep.best_tuple.items()}, check=False
    )
    body = {
        **rep.summary(),
        "search": cfg.echo(),
        "best_tuple": _vectors(rep.best_tuple),
        "restart_final_values": [t[-1] for t in rep.traces],
        "witnesses": [] if rep.verdict == NO_VIOLATION else [{"restart": rep.best_restart, "gap": rep.gap}],
    }
    spectra = {"conjectured": hermitian_spectrum(conjectured_operator(inst)), "best": hermitian_spectrum(best_op)}
    _write_report(args, "search", raw, body, spectra)
    return _exit_code(rep.verdict == VIOLATION)


def cmd_classical(args) -> int:
    doc, raw = _read_json(args.instance)
    inst = parse_instance(doc)
    if args.seed is not None:
        start = random_assignment(inst, np.random.default_rng(args.seed))
    else:
        start = {s: (inst.d,) * len(s) for s in inst.support}
    traj = classical_align(inst, start)
    steps = []
    violated = False
    for i in range(1, len(traj)):
        ok = majorizes(traj[i][1], traj[i - 1][1], CHECK_TOL)
        violated |= not ok
        steps.append({"step": i, "majorizes_previous": ok})
    conj = classical_diagonal(inst, conjectured_assignment(inst))
    spectra = {f"step{i}": s for i, (_, s) in enumerate(traj)}
    body = {"trajectory": steps, "start": {",".join(map(str, sorted(s))): list(v) for s, v in start.items()}}
    size = enumeration_size(inst)
    if size <= args.cap:
        objs = [Objective("fan", k) for k in range(1, inst.dim + 1)]
        objs += [Objective("schatten", 2.0), Objective("schatten", 3.0)]
        results = classical_brute_force_many(inst, objs, args.cap)
        rows = []
        for obj, (_, best) in zip(objs, results):
            ref = obj.on_spectrum(conj)
            ok = best <= ref + CHECK_TOL
            violated |= not ok
            rows.append({"objective": str(obj), "brute_force": best, "conjectured": ref, "ok": ok})
        body["brute_force"] = {"assignments": size, "results": rows}
    else:
        body["brute_force"] = {"assignments": size, "skipped": f"exceeds cap {args.cap}"}
    body["verdict"] = VIOLATION if violated else NO_VIOLATION
    _write_report(args, "classical", raw, body, spectra)
    return _exit_code(violated)


def cmd_projectors(args) -> int:
    con = OverlapConstraint(args.dim, args.r1, args.r2, args.c)
    if not feasible(con):
        raise SchemaError("--c", "infeasible: r1+r2-d > floor(c)")
    rng = np.random.default_rng([args.seed, 1])
    pairs = [(args.s1, args.s2)] + [tuple(rng.uniform(0.05, 1.0, size=2)) for _ in range(args.extra_s)]
    res = projector_sweep(con, args.trials, pairs, args.seed)
    integral = abs(con.c - round(con.c)) < 1e-12
    ok_overlap = abs(res.optimal_overlap - con.c) <= 1e-10
    ok_comm = (not integral) or res.commutator_norm <= 1e-10
    violated = not (res.ok and ok_overlap and ok_comm and res.formula_error <= 1e-10)
    q1, q2 = optimal_pair(con)
    body = {
        "verdict": VIOLATION if violated else NO_VIOLATION,
        "values": {
            "optimal_overlap": res.optimal_overlap,
            "commutator_norm": res.commutator_norm,
            "worst_prefix_gap": res.worst_gap,
            "formula_error": res.formula_error,
            "pairs_checked": res.pairs_checked,
        },
        "s_pairs": [list(p) for p in pairs],
        "witnesses": res.violations,
    }
    spectra = {"optimal_s1_s2": hermitian_spectrum(args.s1 * q1 + args.s2 * q2)}
    _write_report(args, "projectors", _config_bytes(args), body, spectra)
    return _exit_code(violated)


def cmd_dual(args) -> int:
    doc, raw = _read_json(args.instance)
    inst = parse_dual_instance(doc)
    body = {"partition": inst.is_partition(), "values": {}}
    spectra = {}
    violated = False
    best_val = None
    if inst.is_partition():
        tau, val = dual_partition_solve(inst, args.cap)
        body["values"]["partition_solve"] = val
        spectra["partition_solve_diagonal"] = np.real(np.diag(tau))
        best_val = val
    count = placement_count(inst)
    if count <= args.cap:
        tau_b, val_b = dual_brute_force(inst, args.cap)
        body["values"]["brute_force"] = val_b
        spectra["brute_force_diagonal"] = np.real(np.diag(tau_b))
        if best_val is not None and abs(best_val - val_b) > CHECK_TOL:
            violated = True
        best_val = val_b if best_val is None else max(best_val, val_b)
    else:
        body["brute_force_skipped"] = f"{count} placements exceeds cap {args.cap}"
    if args.samples:
        if args.seed is None:
            raise SchemaError("--seed", "required when --samples is positive")
        rng = np.random.default_rng(args.seed)
        worst = -math.inf
        for _ in range(args.samples):
            worst = max(worst, dual_objective(inst, random_feasible_state(inst, rng)))
        body["values"]["best_sampled_quantum"] = worst
        if best_val is not None and worst > best_val + CHECK_TOL:
            violated = True
    body["verdict"] = VIOLATION if violated else NO_VIOLATION
    body["label"] = EVIDENCE
    _write_report(args, "dual", raw, body, spectra)
    return _exit_code(violated)


def cmd_sweep_gamma(args) -> int:
    if not 1 <= args.rank < args.dim:
        raise SchemaError("--rank", f"must lie in 1..{args.dim - 1} so that tau has a kernel")
    if not 0 <= args.p1 <= 1:
        raise SchemaError("--p1", "must lie in [0, 1]")
    tau = random_density(args.dim, args.seed, rank=args.rank)
    sweep = gamma_sweep(tau, args.alpha, args.grid, (args.p1, 1 - args.p1))
    body = {
        "verdict": VIOLATION if sweep.flagged else NO_VIOLATION,
        "label": EVIDENCE,
        "values": {"tau_spectrum": hermitian_spectrum(tau)},
        "gammas": sweep.gammas,
        "witnesses": [{"gamma": g} for g in sweep.flagged],
    }
    spectra = {f"gamma={g:.6f}": s for g, s in zip(sweep.gammas, sweep.spectra)}
    _write_report(args, "sweep-gamma", _config_bytes(args), body, spectra)
    return _exit_code(bool(sweep.flagged))


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spinalign", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed_required: bool):
        p.add_argument("--out", required=True, help="JSON report path")
        p.add_argument("--csv", help="optional CSV spectra table (label, index, eigenvalue)")
        p.add_argument("--seed", type=int, required=seed_required, default=None)

    p = sub.add_parser("verify", help="sample random tuples and check them against the conjectured one")
    p.add_argument("--instance", required=True)
    p.add_argument("--objective", default="fan:1")
    p.add_argument("--samples", type=int, default=32, help="random measures per preorder check")
    p.add_argument("--tuples", type=int, default=8, help="random pure tuples to test")
    p.add_argument("--tol", type=float, default=1e-9)
    common(p, True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("search", help="hill-climb over pure tuples")
    p.add_argument("--instance")
    p.add_argument("--preset", choices=PRESETS)
    p.add_argument("--objective", default="fan:1")
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--step-size", type=float, default=0.5)
    p.add_argument("--tol", type=float, default=1e-7)
    common(p, True)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("classical", help="classical alignment trajectory and exhaustive check")
    p.add_argument("--instance", required=True)
    p.add_argument("--cap", type=int, default=BRUTE_FORCE_CAP)
    common(p, False)
    p.set_defaults(func=cmd_classical)

    p = sub.add_parser("projectors", help="optimal projector pair versus random feasible pairs")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--r1", type=int, required=True)
    p.add_argument("--r2", type=int, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--s1", type=float, default=1.0)
    p.add_argument("--s2", type=float, default=1.0)
    p.add_argument("--extra-s", type=int, default=0, help="additional random (s1, s2) pairs")
    p.add_argument("--trials", type=int, default=100)
    common(p, True)
    p.set_defaults(func=cmd_projectors)

    p = sub.add_parser("dual", help="partition solver and exhaustive oracle for the dual problem")
    p.add_argument("--instance", required=True)
    p.add_argument("--cap", type=int, default=DUAL_CAP)
    p.add_argument("--samples", type=int, default=0, help="random feasible quantum states to compare")
    common(p, False)
    p.set_defaults(func=cmd_dual)

    p = sub.add_parser("sweep-gamma", help="mix a random low-rank state with a rotated pure state")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--alpha", type=int, required=True, help="1-based eigenvector index of tau")
    p.add_argument("--grid", type=int, default=101)
    p.add_argument("--p1", type=float, default=0.5)
    common(p, True)
    p.set_defaults(func=cmd_sweep_gamma)
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())
