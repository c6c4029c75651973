"""Ordered products of lifted terms and the overlap inequalities.

For subsets ``I_1 .. I_l`` and operands ``R_i`` of trace norm at most one,
every unitarily invariant norm of ``prod_i (R_i (x) Q^I_i^c)`` is largest
when each ``R_i`` is the projector onto ``|q_1>^(x)I_i``. Integer Schatten
powers of alignment operators expand into traces of such products, which is
what makes the conjectured tuple optimal for them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .alignment import ProblemInstance, build_alignment_operator
from .norms import fan_norm, operator_norm, schatten_norm, trace_norm
from .tensor import SiteLayout, as_subset, lift, lift_general

OPERAND_TOL = 1e-10
BOUND_TOL = 1e-9
MAX_POWER = 8


@dataclass
class ProductSpec:
    family: list
    operands: list

    def __post_init__(self):
        self.family = [as_subset(s) for s in self.family]
        self.operands = [np.asarray(r, dtype=complex) for r in self.operands]
        if len(self.family) != len(self.operands):
            raise ValueError("family and operands must have equal length")
        for r in self.operands:
            if trace_norm(r) > 1 + OPERAND_TOL:
                raise ValueError("operands must have trace norm at most 1")


def conjectured_operands(d: int, family: Sequence) -> list[np.ndarray]:
    out = []
    for sub in family:
        k = d ** len(sub)
        r = np.zeros((k, k), dtype=complex)
        r[0, 0] = 1.0
        out.append(r)
    return out


def ordered_product(inst: ProblemInstance, spec: ProductSpec) -> np.ndarray:
    out = np.eye(inst.dim, dtype=complex)
    for sub, r in zip(spec.family, spec.operands):
        out = out @ lift(inst.layout, sub, r, inst.q)
    return out


def ordered_product_general(layout: SiteLayout, spec: ProductSpec, factors: Sequence[Mapping]) -> np.ndarray:
    """Product with a per-term, per-site complement factor ``factors[i][site]``."""
    if len(factors) != len(spec.family):
        raise ValueError("need one factor map per term")
    out = np.eye(layout.dim, dtype=complex)
    for sub, r, fac in zip(spec.family, spec.operands, factors):
        out = out @ lift_general(layout, sub, r, fac)
    return out


def matrix_norm(name: str) -> Callable[[np.ndarray], float]:
    """``trace``, ``operator``, ``abstrace`` (|tr|), ``fan:K`` or ``schatten:P``."""
    if name == "trace":
        return trace_norm
    if name == "operator":
        return operator_norm
    if name == "abstrace":
        return lambda a: float(abs(np.trace(a)))
    kind, _, value = name.partition(":")
    if kind == "fan":
        k = int(value)
        return lambda a: fan_norm(a, min(k, min(a.shape)))
    if kind == "schatten":
        p = float(value)
        return lambda a: schatten_norm(a, p)
    raise ValueError(f"unknown norm {name!r}")


def overlap_bound_check(
    inst: ProblemInstance, spec: ProductSpec, norm: str = "trace", factors: Sequence[Mapping] | None = None
) -> tuple[float, float, bool]:
    """Norm of the product at the given operands versus at the conjectured ones."""
    f = matrix_norm(norm)
    ref = ProductSpec(spec.family, conjectured_operands(inst.d, spec.family))
    if factors is None:
        lhs = f(ordered_product(inst, spec))
        rhs = f(ordered_product(inst, ref))
    else:
        lhs = f(ordered_product_general(inst.layout, spec, factors))
        rhs = f(ordered_product_general(inst.layout, ref, factors))
    return lhs, rhs, bool(lhs <= rhs + BOUND_TOL)


def schatten_power_value(inst: ProblemInstance, states: Mapping, m: int) -> float:
    """``tr(A^m)`` for the alignment operator ``A`` of ``states``."""
    if m < 1 or int(m) != m:
        raise ValueError("power must be a positive integer")
    if m > MAX_POWER:
        raise ValueError(f"power {m} exceeds cap {MAX_POWER}")
    a = build_alignment_operator(inst, states)
    out = a
    for _ in range(int(m) - 1):
        out = out @ a
    return float(np.trace(out).real)


def power_trace_terms(inst: ProblemInstance, states: Mapping, m: int):
    """Yield ``(weight, sequence, trace)`` for each term of the expanded ``tr(A^m)``."""
    support = inst.support
    lifted = {s: lift(inst.layout, s, states[s], inst.q) for s in support}
    for seq in itertools.product(support, repeat=m):
        w = float(np.prod([inst.mu[s] for s in seq]))
        prod = np.eye(inst.dim, dtype=complex)
        for s in seq:
            prod = prod @ lifted[s]
        yield w, seq, complex(np.trace(prod))


def trace_norm_contraction_check(a1, a3, s12, t23, tol: float = BOUND_TOL) -> tuple[float, bool]:
    """Trace norm of ``(A1 (x) T23)(S12 (x) A3)`` on ``K1 (x) K2 (x) K3``.

    Inputs must satisfy ``||A1||, ||A3|| <= 1`` (operator norm) and
    ``||S12||_1, ||T23||_1 <= 1``.
    """
    a1, a3, s12, t23 = (np.asarray(x, dtype=complex) for x in (a1, a3, s12, t23))
    d1, d3 = a1.shape[0], a3.shape[0]
    d2, rem = divmod(s12.shape[0], d1)
    if rem or t23.shape != (d2 * d3, d2 * d3):
        raise ValueError("inconsistent factor dimensions")
    if operator_norm(a1) > 1 + tol or operator_norm(a3) > 1 + tol:
        raise ValueError("input bound violated: ||A1||, ||A3|| must be <= 1")
    if trace_norm(s12) > 1 + tol or trace_norm(t23) > 1 + tol:
        raise ValueError("input bound violated: trace norms of S12, T23 must be <= 1")
    value = trace_norm(np.kron(a1, t23) @ np.kron(s12, a3))
    return value, bool(value <= 1 + tol)


def random_trace_ball(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Random operator with trace norm in ``(0, 1]``; rank-one about half the time."""
    if rng.random() < 0.5:
        a = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        b = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        r = np.outer(a / np.linalg.norm(a), (b / np.linalg.norm(b)).conj())
    else:
        g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        r = g / trace_norm(g)
    return r * rng.uniform(0.5, 1.0) if rng.random() < 0.5 else r


def random_contraction(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Random operator with operator norm at most 1."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return g / operator_norm(g) * rng.uniform(0.5, 1.0)
