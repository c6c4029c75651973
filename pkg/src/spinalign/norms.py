"""Unitarily invariant norms and Fan's maximum principle."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .tensor import hermitian_spectrum, hermitize, singular_values


def schatten_norm(a, p: float, psd: bool = False) -> float:
    """Schatten ``p``-norm ``(sum sigma_i^p)^(1/p)``.

    With ``psd=True`` and integer ``p`` the value is ``tr(A^p)^(1/p)`` via
    repeated multiplication, which skips the SVD.
    """
    if p < 1:
        raise ValueError(f"Schatten order must be >= 1, got {p}")
    a = np.asarray(a)
    if psd and float(p).is_integer():
        m = int(p)
        power = np.linalg.matrix_power(hermitize(a), m)
        return float(max(np.trace(power).real, 0.0) ** (1.0 / m))
    s = singular_values(a)
    if math.isinf(p):
        return float(s[0]) if s.size else 0.0
    top = s[0] if s.size else 0.0
    if top == 0:
        return 0.0
    # scale by the top value to avoid overflow for large p
    return float(top * np.sum((s / top) ** p) ** (1.0 / p))


def fan_norm(a, k: int) -> float:
    """Sum of the ``k`` largest singular values."""
    a = np.asarray(a)
    dim = min(a.shape)
    if not 1 <= k <= dim:
        raise ValueError(f"Fan order k={k} out of range 1..{dim}")
    return float(np.sum(singular_values(a)[:k]))


def operator_norm(a) -> float:
    return float(singular_values(np.asarray(a))[0])


def trace_norm(a) -> float:
    return float(np.sum(singular_values(np.asarray(a))))


def top_k_sum(t, k: int) -> float:
    """Sum of the ``k`` largest eigenvalues of a self-adjoint operator."""
    lam = hermitian_spectrum(t)
    if not 1 <= k <= lam.size:
        raise ValueError(f"k={k} out of range 1..{lam.size}")
    return float(np.sum(lam[:k]))


class Dominance(str, enum.Enum):
    A_DOMINATES = "A_dominates"
    B_DOMINATES = "B_dominates"
    EQUAL = "equal"
    INCOMPARABLE = "incomparable"


def fan_dominance(a, b, tol: float = 1e-9) -> Dominance:
    """Compare every Fan norm of ``a`` and ``b``."""
    sa = np.cumsum(singular_values(np.asarray(a)))
    sb = np.cumsum(singular_values(np.asarray(b)))
    if sa.shape != sb.shape:
        raise ValueError("operators must have equal dimensions")
    a_wins = bool(np.any(sa - sb > tol))
    b_wins = bool(np.any(sb - sa > tol))
    if a_wins and b_wins:
        return Dominance.INCOMPARABLE
    if a_wins:
        return Dominance.A_DOMINATES
    if b_wins:
        return Dominance.B_DOMINATES
    return Dominance.EQUAL


# ---------------------------------------------------------------------------
# objectives evaluated on spectra of positive operators


@dataclass(frozen=True)
class Objective:
    """A unitarily invariant convex objective, evaluated on an eigenvalue vector.

    kinds: ``fan`` (order k), ``schatten`` (order p), ``renyi`` (negative
    Renyi entropy of order p > 1, a monotone image of the Schatten p-norm),
    ``const`` (a constant value).
    """

    kind: str
    param: float

    def __post_init__(self):
        if self.kind not in ("fan", "schatten", "renyi", "const"):
            raise ValueError(f"unknown objective kind {self.kind!r}")
        if self.kind == "fan" and (self.param < 1 or not float(self.param).is_integer()):
            raise ValueError("fan order must be a positive integer")
        if self.kind == "schatten" and self.param < 1:
            raise ValueError("Schatten order must be >= 1")
        if self.kind == "renyi" and self.param <= 1:
            raise ValueError("Renyi order must exceed 1")

    @classmethod
    def parse(cls, text: str) -> "Objective":
        """Parse ``fan:K``, ``schatten:P``, ``renyi:P`` or ``const:C``."""
        kind, sep, value = text.partition(":")
        if not sep:
            raise ValueError(f"objective must look like kind:value, got {text!r}")
        try:
            num = float(value)
        except ValueError:
            raise ValueError(f"bad objective parameter in {text!r}") from None
        return cls(kind.strip().lower(), num)

    def __str__(self) -> str:
        p = self.param
        return f"{self.kind}:{int(p) if float(p).is_integer() else p}"

    def on_spectrum(self, lam) -> float:
        lam = np.clip(np.asarray(lam, dtype=float), 0.0, None)
        return float(self.on_spectra(lam[None, :])[0])

    def on_spectra(self, lams) -> np.ndarray:
        """Vectorized over rows; each row is a non-negative spectrum (any order)."""
        lams = np.clip(np.asarray(lams, dtype=float), 0.0, None)
        if self.kind == "const":
            return np.full(lams.shape[0], float(self.param))
        if self.kind == "fan":
            k = int(self.param)
            if k > lams.shape[1]:
                raise ValueError(f"Fan order {k} exceeds dimension {lams.shape[1]}")
            part = -np.partition(-lams, k - 1, axis=1)[:, :k]
            return part.sum(axis=1)
        p = float(self.param)
        top = lams.max(axis=1)
        safe = np.where(top > 0, top, 1.0)
        norm = top * np.sum((lams / safe[:, None]) ** p, axis=1) ** (1.0 / p)
        if self.kind == "schatten":
            return norm
        return p / (p - 1) * np.log(norm)

    def on_operator(self, rho) -> float:
        return self.on_spectrum(hermitian_spectrum(rho))
