"""Majorization tools and numerical checks for spin alignment problems."""

__version__ = "0.1.0"

from .alignment import (
    ProblemInstance,
    build_alignment_operator,
    conjectured_operator,
    conjectured_tuple,
    more_aligned,
    strong_conjecture_check,
)
from .majorization import majorizes, perfectly_aligned, transfer_chain
from .norms import Objective, fan_norm, schatten_norm

__all__ = [
    "ProblemInstance",
    "Objective",
    "build_alignment_operator",
    "conjectured_operator",
    "conjectured_tuple",
    "fan_norm",
    "majorizes",
    "more_aligned",
    "perfectly_aligned",
    "schatten_norm",
    "strong_conjecture_check",
    "transfer_chain",
]
