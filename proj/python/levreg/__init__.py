"""Leverage-score sampling least squares and ERM solvers."""

import json

from . import _levreg
from ._levreg import (
    LevregError,
    SparseMatrix,
    erm_value_grad,
    generate,
    oracle_leverage,
    oracle_solve,
    oracle_spectral,
)

__all__ = [
    "LevregError",
    "SparseMatrix",
    "erm",
    "erm_value_grad",
    "generate",
    "leverage",
    "oracle_leverage",
    "oracle_solve",
    "oracle_spectral",
    "solve",
]


def solve(a, b, **kwargs):
    """Least squares min ||Ax - b||. Returns (x, report dict)."""
    x, report = _levreg.solve(a, b, **kwargs)
    return x, json.loads(report)


def leverage(a, **kwargs):
    """Leverage score overestimates of A. Returns (u, report dict)."""
    u, report = _levreg.leverage(a, **kwargs)
    return u, json.loads(report)


def erm(a, psi="logistic-aug", **kwargs):
    """Minimize sum_i psi(a_i^T x). Returns (x, report dict)."""
    x, report = _levreg.erm(a, psi, **kwargs)
    return x, json.loads(report)
