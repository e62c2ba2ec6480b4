"""Globally adaptive Gauss-Kronrod (7/15) quadrature over a list of pieces.

Each piece owns a *rule* ``rule(lo, hi) -> (kronrod, gauss, kronrod_abs)``
on its own parameter interval.  The driver keeps every subinterval in a heap
ordered by its error estimate ``|kronrod - gauss|`` and bisects the worst one
until the summed estimate drops below ``tol * |total|`` (with a rounding floor
proportional to the integral of ``|f|``).
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ._pykernels import NODES15, WG15, WK15
from .errors import QuadratureError

Rule = Callable[[float, float], "tuple[complex, complex, float]"]

DEFAULT_TOL = 1e-10
DEFAULT_MAX_DEPTH = 40
MAX_INTERVALS = 20000
_ROUNDING_FLOOR = 50 * np.finfo(float).eps


@dataclass(frozen=True)
class QuadResult:
    value: complex
    error: float
    abs_integral: float
    n_intervals: int


def gk15_rule(f: Callable[[np.ndarray], np.ndarray]) -> Rule:
    """Wrap a vectorized integrand on a real parameter into a GK15 rule."""

    def rule(lo: float, hi: float):
        half = 0.5 * (hi - lo)
        vals = np.asarray(f(0.5 * (lo + hi) + half * NODES15))
        k = complex(np.dot(WK15, vals)) * half
        g = complex(np.dot(WG15, vals)) * half
        kabs = float(np.dot(WK15, np.abs(vals))) * abs(half)
        return k, g, kabs

    return rule


def integrate_pieces(
    pieces: Sequence[tuple[Rule, float, float]],
    tol: float = DEFAULT_TOL,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> QuadResult:
    """Integrate the sum of all pieces to relative tolerance ``tol``.

    Raises
    ------
    QuadratureError
        If an interval that still dominates the error is already at
        ``max_depth`` bisections, or the interval budget is exhausted.
    """
    if not pieces:
        return QuadResult(0j, 0.0, 0.0, 0)
    heap = []
    counter = 0
    for rule, lo, hi in pieces:
        k, g, a = rule(lo, hi)
        heap.append((-abs(k - g), counter, rule, lo, hi, 0, k, a))
        counter += 1
    heapq.heapify(heap)

    while True:
        total = complex(math.fsum(e[6].real for e in heap), math.fsum(e[6].imag for e in heap))
        err = math.fsum(-e[0] for e in heap)
        l1 = math.fsum(e[7] for e in heap)
        if not (math.isfinite(err) and math.isfinite(abs(total))):
            raise QuadratureError("integrand produced non-finite values")
        if err <= max(tol * abs(total), _ROUNDING_FLOOR * l1):
            return QuadResult(total, err, l1, len(heap))
        if len(heap) >= MAX_INTERVALS:
            raise QuadratureError(f"interval budget {MAX_INTERVALS} exhausted (error {err:.3e})")
        _, _, rule, lo, hi, depth, _, _ = heapq.heappop(heap)
        if depth >= max_depth:
            raise QuadratureError(
                f"no convergence after {max_depth} bisections near [{lo}, {hi}] (error {err:.3e})"
            )
        mid = 0.5 * (lo + hi)
        for a, b in ((lo, mid), (mid, hi)):
            k, g, ab = rule(a, b)
            heapq.heappush(heap, (-abs(k - g), counter, rule, a, b, depth + 1, k, ab))
            counter += 1


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    tol: float = DEFAULT_TOL,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> QuadResult:
    """Adaptive integral of a vectorized function over ``[lo, hi]``."""
    return integrate_pieces([(gk15_rule(f), lo, hi)], tol=tol, max_depth=max_depth)
