"""The Prym differential ``omega = C * prod (z - P_j)**(alpha_j - 1) dz``.

Multi-valued powers are always evaluated as ``exp((alpha - 1) * log)`` with an
explicitly tracked argument (a :class:`BranchState`), never through a
principal-branch power.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, Iterable

import numpy as np

from ._backend import kernels
from .divisor import (
    ConePoint,
    Divisor,
    complete_at_infinity,
    divisor_from_json,
    divisor_to_json,
    validate_gauss_bonnet,
)
from .errors import DivisorError, PoleError, ValidationError
from .path import Path, default_clearance
from .quadrature import DEFAULT_MAX_DEPTH, gk15_rule, integrate_pieces

__all__ = [
    "PrymDifferential",
    "BranchState",
    "log_derivative",
    "residue_at",
    "evaluate_with_branch",
    "metric_density",
    "reconstruct_by_exponential",
    "infinity_exponent",
    "evaluate_in_infinity_chart",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PrymDifferential:
    """Divisor (completed at infinity) plus a nonzero scale constant.

    A divisor without a point at infinity is completed automatically; one that
    already has it must satisfy Gauss-Bonnet as given.
    """

    divisor: Divisor
    scale: complex = 1.0

    def __post_init__(self):
        d = self.divisor
        if d.infinity_point is None:
            d = complete_at_infinity(d)
            object.__setattr__(self, "divisor", d)
        gb = validate_gauss_bonnet(d)
        if not gb.passed:
            raise DivisorError(f"Gauss-Bonnet fails: degree {gb.degree}, deficit {gb.deficit}")
        scale = complex(self.scale)
        if scale == 0:
            raise ValidationError("scale must be nonzero")
        object.__setattr__(self, "scale", scale)

    @classmethod
    def from_points(cls, pairs: Iterable[tuple[Any, Any]], scale: complex = 1.0,
                    infinity: Any = None) -> "PrymDifferential":
        return cls(Divisor.from_pairs(pairs, infinity=infinity), scale)

    @cached_property
    def finite_points(self) -> tuple[ConePoint, ...]:
        return self.divisor.finite_points

    @cached_property
    def positions(self) -> np.ndarray:
        return np.array([p.position for p in self.finite_points], dtype=complex)

    @cached_property
    def alphas(self) -> np.ndarray:
        return np.array([float(p.alpha) for p in self.finite_points], dtype=float)

    @cached_property
    def exponents(self) -> np.ndarray:
        return np.array([float(p.exponent) for p in self.finite_points], dtype=float)

    @cached_property
    def alpha_infinity(self) -> float:
        p = self.divisor.infinity_point
        return 1.0 if p is None else float(p.alpha)

    @cached_property
    def log_scale(self) -> complex:
        return cmath.log(self.scale)

    @cached_property
    def r_chart(self) -> float:
        """Beyond this radius evaluation uses the chart ``w = 1/z``."""
        m = float(np.max(np.abs(self.positions))) if len(self.positions) else 0.0
        return 2.0 * (1.0 + m)

    @cached_property
    def default_clearance(self) -> float:
        return default_clearance(self.positions)

    def index_of(self, position: complex) -> int | None:
        for k, p in enumerate(self.positions):
            if p == position:
                return k
        return None

    def rescaled(self, factor: complex) -> "PrymDifferential":
        return PrymDifferential(self.divisor, self.scale * factor)

    def to_json(self) -> dict:
        out = divisor_to_json(self.divisor)
        out["scale"] = {"re": self.scale.real, "im": self.scale.imag}
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "PrymDifferential":
        sc = obj.get("scale") or {"re": 1.0, "im": 0.0}
        return cls(divisor_from_json(obj), complex(float(sc.get("re", 0.0)), float(sc.get("im", 0.0))))


@dataclass(frozen=True)
class BranchState:
    """Continuously tracked ``arg(base_point - P_j)`` for every finite cone point."""

    base_point: complex
    args: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "base_point", complex(self.base_point))
        object.__setattr__(self, "args", tuple(float(a) for a in self.args))

    @classmethod
    def principal(cls, omega: PrymDifferential, z: complex) -> "BranchState":
        """Principal arguments in (-pi, pi] at ``z``."""
        z = complex(z)
        d = z - omega.positions
        if np.any(d == 0):
            raise PoleError(f"{z} is a cone point; no principal branch")
        return cls(z, tuple(float(a) for a in np.angle(d)))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.args, dtype=float)

    def windings(self, other: "BranchState") -> np.ndarray:
        """Integer turns from ``self`` to ``other`` (same base point)."""
        return np.rint((other.array - self.array) / TWO_PI).astype(int)

    def is_consistent(self, omega: PrymDifferential, atol: float = 1e-9) -> bool:
        d = self.base_point - omega.positions
        k = (self.array - np.angle(d)) / TWO_PI
        return bool(np.all(np.abs(k - np.rint(k)) * TWO_PI <= atol))


def log_derivative(omega: PrymDifferential, z: complex) -> complex:
    """``d(log f)/dz = sum (alpha_j - 1) / (z - P_j)``; single-valued."""
    z = complex(z)
    hit = (omega.positions == z) & (omega.exponents != 0)
    if np.any(hit):
        raise PoleError(f"log-derivative has a pole at {z}")
    return complex(kernels.log_derivative_values(np.array([z]), omega.positions, omega.exponents)[0])


def residue_at(omega: PrymDifferential, j: int):
    """Residue of the log-derivative at finite cone point ``j``: ``alpha_j - 1``."""
    pts = omega.finite_points
    if not 0 <= j < len(pts):
        raise IndexError(f"cone point index {j} out of range (0..{len(pts) - 1})")
    return pts[j].exponent


def infinity_exponent(omega: PrymDifferential):
    """Exponent of ``omega`` at infinity read in the chart ``w = 1/z``."""
    total = sum((p.exponent for p in omega.finite_points), Fraction(0))
    if not omega.divisor.exact:
        total = float(total)
    return -total - 2


def _check_branch(omega: PrymDifferential, z: complex, b: BranchState) -> None:
    if len(b.args) != len(omega.positions):
        raise ValidationError("branch state has wrong number of arguments")
    if abs(b.base_point - z) > 1e-12 * (1.0 + abs(z)):
        raise ValidationError(f"branch state is located at {b.base_point}, not {z}")


def _log_value(omega: PrymDifferential, z: complex, b: BranchState) -> complex:
    d = z - omega.positions
    for k in np.flatnonzero(d == 0):
        kind = "pole" if omega.exponents[k] < 0 else "zero"
        if omega.exponents[k] != 0:
            raise PoleError(f"{z} is a cone point ({kind} of the differential)")
    s = kernels.branch_log_sum(np.array([z]), z, b.array, omega.positions, omega.exponents,
                               -1, omega.r_chart)
    return omega.log_scale + complex(s[0])


def evaluate_with_branch(omega: PrymDifferential, z: complex, b: BranchState) -> complex:
    """Coefficient ``f`` of ``omega = f dz`` at ``z`` on the branch ``b``."""
    z = complex(z)
    _check_branch(omega, z, b)
    return cmath.exp(_log_value(omega, z, b))


def metric_density(omega: PrymDifferential, z: complex) -> float:
    """``|f(z)|**2``; branch independent since the exponents are real."""
    z = complex(z)
    d = z - omega.positions
    hit = (d == 0) & (omega.exponents != 0)
    if np.any(hit):
        k = int(np.flatnonzero(hit)[0])
        kind = "pole" if omega.exponents[k] < 0 else "zero"
        raise PoleError(f"density has a {kind} at cone point {omega.positions[k]}")
    mask = omega.exponents != 0
    with np.errstate(over="ignore", under="ignore"):
        direct = abs(omega.scale) ** 2 * float(np.prod(np.abs(d[mask]) ** (2.0 * omega.exponents[mask])))
    if math.isfinite(direct) and direct > 0:
        return direct
    # log route when the plain product over- or underflows
    s = math.log(abs(omega.scale)) + float(np.dot(omega.exponents[mask], np.log(np.abs(d[mask]))))
    return math.exp(2.0 * s)


def evaluate_in_infinity_chart(omega: PrymDifferential, w: complex, b: BranchState) -> complex:
    """Coefficient ``g`` of ``omega = g dw`` with ``w = 1/z``; ``b`` is located at ``z = 1/w``."""
    w = complex(w)
    if w == 0:
        raise PoleError("w = 0 is the point at infinity itself")
    z = 1.0 / w
    # dz = -dw / w**2
    return -evaluate_with_branch(omega, z, b) / (w * w)


def reconstruct_by_exponential(
    omega: PrymDifferential,
    path: Path,
    tol: float = 1e-13,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> complex:
    """``f(z0) * exp(integral of the log-derivative along path)``.

    ``f(z0)`` is taken on the principal branch at the path start.  The
    log-derivative is single valued, so this route never tracks arguments and
    serves as an independent check on :func:`evaluate_with_branch`.
    """
    clr = path.clearance or omega.default_clearance
    path.check_clearance(omega.positions, clr)
    z0 = path.start
    f0 = evaluate_with_branch(omega, z0, BranchState.principal(omega, z0))
    pieces = []
    for a, b in path.segments():
        def ld(t, a=a, b=b):
            z = a + (b - a) * t
            return kernels.log_derivative_values(z, omega.positions, omega.exponents) * (b - a)

        pieces.append((gk15_rule(ld), 0.0, 1.0))
    res = integrate_pieces(pieces, tol=tol, max_depth=max_depth)
    return f0 * cmath.exp(res.value)
