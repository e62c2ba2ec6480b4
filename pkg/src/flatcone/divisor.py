"""Real-coefficient divisors on the Riemann sphere.

A divisor is stored as a list of cone points, each carrying the cone
parameter ``alpha`` (cone angle ``2*pi*alpha``).  The divisor exponent at the
point is ``alpha - 1``.  Rational angles are kept as :class:`fractions.Fraction`
so that the Gauss-Bonnet identity ``sum(alpha_j - 1) == -2`` can be checked
exactly.
"""
from __future__ import annotations

import math
import numbers
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Union

from .errors import DivisorError

__all__ = [
    "INFINITY",
    "ConePoint",
    "Divisor",
    "GaussBonnetResult",
    "parse_alpha",
    "degree",
    "validate_gauss_bonnet",
    "complete_at_infinity",
    "combine",
    "divisor_from_json",
    "divisor_to_json",
]

EULER_CHARACTERISTIC = -2
FLOAT_TOLERANCE = 1e-12
LARGE_ALPHA_WARNING = 50


class _Infinity:
    """The point at infinity of the extended complex plane (singleton)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INFINITY"

    def __reduce__(self):
        return (_Infinity, ())


INFINITY = _Infinity()

Alpha = Union[Fraction, float]
Position = Union[complex, _Infinity]


def parse_alpha(value: Any) -> Alpha:
    """Normalize an angle parameter.

    Integers, fractions and strings (``"p/q"`` or a decimal literal) become an
    exact :class:`Fraction`; floats stay floats.
    """
    if isinstance(value, bool):
        raise TypeError("alpha must be a number or a 'p/q' string, not bool")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, numbers.Integral):
        return Fraction(int(value))
    if isinstance(value, numbers.Rational):
        return Fraction(value.numerator, value.denominator)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"cannot parse alpha {value!r}") from exc
    if isinstance(value, numbers.Real):
        x = float(value)
        if not math.isfinite(x):
            raise ValueError(f"alpha must be finite, got {x}")
        return x
    raise TypeError(f"unsupported alpha type {type(value).__name__}")


def _exact_value(alpha: Alpha) -> Fraction:
    # floats are taken at their shortest decimal representation
    if isinstance(alpha, Fraction):
        return alpha
    return Fraction(repr(alpha))


@dataclass(frozen=True)
class ConePoint:
    position: Position
    alpha: Alpha

    def __post_init__(self):
        alpha = parse_alpha(self.alpha)
        object.__setattr__(self, "alpha", alpha)
        pos = self.position
        if pos is not INFINITY:
            if isinstance(pos, str):
                if pos.lower() != "infinity":
                    raise ValueError(f"unknown position symbol {pos!r}")
                pos = INFINITY
            else:
                pos = complex(pos)
                if not (math.isfinite(pos.real) and math.isfinite(pos.imag)):
                    raise ValueError(f"finite position required, got {pos}")
            object.__setattr__(self, "position", pos)
        if abs(float(alpha)) > LARGE_ALPHA_WARNING:
            warnings.warn(
                f"|alpha| = {abs(float(alpha))} > {LARGE_ALPHA_WARNING}: "
                "quadrature may be ill-conditioned",
                RuntimeWarning,
                stacklevel=3,
            )

    @property
    def is_infinite(self) -> bool:
        return self.position is INFINITY

    @property
    def exponent(self) -> Alpha:
        """Divisor exponent ``alpha - 1``."""
        return self.alpha - 1

    @property
    def exact(self) -> bool:
        return isinstance(self.alpha, Fraction)


@dataclass(frozen=True)
class Divisor:
    """Ordered collection of distinct cone points, at most one at infinity."""

    points: tuple[ConePoint, ...] = field(default_factory=tuple)

    def __post_init__(self):
        pts = tuple(p if isinstance(p, ConePoint) else ConePoint(*p) for p in self.points)
        object.__setattr__(self, "points", pts)
        seen = set()
        n_inf = 0
        for p in pts:
            if p.is_infinite:
                n_inf += 1
                continue
            if p.position in seen:
                raise DivisorError(f"duplicate cone point at {p.position}")
            seen.add(p.position)
        if n_inf > 1:
            raise DivisorError("at most one cone point may sit at infinity")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[Any, Any]], infinity: Any = None) -> "Divisor":
        """Build from ``(position, alpha)`` pairs plus an optional alpha at infinity."""
        pts = [ConePoint(pos, a) for pos, a in pairs]
        if infinity is not None:
            pts.append(ConePoint(INFINITY, infinity))
        return cls(tuple(pts))

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    @property
    def finite_points(self) -> tuple[ConePoint, ...]:
        return tuple(p for p in self.points if not p.is_infinite)

    @property
    def infinity_point(self) -> ConePoint | None:
        for p in self.points:
            if p.is_infinite:
                return p
        return None

    @property
    def exact(self) -> bool:
        return all(p.exact for p in self.points)

    def exponent_map(self) -> dict[Position, Alpha]:
        return {p.position: p.exponent for p in self.points}

    def degree(self) -> Alpha:
        return degree(self)


@dataclass(frozen=True)
class GaussBonnetResult:
    passed: bool
    degree: Alpha
    deficit: Alpha
    exact: bool

    def __bool__(self) -> bool:
        return self.passed


def degree(d: Divisor) -> Alpha:
    """Sum of the exponents ``alpha_j - 1``, including the point at infinity."""
    if d.exact:
        return sum((p.exponent for p in d.points), Fraction(0))
    return float(sum((_exact_value(p.alpha) - 1 for p in d.points), Fraction(0)))


def validate_gauss_bonnet(d: Divisor) -> GaussBonnetResult:
    """Check ``degree(d) == -2`` (exactly for rational angles, to 1e-12 otherwise)."""
    exact_deg = sum((_exact_value(p.alpha) - 1 for p in d.points), Fraction(0))
    deficit_exact = exact_deg - EULER_CHARACTERISTIC
    if d.exact:
        return GaussBonnetResult(deficit_exact == 0, exact_deg, deficit_exact, True)
    passed = abs(deficit_exact) <= Fraction(FLOAT_TOLERANCE)
    return GaussBonnetResult(passed, float(exact_deg), float(deficit_exact), False)


def complete_at_infinity(d: Divisor) -> Divisor:
    """Add the cone point at infinity that makes the degree exactly -2.

    A resulting alpha of 1 means infinity is a smooth point and nothing is added.
    """
    if d.infinity_point is not None:
        raise DivisorError("divisor already has a point at infinity")
    alpha_inf = EULER_CHARACTERISTIC + 1 - degree(d)
    if alpha_inf == 1:
        return d
    return Divisor(d.points + (ConePoint(INFINITY, alpha_inf),))


def combine(a: Divisor, b: Divisor) -> Divisor:
    """Group product: exponents add at shared positions.

    Shared positions whose summed exponent vanishes are dropped.
    """
    merged: dict[Position, Alpha] = {}
    order: list[Position] = []
    shared: set = set()
    for p in a.points + b.points:
        if p.position in merged:
            merged[p.position] = merged[p.position] + p.exponent
            shared.add(p.position)
        else:
            merged[p.position] = p.exponent
            order.append(p.position)
    pts = [
        ConePoint(pos, merged[pos] + 1)
        for pos in order
        if not (pos in shared and merged[pos] == 0)
    ]
    return Divisor(tuple(pts))


def _alpha_to_json(alpha: Alpha):
    if isinstance(alpha, Fraction):
        return str(alpha)
    return alpha


def divisor_from_json(obj: dict) -> Divisor:
    """Parse ``{"points": [{"re", "im", "alpha"}...], "infinity": {"alpha"} | null}``."""
    if not isinstance(obj, dict) or "points" not in obj:
        raise DivisorError("divisor JSON needs a 'points' list")
    pts = []
    for entry in obj["points"]:
        try:
            pos = complex(float(entry.get("re", 0.0)), float(entry.get("im", 0.0)))
            pts.append(ConePoint(pos, entry["alpha"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise DivisorError(f"bad cone point entry {entry!r}: {exc}") from exc
    inf = obj.get("infinity")
    if inf is not None:
        try:
            pts.append(ConePoint(INFINITY, inf["alpha"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise DivisorError(f"bad infinity entry {inf!r}: {exc}") from exc
    return Divisor(tuple(pts))


def divisor_to_json(d: Divisor) -> dict:
    out: dict = {"points": [], "infinity": None}
    for p in d.points:
        if p.is_infinite:
            out["infinity"] = {"alpha": _alpha_to_json(p.alpha)}
        else:
            out["points"].append(
                {"re": p.position.real, "im": p.position.imag, "alpha": _alpha_to_json(p.alpha)}
            )
    return out

