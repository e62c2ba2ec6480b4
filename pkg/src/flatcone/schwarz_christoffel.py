"""Half-plane to polygon maps ``F(z) = C * int prod (t - x_k)**(alpha_k - 1) dt``.

Prevertices are normalized to ``x_1 = 0``, ``x_2 = 1`` and ``x_n = infinity``;
the remaining ``n - 3`` are recovered from a target polygon by nonlinear least
squares on logarithmic gaps.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import least_squares

from .develop import integrate_along_path, integrate_to_cone_point, integrate_to_infinity
from .divisor import INFINITY, Divisor, parse_alpha
from .errors import ConvergenceError, DivergenceError, ValidationError
from .path import Path
from .prym import BranchState, PrymDifferential

__all__ = [
    "PolygonSpec",
    "PrevertexConfig",
    "SCSolveReport",
    "polygon_alphas",
    "sc_differential",
    "sc_forward",
    "sc_vertices",
    "sc_side_lengths",
    "sc_solve_parameters",
    "initial_prevertices",
    "polygon_from_json",
    "polygon_to_json",
]

SOLVE_TOL = 1e-8
SIDE_TOL = 1e-13


def _segments_cross(a, b, c, d) -> bool:
    def orient(p, q, r):
        v = ((q - p).conjugate() * (r - p)).imag
        return 0 if v == 0 else (1 if v > 0 else -1)

    def on_seg(p, q, r):
        return min(p.real, q.real) <= r.real <= max(p.real, q.real) and \
            min(p.imag, q.imag) <= r.imag <= max(p.imag, q.imag)

    o1, o2, o3, o4 = orient(a, b, c), orient(a, b, d), orient(c, d, a), orient(c, d, b)
    if o1 != o2 and o3 != o4:
        return True
    return (o1 == 0 and on_seg(a, b, c)) or (o2 == 0 and on_seg(a, b, d)) or \
        (o3 == 0 and on_seg(c, d, a)) or (o4 == 0 and on_seg(c, d, b))


def polygon_alphas(vertices: Sequence[complex]) -> tuple[float, ...]:
    """Interior angles over pi of a counterclockwise polygon."""
    v = [complex(x) for x in vertices]
    n = len(v)
    out = []
    for k in range(n):
        turn = cmath.phase((v[(k + 1) % n] - v[k]) / (v[k] - v[k - 1]))
        out.append(1.0 - turn / math.pi)
    return tuple(out)


@dataclass(frozen=True)
class PolygonSpec:
    """Simple counterclockwise polygon; ``alphas`` default to the measured angles."""

    vertices: tuple[complex, ...]
    alphas: tuple | None = None

    def __post_init__(self):
        v = tuple(complex(x) for x in self.vertices)
        n = len(v)
        if n < 3:
            raise ValidationError("a polygon needs at least 3 vertices")
        if len(set(v)) != n:
            raise ValidationError("polygon vertices must be pairwise distinct")
        for i in range(n):
            for k in range(i + 1, n):
                if k == i + 1 or (i == 0 and k == n - 1):
                    continue
                if _segments_cross(v[i], v[(i + 1) % n], v[k], v[(k + 1) % n]):
                    raise ValidationError(f"polygon boundary is not simple (edges {i} and {k} meet)")
        area = 0.5 * math.fsum((v[i].conjugate() * v[(i + 1) % n]).imag for i in range(n))
        if area <= 0:
            raise ValidationError("polygon vertices must be listed counterclockwise")
        measured = polygon_alphas(v)
        if self.alphas is None:
            alphas = measured
        else:
            if len(self.alphas) != n:
                raise ValidationError("need one alpha per vertex")
            alphas = tuple(parse_alpha(a) for a in self.alphas)
            for k, (a, m) in enumerate(zip(alphas, measured)):
                if abs(float(a) - m) > 1e-9:
                    raise ValidationError(f"alpha[{k}] = {a} disagrees with the vertex angle ({m:.12g})")
        total = sum(alphas, Fraction(0)) if all(isinstance(a, Fraction) for a in alphas) else sum(map(float, alphas))
        if abs(total - (n - 2)) > 1e-9:
            raise ValidationError(f"angle sum {total} != n - 2 = {n - 2}")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "alphas", alphas)

    @property
    def n(self) -> int:
        return len(self.vertices)

    def side_lengths(self) -> np.ndarray:
        v = np.array(self.vertices)
        return np.abs(np.roll(v, -1) - v)


@dataclass(frozen=True)
class PrevertexConfig:
    """Finite prevertices ``x_1 < ... < x_{n-1}``; ``x_n`` is infinity."""

    prevertices: tuple[float, ...]

    def __post_init__(self):
        x = tuple(float(t) for t in self.prevertices)
        if len(x) < 2:
            raise ValidationError("need at least two finite prevertices")
        if x[0] != 0.0 or x[1] != 1.0:
            raise ValidationError("prevertices must be normalized to x_1 = 0, x_2 = 1")
        if any(not math.isfinite(t) for t in x) or any(b <= a for a, b in zip(x, x[1:])):
            raise ValidationError("prevertices must be finite and strictly increasing")
        object.__setattr__(self, "prevertices", x)

    @property
    def n(self) -> int:
        return len(self.prevertices) + 1

    @classmethod
    def from_gaps(cls, log_gaps: Sequence[float]) -> "PrevertexConfig":
        x = [0.0, 1.0]
        for y in log_gaps:
            x.append(x[-1] + math.exp(y))
        return cls(tuple(x))

    @property
    def log_gaps(self) -> np.ndarray:
        return np.log(np.diff(self.prevertices)[1:])


@dataclass(frozen=True)
class SCSolveReport:
    config: PrevertexConfig
    residual: float
    iterations: int
    ratios: tuple[float, ...]


def _check_alphas(cfg: PrevertexConfig, alphas: Sequence) -> tuple:
    if len(alphas) != cfg.n:
        raise ValidationError(f"need {cfg.n} alphas (one per prevertex, infinity last), got {len(alphas)}")
    return tuple(parse_alpha(a) for a in alphas)


def sc_differential(cfg: PrevertexConfig, alphas: Sequence, scale: complex = 1.0) -> PrymDifferential:
    """The integrand as a Prym differential; the last alpha sits at infinity."""
    a = _check_alphas(cfg, alphas)
    div = Divisor.from_pairs(list(zip(cfg.prevertices, a[:-1])), infinity=a[-1])
    return PrymDifferential(div, scale)


def _apex(z: complex) -> complex:
    # interior point of the upper half-plane seen from 0 and z without touching the axis
    return 0.5 * z + 1j * (0.5 + 0.5 * abs(z))


def sc_forward(cfg: PrevertexConfig, alphas: Sequence, z, scale: complex = 1.0,
               tol: float = SIDE_TOL) -> complex:
    """``F(z)`` normalized by ``F(x_1) = 0``, for ``z`` in the closed upper half-plane.

    The path runs through the open half-plane, where every factor uses its
    principal argument in ``(0, pi)``; ``z`` may be ``INFINITY``.
    """
    omega = sc_differential(cfg, alphas, scale)
    if z is INFINITY:
        m = 1j
        b = BranchState.principal(omega, m)
        back = integrate_to_cone_point(omega, Path((m, 0.0)), b, tol=tol)
        return integrate_to_infinity(omega, m, 1j, b, tol=tol) - back
    z = complex(z)
    if z.imag < 0:
        raise ValidationError(f"{z} is in the lower half-plane")
    if z == 0:
        return 0j
    if omega.alphas[0] <= 0:
        raise DivergenceError("alpha at x_1 <= 0: base prevertex is at infinite distance")
    m = _apex(z)
    b = BranchState.principal(omega, m)
    back = integrate_to_cone_point(omega, Path((m, 0.0)), b, tol=tol)
    if omega.index_of(z) is not None:
        fwd = integrate_to_cone_point(omega, Path((m, z)), b, tol=tol)
    else:
        fwd = integrate_along_path(omega, Path((m, z)), b, tol=tol).value
    return fwd - back


def sc_vertices(cfg: PrevertexConfig, alphas: Sequence, scale: complex = 1.0,
                tol: float = SIDE_TOL) -> np.ndarray:
    """Images of all prevertices, infinity last."""
    pts = [sc_forward(cfg, alphas, x, scale, tol) for x in cfg.prevertices]
    pts.append(sc_forward(cfg, alphas, INFINITY, scale, tol))
    return np.array(pts)


def sc_side_lengths(cfg: PrevertexConfig, alphas: Sequence, scale: complex = 1.0,
                    tol: float = SIDE_TOL) -> np.ndarray:
    """``|F(x_{k+1}) - F(x_k)|`` for ``k = 1..n-1`` (the last one ends at infinity)."""
    omega = sc_differential(cfg, alphas, scale)
    if np.any(omega.alphas <= 0) or omega.alpha_infinity <= 0:
        raise DivergenceError("every alpha must be positive for a bounded polygon")
    if np.any(omega.alphas == 1) or omega.alpha_infinity == 1:
        warnings.warn("alpha = 1 marks a smooth boundary point: the polygon is degenerate",
                      stacklevel=2)
    x = cfg.prevertices
    out = [abs(integrate_to_cone_point(omega, Path((a, b)), tol=tol)) for a, b in zip(x, x[1:])]
    c = x[-1] + max(1.0, x[-1] - x[-2])
    head = integrate_to_cone_point(omega, Path((c, x[-1])), tol=tol)
    tail = integrate_to_infinity(omega, c, 1.0, tol=tol)
    out.append(abs(tail - head))
    return np.array(out)


def initial_prevertices(n: int) -> PrevertexConfig:
    """``x_k`` proportional to ``tan(pi (k-1) / (2(n-1)))``, rescaled so ``x_2 = 1``."""
    t = [math.tan(math.pi * k / (2 * (n - 1))) for k in range(n - 1)]
    return PrevertexConfig(tuple([0.0, 1.0] + [v / t[1] for v in t[2:]]))


def _ratio_mismatch(ratios: np.ndarray, target: np.ndarray) -> float:
    return float(np.max(np.abs(ratios / target - 1.0))) if len(target) else 0.0


def sc_solve_parameters(poly: PolygonSpec, max_iters: int = 200,
                        initial: PrevertexConfig | Sequence[float] | None = None,
                        tol: float = SOLVE_TOL) -> SCSolveReport:
    """Prevertices whose side-length ratios match ``poly``.

    Unknowns are ``log(x_{k+1} - x_k)`` for ``k = 2..n-2``; residuals are the
    log ratios ``side_k / side_1`` for ``k = 2..n-1``.

    Raises
    ------
    ConvergenceError
        If the ratio mismatch is still above ``tol`` after ``max_iters``.
    """
    n = poly.n
    if any(float(a) <= 0 for a in poly.alphas):
        raise ValidationError("the parameter problem needs every alpha > 0")
    target_sides = poly.side_lengths()[: n - 1]
    target = target_sides[1:] / target_sides[0]
    if n == 3:
        cfg = PrevertexConfig((0.0, 1.0))
        return SCSolveReport(cfg, 0.0, 0, tuple(target.tolist()))

    alphas = poly.alphas
    if initial is None:
        start = initial_prevertices(n)
    elif isinstance(initial, PrevertexConfig):
        start = initial
    else:
        start = PrevertexConfig(tuple(initial))
    if start.n != n:
        raise ValidationError("initial guess has the wrong number of prevertices")
    log_target = np.log(target)

    def residuals(y):
        cfg = PrevertexConfig.from_gaps(y)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            s = sc_side_lengths(cfg, alphas)
        return np.log(s[1:] / s[0]) - log_target

    sol = least_squares(residuals, start.log_gaps, method="trf", xtol=1e-15, ftol=1e-15,
                        gtol=1e-15, max_nfev=max_iters)
    cfg = PrevertexConfig.from_gaps(sol.x)
    ratios = np.exp(sol.fun + log_target)
    mismatch = _ratio_mismatch(ratios, target)
    if mismatch > tol:
        raise ConvergenceError(
            f"parameter problem did not converge: ratio mismatch {mismatch:.3e} after {sol.nfev} iterations"
        )
    return SCSolveReport(cfg, mismatch, int(sol.nfev), tuple(ratios.tolist()))


def polygon_from_json(obj: dict) -> PolygonSpec:
    try:
        v = tuple(complex(float(w["re"]), float(w.get("im", 0.0))) for w in obj["vertices"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"bad polygon JSON: {exc}") from exc
    return PolygonSpec(v, obj.get("alphas"))


def polygon_to_json(poly: PolygonSpec) -> dict:
    def enc(a):
        return f"{a.numerator}/{a.denominator}" if isinstance(a, Fraction) else float(a)

    return {
        "vertices": [{"re": w.real, "im": w.imag} for w in poly.vertices],
        "alphas": [enc(a) for a in poly.alphas],
    }
