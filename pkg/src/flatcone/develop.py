"""Developing map: integration of the Prym differential along polylines.

The developing map ``F`` is normalized to vanish at the start of the path
it is integrated along, so every value here is meaningful only modulo the
plane isometries ``z -> rho*z + w`` with ``|rho| = 1``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._backend import kernels
from .errors import ClearanceError, DivergenceError, ValidationError
from .path import Path, point_ray_distance
from .prym import BranchState, PrymDifferential
from .quadrature import DEFAULT_MAX_DEPTH, DEFAULT_TOL, integrate, integrate_pieces

__all__ = [
    "Path",
    "AffineIsometry",
    "DevelopedValue",
    "MonodromyResult",
    "continue_branch",
    "integrate_along_path",
    "integrate_to_cone_point",
    "integrate_to_infinity",
    "monodromy",
    "develop_samples",
]

HALF_PI = 0.5 * math.pi
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class AffineIsometry:
    """``z -> rotation * z + translation`` with ``|rotation| = 1``."""

    rotation: complex
    translation: complex

    def __post_init__(self):
        rot = complex(self.rotation)
        if abs(abs(rot) - 1.0) > 1e-10:
            raise ValidationError(f"rotation {rot} is not of unit modulus")
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "translation", complex(self.translation))

    def __call__(self, z):
        return self.rotation * z + self.translation

    def compose(self, other: "AffineIsometry") -> "AffineIsometry":
        """``self o other``."""
        return AffineIsometry(self.rotation * other.rotation,
                              self.rotation * other.translation + self.translation)

    def inverse(self) -> "AffineIsometry":
        r = 1.0 / self.rotation
        return AffineIsometry(r, -r * self.translation)

    @property
    def angle(self) -> float:
        return cmath.phase(self.rotation)


@dataclass(frozen=True)
class DevelopedValue:
    value: complex
    branch: BranchState


@dataclass(frozen=True)
class MonodromyResult:
    isometry: AffineIsometry
    predicted_rotation: complex
    windings: tuple[int, ...]
    displacement: complex
    probes: tuple[complex, ...]

    @property
    def rotation(self) -> complex:
        return self.isometry.rotation

    @property
    def translation(self) -> complex:
        return self.isometry.translation


def _initial_branch(omega: PrymDifferential, path: Path, b0: BranchState | None) -> BranchState:
    if b0 is None:
        return BranchState.principal(omega, path.start)
    if len(b0.args) != len(omega.positions):
        raise ValidationError("branch state has wrong number of arguments")
    if abs(b0.base_point - path.start) > 1e-12 * (1.0 + abs(path.start)):
        raise ValidationError(f"branch state at {b0.base_point} but path starts at {path.start}")
    return b0


def _split_segment(omega, a, b, args_a, out, depth=0):
    turns = kernels.segment_turns(a, b, omega.positions)
    if len(turns) and float(np.max(np.abs(turns))) >= HALF_PI and depth < 60:
        m = 0.5 * (a + b)
        args_m = _split_segment(omega, a, m, args_a, out, depth + 1)
        return _split_segment(omega, m, b, args_m, out, depth + 1)
    out.append((a, b, args_a))
    return args_a + turns


def _walk(omega: PrymDifferential, path: Path, args0: np.ndarray):
    """Sub-segments ``(a, b, args_at_a)`` with per-point turn < pi/2, and final args."""
    out: list = []
    args = np.array(args0, dtype=float)
    for a, b in path.segments():
        args = _split_segment(omega, a, b, args, out)
    return out, args


def _clearance(omega: PrymDifferential, path: Path) -> float:
    return path.clearance if path.clearance is not None else omega.default_clearance


def continue_branch(omega: PrymDifferential, path: Path, b0: BranchState | None = None) -> BranchState:
    """Analytic continuation of the argument data along ``path``."""
    b0 = _initial_branch(omega, path, b0)
    path.check_clearance(omega.positions, _clearance(omega, path))
    _, args = _walk(omega, path, b0.array)
    return BranchState(path.end, tuple(args))


def _regular(omega, path, args0, tol, max_depth):
    subs, args = _walk(omega, path, args0)
    pos, exps, ls, rc = omega.positions, omega.exponents, omega.log_scale, omega.r_chart
    pieces = []
    for a, b, args_a in subs:
        def rule(lo, hi, a=a, b=b, args_a=args_a):
            d = b - a
            return kernels.gk15_segment(a + d * lo, a + d * hi, a, args_a, pos, exps, ls, rc)

        pieces.append((rule, 0.0, 1.0))
    res = integrate_pieces(pieces, tol=tol, max_depth=max_depth)
    return res.value, args


def integrate_along_path(
    omega: PrymDifferential,
    path: Path,
    b0: BranchState | None = None,
    tol: float = DEFAULT_TOL,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> DevelopedValue:
    """``integral of f dz`` along ``path`` on the continued branch.

    Returns the displacement of the developing map together with the branch
    state at the path end.  ``b0`` defaults to the principal branch.
    """
    b0 = _initial_branch(omega, path, b0)
    path.check_clearance(omega.positions, _clearance(omega, path))
    value, args = _regular(omega, path, b0.array, tol, max_depth)
    return DevelopedValue(value, BranchState(path.end, tuple(args)))


def _power_substitution(alpha: float) -> tuple[float, int]:
    # u = s**p turns u**(alpha-1) du into p * s**(k-1) ds with integer k >= 1
    k = max(1, math.ceil(alpha))
    return k / alpha, k


def _singular_leg(omega, a, args_a, j, tol, max_depth) -> complex:
    """``integral from a to P_j`` along the straight segment, P_j with alpha_j > 0."""
    alpha = float(omega.alphas[j])
    if alpha <= 0:
        raise DivergenceError(f"cone point {omega.positions[j]} has alpha={alpha} <= 0: infinite distance")
    P = complex(omega.positions[j])
    d = a - P
    p, k = _power_substitution(alpha)
    pos, exps, rc = omega.positions, omega.exponents, omega.r_chart
    args_a = np.asarray(args_a, dtype=float)

    def g(s):
        z = P + d * s**p
        return np.exp(kernels.branch_log_sum(z, a, args_a, pos, exps, j, rc)) * (p * s ** (k - 1))

    res = integrate(g, 0.0, 1.0, tol=tol, max_depth=max_depth)
    log_c = omega.log_scale + exps[j] * complex(math.log(abs(d)), args_a[j])
    return -d * cmath.exp(log_c) * res.value


def integrate_to_cone_point(
    omega: PrymDifferential,
    path: Path,
    b0: BranchState | None = None,
    tol: float = DEFAULT_TOL,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> complex:
    """Improper integral along ``path`` whose last waypoint is a cone point.

    The terminal straight leg is integrated after the substitution
    ``u = s**p`` (``u`` the distance fraction to the cone point), which makes
    the integrand bounded.  The first waypoint may also be a cone point with
    ``alpha > 0``; then the first segment is split at its midpoint and the
    branch state's entry for that point is read as the departure direction.
    """
    j = omega.index_of(path.end)
    if j is None:
        raise ValidationError(f"path end {path.end} is not a finite cone point")
    if omega.alphas[j] <= 0:
        raise DivergenceError(
            f"cone point {path.end} has alpha={omega.alphas[j]} <= 0 and lies at infinite distance"
        )
    i = omega.index_of(path.start)
    path.check_clearance(omega.positions, _clearance(omega, path), exempt_start=i, exempt_end=j)
    segs = path.segments()
    if i is None:
        b0 = _initial_branch(omega, path, b0)
        return _to_cone(omega, path.waypoints, b0.array, j, tol, max_depth)

    if omega.alphas[i] <= 0:
        raise DivergenceError(f"start cone point {path.start} has alpha={omega.alphas[i]} <= 0")
    a0, a1 = segs[0]
    if b0 is None:
        d = a0 - omega.positions
        d[i] = a1 - a0
        args0 = np.angle(d)
    else:
        if len(b0.args) != len(omega.positions) or b0.base_point != path.start:
            raise ValidationError("branch state does not match the path start")
        args0 = b0.array
    m = 0.5 * (a0 + a1)
    args_m = args0 + kernels.segment_turns(a0, m, omega.positions)
    args_m[i] = args0[i]
    back = _singular_leg(omega, m, args_m, i, tol, max_depth)
    fwd = _to_cone(omega, (m,) + path.waypoints[1:], args_m, j, tol, max_depth)
    return fwd - back


def _to_cone(omega, waypoints, args0, j, tol, max_depth) -> complex:
    if len(waypoints) > 2:
        head = Path(tuple(waypoints[:-1]))
        value, args = _regular(omega, head, args0, tol, max_depth)
    else:
        value, args = 0j, np.asarray(args0, dtype=float)
    return value + _singular_leg(omega, complex(waypoints[-2]), args, j, tol, max_depth)


def integrate_to_infinity(
    omega: PrymDifferential,
    start: complex,
    direction: complex,
    b0: BranchState | None = None,
    tol: float = DEFAULT_TOL,
    max_depth: int = DEFAULT_MAX_DEPTH,
    clearance: float | None = None,
) -> complex:
    """Improper integral along the ray ``start + t*direction``, ``t`` in [0, inf).

    Converges iff the cone parameter at infinity is positive; the ray
    parameter is compactified so the integrand stays bounded.
    """
    alpha = omega.alpha_infinity
    if alpha <= 0:
        raise DivergenceError(f"alpha at infinity is {alpha} <= 0: infinity lies at infinite distance")
    start = complex(start)
    if direction == 0:
        raise ValidationError("direction must be nonzero")
    u = complex(direction) / abs(direction)
    clr = clearance if clearance is not None else omega.default_clearance
    for P in omega.positions:
        if point_ray_distance(P, start, u) < clr:
            raise ClearanceError(f"ray from {start} passes within clearance of {P}")
    if b0 is None:
        b0 = BranchState.principal(omega, start)
    args = b0.array
    p, k = _power_substitution(alpha)
    pos, exps, rc = omega.positions, omega.exponents, omega.r_chart
    logp = math.log(p)

    def g(s):
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            tau = s ** (-p) - 1.0
            z = start + u * tau
            ls = kernels.branch_log_sum(z, start, args, pos, exps, -1, rc)
            out = np.exp(ls + logp - (p + 1.0) * np.log(s))
        return np.where(np.isfinite(out), out, 0.0)

    res = integrate(g, 0.0, 1.0, tol=tol, max_depth=max_depth)
    return omega.scale * u * res.value


def _default_probes(loop: Path) -> tuple[complex, complex]:
    a, b = loop.segments()[0]
    d = (b - a) / abs(b - a)
    normal = -1j * d if loop.signed_area() >= 0 else 1j * d
    return a + 0.1 * normal, a + 0.2 * normal


def monodromy(
    omega: PrymDifferential,
    loop: Path,
    b0: BranchState | None = None,
    probes: Sequence[complex] | None = None,
    tol: float = DEFAULT_TOL,
    max_depth: int = DEFAULT_MAX_DEPTH,
    origin: complex | None = None,
) -> MonodromyResult:
    """Affine isometry relating the developing map before and after ``loop``.

    ``F`` is evaluated at two probe points on the starting branch and again
    after continuation around the loop; ``F_after = rho*F_before + w`` is
    solved from the two probes.  The predicted rotation
    ``exp(2*pi*i*sum(winding_j * alpha_j))`` is reported alongside.

    ``F`` vanishes at the loop start unless ``origin`` is given, in which
    case it vanishes there instead (reached by a straight segment from the
    loop start; a cone point with alpha > 0 is allowed).  Only the
    translation depends on this choice.
    """
    if not loop.closed:
        raise ValidationError("monodromy needs a closed loop (first waypoint == last)")
    b0 = _initial_branch(omega, loop, b0)
    probes = tuple(complex(p) for p in (probes if probes is not None else _default_probes(loop)))
    if len(probes) < 2:
        raise ValidationError("at least two probe points are needed")
    p1, p2 = probes[0], probes[1]
    if abs(p1 - p2) <= 1e-12 * (1.0 + abs(p1)):
        raise ValidationError("probe points coincide: singular probe system")
    clr = _clearance(omega, loop)
    around = integrate_along_path(omega, loop, b0, tol, max_depth)
    z0 = loop.start

    def F(p, branch):
        if p == z0:
            return 0j
        return integrate_along_path(omega, Path((z0, p), clr), branch, tol, max_depth).value

    before = [F(p, b0) for p in (p1, p2)]
    after = [around.value + F(p, around.branch) for p in (p1, p2)]
    denom = before[1] - before[0]
    if abs(denom) == 0:
        raise ValidationError("probe system is singular")
    rho = (after[1] - after[0]) / denom
    w = after[0] - rho * before[0]
    if origin is not None and complex(origin) != z0:
        seg = Path((z0, complex(origin)), clr)
        if omega.index_of(complex(origin)) is not None:
            c = integrate_to_cone_point(omega, seg, b0, tol, max_depth)
        else:
            c = integrate_along_path(omega, seg, b0, tol, max_depth).value
        w = w - c * (1.0 - rho)
    windings = b0.windings(around.branch)
    predicted = cmath.exp(1j * TWO_PI * float(np.dot(windings, omega.alphas)))
    return MonodromyResult(
        AffineIsometry(rho, w), predicted, tuple(int(x) for x in windings), around.value, probes
    )


def develop_samples(
    omega: PrymDifferential,
    path: Path,
    n: int,
    b0: BranchState | None = None,
    tol: float = DEFAULT_TOL,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> list[tuple[complex, complex]]:
    """``(position, F)`` at ``n`` arc-length-equispaced points; ``F(start) = 0``."""
    if n < 2:
        raise ValidationError("need at least 2 samples")
    b = _initial_branch(omega, path, b0)
    path.check_clearance(omega.positions, _clearance(omega, path))
    fracs = [k / (n - 1) for k in range(n)]
    points = path.split(fracs)
    out = [(points[0], 0j)]
    acc = 0j
    for piece in path.pieces_between(fracs):
        if piece.length == 0:
            out.append((piece.end, acc))
            continue
        value, args = _regular(omega, piece, b.array, tol, max_depth)
        acc += value
        b = BranchState(piece.end, tuple(args))
        out.append((piece.end, acc))
    return out
