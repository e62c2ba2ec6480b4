"""Local analysis at a cone point.

Indicial equation ``h(s) = s(s-1) + (1 - alpha**2)/4`` and Frobenius series
for ``x**2 u'' + q(x) u = 0``; numerical Schwarzian derivative; least-squares
fit of the local normal form ``F = C0*x**alpha + C1`` (``C0*log x + C1`` when
alpha = 0); metric measurement of the cone angle.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Number
from typing import Callable, Sequence

import mpmath
import numpy as np

from .develop import _power_substitution, integrate_along_path
from .errors import DivergenceError, FitError, PoleError, ResonanceObstruction, ValidationError
from .path import Path
from .prym import BranchState, PrymDifferential
from .quadrature import integrate

__all__ = [
    "IndicialPair",
    "FrobeniusSeries",
    "NormalFormFit",
    "indicial_roots",
    "indicial_polynomial",
    "frobenius_coefficients",
    "ode_residual",
    "residual_order",
    "schwarzian_numeric",
    "developing_sampler",
    "fit_local_normal_form",
    "cone_angle_measure",
]

RESIDUAL_GUARD = 0.1


@dataclass(frozen=True)
class IndicialPair:
    s1: Number
    s2: Number
    alpha: Number

    @property
    def double_root(self) -> bool:
        return self.s1 == self.s2

    @property
    def larger(self):
        return max(self.s1, self.s2)

    @property
    def smaller(self):
        return min(self.s1, self.s2)


@dataclass(frozen=True)
class FrobeniusSeries:
    root: Number
    coefficients: tuple

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1


def indicial_polynomial(s, b0):
    return s * (s - 1) + b0


def indicial_roots(alpha) -> IndicialPair:
    """Roots ``(1 - alpha)/2`` and ``(1 + alpha)/2``; exact for Fraction input."""
    if isinstance(alpha, (int, Fraction)):
        alpha = Fraction(alpha)
        return IndicialPair((1 - alpha) / 2, (1 + alpha) / 2, alpha)
    alpha = float(alpha)
    return IndicialPair((1.0 - alpha) / 2.0, (1.0 + alpha) / 2.0, alpha)


def frobenius_coefficients(b: Sequence, s, N: int, resonance_tol: float | None = None) -> FrobeniusSeries:
    """Solve ``h(s+n) c_n + R_n = 0`` for ``c_1..c_N`` with ``c_0 = 1``.

    ``b`` holds the power-series coefficients of ``q``; ``b[0]`` fixes the
    indicial polynomial and ``s`` must be one of its roots.  Exact number
    types (Fraction) are carried through unchanged.

    At a resonance ``h(s+m) = 0`` the coefficient ``c_m`` is free and set to 0
    when ``|R_m|`` is within ``resonance_tol``; otherwise no power series
    solution exists and :class:`ResonanceObstruction` is raised.
    """
    if N < 0:
        raise ValidationError("N must be >= 0")
    if len(b) == 0:
        raise ValidationError("b must contain at least b_0")
    b = list(b)
    b0 = b[0]
    if abs(indicial_polynomial(s, b0)) > 1e-12 * max(1.0, abs(b0), abs(s) ** 2):
        raise ValidationError(f"s={s} is not a root of the indicial equation with b0={b0}")
    if resonance_tol is None:
        resonance_tol = 1e-12 * max(1.0, sum(abs(x) for x in b))

    def bk(k):
        return b[k] if k < len(b) else 0

    c = [1 if not isinstance(s, float) else 1.0]
    for n in range(1, N + 1):
        R = sum(c[i] * bk(n - i) for i in range(n))
        h = indicial_polynomial(s + n, b0)
        if abs(h) <= 1e-12 * max(1.0, abs(s + n) ** 2):
            if abs(R) > resonance_tol:
                raise ResonanceObstruction(n, R)
            c.append(0 * R)
            continue
        c.append(-R / h)
    return FrobeniusSeries(s, tuple(c))


def ode_residual(series: FrobeniusSeries, b: Sequence, x: complex, dps: int = 50,
                 guard: float = RESIDUAL_GUARD) -> complex:
    """``x**2 u'' + q(x) u`` for the truncated series, in ``dps``-digit arithmetic.

    The residual is far below double-precision rounding of ``u`` itself, so
    the evaluation is done with mpmath.
    """
    if not abs(x) < guard:
        raise ValidationError(f"|x| = {abs(x)} outside the guard radius {guard}")
    with mpmath.workdps(dps):
        X = mpmath.mpc(complex(x))
        s = _mp(series.root)
        poly = mpmath.mpf(0)
        second = mpmath.mpf(0)
        xn = mpmath.mpf(1)
        for n, cn in enumerate(series.coefficients):
            cn = _mp(cn)
            poly += cn * xn
            second += cn * (s + n) * (s + n - 1) * xn
            xn *= X
        q = mpmath.mpf(0)
        xk = mpmath.mpf(1)
        for bk in b:
            q += _mp(bk) * xk
            xk *= X
        res = mpmath.power(X, s) * (second + q * poly)
        return complex(res)


def _mp(v):
    if isinstance(v, Fraction):
        return mpmath.mpf(v.numerator) / v.denominator
    if isinstance(v, complex):
        return mpmath.mpc(v)
    return mpmath.mpf(v) if not isinstance(v, mpmath.mpc) else v


def residual_order(series: FrobeniusSeries, b: Sequence, radii=(1e-2, 1e-3),
                   direction: complex = 1.0) -> float:
    """Log-log slope of ``|ode_residual|`` between two radii along a ray."""
    u = complex(direction) / abs(direction)
    r1, r2 = radii
    e1 = abs(ode_residual(series, b, r1 * u))
    e2 = abs(ode_residual(series, b, r2 * u))
    return math.log(e1 / e2) / math.log(r1 / r2)


@lru_cache(maxsize=None)
def _central_weights(order: int, half: int = 4) -> tuple[float, ...]:
    # exact solve of sum_k w_k k**m = m! [m == order], m = 0..2*half
    offs = list(range(-half, half + 1))
    n = len(offs)
    A = [[Fraction(k) ** m for k in offs] + [Fraction(math.factorial(order) if m == order else 0)]
         for m in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if A[r][col] != 0)
        A[col], A[piv] = A[piv], A[col]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col] / A[col][col]
                A[r] = [x - f * y for x, y in zip(A[r], A[col])]
    return tuple(float(A[i][n] / A[i][i]) for i in range(n))


def schwarzian_numeric(F: Callable[[complex], complex], x: complex, h: float | None = None) -> complex:
    """``F'''/F' - 1.5 (F''/F')**2`` from 9-point central differences.

    ``h`` defaults to ``1e-3 * |x|`` (``1e-3`` at the origin).
    """
    x = complex(x)
    if h is None:
        h = 1e-3 * abs(x) if x != 0 else 1e-3
    offs = np.arange(-4, 5)
    vals = np.array([complex(F(x + k * h)) for k in offs])
    d1 = np.dot(_central_weights(1), vals) / h
    d2 = np.dot(_central_weights(2), vals) / h**2
    d3 = np.dot(_central_weights(3), vals) / h**3
    scale = np.max(np.abs(vals - vals[4])) / h
    if abs(d1) <= 1e-10 * max(scale, 1e-300):
        raise ValidationError(f"F'({x}) vanishes numerically: not locally univalent")
    return complex(d3 / d1 - 1.5 * (d2 / d1) ** 2)


def developing_sampler(omega: PrymDifferential, j: int, x0: complex,
                       tol: float = 1e-14) -> Callable[[complex], complex]:
    """``x -> integral of omega from P_j + x0 to P_j + x``, in the local coordinate ``x = z - P_j``.

    Working in ``x`` keeps stencil offsets exact: forming ``P_j + x`` first
    would round them at the scale of ``|P_j|`` and finite differences would
    amplify that error.  Logarithms are taken of ratios close to 1 relative
    to ``x0`` (principal branch there), so samples near ``x0`` share a sheet.
    """
    if not 0 <= j < len(omega.positions):
        raise IndexError(j)
    x0 = complex(x0)
    if x0 == 0:
        raise ValidationError("x0 must differ from the cone point")
    P = omega.positions[j]
    d = P - omega.positions  # d[j] = 0
    base = d + x0
    if np.any(base == 0):
        raise PoleError("x0 sits on another cone point")
    log_base = np.log(base)
    exps = omega.exponents
    log_c = omega.log_scale

    def f(x):
        x = np.asarray(x, dtype=complex)
        ratio = (d[:, None] + x[None, :]) / base[:, None]
        return np.exp(log_c + exps @ (log_base[:, None] + np.log(ratio)))

    def F(x):
        x = complex(x)
        if x == x0:
            return 0j
        step = x - x0
        return step * integrate(lambda t: f(x0 + step * t), 0.0, 1.0, tol=tol).value

    return F


@dataclass(frozen=True)
class NormalFormFit:
    C0: complex
    C1: complex
    residual: float
    form: str
    base: complex
    base_branch: BranchState


def _nearest_other(omega: PrymDifferential, j: int) -> tuple[float, complex | None]:
    P = omega.positions[j]
    best, where = math.inf, None
    for k, Q in enumerate(omega.positions):
        if k != j and abs(Q - P) < best:
            best, where = abs(Q - P), Q
    return best, where


def fit_local_normal_form(omega: PrymDifferential, j: int, radius: float, n_samples: int = 17,
                          tol: float = 1e-12, max_residual: float = 1e-3) -> NormalFormFit:
    """Fit ``F = C0 x**alpha + C1`` (or ``C0 log x + C1``) on a half circle around ``P_j``.

    ``F`` is the developing map from the base point ``P_j + radius*e^{i theta0}``
    (``theta0`` pointing away from the nearest other cone point) integrated
    along the circle with branch tracking; ``x = z - P_j`` is taken on the
    same sheet.  The half circle never crosses the branch jump.
    """
    if not 0 <= j < len(omega.positions):
        raise IndexError(j)
    P = complex(omega.positions[j])
    dist, other = _nearest_other(omega, j)
    if radius >= dist:
        raise ValidationError(f"radius {radius} reaches another cone point (distance {dist})")
    theta0 = cmath.phase(P - other) if other is not None else 0.0
    alpha = float(omega.alphas[j])
    base = P + radius * cmath.exp(1j * theta0)
    b_base = BranchState.principal(omega, base)
    clr = 0.25 * min(radius, dist - radius)

    half = (n_samples - 1) // 2
    thetas = np.linspace(0.0, 0.5 * math.pi, half + 1)[1:]
    zs, Fs, argj = [base], [0j], [b_base.args[j]]
    for sign in (1.0, -1.0):
        acc, b, prev = 0j, b_base, base
        for t in thetas:
            z = P + radius * cmath.exp(1j * (theta0 + sign * t))
            dv = integrate_along_path(omega, Path((prev, z), clr), b, tol=tol)
            acc += dv.value
            b, prev = dv.branch, z
            zs.append(z)
            Fs.append(acc)
            argj.append(b.args[j])
    Fs = np.array(Fs)
    logx = math.log(radius) + 1j * np.array(argj)
    if alpha == 0:
        X, form = logx, "log"
    else:
        X, form = np.exp(alpha * logx), "power"
    A = np.column_stack([X, np.ones_like(X)])
    (C0, C1), *_ = np.linalg.lstsq(A, Fs, rcond=None)
    model = A @ np.array([C0, C1])
    denom = float(np.max(np.abs(C0 * X))) if form == "power" else float(np.max(np.abs(Fs - C1)))
    if abs(C0) == 0 or denom == 0:
        raise FitError("fitted C0 vanishes")
    residual = float(np.max(np.abs(model - Fs))) / denom
    if residual > max_residual:
        raise FitError(f"normal-form fit residual {residual:.3e} exceeds {max_residual:g}")
    return NormalFormFit(complex(C0), complex(C1), residual, form, base, b_base)


def _ray_direction(omega: PrymDifferential, j: int) -> float:
    # first-order variation of log|G| along the ray is Re(e^{i phi} * tau)
    P = omega.positions[j]
    mask = np.arange(len(omega.positions)) != j
    tau = complex(np.sum(omega.exponents[mask] / (P - omega.positions[mask])))
    phi = math.pi / 2 - cmath.phase(tau) if tau != 0 else 0.0
    dist, other = _nearest_other(omega, j)
    if other is None:
        return phi
    # of the two orthogonal directions prefer the one facing away from the nearest point
    c1, c2 = cmath.exp(1j * phi), cmath.exp(1j * (phi + math.pi))
    away = (P - other) / abs(P - other)
    return phi if (c1 * away.conjugate()).real >= (c2 * away.conjugate()).real else phi + math.pi


def cone_angle_measure(omega: PrymDifferential, j: int, eps: float, tol: float = 1e-13,
                       direction: float | None = None) -> float:
    """Ratio of circumference to radius of the metric circle of coordinate radius ``eps``.

    Both lengths are measured in the flat metric ``|f||dz|``; the radius is the
    metric length of a straight ray into ``P_j`` (integrand ~ ``t**(alpha-1)``,
    handled by a power substitution).  The ray direction defaults to the one
    along which ``|f| * |z - P_j|**(1-alpha)`` is stationary to first order.
    Tends to ``2*pi*alpha_j`` as ``eps -> 0``.
    """
    if not 0 <= j < len(omega.positions):
        raise IndexError(j)
    alpha = float(omega.alphas[j])
    if alpha <= 0:
        raise DivergenceError(f"alpha={alpha} <= 0: the cone point is at infinite distance")
    P = complex(omega.positions[j])
    dist, _ = _nearest_other(omega, j)
    if eps >= dist:
        raise ValidationError(f"eps {eps} reaches another cone point (distance {dist})")
    mask = np.arange(len(omega.positions)) != j
    others, exps = omega.positions[mask], omega.exponents[mask]

    def absG(z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape)
        for Q, e in zip(others, exps):
            out += e * np.log(np.abs(z - Q))
        return np.exp(out)

    circ = integrate(lambda th: absG(P + eps * np.exp(1j * th)), 0.0, 2 * math.pi, tol=tol)
    phi = _ray_direction(omega, j) if direction is None else direction
    u = cmath.exp(1j * phi)
    p, k = _power_substitution(alpha)
    rad = integrate(lambda s: p * s ** (k - 1) * absG(P + eps * u * s**p), 0.0, 1.0, tol=tol)
    return circ.value.real / rad.value.real
