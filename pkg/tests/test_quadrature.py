import math

import numpy as np
import pytest

from flatcone.errors import QuadratureError
from flatcone.quadrature import gk15_rule, integrate, integrate_pieces


def test_polynomial_exact():
    res = integrate(lambda t: t**20, 0.0, 1.0, tol=1e-14)
    assert abs(res.value - 1 / 21) < 1e-15


def test_oscillatory_complex():
    res = integrate(lambda t: np.exp(1j * 40 * t), 0.0, 1.0, tol=1e-12)
    exact = (np.exp(40j) - 1) / 40j
    assert abs(res.value - exact) < 1e-12 * abs(exact)


def test_pieces_sum():
    f = gk15_rule(lambda t: np.cos(t))
    res = integrate_pieces([(f, 0.0, 1.0), (f, 1.0, 2.0)], tol=1e-13)
    assert abs(res.value - math.sin(2.0)) < 1e-13


def test_empty():
    assert integrate_pieces([]).value == 0


def test_mild_singularity_converges():
    res = integrate(lambda t: np.sqrt(t), 0.0, 1.0, tol=1e-10)
    assert abs(res.value - 2 / 3) < 1e-9


def test_depth_limit():
    with pytest.raises(QuadratureError):
        integrate(lambda t: 1 / np.sqrt(np.abs(t - 1 / 3)), 0.0, 1.0, tol=1e-14, max_depth=5)


def test_non_finite():
    with pytest.raises(QuadratureError):
        integrate(lambda t: np.full_like(t, np.nan), 0.0, 1.0)
