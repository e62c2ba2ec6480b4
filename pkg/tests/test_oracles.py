import mpmath

from oracles import BETA_THIRD, RECT_2_1_X3, SQUARE_X3


def test_beta_by_gamma_and_by_quadrature():
    with mpmath.workdps(30):
        by_gamma = mpmath.gamma(mpmath.mpf(1) / 3) ** 2 / mpmath.gamma(mpmath.mpf(2) / 3)
        # symmetric halves, t = u**3 removes the endpoint singularity
        half = mpmath.cbrt(mpmath.mpf(1) / 2)
        by_quad = 2 * mpmath.quad(lambda u: 3 * (1 - u**3) ** (-mpmath.mpf(2) / 3), [0, half])
    assert abs(by_gamma - BETA_THIRD) < 1e-15
    assert abs(by_quad - by_gamma) < 1e-25


def test_rectangle_prevertex_by_elliptic_integrals():
    # the half-plane map with four right angles sends [0,1] and [1,x3] to sides
    # proportional to K(1/x3) and K(1 - 1/x3)
    with mpmath.workdps(30):
        x = mpmath.mpf(RECT_2_1_X3)
        ratio = mpmath.ellipk(1 - 1 / x) / mpmath.ellipk(1 / x)
        assert abs(ratio - mpmath.mpf(1) / 2) < 1e-14
        sq = mpmath.mpf(SQUARE_X3)
        assert abs(mpmath.ellipk(1 - 1 / sq) - mpmath.ellipk(1 / sq)) < 1e-25


def test_rectangle_sides_by_direct_quadrature():
    with mpmath.workdps(25):
        x3 = mpmath.mpf(RECT_2_1_X3)
        f = lambda t: 1 / mpmath.sqrt(abs(t * (t - 1) * (t - x3)))
        s1 = mpmath.quad(f, [0, 0.5, 1])
        s2 = mpmath.quad(f, [1, (1 + x3) / 2, x3])
    assert abs(s1 / s2 - 2) < 1e-12
