import cmath
import math
from fractions import Fraction as Fr

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from flatcone import BranchState, Path, PrymDifferential, integrate_along_path, integrate_to_cone_point, monodromy
from flatcone.errors import DivergenceError, FitError, ResonanceObstruction, ValidationError
from flatcone.local import (
    FrobeniusSeries,
    cone_angle_measure,
    developing_sampler,
    fit_local_normal_form,
    frobenius_coefficients,
    indicial_polynomial,
    indicial_roots,
    ode_residual,
    residual_order,
    schwarzian_numeric,
)


def omega(*pairs, **kw):
    return PrymDifferential.from_points(pairs, **kw)


THIRDS = omega((0, "1/3"), (1, "1/3"))  # third 1/3 sits at infinity


class TestIndicial:
    def test_examples(self):
        p = indicial_roots(1)
        assert (p.s1, p.s2) == (0, 1)
        p = indicial_roots(3)
        assert (p.s1, p.s2) == (-1, 2)
        p = indicial_roots(0)
        assert p.double_root and p.s1 == Fr(1, 2)

    @given(st.fractions(min_value=-6, max_value=6, max_denominator=20))
    def test_exact_roots(self, a):
        p = indicial_roots(a)
        b0 = (1 - a * a) / 4
        assert indicial_polynomial(p.s1, b0) == 0 and indicial_polynomial(p.s2, b0) == 0
        assert p.s2 - p.s1 == a and p.s1 + p.s2 == 1

    @given(st.floats(-6, 6))
    def test_float_roots(self, a):
        p = indicial_roots(a)
        b0 = (1 - a * a) / 4
        assert abs(indicial_polynomial(p.s1, b0)) <= 1e-14 * max(1, a * a)
        assert abs(indicial_polynomial(p.s2, b0)) <= 1e-14 * max(1, a * a)


class TestFrobenius:
    def test_constant_q(self):
        s = frobenius_coefficients([Fr(-2)], Fr(2), 5)
        assert s.coefficients == (1, 0, 0, 0, 0, 0)

    def test_hand_case(self):
        s = frobenius_coefficients([Fr(-2), Fr(1)], Fr(2), 1)
        assert s.coefficients[1] == Fr(-1, 4)
        s = frobenius_coefficients([-2.0, 1.0], 2.0, 1)
        assert s.coefficients[1] == -0.25

    def test_obstruction(self):
        # alpha = 3, smaller root -1: h(2) = 0 and R_3 = c_2 b_1 = 1/4
        with pytest.raises(ResonanceObstruction) as ei:
            frobenius_coefficients([Fr(-2), Fr(1)], Fr(-1), 4)
        assert ei.value.m == 3 and ei.value.remainder == Fr(1, 4)

    def test_resonance_passes_when_remainder_vanishes(self):
        # b_3 = -1/4 cancels R_3, so c_3 is free and set to 0
        s = frobenius_coefficients([Fr(-2), Fr(1), 0, Fr(-1, 4)], Fr(-1), 5)
        assert s.coefficients[:4] == (1, Fr(1, 2), Fr(1, 4), 0)

    def test_not_a_root(self):
        with pytest.raises(ValidationError):
            frobenius_coefficients([Fr(-2)], Fr(1), 3)

    def test_exact_solution_residual(self):
        s = frobenius_coefficients([Fr(-2)], Fr(2), 4)
        assert abs(ode_residual(s, [Fr(-2)], 0.05)) < 1e-40

    def test_guard_radius(self):
        s = frobenius_coefficients([Fr(-2)], Fr(2), 4)
        with pytest.raises(ValidationError):
            ode_residual(s, [Fr(-2)], 0.2)

    @pytest.mark.parametrize("N", [3, 6])
    def test_residual_order(self, N):
        b = [Fr(-2), Fr(1), Fr(1, 3)]
        s = frobenius_coefficients(b, Fr(2), N)
        assert abs(residual_order(s, b) - (2 + N + 1)) < 0.1

    def test_corrupted_coefficient_lowers_order(self):
        b = [Fr(-2), Fr(1), Fr(1, 3)]
        s = frobenius_coefficients(b, Fr(2), 5)
        bad = FrobeniusSeries(s.root, (1, s.coefficients[1] + Fr(1, 100)) + s.coefficients[2:])
        assert abs(residual_order(bad, b) - 3) < 0.1
        assert residual_order(s, b) > residual_order(bad, b) + 4

    @given(st.sampled_from([Fr(1, 3), Fr(1, 2), Fr(2, 3), Fr(5, 2), Fr(3), Fr(-1, 2)]),
           st.lists(st.fractions(min_value=-2, max_value=2, max_denominator=5), min_size=2, max_size=4),
           st.sampled_from([3, 6]), st.complex_numbers(min_magnitude=1, max_magnitude=1))
    def test_residual_order_property(self, alpha, tail, N, direction):
        b = [(1 - alpha * alpha) / 4] + tail
        root = indicial_roots(alpha).larger
        ext = frobenius_coefficients(b, root, N + 1)
        # leading residual coefficient is R_{N+1}; skip accidental cancellations
        assume(abs(ext.coefficients[-1]) > Fr(1, 10**6))
        s = FrobeniusSeries(root, ext.coefficients[:-1])
        assert abs(residual_order(s, b, direction=direction) - (float(root) + N + 1)) < 0.1


class TestSchwarzian:
    # the default step 1e-3 |x| leaves third differences rounding-limited near 1e-6
    def test_moebius(self):
        F = lambda x: (2 * x + 1j) / (0.5 * x - 3)
        assert abs(schwarzian_numeric(F, 0.3 + 0.2j)) < 1e-5
        assert abs(schwarzian_numeric(F, 0.3 + 0.2j, h=3e-3)) < 1e-8

    def test_power(self):
        F = lambda x: x ** (1 / 3)
        exact = (1 - 1 / 9) / (2 * 0.25)
        assert abs(schwarzian_numeric(F, 0.5) - exact) < 1e-5 * exact
        assert abs(schwarzian_numeric(F, 0.5, h=5e-3) - exact) < 1e-8 * exact

    def test_log(self):
        assert abs(schwarzian_numeric(cmath.log, 0.5) - 2) < 1e-5
        assert abs(schwarzian_numeric(cmath.log, 0.5, h=5e-3) - 2) < 1e-8

    def test_sampler_matches_library_integral(self):
        w = omega((0, "1/3"), (1, "1/2"), (1j, "2/3"))
        x0, x = 1e-2 * cmath.exp(0.4j), 1.3e-2 * cmath.exp(0.5j)
        F = developing_sampler(w, 1, x0)
        ref = integrate_along_path(w, Path((1 + x0, 1 + x)), BranchState.principal(w, 1 + x0), tol=1e-13)
        assert abs(F(x) - ref.value) < 1e-12 * abs(ref.value)

    def test_critical_point(self):
        with pytest.raises(ValidationError):
            schwarzian_numeric(lambda x: x * x, 0.0)

    @pytest.mark.parametrize("j", [0, 1])
    @pytest.mark.parametrize("theta", [0.4, 2.0, -1.3])
    def test_leading_coefficient_at_cone_point(self, j, theta):
        w = omega((0, "1/3"), (1, "1/2"), (1j, "2/3"))
        a = float(w.alphas[j])
        u = cmath.exp(1j * theta)
        vals = []
        for r in (1e-2, 1e-3):
            x = r * u
            F = developing_sampler(w, j, x)
            vals.append(x * x * schwarzian_numeric(F, x))
        # first-order term is linear in x along the ray; extrapolate it away
        limit = (10 * vals[1] - vals[0]) / 9
        assert abs(limit - (1 - a * a) / 2) < 1e-4


class TestNormalForm:
    def test_square_root(self):
        fit = fit_local_normal_form(omega((0, "1/2")), 0, 0.1)
        assert fit.form == "power"
        assert abs(fit.C0 - 2) < 1e-12
        assert abs(fit.C1 - (-2 * math.sqrt(0.1))) < 1e-12
        assert fit.residual < 1e-12

    def test_log(self):
        fit = fit_local_normal_form(omega((0, 0)), 0, 0.1)
        assert fit.form == "log"
        assert abs(fit.C0 - 1) < 1e-12 and abs(fit.C1 + math.log(0.1)) < 1e-12

    @pytest.mark.parametrize("j", [0, 1])
    def test_three_point_convergence(self, j):
        r1 = fit_local_normal_form(THIRDS, j, 1e-3)
        r2 = fit_local_normal_form(THIRDS, j, 1e-4)
        assert abs(r1.C0) > 0.1 and abs(r2.C0) > 0.1
        assert r2.residual < r1.residual / 10 ** (1 / 3)

    def test_radius_too_large(self):
        with pytest.raises(ValidationError):
            fit_local_normal_form(THIRDS, 0, 1.5)
        with pytest.raises(FitError):
            fit_local_normal_form(THIRDS, 0, 0.3)

    @pytest.mark.parametrize("alpha", ["1/3", "1/2", "2", "5/2"])
    def test_rotation_consistency(self, alpha):
        w = omega((0, alpha), (1, "1/2"), (1j, "2/3"))
        r = 1e-3
        fit = fit_local_normal_form(w, 0, r)
        theta0 = cmath.phase(fit.base)
        ring = [r * cmath.exp(1j * (theta0 + 2 * math.pi * k / 16)) for k in range(16)]
        m = monodromy(w, Path(tuple(ring + ring[:1])))
        rho = cmath.exp(2j * math.pi * float(Fr(alpha)))
        assert abs(m.rotation - rho) < 1e-8
        # F - C1 picks up the factor rho, so w = C1 (1 - rho) with C1 = F(P_j)
        C1 = integrate_to_cone_point(w, Path((fit.base, 0)), fit.base_branch)
        assert abs(m.translation - C1 * (1 - rho)) < 1e-8 * abs(fit.C0) * r ** float(Fr(alpha))
        assert abs(fit.C1 - C1) < 10 * fit.residual * abs(fit.C0) * r ** float(Fr(alpha))


class TestConeAngle:
    @pytest.mark.parametrize("alpha", ["1/3", "1/2", "1", "2", "3", "7/2"])
    def test_single_power_exact(self, alpha):
        w = omega((0, alpha))
        for eps in (1e-3, 0.5):
            assert abs(cone_angle_measure(w, 0, eps) - 2 * math.pi * float(Fr(alpha))) < 1e-11

    def test_three_point(self):
        assert abs(cone_angle_measure(THIRDS, 0, 1e-3) - 2 * math.pi / 3) < 1e-6

    def test_monotone_over_a_decade(self):
        errs = [abs(cone_angle_measure(THIRDS, 0, e) - 2 * math.pi / 3) for e in (1e-1, 1e-2, 1e-3)]
        assert errs[0] > errs[1] > errs[2]

    def test_divergent(self):
        with pytest.raises(DivergenceError):
            cone_angle_measure(omega((0, 0)), 0, 1e-3)
        with pytest.raises(DivergenceError):
            cone_angle_measure(omega((0, "-1/2")), 0, 1e-3)
