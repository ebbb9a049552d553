import math
from fractions import Fraction

import numpy as np
import pytest
import scipy.special

from pentapack.specfun import (
    bessel_j,
    bessel_j_integral_oracle,
    coeff_C,
    coeff_D,
    hankel_closed_form,
    hankel_integral_oracle,
    kummer_1f1,
    laguerre,
    laguerre_coeffs_exact,
    pochhammer,
)


def test_bessel_at_zero():
    assert bessel_j(0, 0.0) == 1.0
    assert bessel_j(3, 0.0) == 0.0


def test_bessel_against_scipy():
    rng = np.random.default_rng(10)
    for _ in range(400):
        n = int(rng.integers(0, 65))
        z = float(rng.uniform(0, 100))
        assert bessel_j(n, z) == pytest.approx(scipy.special.jv(n, z), abs=1e-13)


def test_bessel_negative_order_symmetry():
    rng = np.random.default_rng(11)
    for _ in range(200):
        n = int(rng.integers(-40, 40))
        z = float(rng.uniform(-50, 50))
        assert bessel_j(n, z) == pytest.approx((-1) ** n * bessel_j(-n, z), abs=1e-13)


def test_bessel_integral_oracle():
    # J_1(1) against adaptive quadrature of Bessel's integral
    assert bessel_j(1, 1.0) == pytest.approx(bessel_j_integral_oracle(1, 1.0), abs=1e-10)
    assert bessel_j(5, 7.3) == pytest.approx(bessel_j_integral_oracle(5, 7.3), abs=1e-10)


def test_laguerre_at_zero_binomial():
    for n in range(8):
        for m in range(6):
            assert laguerre(n, m, 0.0) == pytest.approx(math.comb(n + m, n), rel=1e-14)


def test_laguerre_degree_zero():
    assert laguerre(0, 4, 2.7) == 1.0


def test_laguerre_explicit_expansion():
    # compare with exact coefficient expansion at a grid of points
    for n, m in [(3, 2), (5, 0), (7, 10), (11, 0)]:
        coeffs = laguerre_coeffs_exact(n, m)
        for x in (0.0, 0.37, 1.5, 4.2):
            explicit = float(sum(Fraction(c) * Fraction(x) ** j for j, c in enumerate(coeffs)))
            assert laguerre(n, m, x) == pytest.approx(explicit, abs=1e-12 * max(1.0, abs(explicit)))
    assert laguerre(3, 2, 1.5) == pytest.approx(0.0625, abs=1e-12)


def test_kummer_at_zero_and_exponential():
    assert kummer_1f1(0.3, 1.7, 0.0) == 1.0
    for x in (-1.0, 0.5, 2.4):
        assert kummer_1f1(1.0, 1.0, x) == pytest.approx(math.exp(x), rel=1e-12)


def test_kummer_rejects_bad_b():
    with pytest.raises(ValueError):
        kummer_1f1(0.5, 0.0, 1.0)
    with pytest.raises(ValueError):
        kummer_1f1(0.5, -3.0, 1.0)


def test_kummer_laguerre_identity():
    # 1F1(-n; m+1; x) = n!/(m+1)_n L_n^m(x)
    rng = np.random.default_rng(12)
    for _ in range(60):
        n = int(rng.integers(0, 21))
        m = int(rng.integers(0, 41))
        x = float(rng.uniform(0, 5))
        lhs = kummer_1f1(-n, m + 1, x)
        rhs = math.factorial(n) / pochhammer(m + 1, n) * laguerre(n, m, x)
        assert lhs == pytest.approx(rhs, abs=1e-12 * max(1, abs(rhs)))


def test_coeff_D_small_cases():
    for rho in (0.0, 0.5, 1.3):
        assert coeff_D(0, 0, 0, rho) == pytest.approx(1 / (2 * math.pi), rel=1e-15)
    for k in range(6):
        assert coeff_D(0, 0, k, 0.77) == pytest.approx(
            math.factorial(k) / (2 * math.pi ** (k + 1)), rel=1e-14
        )


def test_coeff_D_high_precision_cross_check():
    from mpmath import mp

    with mp.workprec(128):
        m = 10
        k = 5
        rho = 1.0
        n = k - m // 2
        c = (
            mp.factorial(k + m // 2)
            * (rho * mp.sqrt(mp.pi)) ** m
            / (2 * mp.pi ** (k + 1) * mp.factorial(m))
        )
        d = c * mp.factorial(n) / mp.rf(m + 1, n)
        assert coeff_D(10, 0, 5, 1.0) == pytest.approx(float(d), abs=1e-14)


def test_coeff_preconditions():
    with pytest.raises(ValueError):
        coeff_D(1, 0, 3, 0.5)  # odd difference
    with pytest.raises(ValueError):
        coeff_D(10, 0, 2, 0.5)  # k below |r-s|/2
    with pytest.raises(ValueError):
        coeff_C(3, 0, 1, 0.5)


def test_hankel_gaussian_moment():
    assert hankel_integral_oracle(0, 0, 0, 0.0) == pytest.approx(1 / (2 * math.pi), abs=1e-12)


@pytest.mark.parametrize("r,s,k,rho", [(10, 0, 5, 0.7), (2, 2, 3, 1.2), (0, 10, 11, 2.0)])
def test_hankel_identity_spot(r, s, k, rho):
    assert hankel_integral_oracle(r, s, k, rho) == pytest.approx(
        hankel_closed_form(r, s, k, rho), abs=1e-9
    )
