from fractions import Fraction

import pytest

from padix.formulas import (
    CertifiedValue,
    FormulaBand,
    det_singular_prob_bound,
    divisor_count,
    divisors,
    fraction_to_decimal_str,
    gaussian_binomial,
    generator_count,
    gl_order,
    matrix_degree_constant,
    matrix_fixed_extension_band,
    matrix_unramified_band,
    mobius,
    orbital_ratio_bound,
    outside_un_bound,
    poly_degree_constant,
    poly_not_unramified_upper,
    q_pochhammer_tail,
    ramified_quadratic_poly_expectation,
    serre_mass,
    unramified_poly_band,
)


def test_mobius_and_divisors():
    assert mobius(1) == 1 and mobius(4) == 0 and mobius(6) == 1
    assert [mobius(n) for n in (2, 3, 5, 30, 12)] == [-1, -1, -1, -1, 0]
    assert divisor_count(1) == 1 and divisor_count(6) == 4 and divisor_count(12) == 6
    assert divisors(12) == [1, 2, 3, 4, 6, 12]


def test_generator_count():
    assert generator_count(5, 1) == 5
    assert generator_count(3, 2) == 6
    assert generator_count(2, 6) == 54


def test_generator_partition_identity():
    # every element of F_{p^r} generates exactly one subfield
    for p in (2, 3, 5):
        for r in range(1, 13):
            assert sum(generator_count(p, d) for d in divisors(r)) == p**r


def test_q_pochhammer():
    cv = q_pochhammer_tail(2, 1, 12)
    assert isinstance(cv, CertifiedValue)
    assert abs(float(cv.value) - 0.2887880951) < 1e-9
    assert cv.error_bound < Fraction(1, 10**12)
    # leading behavior for large p: 1 - p^-m + O(p^-m-1)
    cv2 = q_pochhammer_tail(1009, 2, 12)
    assert abs(float(cv2.value) - (1 - 1009**-2)) < 2 * 1009**-3
    # monotone in m
    assert q_pochhammer_tail(3, 2, 12).value > q_pochhammer_tail(3, 1, 12).value


def test_q_pochhammer_certified_error():
    for p, m in [(2, 1), (3, 1), (3, 2), (5, 3)]:
        coarse = q_pochhammer_tail(p, m, 8)
        fine = q_pochhammer_tail(p, m, 20)
        assert abs(coarse.value - fine.value) <= coarse.error_bound


def test_matrix_degree_constant():
    cv = matrix_degree_constant(3, 12)
    assert cv.value <= Fraction(3, 4)  # p/(p-1)^2 bound
    assert matrix_degree_constant(2, 10).value <= 2
    first = q_pochhammer_tail(3, 1, 14)
    assert cv.value > 1 - first.value - first.error_bound
    fine = matrix_degree_constant(3, 16)
    assert abs(cv.value - fine.value) <= cv.error_bound


def test_poly_degree_constant():
    assert poly_degree_constant(2) == 1
    assert poly_degree_constant(3) == Fraction(1, 2)
    assert poly_degree_constant(10**6 + 3) < Fraction(1, 10**6)


def test_outside_un_bound():
    assert outside_un_bound("matrix", 3) == Fraction(27, 8)
    assert outside_un_bound("poly", 3) == Fraction(9, 4)
    assert outside_un_bound("poly", 2) == 5
    with pytest.raises(ValueError):
        outside_un_bound("other", 3)


def test_serre_mass():
    assert serre_mass(7, 1, 4) == 1
    assert serre_mass(3, 2, 1) == Fraction(2, 3)
    assert serre_mass(2, 2, 1) == 1


def test_serre_mass_matches_quadratic_census_of_q2():
    # the six ramified quadratic extensions of Q_2 and their discriminant
    # valuations (classical): d = -1, -5 give disc 4; d = 2, -2, 10, -10
    # give disc 8
    fixtures = [2, 2, 3, 3, 3, 3]
    total = sum(Fraction(1, 2**v) for v in fixtures)
    assert total == serre_mass(2, 2, 1) == 1


def test_ramified_quadratic_poly_expectation():
    assert ramified_quadratic_poly_expectation(3) == Fraction(30, 121)
    assert ramified_quadratic_poly_expectation(5) == Fraction(130, 781)
    assert ramified_quadratic_poly_expectation(3, Fraction(0)) == 0
    with pytest.raises(ValueError):
        ramified_quadratic_poly_expectation(2)
    assert ramified_quadratic_poly_expectation(2, Fraction(1, 4)) == Fraction(
        Fraction(1, 4) * 4 * 5, 31
    )


def test_unramified_poly_band():
    b = unramified_poly_band(3, 2, 3)
    assert b.center == Fraction(3, 5)
    assert b.lower == Fraction(3, 5) - Fraction(1, 9)
    assert b.upper == Fraction(3, 5) + Fraction(4, 9)
    for p in (2, 3, 5, 7):
        assert unramified_poly_band(p, 1, 1).center == Fraction(p, p + 1)
    # stabilization: n >= 2r-1 gives the n = 2r-1 band
    def endpoints(band):
        return (band.center, band.lower, band.upper)

    assert endpoints(unramified_poly_band(3, 2, 6)) == endpoints(
        unramified_poly_band(3, 2, 3)
    )
    assert endpoints(unramified_poly_band(2, 3, 40)) == endpoints(
        unramified_poly_band(2, 3, 5)
    )


def test_poly_not_unramified_upper():
    assert poly_not_unramified_upper(3, 1, Fraction(1, 3)) == Fraction(7, 9)
    assert poly_not_unramified_upper(3, 1, Fraction(0)) == 0
    assert poly_not_unramified_upper(3, 40, Fraction(1, 3)) < Fraction(1, 3) * Fraction(
        101, 100
    )


def test_matrix_unramified_band():
    b = matrix_unramified_band(3, 2, 4)
    assert b.upper == Fraction(260, 243)
    assert b.lower == 0  # 1 - 1000 p^(-r/2) < 0: clamped
    # upper tends to 1/(1-p^-r) as n grows
    big = matrix_unramified_band(3, 2, 60)
    assert abs(big.upper - Fraction(9, 8)) < Fraction(1, 3**50)
    # lower <= upper always; both approach 1 along a diagonal
    for r in range(1, 17):
        band = matrix_unramified_band(2, r, 2 * r + 8)
        assert 0 <= band.lower <= band.upper
    wide = matrix_unramified_band(2, 44, 100)
    assert abs(wide.lower - 1) < Fraction(1, 1000) and abs(wide.upper - 1) < Fraction(1, 1000)


def test_matrix_unramified_band_lower_positive_eventually():
    # p^(r/2) > 1000 makes the lower bound informative (odd r uses isqrt
    # rounding in the safe direction)
    b = matrix_unramified_band(2, 21, 50)
    assert b.lower > 0
    assert b.lower <= b.upper


def test_matrix_fixed_extension_band():
    f1 = matrix_fixed_extension_band(5, 1, 1, 0)
    assert f1.center == 1
    assert f1.lower == 1 - Fraction(1, 5)
    assert f1.upper == 1 + Fraction(2, 1 - Fraction(1, 5)) * Fraction(1, 5)
    f2 = matrix_fixed_extension_band(3, 1, 2, 0)
    assert f2.center == Fraction(2, 3)
    scaled = matrix_fixed_extension_band(3, 1, 2, 1)
    assert scaled.center == f2.center / 3
    assert scaled.upper - scaled.center == (f2.upper - f2.center) / 3


def test_orbital_ratio_bound():
    assert orbital_ratio_bound(2, 1) == 1
    assert orbital_ratio_bound(3, 2) == Fraction(11, 81)
    assert orbital_ratio_bound(3, 30) < Fraction(1, 3**29)
    for p in (2, 3, 5):
        for d in range(1, 6):
            assert orbital_ratio_bound(p, d) <= 1


def test_gaussian_binomial_and_gl():
    assert gaussian_binomial(2, 1, 2) == 3
    assert gaussian_binomial(4, 2, 2) == 35
    assert gaussian_binomial(5, 0, 3) == 1 and gaussian_binomial(5, 5, 3) == 1
    assert gl_order(2, 2) == 6
    assert gl_order(3, 2) == 48


def test_det_singular_prob_bound():
    assert det_singular_prob_bound(2, 2, 2) == Fraction(1, 8)
    assert det_singular_prob_bound(3, 2, 2) == Fraction(2, 27)
    for p, n, r in [(2, 3, 2), (2, 4, 3), (3, 4, 2), (5, 5, 3)]:
        assert det_singular_prob_bound(p, n, r) <= Fraction(1, p**r - 1)


def test_band_invariant():
    with pytest.raises(ValueError):
        FormulaBand(center=Fraction(2), lower=Fraction(0), upper=Fraction(1))


def test_decimal_rendering():
    assert fraction_to_decimal_str(Fraction(0)) == "0"
    s = fraction_to_decimal_str(Fraction(30, 121), 15)
    assert s.startswith("0.2479338842975")
