import math
from fractions import Fraction

import mpmath
import pytest

from lcseries.errors import CertificateError, ResourceError, SeriesFormatError, UsageError
from lcseries.helpers import iv_workprec
from lcseries.sequences import (SeriesSpec, certify_growth, check_average_bound, eta0, generate, growth_base,
                                growth_base_sequence, parse_series_id, partial_sums, sigma_minus_one, sigma_one,
                                sigma_one_sieve, sigma_partial_sum_bounds, sigma_upper_constant)


def test_divisor_sums():
    assert sigma_one(1) == 1
    assert sigma_one(12) == 28
    assert sigma_minus_one(6) == 2
    sieve = sigma_one_sieve(200)
    assert all(int(sieve[n]) == sigma_one(n) for n in range(1, 201))


def test_generate_kinds():
    assert list(generate(SeriesSpec.geometric(2), 4)) == [1, 2, 4, 8, 16]
    assert list(generate(SeriesSpec.constant(Fraction(3, 2)), 2)) == [Fraction(3, 2)] * 3
    assert list(generate(SeriesSpec.sigma_shifted(), 3)) == [1, Fraction(3, 2), Fraction(4, 3), Fraction(7, 4)]
    assert list(generate(SeriesSpec.sigma(), 2)) == [0, 1, Fraction(3, 2)]
    assert not SeriesSpec.sigma().one_lower_bounded


def test_parse_series_id():
    assert parse_series_id('constant:2').C == 2
    assert parse_series_id('geometric').C == 1
    assert parse_series_id('sigma-shifted').series_id == 'sigma-shifted'
    for bad in ('constant', 'nope', 'geometric:1/2', 'sigma:3'):
        with pytest.raises(UsageError):
            parse_series_id(bad)


def test_series_file(tmp_path):
    path = tmp_path / 'series.txt'
    path.write_text('# header\n1\n3/2\n\n2  # comment\n')
    assert list(generate(SeriesSpec.custom_file(str(path)), 2)) == [1, Fraction(3, 2), 2]
    with pytest.raises(ResourceError):
        generate(SeriesSpec.custom_file(str(path)), 5)
    path.write_text('1\n2\nx/y\n')
    with pytest.raises(SeriesFormatError) as info:
        generate(SeriesSpec.custom_file(str(path)), 2)
    assert info.value.line_number == 3


def test_average_bound():
    f = generate(SeriesSpec.sigma_shifted(), 1000)
    assert check_average_bound(f, Fraction(17, 10)).ok
    report = check_average_bound(f, Fraction(8, 5))
    assert not report.ok
    assert report.records[0].measured['first_violation'] is not None


def test_constant_series_certificate():
    f = generate(SeriesSpec.constant(2), 100)
    for alpha in (0, Fraction(1, 2)):
        cert = certify_growth(f, 2, alpha)
        assert cert.D == 0
        assert cert.stable


def test_certificate_rejects_fast_growth():
    f = generate(SeriesSpec.geometric(2), 20)
    with pytest.raises(CertificateError) as info:
        certify_growth(f, 2, 0)
    assert info.value.first_offending == 2


def test_certificate_ceiling():
    f = generate(SeriesSpec.geometric(1), 50)
    cert = certify_growth(f, 2, 0)
    assert cert.D == 51
    assert not cert.stable
    with pytest.raises(CertificateError) as info:
        certify_growth(f, 2, 0, d_max=10)
    assert info.value.first_offending == 10


def test_divisor_certificate_is_stable():
    f = generate(SeriesSpec.sigma_shifted(), 2000)
    cert = certify_growth(f, sigma_upper_constant(Fraction(1, 10000)), Fraction(1, 2))
    assert cert.D > 0
    assert cert.stable
    deviations = [cert.C * (n + 1) - s for n, s in enumerate(partial_sums(f))]
    assert min(deviations) >= 0


def test_base_power_is_exact():
    cert = certify_growth(generate(SeriesSpec.constant(2), 10), 2, 0)
    assert cert.base_power(5) == Fraction(1, 32)
    assert float(growth_base(2, 0)) == pytest.approx(2 ** 0.5)


def test_sigma_partial_sums():
    report = sigma_partial_sum_bounds(5000)
    assert report.ok
    assert len(report.records) == 2


@pytest.mark.slow
def test_sigma_partial_sums_full_range():
    assert sigma_partial_sum_bounds(10 ** 5).ok


def test_eta0_and_growth_bases():
    limit = eta0()
    assert mpmath.mpf('1.59') < limit < mpmath.mpf('1.60')
    bases = [b for _, _, b in growth_base_sequence()]
    assert all(a < b for a, b in zip(bases, bases[1:]))
    assert bases[-1] < limit


def test_sigma_upper_constant():
    C = sigma_upper_constant(Fraction(1, 1000))
    zeta2 = mpmath.pi ** 2 / 6
    assert zeta2 < mpmath.mpf(C.numerator) / C.denominator < zeta2 + mpmath.mpf(1) / 1000


def test_sigma_minus_one_is_multiplicative():
    sieve = sigma_one_sieve(300 * 300)
    s = [None] + [Fraction(int(sieve[n]), n) for n in range(1, 301)]
    for m in range(1, 301):
        for n in range(m, 301):
            if math.gcd(m, n) == 1:
                assert Fraction(int(sieve[m * n]), m * n) == s[m] * s[n], (m, n)
    assert sigma_minus_one(12 * 35) == sigma_minus_one(12) * sigma_minus_one(35)


def test_interval_precision_is_scoped():
    saved = mpmath.iv.prec
    with iv_workprec(300):
        assert mpmath.iv.prec == 300
    assert mpmath.iv.prec == saved
    with pytest.raises(ZeroDivisionError):
        with iv_workprec(300):
            1 / 0
    assert mpmath.iv.prec == saved


def test_interval_routines_restore_precision():
    saved = mpmath.iv.prec
    f = generate(SeriesSpec.constant(2), 10)
    assert certify_growth(f, 2, Fraction(1, 2)).D == 0
    assert sigma_partial_sum_bounds(10).ok
    assert sigma_upper_constant(Fraction(1, 1000)) > 1
    assert mpmath.iv.prec == saved
