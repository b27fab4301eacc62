from fractions import Fraction

import pytest

from lcseries.decomposition import (ResidualRecord, a_I, brute_force_coefficient, fit_constants,
                                    partition_sum_identity, read_residuals, residual_differences, residual_one_zero,
                                    residual_second_order_aux, second_diff_identity, split, window_check,
                                    write_residuals)
from lcseries.errors import DomainError, IdentityError, InsufficientDataError
from lcseries.helpers import binomial
from lcseries.sequences import SeriesSpec, certify_growth, generate, partial_sums, sigma_upper_constant
from lcseries.series import power_table


@pytest.fixture(scope='module')
def divisor_table(sigma_shifted):
    return power_table(sigma_shifted.truncate(60), 8, 60, kernel='kronecker')


@pytest.fixture(scope='module')
def divisor_certificate(sigma_shifted):
    return certify_growth(sigma_shifted, Fraction(17, 10), Fraction(1, 2))


@pytest.mark.parametrize('spec', [SeriesSpec.geometric(1), SeriesSpec.constant(2), SeriesSpec.sigma_shifted()])
def test_partition_sum_identity(spec):
    f = generate(spec, 60)
    table = power_table(f, 8, 60, kernel='kronecker')
    sp = split(f)
    for k in range(1, 9):
        assert partition_sum_identity(table, sp, k, strict=True).ok


def test_brute_force_tuples_agree(divisor_table):
    sp = split(divisor_table.base)
    for k in range(1, 6):
        for n in range(0, 9):
            assert brute_force_coefficient(sp, k, n) == divisor_table.coefficient(n, k)
    assert partition_sum_identity(divisor_table, sp, 4, n=6, brute_force=True).ok


def test_identity_mismatch_is_hard(divisor_table):
    sp = split(generate(SeriesSpec.constant(2), 60))
    assert not partition_sum_identity(divisor_table, sp, 3).ok
    with pytest.raises(IdentityError):
        partition_sum_identity(divisor_table, sp, 3, strict=True)
    assert issubclass(IdentityError, RuntimeError)


def test_second_difference_identity(divisor_table):
    sp = split(divisor_table.base)
    assert second_diff_identity(sp, 3, 2, 25, strict=True).ok
    assert second_diff_identity(sp, 2, 0, -1, strict=True).ok
    for k0 in range(2, 6):
        for n in range(-1, 40):
            assert second_diff_identity(sp, k0, 3, n).ok


def test_split_requires_one_lower_bound():
    with pytest.raises(DomainError):
        split(generate(SeriesSpec.sigma(), 10))


def test_a_I_closed_forms(sigma_shifted):
    const = split(generate(SeriesSpec.constant(3), 30))
    for n in (0, 5, 30):
        assert a_I(const, 2, 3, n) == 2 ** 3 * binomial(n + 4, 4)
    sp = split(sigma_shifted)
    sums = partial_sums(sigma_shifted)
    for n in (0, 10, 100):
        assert a_I(sp, 1, 1, n) == sums[n] - (n + 1)
        assert a_I(sp, 3, 0, n) == binomial(n + 2, 2)


def test_constant_series_residuals_vanish():
    f = generate(SeriesSpec.constant(2), 80)
    cert = certify_growth(f, 2, 0)
    sp = split(f)
    table = power_table(f, 3, 80)
    for n in range(1, 80):
        assert residual_one_zero(sp, 4, n, cert).residual == 0
        assert residual_differences(table, 3, n, cert)[0].residual == 0
    fits = fit_constants([residual_one_zero(sp, 3, n, cert) for n in range(1, 80)])
    assert fits[('one-zero', 3)].constant == 0
    assert fits[('one-zero', 3)].stable


def test_divisor_residuals_are_non_negative(sigma_shifted, divisor_certificate):
    sp = split(sigma_shifted)
    record = residual_one_zero(sp, 3, 100, divisor_certificate)
    assert record.residual >= 0
    for n in range(0, 400, 7):
        assert residual_one_zero(sp, 2, n, divisor_certificate).within_envelope


def test_second_order_aux_residual(sigma_shifted, divisor_certificate):
    sp = split(sigma_shifted)
    record = residual_second_order_aux(sp, 3, 2, 50, divisor_certificate)
    assert record.family == 'second-order-aux'
    assert record.k == 5
    with pytest.raises(ValueError):
        residual_second_order_aux(sp, 2, 2, 50, divisor_certificate)


def test_second_order_aux_at_the_start_of_the_row():
    f = generate(SeriesSpec.constant(2), 20)
    cert = certify_growth(f, 2, 0)
    sp = split(f)
    for n in (-1, 0, 5):
        assert residual_second_order_aux(sp, 3, 0, n, cert).residual == 0
    with pytest.raises(ValueError):
        residual_second_order_aux(sp, 3, 0, -2, cert)


def test_residual_record_family_is_checked():
    with pytest.raises(ValueError):
        ResidualRecord('constant:2', 'third-order', 3, 0, 1, Fraction(0), None)


def test_fits_are_stable_for_a_sharp_certificate(sigma_shifted):
    cert = certify_growth(sigma_shifted, sigma_upper_constant(Fraction(1, 10000)), Fraction(1, 2))
    sp = split(sigma_shifted)
    fits = fit_constants([residual_one_zero(sp, 3, n, cert) for n in range(1, 400)])
    assert fits[('one-zero', 3)].stable


def test_wrong_certificate_is_flagged():
    f = generate(SeriesSpec.geometric(1), 200)
    cert = certify_growth(f, 2, 0)
    sp = split(f)
    fits = fit_constants([residual_one_zero(sp, 3, n, cert) for n in range(1, 200)])
    assert not fits[('one-zero', 3)].stable


def test_fit_needs_records():
    with pytest.raises(InsufficientDataError):
        fit_constants([])


def test_residual_dump(tmp_path, sigma_shifted, divisor_certificate):
    sp = split(sigma_shifted)
    records = [residual_one_zero(sp, 2, n, divisor_certificate) for n in (1, 2, 3)]
    records += [residual_second_order_aux(sp, 3, 1, 10, divisor_certificate)]
    path = tmp_path / 'residuals.csv'
    write_residuals(records, path)
    back = read_residuals(path)
    assert [r.residual for r in back] == [r.residual for r in records]
    assert [r.within_envelope for r in back] == [True, True, True, None]


def test_window_check_is_reported(divisor_table, divisor_certificate):
    records = [r for n in range(1, 59) for r in residual_differences(divisor_table, 5, n, divisor_certificate)]
    report = window_check(records, divisor_certificate)
    assert {r.status for r in report.records} == {'reported'}
    assert len(report.records) == 3
