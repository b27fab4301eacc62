import math
import random
from fractions import Fraction

import pytest

from lcseries.concavity import (ConcavityReport, breakpoint_curve, logconcave_prefix, ratio_criterion,
                                ratio_samples, row_reports, unimodal_check)
from lcseries.sequences import SeriesSpec, generate
from lcseries.series import power_table


def test_binomial_rows_are_log_concave():
    table = power_table(generate(SeriesSpec.geometric(1), 200), 20, 200, kernel='kronecker')
    for k, report in row_reports(table).items():
        assert report.log_concave
        assert report.prefix_length == 199


def test_first_violation():
    report = logconcave_prefix([1, 1, 3, 1])
    assert report.first_violation == 1
    assert report.prefix_length == 0
    assert not report.log_concave


def test_leading_zeros_are_skipped():
    report = logconcave_prefix([0, 0, 1, 2, 3])
    assert report.start == 2
    assert report.log_concave


def test_short_sequence():
    with pytest.raises(ValueError):
        logconcave_prefix([1, 2])


def test_unimodal_strict_and_weak():
    assert unimodal_check([1, 3, 2]).mode_index == 1
    assert unimodal_check([Fraction(2), Fraction(5, 2), Fraction(1, 2)]).mode_index == 1
    plateau = unimodal_check([1, 2, 2, 1])
    assert not plateau.unimodal
    assert plateau.first_offense == (1, 2)
    weak = unimodal_check([1, 2, 2, 1], strict=False)
    assert weak.unimodal and weak.mode_index == 1
    assert not unimodal_check([1, 1]).unimodal
    assert unimodal_check([1, 1], strict=False).mode_index == 0
    assert not unimodal_check([2, 1, 2], strict=False).unimodal


def test_ratio_criterion_on_binomial_row():
    row = [Fraction((n + 1) * (n + 2), 2) for n in range(10)]
    r = ratio_criterion(row, 1, k=3)
    assert r.ratio == Fraction(1, 4)
    assert r.reference == Fraction(1, 2)
    assert r.log_concave and r.below_reference
    flat = ratio_criterion([1, 1, 1], 1)
    assert not flat.defined and flat.log_concave
    assert set(ratio_samples(row, [1, 2, 4, 8, 16])) == {1, 2, 4, 8}


def test_breakpoint_curve_censors_log_concave_rows():
    table = power_table(generate(SeriesSpec.constant(2), 40), 6, 40)
    curve = breakpoint_curve(table)
    assert sorted(curve.censored) == [1, 2, 3, 4, 5, 6]
    assert not curve.fit_available
    frame = curve.to_frame()
    assert list(frame.columns) == ['k', 'prefix_length', 'shifted_prefix_length', 'censored']
    assert list(frame['shifted_prefix_length']) == [39 + k for k in range(1, 7)]


def test_divisor_rows_have_full_prefix(sigma_shifted):
    table = power_table(sigma_shifted.truncate(150), 6, 150, kernel='kronecker')
    reports = row_reports(table)
    assert all(r.scanned_up_to == 150 for r in reports.values())


def _random_rows(count, length, seed=0):
    rng = random.Random(seed)
    return [[rng.randint(1, 50) for _ in range(length)] for _ in range(count)]


def test_reports_are_scale_invariant():
    scale = Fraction(7, 3)
    for row in _random_rows(50, 12) + [[1, 3, 3, 1], [1, 2, 2, 1], [0, 0, 1, 2, 3]]:
        scaled = [scale * x for x in row]
        assert logconcave_prefix(scaled) == logconcave_prefix(row)
        for strict in (True, False):
            assert unimodal_check(scaled, strict) == unimodal_check(row, strict)


def test_prefix_agrees_with_ratio_criterion():
    for row in _random_rows(200, 10, seed=1):
        report = logconcave_prefix(row)
        checks = [ratio_criterion(row, n) for n in range(1, len(row) - 1)]
        for r in checks:
            if r.defined:
                assert (r.ratio <= 1) == r.log_concave
        first_bad = next((r.n for r in checks if not r.log_concave), None)
        assert report.first_violation == first_bad


def test_breakpoint_fit_on_uncensored_rows():
    table = power_table(generate(SeriesSpec.geometric(1), 40), 6, 40)
    reports = {k: ConcavityReport(2 ** k, 2 ** k + 1, 40) for k in range(1, 6)}
    reports[6] = ConcavityReport(39, None, 40)
    curve = breakpoint_curve(table, reports=reports)
    assert curve.censored == [6]
    assert curve.fit_available
    assert curve.fits['linear']['slope'] == pytest.approx(math.log(2))
    assert set(curve.fits) == {'cube_root', 'linear'}


def test_breakpoint_curve_of_single_row():
    table = power_table(generate(SeriesSpec.constant(2), 20), 1, 20)
    curve = breakpoint_curve(table)
    assert curve.censored == [1]
    assert not curve.fit_available
    assert len(curve.to_frame()) == 1
