from fractions import Fraction

import mpmath
import pytest

from lcseries.report import SCHEMA_VERSION, VerificationReport, read_report, to_text


def test_status_values():
    report = VerificationReport('demo')
    with pytest.raises(ValueError):
        report.add('x', 'maybe')


def test_measured_values_are_text():
    assert to_text(Fraction(3, 4)) == '3/4'
    assert to_text({1: [Fraction(1, 2), None, True]}) == {'1': ['1/2', None, True]}
    assert to_text(mpmath.mpf(1) / 3).startswith('0.3333')


def test_fingerprint_ignores_timing(tmp_path):
    a = VerificationReport('demo')
    a.add('identity', 'pass', lhs=Fraction(1, 2))
    a.add('fit', 'reported', constant=mpmath.mpf(2))
    b = VerificationReport('demo', records=list(a.records))
    a.timing['total'] = 1.5
    b.timing['total'] = 9.0
    assert a.fingerprint() == b.fingerprint()
    assert a.ok and a.counts() == {'pass': 1, 'fail': 0, 'reported': 1}
    path = tmp_path / 'r.json'
    a.write(path)
    data = read_report(path)
    assert data['schema_version'] == SCHEMA_VERSION
    assert data['records'][0]['measured'] == {'lhs': '1/2'}


def test_failures_and_extend():
    a = VerificationReport('a')
    b = VerificationReport('b')
    b.add('broken', 'fail')
    b.timing['total'] = 1.0
    a.extend(b)
    assert not a.ok
    assert a['broken'].status == 'fail'
    assert 'b/total' in a.timing
    assert a.summary() == 'a: 0 pass, 1 fail, 0 reported'
