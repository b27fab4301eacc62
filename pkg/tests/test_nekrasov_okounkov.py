from fractions import Fraction

import pytest

from lcseries.errors import ResourceError
from lcseries.nekrasov_okounkov import (BRUTE_FORCE_LIMIT, Partition, ZPolynomial, export_qtable, hook_lengths,
                                        identity_spotcheck, partition_numbers, partitions, product_coefficients,
                                        q_bruteforce, q_recurrence, read_qtable, table_invariants,
                                        unimodality_scan)


@pytest.fixture(scope='module')
def q_table():
    return q_recurrence(60)


def test_partition_counts():
    p = partition_numbers(100)
    assert p[:11] == [1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42]
    assert p[100] == 190569292
    assert [sum(1 for _ in partitions(n)) for n in range(13)] == p[:13]
    assert list(partitions(0)) == [Partition(())]


def test_partitions_are_valid_and_distinct():
    seen = set(partitions(8))
    assert len(seen) == 22
    assert all(p.size == 8 for p in seen)
    with pytest.raises(ValueError):
        Partition((1, 2))


def test_conjugate_and_hooks():
    assert Partition((3, 1)).conjugate() == Partition((2, 1, 1))
    assert hook_lengths(Partition((1,))) == [1]
    assert sorted(hook_lengths(Partition((2,)))) == [1, 2]
    assert sorted(hook_lengths(Partition((2, 1)))) == [1, 1, 3]
    assert sorted(hook_lengths(Partition((3, 2, 1)))) == [1, 1, 1, 3, 3, 5]


def test_small_polynomials():
    assert q_bruteforce(0) == ZPolynomial((1,))
    assert q_bruteforce(1).coeffs == (1, 1)
    assert q_bruteforce(2).coeffs == (2, Fraction(5, 2), Fraction(1, 2))


def test_recurrence_matches_partition_sum(q_table):
    for n in range(13):
        assert q_table[n] == q_bruteforce(n)
    assert q_table[0] == ZPolynomial((1,))


def test_bruteforce_limit():
    with pytest.raises(ResourceError):
        q_bruteforce(26)


def test_memory_cap():
    with pytest.raises(ResourceError):
        q_recurrence(500, max_bytes=1000)


def test_table_invariants(q_table):
    report = table_invariants(q_table)
    assert report.ok
    assert report['nk/positive-coefficients'].measured['offending'] == []


@pytest.mark.slow
def test_partition_numbers_at_zero():
    table = q_recurrence(200)
    p = partition_numbers(200)
    assert all(table[n](0) == p[n] for n in range(201))


def test_identity_at_special_points(q_table):
    report = identity_spotcheck(60, [0, 1, -1, Fraction(1, 2)], table=q_table, strict=True)
    assert report.ok
    assert len(report.records) == 4


def test_product_at_one_is_self_convolution():
    p = partition_numbers(20)
    squared = product_coefficients(20, 1)
    assert squared == [sum(p[j] * p[n - j] for j in range(n + 1)) for n in range(21)]
    assert product_coefficients(10, -1) == [1] + [0] * 10


def test_unimodality_scan(q_table):
    report, scans = unimodality_scan(q_table, brute_limit=12)
    assert scans[0].unimodal and scans[0].mode_index == 0
    assert not scans[1].unimodal
    assert scans[2].unimodal and scans[2].mode_index == 1
    first = report['nk/unimodal/n=1']
    assert first.measured['weak_unimodal'] and first.measured['weak_mode'] == 0
    assert first.measured['reverified']
    assert {r.status for r in report.records} == {'reported'}
    assert len(report.records) == 61


def test_unimodality_reverifies_up_to_the_enumeration_limit(q_table):
    report, scans = unimodality_scan(q_table)
    for n, scan in scans.items():
        reverified = report[f'nk/unimodal/n={n}'].measured['reverified']
        if scan.unimodal or n > BRUTE_FORCE_LIMIT:
            assert reverified is None
        else:
            assert reverified is True


def test_polynomial_arithmetic():
    p = ZPolynomial((1, 2, 0, 0))
    assert p.degree == 1
    assert p(Fraction(1, 2)) == 2
    assert (p * p).coeffs == (1, 4, 4)
    assert (p + ZPolynomial((0, 0, 3))).coeffs == (1, 2, 3)
    assert ZPolynomial(()).degree == -1


def test_qtable_export(tmp_path, q_table):
    path = tmp_path / 'q.json'
    export_qtable(q_table, path)
    back = read_qtable(path)
    assert back.provenance == 'recurrence'
    assert back.polys == q_table.polys
