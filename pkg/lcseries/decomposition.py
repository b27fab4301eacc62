'''
Splitting a 1-lower bounded series into the constant-1 part and its excess,
the tuple sums a^I_n built from them, the exact identities they satisfy, and
the residual terms measured against their envelopes.

A tuple I in {0,1}^k enters only through (k0, k1), the number of zeros and
ones: a^I_n is coefficient n of (excess)^k1 / (1-z)^k0.
'''
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import accumulate, product

import mpmath
import pandas as pd

from .errors import DomainError, IdentityError, InsufficientDataError, ResourceError
from .helpers import binomial, iv_bounds, iv_from_fraction, iv_workprec
from .report import VerificationReport
from .series import TruncatedSeries, series_mul

ENVELOPE_BITS = 128
FAMILIES = ('one-zero', 'at-least-one-zero', 'second-order-aux', 'second-order', 'first-order', 'zeroth-order')
BRUTE_FORCE_MAX_K = 5


class SplitSeries:
    '''zeros_part (all ones) + ones_part (a_n - 1) = source'''

    def __init__(self, source, kernel='schoolbook'):
        if not source.one_lower_bounded:
            raise DomainError(f'{source.series_id} is not 1-lower bounded and cannot be split')
        self.source = source
        self.kernel = kernel
        self.N = source.N
        self.zeros_part = TruncatedSeries([1] * (source.N + 1), 'one-part')
        self.ones_part = TruncatedSeries([c - 1 for c in source], f'{source.series_id}-1')
        self._powers = {0: (Fraction(1),) + (Fraction(0),) * source.N}
        self._rows = {}

    def ones_power(self, k1):
        '''coefficients of ones_part^k1, built from the previous power'''
        for j in range(max(self._powers) + 1, k1 + 1):
            previous = TruncatedSeries(self._powers[j - 1], self.ones_part.series_id)
            self._powers[j] = series_mul(previous, self.ones_part, self.N, self.kernel).coeffs
        return self._powers[k1]

    def row(self, k0, k1):
        '''a^I_0..a^I_N for I with k0 zeros and k1 ones; k0 + k1 = 0 is the series 1'''
        if k0 < 0 or k1 < 0:
            raise ValueError(f'tuple counts must be non-negative, got ({k0}, {k1})')
        key = (k0, k1)
        if key not in self._rows:
            row = self.ones_power(k1)
            for _ in range(k0):
                row = tuple(accumulate(row))
            self._rows[key] = row
        return self._rows[key]


def split(f, kernel='schoolbook'):
    return SplitSeries(f, kernel)


def a_I(split, k0, k1, n):
    if k0 + k1 < 1:
        raise ValueError('a tuple needs at least one entry')
    if n > split.N:
        raise ResourceError(f'{split.source.series_id} is truncated at {split.N}, a^I_{n} was requested')
    if n < 0:
        return Fraction(0)
    return split.row(k0, k1)[n]


def a_I_row(split, k0, k1):
    if k0 + k1 < 1:
        raise ValueError('a tuple needs at least one entry')
    return split.row(k0, k1)


# ---------------------------------------------------------------------------
# brute force over tuples and compositions (small k only)
# ---------------------------------------------------------------------------

def compositions(n, k):
    '''all (x_1, ..., x_k) of non-negative integers summing to n'''
    if k == 1:
        yield (n,)
        return
    for x in range(n + 1):
        for rest in compositions(n - x, k - 1):
            yield (x,) + rest


def brute_force_a_I(split, I, n):
    '''a^I_n straight from its definition as a sum over compositions of n'''
    parts = (split.zeros_part, split.ones_part)
    total = Fraction(0)
    for xs in compositions(n, len(I)):
        term = Fraction(1)
        for i, x in zip(I, xs):
            term *= parts[i][x]
            if term == 0:
                break
        total += term
    return total


def brute_force_coefficient(split, k, n):
    '''a_{n,k} as the sum of a^I_n over all 2^k tuples'''
    if k > BRUTE_FORCE_MAX_K:
        raise ResourceError(f'tuple enumeration is limited to k <= {BRUTE_FORCE_MAX_K}, got k={k}')
    return sum((brute_force_a_I(split, I, n) for I in product((0, 1), repeat=k)), Fraction(0))


# ---------------------------------------------------------------------------
# exact identities
# ---------------------------------------------------------------------------

def _identity_outcome(report, check_id, lhs, rhs, strict, **measured):
    ok = lhs == rhs
    report.add(check_id, 'pass' if ok else 'fail', lhs=lhs, rhs=rhs, **measured)
    if not ok and strict:
        raise IdentityError(f'{check_id}: {lhs} != {rhs}')
    return ok


def partition_sum_identity(table, split, k, n=None, brute_force=False, strict=False):
    '''
    a_{n,k} = sum over k1 of binomial(k, k1) a^I_n with (k - k1, k1); every n
    of the row when n is None. brute_force adds the tuple enumeration for
    k <= 5.
    '''
    if k > table.K:
        raise ValueError(f'k={k} exceeds the table size K={table.K}')
    report = VerificationReport('partition-sum-identity')
    ns = range(table.N + 1) if n is None else [n]
    rows = [(k1, split.row(k - k1, k1)) for k1 in range(k + 1)]
    mismatches = 0
    for m in ns:
        lhs = sum((binomial(k, k1) * row[m] for k1, row in rows), Fraction(0))
        rhs = table.coefficient(m, k)
        if lhs != rhs:
            mismatches += 1
            _identity_outcome(report, f'partition-sum/k={k}/n={m}', lhs, rhs, strict)
    if not mismatches:
        report.add(f'partition-sum/k={k}', 'pass', n_checked=len(ns), series_id=split.source.series_id)
    if brute_force and k <= BRUTE_FORCE_MAX_K:
        for m in ns:
            _identity_outcome(report, f'partition-sum-brute/k={k}/n={m}',
                              brute_force_coefficient(split, k, m), table.coefficient(m, k), strict)
    return report


def _at(row, m):
    '''row entry m, reading negative indices as 0'''
    return row[m] if m >= 0 else Fraction(0)


def second_diff_identity(split, k0, k1, n, strict=False):
    '''
    a^I_{n+1} - 2 a^I_n + a^I_{n-1} = a^{I'}_{n+1}, I' dropping two zeros;
    negative indices read as 0, so n = -1 is allowed
    '''
    if k0 < 2:
        raise ValueError(f'the second difference identity needs k0 >= 2, got {k0}')
    if n < -1:
        raise ValueError(f'n must be at least -1, got {n}')
    if n + 1 > split.N:
        raise ResourceError(f'{split.source.series_id} is truncated at {split.N}, index {n + 1} was requested')
    row = split.row(k0, k1)
    reduced = split.row(k0 - 2, k1)
    lhs = _at(row, n + 1) - 2 * _at(row, n) + _at(row, n - 1)
    report = VerificationReport('second-diff-identity')
    _identity_outcome(report, f'second-diff/k0={k0}/k1={k1}/n={n}', lhs, _at(reduced, n + 1), strict)
    return report


# ---------------------------------------------------------------------------
# residuals
# ---------------------------------------------------------------------------

@dataclass
class ResidualRecord:
    series_id: str
    family: str
    k0: int
    k1: int
    n: int
    residual: Fraction
    shape: mpmath.mpf
    within_envelope: bool = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f'unknown residual family {self.family!r}')

    @property
    def k(self):
        return self.k0 + self.k1

    @property
    def ratio(self):
        '''upper bound on |residual| / shape'''
        if self.shape <= 0:
            return mpmath.inf if self.residual else mpmath.mpf(0)
        with iv_workprec(ENVELOPE_BITS):
            return iv_bounds(iv_from_fraction(abs(self.residual)) / mpmath.iv.mpf(self.shape))[1]

    def check(self, constant):
        '''|residual| <= constant * shape, with the shape rounded down'''
        return self.ratio <= constant


def _shape(numerator, base, alpha, extra=None):
    '''lower end of numerator / base^(1-alpha) (+ extra)'''
    with iv_workprec(ENVELOPE_BITS):
        value = mpmath.iv.mpf(numerator) / mpmath.iv.mpf(base) ** (1 - iv_from_fraction(alpha))
        if extra is not None:
            value = value + extra()
        return iv_bounds(value)[0]


def one_zero_shape(k, n, alpha):
    return _shape(k * (k - 1), n + k - 1, alpha)


def second_order_aux_shape(k, n, alpha):
    return _shape(k * k, n + k, alpha)


def differences_shape(k, n, cert):
    '''k^2/(n+k)^(1-alpha) + (n+k)^(2+alpha) A^(-(2+alpha)k)'''
    def tail():
        base_power = iv_from_fraction(cert.base_power(k))
        return mpmath.iv.mpf(n + k) ** (2 + iv_from_fraction(cert.alpha)) * base_power
    return _shape(k * k, n + k, cert.alpha, extra=tail)


def residual_at_least_one_zero(split, k0, k1, n, cert):
    '''
    a^I_n = binomial(n+k-1, k-1) (C-1)^k1 (1 - S) with 0 <= S <= C_1 k(k-1)/(n+k-1)^(1-alpha);
    k0 = 1 is the one-zero case
    '''
    if k0 < 1 or k0 + k1 < 2:
        raise ValueError(f'need at least one zero and k >= 2, got ({k0}, {k1})')
    k = k0 + k1
    main = binomial(n + k - 1, k - 1) * (cert.C - 1) ** k1
    residual = 1 - a_I(split, k0, k1, n) / main
    within = residual >= 0
    if k == 2 and k0 == 1:
        # k = 2 is the certificate itself: R <= D / ((C-1)(n+1)^(1-alpha))
        with iv_workprec(ENVELOPE_BITS):
            bound = iv_from_fraction(cert.D / (cert.C - 1)) / mpmath.iv.mpf(n + 1) ** (1 - iv_from_fraction(cert.alpha))
            within = within and iv_bounds(iv_from_fraction(residual))[0] <= iv_bounds(bound)[1]
    family = 'one-zero' if k0 == 1 else 'at-least-one-zero'
    return ResidualRecord(split.source.series_id, family, k0, k1, n, residual,
                          one_zero_shape(k, n, cert.alpha), within)


def residual_one_zero(split, k, n, cert):
    '''R_{n,k} for the tuple of k-1 ones and a single zero'''
    if k < 2:
        raise ValueError(f'k must be at least 2, got {k}')
    return residual_at_least_one_zero(split, 1, k - 1, n, cert)


def residual_second_order_aux(split, k0, k1, n, cert):
    '''
    a^I_{n+1} - 2a^I_n + a^I_{n-1} = (n+k)^(k-3)/(k-3)! (C-1)^k1 (1 - S) with |S| <= C_2 k^2/(n+k)^(1-alpha)
    '''
    if k0 < 3:
        raise ValueError(f'need k0 >= 3, got {k0}')
    if n < -1:
        raise ValueError(f'n must be at least -1, got {n}')
    k = k0 + k1
    row = split.row(k0, k1)
    if n + 1 > split.N:
        raise ResourceError(f'{split.source.series_id} is truncated at {split.N}, index {n + 1} was requested')
    second = _at(row, n + 1) - 2 * _at(row, n) + _at(row, n - 1)
    main = Fraction((n + k) ** (k - 3), math.factorial(k - 3)) * (cert.C - 1) ** k1
    residual = 1 - second / main
    return ResidualRecord(split.source.series_id, 'second-order-aux', k0, k1, n, residual,
                          second_order_aux_shape(k, n, cert.alpha))


def residual_differences(table, k, n, cert):
    '''
    R^(2), R^(1), R^(0): the second, first and zeroth differences of row k
    divided by C^k (n+k)^(k-1-i)/(k-1-i)!, minus 1
    '''
    if k < 3 or n < 1:
        raise ValueError(f'residual differences need k >= 3 and n >= 1, got k={k}, n={n}')
    if n + 1 > table.N:
        raise ResourceError(f'table is truncated at {table.N}, index {n + 1} was requested')
    row = table.row(k)
    a_prev, a_n, a_next = row[n - 1], row[n], row[n + 1]
    Ck = cert.C ** k
    differences = {
        'second-order': (a_next - 2 * a_n + a_prev, k - 3),
        'first-order': (a_n - a_prev, k - 2),
        'zeroth-order': (a_n, k - 1),
    }
    shape = differences_shape(k, n, cert)
    records = []
    for family, (value, power) in differences.items():
        main = Ck * Fraction((n + k) ** power, math.factorial(power))
        records.append(ResidualRecord(table.base.series_id, family, 0, k, n, value / main - 1, shape))
    return records


# ---------------------------------------------------------------------------
# constant fitting
# ---------------------------------------------------------------------------

@dataclass
class ConstantFit:
    family: str
    k: int
    constant: mpmath.mpf
    constant_half: mpmath.mpf
    n_range: tuple
    negative: int = 0

    @property
    def growth(self):
        if self.constant_half == 0:
            return mpmath.mpf(1) if self.constant == 0 else mpmath.inf
        return self.constant / self.constant_half

    @property
    def stable(self):
        '''the constant does not grow by more than 10% when the n-range doubles'''
        return self.growth <= mpmath.mpf(11) / 10


def fit_constants(records):
    '''
    Smallest constant per (family, k) covering every record's envelope, fitted
    over the full n-range and over its first half.
    '''
    records = list(records)
    if not records:
        raise InsufficientDataError('no residual records to fit')
    groups = {}
    for r in records:
        groups.setdefault((r.family, r.k), []).append(r)
    fits = {}
    for (family, k), group in sorted(groups.items()):
        n_lo = min(r.n for r in group)
        n_hi = max(r.n for r in group)
        n_mid = n_lo + (n_hi - n_lo) // 2
        ratios = [(r.n, r.ratio) for r in group]
        constant = max(x for _, x in ratios)
        constant_half = max(x for n, x in ratios if n <= n_mid)
        negative = sum(r.residual < 0 for r in group)
        fits[(family, k)] = ConstantFit(family, k, constant, constant_half, (n_lo, n_hi), negative)
    return fits


def fits_report(fits, suite='constants'):
    report = VerificationReport(suite)
    for (family, k), fit in fits.items():
        notes = '' if fit.stable else 'UNSTABLE: fitted constant grows with the n-range'
        if fit.negative and family in ('one-zero', 'at-least-one-zero'):
            notes = (notes + '; ' if notes else '') + f'{fit.negative} negative residuals'
        report.add(f'fit/{family}/k={k}', 'reported', notes=notes, constant=fit.constant,
                   constant_half=fit.constant_half, growth=fit.growth, stable=fit.stable,
                   n_range=list(fit.n_range))
    return report


def window_check(records, cert):
    '''
    |R^(i)| <= 1/k^2 on the window k^(5/(1-alpha)) <= n <= A^k / k^2, for the
    (k, n) actually present in records
    '''
    report = VerificationReport('window-check')
    groups = {}
    for r in records:
        if r.family in ('second-order', 'first-order', 'zeroth-order'):
            groups.setdefault((r.family, r.k), []).append(r)
    exponent = 5 / (1 - mpmath.mpf(cert.alpha.numerator) / cert.alpha.denominator)
    for (family, k), group in sorted(groups.items()):
        lower = mpmath.mpf(k) ** exponent
        upper = 1 / (mpmath.mpf(cert.base_power(k).numerator) / cert.base_power(k).denominator) \
            ** (1 / (2 + mpmath.mpf(cert.alpha.numerator) / cert.alpha.denominator)) / k ** 2
        inside = [r for r in group if lower <= r.n <= upper]
        bound = Fraction(1, k * k)
        worst = max((abs(r.residual) for r in inside), default=None)
        report.add(f'window/{family}/k={k}', 'reported', window=[lower, upper], n_inside=len(inside),
                   n_within=sum(abs(r.residual) <= bound for r in inside),
                   max_abs_residual=worst, bound=bound)
    return report


# ---------------------------------------------------------------------------
# residual dumps
# ---------------------------------------------------------------------------

CSV_COLUMNS = ['series_id', 'family', 'k0', 'k1', 'n', 'residual_num', 'residual_den', 'envelope', 'pass']


def write_residuals(records, path):
    frame = pd.DataFrame([{
        'series_id': r.series_id, 'family': r.family, 'k0': r.k0, 'k1': r.k1, 'n': r.n,
        'residual_num': str(r.residual.numerator), 'residual_den': str(r.residual.denominator),
        'envelope': mpmath.nstr(r.shape, 40),
        'pass': '' if r.within_envelope is None else str(bool(r.within_envelope)).lower(),
    } for r in records], columns=CSV_COLUMNS)
    frame.to_csv(path, index=False)


def read_residuals(path):
    frame = pd.read_csv(path, dtype={'residual_num': str, 'residual_den': str, 'envelope': str, 'pass': str})
    records = []
    with mpmath.workprec(ENVELOPE_BITS):
        for row in frame.itertuples(index=False):
            flag = row[CSV_COLUMNS.index('pass')]
            within = None if pd.isna(flag) else flag == 'true'
            records.append(ResidualRecord(row.series_id, row.family, int(row.k0), int(row.k1), int(row.n),
                                          Fraction(int(row.residual_num), int(row.residual_den)),
                                          mpmath.mpf(row.envelope), within))
    return records
