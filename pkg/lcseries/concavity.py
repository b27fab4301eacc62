'''
Exact log-concavity and unimodality scans of coefficient sequences.
'''
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import pandas as pd

from .helpers import parallel_map


def _dominates(a, b, c):
    '''b^2 >= a*c for non-negative rationals, by cross multiplication'''
    return b.numerator ** 2 * a.denominator * c.denominator >= a.numerator * c.numerator * b.denominator ** 2


@dataclass
class ConcavityReport:
    prefix_length: int
    first_violation: int
    scanned_up_to: int
    start: int = 0
    series_id: str = ''
    k: int = None

    @property
    def log_concave(self):
        return self.first_violation is None

    def to_dict(self, ratios_sampled=None):
        return {'series_id': self.series_id, 'k': self.k, 'N': self.scanned_up_to,
                'prefix_length': self.prefix_length, 'first_violation': self.first_violation,
                'ratios_sampled': ratios_sampled or {}}


@dataclass
class UnimodalityReport:
    unimodal: bool
    mode_index: int
    first_offense: tuple = None
    strict: bool = True


def logconcave_prefix(seq, series_id='', k=None):
    '''
    Largest L with a_n^2 >= a_{n-1} a_{n+1} for all n <= L. Leading zeros are
    skipped: the scan starts right after the first non-zero entry.
    '''
    seq = [Fraction(x) for x in seq]
    if len(seq) < 3:
        raise ValueError(f'log-concavity needs at least 3 entries, got {len(seq)}')
    N = len(seq) - 1
    start = next((i for i, x in enumerate(seq) if x != 0), N)
    for n in range(start + 1, N):
        if not _dominates(seq[n - 1], seq[n], seq[n + 1]):
            return ConcavityReport(n - 1, n, N, start, series_id, k)
    return ConcavityReport(N - 1, None, N, start, series_id, k)


def unimodal_check(seq, strict=True):
    '''
    strict: a_0 < ... < a_M > a_{M+1} > ... ; any plateau is an offense.
    weak (diagnostics only): non-decreasing up to the first maximum, then non-increasing.
    '''
    seq = list(seq)
    if not seq:
        raise ValueError('unimodality needs at least one entry')
    if strict:
        M = 0
        while M + 1 < len(seq) and seq[M] < seq[M + 1]:
            M += 1
        for j in range(M, len(seq) - 1):
            if not seq[j] > seq[j + 1]:
                return UnimodalityReport(False, None, (j, j + 1), strict)
        return UnimodalityReport(True, M, None, strict)
    M = seq.index(max(seq))
    for j in range(M):
        if seq[j] > seq[j + 1]:
            return UnimodalityReport(False, None, (j, j + 1), strict)
    for j in range(M, len(seq) - 1):
        if seq[j] < seq[j + 1]:
            return UnimodalityReport(False, None, (j, j + 1), strict)
    return UnimodalityReport(True, M, None, strict)


@dataclass
class RatioCriterion:
    '''
    a_{n-1} (a_{n+1} - 2a_n + a_{n-1}) / (a_n - a_{n-1})^2; log-concave at n
    iff ratio <= 1 whenever the first difference is non-zero
    '''
    n: int
    ratio: Fraction
    log_concave: bool
    reference: Fraction = None

    @property
    def defined(self):
        return self.ratio is not None

    @property
    def below_reference(self):
        if self.ratio is None or self.reference is None:
            return None
        return self.ratio <= self.reference


def ratio_criterion(row, n, k=None):
    if not 1 <= n <= len(row) - 2:
        raise ValueError(f'ratio criterion needs 1 <= n <= {len(row) - 2}, got {n}')
    a0, a1, a2 = Fraction(row[n - 1]), Fraction(row[n]), Fraction(row[n + 1])
    first = a1 - a0
    reference = Fraction(k - 2, k - 1) if k is not None and k >= 2 else None
    log_concave = _dominates(a0, a1, a2)
    if first == 0:
        return RatioCriterion(n, None, log_concave, reference)
    return RatioCriterion(n, a0 * (a2 - 2 * a1 + a0) / first ** 2, log_concave, reference)


def ratio_samples(row, ns, k=None):
    '''{n: ratio} for serialisation; undefined ratios map to None'''
    return {n: ratio_criterion(row, n, k).ratio for n in ns if 1 <= n <= len(row) - 2}


@dataclass
class BreakpointCurve:
    entries: dict
    N: int
    censored: list = field(default_factory=list)
    fits: dict = field(default_factory=dict)
    series_id: str = ''

    @property
    def fit_available(self):
        return bool(self.fits)

    def to_frame(self):
        ks = sorted(self.entries)
        return pd.DataFrame({
            'k': ks,
            'prefix_length': [self.entries[k] for k in ks],
            'shifted_prefix_length': [self.entries[k] + k for k in ks],
            'censored': [k in self.censored for k in ks],
        })


def _row_prefix(item):
    k, row, series_id = item
    return k, logconcave_prefix(row, series_id, k)


def row_reports(table, jobs=1):
    '''ConcavityReport per row of a power table'''
    items = [(k, table.row(k).coeffs, table.base.series_id) for k in range(1, table.K + 1)]
    return dict(parallel_map(_row_prefix, items, jobs=jobs))


def breakpoint_curve(table, jobs=1, reports=None):
    '''
    L(k) for every row. Rows that are log-concave over the whole scanned range
    are censored and left out of the least-squares fits of log L against k^(1/3)
    and against k.
    '''
    reports = reports or row_reports(table, jobs)
    N = table.N
    entries = {k: r.prefix_length for k, r in reports.items()}
    censored = [k for k, r in reports.items() if r.first_violation is None]
    usable = sorted(k for k in entries if k not in censored and entries[k] > 0)
    fits = {}
    if len(usable) >= 2:
        ks = np.array(usable, dtype=float)
        logs = np.log(np.array([entries[k] for k in usable], dtype=float))
        for name, x in (('cube_root', np.cbrt(ks)), ('linear', ks)):
            slope, intercept = np.polyfit(x, logs, 1)
            fits[name] = {'slope': float(slope), 'intercept': float(intercept)}
    return BreakpointCurve(entries, N, censored, fits, table.base.series_id)
