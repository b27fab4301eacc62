'''
Exact truncated power series over non-negative rationals, power tables and
certified high-precision evaluation inside the unit disc.
'''
import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .errors import DomainError, PrecisionError, ResourceError
from .helpers import mpf_from_fraction

KERNELS = ('schoolbook', 'kronecker')
MAX_DERIVATIVE_ORDER = 3
DEFAULT_MAX_TABLE_BYTES = 2 * 1024 ** 3


@dataclass(frozen=True)
class TruncatedSeries:
    '''coefficients a_0..a_N of a formal series with exact non-negative entries'''
    coeffs: tuple
    series_id: str = ''

    def __post_init__(self):
        coeffs = tuple(Fraction(c) for c in self.coeffs)
        if not coeffs:
            raise ValueError('a truncated series needs at least the constant coefficient')
        for n, c in enumerate(coeffs):
            if c < 0:
                raise ValueError(f'coefficient {n} of {self.series_id or "series"} is negative ({c})')
        object.__setattr__(self, 'coeffs', coeffs)

    @property
    def N(self):
        return len(self.coeffs) - 1

    @property
    def one_lower_bounded(self):
        return all(c >= 1 for c in self.coeffs)

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, n):
        return self.coeffs[n]

    def __iter__(self):
        return iter(self.coeffs)

    def truncate(self, N):
        _require_order(self, N)
        if N == self.N:
            return self
        return TruncatedSeries(self.coeffs[:N + 1], self.series_id)

    def __repr__(self):
        head = ', '.join(str(c) for c in self.coeffs[:6])
        more = ', ...' if len(self.coeffs) > 6 else ''
        return f'TruncatedSeries({self.series_id or "?"}, N={self.N}, [{head}{more}])'


@dataclass(frozen=True)
class PowerTable:
    base: TruncatedSeries
    rows: dict = field(repr=False)
    K: int
    N: int

    def row(self, k):
        return self.rows[k]

    def coefficient(self, n, k):
        return self.rows[k][n]


def constant_one(N):
    return TruncatedSeries((1,) + (0,) * N, 'one')


def _require_order(f, N):
    if N < 0:
        raise ValueError(f'truncation order must be non-negative, got {N}')
    if f.N < N:
        raise ResourceError(f'series {f.series_id or "?"} is truncated at {f.N}, order {N} was requested')


# ---------------------------------------------------------------------------
# convolution kernels
# ---------------------------------------------------------------------------

def _schoolbook(a, b, N):
    out = []
    for n in range(N + 1):
        lo = max(0, n - len(b) + 1)
        hi = min(n, len(a) - 1)
        out.append(sum((a[i] * b[n - i] for i in range(lo, hi + 1)), Fraction(0)))
    return out


def to_integers(coeffs):
    '''numerators over the least common denominator: coeffs = ints / d'''
    d = math.lcm(*(c.denominator for c in coeffs))
    return [c.numerator * (d // c.denominator) for c in coeffs], d


def kronecker_mul(a, b, N):
    '''
    truncated product of two non-negative integer coefficient lists, computed
    as one big-integer multiplication of the packed coefficients
    '''
    a = a[:N + 1]
    b = b[:N + 1]
    width = max(x.bit_length() for x in a) + max(x.bit_length() for x in b) \
        + min(len(a), len(b)).bit_length() + 1
    slot = (width + 7) // 8
    packed_a = int.from_bytes(b''.join(x.to_bytes(slot, 'little') for x in a), 'little')
    packed_b = int.from_bytes(b''.join(x.to_bytes(slot, 'little') for x in b), 'little')
    raw = (packed_a * packed_b).to_bytes(slot * (len(a) + len(b)), 'little')
    out = [int.from_bytes(raw[i * slot:(i + 1) * slot], 'little') for i in range(min(N + 1, len(a) + len(b) - 1))]
    return out + [0] * (N + 1 - len(out))


def _integer_pow(ints, k, N):
    result = [1] + [0] * N
    base = ints[:N + 1]
    while True:
        if k & 1:
            result = kronecker_mul(result, base, N)
        k >>= 1
        if not k:
            return result
        base = kronecker_mul(base, base, N)


def _check_kernel(kernel):
    if kernel not in KERNELS:
        raise ValueError(f'unknown convolution kernel {kernel!r}, expected one of {KERNELS}')


def series_mul(a, b, N, kernel='schoolbook'):
    '''coefficients 0..N of a*b, exactly'''
    _check_kernel(kernel)
    _require_order(a, N)
    _require_order(b, N)
    series_id = f'({a.series_id})*({b.series_id})'
    if kernel == 'schoolbook':
        return TruncatedSeries(_schoolbook(a.coeffs[:N + 1], b.coeffs[:N + 1], N), series_id)
    ia, da = to_integers(a.coeffs[:N + 1])
    ib, db = to_integers(b.coeffs[:N + 1])
    d = da * db
    return TruncatedSeries([Fraction(c, d) for c in kronecker_mul(ia, ib, N)], series_id)


def series_pow(f, k, N, kernel='schoolbook'):
    '''
    coefficients 0..N of f^k by repeated squaring, truncating at every step;
    k = 0 gives the constant series 1
    '''
    _check_kernel(kernel)
    if k < 0:
        raise ValueError(f'power must be non-negative, got {k}')
    _require_order(f, N)
    series_id = f'({f.series_id})^{k}'
    if k == 0:
        return TruncatedSeries(constant_one(N).coeffs, series_id)
    if kernel == 'kronecker':
        ints, d = to_integers(f.coeffs[:N + 1])
        dk = d ** k
        return TruncatedSeries([Fraction(c, dk) for c in _integer_pow(ints, k, N)], series_id)
    result = None
    base = f.coeffs[:N + 1]
    while True:
        if k & 1:
            result = base if result is None else _schoolbook(result, base, N)
        k >>= 1
        if not k:
            return TruncatedSeries(result, series_id)
        base = _schoolbook(base, base, N)


def estimate_table_bytes(f, K, N):
    '''rough size of the K x (N+1) table of exact rationals'''
    ints, d = to_integers(f.coeffs[:N + 1])
    per_factor = max(x.bit_length() for x in ints) + 2 * d.bit_length() + (N + 2).bit_length()
    return sum((N + 1) * (k * per_factor // 8 + 120) for k in range(1, K + 1))


def power_table(f, K, N, kernel='schoolbook', max_bytes=DEFAULT_MAX_TABLE_BYTES, log=None):
    '''rows k = 1..K of f^k truncated at N; row k is row k-1 times f'''
    _check_kernel(kernel)
    if K < 1:
        raise ValueError(f'K must be at least 1, got {K}')
    _require_order(f, N)
    needed = estimate_table_bytes(f, K, N)
    if max_bytes is not None and needed > max_bytes:
        raise ResourceError(f'power table of {f.series_id or "series"} with K={K}, N={N} needs about '
                            f'{needed / 2 ** 20:.0f} MiB, budget is {max_bytes / 2 ** 20:.0f} MiB')
    base = f.truncate(N)
    rows = {1: base}
    if kernel == 'kronecker':
        ints, d = to_integers(base.coeffs)
        current, dk = ints, d
        for k in range(2, K + 1):
            current = kronecker_mul(current, ints, N)
            dk *= d
            rows[k] = TruncatedSeries([Fraction(c, dk) for c in current], f'({f.series_id})^{k}')
            if log is not None:
                log(f'\trow {k}/{K}')
    else:
        for k in range(2, K + 1):
            rows[k] = TruncatedSeries(_schoolbook(rows[k - 1].coeffs, base.coeffs, N), f'({f.series_id})^{k}')
            if log is not None:
                log(f'\trow {k}/{K}')
    return PowerTable(base=base, rows=rows, K=K, N=N)


def derivative(f, i):
    '''i-th derivative: coefficient n becomes (n+i)!/n! * a_{n+i}'''
    if i < 0 or i > MAX_DERIVATIVE_ORDER:
        raise DomainError(f'derivative order must be in 0..{MAX_DERIVATIVE_ORDER}, got {i}')
    if i > f.N:
        raise ValueError(f'derivative order {i} exceeds truncation order {f.N}')
    if i == 0:
        return f
    coeffs = [math.perm(n + i, i) * f[n + i] for n in range(f.N + 1 - i)]
    return TruncatedSeries(coeffs, f"{f.series_id}{chr(39) * i}")


def shift_down(f):
    '''g = f / z for a series with a_0 = 0'''
    if f[0] != 0:
        raise DomainError(f'{f.series_id} has a non-zero constant term and cannot be divided by z')
    if f.N < 1:
        raise ValueError('nothing left after dividing by z')
    return TruncatedSeries(f.coeffs[1:], f'{f.series_id}/z')


def shift_up(g, k, N=None):
    '''z^k * g, truncated at N (default: the order of g); f^k = z^k g^k when f = z g'''
    N = g.N if N is None else N
    coeffs = [Fraction(0)] * min(k, N + 1) + list(g.coeffs[:max(N + 1 - k, 0)])
    coeffs += [Fraction(0)] * (N + 1 - len(coeffs))
    return TruncatedSeries(coeffs, f'z^{k}*{g.series_id}')


# ---------------------------------------------------------------------------
# certified evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CertifiedComplexValue:
    value: mpmath.mpc
    error_radius: mpmath.mpf
    terms: int = 0

    def __post_init__(self):
        if not mpmath.isfinite(self.error_radius) or self.error_radius < 0:
            raise PrecisionError(f'error radius {self.error_radius} is not a finite non-negative bound')

    @property
    def real(self):
        return mpmath.re(self.value)

    @property
    def imag(self):
        return mpmath.im(self.value)

    def contains(self, z):
        return abs(mpmath.mpc(z) - self.value) <= self.error_radius

    def pow(self, k):
        '''w^k with |w^k - v^k| <= k max(|w|, |v|)^(k-1) |w - v|'''
        bound = (abs(self.value) + self.error_radius) ** (k - 1) if k > 1 else mpmath.mpf(1)
        return CertifiedComplexValue(self.value ** k, k * bound * self.error_radius, self.terms)

    def scale(self, s):
        s = mpmath.mpmathify(s)
        return CertifiedComplexValue(self.value * s, self.error_radius * abs(s), self.terms)


def tail_bound(cert, r, M, order=0):
    '''
    bound on sum_{n>M} b_n r^n for the order-th derivative of a series whose
    coefficients obey a_n <= C + D(n+1)^alpha, using (n+1)^alpha <= n+1 and a
    geometric majorant
    '''
    r = mpmath.mpf(r)
    C = mpf_from_fraction(cert.C)
    D = mpf_from_fraction(cert.D)
    first = M + 1
    growth = 1 if cert.alpha > 0 else 0

    def majorant(n):
        return mpmath.mpf(n + order) ** order * (C + D * mpmath.mpf(n + order + 1) ** growth)

    q = (1 + mpmath.mpf(1) / (first + order)) ** (order + 1)
    if r * q >= 1:
        return mpmath.inf
    return majorant(first) * r ** first / (1 - r * q)


def required_order(cert, r, tolerance, order=0, limit=10 ** 7):
    '''smallest truncation order whose certified tail is below tolerance'''
    lo, hi = 0, 16
    while tail_bound(cert, r, hi, order) > tolerance:
        lo, hi = hi, hi * 2
        if hi > limit:
            raise PrecisionError(f'radius {mpmath.nstr(r, 8)} needs more than {limit} terms for tolerance {tolerance}',
                                 required_order=hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if tail_bound(cert, r, mid, order) > tolerance:
            lo = mid
        else:
            hi = mid
    return hi


class SeriesEvaluator:
    '''
    Certified Horner evaluation of a truncated series (and its first three
    derivatives) at points with |z| < 1. The error radius adds the tail
    bound from the growth certificate and a running rounding bound
    (2M+2) 2^(1-bits) sum |b_n| |z|^n.
    '''

    def __init__(self, f, cert, bits=128, tolerance=None):
        if bits < 53:
            raise ValueError(f'working precision must be at least 53 bits, got {bits}')
        self.f = f
        self.cert = cert
        self.bits = bits
        self.tolerance = tolerance
        self._coeffs = {}
        self._orders = {}
        self._absolute = {}

    def coefficients(self, order=0):
        if order not in self._coeffs:
            with mpmath.workprec(self.bits):
                self._coeffs[order] = [mpf_from_fraction(c) for c in derivative(self.f, order)]
        return self._coeffs[order]

    def terms_for(self, r, order=0):
        available = self.f.N - order
        if self.tolerance is None:
            return available
        key = (order, r)
        if key not in self._orders:
            needed = required_order(self.cert, r, mpmath.mpf(self.tolerance) / 10, order)
            if needed > available:
                raise PrecisionError(f'|z| = {mpmath.nstr(r, 10)} needs truncation order {needed + order} '
                                     f'for tolerance {self.tolerance}, series has {self.f.N}',
                                     required_order=needed + order)
            self._orders[key] = needed
        return self._orders[key]

    def absolute(self, r, order=0):
        '''sum of b_n r^n over the used terms; also the exact value at a real point'''
        with mpmath.workprec(self.bits):
            r = mpmath.mpf(r)
            M = self.terms_for(r, order)
            key = (order, r, M)
            if key not in self._absolute:
                coeffs = self.coefficients(order)
                self._absolute[key] = mpmath.polyval(coeffs[M::-1], r)
            return self._absolute[key]

    def __call__(self, z, order=0):
        with mpmath.workprec(self.bits):
            z = mpmath.mpc(z)
            r = abs(z)
            if r >= 1:
                raise DomainError(f'|z| = {mpmath.nstr(r, 10)} is outside the unit disc')
            M = self.terms_for(r, order)
            coeffs = self.coefficients(order)
            if mpmath.im(z) == 0 and mpmath.re(z) >= 0:
                value = mpmath.mpc(self.absolute(r, order))
            else:
                value = mpmath.polyval(coeffs[M::-1], z)
            tail = tail_bound(self.cert, r, M, order)
            if not mpmath.isfinite(tail):
                raise PrecisionError(f'tail bound does not converge at |z| = {mpmath.nstr(r, 10)} with {M} terms',
                                     required_order=None)
            rounding = (2 * M + 2) * mpmath.ldexp(1, 1 - self.bits) * self.absolute(r, order)
            return CertifiedComplexValue(value, tail + rounding, M + 1)


def eval_complex(f, z, cert, bits=128, tolerance=None, order=0):
    '''certified value of the order-th derivative of f at z'''
    return SeriesEvaluator(f, cert, bits=bits, tolerance=tolerance)(z, order)
