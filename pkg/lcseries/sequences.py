'''
Concrete coefficient sequences (divisor sums, geometric, constant, files) and
the partial-sum growth certificates a_0 + ... + a_n ~ C(n+1).
'''
import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from .errors import CertificateError, PrecisionError, ResourceError, SeriesFormatError, UsageError
from .helpers import exact_rational, fraction_from_mpf, iv_bounds, iv_from_fraction, iv_workprec, parse_fraction
from .report import VerificationReport
from .series import TruncatedSeries

SERIES_KINDS = ('geometric', 'constant', 'sigma-shifted', 'sigma', 'file')
PARTIAL_SUM_BITS = 256


@dataclass(frozen=True)
class SeriesSpec:
    kind: str
    C: Fraction = None
    path: str = None

    def __post_init__(self):
        if self.kind not in SERIES_KINDS:
            raise ValueError(f'unknown series kind {self.kind!r}, expected one of {SERIES_KINDS}')
        if self.kind in ('geometric', 'constant'):
            C = exact_rational(1 if self.C is None else self.C, 'C')
            if C < 1:
                raise ValueError(f'{self.kind} series needs C >= 1, got {C}')
            object.__setattr__(self, 'C', C)
        if self.kind == 'file' and not self.path:
            raise ValueError('file series needs a path')

    @classmethod
    def geometric(cls, C=1):
        return cls('geometric', C)

    @classmethod
    def constant(cls, C):
        return cls('constant', C)

    @classmethod
    def sigma_shifted(cls):
        return cls('sigma-shifted')

    @classmethod
    def sigma(cls):
        return cls('sigma')

    @classmethod
    def custom_file(cls, path):
        return cls('file', path=path)

    @property
    def series_id(self):
        if self.kind in ('geometric', 'constant'):
            return f'{self.kind}:{self.C}'
        if self.kind == 'file':
            return f'file:{self.path}'
        return self.kind

    @property
    def one_lower_bounded(self):
        return self.kind in ('geometric', 'constant', 'sigma-shifted')


def parse_series_id(text):
    '''
    geometric[:C], constant:C, sigma-shifted, sigma, file:PATH
    '''
    kind, _, arg = text.strip().partition(':')
    try:
        if kind == 'geometric':
            return SeriesSpec.geometric(arg or 1)
        if kind == 'constant':
            if not arg:
                raise ValueError('constant series needs a value, e.g. constant:2')
            return SeriesSpec.constant(arg)
        if kind == 'file':
            return SeriesSpec.custom_file(arg)
        if kind in ('sigma-shifted', 'sigma') and not arg:
            return SeriesSpec(kind)
    except (ValueError, TypeError) as e:
        raise UsageError(f'bad series id {text!r}: {e}') from e
    raise UsageError(f'bad series id {text!r}, expected one of geometric[:C], constant:C, sigma-shifted, sigma, file:PATH')


# ---------------------------------------------------------------------------
# divisor sums
# ---------------------------------------------------------------------------

def sigma_one(n):
    '''sum of the divisors of n'''
    if n < 1:
        raise ValueError(f'divisor sums are defined for n >= 1, got {n}')
    total = 0
    d = 1
    while d * d <= n:
        if n % d == 0:
            total += d
            if d * d != n:
                total += n // d
        d += 1
    return total


def sigma_minus_one(n):
    '''sum of 1/d over the divisors d of n, which is sigma_one(n) / n'''
    return Fraction(sigma_one(n), n)


def sigma_one_sieve(N):
    '''array s with s[n] = sigma_one(n) for 1 <= n <= N and s[0] = 0'''
    s = np.zeros(N + 1, dtype=np.int64)
    for d in range(1, N + 1):
        s[d::d] += d
    return s


def sigma_minus_one_table(N):
    '''[0, sigma_minus_one(1), ..., sigma_minus_one(N)]'''
    s = sigma_one_sieve(N)
    return [Fraction(0)] + [Fraction(int(s[n]), n) for n in range(1, N + 1)]


# ---------------------------------------------------------------------------
# series generation
# ---------------------------------------------------------------------------

def read_series_file(path, N):
    coeffs = []
    with open(path) as f:
        for line_number, line in enumerate(f, 1):
            text = line.split('#', 1)[0].strip()
            if not text:
                continue
            try:
                c = parse_fraction(text)
            except (ValueError, ZeroDivisionError) as e:
                raise SeriesFormatError(path, line_number, f'cannot parse {text!r} as a rational ({e})') from e
            if c < 0:
                raise SeriesFormatError(path, line_number, f'negative coefficient {text}')
            coeffs.append(c)
            if len(coeffs) == N + 1:
                break
    if len(coeffs) < N + 1:
        raise ResourceError(f'{path} holds {len(coeffs)} coefficients, order {N} needs {N + 1}')
    return coeffs


def generate(spec, N):
    if N < 0:
        raise ValueError(f'truncation order must be non-negative, got {N}')
    if spec.kind == 'geometric':
        coeffs = [spec.C ** n for n in range(N + 1)]
    elif spec.kind == 'constant':
        coeffs = [spec.C] * (N + 1)
    elif spec.kind == 'sigma-shifted':
        coeffs = sigma_minus_one_table(N + 1)[1:]
    elif spec.kind == 'sigma':
        coeffs = sigma_minus_one_table(N)
    else:
        coeffs = read_series_file(spec.path, N)
    return TruncatedSeries(coeffs, spec.series_id)


# ---------------------------------------------------------------------------
# partial sums
# ---------------------------------------------------------------------------

def partial_sums(f):
    '''exact S_n = a_0 + ... + a_n'''
    sums = []
    total = Fraction(0)
    for c in f:
        total += c
        sums.append(total)
    return sums


def _fixed_point_sums(coeffs, bits):
    '''directed partial sums floor/ceil(S_n * 2^bits), yielded per n'''
    lo = hi = 0
    for c in coeffs:
        scaled = c.numerator << bits
        lo += scaled // c.denominator
        hi += -(-scaled // c.denominator)
        yield lo, hi


def check_average_bound(f, C, bits=PARTIAL_SUM_BITS):
    '''
    (a_0 + ... + a_n) / (n+1) <= C for every n <= N. Each comparison is
    decided on directed fixed-point sums and falls back to the exact sum when
    the rounding interval straddles the bound.
    '''
    C = exact_rational(C, 'C')
    report = VerificationReport('average-bound')
    first_violation = None
    best, best_n = None, 0
    exact_total = None
    for n, (lo, hi) in enumerate(_fixed_point_sums(f.coeffs, bits)):
        bound = C * (n + 1)
        scaled = bound.numerator << bits
        if hi * bound.denominator <= scaled:
            violated = False
        elif lo * bound.denominator > scaled:
            violated = True
        else:
            exact_total = sum(f.coeffs[:n + 1], Fraction(0))
            violated = exact_total > bound
        average = Fraction(hi, (n + 1) << bits)
        if best is None or average > best:
            best, best_n = average, n
        if violated and first_violation is None:
            first_violation = n
    status = 'pass' if first_violation is None else 'fail'
    report.add(f'average-bound/{f.series_id}', status, envelope=f'average <= {C}',
               C=C, N=f.N, max_average=best, argmax=best_n, first_violation=first_violation)
    return report


@dataclass(frozen=True)
class GrowthCertificate:
    '''0 <= C(n+1) - (a_0 + ... + a_n) <= D (n+1)^alpha for all n <= verified_up_to'''
    C: Fraction
    D: Fraction
    alpha: Fraction
    verified_up_to: int
    D_half: Fraction = None
    series_id: str = ''

    def __post_init__(self):
        for name in ('C', 'D', 'alpha'):
            object.__setattr__(self, name, exact_rational(getattr(self, name), name))
        if self.C <= 1:
            raise ValueError(f'growth certificate needs C > 1, got {self.C}')
        if not 0 <= self.alpha < 1:
            raise ValueError(f'alpha must lie in [0, 1), got {self.alpha}')
        if self.D < 0:
            raise ValueError(f'D must be non-negative, got {self.D}')

    @property
    def growth_base(self):
        return growth_base(self.C, self.alpha)

    def base_power(self, k):
        '''A^(-(2+alpha) k) = ((C-1)/C)^k, exactly'''
        return ((self.C - 1) / self.C) ** k

    @property
    def stable(self):
        '''D over the full range stays within 10% of D over the first half'''
        if self.D_half is None:
            return None
        if self.D_half == 0:
            return self.D == 0
        return self.D <= Fraction(11, 10) * self.D_half

    def to_dict(self):
        return {'series_id': self.series_id, 'C': self.C, 'D': self.D, 'alpha': self.alpha,
                'verified_up_to': self.verified_up_to, 'D_half': self.D_half, 'stable': self.stable,
                'growth_base': self.growth_base}


def growth_base(C, alpha, bits=128):
    '''A = (C / (C-1))^(1/(2+alpha))'''
    C = Fraction(C)
    alpha = Fraction(alpha)
    with mpmath.workprec(bits):
        return mpmath.power(mpmath.mpf(C.numerator) / (C.numerator - C.denominator),
                            1 / (2 + mpmath.mpf(alpha.numerator) / alpha.denominator))


def certify_growth(f, C, alpha, d_max=None, bits=PARTIAL_SUM_BITS):
    '''
    Scan the deviations C(n+1) - S_n exactly. D is the smallest constant with
    deviation <= D (n+1)^alpha; for alpha > 0 it is the upper end of an
    interval enclosure turned into an exact dyadic rational.
    '''
    C = exact_rational(C, 'C')
    alpha = exact_rational(alpha, 'alpha')
    if d_max is not None:
        d_max = exact_rational(d_max, 'd_max')
    if C <= 1:
        raise ValueError(f'certify_growth needs C > 1, got {C}')
    if not 0 <= alpha < 1:
        raise ValueError(f'alpha must lie in [0, 1), got {alpha}')
    half = f.N // 2
    D = D_half = Fraction(0)
    D_iv = D_half_iv = None
    ceiling_breach = None
    with iv_workprec(bits):
        iv_alpha = iv_from_fraction(alpha)
        for n, S in enumerate(partial_sums(f)):
            deviation = C * (n + 1) - S
            if deviation < 0:
                raise CertificateError(f'{f.series_id}: partial sum exceeds {C}(n+1) at n={n}', first_offending=n)
            if alpha == 0:
                D = max(D, deviation)
                if n <= half:
                    D_half = D
                if d_max is not None and ceiling_breach is None and deviation > d_max:
                    ceiling_breach = n
                continue
            if deviation == 0:
                continue
            ratio_lo, ratio_hi = iv_bounds(iv_from_fraction(deviation) / mpmath.iv.mpf(n + 1) ** iv_alpha)
            if D_iv is None or ratio_hi > D_iv:
                D_iv = ratio_hi
            if n <= half:
                D_half_iv = D_iv
            if d_max is not None and ceiling_breach is None and fraction_from_mpf(ratio_lo) > d_max:
                ceiling_breach = n
        if alpha != 0:
            D = fraction_from_mpf(D_iv) if D_iv is not None else Fraction(0)
            D_half = fraction_from_mpf(D_half_iv) if D_half_iv is not None else Fraction(0)
    if ceiling_breach is not None:
        raise CertificateError(f'{f.series_id}: deviation exceeds {d_max}(n+1)^{alpha} at n={ceiling_breach}',
                               first_offending=ceiling_breach)
    return GrowthCertificate(C=C, D=D, alpha=alpha, verified_up_to=f.N, D_half=D_half, series_id=f.series_id)


def _to_fixed(x, bits, upper):
    '''ceil / floor of an mpf times 2^bits'''
    man, exp = mpmath.mpf(x).man_exp
    man = int(man)
    exp += bits
    if exp >= 0:
        return man << exp
    if upper:
        return -((-man) >> -exp)
    return man >> -exp


def sigma_partial_sum_bounds(N, bits=PARTIAL_SUM_BITS):
    '''
    pi^2/6 (n+1) - log(n+1) - 1 <= sigma_{-1}(1) + ... + sigma_{-1}(n+1) <= pi^2/6 (n+1)
    for every 0 <= n <= N, with directed rounding on every side
    '''
    if N < 0:
        raise ValueError(f'N must be non-negative, got {N}')
    report = VerificationReport('sigma-partial-sums')
    sigma = sigma_one_sieve(N + 1)
    with iv_workprec(bits + 32):
        zeta2 = mpmath.iv.pi ** 2 / 6
        zeta2_lo, zeta2_hi = iv_bounds(zeta2)
        p_lo = _to_fixed(zeta2_lo, bits, upper=False)
        p_hi = _to_fixed(zeta2_hi, bits, upper=True)
        one = 1 << bits
        lo = hi = 0
        upper_violation = lower_violation = None
        min_upper_gap = min_lower_gap = None
        for n in range(N + 1):
            m = n + 1
            s = int(sigma[m]) << bits
            lo += s // m
            hi += -(-s // m)
            # S <= pi^2/6 (n+1)
            if hi <= p_lo * m:
                pass
            elif lo > p_hi * m:
                upper_violation = n if upper_violation is None else upper_violation
            else:
                raise PrecisionError(f'cannot decide the upper partial-sum bound at n={n} with {bits} bits', bits=2 * bits)
            gap = p_lo * m - hi
            if min_upper_gap is None or gap < min_upper_gap[0]:
                min_upper_gap = (gap, n)
            # S >= pi^2/6 (n+1) - log(n+1) - 1
            log_lo, log_hi = iv_bounds(mpmath.iv.log(m))
            floor_target = p_hi * m - _to_fixed(log_lo, bits, upper=False) - one
            ceil_target = p_lo * m - _to_fixed(log_hi, bits, upper=True) - one
            if lo >= floor_target:
                pass
            elif hi < ceil_target:
                lower_violation = n if lower_violation is None else lower_violation
            else:
                raise PrecisionError(f'cannot decide the lower partial-sum bound at n={n} with {bits} bits', bits=2 * bits)
            gap = lo - floor_target
            if min_lower_gap is None or gap < min_lower_gap[0]:
                min_lower_gap = (gap, n)

    def as_real(gap):
        return mpmath.ldexp(gap[0], -bits)

    report.add('sigma-partial-sums/upper', 'pass' if upper_violation is None else 'fail',
               envelope='S_n <= pi^2/6 (n+1)', N=N, first_violation=upper_violation,
               min_gap=as_real(min_upper_gap), min_gap_at=min_upper_gap[1])
    report.add('sigma-partial-sums/lower', 'pass' if lower_violation is None else 'fail',
               envelope='S_n >= pi^2/6 (n+1) - log(n+1) - 1', N=N, first_violation=lower_violation,
               min_gap=as_real(min_lower_gap), min_gap_at=min_lower_gap[1])
    return report


def sigma_upper_constant(eps=Fraction(1, 1000)):
    '''exact dyadic C with pi^2/6 < C < pi^2/6 + eps'''
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError(f'eps must be positive, got {eps}')
    bits = max(8, math.ceil(math.log2(eps.denominator / eps.numerator)) + 4)
    with iv_workprec(bits + 32):
        upper = iv_bounds(mpmath.iv.pi ** 2 / 6)[1]
    return Fraction(_to_fixed(upper, bits, upper=True), 1 << bits)


def eta0(bits=128):
    '''sqrt(pi^2 / (pi^2 - 6)), the limit of the growth base for the divisor series'''
    with mpmath.workprec(bits):
        return mpmath.sqrt(mpmath.pi ** 2 / (mpmath.pi ** 2 - 6))


def growth_base_sequence(eps_values=(Fraction(1, 10), Fraction(1, 100), Fraction(1, 1000), Fraction(1, 10000)),
                         alphas=(Fraction(1, 2), Fraction(1, 5), Fraction(1, 10), Fraction(1, 100))):
    '''growth bases along C -> pi^2/6 and alpha -> 0, paired pointwise'''
    points = []
    for eps, alpha in zip(eps_values, alphas):
        C = sigma_upper_constant(eps)
        points.append((C, Fraction(alpha), growth_base(C, alpha)))
    return points
