'''
The polynomials Q_n(z) = sum over partitions of n of prod over hooks (1 + z/h^2),
computed from partitions directly and from the recurrence
n Q_n = (z + 1) sum_{m=1}^n sigma_1(m) Q_{n-m}, checked against the product
prod_m (1 - q^m)^(-z-1) and scanned for unimodality.
'''
import json
from dataclasses import dataclass
from fractions import Fraction

from .concavity import logconcave_prefix, unimodal_check
from .errors import IdentityError, ResourceError
from .helpers import exact_rational, fraction_to_str, parallel_map, parse_fraction
from .report import VerificationReport
from .sequences import sigma_one_sieve

BRUTE_FORCE_LIMIT = 25
QTABLE_FORMAT_VERSION = 1


@dataclass(frozen=True)
class Partition:
    parts: tuple

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        if any(p <= 0 for p in parts):
            raise ValueError(f'partition parts must be positive, got {parts}')
        if any(a < b for a, b in zip(parts, parts[1:])):
            raise ValueError(f'partition parts must be non-increasing, got {parts}')
        object.__setattr__(self, 'parts', parts)

    @property
    def size(self):
        return sum(self.parts)

    def conjugate(self):
        if not self.parts:
            return self
        return Partition(tuple(sum(1 for p in self.parts if p > j) for j in range(self.parts[0])))


def partitions(n, largest=None):
    '''every partition of n exactly once, largest parts first'''
    if n < 0:
        raise ValueError(f'n must be non-negative, got {n}')
    largest = n if largest is None else largest
    if n == 0:
        yield Partition(())
        return
    for first in range(min(n, largest), 0, -1):
        for rest in partitions(n - first, first):
            yield Partition((first,) + rest.parts)


def partition_numbers(N):
    '''p(0..N) from the pentagonal number recurrence'''
    p = [1] + [0] * N
    for n in range(1, N + 1):
        total = 0
        j = 1
        while True:
            g1 = j * (3 * j - 1) // 2
            if g1 > n:
                break
            sign = 1 if j % 2 else -1
            total += sign * p[n - g1]
            g2 = j * (3 * j + 1) // 2
            if g2 <= n:
                total += sign * p[n - g2]
            j += 1
        p[n] = total
    return p


def hook_lengths(partition):
    '''arm + leg + 1 for every cell, via the conjugate partition'''
    rows = partition.parts
    cols = partition.conjugate().parts
    return [rows[i] - j + cols[j] - i - 1 for i in range(len(rows)) for j in range(rows[i])]


@dataclass(frozen=True)
class ZPolynomial:
    coeffs: tuple

    def __post_init__(self):
        coeffs = [Fraction(c) for c in self.coeffs] or [Fraction(0)]
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, 'coeffs', tuple(coeffs))

    @property
    def degree(self):
        return len(self.coeffs) - 1 if any(self.coeffs) else -1

    def __call__(self, z):
        z = exact_rational(z, 'z')
        value = Fraction(0)
        for c in reversed(self.coeffs):
            value = value * z + c
        return value

    def __add__(self, other):
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (n - len(other.coeffs))
        return ZPolynomial(tuple(x + y for x, y in zip(a, b)))

    def __mul__(self, other):
        if not isinstance(other, ZPolynomial):
            return ZPolynomial(tuple(c * other for c in self.coeffs))
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, x in enumerate(self.coeffs):
            if x:
                for j, y in enumerate(other.coeffs):
                    out[i + j] += x * y
        return ZPolynomial(tuple(out))

    __rmul__ = __mul__

    def __str__(self):
        return ' + '.join(f'{c}*z^{i}' for i, c in enumerate(self.coeffs) if c) or '0'


ONE = ZPolynomial((1,))


@dataclass
class QTable:
    polys: list
    provenance: str

    @property
    def N(self):
        return len(self.polys) - 1

    def __getitem__(self, n):
        return self.polys[n]


def q_bruteforce(n, limit=BRUTE_FORCE_LIMIT):
    '''Q_n as the hook product summed over all partitions of n'''
    if n > limit:
        raise ResourceError(f'brute-force Q_{n} enumerates too many partitions (limit {limit}); use q_recurrence')
    total = ZPolynomial((0,))
    for partition in partitions(n):
        term = ONE
        for h in hook_lengths(partition):
            term = term * ZPolynomial((1, Fraction(1, h * h)))
        total = total + term
    return total


def estimate_qtable_bytes(N):
    '''rough size of Q_0..Q_N as exact rationals'''
    return sum((n + 1) * (120 + n // 2) for n in range(N + 1))


def q_recurrence(N, max_bytes=None, log=None):
    '''Q_0..Q_N from n Q_n = (z+1) sum_m sigma_1(m) Q_{n-m}'''
    if N < 0:
        raise ValueError(f'N must be non-negative, got {N}')
    if max_bytes is not None and estimate_qtable_bytes(N) > max_bytes:
        raise ResourceError(f'Q table up to N={N} needs about {estimate_qtable_bytes(N) / 2 ** 20:.0f} MiB, '
                            f'budget is {max_bytes / 2 ** 20:.0f} MiB')
    sigma = sigma_one_sieve(N)
    polys = [[Fraction(1)]]
    for n in range(1, N + 1):
        acc = [Fraction(0)] * n
        for m in range(1, n + 1):
            s = int(sigma[m])
            for i, c in enumerate(polys[n - m]):
                acc[i] += s * c
        # multiply by (z + 1) / n
        q = [Fraction(0)] * (n + 1)
        for i, c in enumerate(acc):
            q[i] += c / n
            q[i + 1] += c / n
        polys.append(q)
        if log is not None and n % 50 == 0:
            log(f'\tQ_{n} done')
    return QTable([ZPolynomial(tuple(p)) for p in polys], 'recurrence')


def q_table_bruteforce(N, limit=BRUTE_FORCE_LIMIT):
    return QTable([q_bruteforce(n, limit) for n in range(N + 1)], 'bruteforce')


def product_coefficients(N, z):
    '''coefficients of prod_{m=1}^N (1 - q^m)^(-z-1) modulo q^(N+1)'''
    s = exact_rational(z, 'z') + 1
    out = [Fraction(1)] + [Fraction(0)] * N
    for m in range(1, N + 1):
        # (1 - q^m)^(-s) = sum_j binomial(s+j-1, j) q^(mj)
        factor = [Fraction(1)]
        for j in range(1, N // m + 1):
            factor.append(factor[-1] * (s + j - 1) / j)
        new = [Fraction(0)] * (N + 1)
        for i, c in enumerate(out):
            if c:
                for j, b in enumerate(factor):
                    if i + m * j > N:
                        break
                    new[i + m * j] += c * b
        out = new
    return out


def identity_spotcheck(N, z_values, table=None, strict=False):
    '''Q_n(z) equals coefficient n of the product, exactly, for every n <= N'''
    if table is None:
        table = q_recurrence(N)
    elif table.N < N:
        raise ValueError(f'Q table only reaches N={table.N}, need {N}')
    report = VerificationReport('nk-identity')
    for z in z_values:
        z = exact_rational(z, 'z')
        expected = product_coefficients(N, z)
        mismatch = next((n for n in range(N + 1) if table[n](z) != expected[n]), None)
        report.add(f'nk-identity/z={z}', 'pass' if mismatch is None else 'fail', N=N, first_mismatch=mismatch)
        if mismatch is not None and strict:
            raise IdentityError(f'Q_{mismatch}({z}) differs from the product expansion')
    return report


def table_invariants(table):
    '''Q_n(0) = p(n), Q_n(-1) = 0 for n >= 1, degree n, positive coefficients'''
    report = VerificationReport('nk-invariants')
    p = partition_numbers(table.N)
    bad_zero = [n for n in range(table.N + 1) if table[n](0) != p[n]]
    bad_minus_one = [n for n in range(1, table.N + 1) if table[n](-1) != 0]
    bad_degree = [n for n in range(table.N + 1) if table[n].degree != n]
    non_positive = [n for n in range(table.N + 1) if any(c <= 0 for c in table[n].coeffs)]
    report.add('nk/Q(0)=p(n)', 'pass' if not bad_zero else 'fail', N=table.N, offending=bad_zero)
    report.add('nk/Q(-1)=0', 'pass' if not bad_minus_one else 'fail', N=table.N, offending=bad_minus_one)
    report.add('nk/degree', 'pass' if not bad_degree else 'fail', N=table.N, offending=bad_degree)
    report.add('nk/positive-coefficients', 'reported', N=table.N, offending=non_positive,
               notes='non-positive coefficient found' if non_positive else '')
    return report


def _scan_one(item):
    n, coeffs = item
    strict = unimodal_check(coeffs, strict=True)
    weak = unimodal_check(coeffs, strict=False)
    concave = logconcave_prefix(coeffs, f'Q_{n}') if len(coeffs) >= 3 else None
    return n, strict, weak, concave


def unimodality_scan(table, jobs=1, brute_limit=BRUTE_FORCE_LIMIT):
    '''
    Strict unimodality of every Q_n, with the weak mode and the log-concave
    prefix as diagnostics. A non-unimodal Q_n with n <= brute_limit is
    recomputed from partitions before it is flagged.
    '''
    report = VerificationReport('nk-unimodality')
    results = parallel_map(_scan_one, [(n, table[n].coeffs) for n in range(table.N + 1)], jobs=jobs)
    scans = {}
    for n, strict, weak, concave in results:
        scans[n] = strict
        notes = ''
        reverified = None
        if not strict.unimodal:
            notes = 'not strictly unimodal'
            if n <= brute_limit:
                reverified = q_bruteforce(n) == table[n]
                notes += '; confirmed from partitions' if reverified else '; DISAGREES with partition sum'
        report.add(f'nk/unimodal/n={n}', 'reported', notes=notes, unimodal=strict.unimodal, mode=strict.mode_index,
                   first_offense=strict.first_offense, weak_unimodal=weak.unimodal, weak_mode=weak.mode_index,
                   logconcave_prefix=None if concave is None else concave.prefix_length,
                   reverified=reverified)
    return report, scans


def export_qtable(table, path):
    data = {
        'format_version': QTABLE_FORMAT_VERSION,
        'provenance': table.provenance,
        'N': table.N,
        'polys': {str(n): [fraction_to_str(c) for c in table[n].coeffs] for n in range(table.N + 1)},
    }
    with open(path, 'w') as f:
        json.dump(data, f, sort_keys=True, indent=1)


def read_qtable(path):
    with open(path) as f:
        data = json.load(f)
    if data.get('format_version') != QTABLE_FORMAT_VERSION:
        raise ValueError(f'{path}: unsupported Q-table format {data.get("format_version")}')
    polys = [ZPolynomial(tuple(parse_fraction(c) for c in data['polys'][str(n)])) for n in range(data['N'] + 1)]
    return QTable(polys, data['provenance'])
