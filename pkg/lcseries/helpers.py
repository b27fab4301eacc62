import os
import hashlib
import multiprocessing as mp
from contextlib import contextmanager
from fractions import Fraction
from math import comb

import mpmath
from tqdm import tqdm


def makedir(path):
    '''
    if path does not exist in the file system, create it
    '''
    if not os.path.exists(path):
        os.makedirs(path)


def parse_fraction(text):
    '''parse "p/q", an integer or a finite decimal into an exact Fraction'''
    if isinstance(text, float):
        raise TypeError(f'floating point value {text!r} is not an exact rational')
    return Fraction(str(text).strip())


def exact_rational(value, name='value'):
    '''accept int / Fraction / exact strings only; floats are rejected'''
    if isinstance(value, bool) or isinstance(value, float):
        raise TypeError(f'{name} must be an exact rational, got {value!r}')
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        return parse_fraction(value)
    raise TypeError(f'{name} must be an exact rational, got {type(value).__name__}')


def fraction_to_str(x):
    x = Fraction(x)
    return f'{x.numerator}/{x.denominator}'


def binomial(n, k):
    '''binomial coefficient, zero outside 0 <= k <= n'''
    if k < 0 or n < 0 or k > n:
        return 0
    return comb(n, k)


def mpf_from_fraction(x):
    x = Fraction(x)
    return mpmath.mpf(x.numerator) / x.denominator


def iv_from_fraction(x):
    '''enclosing interval of an exact rational at the current iv precision'''
    x = Fraction(x)
    return mpmath.iv.mpf(x.numerator) / x.denominator


def fraction_from_mpf(x):
    '''exact dyadic rational equal to a finite mpf'''
    man, exp = mpmath.mpf(x).man_exp
    if exp >= 0:
        return Fraction(int(man) << exp)
    return Fraction(int(man), 1 << -exp)


def row_checksum(row):
    h = hashlib.sha256()
    for x in row:
        h.update(fraction_to_str(x).encode())
        h.update(b',')
    return h.hexdigest()[:16]


def write_args(args, path):
    '''echo the resolved run configuration, one "key: value" line per option'''
    with open(path, 'w') as f:
        for k, v in sorted(vars(args).items()):
            if callable(v):
                continue
            f.write(f'{k}: {v}\n')


def parallel_map(func, items, jobs=1, desc=None):
    '''ordered map over items, on a process pool when jobs > 1'''
    items = list(items)
    if jobs is None or jobs <= 1 or len(items) <= 1:
        return [func(x) for x in tqdm(items, desc=desc, disable=desc is None)]
    with mp.Pool(min(jobs, len(items))) as pool:
        return list(tqdm(pool.imap(func, items), total=len(items), desc=desc, disable=desc is None))


def iv_bounds(x):
    '''exact (lower, upper) mpf endpoints of an mpmath interval'''
    a, b = mpmath.iv.mpf(x)._mpi_
    return mpmath.mp.make_mpf(a), mpmath.mp.make_mpf(b)


@contextmanager
def iv_workprec(bits):
    '''run a block with the interval context at the given precision'''
    saved = mpmath.iv.prec
    mpmath.iv.prec = bits
    try:
        yield
    finally:
        mpmath.iv.prec = saved
