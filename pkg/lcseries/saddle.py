'''
Numerical checks of the saddle-point machinery on the circle |z| = r:
derivative bounds, A(r) = r f'(r) / f(r), the saddle radius r0 with
A(r0) = n/k, the argument function psi_r, the modulus envelopes near and
away from the positive axis, and the theta^2-weighted Cauchy integral split
into a major arc |theta| < theta0 and the minor arc.

Every value of f comes from a certified SeriesEvaluator; f^k is formed as
the k-th power of one certified value, normalised by f(r0)^k.
'''
import json
import math
from dataclasses import asdict, dataclass, field

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402
import mpmath  # noqa: E402
import pandas as pd  # noqa: E402

from .errors import BranchError, DomainError, PrecisionError, QuadratureError  # noqa: E402
from .report import VerificationReport, to_text  # noqa: E402
from .series import SeriesEvaluator  # noqa: E402


@dataclass(frozen=True)
class SaddleConfig:
    k: int = 10
    n: int = 50
    precision_bits: int = 128
    N: int = 4000
    max_subdivisions: int = 200
    abs_tolerance: float = 1e-10
    rel_tolerance: float = 1e-12
    eval_tolerance: float = 1e-20
    solver_tolerance: float = 1e-12
    quad_degree: int = 4
    c2: float = 0.5
    c3: float = None
    delta: float = 1e-9
    grid_points: int = 64

    def __post_init__(self):
        if self.precision_bits < 128:
            raise ValueError(f'precision_bits must be at least 128, got {self.precision_bits}')
        if not self.abs_tolerance > 0:
            raise ValueError(f'abs_tolerance must be positive, got {self.abs_tolerance}')
        if self.k < 1 or self.n < 1:
            raise ValueError(f'k and n must be positive, got k={self.k}, n={self.n}')


def make_evaluator(f, cert, config):
    '''certified evaluator whose tail stays below config.eval_tolerance / 10'''
    return SeriesEvaluator(f.truncate(min(config.N, f.N)), cert, bits=config.precision_bits,
                           tolerance=config.eval_tolerance)


def _decide(value, error, bound):
    '''"above" / "below" the bound, or "tight" when the certified interval contains it'''
    if value - error >= bound:
        return 'above'
    if value + error < bound:
        return 'below'
    return 'tight'


# ---------------------------------------------------------------------------
# derivative bounds and A(r)
# ---------------------------------------------------------------------------

@dataclass
class DerivativeBound:
    r: mpmath.mpf
    i: int
    value: mpmath.mpf
    error: mpmath.mpf
    scaled: mpmath.mpf
    lower: int
    upper: mpmath.mpf
    lower_ok: bool
    upper_ok: bool


def derivative_bounds(ev, r, i):
    '''
    f^(i)(r) (1-r)^(i+1) against i! from below and C (i+1)! from above, C the
    certificate constant
    '''
    with mpmath.workprec(ev.bits):
        r = mpmath.mpf(r)
        if not 0 < r < 1:
            raise DomainError(f'r must lie in (0, 1), got {r}')
        v = ev(r, i)
        scale = (1 - r) ** (i + 1)
        value, error = mpmath.re(v.value), v.error_radius
        scaled = value * scale
        lower = math.factorial(i)
        upper = mpmath.mpf(ev.cert.C.numerator) / ev.cert.C.denominator * math.factorial(i + 1)
        return DerivativeBound(r, i, value, error, scaled, lower, upper,
                               _decide(scaled, error * scale, lower) != 'below',
                               _decide(scaled, error * scale, upper) != 'above')


def derivative_bounds_sweep(ev, rs, orders=(0, 1, 2, 3), label=None):
    '''fitted c = min and C = max of f^(i)(r)(1-r)^(i+1) over a radius grid'''
    report = VerificationReport('derivative-bounds')
    for i in orders:
        bounds = [derivative_bounds(ev, r, i) for r in rs]
        ok = all(b.lower_ok and b.upper_ok for b in bounds)
        report.add(f'{label + "/" if label else ""}derivative-bounds/i={i}', 'pass' if ok else 'fail',
                   envelope=f'{math.factorial(i)} <= f^({i})(r)(1-r)^{i + 1} <= C*{math.factorial(i + 1)}',
                   c_fit=min(b.scaled for b in bounds), C_fit=max(b.scaled for b in bounds),
                   radii=[b.r for b in bounds])
    return report


@dataclass
class AValue:
    r: mpmath.mpf
    value: mpmath.mpf
    error: mpmath.mpf
    sandwich: mpmath.mpf = None
    sandwich_ok: bool = None


def A_of_r(ev, r):
    '''
    A(r) = r f'(r) / f(r) with a propagated error bar, plus the normalised
    value A(r)(1-r)/r, which lies in [1/C, 2C] for a certified 1-lower bounded series
    '''
    with mpmath.workprec(ev.bits):
        r = mpmath.mpf(r)
        if r == 0:
            return AValue(r, mpmath.mpf(0), mpmath.mpf(0))
        if not 0 < r < 1:
            raise DomainError(f'r must lie in [0, 1), got {r}')
        f0, f1 = ev(r, 0), ev(r, 1)
        v0, e0 = mpmath.re(f0.value), f0.error_radius
        v1, e1 = mpmath.re(f1.value), f1.error_radius
        if v0 - e0 <= 0:
            raise PrecisionError(f'f({mpmath.nstr(r, 10)}) is not certified positive')
        value = r * v1 / v0
        error = r * (e1 * v0 + v1 * e0) / (v0 * (v0 - e0))
        C = mpmath.mpf(ev.cert.C.numerator) / ev.cert.C.denominator
        sandwich = value * (1 - r) / r
        ok = _decide(sandwich, error * (1 - r) / r, 1 / C) != 'below' \
            and _decide(sandwich, error * (1 - r) / r, 2 * C) != 'above'
        return AValue(r, value, error, sandwich, ok)


@dataclass
class SaddlePoint:
    r0: mpmath.mpf
    residual: mpmath.mpf
    n: int
    k: int
    C10_implied: mpmath.mpf = None
    c6_implied: mpmath.mpf = None
    iterations: int = 0
    monotone: bool = None


def solve_r0(ev, n, k, tol=1e-12, delta=1e-9, max_iterations=400):
    '''bisection on A(r) - n/k; the upper end of the bracket walks towards 1'''
    if n < 1 or k < 1:
        raise ValueError(f'n and k must be positive, got n={n}, k={k}')
    with mpmath.workprec(ev.bits):
        target = mpmath.mpf(n) / k
        tol = mpmath.mpf(tol)
        lo = mpmath.mpf(delta)
        A_lo = A_of_r(ev, lo).value
        if A_lo >= target:
            raise DomainError(f'A({mpmath.nstr(lo, 5)}) = {mpmath.nstr(A_lo, 10)} already exceeds n/k = {n}/{k}')
        hi = mpmath.mpf(1) / 2
        samples = [(lo, A_lo)]
        while True:
            A_hi = A_of_r(ev, hi).value
            samples.append((hi, A_hi))
            if A_hi >= target:
                break
            lo, A_lo = hi, A_hi
            hi = 1 - (1 - hi) / 2
            if 1 - hi < delta:
                raise DomainError(f'no bracket for A(r) = {n}/{k} in ({delta}, 1 - {delta}): '
                                  f'A = {mpmath.nstr(samples[0][1], 8)} .. {mpmath.nstr(A_hi, 8)}')
        iterations = 0
        mid, A_mid = hi, A_hi
        while iterations < max_iterations:
            mid = (lo + hi) / 2
            A_mid = A_of_r(ev, mid).value
            samples.append((mid, A_mid))
            iterations += 1
            if abs(A_mid - target) <= tol:
                break
            if A_mid < target:
                lo = mid
            else:
                hi = mid
        residual = abs(A_mid - target)
        if residual > tol:
            raise PrecisionError(f'bisection stalled at residual {mpmath.nstr(residual, 5)} after {iterations} steps; '
                                 'raise the working precision', bits=2 * ev.bits)
        samples.sort()
        monotone = all(a[1] <= b[1] for a, b in zip(samples, samples[1:]))
        return SaddlePoint(mid, residual, n, k,
                           C10_implied=n * (1 - mid) / (mid * k),
                           c6_implied=(1 - mid) * max(n, k) / k,
                           iterations=iterations, monotone=monotone)


# ---------------------------------------------------------------------------
# argument function
# ---------------------------------------------------------------------------

def theta_safe(ev, r, min_fraction=0.05, resolution=64, theta_max=None):
    '''
    Largest grid angle up to which the certified modulus |f(re^{i theta})|
    stays above min_fraction * f(r).
    '''
    with mpmath.workprec(ev.bits):
        r = mpmath.mpf(r)
        fr = mpmath.re(ev(r).value)
        step = (1 - r) / resolution
        theta_max = mpmath.pi if theta_max is None else mpmath.mpf(theta_max)
        theta = mpmath.mpf(0)
        while theta + step <= theta_max:
            v = ev(r * mpmath.expj(theta + step))
            if abs(v.value) - v.error_radius < min_fraction * fr:
                return theta
            theta += step
        return theta


@dataclass
class PsiSamples:
    r: mpmath.mpf
    thetas: list
    values: list
    moduli: list

    def symmetry_defect(self):
        '''max |psi(theta) + psi(-theta)| over grid pairs'''
        by_theta = dict(zip(self.thetas, self.values))
        defects = [abs(v + by_theta[-t]) for t, v in by_theta.items() if t > 0 and -t in by_theta]
        return max(defects, default=mpmath.mpf(0))


def psi(ev, r, theta_grid):
    '''
    continuous branch of arg f(re^{i theta}) with psi(0) = 0, unwrapped outward
    from 0; each step must turn the phase by less than pi/2
    '''
    with mpmath.workprec(ev.bits):
        r = mpmath.mpf(r)
        thetas = sorted(set(mpmath.mpf(t) for t in theta_grid) | {mpmath.mpf(0)})
        values = {mpmath.mpf(0): mpmath.mpf(0)}
        moduli = {}
        for direction in (1, -1):
            side = [t for t in thetas if t * direction > 0]
            side.sort(key=abs)
            last_theta, last_w, phase = mpmath.mpf(0), None, mpmath.mpf(0)
            for t in [mpmath.mpf(0)] + side:
                v = ev(r * mpmath.expj(t))
                if abs(v.value) <= v.error_radius:
                    raise BranchError(f'|f| interval touches 0 at theta = {mpmath.nstr(t, 10)}')
                moduli[t] = abs(v.value)
                if last_w is not None:
                    step = mpmath.arg(v.value / last_w)
                    if abs(step) >= mpmath.pi / 2:
                        raise BranchError(f'phase step {mpmath.nstr(step, 5)} between theta = {mpmath.nstr(last_theta, 8)} '
                                          f'and {mpmath.nstr(t, 8)} is too large; refine the grid')
                    phase += step
                    values[t] = phase
                last_theta, last_w = t, v.value
        order = [mpmath.mpf(t) for t in theta_grid]
        return PsiSamples(r, order, [values[t] for t in order], [moduli[t] for t in order])


def symmetric_grid(theta_max, points):
    theta_max = mpmath.mpf(theta_max)
    positive = [theta_max * j / points for j in range(1, points + 1)]
    return [-t for t in reversed(positive)] + [mpmath.mpf(0)] + positive


def psi_derivative_check(ev, r, h=None):
    '''
    central difference (psi(h) - psi(-h)) / 2h against A(r) at steps h and h/2;
    the error should shrink like h^2
    '''
    with mpmath.workprec(ev.bits):
        r = mpmath.mpf(r)
        h = (1 - r) / 16 if h is None else mpmath.mpf(h)
        A = A_of_r(ev, r).value
        errors = []
        for step in (h, h / 2):
            samples = psi(ev, r, symmetric_grid(step, 4))
            by_theta = dict(zip(samples.thetas, samples.values))
            derivative = (by_theta[step] - by_theta[-step]) / (2 * step)
            errors.append(abs(derivative - A))
        order = mpmath.log(errors[0] / errors[1], 2) if errors[1] > 0 else mpmath.inf
        return {'r': r, 'A': A, 'h': h, 'errors': errors, 'observed_order': order}


@dataclass
class ArgEstimate:
    r: mpmath.mpf
    theta_max: mpmath.mpf
    C2_fit: mpmath.mpf
    C2_refined: mpmath.mpf
    C2_shrunk: mpmath.mpf
    limit_ratio: mpmath.mpf
    symmetry_defect: mpmath.mpf

    @property
    def stable(self):
        return self.C2_refined <= mpmath.mpf(11) / 10 * self.C2_fit


def _arg_ratio(ev, r, theta_max, points, A):
    samples = psi(ev, r, symmetric_grid(theta_max, points))
    ratios = [abs(v - A * t) * (1 - r) ** 3 / (r * abs(t) ** 3)
              for t, v in zip(samples.thetas, samples.values) if t != 0]
    return max(ratios), samples


def arg_estimate_check(ev, r, theta_max=None, points=None, c2=0.5):
    '''
    max over the grid of |psi(theta) - A(r) theta| (1-r)^3 / (r |theta|^3),
    refitted on a doubled grid and on half the range; the theta -> 0 limit
    |third derivative of psi at 0| / 6 (1-r)^3 / r comes from a finite difference
    '''
    with mpmath.workprec(ev.bits):
        r = mpmath.mpf(r)
        points = points or 32
        if theta_max is None:
            theta_max = theta_safe(ev, r, theta_max=c2 * (1 - r))
        theta_max = mpmath.mpf(theta_max)
        if theta_max <= 0:
            raise BranchError(f'no safe angle around theta = 0 at r = {mpmath.nstr(r, 10)}')
        A = A_of_r(ev, r).value
        C2, samples = _arg_ratio(ev, r, theta_max, points, A)
        C2_refined, _ = _arg_ratio(ev, r, theta_max, 2 * points, A)
        C2_shrunk, _ = _arg_ratio(ev, r, theta_max / 2, points, A)
        h = theta_max / 8
        near = psi(ev, r, symmetric_grid(2 * h, 2))
        by_theta = dict(zip(near.thetas, near.values))
        third = (by_theta[2 * h] - 2 * by_theta[h] + 2 * by_theta[-h] - by_theta[-2 * h]) / (2 * h ** 3)
        limit = abs(third) / 6 * (1 - r) ** 3 / r
        return ArgEstimate(r, theta_max, C2, C2_refined, C2_shrunk, limit, samples.symmetry_defect())


# ---------------------------------------------------------------------------
# modulus envelopes
# ---------------------------------------------------------------------------

@dataclass
class ModulusBounds:
    r: mpmath.mpf
    C1_fit: mpmath.mpf
    c8_fit: mpmath.mpf
    exceeds_at: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.exceeds_at


def modulus_bounds_check(ev, r, theta_grid, near=0.5, band_points=16):
    '''
    C1 = max (1 - |f|/f(r)) (1-r)/|theta| over |theta| <= near (1-r), sampled
    on its own band grid of band_points angles per side, and
    c8 = min (1 - |f|/f(r)) (1-r)^2 / (r min(|theta|, 1-r)^2) over theta_grid;
    any |f(re^{i theta})| certainly above f(r) is recorded as a failure
    '''
    with mpmath.workprec(ev.bits):
        r = mpmath.mpf(r)
        fv = ev(r)
        fr, fr_err = mpmath.re(fv.value), fv.error_radius
        band = near * (1 - r)
        if band_points < 1 or band <= 0:
            raise ValueError(f'C1 needs a non-empty band around theta = 0, got {band_points} points')
        band_grid = symmetric_grid(band, band_points)
        C1, c8 = mpmath.mpf(0), None
        exceeds = []
        drops = {}
        for t in list(theta_grid) + band_grid:
            t = mpmath.mpf(t)
            if t == 0 or t in drops:
                continue
            v = ev(r * mpmath.expj(t))
            m = abs(v.value)
            if m - v.error_radius > fr + fr_err:
                exceeds.append(t)
            drops[t] = 1 - m / fr
        for t in band_grid:
            if t != 0:
                C1 = max(C1, drops[t] * (1 - r) / abs(t))
        for t in theta_grid:
            t = mpmath.mpf(t)
            if t != 0:
                implied = drops[t] * (1 - r) ** 2 / (r * min(abs(t), 1 - r) ** 2)
                c8 = implied if c8 is None else min(c8, implied)
        return ModulusBounds(r, C1, c8, sorted(exceeds))


def full_circle_grid(points):
    return [2 * mpmath.pi * j / points - mpmath.pi for j in range(points)]


def envelope_checks(ev, r, config, label=''):
    '''
    A(r) sandwich, the argument fit C2 and the modulus fits C1, c8 at r. The
    sandwich and |f(re^{i theta})| <= f(r) are certified statements; the fits
    are reported with their stability under a doubled grid.
    '''
    prefix = f'{label}/' if label else ''
    report = VerificationReport('envelopes')
    with mpmath.workprec(ev.bits):
        a = A_of_r(ev, r)
        C = ev.cert.C
        report.add(f'{prefix}A-sandwich', 'pass' if a.sandwich_ok else 'fail',
                   envelope=f'1/C <= A(r)(1-r)/r <= 2C with C={C}', A=a.value, error=a.error,
                   normalised=a.sandwich)
        arg = arg_estimate_check(ev, r, c2=config.c2)
        report.add(f'{prefix}arg-estimate', 'reported', envelope='|psi(theta) - A(r) theta| <= C2 r |theta|^3/(1-r)^3',
                   C2=arg.C2_fit, C2_refined=arg.C2_refined, C2_shrunk=arg.C2_shrunk, limit=arg.limit_ratio,
                   theta_max=arg.theta_max, symmetry_defect=arg.symmetry_defect, stable=arg.stable,
                   notes='' if arg.stable else 'C2 grows by more than 10% on the doubled grid')
        coarse = modulus_bounds_check(ev, r, full_circle_grid(4 * config.grid_points))
        fine = modulus_bounds_check(ev, r, full_circle_grid(8 * config.grid_points),
                                    band_points=32)
        exceeds = sorted(set(coarse.exceeds_at) | set(fine.exceeds_at))
        report.add(f'{prefix}modulus/max-on-axis', 'pass' if not exceeds else 'fail',
                   envelope='|f(re^{i theta})| <= f(r)', exceeds_at=exceeds)
        stable = fine.C1_fit <= mpmath.mpf(11) / 10 * coarse.C1_fit and \
            coarse.c8_fit <= mpmath.mpf(11) / 10 * fine.c8_fit
        report.add(f'{prefix}modulus/fits', 'reported',
                   envelope='|f| >= f(r)(1 - C1|theta|/(1-r)) near 0; '
                            '|f| <= f(r)(1 - c8 r min(|theta|,1-r)^2/(1-r)^2)',
                   C1=coarse.C1_fit, C1_refined=fine.C1_fit, c8=coarse.c8_fit, c8_refined=fine.c8_fit,
                   stable=stable, notes='' if stable else 'fits move by more than 10% on the doubled grid')
    return report, a, arg, coarse


# ---------------------------------------------------------------------------
# the Cauchy integral
# ---------------------------------------------------------------------------

@dataclass
class ArcSplit:
    theta0: mpmath.mpf
    major_value: mpmath.mpc
    minor_value: mpmath.mpc
    minor_bound: mpmath.mpf
    total: mpmath.mpf
    error: mpmath.mpf
    imag: mpmath.mpf
    r0: mpmath.mpf
    alpha: mpmath.mpf
    weight: int = 2
    c3: mpmath.mpf = None
    c8: mpmath.mpf = None
    panels: int = 0

    @property
    def positive(self):
        return self.total - self.error > 0

    @property
    def major_minor_ratio(self):
        if self.minor_bound == 0:
            return mpmath.inf
        return abs(mpmath.re(self.major_value)) / self.minor_bound


class _Integrand:
    '''theta^weight (f(r0 e^{i theta}) / f(r0))^k e^{-i alpha theta} and its error bound'''

    def __init__(self, ev, r0, k, alpha, weight):
        self.ev = ev
        self.r0 = r0
        self.k = k
        self.alpha = alpha
        self.weight = weight
        self.f0 = mpmath.re(ev(r0).value)
        self.max_error = mpmath.mpf(0)

    def __call__(self, theta):
        v = self.ev(self.r0 * mpmath.expj(theta)).scale(1 / self.f0).pow(self.k)
        w = theta ** self.weight
        self.max_error = max(self.max_error, abs(w) * v.error_radius)
        return w * v.value * mpmath.expj(-self.alpha * theta)


def _adaptive(g, a, b, tol, rel_tol, degree, budget):
    '''bisect [a, b] until whole-panel and split estimates agree'''
    whole = mpmath.quad(g, [a, b], method='gauss-legendre', maxdegree=degree)
    stack = [(a, b, whole, tol)]
    total, error = mpmath.mpc(0), mpmath.mpf(0)
    while stack:
        a, b, whole, tol = stack.pop()
        m = (a + b) / 2
        left = mpmath.quad(g, [a, m], method='gauss-legendre', maxdegree=degree)
        right = mpmath.quad(g, [m, b], method='gauss-legendre', maxdegree=degree)
        estimate = abs(left + right - whole)
        if estimate <= tol or estimate <= rel_tol * abs(left + right):
            total += left + right
            error += estimate
            continue
        budget[0] -= 1
        if budget[0] < 0:
            raise QuadratureError(f'subdivision limit reached on [{mpmath.nstr(a, 8)}, {mpmath.nstr(b, 8)}]')
        stack.append((a, m, left, tol / 2))
        stack.append((m, b, right, tol / 2))
    return total, error


def _integrate(ev, r0, k, alpha, theta0, config, weight=2, symmetric=False):
    g = _Integrand(ev, r0, k, alpha, weight)
    budget = [config.max_subdivisions]
    tol = mpmath.mpf(config.abs_tolerance) / 4
    if symmetric:
        major, e1 = _adaptive(g, mpmath.mpf(0), theta0, tol, config.rel_tolerance, config.quad_degree, budget)
        minor, e2 = _adaptive(g, theta0, mpmath.pi, tol, config.rel_tolerance, config.quad_degree, budget)
        major, minor = 2 * mpmath.re(major), 2 * mpmath.re(minor)
        e1, e2 = 2 * e1, 2 * e2
    else:
        m1, e1a = _adaptive(g, -theta0, mpmath.mpf(0), tol, config.rel_tolerance, config.quad_degree, budget)
        m2, e1b = _adaptive(g, mpmath.mpf(0), theta0, tol, config.rel_tolerance, config.quad_degree, budget)
        n1, e2a = _adaptive(g, -mpmath.pi, -theta0, tol, config.rel_tolerance, config.quad_degree, budget)
        n2, e2b = _adaptive(g, theta0, mpmath.pi, tol, config.rel_tolerance, config.quad_degree, budget)
        major, minor = m1 + m2, n1 + n2
        e1, e2 = e1a + e1b, e2a + e2b
    evaluation_error = 2 * mpmath.pi * g.max_error
    panels = config.max_subdivisions - budget[0]
    return mpmath.mpc(major), mpmath.mpc(minor), e1 + e2 + evaluation_error, panels


def choose_c3(ev, r0, config):
    '''c3 = min(c2, pi / (8 C2)) with C2 fitted at r0, unless configured'''
    if config.c3 is not None:
        return mpmath.mpf(config.c3)
    C2 = arg_estimate_check(ev, r0, c2=config.c2, points=16).C2_fit
    if C2 == 0:
        return mpmath.mpf(config.c2)
    return min(mpmath.mpf(config.c2), mpmath.pi / (8 * C2))


def concavity_integral(ev, k, n, alpha, config, saddle=None, weight=2, symmetric=False, c3=None, c8=None):
    '''
    int_{-pi}^{pi} theta^weight (f(r0 e^{i theta}) / f(r0))^k e^{-i alpha theta} d theta,
    split at theta0 = c3 (1-r0) (k r0)^(-1/3), with the minor arc bounded by
    pi^3 (1 - c8 r0 min(theta0, 1-r0)^2 / (1-r0)^2)^k
    '''
    with mpmath.workprec(ev.bits):
        alpha = mpmath.mpf(alpha)
        if not n - 1 <= alpha <= n + 1:
            raise ValueError(f'alpha must lie in [n-1, n+1], got {alpha}')
        saddle = saddle or solve_r0(ev, n, k, tol=config.solver_tolerance, delta=config.delta)
        r0 = saddle.r0
        c3 = choose_c3(ev, r0, config) if c3 is None else mpmath.mpf(c3)
        theta0 = min(c3 * (1 - r0) * (k * r0) ** (-mpmath.mpf(1) / 3), mpmath.pi / 2)
        if c8 is None:
            c8 = modulus_bounds_check(ev, r0, full_circle_grid(4 * config.grid_points)).c8_fit
        major, minor, error, panels = _integrate(ev, r0, k, alpha, theta0, config, weight, symmetric)
        total = major + minor
        imag = abs(mpmath.im(total))
        if imag > config.abs_tolerance:
            raise PrecisionError(f'imaginary part {mpmath.nstr(imag, 5)} of a real integral exceeds the tolerance')
        envelope = 1 - c8 * r0 * min(theta0, 1 - r0) ** 2 / (1 - r0) ** 2
        minor_bound = mpmath.pi ** 3 * max(envelope, mpmath.mpf(0)) ** k
        return ArcSplit(theta0, major, minor, minor_bound, mpmath.re(total), error, imag, r0, alpha,
                        weight, c3, c8, panels)


def coefficient_from_integral(arc, ev, k, n):
    '''a_{n,k} = F(n) f(r0)^k r0^(-n) / (2 pi), for F the unweighted integral at alpha = n'''
    with mpmath.workprec(ev.bits):
        f0 = mpmath.re(ev(arc.r0).value)
        return arc.total * f0 ** k * arc.r0 ** (-n) / (2 * mpmath.pi)


def f_second_deriv_target(ev, k, n, config, exact_coefficient=None):
    '''
    F(alpha) > 0 and the theta^2-weighted integral > 0 at alpha = n-1, n, n+1;
    when the exact coefficient of z^n in f^k is given, F(n) is also turned
    back into it
    '''
    report = VerificationReport('saddle')
    with mpmath.workprec(ev.bits):
        saddle = solve_r0(ev, n, k, tol=config.solver_tolerance, delta=config.delta)
        c3 = choose_c3(ev, saddle.r0, config)
        c8 = modulus_bounds_check(ev, saddle.r0, full_circle_grid(4 * config.grid_points)).c8_fit
        report.add(f'saddle/k={k}/n={n}/r0', 'pass' if saddle.residual <= config.solver_tolerance else 'fail',
                   r0=saddle.r0, residual=saddle.residual, C10_implied=saddle.C10_implied,
                   c6_implied=saddle.c6_implied, monotone=saddle.monotone)
        arcs = {}
        for alpha in (n - 1, n, n + 1):
            for weight in (0, 2):
                arc = concavity_integral(ev, k, n, alpha, config, saddle=saddle, weight=weight, c3=c3, c8=c8)
                arcs[(alpha, weight)] = arc
                name = 'F' if weight == 0 else 'F2'
                report.add(f'saddle/k={k}/n={n}/{name}(alpha={alpha})', 'reported',
                           envelope='> 0', total=arc.total, error=arc.error, positive=arc.positive,
                           theta0=arc.theta0, major=mpmath.re(arc.major_value), minor=mpmath.re(arc.minor_value),
                           minor_bound=arc.minor_bound, imag=arc.imag, panels=arc.panels)
        if exact_coefficient is not None:
            approx = coefficient_from_integral(arcs[(n, 0)], ev, k, n)
            exact = mpmath.mpf(exact_coefficient.numerator) / exact_coefficient.denominator
            relative = abs(approx - exact) / exact
            report.add(f'saddle/k={k}/n={n}/coefficient', 'reported', exact=exact_coefficient,
                       from_integral=approx, relative_error=relative)
    return report, saddle, arcs


# ---------------------------------------------------------------------------
# outputs
# ---------------------------------------------------------------------------

def theta_sweep_frame(ev, r, thetas):
    '''(theta, |f|, psi) for offline plotting'''
    samples = psi(ev, r, thetas)
    return pd.DataFrame({
        'theta': [float(t) for t in samples.thetas],
        'modulus': [float(m) for m in samples.moduli],
        'psi': [float(v) for v in samples.values],
    })


def plot_theta_sweep(frame, path):
    fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(6, 6))
    ax1.plot(frame['theta'], frame['modulus'])
    ax1.set_ylabel('|f(re^{i theta})|')
    ax2.plot(frame['theta'], frame['psi'])
    ax2.set_ylabel('psi_r(theta)')
    ax2.set_xlabel('theta')
    fig.savefig(path)
    plt.close(fig)


def write_manifest(path, series_id, config, saddle, arcs, fits=None):
    manifest = {
        'series_id': series_id,
        'k': saddle.k,
        'n': saddle.n,
        'precision_bits': config.precision_bits,
        'N': config.N,
        'r0': saddle.r0,
        'theta0': next(iter(arcs.values())).theta0 if arcs else None,
        'c3': next(iter(arcs.values())).c3 if arcs else None,
        'c8': next(iter(arcs.values())).c8 if arcs else None,
        'F_values': {str(a): arc.total for (a, w), arc in arcs.items() if w == 0},
        'integral_values': {str(a): arc.total for (a, w), arc in arcs.items() if w == 2},
        'margins': {f'{a}/{w}': arc.total - arc.error for (a, w), arc in arcs.items()},
        'config': asdict(config),
    }
    manifest.update(fits or {})
    with open(path, 'w') as f:
        json.dump(to_text(manifest), f, sort_keys=True, indent=2)
