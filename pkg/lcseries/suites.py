'''
The run_* pipelines behind verify.py. Each one takes the parsed argparse
namespace, logs to <out>/<command>.log, echoes its configuration to
<out>/args.yaml and writes a JSON VerificationReport.
'''
import glob
import math
import os
import time
from argparse import Namespace
from fractions import Fraction

import mpmath

from .cache import list_cache, load_or_build, remove_cache
from .concavity import breakpoint_curve, ratio_samples, row_reports
from .decomposition import (fit_constants, fits_report, partition_sum_identity, read_residuals,
                            residual_at_least_one_zero, residual_differences, residual_one_zero,
                            residual_second_order_aux, second_diff_identity, split, window_check,
                            write_residuals)
from .errors import CertificateError, InsufficientDataError, UsageError
from .helpers import binomial, exact_rational, makedir, row_checksum, write_args
from .log import create_logger
from .nekrasov_okounkov import export_qtable, identity_spotcheck, q_bruteforce, q_recurrence, table_invariants, \
    unimodality_scan
from .report import VerificationReport, read_report
from .saddle import (SaddleConfig, derivative_bounds_sweep, envelope_checks, f_second_deriv_target, make_evaluator,
                     plot_theta_sweep, psi_derivative_check, symmetric_grid, theta_sweep_frame, write_manifest)
from .sequences import (SeriesSpec, certify_growth, check_average_bound, eta0, generate, growth_base_sequence,
                        parse_series_id, sigma_partial_sum_bounds)
from .series import series_pow

SUITES = ('prefix', 'breakpoints', 'decomposition', 'saddle', 'nk', 'growth')
SIGMA_KINDS = ('sigma', 'sigma-shifted')


def _start(args, command):
    makedir(args.out)
    log, logclose = create_logger(log_filename=os.path.join(args.out, f'{command}.log'))
    write_args(args, os.path.join(args.out, 'args.yaml'))
    return log, logclose


def _finish(report, args, name, started, log):
    report.config = {k: v for k, v in sorted(vars(args).items()) if not callable(v)}
    report.timing['total'] = time.time() - started
    path = os.path.join(args.out, f'{name}.json')
    report.write(path)
    log(report.summary())
    log(f'report written to {path}')
    return report


def _max_bytes(args):
    return None if args.max_memory is None else int(args.max_memory * 2 ** 20)


def validate(args):
    '''argument checks shared by every command'''
    if args.K < 1:
        raise UsageError(f'K must be at least 1, got {args.K}')
    if args.N < 1:
        raise UsageError(f'N must be at least 1, got {args.N}')
    if args.bits < 64:
        raise UsageError(f'--bits must be at least 64, got {args.bits}')
    if args.jobs < 1:
        raise UsageError(f'--jobs must be at least 1, got {args.jobs}')
    return parse_series_id(args.series)


def certificate_constants(spec, C=None, alpha=None):
    '''(C, alpha) for the growth certificate of a series, defaulting per series kind'''
    if C is None:
        if spec.kind == 'constant' and spec.C > 1:
            C = spec.C
        elif spec.kind == 'geometric' or spec.kind == 'constant':
            C = Fraction(2)
        else:
            C = Fraction(17, 10)
    if alpha is None:
        alpha = Fraction(1, 2) if spec.kind in SIGMA_KINDS else Fraction(0)
    return exact_rational(C, 'C'), exact_rational(alpha, 'alpha')


def sample_points(N):
    '''1, 2, 4, ... below N'''
    points, n = [], 1
    while n <= N - 1:
        points.append(n)
        n *= 2
    return points


def parse_saddle_points(items):
    points = []
    for item in items:
        k, _, n = item.partition(':')
        try:
            points.append((int(k), int(n)))
        except ValueError:
            raise UsageError(f'saddle point {item!r} must look like K:N, e.g. 10:50')
    return points


def _table(spec, args, log):
    table, hit = load_or_build(spec, args.K, args.N, cache_dir=args.cache_dir, kernel=args.kernel,
                               max_bytes=_max_bytes(args), log=log)
    log(f'table {spec.series_id} K={args.K} N={args.N} ({"cached" if hit else "computed"})')
    return table, hit


# ---------------------------------------------------------------------------
# gen-table
# ---------------------------------------------------------------------------

def run_gen_table(args: Namespace):
    spec = validate(args)
    log, logclose = _start(args, 'gen-table')
    started = time.time()
    table, hit = _table(spec, args, log)
    report = VerificationReport('gen-table')
    for k in range(1, table.K + 1):
        checksum = row_checksum(table.row(k))
        log(f'\trow {k}: {checksum}')
        report.add(f'gen-table/row={k}', 'reported', checksum=checksum, cache_hit=hit)
    _finish(report, args, 'gen-table', started, log)
    logclose()
    return report


# ---------------------------------------------------------------------------
# check suites
# ---------------------------------------------------------------------------

def _closed_form(spec, n, k):
    '''coefficient of z^n in f^k for the geometric and constant series'''
    if spec.kind == 'geometric':
        return spec.C ** n * binomial(n + k - 1, k - 1)
    return spec.C ** k * binomial(n + k - 1, k - 1)


def check_prefix(args, spec, log=print):
    '''
    Log-concave prefix of every row f^k. The divisor series starts with a zero
    and is scanned through its shift g = f/z, since f^k = z^k g^k.
    '''
    shifted = spec.kind == 'sigma'
    work = SeriesSpec.sigma_shifted() if shifted else spec
    table, _ = _table(work, args, log)
    exact = spec.kind in ('geometric', 'constant')
    report = VerificationReport('prefix')
    reports = row_reports(table, args.jobs)
    for k, r in sorted(reports.items()):
        notes = f'scanned g^{k} with g = f/z; indices in f^{k} are shifted by {k}' if shifted else ''
        if not exact and not r.log_concave:
            notes = (notes + '; ' if notes else '') + f'log-concavity violated at n={r.first_violation}'
        window = min(table.N, math.ceil(eta0() ** k) + k)
        report.add(f'prefix/k={k}', ('pass' if r.log_concave else 'fail') if exact else 'reported', notes=notes,
                   growth_window=window, **r.to_dict(ratio_samples(table.row(k).coeffs, sample_points(table.N), k)))
        log(f'\tk={k}: prefix {r.prefix_length}' + ('' if r.log_concave else f', violation at {r.first_violation}'))
    if exact:
        bad = [(n, k) for k in range(1, table.K + 1) for n in range(table.N + 1)
               if table.coefficient(n, k) != _closed_form(spec, n, k)]
        report.add('prefix/closed-form', 'pass' if not bad else 'fail', first_mismatch=bad[0] if bad else None,
                   cells=table.K * (table.N + 1))
    return report


def check_breakpoints(args, spec, log=print):
    work = SeriesSpec.sigma_shifted() if spec.kind == 'sigma' else spec
    table, _ = _table(work, args, log)
    curve = breakpoint_curve(table, args.jobs)
    frame = curve.to_frame()
    path = os.path.join(args.out, 'breakpoints.csv')
    frame.to_csv(path, index=False)
    log(f'breakpoint curve written to {path}')
    report = VerificationReport('breakpoints')
    for k in sorted(curve.entries):
        report.add(f'breakpoints/k={k}', 'reported', prefix_length=curve.entries[k], censored=k in curve.censored)
    report.add('breakpoints/fit', 'reported', fits=curve.fits, fit_available=curve.fit_available,
               notes='' if curve.fit_available else 'fewer than two uncensored rows')
    return report


def check_decomposition(args, spec, log=print):
    '''exact identities on the (k0, k1) split, then the residuals and their fitted constants'''
    if not spec.one_lower_bounded:
        raise UsageError(f'{spec.series_id} is not 1-lower bounded; use sigma-shifted instead of sigma')
    table, _ = _table(spec, args, log)
    report = VerificationReport('decomposition')
    C, alpha = certificate_constants(spec, args.C, args.alpha)
    try:
        cert = certify_growth(table.base, C, alpha)
    except CertificateError as e:
        report.add('decomposition/certificate', 'fail', notes=str(e), C=C, alpha=alpha,
                   first_offending=e.first_offending)
        return report
    report.add('decomposition/certificate', 'reported', **cert.to_dict())
    sp = split(table.base, args.kernel)

    log('identities')
    identity_N = min(table.N, args.identity_n)
    for k in range(1, min(table.K, 8) + 1):
        for n in range(identity_N + 1):
            report.extend(partition_sum_identity(table, sp, k, n, brute_force=n <= args.brute_force_n))
        for k0 in range(2, k + 1):
            for n in range(-1, identity_N):
                report.extend(second_diff_identity(sp, k0, k - k0, n))
    # collapse the per-cell passes into one record per identity family
    failures = report.failures
    passed = [r for r in report.records if r.status == 'pass']
    report.records = [r for r in report.records if r.status != 'pass']
    report.add('decomposition/identities', 'pass' if not failures else 'fail', checked=len(passed) + len(failures),
               n_max=identity_N, k_max=min(table.K, 8))

    log('residuals')
    ks = [k for k in args.residual_ks if 2 <= k <= table.K]
    step = max(1, (table.N - 1) // args.residual_samples)
    ns = list(range(1, table.N, step))
    records = []
    for k in ks:
        for n in ns:
            records.append(residual_one_zero(sp, k, n, cert))
            if k >= 3:
                records.append(residual_at_least_one_zero(sp, 2, k - 2, n, cert))
                records.append(residual_second_order_aux(sp, 3, k - 3, n, cert))
                records.extend(residual_differences(table, k, n, cert))
    if k_two := [r for r in records if r.k == 2]:
        report.add('residual/one-zero/k=2', 'pass' if all(r.within_envelope for r in k_two) else 'fail',
                   envelope='0 <= R <= D/((C-1)(n+1)^(1-alpha))', checked=len(k_two))
    negative = [r for r in records if r.family in ('one-zero', 'at-least-one-zero') and r.residual < 0]
    report.add('residual/non-negative', 'reported', envelope='R >= 0', checked=len(records),
               negative=len(negative), first_negative=(negative[0].k0, negative[0].k1, negative[0].n) if negative else None,
               notes='negative residual found' if negative else '')
    path = os.path.join(args.out, 'residuals.csv')
    write_residuals(records, path)
    log(f'{len(records)} residuals written to {path}')
    if records:
        report.extend(fits_report(fit_constants(records), suite='decomposition'))
        report.extend(window_check(records, cert))
    return report


def check_saddle(args, spec, log=print):
    work = SeriesSpec.sigma_shifted() if spec.kind == 'sigma' else spec
    f = generate(work, args.N)
    C, alpha = certificate_constants(work, args.C, args.alpha)
    cert = certify_growth(f, C, alpha)
    report = VerificationReport('saddle')
    for k, n in parse_saddle_points(args.saddle_points):
        config = SaddleConfig(k=k, n=n, precision_bits=args.bits, N=args.N, max_subdivisions=args.max_subdivisions,
                              abs_tolerance=args.tolerance)
        ev = make_evaluator(f, cert, config)
        exact = None
        if n <= args.exact_coefficient_n and n <= f.N:
            exact = series_pow(f, k, n, kernel=args.kernel)[n]
        log(f'saddle k={k} n={n}')
        sub, saddle, arcs = f_second_deriv_target(ev, k, n, config, exact_coefficient=exact)
        report.extend(sub)
        check = psi_derivative_check(ev, saddle.r0)
        report.add(f'saddle/k={k}/n={n}/psi-derivative', 'reported', envelope="psi'(0) = A(r)", **check)
        report.extend(derivative_bounds_sweep(ev, [saddle.r0], label=f"saddle/k={k}/n={n}"))
        envelopes, _, arg, modulus = envelope_checks(ev, saddle.r0, config, label=f'saddle/k={k}/n={n}')
        report.extend(envelopes)
        frame = theta_sweep_frame(ev, saddle.r0, symmetric_grid(min(mpmath.pi, 8 * arcs[(n, 2)].theta0),
                                                                config.grid_points))
        stem = os.path.join(args.out, f'saddle-{k}-{n}')
        frame.to_csv(stem + '-theta.csv', index=False)
        if args.plots:
            plot_theta_sweep(frame, stem + '-theta.png')
        fits = {'C1': modulus.C1_fit, 'c8_fit': modulus.c8_fit, 'C2': arg.C2_fit, 'C2_refined': arg.C2_refined,
                'arg_stable': arg.stable}
        write_manifest(stem + '.json', work.series_id, config, saddle, arcs, fits=fits)
    return report


def check_nk(args, spec, log=print):
    report = VerificationReport('nk')
    N = args.nk_N
    log(f'Q table up to N={N}')
    table = q_recurrence(N, max_bytes=_max_bytes(args), log=log)
    export_qtable(table, os.path.join(args.out, 'qtable.json'))
    brute_N = min(N, args.brute_force_n)
    mismatch = next((n for n in range(brute_N + 1) if q_bruteforce(n) != table[n]), None)
    report.add('nk/recurrence=bruteforce', 'pass' if mismatch is None else 'fail', n_max=brute_N,
               first_mismatch=mismatch)
    report.extend(table_invariants(table))
    z_values = [exact_rational(z, 'z') for z in args.z_values]
    report.extend(identity_spotcheck(min(N, args.identity_n), z_values, table=table))
    unimodality, _ = unimodality_scan(table, jobs=args.jobs)
    report.extend(unimodality)
    return report


def check_growth(args, spec, log=print):
    report = VerificationReport('growth')
    f = generate(spec, args.N)
    C, _ = certificate_constants(spec, args.C, args.alpha)
    report.extend(check_average_bound(f, C, bits=max(args.bits, 256)))
    alphas = [args.alpha] if args.alpha is not None else [Fraction(1, 10), Fraction(1, 5), Fraction(1, 2)]
    for alpha in alphas:
        try:
            cert = certify_growth(f, C, alpha)
        except CertificateError as e:
            report.add(f'growth/certificate/alpha={alpha}', 'fail', notes=str(e), first_offending=e.first_offending)
            continue
        report.add(f'growth/certificate/alpha={alpha}', 'reported', **cert.to_dict(),
                   notes='' if cert.stable else 'D grows with the range')
    if spec.kind in SIGMA_KINDS:
        log('sigma partial sums')
        report.extend(sigma_partial_sum_bounds(args.N))
        limit = eta0()
        points = growth_base_sequence()
        bases = [b for _, _, b in points]
        increasing = all(a < b for a, b in zip(bases, bases[1:]))
        report.add('growth/eta0', 'pass' if mpmath.mpf('1.59') < limit < mpmath.mpf('1.60') else 'fail',
                   envelope='1.59 < eta0 < 1.60', eta0=limit)
        report.add('growth/eta0-convergence', 'pass' if increasing and bases[-1] < limit else 'fail',
                   envelope='growth bases increase towards eta0', points=[list(p) for p in points], eta0=limit)
    return report


CHECKS = {
    'prefix': check_prefix,
    'breakpoints': check_breakpoints,
    'decomposition': check_decomposition,
    'saddle': check_saddle,
    'nk': check_nk,
    'growth': check_growth,
}


def run_check(args: Namespace):
    if args.suite not in CHECKS:
        raise UsageError(f'unknown suite {args.suite!r}, expected one of {", ".join(SUITES)}')
    spec = validate(args)
    log, logclose = _start(args, f'check-{args.suite}')
    started = time.time()
    log(f'suite {args.suite} on {spec.series_id}')
    report = CHECKS[args.suite](args, spec, log=log)
    _finish(report, args, f'check-{args.suite}', started, log)
    logclose()
    return report


# ---------------------------------------------------------------------------
# constants and cache maintenance
# ---------------------------------------------------------------------------

def run_constants(args: Namespace):
    paths = args.residuals or sorted(glob.glob(os.path.join(args.out, 'residuals*.csv')))
    manifests = sorted(glob.glob(os.path.join(args.out, 'saddle-*.json')))
    if not paths and not manifests:
        raise InsufficientDataError(f'no residual dumps or saddle manifests in {args.out}; '
                                    'run "check decomposition" and "check saddle" first')
    log, logclose = _start(args, 'constants')
    started = time.time()
    report = VerificationReport('constants')
    records = [r for path in paths for r in read_residuals(path)]
    if records:
        log(f'{len(records)} residual records from {len(paths)} files')
        report.extend(fits_report(fit_constants(records)))
    for path in manifests:
        manifest = read_report(path)
        report.add(f'saddle-fit/k={manifest["k"]}/n={manifest["n"]}', 'reported', r0=manifest['r0'],
                   theta0=manifest['theta0'], c3=manifest.get('c3'), c8=manifest.get('c8'), C1=manifest.get('C1'),
                   C2=manifest.get('C2'), C2_refined=manifest.get('C2_refined'),
                   arg_stable=manifest.get('arg_stable'))
    _finish(report, args, 'constants', started, log)
    logclose()
    return report


def run_cache(args: Namespace):
    if args.cache_command == 'ls':
        entries = list_cache(args.cache_dir)
        for e in entries:
            print(f'{e["file"]}\t{e["series_id"]}\tK={e["K"]}\tN={e["N"]}\t{e["bytes"]} bytes')
        if not entries:
            print(f'cache {args.cache_dir} is empty')
        return entries
    if args.cache_command == 'rm':
        removed = remove_cache(args.cache_dir, series_id=args.rm_series)
        print(f'removed {removed} cache entries')
        return removed
    raise UsageError('cache needs a sub-command: ls or rm')
