import argparse
import json
import sys

from lcseries import __version__
from lcseries.errors import InsufficientDataError, UsageError
from lcseries.series import KERNELS
from lcseries.suites import SUITES, run_cache, run_check, run_constants, run_gen_table


def formatter(prog):
    return argparse.HelpFormatter(prog, max_help_position=42)


# Options shared by every command
common = argparse.ArgumentParser(add_help=False)
common.add_argument('--config', type=str, default=None, help='JSON file whose keys become defaults; flags win (default: %(default)s)')
common.add_argument('--series', type=str, default='sigma-shifted', help='series id: geometric[:C], constant:C, sigma-shifted, sigma or file:PATH (default: %(default)s)')
common.add_argument('-K', type=int, default=12, help='largest power k of the table (default: %(default)s)')
common.add_argument('-N', type=int, default=2000, help='truncation order of the series (default: %(default)s)')
common.add_argument('--bits', type=int, default=128, help='working precision in bits for real evaluations (default: %(default)s)')
common.add_argument('--cache-dir', dest='cache_dir', type=str, default='cache', help='directory of the power-table cache (default: %(default)s)')
common.add_argument('--out', '-o', type=str, default='results', help='output path for reports, logs and dumps (default: %(default)s)')
common.add_argument('--jobs', type=int, default=1, help='number of worker processes for per-row scans (default: %(default)s)')
common.add_argument('--tolerance', type=float, default=1e-10, help='absolute quadrature tolerance (default: %(default)s)')
common.add_argument('--kernel', type=str, default='schoolbook', choices=KERNELS, help='multiplication kernel for exact tables (default: %(default)s)')
common.add_argument('--max-memory', dest='max_memory', type=float, default=2048, help='memory budget in MiB for tables (default: %(default)s)')
common.add_argument('--C', dest='C', type=str, default=None, help='growth constant C of the certificate, e.g. 17/10 (default: per series)')
common.add_argument('--alpha', type=str, default=None, help='growth exponent alpha of the certificate, e.g. 1/2 (default: per series)')

parser = argparse.ArgumentParser(description='Verify log-concavity of powers of power series', formatter_class=formatter)
parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
subparsers = parser.add_subparsers(dest='command')


# Table generation
gen_parser = subparsers.add_parser('gen-table', parents=[common], formatter_class=formatter, help='compute and cache the table of powers f^1..f^K')
gen_parser.set_defaults(func=run_gen_table)


# Verification suites
check_parser = subparsers.add_parser('check', parents=[common], formatter_class=formatter, help='run a verification suite')
check_parser.add_argument('suite', type=str, choices=SUITES, help='suite to run')
check_parser.add_argument('--identity-n', dest='identity_n', type=int, default=60, help='largest n of the exact identity checks (default: %(default)s)')
check_parser.add_argument('--brute-force-n', dest='brute_force_n', type=int, default=12, help='largest n re-checked by enumeration (default: %(default)s)')
check_parser.add_argument('--residual-ks', dest='residual_ks', type=int, nargs='+', default=[3, 5, 8], help='powers k for the residual measurements (default: %(default)s)')
check_parser.add_argument('--residual-samples', dest='residual_samples', type=int, default=200, help='number of n values per residual family (default: %(default)s)')
check_parser.add_argument('--saddle-points', dest='saddle_points', type=str, nargs='+', default=['10:50', '20:200', '40:1000'], help='(k, n) pairs given as K:N (default: %(default)s)')
check_parser.add_argument('--max-subdivisions', dest='max_subdivisions', type=int, default=200, help='quadrature subdivision limit (default: %(default)s)')
check_parser.add_argument('--exact-coefficient-n', dest='exact_coefficient_n', type=int, default=200, help='largest n whose exact coefficient is compared with the integral (default: %(default)s)')
check_parser.add_argument('--plots', action='store_true', help='also save PNG plots of the theta sweeps')
check_parser.add_argument('--nk-N', dest='nk_N', type=int, default=100, help='largest n of the Q_n table (default: %(default)s)')
check_parser.add_argument('--z-values', dest='z_values', type=str, nargs='+', default=['0', '1', '-1'], help='rational z for the product identity check (default: %(default)s)')
check_parser.set_defaults(func=run_check)


# Fitted constants
constants_parser = subparsers.add_parser('constants', parents=[common], formatter_class=formatter, help='fit residual and saddle constants from earlier runs')
constants_parser.add_argument('--residuals', type=str, nargs='+', default=None, help='residual CSV dumps (default: <out>/residuals*.csv)')
constants_parser.set_defaults(func=run_constants)


# Cache maintenance
cache_parser = subparsers.add_parser('cache', parents=[common], formatter_class=formatter, help='list or remove cached tables')
cache_parser.add_argument('cache_command', type=str, choices=['ls', 'rm'], help='action on the cache')
cache_parser.add_argument('--rm-series', dest='rm_series', type=str, default=None, help='only remove entries of this series id (default: all)')
cache_parser.set_defaults(func=run_cache)


def apply_config(argv):
    '''load --config into the parser defaults so explicit flags still win'''
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument('--config', type=str, default=None)
    known, _ = pre.parse_known_args(argv)
    if known.config is None:
        return
    with open(known.config) as f:
        defaults = {k.replace('-', '_'): v for k, v in json.load(f).items()}
    for p in (parser, gen_parser, check_parser, constants_parser, cache_parser):
        p.set_defaults(**defaults)


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    apply_config(argv)
    args = parser.parse_args(argv)
    if 'func' not in args:
        parser.error('specify a command: gen-table, check, constants or cache')
    try:
        result = args.func(args)
    except (UsageError, InsufficientDataError) as e:
        parser.error(str(e))
    if hasattr(result, 'ok'):
        return 0 if result.ok else 1
    return 0


if __name__ == '__main__':
    sys.exit(main())
