'''Command line behaviour of verify.py, run as a subprocess'''
import json
import subprocess
import sys

import pytest


@pytest.fixture
def run(repo_root, tmp_path):
    def _run(*argv, out='out'):
        extra = ['--out', str(tmp_path / out), '--cache-dir', str(tmp_path / 'cache')] if argv and argv[0] != '--help' else []
        return subprocess.run([sys.executable, 'verify.py', *argv, *extra], cwd=repo_root, capture_output=True,
                              text=True, timeout=600)
    return _run


def test_help(run):
    result = run('--help')
    assert result.returncode == 0
    assert 'usage:' in result.stdout.lower()
    for command in ('gen-table', 'check', 'constants', 'cache'):
        assert command in result.stdout


def test_prefix_on_geometric_series(run, tmp_path):
    result = run('check', 'prefix', '--series', 'geometric', '-K', '5', '-N', '30')
    assert result.returncode == 0, result.stderr
    data = json.loads((tmp_path / 'out' / 'check-prefix.json').read_text())
    assert data['suite'] == 'prefix'
    assert {r['status'] for r in data['records']} == {'pass'}
    assert len(data['records']) == 6
    assert (tmp_path / 'out' / 'check-prefix.log').exists()


def test_invalid_arguments(run):
    assert run('gen-table', '-K', '0').returncode == 2
    assert run('check', 'nonsense').returncode == 2
    assert run('check', 'prefix', '--series', 'nope').returncode == 2
    assert run('check', 'prefix', '--bits', '32').returncode == 2


def test_second_table_build_hits_the_cache(run):
    first = run('gen-table', '--series', 'constant:2', '-K', '3', '-N', '20')
    assert first.returncode == 0, first.stderr
    assert 'cache hit' not in first.stdout
    second = run('gen-table', '--series', 'constant:2', '-K', '3', '-N', '20')
    assert second.returncode == 0
    assert 'cache hit' in second.stdout
    listing = run('cache', 'ls')
    assert 'constant:2' in listing.stdout


def test_nk_suite(run, tmp_path):
    result = run('check', 'nk', '--nk-N', '12', '--brute-force-n', '6', '--identity-n', '12')
    assert result.returncode == 0, result.stderr
    data = json.loads((tmp_path / 'out' / 'check-nk.json').read_text())
    statuses = {r['id']: r['status'] for r in data['records']}
    assert statuses['nk/recurrence=bruteforce'] == 'pass'
    assert statuses['nk/unimodal/n=12'] == 'reported'
    assert (tmp_path / 'out' / 'qtable.json').exists()


def test_constants_without_data(run):
    assert run('constants').returncode == 2


def test_flags_override_config(run, tmp_path):
    config = tmp_path / 'config.json'
    config.write_text(json.dumps({'K': 3, 'N': 25, 'series': 'geometric'}))
    result = run('check', 'prefix', '--config', str(config), '-K', '4')
    assert result.returncode == 0, result.stderr
    echoed = (tmp_path / 'out' / 'args.yaml').read_text().splitlines()
    assert 'K: 4' in echoed
    assert 'N: 25' in echoed


def test_reports_are_deterministic(run, tmp_path):
    for out in ('a', 'b'):
        assert run('check', 'prefix', '--series', 'constant:3', '-K', '4', '-N', '40', out=out).returncode == 0
    a, b = (json.loads((tmp_path / out / 'check-prefix.json').read_text()) for out in ('a', 'b'))
    assert a['records'] == b['records']
    assert a['version'] == b['version']


def _statuses(path):
    data = json.loads(path.read_text())
    return {r['id']: r['status'] for r in data['records']}


def test_growth_suite(run, tmp_path):
    result = run('check', 'growth', '--series', 'sigma-shifted', '-N', '2000')
    assert result.returncode == 0, result.stderr
    statuses = _statuses(tmp_path / 'out' / 'check-growth.json')
    assert statuses['sigma-partial-sums/upper'] == 'pass'
    assert statuses['sigma-partial-sums/lower'] == 'pass'
    assert statuses['growth/eta0'] == 'pass'
    assert statuses['growth/certificate/alpha=1/2'] == 'reported'


def test_breakpoints_suite(run, tmp_path):
    result = run('check', 'breakpoints', '--series', 'sigma-shifted', '-K', '4', '-N', '60')
    assert result.returncode == 0, result.stderr
    statuses = _statuses(tmp_path / 'out' / 'check-breakpoints.json')
    assert statuses['breakpoints/fit'] == 'reported'
    assert all(statuses[f'breakpoints/k={k}'] == 'reported' for k in range(1, 5))
    assert (tmp_path / 'out' / 'breakpoints.csv').exists()


@pytest.mark.slow
def test_decomposition_and_saddle_feed_constants(run, tmp_path):
    result = run('check', 'decomposition', '--series', 'sigma-shifted', '-K', '5', '-N', '80', '--identity-n', '30',
                 '--brute-force-n', '6', '--residual-ks', '3', '5', '--residual-samples', '20')
    assert result.returncode == 0, result.stderr
    statuses = _statuses(tmp_path / 'out' / 'check-decomposition.json')
    assert statuses['decomposition/identities'] == 'pass'
    assert statuses['residual/non-negative'] == 'reported'
    assert (tmp_path / 'out' / 'residuals.csv').exists()

    result = run('check', 'saddle', '--series', 'sigma-shifted', '-N', '1000', '--saddle-points', '10:50',
                 '--exact-coefficient-n', '50')
    assert result.returncode == 0, result.stderr
    statuses = _statuses(tmp_path / 'out' / 'check-saddle.json')
    assert statuses['saddle/k=10/n=50/A-sandwich'] == 'pass'
    assert statuses['saddle/k=10/n=50/modulus/max-on-axis'] == 'pass'
    assert statuses['saddle/k=10/n=50/arg-estimate'] == 'reported'
    manifest = json.loads((tmp_path / 'out' / 'saddle-10-50.json').read_text())
    assert {'C1', 'C2', 'c8'} <= set(manifest)

    result = run('constants')
    assert result.returncode == 0, result.stderr
    data = json.loads((tmp_path / 'out' / 'constants.json').read_text())
    ids = [r['id'] for r in data['records']]
    assert 'saddle-fit/k=10/n=50' in ids
    fit = next(r for r in data['records'] if r['id'] == 'saddle-fit/k=10/n=50')
    assert fit['measured']['C1'] is not None
    assert any(i.startswith('fit/') for i in ids)
