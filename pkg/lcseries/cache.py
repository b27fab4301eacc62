'''
On-disk cache of power tables. One JSON file per (series id, K, N, format
version); rows are stored as "p/q" strings together with their checksums.
'''
import errno
import hashlib
import json
import os
import re

from .errors import ResourceError
from .helpers import makedir, parse_fraction, fraction_to_str, row_checksum
from .sequences import generate
from .series import DEFAULT_MAX_TABLE_BYTES, PowerTable, TruncatedSeries, power_table

CACHE_FORMAT_VERSION = 1


def cache_key(series_id, K, N):
    slug = re.sub(r'[^A-Za-z0-9.-]+', '_', series_id)[:40]
    digest = hashlib.sha256(f'{series_id}|{K}|{N}|{CACHE_FORMAT_VERSION}'.encode()).hexdigest()[:12]
    return f'{slug}-K{K}-N{N}-v{CACHE_FORMAT_VERSION}-{digest}.json'


def cache_path(cache_dir, series_id, K, N):
    return os.path.join(cache_dir, cache_key(series_id, K, N))


def save_table(table, cache_dir, log=print):
    makedir(cache_dir)
    path = cache_path(cache_dir, table.base.series_id, table.K, table.N)
    data = {
        'format_version': CACHE_FORMAT_VERSION,
        'series_id': table.base.series_id,
        'K': table.K,
        'N': table.N,
        'rows': {str(k): [fraction_to_str(c) for c in table.row(k)] for k in range(1, table.K + 1)},
        'checksums': {str(k): row_checksum(table.row(k)) for k in range(1, table.K + 1)},
    }
    tmp = path + '.tmp'
    try:
        with open(tmp, 'w') as f:
            json.dump(data, f)
        os.replace(tmp, path)
    except OSError as e:
        if os.path.exists(tmp):
            os.remove(tmp)
        if e.errno == errno.ENOSPC:
            raise ResourceError(f'disk full while writing {path}') from e
        raise
    log(f'\tcached table at {path}')
    return path


def load_table(path, series_id, K, N):
    '''PowerTable stored at path; ValueError when the file is corrupt or keyed differently'''
    try:
        with open(path) as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ValueError(f'{path} is not valid JSON ({e})') from e
    if data.get('format_version') != CACHE_FORMAT_VERSION:
        raise ValueError(f'{path} has format version {data.get("format_version")}, expected {CACHE_FORMAT_VERSION}')
    if (data.get('series_id'), data.get('K'), data.get('N')) != (series_id, K, N):
        raise ValueError(f'{path} holds a different table')
    rows = {}
    try:
        for k in range(1, K + 1):
            coeffs = [parse_fraction(c) for c in data['rows'][str(k)]]
            if len(coeffs) != N + 1:
                raise ValueError(f'row {k} has {len(coeffs)} entries')
            if row_checksum(coeffs) != data['checksums'][str(k)]:
                raise ValueError(f'row {k} checksum mismatch')
            rows[k] = TruncatedSeries(coeffs, series_id if k == 1 else f'({series_id})^{k}')
    except (KeyError, ZeroDivisionError, TypeError) as e:
        raise ValueError(f'{path} is incomplete ({e!r})') from e
    return PowerTable(base=rows[1], rows=rows, K=K, N=N)


def load_or_build(spec, K, N, cache_dir=None, kernel='schoolbook', max_bytes=DEFAULT_MAX_TABLE_BYTES, log=print):
    '''
    (table, hit): the cached table when one is present and intact, otherwise a
    freshly computed one (written to the cache when cache_dir is set)
    '''
    if cache_dir is not None:
        path = cache_path(cache_dir, spec.series_id, K, N)
        if os.path.exists(path):
            try:
                table = load_table(path, spec.series_id, K, N)
                log(f'\tcache hit: {path}')
                return table, True
            except ValueError as e:
                log(f'WARNING: corrupt cache entry {path}, rebuilding ({e})')
    f = generate(spec, N)
    table = power_table(f, K, N, kernel=kernel, max_bytes=max_bytes)
    if cache_dir is not None:
        save_table(table, cache_dir, log=log)
    return table, False


def list_cache(cache_dir):
    '''one dict per cache file: file, series_id, K, N, bytes'''
    if not os.path.isdir(cache_dir):
        return []
    entries = []
    for name in sorted(os.listdir(cache_dir)):
        if not name.endswith('.json'):
            continue
        path = os.path.join(cache_dir, name)
        entry = {'file': name, 'bytes': os.path.getsize(path)}
        try:
            with open(path) as f:
                data = json.load(f)
            entry.update(series_id=data.get('series_id'), K=data.get('K'), N=data.get('N'),
                         format_version=data.get('format_version'))
        except (OSError, json.JSONDecodeError):
            entry.update(series_id=None, K=None, N=None, format_version=None)
        entries.append(entry)
    return entries


def remove_cache(cache_dir, series_id=None, log=print):
    '''delete every entry (or those of one series); returns the number removed'''
    removed = 0
    for entry in list_cache(cache_dir):
        if series_id is not None and entry['series_id'] != series_id:
            continue
        os.remove(os.path.join(cache_dir, entry['file']))
        log(f'\tremoved {entry["file"]}')
        removed += 1
    return removed
