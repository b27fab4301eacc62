import os

from lcseries.cache import cache_path, list_cache, load_or_build, load_table, remove_cache, save_table
from lcseries.log import silent
from lcseries.sequences import SeriesSpec, generate
from lcseries.series import power_table


def test_second_build_is_a_cache_hit(tmp_path):
    spec = SeriesSpec.sigma_shifted()
    table, hit = load_or_build(spec, 4, 30, cache_dir=str(tmp_path), log=silent)
    assert not hit
    again, hit = load_or_build(spec, 4, 30, cache_dir=str(tmp_path), log=silent)
    assert hit
    assert all(again.row(k).coeffs == table.row(k).coeffs for k in range(1, 5))
    assert again.row(3).series_id == table.row(3).series_id


def test_key_depends_on_shape():
    a = cache_path('c', 'sigma-shifted', 4, 30)
    assert a != cache_path('c', 'sigma-shifted', 5, 30)
    assert a != cache_path('c', 'sigma-shifted', 4, 31)
    assert a != cache_path('c', 'constant:2', 4, 30)


def test_corrupt_entry_is_rebuilt(tmp_path):
    spec = SeriesSpec.constant(2)
    load_or_build(spec, 3, 10, cache_dir=str(tmp_path), log=silent)
    path = cache_path(str(tmp_path), spec.series_id, 3, 10)
    with open(path) as f:
        text = f.read()
    with open(path, 'w') as f:
        f.write(text.replace('"8/1"', '"9/1"', 1))
    messages = []
    table, hit = load_or_build(spec, 3, 10, cache_dir=str(tmp_path), log=messages.append)
    assert not hit
    assert any(m.startswith('WARNING: corrupt cache entry') for m in messages)
    assert table.coefficient(0, 3) == 8
    assert load_table(path, spec.series_id, 3, 10).coefficient(0, 3) == 8


def test_list_and_remove(tmp_path):
    for spec in (SeriesSpec.constant(2), SeriesSpec.geometric(1)):
        save_table(power_table(generate(spec, 10), 2, 10), str(tmp_path), log=silent)
    entries = list_cache(str(tmp_path))
    assert sorted(e['series_id'] for e in entries) == ['constant:2', 'geometric:1']
    assert remove_cache(str(tmp_path), series_id='constant:2', log=silent) == 1
    assert [e['series_id'] for e in list_cache(str(tmp_path))] == ['geometric:1']
    assert remove_cache(str(tmp_path), log=silent) == 1
    assert not [n for n in os.listdir(tmp_path) if n.endswith('.json')]
    assert list_cache(str(tmp_path / 'missing')) == []
