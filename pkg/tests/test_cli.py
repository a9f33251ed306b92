import json
import logging
import math
from pathlib import Path

import pandas as pd
import pytest
from click.testing import CliRunner

from pressurelab.commands import cli
from pressurelab.commands.helper_functions import parse_config
from pressurelab.commands.tasks import TASKS
from pressurelab.errors import ConfigError
from pressurelab.services.builtins import CAT_LAMBDA
from pressurelab.utils.worker_pool import map_ordered

CONFIG_DIR = Path(__file__).resolve().parents[1] / 'configs'


@pytest.fixture
def runner():
    return CliRunner()


def _write(tmp_path, name, doc):
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(doc))
    return str(path)


def _run(runner, tmp_path, name, doc, *extra, out='out'):
    path = _write(tmp_path, name, doc)
    out_dir = tmp_path / out
    result = runner.invoke(cli, ['run', path, '--out', str(out_dir), *extra])
    return result, out_dir / f"{name}.csv", out_dir / f"{name}.manifest.json"


ENTROPY_DOC = {'task': 'entropy', 'measures': ['B(1/2)'], 'schedule': {'n': [2]}}


def test_entropy_run(runner, tmp_path):
    result, table, manifest = _run(runner, tmp_path, 'entropy', ENTROPY_DOC)
    assert result.exit_code == 0
    frame = pd.read_csv(table)
    assert list(frame.columns) == ['measure', 'n', 'value', 'oracle', 'diff', 'esssup', 'gap', 'flagged']
    assert frame.loc[0, 'value'] == pytest.approx(math.log(2), abs=1e-11)
    assert frame.loc[0, 'diff'] < 1e-12
    assert not frame.loc[0, 'flagged']
    written = json.loads(manifest.read_text())
    assert written['exit_code'] == 0
    assert written['partial'] is False
    assert written['config'] == ENTROPY_DOC
    assert 'numpy' in written['versions']


def test_rerun_gives_identical_table(runner, tmp_path):
    _, first, _ = _run(runner, tmp_path, 'entropy', ENTROPY_DOC, out='a')
    _, second, _ = _run(runner, tmp_path, 'entropy', ENTROPY_DOC, out='b')
    assert first.read_bytes() == second.read_bytes()


def test_unknown_task_is_a_config_error(runner, tmp_path, caplog):
    with caplog.at_level(logging.ERROR):
        result, table, manifest = _run(runner, tmp_path, 'bad', {'task': 'integrate'})
    assert result.exit_code == 2
    assert 'task:' in caplog.text
    assert not table.exists()
    assert not manifest.exists()


def test_missing_config_file(runner, tmp_path):
    result = runner.invoke(cli, ['run', str(tmp_path / 'absent.json'), '--out', str(tmp_path)])
    assert result.exit_code == 2


def test_exhaustive_length_above_cap_is_rejected(runner, tmp_path):
    doc = {'task': 'sp', 'system': 'full-2', 'measures': ['B(0.9)'], 'schedule': {'n': [30]}}
    result, table, _ = _run(runner, tmp_path, 'sp', doc)
    assert result.exit_code == 2
    assert not table.exists()


def test_refused_hypothesis_writes_partial_result(runner, tmp_path):
    log_lam = math.log(CAT_LAMBDA)
    doc = {
        'task': 'hyperbolic',
        'system': 'two-sided-full-3',
        'measures': ['cat-max'],
        'models': [{'kind': 'hyperbolic', 'phi_u': log_lam, 'phi_s': -0.5 * log_lam}],
    }
    result, table, manifest = _run(runner, tmp_path, 'hyperbolic', doc)
    assert result.exit_code == 3
    written = json.loads(manifest.read_text())
    assert written['partial'] is True
    assert written['exit_code'] == 3
    assert 'volume-preserving' in written['error']
    assert table.exists()


def test_hyperbolic_catalog_run(runner, tmp_path):
    doc = {'task': 'hyperbolic', 'measures': ['cat-max', 'cat-half', 'cat-mixture'], 'models': ['cat-surrogate']}
    result, table, _ = _run(runner, tmp_path, 'hyperbolic', doc)
    assert result.exit_code == 0
    frame = pd.read_csv(table)
    assert list(frame['value']) == pytest.approx([2.0, 1.0, 2.0], abs=1e-8)


def test_lemma_check_default_grid(runner, tmp_path):
    result, table, _ = _run(runner, tmp_path, 'lemma', {'task': 'lemma-check'})
    assert result.exit_code == 0
    frame = pd.read_csv(table)
    # 10, 13 and 15 delta values for k = 2, 3, 4 over n = 1..12
    assert len(frame) == 12 * (10 + 13 + 15)
    assert frame['ok'].all()
    assert (frame['bound'] >= frame['exact']).all()


def test_list_builtins(runner):
    result = runner.invoke(cli, ['list-builtins'])
    assert result.exit_code == 0
    assert 'golden-mean' in result.output
    assert '0.481211825' in result.output
    assert '0.63092975357' in result.output


def test_thread_count_does_not_change_results(runner, tmp_path):
    doc = {
        'task': 'dimension',
        'measures': ['B(1/2)', 'mixture-1/2-0.9'],
        'models': ['middle-third'],
        'seeds': [0, 1, 2, 3],
        'orbit_length': 100,
        'schedule': {'log_radii': [-20 * math.log(3), -30 * math.log(3)]},
    }
    result_1, serial, _ = _run(runner, tmp_path, 'dims', doc, '--threads', '1', out='serial')
    result_2, pooled, _ = _run(runner, tmp_path, 'dims', doc, '--threads', '2', out='pooled')
    assert result_1.exit_code == result_2.exit_code == 0
    assert serial.read_bytes() == pooled.read_bytes()
    frame = pd.read_csv(serial)
    assert set(frame['method']) == {'bowen_root', 'box_count'}


def test_config_errors_name_the_key():
    with pytest.raises(ConfigError) as info:
        parse_config({'task': 'sp', 'system': 'full-2', 'measures': ['B(0.9)'], 'schedule': {'n': [30]}})
    assert info.value.key == 'schedule.n'
    with pytest.raises(ConfigError) as info:
        parse_config({'task': 'entropy'})
    assert info.value.key == 'measures'
    with pytest.raises(ConfigError) as info:
        parse_config({'task': 'pressure', 'system': 'full-2', 'schedule': {'depth': [4]}})
    assert info.value.key == 'schedule.depth'
    with pytest.raises(ConfigError) as info:
        parse_config({'task': 'dimension', 'measures': ['cat-max'], 'models': ['cat-surrogate']})
    assert info.value.key == 'models[0]'


def test_builtin_measure_on_wrong_system_is_rejected():
    with pytest.raises(ConfigError) as info:
        parse_config({'task': 'entropy', 'system': 'golden-mean', 'measures': ['B(1/2)']})
    assert info.value.key == 'measures[0]'


def test_map_ordered_keeps_submission_order():
    assert map_ordered(lambda x: x * x, range(20), threads=4) == [x * x for x in range(20)]


def test_builtin_measures_keep_their_own_subshift_without_system(runner, tmp_path):
    result = runner.invoke(cli, ['run', str(CONFIG_DIR / 'entropy.json'), '--out', str(tmp_path)])
    assert result.exit_code == 0
    frame = pd.read_csv(tmp_path / 'entropy.csv')
    assert list(frame['measure']) == ['B(1/2)', 'B(0.9)', 'mixture-1/2-0.9', 'golden-markov']
    assert frame.loc[3, 'oracle'] == pytest.approx(2 / 3 * math.log(2))
    assert not frame.loc[3, 'flagged']


def test_measures_paired_with_potentials_must_share_a_subshift():
    cfg = parse_config({'task': 'entropy', 'measures': ['B(1/2)', 'golden-markov']})
    assert [str(mu.subshift) for mu in cfg.measures] == ['full-2', 'golden-mean']
    with pytest.raises(ConfigError) as info:
        parse_config({'task': 'pointwise', 'measures': ['B(1/2)', 'golden-markov'], 'seeds': [0]})
    assert info.value.key == 'measures[1]'


def test_samples_per_component_must_be_a_count():
    with pytest.raises(ConfigError) as info:
        parse_config({'task': 'pointwise', 'measures': ['B(1/2)'], 'seeds': [0], 'samples_per_component': -1})
    assert info.value.key == 'samples_per_component'


@pytest.mark.slow
@pytest.mark.parametrize('path', sorted(CONFIG_DIR.glob('*.json')), ids=lambda p: p.stem)
def test_shipped_configs_run_cleanly(runner, tmp_path, path):
    result = runner.invoke(cli, ['run', str(path), '--out', str(tmp_path)])
    assert result.exit_code == 0, result.output
    stem = json.loads(path.read_text())['output']['path']
    written = json.loads((tmp_path / f"{stem}.manifest.json").read_text())
    assert written['exit_code'] == 0


def _columns(task):
    return list(TASKS[task][1])


def test_pressure_run_columns(runner, tmp_path):
    doc = {'task': 'pressure', 'system': 'full-2', 'potentials': [[0.0, 0.3]], 'schedule': {'D': [8], 'N': [4, 8]}}
    result, table, _ = _run(runner, tmp_path, 'pressure', doc)
    assert result.exit_code == 0
    frame = pd.read_csv(table)
    assert list(frame.columns) == _columns('pressure')
    assert list(frame['N']) == [4, 8]
    assert frame['oracle'].to_numpy() == pytest.approx(math.log(1 + math.exp(0.3)))


def test_cp_run_columns(runner, tmp_path):
    doc = {'task': 'cp', 'system': 'full-2', 'potentials': [[0.0, 0.3]], 'schedule': {'N': [4, 8]}}
    result, table, _ = _run(runner, tmp_path, 'cp', doc)
    assert result.exit_code == 0
    frame = pd.read_csv(table)
    assert list(frame.columns) == _columns('cp')
    # a depth-1 potential on the full shift: every crossing is the pressure itself
    assert frame['value'].to_numpy() == pytest.approx(math.log(1 + math.exp(0.3)), abs=1e-9)
    assert not frame['flagged'].any()


def test_sp_run_columns(runner, tmp_path):
    doc = {'task': 'sp', 'system': 'full-2', 'measures': ['B(1/2)'], 'schedule': {'n': [8, 10, 12]}}
    result, table, _ = _run(runner, tmp_path, 'sp', doc)
    assert result.exit_code == 0
    frame = pd.read_csv(table)
    assert list(frame.columns) == _columns('sp')
    assert list(frame['n']) == [8, 10, 12]
    assert frame.loc[2, 'value'] == pytest.approx(math.log(math.comb(12, 6)) / 12)
    assert frame['extrapolated'].nunique() == 1
    assert frame.loc[0, 'extrapolated'] > frame.loc[2, 'value']


def test_pointwise_run_emits_component_clusters(runner, tmp_path):
    doc = {
        'task': 'pointwise',
        'measures': ['mixture-1/2-0.9'],
        'seeds': [0, 1, 2],
        'orbit_length': 2000,
        'samples_per_component': 3,
    }
    result, table, _ = _run(runner, tmp_path, 'pointwise', doc)
    assert result.exit_code == 0
    frame = pd.read_csv(table)
    assert list(frame.columns) == _columns('pointwise')
    assert list(frame['row']) == ['sample'] * 3 + ['cluster'] * 2 + ['esssup']
    clusters = frame[frame['row'] == 'cluster']
    assert sorted(clusters['component']) == [0, 1]
    assert (clusters['diff'] < 0.05).all()
    esssup = frame[frame['row'] == 'esssup'].iloc[0]
    assert esssup['oracle'] == pytest.approx(math.log(2))
    assert esssup['diff'] <= 0.03
    assert not esssup['flagged']


def test_pointwise_run_without_clusters(runner, tmp_path):
    doc = {'task': 'pointwise', 'measures': ['B(1/2)'], 'seeds': [0], 'orbit_length': 500,
           'samples_per_component': 0}
    result, table, _ = _run(runner, tmp_path, 'pointwise', doc)
    assert result.exit_code == 0
    assert list(pd.read_csv(table)['row']) == ['sample', 'esssup']


def test_hyperbolic_run_columns(runner, tmp_path):
    doc = {'task': 'hyperbolic', 'measures': ['cat-max'], 'models': ['cat-surrogate'], 'seeds': [0],
           'orbit_length': 2000}
    result, table, _ = _run(runner, tmp_path, 'hyperbolic', doc)
    assert result.exit_code == 0
    frame = pd.read_csv(table)
    assert list(frame.columns) == _columns('hyperbolic')
    assert set(frame['method']) == {'bowen_root', 'pointwise'}


def test_lemma_check_run_columns(runner, tmp_path):
    doc = {'task': 'lemma-check', 'schedule': {'k': [3], 'n': [4], 'delta': [0.5]}}
    result, table, _ = _run(runner, tmp_path, 'lemma', doc)
    assert result.exit_code == 0
    frame = pd.read_csv(table)
    assert list(frame.columns) == _columns('lemma-check')
    assert frame.loc[0, 'exact'] == 33
    assert frame.loc[0, 'ok']
