import json

import pytest
try:
    import main
except ModuleNotFoundError:
    assert False, 'Убедитесь что в директории `src` есть файл `main.py`'
except ImportError:
    assert False, 'Убедитесь что в директории `src` есть файл `main.py`'

QUICK = (
    '--grid-min', '1e-3', '--grid-max', '1', '--grid-points', '9',
    '--max-steps', '20',
)


@pytest.fixture(autouse=True)
def no_log_files(monkeypatch):
    monkeypatch.setattr(main, 'configure_logging', lambda: None)


def run(out_dir, *argv):
    return main.main([*argv, '--out-dir', str(out_dir), *QUICK])


def test_main_file():
    for name in ('cmd_scan', 'cmd_optimize', 'cmd_ensemble',
                 'cmd_analytic3', 'MODE_TO_FUNCTION', 'main'):
        assert hasattr(main, name), (
            f'Добавьте `{name}` в модуль `main.py`.'
        )


def test_mode_to_function():
    got = main.MODE_TO_FUNCTION
    assert isinstance(got, dict), (
        'В модуле `main.py` объект `MODE_TO_FUNCTION` должен быть словарем'
    )
    assert set(got) == {'scan', 'optimize', 'ensemble', 'analytic3'}
    for name_func, func in got.items():
        assert callable(func), (
            'Убедитесь, что в модуле `main.py` в объекте `MODE_TO_FUNCTION` '
            f'`{func}` - это функция.'
        )
        assert func.__name__ == f'cmd_{name_func}'


def test_scan(tmp_path, capsys):
    code = run(tmp_path, 'scan', '--n-sites', '4', '--alpha', '1', '5')
    assert code == 0
    peaks = json.loads((tmp_path / 'peaks.json').read_text())
    assert [peak['alpha'] for peak in peaks['peaks']] == [1.0, 5.0]
    assert peaks['config']['n_sites'] == 4
    lines = (tmp_path / 'scan_curve.csv').read_text().splitlines()
    assert lines[0].startswith('# config: ')
    assert len(lines) == 2 + 2 * 9
    captured_out, _ = capsys.readouterr()
    assert 'Gamma_u' in captured_out


def test_scan_empty_grid(tmp_path, capsys):
    out_dir = tmp_path / 'never'
    code = main.main(
        ['scan', '--grid-points', '0', '--out-dir', str(out_dir)]
    )
    assert code == 2
    _, captured_err = capsys.readouterr()
    error = json.loads(captured_err.strip().splitlines()[-1])
    assert error['error'] == 'ConfigError'
    assert not out_dir.exists(), 'При ошибке файлы не должны создаваться'


@pytest.mark.parametrize('argv', [
    ['scan', '--system', 'lattice'],
    ['unknown'],
    ['scan', '--n-sites', 'many'],
])
def test_usage_error_is_reported_as_json(tmp_path, capsys, argv):
    out_dir = tmp_path / 'never'
    code = main.main([*argv, '--out-dir', str(out_dir)])
    assert code == 2, 'Ошибка аргументов должна завершаться кодом 2'
    _, captured_err = capsys.readouterr()
    error = json.loads(captured_err.strip().splitlines()[-1])
    assert error['error'] == 'ConfigError'
    assert error['message']
    assert not out_dir.exists()


def test_optimize_ramp_deterministic(tmp_path):
    outputs = []
    for name in ('first', 'second'):
        out_dir = tmp_path / name
        code = run(
            out_dir, 'optimize', '--n-sites', '4', '--alpha', '3',
            '--starts', '3', '--seed', '5',
        )
        assert code == 0
        outputs.append({
            path.name: path.read_text().splitlines()[1:]
            for path in sorted(out_dir.glob('*.csv'))
        })
    assert outputs[0] == outputs[1], (
        'Повторный запуск с тем же зерном должен давать те же числа'
    )
    assert {'profile_alpha3.csv', 'coherence_u_alpha3.csv',
            'coherence_opt_alpha3.csv', 'ratio_alpha3.csv',
            'rho_opt_alpha3.csv'} <= set(outputs[0])
    summary = json.loads((tmp_path / 'first' / 'summary.json').read_text())
    result = summary['results'][0]
    assert result['flux'] >= 0
    assert len(result['gammas']) == 4


def test_optimize_disorder_with_trajectory(tmp_path):
    code = run(
        tmp_path, 'optimize', '--system', 'disorder', '--n-sites', '4',
        '--alpha', '5', '--trajectory-every', '5', '-o', 'pretty',
    )
    assert code == 0
    assert (tmp_path / 'trajectory_alpha5.csv').exists()
    assert (tmp_path / 'rho_opt_alpha5.json').exists()


def test_ensemble(tmp_path):
    code = run(
        tmp_path, 'ensemble', '--sizes', '4', '5', '--realizations', '2',
        '--alpha', '1', '5', '-o', 'file',
    )
    assert code == 0
    for n_sites in (4, 5):
        lines = (tmp_path / f'records_N{n_sites}.ndjson').read_text(
        ).splitlines()
        assert len(lines) == 3
        assert json.loads(lines[0])['schema_version'] == 1
        summary = json.loads(
            (tmp_path / f'summary_N{n_sites}.json').read_text()
        )
        assert summary['summary']['failures'] == 0
        assert (tmp_path / f'gamma_histogram_N{n_sites}_alpha5.csv').exists()
    assert (tmp_path / 'size_sweep.csv').exists()
    summary_files = list(tmp_path.glob('ensemble_*.csv'))
    assert summary_files, 'С -o file сводная таблица сохраняется в CSV'
    first_line = summary_files[0].read_text().splitlines()[0]
    assert first_line.startswith('# config: ')
    header = json.loads(first_line[len('# config: '):])
    assert header['seed'] == header['config']['seed']
    assert header['config']['sizes'] == [4, 5]


def test_analytic3(tmp_path):
    code = run(tmp_path, 'analytic3', '--alpha', '1', '5')
    assert code == 0
    lines = (tmp_path / 'landscape.csv').read_text().splitlines()
    assert len(lines) == 2 + 2 * 9 * 9
    oracle = (tmp_path / 'oracle.csv').read_text().splitlines()
    assert len(oracle) == 2 + 6
    assert (tmp_path / 'trajectories.csv').exists()
    peaks = json.loads((tmp_path / 'landscape_peaks.json').read_text())
    assert len(peaks['peaks']) == 2
