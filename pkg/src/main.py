import json
import logging
import sys
from dataclasses import replace

import numpy as np

from analytic3 import flux_landscape, oracle_table
from configs import (build_run_config, configure_argument_parser,
                     configure_logging)
from constants import (LANDSCAPE_STARTS, LANDSCAPE_TRAJECTORY_EVERY,
                       ORACLE_COUPLINGS, ORACLE_DELTA, ORACLE_GAMMAS,
                       ORACLE_LEAK_RATIO)
from ensemble import (correlate_flux_coherence, correlate_mismatch,
                      gamma_histogram, run_ensemble, size_sweep_summary,
                      summarize)
from exceptions import ConfigError, EnaqtError, EnsembleError
from lindblad import NoiseProfile, solve_chain
from model import build_ramp
from observables import coherence_length, coherence_map, populations
from observables import ratio_map
from optimizer import (draw_initial_gammas, multi_start, optimize_local,
                       scan_uniform)
from outputs import (control_output, run_directory, write_csv,
                     write_density_matrix_csv, write_density_matrix_json,
                     write_json, write_matrix_csv, write_ndjson)


def _tag(alpha):
    return f'alpha{alpha:g}'


def cmd_scan(config):
    """
    Сканирует поток при равномерной дефазировке для каждого alpha.

    Аргументы:
        config (RunConfig): Параметры запуска.

    Возвращает:
        list: Таблица пиков (alpha, Gamma_u, eta_u) с заголовком.

    Примечание:
        Пишет scan_curve.csv и peaks.json в директорию запуска.
    """
    out_dir = run_directory(config)
    grid = config.grid()
    curve, peaks = [], []
    results = [('alpha', 'Gamma_u', 'eta_u')]
    for alpha in config.alphas:
        scan = scan_uniform(config.chain(alpha), config.gamma_l, grid)
        curve.extend(
            (alpha, gamma, eta) for gamma, eta in zip(scan.grid, scan.fluxes)
        )
        peaks.append(
            {'alpha': alpha, 'gamma_u': scan.gamma_u, 'eta_u': scan.eta_u}
        )
        results.append((alpha, scan.gamma_u, scan.eta_u))
    write_csv(
        out_dir / 'scan_curve.csv', ('alpha', 'gamma', 'eta'), curve, config
    )
    write_json(out_dir / 'peaks.json', {'peaks': peaks}, config)
    return results


def _write_optimized_state(out_dir, alpha, spec, scan, result, config):
    rho_u = solve_chain(
        spec, NoiseProfile.uniform(spec.n_sites, scan.gamma_u, config.gamma_l)
    )
    rho_o = solve_chain(spec, NoiseProfile(result.gammas, config.gamma_l))
    tag = _tag(alpha)
    profile = zip(
        range(1, spec.n_sites + 1), result.gammas,
        populations(rho_u), populations(rho_o),
    )
    write_csv(
        out_dir / f'profile_{tag}.csv',
        ('site', 'gamma_opt', 'population_u', 'population_opt'),
        profile, config,
    )
    write_matrix_csv(
        out_dir / f'coherence_u_{tag}.csv', coherence_map(rho_u), config
    )
    write_matrix_csv(
        out_dir / f'coherence_opt_{tag}.csv', coherence_map(rho_o), config
    )
    write_matrix_csv(
        out_dir / f'ratio_{tag}.csv', ratio_map(rho_o, rho_u), config
    )
    write_density_matrix_csv(out_dir / f'rho_opt_{tag}.csv', rho_o, config)
    write_density_matrix_json(out_dir / f'rho_opt_{tag}.json', rho_o, config)
    if result.trajectory:
        write_csv(
            out_dir / f'trajectory_{tag}.csv',
            ['step', 'eta'] + [
                f'gamma_{site + 1}' for site in range(spec.n_sites)
            ],
            ([step, eta, *gammas] for step, gammas, eta in result.trajectory),
            config,
        )
    return coherence_length(rho_u), coherence_length(rho_o)


def cmd_optimize(config):
    """
    Оптимизирует локальную дефазировку: для рампы из config.starts
    случайных стартов, для остальных цепочек из Gamma_u.

    Аргументы:
        config (RunConfig): Параметры запуска.

    Возвращает:
        list: Таблица (alpha, eta_u, eta_opt, ell_u, ell_opt, остановка).
    """
    out_dir = run_directory(config)
    cfg = config.optimizer_config()
    grid = config.grid()
    summary = []
    results = [('alpha', 'eta_u', 'eta_opt', 'ell_u', 'ell_opt', 'stop')]
    for alpha in config.alphas:
        spec = config.chain(alpha)
        scan = scan_uniform(spec, config.gamma_l, grid)
        if config.system == 'ramp':
            result = multi_start(
                spec, config.gamma_l, config.starts, config.seed, cfg,
                workers=config.workers,
            )
        else:
            result = optimize_local(
                spec, config.gamma_l, np.full(spec.n_sites, scan.gamma_u),
                cfg,
            )
        ell_u, ell_o = _write_optimized_state(
            out_dir, alpha, spec, scan, result, config
        )
        summary.append({
            'alpha': alpha,
            'gamma_u': scan.gamma_u,
            'eta_u': scan.eta_u,
            'ell_u': ell_u,
            'ell_opt': ell_o,
            **result.to_dict(),
        })
        results.append((
            alpha, scan.eta_u, result.flux, ell_u, ell_o,
            result.termination.value,
        ))
    write_json(out_dir / 'summary.json', {'results': summary}, config)
    return results


def _write_ensemble_tables(out_dir, records, alpha, n_sites, config):
    tag = f'N{n_sites}_{_tag(alpha)}'
    edges, counts = gamma_histogram(records, alpha)
    write_csv(
        out_dir / f'gamma_histogram_{tag}.csv',
        ('log10_gamma_left', 'log10_gamma_right', 'count'),
        zip(edges[:-1], edges[1:], counts.tolist()), config,
    )
    for name, function in (
            ('mismatch', correlate_mismatch),
            ('flux_coherence', correlate_flux_coherence)):
        try:
            binned = function(records, alpha)
        except EnaqtError as error:
            logging.warning(f'Таблица {name} для {tag} не построена: {error}')
            continue
        rows = []
        for left, right, count, box in binned.rows():
            stats = box.to_dict() if box else {}
            rows.append([
                left, right, count,
                *(stats.get(key, float('nan')) for key in (
                    'q1', 'median', 'q3', 'whisker_low', 'whisker_high')),
                ' '.join(
                    format(value, '.17g') for value in stats.get(
                        'outliers', ())
                ),
            ])
        write_csv(
            out_dir / f'boxplot_{name}_{tag}.csv',
            ('bin_left', 'bin_right', 'count', 'q1', 'median', 'q3',
             'whisker_low', 'whisker_high', 'outliers'),
            rows, config,
        )


def cmd_ensemble(config):
    """
    Прогоняет ансамбли беспорядка для одного или нескольких размеров.

    Аргументы:
        config (RunConfig): Параметры запуска.

    Возвращает:
        list: Таблица средних улучшений потока и длины когерентности.

    Исключения:
        EnsembleError: Если для какого-либо размера не удалась
                       ни одна реализация.
    """
    out_dir = run_directory(config)
    cfg = config.optimizer_config()
    sizes = config.sizes or [config.n_sites]
    records_by_size = {}
    results = [(
        'N', 'alpha', 'flux_gain_%', 'ell_gain_%', 'r_gamma_mismatch',
        'r_flux_ell', 'failures',
    )]
    for n_sites in sizes:
        records = run_ensemble(
            config.realizations, n_sites, config.alphas, config.gamma_l,
            config.seed, cfg, grid=config.grid(), workers=config.workers,
            j_max=config.j_max,
        )
        if not any(record.ok for record in records):
            message = f'Все реализации для N = {n_sites} завершились ошибкой'
            logging.error(message, stack_info=True)
            raise EnsembleError(message)
        records_by_size[n_sites] = records
        write_ndjson(out_dir / f'records_N{n_sites}.ndjson', records, config)
        summary = summarize(records, config.alphas)
        write_json(
            out_dir / f'summary_N{n_sites}.json', {'summary': summary}, config
        )
        for alpha in config.alphas:
            _write_ensemble_tables(out_dir, records, alpha, n_sites, config)
            stats = summary['alphas'][repr(float(alpha))]
            results.append((
                n_sites, alpha,
                stats.get('flux_improvement_pct', float('nan')),
                stats.get('ell_improvement_pct', float('nan')),
                stats.get('spearman_gamma_mismatch', float('nan')),
                stats.get('spearman_flux_ell', float('nan')),
                summary['failures'],
            ))
    if len(sizes) > 1:
        rows = size_sweep_summary(records_by_size, config.alphas)
        write_csv(
            out_dir / 'size_sweep.csv', list(rows[0]),
            (list(row.values()) for row in rows), config,
        )
    return results


def _landscape_trajectories(alpha, config):
    spec = build_ramp(3, config.ramp_delta(3), alpha=alpha,
                      j_max=config.j_max)
    cfg = replace(
        config.optimizer_config(),
        trajectory_every=config.trajectory_every or LANDSCAPE_TRAJECTORY_EVERY,
    )
    rows = []
    for start in range(LANDSCAPE_STARTS):
        init = draw_initial_gammas(3, config.seed, start, cfg)
        init[0] = cfg.lower_bound
        result = optimize_local(
            spec, config.gamma_l, init, cfg, active=(False, True, True)
        )
        rows.extend(
            (alpha, start, step, gammas[1], gammas[2], eta)
            for step, gammas, eta in result.trajectory
        )
    return rows


def cmd_analytic3(config):
    """
    Ландшафт потока трёх узлов по (Gamma_2, Gamma_3), траектории
    оптимизатора на нём и таблица сравнения с аналитикой.

    Аргументы:
        config (RunConfig): Параметры запуска.

    Возвращает:
        list: Таблица сравнения численного и аналитического потоков.
    """
    out_dir = run_directory(config)
    grid = config.grid()
    landscape_rows, trajectory_rows, peaks = [], [], []
    for alpha in config.alphas:
        landscape = flux_landscape(
            alpha, grid, grid, delta=config.ramp_delta(3),
            j_max=config.j_max, gamma_l=config.gamma_l,
        )
        for row, gamma2 in enumerate(grid):
            landscape_rows.extend(
                (alpha, gamma2, gamma3, landscape[row, column])
                for column, gamma3 in enumerate(grid)
            )
        row, column = np.unravel_index(np.argmax(landscape), landscape.shape)
        peaks.append({
            'alpha': alpha,
            'gamma2': float(grid[row]),
            'gamma3': float(grid[column]),
            'eta': float(landscape[row, column]),
        })
        trajectory_rows.extend(_landscape_trajectories(alpha, config))
    write_csv(
        out_dir / 'landscape.csv', ('alpha', 'gamma2', 'gamma3', 'eta'),
        landscape_rows, config,
    )
    write_csv(
        out_dir / 'trajectories.csv',
        ('alpha', 'start', 'step', 'gamma2', 'gamma3', 'eta'),
        trajectory_rows, config,
    )
    table = oracle_table(
        ORACLE_DELTA, *ORACLE_GAMMAS, couplings=ORACLE_COUPLINGS,
        leak_ratio=ORACLE_LEAK_RATIO,
    )
    header = ('mode', 'J', 'gamma_l', 'eta_numeric', 'eta_analytic',
              'rel_error')
    write_csv(out_dir / 'oracle.csv', header, table, config)
    write_json(out_dir / 'landscape_peaks.json', {'peaks': peaks}, config)
    return [header] + table


MODE_TO_FUNCTION = {
    'scan': cmd_scan,
    'optimize': cmd_optimize,
    'ensemble': cmd_ensemble,
    'analytic3': cmd_analytic3,
}


def main(argv=None):
    """
    Главная функция для запуска симулятора.

    Возвращает:
        int: Код завершения: 0 при успехе, 2 при ошибке конфигурации,
             1 при прочих ошибках.
    """
    configure_logging()
    logging.info('Симулятор запущен!')

    arg_parser = configure_argument_parser(MODE_TO_FUNCTION.keys())
    try:
        args = arg_parser.parse_args(argv)
        logging.info(f'Аргументы командной строки: {args}')
        config = build_run_config(args)
        config = replace(config, out_dir=str(run_directory(config)))
        results = MODE_TO_FUNCTION[config.mode](config)
    except EnaqtError as error:
        print(
            json.dumps({'error': type(error).__name__, 'message': str(error)},
                       ensure_ascii=False),
            file=sys.stderr,
        )
        return 2 if isinstance(error, ConfigError) else 1

    if results is not None:
        control_output(results, config)
    logging.info('Симулятор завершил работу.')
    return 0


if __name__ == '__main__':
    sys.exit(main())
