import logging
from dataclasses import dataclass, field
from functools import partial

import numpy as np
from scipy.stats import rankdata

from constants import (ELL_RATIO_BIN_WIDTH, GAMMA_L, J_MAX, LOG_GAMMA_BINS,
                       MISMATCH_BINS, SCAN_GRID_MAX, SCAN_GRID_MIN,
                       SCAN_GRID_POINTS)
from exceptions import EnaqtError, UndefinedCorrelationError
from lindblad import NoiseProfile, solve_chain
from model import ChainSpec, sample_disorder
from observables import coherence_length, local_mismatch
from optimizer import (OptimizerConfig, Termination, optimize_local,
                       scan_uniform)
from utils import derive_seed, log_grid, parallel_map, require


@dataclass
class AlphaBlock:
    gamma_u: float
    eta_u: float
    gammas_opt: np.ndarray
    eta_opt: float
    ell_u: float
    ell_opt: float
    termination: Termination

    @property
    def flux_ratio(self):
        return self.eta_opt / self.eta_u

    @property
    def ell_ratio(self):
        return self.ell_opt / self.ell_u if self.ell_u > 0 else float('nan')

    def to_dict(self):
        return {
            'gamma_u': self.gamma_u,
            'eta_u': self.eta_u,
            'gammas_opt': [float(value) for value in self.gammas_opt],
            'eta_opt': self.eta_opt,
            'ell_u': self.ell_u,
            'ell_opt': self.ell_opt,
            'termination': self.termination.value,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            gamma_u=data['gamma_u'],
            eta_u=data['eta_u'],
            gammas_opt=np.asarray(data['gammas_opt'], dtype=float),
            eta_opt=data['eta_opt'],
            ell_u=data['ell_u'],
            ell_opt=data['ell_opt'],
            termination=Termination(data['termination']),
        )


@dataclass
class RealizationRecord:
    """Результаты одной реализации беспорядка для всех alpha."""

    index: int
    seed: int
    energies: np.ndarray
    blocks: dict = field(default_factory=dict)
    error: str = None

    @property
    def ok(self):
        return self.error is None

    def to_dict(self):
        return {
            'index': self.index,
            'seed': self.seed,
            'energies': [float(value) for value in self.energies],
            'blocks': {
                repr(float(alpha)): block.to_dict()
                for alpha, block in self.blocks.items()
            },
            'error': self.error,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            index=data['index'],
            seed=data['seed'],
            energies=np.asarray(data['energies'], dtype=float),
            blocks={
                float(alpha): AlphaBlock.from_dict(block)
                for alpha, block in data['blocks'].items()
            },
            error=data['error'],
        )


@dataclass(frozen=True)
class BoxplotStats:
    q1: float
    median: float
    q3: float
    whisker_low: float
    whisker_high: float
    outliers: tuple

    def to_dict(self):
        return {
            'q1': self.q1,
            'median': self.median,
            'q3': self.q3,
            'whisker_low': self.whisker_low,
            'whisker_high': self.whisker_high,
            'outliers': list(self.outliers),
        }


@dataclass
class BinnedBoxplots:
    """Боксплоты значений, сгруппированных по интервалам признака."""

    edges: np.ndarray
    counts: np.ndarray
    boxes: list
    spearman_r: float

    def rows(self):
        for left, right, count, box in zip(
                self.edges[:-1], self.edges[1:], self.counts, self.boxes):
            yield left, right, int(count), box


def _realization(index, n_sites, alphas, gamma_l, master_seed, cfg, grid,
                 j_max):
    seed = derive_seed(master_seed, index)
    energies = sample_disorder(n_sites, seed)
    record = RealizationRecord(index, seed, energies)
    try:
        for alpha in alphas:
            spec = ChainSpec(n_sites, energies, alpha, j_max)
            scan = scan_uniform(spec, gamma_l, grid)
            result = optimize_local(
                spec, gamma_l, np.full(n_sites, scan.gamma_u), cfg
            )
            rho_u = solve_chain(
                spec, NoiseProfile.uniform(n_sites, scan.gamma_u, gamma_l)
            )
            rho_o = solve_chain(spec, NoiseProfile(result.gammas, gamma_l))
            record.blocks[float(alpha)] = AlphaBlock(
                gamma_u=scan.gamma_u,
                eta_u=scan.eta_u,
                gammas_opt=result.gammas,
                eta_opt=result.flux,
                ell_u=coherence_length(rho_u),
                ell_opt=coherence_length(rho_o),
                termination=result.termination,
            )
    except EnaqtError as error:
        logging.warning(
            f'Реализация {index} (seed {seed}) не удалась: {error}'
        )
        record.error = f'{type(error).__name__}: {error}'
    return record


def run_ensemble(n_realizations, n_sites, alphas, gamma_l=GAMMA_L,
                 master_seed=0, cfg=OptimizerConfig(), grid=None, workers=1,
                 j_max=J_MAX):
    """
    Прогоняет ансамбль случайных цепочек: для каждой реализации и alpha
    находит Gamma_u и оптимизирует локальную дефазировку, начиная с неё.

    Аргументы:
        n_realizations (int): Число реализаций (>= 1).
        n_sites (int): Число узлов.
        alphas (list): Показатели туннелирования.
        gamma_l (float, optional): Скорость захвата.
        master_seed (int, optional): Главное зерно; реализация i
                                     использует поток (master_seed, i).
        cfg (OptimizerConfig, optional): Параметры оптимизатора.
        grid (array-like, optional): Сетка равномерного сканирования.
        workers (int, optional): Число процессов.
        j_max (float, optional): Туннелирование ближайших соседей.

    Возвращает:
        list: RealizationRecord в порядке номеров реализаций. Неудачные
              реализации сохраняются с описанием ошибки.
    """
    require(
        n_realizations >= 1,
        f'Число реализаций должно быть >= 1: {n_realizations}'
    )
    if grid is None:
        grid = log_grid(SCAN_GRID_MIN, SCAN_GRID_MAX, SCAN_GRID_POINTS)
    records = parallel_map(
        partial(
            _realization, n_sites=n_sites, alphas=tuple(alphas),
            gamma_l=gamma_l, master_seed=master_seed, cfg=cfg, grid=grid,
            j_max=j_max,
        ),
        range(n_realizations), workers=workers, desc='realizations',
    )
    failures = sum(not record.ok for record in records)
    logging.info(
        f'Ансамбль N = {n_sites}: {n_realizations} реализаций, '
        f'ошибок {failures}'
    )
    return records


def spearman(x, y):
    """
    Ранговая корреляция Спирмена; совпадающим значениям присваивается
    средний ранг.

    Исключения:
        InvalidArgumentError: Если длины различны или меньше 2.
        UndefinedCorrelationError: Если один из векторов постоянен.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    require(
        x.ndim == 1 and x.shape == y.shape,
        f'Длины векторов различаются: {x.shape}, {y.shape}'
    )
    require(x.size >= 2, f'Нужно минимум 2 наблюдения: {x.size}')
    rank_x = rankdata(x, method='average')
    rank_y = rankdata(y, method='average')
    rank_x = rank_x - rank_x.mean()
    rank_y = rank_y - rank_y.mean()
    norm = np.sqrt(np.dot(rank_x, rank_x) * np.dot(rank_y, rank_y))
    require(
        norm > 0, 'Корреляция не определена для постоянного вектора',
        UndefinedCorrelationError
    )
    return float(np.clip(np.dot(rank_x, rank_y) / norm, -1.0, 1.0))


def boxplot_stats(values):
    """
    Квартили (линейная интерполяция порядковых статистик), усы до
    последней точки в пределах 1.5 IQR от квартилей и выбросы.

    Исключения:
        InvalidArgumentError: Если выборка пуста.
    """
    values = np.asarray(values, dtype=float).ravel()
    require(values.size >= 1, 'Пустая выборка для боксплота')
    q1, median, q3 = np.percentile(values, [25, 50, 75])
    spread = 1.5 * (q3 - q1)
    inside = values[(values >= q1 - spread) & (values <= q3 + spread)]
    outliers = np.sort(values[(values < q1 - spread) | (values > q3 + spread)])
    return BoxplotStats(
        q1=float(q1),
        median=float(median),
        q3=float(q3),
        whisker_low=float(inside.min()),
        whisker_high=float(inside.max()),
        outliers=tuple(float(value) for value in outliers),
    )


def _blocks(records, alpha):
    # Сортировка по номеру делает свёртку независимой от порядка записей.
    ordered = sorted(records, key=lambda record: record.index)
    return [
        (record, record.blocks[float(alpha)]) for record in ordered
        if record.ok and float(alpha) in record.blocks
    ]


def _edges(start, stop, width):
    return np.round(np.arange(start, stop + width / 2, width), 12)


def _binned(feature, values, edges, spearman_r):
    indices = np.digitize(feature, edges[1:-1])
    counts = np.bincount(indices, minlength=len(edges) - 1)
    boxes = [
        boxplot_stats(values[indices == position]) if count else None
        for position, count in enumerate(counts)
    ]
    return BinnedBoxplots(edges, counts, boxes, spearman_r)


def correlate_mismatch(records, alpha, bins=MISMATCH_BINS):
    """
    Связь оптимальных Gamma_n с локальным рассогласованием энергий на
    внутренних узлах по всем реализациям.

    Возвращает:
        BinnedBoxplots: Боксплоты Gamma_n по интервалам delta_n и
                        общий коэффициент Спирмена.
    """
    pairs = _blocks(records, alpha)
    require(pairs, f'Нет успешных реализаций для alpha = {alpha}')
    mismatch = np.concatenate([
        local_mismatch(record.energies) for record, _ in pairs
    ])
    gammas = np.concatenate([block.gammas_opt[1:-1] for _, block in pairs])
    return _binned(
        mismatch, gammas, _edges(*bins), spearman(gammas, mismatch)
    )


def correlate_flux_coherence(records, alpha, width=ELL_RATIO_BIN_WIDTH):
    """
    Связь относительного выигрыша в потоке с изменением длины
    когерентности (по одной паре на реализацию).

    Возвращает:
        BinnedBoxplots: Боксплоты eta_o / eta_u по интервалам
                        ell_o / ell_u и коэффициент Спирмена.
    """
    pairs = [
        (block.flux_ratio, block.ell_ratio)
        for _, block in _blocks(records, alpha)
        if np.isfinite(block.ell_ratio)
    ]
    require(pairs, f'Нет успешных реализаций для alpha = {alpha}')
    flux_ratios, ell_ratios = map(np.array, zip(*pairs))
    start = np.floor(ell_ratios.min() / width) * width
    stop = np.ceil(ell_ratios.max() / width) * width
    edges = _edges(start, max(stop, start + width), width)
    r = spearman(flux_ratios, ell_ratios) if len(pairs) > 1 else float('nan')
    return _binned(ell_ratios, flux_ratios, edges, r)


def gamma_histogram(records, alpha, bins=LOG_GAMMA_BINS):
    """Гистограмма log10 оптимальных Gamma_n по всем узлам."""
    values = np.concatenate([
        np.log10(block.gammas_opt) for _, block in _blocks(records, alpha)
    ])
    edges = _edges(*bins)
    counts, _ = np.histogram(values, bins=edges)
    return edges, counts


def valley_fraction(records, alpha, low=1e-3, high=1e-2):
    """Доля оптимальных Gamma_n в интервале [low, high)."""
    gammas = np.concatenate([
        block.gammas_opt for _, block in _blocks(records, alpha)
    ])
    return float(np.mean((gammas >= low) & (gammas < high)))


def _safe_spearman(function, records, alpha):
    try:
        return function(records, alpha).spearman_r
    except EnaqtError as error:
        logging.warning(f'Корреляция для alpha = {alpha} не определена: '
                        f'{error}')
        return float('nan')


def summarize(records, alphas):
    """
    Сводная статистика ансамбля по каждому alpha.

    Возвращает:
        dict: Словарь alpha -> показатели (средние и отклонения потоков
              и длин когерентности, средние улучшения в процентах,
              корреляции Спирмена, число ошибок, доля улучшений).
    """
    failures = sum(not record.ok for record in records)
    summary = {'n_records': len(records), 'failures': failures, 'alphas': {}}
    for alpha in alphas:
        blocks = [block for _, block in _blocks(records, alpha)]
        if not blocks:
            summary['alphas'][repr(float(alpha))] = {'n': 0}
            continue
        eta_u = np.array([block.eta_u for block in blocks])
        eta_o = np.array([block.eta_opt for block in blocks])
        ell_u = np.array([block.ell_u for block in blocks])
        ell_o = np.array([block.ell_opt for block in blocks])
        flux_ratio = eta_o / eta_u
        ell_ratio = np.array([block.ell_ratio for block in blocks])
        terminations = [block.termination.value for block in blocks]
        summary['alphas'][repr(float(alpha))] = {
            'n': len(blocks),
            'eta_u_mean': float(eta_u.mean()),
            'eta_opt_mean': float(eta_o.mean()),
            'ell_u_mean': float(ell_u.mean()),
            'ell_opt_mean': float(ell_o.mean()),
            'flux_improvement_pct': float(100 * (flux_ratio.mean() - 1)),
            'ell_improvement_pct': float(
                100 * (np.nanmean(ell_ratio) - 1)
            ),
            'fraction_improved': float(np.mean(eta_o >= eta_u - 1e-12)),
            'spearman_gamma_mismatch': _safe_spearman(
                correlate_mismatch, records, alpha
            ),
            'spearman_flux_ell': _safe_spearman(
                correlate_flux_coherence, records, alpha
            ),
            'terminations': {
                value.value: terminations.count(value.value)
                for value in Termination
            },
        }
    return summary


def size_sweep_summary(records_by_size, alphas):
    """
    Средние и стандартные отклонения длины когерентности, потока и их
    отношений для каждого размера цепочки и alpha.

    Аргументы:
        records_by_size (dict): Размер цепочки -> список RealizationRecord.
        alphas (list): Показатели туннелирования.

    Возвращает:
        list: Словари с полями n_sites, alpha и парами <величина>_mean,
              <величина>_std.
    """
    rows = []
    for n_sites in sorted(records_by_size):
        for alpha in alphas:
            blocks = [
                block for _, block in _blocks(records_by_size[n_sites], alpha)
            ]
            if not blocks:
                continue
            quantities = {
                'ell_u': [block.ell_u for block in blocks],
                'ell_opt': [block.ell_opt for block in blocks],
                'eta_u': [block.eta_u for block in blocks],
                'eta_opt': [block.eta_opt for block in blocks],
                'ell_ratio': [block.ell_ratio for block in blocks],
                'flux_ratio': [block.flux_ratio for block in blocks],
            }
            row = {'n_sites': n_sites, 'alpha': alpha, 'n': len(blocks)}
            for name, values in quantities.items():
                values = np.asarray(values, dtype=float)
                row[f'{name}_mean'] = float(np.nanmean(values))
                row[f'{name}_std'] = float(np.nanstd(values))
            rows.append(row)
    return rows
