import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import partial

import numpy as np
from scipy import optimize
from tqdm import tqdm

from constants import (ADAMAX_EPSILON, BETA1, BETA2, GAMMA_UPPER_BOUND,
                       GAMMA_LOWER_BOUND, GRAD_TOL, J_MAX, LEARNING_RATE,
                       MAX_STEPS, MIN_STEPS, PEAK_XTOL)
from exceptions import EnaqtError, EnsembleError, OptimizationError
from gradient import flux_and_gradient
from lindblad import NoiseProfile, chain_flux, solve_chain
from model import build_ramp
from observables import coherence_length
from utils import derive_rng, parallel_map, require


class Termination(str, Enum):
    CONVERGED = 'converged'
    BOUNDARY_HIT = 'boundary_hit'
    MAX_STEPS = 'max_steps'


@dataclass(frozen=True)
class OptimizerConfig:
    """Параметры подъёма Adamax по log10 Gamma и условия остановки."""

    learning_rate: float = LEARNING_RATE
    beta1: float = BETA1
    beta2: float = BETA2
    epsilon: float = ADAMAX_EPSILON
    min_steps: int = MIN_STEPS
    max_steps: int = MAX_STEPS
    grad_tol: float = GRAD_TOL
    lower_bound: float = GAMMA_LOWER_BOUND
    upper_bound: float = GAMMA_UPPER_BOUND
    strict_boundary_stop: bool = False
    trajectory_every: int = 0

    def __post_init__(self):
        require(
            0 < self.lower_bound < self.upper_bound,
            f'Границы должны удовлетворять 0 < lower < upper: '
            f'{self.lower_bound}, {self.upper_bound}'
        )
        require(
            0 <= self.min_steps <= self.max_steps,
            f'Требуется 0 <= min_steps <= max_steps: '
            f'{self.min_steps}, {self.max_steps}'
        )
        require(
            self.grad_tol > 0, f'grad_tol должен быть > 0: {self.grad_tol}'
        )
        require(
            self.learning_rate > 0,
            f'learning_rate должен быть > 0: {self.learning_rate}'
        )
        require(
            0 <= self.beta1 < 1 and 0 <= self.beta2 < 1,
            f'Коэффициенты затухания должны лежать в [0, 1): '
            f'{self.beta1}, {self.beta2}'
        )

    @property
    def log_bounds(self):
        return np.log10(self.lower_bound), np.log10(self.upper_bound)


@dataclass
class OptimizationResult:
    gammas: np.ndarray
    flux: float
    termination: Termination
    steps: int
    trajectory: list = field(default_factory=list)

    def to_dict(self):
        return {
            'gammas': [float(value) for value in self.gammas],
            'flux': self.flux,
            'termination': self.termination.value,
            'steps': self.steps,
        }


@dataclass
class ScanResult:
    grid: np.ndarray
    fluxes: np.ndarray
    gamma_u: float
    eta_u: float


class Adamax:
    """
    Adamax для подъёма: экспоненциальное среднее градиента и
    бесконечная норма вместо второго момента.
    """

    def __init__(self, size, learning_rate, beta1, beta2, epsilon):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.t = 0
        self.m = np.zeros(size)
        self.u = np.zeros(size)

    def step(self, grad):
        self.t += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * grad
        self.u = np.maximum(self.beta2 * self.u, np.abs(grad))
        m_hat = self.m / (1 - self.beta1 ** self.t)
        return self.learning_rate * m_hat / (self.u + self.epsilon)


def _uniform_flux(spec, gamma_l, gamma):
    noise = NoiseProfile.uniform(spec.n_sites, gamma, gamma_l)
    return chain_flux(spec, noise)


def scan_uniform(spec, gamma_l, grid, xtol=PEAK_XTOL):
    """
    Сканирует поток при одинаковой дефазировке на всех узлах и уточняет
    максимум золотым сечением между соседними точками сетки.

    Аргументы:
        spec (ChainSpec): Цепочка.
        gamma_l (float): Скорость захвата.
        grid (array-like): Строго возрастающая положительная сетка Gamma.
        xtol (float, optional): Относительная точность положения пика.

    Возвращает:
        ScanResult: Кривая (grid, fluxes), Gamma_u и eta_u.

    Исключения:
        InvalidArgumentError: Если сетка пуста, не положительна
                              или не возрастает.
    """
    grid = np.asarray(grid, dtype=float)
    require(
        grid.ndim == 1 and grid.size >= 1,
        'Сетка равномерной дефазировки пуста'
    )
    require(np.all(grid > 0), 'Сетка должна быть положительной')
    require(
        np.all(np.diff(grid) > 0), 'Сетка должна строго возрастать'
    )
    fluxes = np.array([
        _uniform_flux(spec, gamma_l, gamma)
        for gamma in tqdm(grid, desc='scan', leave=False)
    ])
    peak = int(np.argmax(fluxes))
    gamma_u, eta_u = grid[peak], fluxes[peak]
    if 0 < peak < grid.size - 1:
        bracket = (grid[peak - 1], grid[peak], grid[peak + 1])
        try:
            refined = optimize.minimize_scalar(
                lambda gamma: -_uniform_flux(spec, gamma_l, gamma),
                bracket=bracket, method='golden', tol=xtol,
            )
        except ValueError:
            logging.warning(
                f'Не удалось уточнить пик около Gamma = {gamma_u:.3g}'
            )
        else:
            if -refined.fun >= eta_u:
                gamma_u, eta_u = float(refined.x), float(-refined.fun)
    else:
        logging.warning(
            f'Максимум потока на краю сетки: Gamma = {gamma_u:.3g}'
        )
    logging.info(
        f'Пик равномерной дефазировки: Gamma_u = {gamma_u:.6g}, '
        f'eta_u = {eta_u:.6g}'
    )
    return ScanResult(grid, fluxes, float(gamma_u), float(eta_u))


def _on_boundary(log_gammas, cfg):
    low, high = cfg.log_bounds
    return (log_gammas <= low) | (log_gammas >= high)


def _projected(grad, log_gammas, cfg):
    # На границе оставляем только компоненты, направленные внутрь области.
    low, high = cfg.log_bounds
    blocked = ((log_gammas <= low) & (grad < 0)) | (
        (log_gammas >= high) & (grad > 0))
    return np.where(blocked, 0.0, grad)


def _stationary(grad, log_gammas, cfg):
    """Причина остановки в стационарной точке или None."""
    if np.max(np.abs(grad)) < cfg.grad_tol:
        return Termination.CONVERGED
    if np.max(np.abs(_projected(grad, log_gammas, cfg))) < cfg.grad_tol:
        return Termination.BOUNDARY_HIT
    return None


def optimize_local(spec, gamma_l, init, cfg=OptimizerConfig(), active=None):
    """
    Подъём Adamax по log10 Gamma_n с обрезкой по границам.

    Аргументы:
        spec (ChainSpec): Цепочка.
        gamma_l (float): Скорость захвата.
        init (array-like): Начальные Gamma_n > 0; обрезаются по границам.
        cfg (OptimizerConfig, optional): Параметры оптимизатора.
        active (array-like, optional): Маска оптимизируемых узлов;
                                       остальные сохраняют начальные
                                       значения.

    Возвращает:
        OptimizationResult: Итоговые Gamma_n, поток, причина остановки,
                            число шагов и снимки траектории.

    Исключения:
        OptimizationError: Если градиент или решатель дали сбой;
                           содержит пройденную траекторию.
    """
    init = np.asarray(init, dtype=float)
    require(
        init.shape == (spec.n_sites,),
        f'Длина начального вектора {init.shape} не равна {spec.n_sites}'
    )
    require(np.all(init > 0), f'Начальные Gamma_n должны быть > 0: {init}')
    mask = (
        np.ones(spec.n_sites, dtype=bool) if active is None
        else np.asarray(active, dtype=bool)
    )
    low, high = cfg.log_bounds
    log_gammas = np.log10(init)
    log_gammas[mask] = np.clip(log_gammas[mask], low, high)
    adamax = Adamax(
        spec.n_sites, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon
    )
    trajectory = []

    def evaluate(values):
        noise = NoiseProfile(10 ** values, gamma_l)
        eta, gradient = flux_and_gradient(spec, noise)
        return eta, np.where(mask, gradient.values, 0.0)

    steps = 0
    termination = Termination.MAX_STEPS
    try:
        eta, grad = evaluate(log_gammas)
        initial_eta = eta
        best_eta, best_log = eta, log_gammas.copy()
        while True:
            if cfg.trajectory_every and steps % cfg.trajectory_every == 0:
                trajectory.append((steps, 10 ** log_gammas, eta))
            boundary = np.any(_on_boundary(log_gammas, cfg) & mask)
            if boundary and cfg.strict_boundary_stop:
                termination = Termination.BOUNDARY_HIT
                break
            stationary = _stationary(grad, log_gammas, cfg)
            if stationary is not None and steps >= cfg.min_steps:
                termination = stationary
                break
            if steps >= cfg.max_steps:
                termination = Termination.MAX_STEPS
                break
            steps += 1
            if stationary is not None:
                # До min_steps стационарная точка остаётся на месте.
                continue
            log_gammas = log_gammas + adamax.step(grad)
            log_gammas[mask] = np.clip(log_gammas[mask], low, high)
            eta, grad = evaluate(log_gammas)
            if eta > best_eta:
                best_eta, best_log = eta, log_gammas.copy()
        if eta < initial_eta - 1e-12:
            logging.warning(
                f'Итоговый поток {eta:.6g} ниже начального '
                f'{initial_eta:.6g}; возвращается лучшая точка {best_eta:.6g}'
            )
            log_gammas = best_log
            eta, grad = evaluate(log_gammas)
            termination = _stationary(grad, log_gammas, cfg)
            if termination is None:
                on_boundary = np.any(_on_boundary(log_gammas, cfg) & mask)
                termination = (
                    Termination.BOUNDARY_HIT
                    if cfg.strict_boundary_stop and on_boundary
                    else Termination.MAX_STEPS
                )
    except EnaqtError as error:
        message = f'Оптимизация прервана на шаге {steps}: {error}'
        logging.error(message, stack_info=True)
        raise OptimizationError(message, trajectory) from error

    if cfg.trajectory_every:
        if trajectory and trajectory[-1][0] == steps:
            trajectory.pop()
        trajectory.append((steps, 10 ** log_gammas, eta))
    logging.info(
        f'Оптимизация завершена: {termination.value}, шагов {steps}, '
        f'eta = {eta:.6g}'
    )
    return OptimizationResult(
        10 ** log_gammas, float(eta), termination, steps, trajectory
    )


def draw_initial_gammas(n_sites, seed, index, cfg=OptimizerConfig()):
    """Начальные Gamma_n старта index, лог-равномерно в границах."""
    low, high = cfg.log_bounds
    return 10 ** derive_rng(seed, index).uniform(low, high, n_sites)


def _run_start(index, spec, gamma_l, seed, cfg):
    init = draw_initial_gammas(spec.n_sites, seed, index, cfg)
    try:
        return optimize_local(spec, gamma_l, init, cfg)
    except OptimizationError as error:
        logging.warning(f'Старт {index} не удался: {error}')
        return None


def multi_start(spec, gamma_l, n_starts, seed, cfg=OptimizerConfig(),
                workers=1):
    """
    Запускает optimize_local из n_starts случайных точек и возвращает
    результат с наибольшим потоком.

    Аргументы:
        spec (ChainSpec): Цепочка.
        gamma_l (float): Скорость захвата.
        n_starts (int): Число стартов (>= 1).
        seed (int): Зерно; старт i использует поток (seed, i).
        cfg (OptimizerConfig, optional): Параметры оптимизатора.
        workers (int, optional): Число процессов.

    Возвращает:
        OptimizationResult: Лучший результат; при равенстве потоков
                            выбирается старт с меньшим номером.

    Исключения:
        EnsembleError: Если не удался ни один старт.
    """
    require(n_starts >= 1, f'Число стартов должно быть >= 1: {n_starts}')
    results = parallel_map(
        partial(_run_start, spec=spec, gamma_l=gamma_l, seed=seed, cfg=cfg),
        range(n_starts), workers=workers, desc='starts',
    )
    succeeded = [result for result in results if result is not None]
    if not succeeded:
        message = f'Все {n_starts} стартов оптимизации завершились ошибкой'
        logging.error(message, stack_info=True)
        raise EnsembleError(message)
    best = max(succeeded, key=lambda result: result.flux)
    logging.info(
        f'Лучший из {len(succeeded)} стартов: eta = {best.flux:.6g} '
        f'({best.termination.value})'
    )
    return best


def ramp_size_sweep(sizes, delta, alphas, gamma_l, grid, n_starts, seed,
                    cfg=OptimizerConfig(), workers=1, j_max=J_MAX):
    """
    Для каждого размера цепочки и alpha находит Gamma_u и оптимизирует
    локальную дефазировку при фиксированном перепаде delta.

    Возвращает:
        list: Словари с полями n_sites, alpha, gamma_u, eta_u, eta_opt,
              ell_u, ell_opt, flux_ratio, ell_ratio.
    """
    rows = []
    for n_sites in sizes:
        for alpha in alphas:
            spec = build_ramp(n_sites, delta, alpha=alpha, j_max=j_max)
            scan = scan_uniform(spec, gamma_l, grid)
            best = multi_start(spec, gamma_l, n_starts, seed, cfg, workers)
            rho_u = solve_chain(
                spec, NoiseProfile.uniform(n_sites, scan.gamma_u, gamma_l)
            )
            rho_o = solve_chain(spec, NoiseProfile(best.gammas, gamma_l))
            ell_u, ell_o = coherence_length(rho_u), coherence_length(rho_o)
            rows.append({
                'n_sites': n_sites,
                'alpha': alpha,
                'gamma_u': scan.gamma_u,
                'eta_u': scan.eta_u,
                'eta_opt': best.flux,
                'ell_u': ell_u,
                'ell_opt': ell_o,
                'flux_ratio': best.flux / scan.eta_u,
                'ell_ratio': ell_o / ell_u if ell_u > 0 else float('nan'),
            })
    return rows

