import numpy as np

from constants import DENOMINATOR_FLOOR
from utils import require


def populations(rho):
    """Населённости узлов Re(rho_nn)."""
    return np.real(np.diag(rho.rho)).copy()


def coherence_map(rho):
    """
    Карта когерентностей |rho_mn| с обнулённой диагональю.

    Аргументы:
        rho (DensityMatrix): Состояние.

    Возвращает:
        numpy.ndarray: Симметричная неотрицательная матрица N x N.
    """
    magnitudes = np.abs(rho.rho)
    np.fill_diagonal(magnitudes, 0.0)
    return magnitudes


def coherence_length(rho):
    """
    Средневзвешенное по |rho_mn| расстояние |m - n| между узлами
    внедиагональных элементов. Для диагонального состояния равно 0.
    """
    magnitudes = coherence_map(rho)
    total = magnitudes.sum()
    if total < DENOMINATOR_FLOOR:
        return 0.0
    sites = np.arange(magnitudes.shape[0])
    distance = np.abs(sites[:, None] - sites[None, :])
    return float((distance * magnitudes).sum() / total)


def ratio_map(rho_o, rho_u):
    """
    Поэлементное отношение |rho_o| / |rho_u| с нулевой диагональю.

    Аргументы:
        rho_o (DensityMatrix): Состояние при оптимизированной дефазировке.
        rho_u (DensityMatrix): Состояние при равномерной дефазировке.

    Возвращает:
        numpy.ndarray: Отношения; там, где |rho_u| < 1e-14, стоит NaN.
    """
    require(
        rho_o.rho.shape == rho_u.rho.shape,
        f'Размеры состояний не совпадают: {rho_o.rho.shape}, '
        f'{rho_u.rho.shape}'
    )
    numerator = np.abs(rho_o.rho)
    denominator = np.abs(rho_u.rho)
    ratios = np.full(numerator.shape, np.nan)
    valid = denominator >= DENOMINATOR_FLOOR
    ratios[valid] = numerator[valid] / denominator[valid]
    np.fill_diagonal(ratios, 0.0)
    return ratios


def local_mismatch(energies):
    """
    Локальное рассогласование энергий внутренних узлов:
    |eps_n - eps_{n-1}| + |eps_n - eps_{n+1}|, n = 2..N-1.

    Исключения:
        InvalidArgumentError: Если узлов меньше трёх.
    """
    energies = np.asarray(energies, dtype=float)
    require(
        energies.ndim == 1 and energies.size >= 3,
        f'Локальное рассогласование требует >= 3 узлов: {energies.size}'
    )
    inner = energies[1:-1]
    return np.abs(inner - energies[:-2]) + np.abs(inner - energies[2:])
