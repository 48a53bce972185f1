"""
Аналитический поток для трёх узлов во втором порядке по туннелированию.
Служит независимой проверкой численного решателя.
"""
import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from constants import DENOMINATOR_FLOOR, GAMMA_L, J_MAX, THREE_SITE_DELTA
from exceptions import DegenerateInputError
from lindblad import NoiseProfile, build_liouvillian, chain_flux, flux
from lindblad import steady_state
from model import build_ramp
from utils import require


class CouplingMode(str, Enum):
    NN = 'nn'
    LR = 'lr'


@dataclass(frozen=True)
class ThreeSiteParams:
    """
    Параметры трёхузловой лестницы: eps = (0, -delta, -2 delta),
    Gamma_1 = 0.
    """

    j1: float
    j: float
    delta: float
    gamma2: float
    gamma3: float

    def __post_init__(self):
        require(self.delta > 0, f'delta должна быть > 0: {self.delta}')
        require(
            self.gamma2 >= 0 and self.gamma3 >= 0,
            f'Скорости дефазировки должны быть >= 0: '
            f'{self.gamma2}, {self.gamma3}'
        )


def _checked_ratio(numerator, denominator, name):
    if abs(denominator) < DENOMINATOR_FLOOR:
        message = f'Вырожденный знаменатель {denominator:.3g} в формуле {name}'
        logging.error(message, stack_info=True)
        raise DegenerateInputError(message)
    return numerator / denominator


def _nn_denominator(delta, g2, g3):
    return (
        4 * delta ** 2 * (3 * g2 + g3)
        + g2 * (3 * g2 ** 2 + 5 * g2 * g3 + 2 * g3 ** 2)
    )


def eta_nn(p):
    """
    Поток при туннелировании только между ближайшими соседями.

    Аргументы:
        p (ThreeSiteParams): Параметры; используется j1.

    Возвращает:
        float: eta_NN во втором порядке по j1.

    Исключения:
        DegenerateInputError: Если знаменатель меньше DENOMINATOR_FLOOR.
    """
    g2, g3 = p.gamma2, p.gamma3
    numerator = p.j1 ** 2 * 4 * g2 * (g2 + g3)
    return _checked_ratio(
        numerator, _nn_denominator(p.delta, g2, g3), 'eta_nn'
    )


def eta_lr(p):
    """
    Поток при одинаковом туннелировании j между всеми парами узлов.

    Аргументы:
        p (ThreeSiteParams): Параметры; используется j.

    Возвращает:
        float: eta_LR во втором порядке по j.

    Исключения:
        DegenerateInputError: Если знаменатель меньше DENOMINATOR_FLOOR.
    """
    g2, g3, delta = p.gamma2, p.gamma3, p.delta
    numerator = 8 * (
        g2 * g3 * (g2 + g3) ** 2
        + 2 * delta ** 2 * (4 * g2 ** 2 + 6 * g2 * g3 + g3 ** 2)
    ) * p.j ** 2
    denominator = (
        (16 * delta ** 2 + g3 ** 2) * _nn_denominator(delta, g2, g3)
    )
    return _checked_ratio(numerator, denominator, 'eta_lr')


def three_site_hamiltonian(p, mode):
    """Гамильтониан трёх узлов для заданной схемы туннелирования."""
    mode = CouplingMode(mode)
    energies = np.array([0.0, -p.delta, -2 * p.delta])
    h = np.diag(energies).astype(complex)
    nearest = p.j1 if mode is CouplingMode.NN else p.j
    far = 0.0 if mode is CouplingMode.NN else p.j
    h[0, 1] = h[1, 0] = h[1, 2] = h[2, 1] = nearest
    h[0, 2] = h[2, 0] = far
    return h


def numeric_flux(p, mode, gamma_l):
    """Численный поток трёх узлов при Gamma = (0, gamma2, gamma3)."""
    noise = NoiseProfile([0.0, p.gamma2, p.gamma3], gamma_l)
    rho = steady_state(
        build_liouvillian(three_site_hamiltonian(p, mode), noise)
    )
    return flux(rho, gamma_l)


def compare_to_numeric(p, mode, gamma_l):
    """
    Относительное расхождение численного и аналитического потоков.

    Аргументы:
        p (ThreeSiteParams): Параметры цепочки.
        mode (CouplingMode | str): 'nn' или 'lr'.
        gamma_l (float): Скорость захвата; должна быть много меньше j.

    Возвращает:
        float: |eta_numeric - eta_analytic| / eta_analytic.
    """
    mode = CouplingMode(mode)
    analytic = eta_nn(p) if mode is CouplingMode.NN else eta_lr(p)
    numeric = numeric_flux(p, mode, gamma_l)
    return abs(numeric - analytic) / analytic


def oracle_table(delta, gamma2, gamma3, couplings=(1e-2, 1e-3, 1e-4),
                 leak_ratio=0.1):
    """
    Таблица сходимости численного потока к аналитическому при
    уменьшении туннелирования (gamma_l = leak_ratio * J).

    Возвращает:
        list: Кортежи (режим, J, gamma_l, eta численный,
              eta аналитический, относительная ошибка).
    """
    rows = []
    for mode in CouplingMode:
        for coupling in couplings:
            p = ThreeSiteParams(coupling, coupling, delta, gamma2, gamma3)
            gamma_l = leak_ratio * coupling
            analytic = eta_nn(p) if mode is CouplingMode.NN else eta_lr(p)
            numeric = numeric_flux(p, mode, gamma_l)
            rows.append((
                mode.value, coupling, gamma_l, numeric, analytic,
                abs(numeric - analytic) / analytic,
            ))
    return rows


def flux_landscape(alpha, gamma2_grid, gamma3_grid, delta=THREE_SITE_DELTA,
                   j_max=J_MAX, gamma_l=GAMMA_L):
    """
    Численный поток трёхузловой лестницы на сетке (Gamma_2, Gamma_3)
    при Gamma_1 = 0.

    Возвращает:
        numpy.ndarray: Матрица потоков, строки - Gamma_2, столбцы - Gamma_3.
    """
    spec = build_ramp(3, delta, alpha=alpha, j_max=j_max)
    landscape = np.empty((len(gamma2_grid), len(gamma3_grid)))
    for row, gamma2 in enumerate(gamma2_grid):
        for column, gamma3 in enumerate(gamma3_grid):
            noise = NoiseProfile([0.0, gamma2, gamma3], gamma_l)
            landscape[row, column] = chain_flux(spec, noise)
    return landscape
