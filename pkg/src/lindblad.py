"""
Генератор Линдблада для цепочки с локальной дефазировкой и каналом
захвата-возобновления |1><N|, стационарное состояние и поток.

Векторизация по столбцам: vec(rho)[i + j * N] = rho[i, j], так что
vec(A X B) = (B.T kron A) vec(X).
"""
import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from constants import (DEGENERACY_TOL, HERMITIAN_TOL, PSD_TOL, RESIDUAL_TOL,
                       TRACE_TOL)
from exceptions import DegenerateSteadyStateError, SteadyStateSolverError
from model import hamiltonian
from utils import require


@dataclass(frozen=True, eq=False)
class NoiseProfile:
    """Скорости дефазировки Gamma_n и скорость захвата gamma_l."""

    gammas: np.ndarray = field(repr=False)
    gamma_l: float

    def __post_init__(self):
        gammas = np.array(self.gammas, dtype=float)
        require(gammas.ndim == 1, 'Скорости дефазировки должны быть вектором')
        require(
            np.all(np.isfinite(gammas)) and np.all(gammas >= 0),
            f'Скорости дефазировки должны быть конечными и >= 0: {gammas}'
        )
        require(
            np.isfinite(self.gamma_l) and self.gamma_l >= 0,
            f'gamma_l должна быть конечной и >= 0: {self.gamma_l}'
        )
        gammas.setflags(write=False)
        object.__setattr__(self, 'gammas', gammas)
        object.__setattr__(self, 'gamma_l', float(self.gamma_l))

    @classmethod
    def uniform(cls, n_sites, gamma, gamma_l):
        return cls(np.full(n_sites, float(gamma)), gamma_l)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Эрмитова неотрицательная матрица плотности с единичным следом."""

    rho: np.ndarray = field(repr=False)

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        require(
            rho.ndim == 2 and rho.shape[0] == rho.shape[1],
            f'Матрица плотности должна быть квадратной: {rho.shape}'
        )
        require(
            np.max(np.abs(rho - rho.conj().T)) <= HERMITIAN_TOL,
            'Матрица плотности не эрмитова'
        )
        require(
            abs(np.trace(rho) - 1) <= TRACE_TOL,
            f'След матрицы плотности не равен 1: {np.trace(rho)}'
        )
        require(
            np.linalg.eigvalsh(rho).min() >= PSD_TOL,
            'Матрица плотности не является неотрицательно определённой'
        )
        rho.setflags(write=False)
        object.__setattr__(self, 'rho', rho)

    @property
    def n_sites(self):
        return self.rho.shape[0]

    def to_dict(self):
        return {
            'real': self.rho.real.tolist(),
            'imag': self.rho.imag.tolist(),
        }


@dataclass(frozen=True, eq=False)
class Liouvillian:
    """Супероператор N^2 x N^2, действующий на vec(rho)."""

    superop: np.ndarray = field(repr=False)

    def __post_init__(self):
        superop = np.array(self.superop, dtype=complex)
        superop.setflags(write=False)
        object.__setattr__(self, 'superop', superop)

    @property
    def n_sites(self):
        return int(round(np.sqrt(self.superop.shape[0])))

    def apply(self, rho):
        """Производная rho по времени для матрицы rho."""
        return unvectorize(self.superop @ vectorize(rho), self.n_sites)


def vectorize(matrix):
    return np.asarray(matrix).reshape(-1, order='F')


def unvectorize(vector, n_sites):
    return np.asarray(vector).reshape((n_sites, n_sites), order='F')


def diagonal_indices(n_sites):
    """Позиции элементов rho_kk в vec(rho)."""
    return np.arange(n_sites) * (n_sites + 1)


def dissipator(jump):
    """Супероператор D[L](rho) = L rho L^+ - {L^+ L, rho} / 2."""
    jump = np.asarray(jump, dtype=complex)
    identity = np.eye(jump.shape[0])
    product = jump.conj().T @ jump
    return (
        np.kron(jump.conj(), jump)
        - 0.5 * np.kron(identity, product)
        - 0.5 * np.kron(product.T, identity)
    )


def dephasing_derivative(n_sites, site):
    """
    Диагональ супероператора D[|n><n|] (производная генератора
    по Gamma_n): -1/2 для элементов rho_ij, у которых ровно один
    индекс равен site.
    """
    in_row = np.arange(n_sites) == site
    mask = np.logical_xor(in_row[:, None], in_row[None, :])
    return vectorize(-0.5 * mask.astype(float))


def _dephasing_diagonal(gammas):
    # Сумма Gamma_n D[|n><n|] диагональна: -(Gamma_i + Gamma_j) / 2 вне
    # диагонали rho, ноль на диагонали.
    rates = -0.5 * (gammas[:, None] + gammas[None, :])
    np.fill_diagonal(rates, 0.0)
    return vectorize(rates)


def build_liouvillian(H, noise):
    """
    Собирает генератор
    -i[H, rho] + sum_n Gamma_n D[|n><n|] + gamma_l D[|1><N|].

    Аргументы:
        H (numpy.ndarray): Эрмитов гамильтониан N x N.
        noise (NoiseProfile): Скорости дефазировки и захвата.

    Возвращает:
        Liouvillian: Супероператор в векторизации по столбцам.

    Исключения:
        InvalidArgumentError: Если размерности не согласованы.
    """
    h = np.asarray(H, dtype=complex)
    require(
        h.ndim == 2 and h.shape[0] == h.shape[1],
        f'Гамильтониан должен быть квадратной матрицей: {h.shape}'
    )
    n_sites = h.shape[0]
    require(
        noise.gammas.shape == (n_sites,),
        f'Число скоростей дефазировки {noise.gammas.shape[0]} '
        f'не равно размеру гамильтониана {n_sites}'
    )
    identity = np.eye(n_sites)
    superop = -1j * (np.kron(identity, h) - np.kron(h.T, identity))
    superop += np.diag(_dephasing_diagonal(noise.gammas))
    if noise.gamma_l > 0:
        trap = np.zeros((n_sites, n_sites))
        trap[0, n_sites - 1] = 1.0
        superop += noise.gamma_l * dissipator(trap)
    return Liouvillian(superop)


def constrained_solve(superop, row=0):
    """
    Решает L x = 0 при tr(x) = 1, заменяя строку row (строку одного из
    диагональных элементов rho) на условие следа.

    Аргументы:
        superop (numpy.ndarray): Матрица генератора.
        row (int, optional): Заменяемая строка (по умолчанию 0).

    Возвращает:
        tuple: (x, lu_piv) - решение и LU-разложение системы для
               повторных (в том числе сопряжённых) решений.

    Исключения:
        DegenerateSteadyStateError: Если система вырождена.
        SteadyStateSolverError: Если решение не конечно.
    """
    n_sites = int(round(np.sqrt(superop.shape[0])))
    system = np.array(superop, dtype=complex)
    system[row, :] = 0.0
    system[row, diagonal_indices(n_sites)] = 1.0
    rhs = np.zeros(system.shape[0], dtype=complex)
    rhs[row] = 1.0
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', linalg.LinAlgWarning)
        lu_piv = linalg.lu_factor(system, check_finite=False)
    if np.any(np.diag(lu_piv[0]) == 0):
        message = 'Ядро генератора имеет размерность больше 1'
        logging.error(message, stack_info=True)
        raise DegenerateSteadyStateError(message)
    x = linalg.lu_solve(lu_piv, rhs, check_finite=False)
    if not np.all(np.isfinite(x)):
        message = 'Линейный решатель вернул неконечное решение'
        logging.error(message, stack_info=True)
        raise SteadyStateSolverError(message)
    return x, lu_piv


def steady_state(liouvillian, check_degeneracy=True):
    """
    Находит стационарное состояние прямым плотным решением.

    Аргументы:
        liouvillian (Liouvillian): Генератор.
        check_degeneracy (bool, optional): Повторить решение с другой
                                           заменённой строкой и сравнить.

    Возвращает:
        DensityMatrix: Стационарное состояние.

    Исключения:
        DegenerateSteadyStateError: Если ядро генератора вырождено.
        SteadyStateSolverError: Если невязка велика или состояние
                                не является матрицей плотности.
    """
    x, _ = constrained_solve(liouvillian.superop)
    return _to_density_matrix(liouvillian, x, check_degeneracy)


def _to_density_matrix(liouvillian, x, check_degeneracy):
    superop = liouvillian.superop
    n_sites = liouvillian.n_sites
    residual = np.linalg.norm(superop @ x)
    if residual > RESIDUAL_TOL * max(np.linalg.norm(superop), 1.0):
        message = f'Невязка стационарного решения слишком велика: {residual}'
        logging.error(message, stack_info=True)
        raise SteadyStateSolverError(message)
    if check_degeneracy and n_sites > 1:
        other, _ = constrained_solve(superop, row=superop.shape[0] - 1)
        if np.max(np.abs(other - x)) > DEGENERACY_TOL:
            message = (
                'Решения с разными заменёнными строками расходятся: '
                'стационарное состояние не единственно'
            )
            logging.error(message, stack_info=True)
            raise DegenerateSteadyStateError(message)
    rho = unvectorize(x, n_sites)
    rho = 0.5 * (rho + rho.conj().T)
    lowest = np.linalg.eigvalsh(rho).min()
    if lowest < PSD_TOL:
        message = f'Стационарное состояние имеет собственное число {lowest}'
        logging.error(message, stack_info=True)
        raise SteadyStateSolverError(message)
    return DensityMatrix(rho)


def flux(rho, gamma_l):
    """Поток населённости с последнего узла: gamma_l * Re(rho_NN)."""
    return float(gamma_l * rho.rho[-1, -1].real)


def solve_chain(spec, noise, check_degeneracy=True):
    """Стационарное состояние цепочки spec при шуме noise."""
    return steady_state(
        build_liouvillian(hamiltonian(spec), noise), check_degeneracy
    )


def chain_flux(spec, noise, check_degeneracy=True):
    """Стационарный поток цепочки spec при шуме noise."""
    return flux(solve_chain(spec, noise, check_degeneracy), noise.gamma_l)
