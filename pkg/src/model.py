import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from constants import J_MAX
from utils import derive_rng, require


@dataclass(frozen=True, eq=False)
class ChainSpec:
    """
    Цепочка сильной связи: энергии узлов и степенной закон туннелирования
    J_|n-m| = j_max / |n - m| ** alpha.
    """

    n_sites: int
    energies: np.ndarray = field(repr=False)
    alpha: float
    j_max: float = J_MAX

    def __post_init__(self):
        energies = np.asarray(self.energies, dtype=float)
        require(
            isinstance(self.n_sites, (int, np.integer)) and self.n_sites >= 1,
            f'Число узлов должно быть положительным целым: {self.n_sites}'
        )
        require(
            energies.shape == (self.n_sites,),
            f'Длина вектора энергий {energies.shape} не равна '
            f'числу узлов {self.n_sites}'
        )
        require(
            np.all(np.isfinite(energies)),
            'Энергии узлов должны быть конечными'
        )
        require(
            math.isfinite(self.alpha) and self.alpha >= 0,
            f'Показатель alpha должен быть конечным и >= 0: {self.alpha}'
        )
        require(
            math.isfinite(self.j_max) and self.j_max > 0,
            f'j_max должен быть конечным и > 0: {self.j_max}'
        )
        energies.setflags(write=False)
        object.__setattr__(self, 'n_sites', int(self.n_sites))
        object.__setattr__(self, 'energies', energies)
        object.__setattr__(self, 'alpha', float(self.alpha))
        object.__setattr__(self, 'j_max', float(self.j_max))

    def with_alpha(self, alpha):
        """Та же цепочка с другим показателем туннелирования."""
        return replace(self, alpha=alpha)

    def to_dict(self):
        return {
            'n_sites': self.n_sites,
            'energies': [float(value) for value in self.energies],
            'alpha': self.alpha,
            'j_max': self.j_max,
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data):
        """
        Восстанавливает цепочку из словаря с ключами
        n_sites, energies, alpha, j_max.

        Исключения:
            InvalidArgumentError: Если набор ключей отличается от ожидаемого.
        """
        expected = {'n_sites', 'energies', 'alpha', 'j_max'}
        require(
            set(data) == expected,
            f'Ключи описания цепочки {sorted(data)} не совпадают '
            f'с {sorted(expected)}'
        )
        return cls(
            n_sites=int(data['n_sites']),
            energies=np.asarray(data['energies'], dtype=float),
            alpha=float(data['alpha']),
            j_max=float(data['j_max']),
        )

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def build_ramp(n_sites, delta, offset=0.0, *, alpha, j_max=J_MAX):
    """
    Строит линейный потенциал: eps_n = offset - (n - 1) * delta.

    Аргументы:
        n_sites (int): Число узлов (>= 2).
        delta (float): Перепад энергии между соседями (> 0).
        offset (float, optional): Энергия первого узла (по умолчанию 0).
        alpha (float): Показатель дальности туннелирования.
        j_max (float, optional): Туннелирование между ближайшими соседями.

    Возвращает:
        ChainSpec: Цепочка с убывающими энергиями.

    Исключения:
        InvalidArgumentError: Если n_sites < 2 или delta <= 0.
    """
    require(n_sites >= 2, f'Линейный потенциал требует >= 2 узлов: {n_sites}')
    require(delta > 0, f'Перепад энергии должен быть > 0: {delta}')
    energies = offset - delta * np.arange(n_sites, dtype=float)
    return ChainSpec(n_sites, energies, alpha, j_max)


def sample_disorder(n_sites, seed):
    """
    Разыгрывает энергии узлов, независимо и равномерно на [0, 1).

    Аргументы:
        n_sites (int): Число узлов (>= 2).
        seed (int): Зерно потока PCG64; одинаковое зерно даёт
                    побитово одинаковые энергии.

    Возвращает:
        numpy.ndarray: Вектор энергий длины n_sites.
    """
    require(n_sites >= 2, f'Беспорядок требует >= 2 узлов: {n_sites}')
    return derive_rng(seed).random(n_sites)


def build_disordered(n_sites, seed, *, alpha, j_max=J_MAX):
    """Цепочка со случайными энергиями из sample_disorder."""
    return ChainSpec(n_sites, sample_disorder(n_sites, seed), alpha, j_max)


def tunneling_matrix(spec):
    """
    Матрица туннелирования: j_max / |n - m| ** alpha вне диагонали,
    нули на диагонали. Матрица плотная и симметричная.
    """
    sites = np.arange(spec.n_sites)
    distance = np.abs(sites[:, None] - sites[None, :]).astype(float)
    off_diagonal = distance > 0
    matrix = np.zeros((spec.n_sites, spec.n_sites))
    matrix[off_diagonal] = spec.j_max / distance[off_diagonal] ** spec.alpha
    return matrix


def hamiltonian(spec):
    """Гамильтониан сильной связи (вещественный, эрмитов)."""
    return (np.diag(spec.energies) + tunneling_matrix(spec)).astype(complex)
