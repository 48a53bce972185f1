"""
Производные стационарного потока по log10 Gamma_n.

Стационарное состояние x задано системой A x = b, где A - генератор с
одной строкой, заменённой условием следа. Поскольку dA/dGamma_n
диагональна, градиент требует одного сопряжённого решения A^T lam = e_NN
и N поэлементных свёрток:
    d eta / d Gamma_n = -gamma_l Re(lam^T (dA/dGamma_n) x).
"""
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from constants import FD_STEP
from lindblad import (NoiseProfile, build_liouvillian, chain_flux,
                      constrained_solve, dephasing_derivative)
from model import hamiltonian
from utils import require


@dataclass(frozen=True, eq=False)
class FluxGradient:
    """Вектор d eta / d log10 Gamma_n."""

    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        require(
            np.all(np.isfinite(values)), f'Градиент не конечен: {values}'
        )
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)


def _require_positive(noise):
    require(
        np.all(noise.gammas > 0),
        f'Дифференцирование по log10 Gamma требует Gamma_n > 0: '
        f'{noise.gammas}'
    )


def flux_and_gradient(spec, noise):
    """
    Поток и точный градиент по log10 Gamma_n за одно LU-разложение.

    Аргументы:
        spec (ChainSpec): Цепочка.
        noise (NoiseProfile): Шум; все Gamma_n > 0.

    Возвращает:
        tuple: (eta, FluxGradient).

    Исключения:
        InvalidArgumentError: Если какая-либо Gamma_n <= 0.
        DegenerateSteadyStateError: Если стационарное состояние
                                    не единственно.
    """
    _require_positive(noise)
    liouvillian = build_liouvillian(hamiltonian(spec), noise)
    x, lu_piv = constrained_solve(liouvillian.superop)
    n_sites = spec.n_sites
    target = np.zeros(n_sites ** 2, dtype=complex)
    target[n_sites ** 2 - 1] = 1.0
    adjoint = linalg.lu_solve(lu_piv, target, trans=1, check_finite=False)
    weighted = adjoint * x
    raw = np.array([
        -noise.gamma_l * np.real(
            np.dot(dephasing_derivative(n_sites, site), weighted)
        )
        for site in range(n_sites)
    ])
    eta = float(noise.gamma_l * x[n_sites ** 2 - 1].real)
    return eta, FluxGradient(raw * noise.gammas * np.log(10))


def flux_gradient(spec, noise):
    """Точный градиент потока по log10 Gamma_n (сопряжённый метод)."""
    return flux_and_gradient(spec, noise)[1]


def fd_gradient(spec, noise, step=FD_STEP):
    """
    Центральные конечные разности потока по log10 Gamma_n с новым
    решением стационарной задачи для каждого возмущения.

    Аргументы:
        spec (ChainSpec): Цепочка.
        noise (NoiseProfile): Шум; все Gamma_n > 0.
        step (float, optional): Шаг по log10 Gamma (по умолчанию 1e-4).

    Возвращает:
        FluxGradient: Приближённый градиент.
    """
    _require_positive(noise)
    require(step > 0, f'Шаг конечных разностей должен быть > 0: {step}')
    log_gammas = np.log10(noise.gammas)
    values = np.empty(spec.n_sites)
    for site in range(spec.n_sites):
        shifted = []
        for sign in (1, -1):
            trial = log_gammas.copy()
            trial[site] += sign * step
            shifted.append(chain_flux(
                spec, NoiseProfile(10 ** trial, noise.gamma_l)
            ))
        values[site] = (shifted[0] - shifted[1]) / (2 * step)
    return FluxGradient(values)
