import numpy as np
import pytest

from conftest import RAMP_PEAKS
from exceptions import DegenerateSteadyStateError, InvalidArgumentError
from model import build_disordered, build_ramp, hamiltonian
try:
    import lindblad
except ModuleNotFoundError:
    assert False, 'Убедитесь что в директории `src` есть файл `lindblad.py`'
except ImportError:
    assert False, 'Убедитесь что в директории `src` есть файл `lindblad.py`'


def basis(n_sites, site):
    state = np.zeros((n_sites, n_sites), dtype=complex)
    state[site, site] = 1.0
    return state


def random_hermitian(n_sites, rng):
    a = rng.normal(size=(n_sites, n_sites)) + 1j * rng.normal(
        size=(n_sites, n_sites))
    return a + a.conj().T


def test_vectorize_is_column_stacking():
    matrix = np.arange(4).reshape(2, 2)
    assert list(lindblad.vectorize(matrix)) == [0, 2, 1, 3]
    assert np.array_equal(
        lindblad.unvectorize(lindblad.vectorize(matrix), 2), matrix
    )


def test_dephasing_only_decays_coherences():
    noise = lindblad.NoiseProfile([0.3, 0.5], 0.0)
    generator = lindblad.build_liouvillian(np.zeros((2, 2)), noise)
    rho = np.array([[0.6, 0.2 + 0.1j], [0.2 - 0.1j, 0.4]])
    got = generator.apply(rho)
    assert got[0, 1] == pytest.approx(-0.4 * rho[0, 1]), (
        'Дефазировка должна гасить rho_12 со скоростью (G1 + G2) / 2'
    )
    assert got[0, 0] == 0 and got[1, 1] == 0


def test_trapping_channel_moves_population():
    gamma_l = 0.25
    noise = lindblad.NoiseProfile(np.zeros(4), gamma_l)
    generator = lindblad.build_liouvillian(np.zeros((4, 4)), noise)
    got = generator.apply(basis(4, 3))
    expected = gamma_l * (basis(4, 0) - basis(4, 3))
    assert np.allclose(got, expected)


def test_trace_preserved():
    rng = np.random.default_rng(5)
    h = random_hermitian(5, rng)
    noise = lindblad.NoiseProfile(rng.random(5), 0.3)
    generator = lindblad.build_liouvillian(h, noise)
    rho = random_hermitian(5, rng)
    assert abs(np.trace(generator.apply(rho))) < 1e-12
    rows = generator.superop[lindblad.diagonal_indices(5)]
    assert np.allclose(rows.sum(axis=0), 0, atol=1e-12)


def test_build_liouvillian_dimension_mismatch():
    with pytest.raises(InvalidArgumentError):
        lindblad.build_liouvillian(
            np.zeros((3, 3)), lindblad.NoiseProfile(np.zeros(4), 0.1)
        )


@pytest.mark.parametrize('gammas, gamma_l', [
    ([-0.1, 0.1], 0.1),
    ([0.1, float('nan')], 0.1),
    ([0.1, 0.1], -1.0),
])
def test_noise_profile_invalid(gammas, gamma_l):
    with pytest.raises(InvalidArgumentError):
        lindblad.NoiseProfile(gammas, gamma_l)


@pytest.mark.parametrize('rho', [
    np.array([[0.5, 0.1], [0.2, 0.5]]),
    np.array([[0.6, 0.0], [0.0, 0.6]]),
    np.array([[1.2, 0.0], [0.0, -0.2]]),
])
def test_density_matrix_invariants(rho):
    with pytest.raises(InvalidArgumentError):
        lindblad.DensityMatrix(rho)


@pytest.mark.parametrize('alpha', [1.0, 5.0])
def test_maximally_mixed_without_trapping(alpha):
    spec = build_ramp(6, 0.2, alpha=alpha)
    noise = lindblad.NoiseProfile([0.1, 0.2, 0.3, 0.4, 0.5, 0.6], 0.0)
    rho = lindblad.solve_chain(spec, noise)
    assert np.allclose(rho.rho, np.eye(6) / 6, atol=1e-10)
    assert lindblad.flux(rho, 0.0) == 0.0


def test_flux_of_mixed_state():
    rho = lindblad.DensityMatrix(np.eye(12) / 12)
    assert lindblad.flux(rho, 0.1) == pytest.approx(1 / 120)


def test_degenerate_nullspace_detected():
    noise = lindblad.NoiseProfile([1.0, 1.0], 0.0)
    generator = lindblad.build_liouvillian(np.zeros((2, 2)), noise)
    with pytest.raises(DegenerateSteadyStateError):
        lindblad.steady_state(generator)


def test_coherent_ramp_population_decays(ramp12, uniform_noise):
    rho = lindblad.solve_chain(ramp12(5.0), uniform_noise(12, 0.0))
    population = np.real(np.diag(rho.rho))
    assert population[:6].sum() > population[6:].sum()
    assert population[0] > population[-1]


def test_steady_state_residual_and_invariants():
    for seed in range(10):
        spec = build_disordered(8, seed, alpha=3.0)
        gammas = np.random.default_rng(seed).random(8)
        noise = lindblad.NoiseProfile(gammas, 0.1)
        generator = lindblad.build_liouvillian(hamiltonian(spec), noise)
        rho = lindblad.steady_state(generator)
        residual = np.linalg.norm(
            generator.superop @ lindblad.vectorize(rho.rho)
        )
        assert residual <= 1e-10 * max(np.linalg.norm(generator.superop), 1)
        assert np.trace(rho.rho).real == pytest.approx(1, abs=1e-10)
        assert np.allclose(rho.rho, rho.rho.conj().T, atol=1e-10)
        assert np.linalg.eigvalsh(rho.rho).min() >= -1e-8
        assert lindblad.flux(rho, 0.1) >= -1e-9


def test_energy_shift_invariance(ramp12, uniform_noise):
    spec = ramp12(3.0)
    noise = uniform_noise(12, 0.05)
    h = hamiltonian(spec)
    rho = lindblad.steady_state(lindblad.build_liouvillian(h, noise))
    shifted = lindblad.steady_state(
        lindblad.build_liouvillian(h + 0.7 * np.eye(12), noise)
    )
    assert np.allclose(rho.rho, shifted.rho, atol=1e-9, rtol=0)


def test_flux_invariant_under_offset(uniform_noise):
    noise = uniform_noise(12, 0.1)
    base = lindblad.chain_flux(build_ramp(12, 1 / 12, alpha=1.0), noise)
    moved = lindblad.chain_flux(
        build_ramp(12, 1 / 12, 3.5, alpha=1.0), noise
    )
    assert moved == pytest.approx(base, rel=1e-9)


def test_uniform_peak_flux(ramp12, uniform_noise):
    gamma_u, eta_u = RAMP_PEAKS[1.0]
    got = lindblad.chain_flux(ramp12(1.0), uniform_noise(12, gamma_u))
    assert got == pytest.approx(eta_u, rel=0.01), (
        'Поток рампы при Gamma = 0.121 должен быть около 1.87e-3'
    )


@pytest.mark.parametrize('alpha', [1.0, 3.0, 5.0])
def test_zeno_suppression(alpha, ramp12, uniform_noise):
    spec = ramp12(alpha)
    peak = lindblad.chain_flux(spec, uniform_noise(12, RAMP_PEAKS[alpha][0]))
    strong = lindblad.chain_flux(spec, uniform_noise(12, 10.0))
    assert strong < peak


@pytest.mark.parametrize('alpha', [1.0, 3.0, 5.0])
def test_single_interior_maximum(alpha, ramp12, uniform_noise):
    spec = ramp12(alpha)
    grid = np.logspace(-4, 1, 41)
    fluxes = np.array([
        lindblad.chain_flux(spec, uniform_noise(12, gamma)) for gamma in grid
    ])
    peak = int(np.argmax(fluxes))
    assert 0 < peak < grid.size - 1
    assert np.all(np.diff(fluxes[:peak + 1]) > 0)
    assert np.all(np.diff(fluxes[peak:]) < 0)
