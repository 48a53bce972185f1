import numpy as np
import pytest

from exceptions import InvalidArgumentError
try:
    import model
except ModuleNotFoundError:
    assert False, 'Убедитесь что в директории `src` есть файл `model.py`'
except ImportError:
    assert False, 'Убедитесь что в директории `src` есть файл `model.py`'


def test_model_file():
    for name in ('ChainSpec', 'build_ramp', 'sample_disorder',
                 'tunneling_matrix', 'hamiltonian'):
        assert hasattr(model, name), (
            f'Добавьте `{name}` в модуль `model.py`.'
        )


@pytest.mark.parametrize('n_sites, delta, offset, first, last', [
    (12, 1 / 12, 0.0, 0.0, -11 / 12),
    (2, 1.0, 5.0, 5.0, 4.0),
])
def test_build_ramp(n_sites, delta, offset, first, last):
    got = model.build_ramp(n_sites, delta, offset, alpha=1.0)
    assert got.energies.shape == (n_sites,)
    assert got.energies[0] == pytest.approx(first), (
        'Энергия первого узла рампы должна равняться offset'
    )
    assert got.energies[-1] == pytest.approx(last), (
        'Полный перепад рампы должен быть (N - 1) * delta'
    )
    assert np.allclose(np.diff(got.energies), -delta)


def test_build_ramp_half_bias_total_drop():
    got = model.build_ramp(12, 0.5 / 12, alpha=5.0)
    assert got.energies[0] - got.energies[-1] == pytest.approx(0.458, abs=1e-3)


@pytest.mark.parametrize('n_sites, delta', [
    (1, 0.1),
    (12, 0.0),
    (12, -0.1),
])
def test_build_ramp_invalid(n_sites, delta):
    with pytest.raises(InvalidArgumentError):
        model.build_ramp(n_sites, delta, alpha=1.0)


def test_invalid_argument_is_value_error():
    with pytest.raises(ValueError):
        model.build_ramp(1, 0.1, alpha=1.0)


@pytest.mark.parametrize('alpha, j_max', [
    (float('inf'), 0.1),
    (-1.0, 0.1),
    (1.0, 0.0),
    (1.0, float('nan')),
])
def test_chain_spec_rejects_bad_parameters(alpha, j_max):
    with pytest.raises(InvalidArgumentError):
        model.ChainSpec(3, np.zeros(3), alpha, j_max)


def test_chain_spec_rejects_wrong_length():
    with pytest.raises(InvalidArgumentError):
        model.ChainSpec(3, np.zeros(4), 1.0)


def test_sample_disorder_deterministic():
    first = model.sample_disorder(12, 42)
    second = model.sample_disorder(12, 42)
    assert np.array_equal(first, second), (
        'Одинаковое зерно должно давать одинаковые энергии'
    )
    assert not np.array_equal(first, model.sample_disorder(12, 43))
    assert first.shape == (12,)
    assert np.all((first >= 0) & (first < 1))


def test_sample_disorder_mean():
    values = model.sample_disorder(100_000, 3)
    assert abs(values.mean() - 0.5) < 0.01
    assert np.all((values >= 0) & (values < 1))


def test_sample_disorder_invalid():
    with pytest.raises(InvalidArgumentError):
        model.sample_disorder(1, 0)


@pytest.mark.parametrize('alpha, j13', [
    (1.0, 0.05),
    (5.0, 3.125e-3),
    (0.0, 0.1),
])
def test_tunneling_matrix(alpha, j13):
    spec = model.build_ramp(3, 0.1, alpha=alpha, j_max=0.1)
    got = model.tunneling_matrix(spec)
    assert got[0, 1] == pytest.approx(0.1)
    assert got[0, 2] == pytest.approx(j13)
    assert np.array_equal(got, got.T)
    assert np.all(np.diag(got) == 0)
    assert np.all(got >= 0)


def test_tunneling_nearest_neighbour_regime():
    got = model.tunneling_matrix(model.build_ramp(12, 1 / 12, alpha=5.0))
    assert got[0, 2] / got[0, 1] < 0.04


def test_hamiltonian_two_sites():
    delta = 0.3
    got = model.hamiltonian(model.build_ramp(2, delta, alpha=3.0))
    expected = np.array([[0, 0.1], [0.1, -delta]])
    assert np.allclose(got, expected)


def test_hamiltonian_hermitian_and_shift(ramp12):
    spec = ramp12(1.0)
    h = model.hamiltonian(spec)
    assert np.array_equal(h, h.conj().T)
    shifted = model.ChainSpec(12, spec.energies + 0.7, spec.alpha)
    eigenvalues = np.linalg.eigvalsh(h)
    shifted_eigenvalues = np.linalg.eigvalsh(model.hamiltonian(shifted))
    assert np.allclose(shifted_eigenvalues, eigenvalues + 0.7, atol=1e-12)


def test_chain_spec_json():
    spec = model.build_disordered(6, 11, alpha=3.0)
    restored = model.ChainSpec.from_json(spec.to_json())
    assert np.array_equal(restored.energies, spec.energies), (
        'Энергии должны сохраняться с полной точностью'
    )
    assert (restored.alpha, restored.j_max) == (spec.alpha, spec.j_max)


def test_chain_spec_from_dict_rejects_unknown_keys():
    data = model.build_ramp(3, 0.1, alpha=1.0).to_dict()
    data['extra'] = 1
    with pytest.raises(InvalidArgumentError):
        model.ChainSpec.from_dict(data)
