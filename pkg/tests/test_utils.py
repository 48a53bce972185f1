import numpy as np
import pytest

from conftest import FIXED_SEEDS
from exceptions import ConfigError, InvalidArgumentError
try:
    import utils
except ModuleNotFoundError:
    assert False, 'Убедитесь что в директории `src` есть файл `utils.py`'
except ImportError:
    assert False, 'Убедитесь что в директории `src` есть файл `utils.py`'


def square(value):
    return value * value


def test_require_raises_and_logs(caplog):
    with pytest.raises(InvalidArgumentError) as excinfo:
        utils.require(False, 'Сообщение об ошибке')
    assert 'Сообщение об ошибке' in str(excinfo.value)
    assert 'Сообщение об ошибке' in caplog.text, (
        'Функция `require` должна записывать ошибку в журнал'
    )
    utils.require(True, 'не используется')


def test_require_custom_error():
    with pytest.raises(ConfigError):
        utils.require(False, 'конфигурация', ConfigError)


@pytest.mark.parametrize('seed', FIXED_SEEDS)
def test_derive_rng_streams(seed):
    first = utils.derive_rng(seed, 1).random(5)
    assert np.array_equal(first, utils.derive_rng(seed, 1).random(5))
    assert not np.array_equal(first, utils.derive_rng(seed, 2).random(5))
    assert not np.array_equal(first, utils.derive_rng(seed + 1, 1).random(5))


def test_derive_seed():
    got = utils.derive_seed(2024, 3)
    assert isinstance(got, int)
    assert 0 <= got < 2 ** 63
    assert got == utils.derive_seed(2024, 3)
    assert got != utils.derive_seed(2024, 4)


def test_log_grid():
    got = utils.log_grid(1e-4, 10.0, 61)
    assert got.shape == (61,)
    assert got[0] == pytest.approx(1e-4)
    assert got[-1] == pytest.approx(10.0)
    assert np.allclose(np.diff(np.log10(got)), 5 / 60)


@pytest.mark.parametrize('start, stop, points', [
    (1e-4, 10.0, 1),
    (0.0, 10.0, 10),
    (1.0, 0.5, 10),
])
def test_log_grid_invalid(start, stop, points):
    with pytest.raises(InvalidArgumentError):
        utils.log_grid(start, stop, points)


@pytest.mark.parametrize('workers', [1, 2])
def test_parallel_map_preserves_order(workers):
    got = utils.parallel_map(square, range(6), workers=workers)
    assert got == [0, 1, 4, 9, 16, 25]
