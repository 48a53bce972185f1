import sys
from pathlib import Path

import numpy as np
import pytest

BASE_DIR = Path(__file__).resolve(strict=True).parent.parent
SRC_DIR = BASE_DIR / 'src'
sys.path.append(str(BASE_DIR))
sys.path.append(str(SRC_DIR))

precode_files = [
    'constants.py', 'exceptions.py', 'utils.py', 'model.py', 'lindblad.py',
    'observables.py', 'analytic3.py', 'gradient.py', 'optimizer.py',
    'ensemble.py', 'configs.py', 'outputs.py', 'main.py',
]
src_dir_files = [file.name for file in SRC_DIR.rglob('*.py')]
try:
    import configs  # noqa: F401
    import main  # noqa: F401
    import utils  # noqa: F401
except (ImportError, ModuleNotFoundError, NameError):
    for file in precode_files:
        assert file in src_dir_files, f'Отсутсвует файл {file}'

from lindblad import DensityMatrix, NoiseProfile  # noqa: E402
from model import build_ramp  # noqa: E402

# Пики равномерной дефазировки рампы N = 12: (Gamma_u, eta_u).
RAMP_PEAKS = {
    1.0: (0.121, 1.87e-3),
    3.0: (0.079, 1.48e-3),
    5.0: (0.078, 1.47e-3),
}
HALF_BIAS_PEAKS = {
    1.0: (0.0439, 2.63e-3),
    3.0: (0.0368, 2.47e-3),
    5.0: (0.0374, 2.45e-3),
}
FIXED_SEEDS = (0, 7, 2024)


def pytest_make_parametrize_id(config, val):
    return repr(val)


@pytest.fixture
def ramp12():
    def _ramp12(alpha, half_bias=False):
        delta = (0.5 if half_bias else 1.0) / 12
        return build_ramp(12, delta, alpha=alpha)
    return _ramp12


@pytest.fixture
def uniform_noise():
    def _uniform_noise(n_sites, gamma, gamma_l=0.1):
        return NoiseProfile.uniform(n_sites, gamma, gamma_l)
    return _uniform_noise


@pytest.fixture
def random_density_matrix():
    def _random_density_matrix(n_sites, seed=0):
        rng = np.random.default_rng(seed)
        a = rng.normal(size=(n_sites, n_sites)) + 1j * rng.normal(
            size=(n_sites, n_sites))
        rho = a @ a.conj().T
        rho = (rho + rho.conj().T) / 2
        return DensityMatrix(rho / np.trace(rho).real)
    return _random_density_matrix


@pytest.fixture
def out_dir(tmp_path):
    path = tmp_path / 'run'
    path.mkdir()
    return path
