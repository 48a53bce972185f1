from pathlib import Path

BASE_DIR = Path(__file__).parent
DATETIME_FORMAT = '%Y-%m-%d_%H-%M-%S'

SCHEMA_VERSION = 1

# Параметры модели, фиксированные во всех расчётах.
J_MAX = 0.1
GAMMA_L = 0.1
N_SITES = 12
ALPHAS = (1.0, 3.0, 5.0)
SIZES = (8, 10, 12, 14)
RAMP_TOTAL_BIAS = 1.0
HALF_BIAS = 0.5
SWEEP_DELTA = 1 / 12
THREE_SITE_DELTA = 1 / 3

# Оптимизатор.
GAMMA_LOWER_BOUND = 1e-7
GAMMA_UPPER_BOUND = 1.0
MIN_STEPS = 30
MAX_STEPS = 100_000
GRAD_TOL = 1e-8
LEARNING_RATE = 0.02
BETA1 = 0.9
BETA2 = 0.999
ADAMAX_EPSILON = 1e-8
N_STARTS = 100
N_REALIZATIONS = 500
MASTER_SEED = 2024

# Сетка равномерной дефазировки.
SCAN_GRID_MIN = 1e-4
SCAN_GRID_MAX = 10.0
SCAN_GRID_POINTS = 61
PEAK_XTOL = 1e-6

# Численные допуски.
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = -1e-8
RESIDUAL_TOL = 1e-10
DEGENERACY_TOL = 1e-8
DENOMINATOR_FLOOR = 1e-14
FD_STEP = 1e-4

# Разбиение для гистограмм и боксплотов.
LOG_GAMMA_BINS = (-7.0, 0.0, 0.25)
MISMATCH_BINS = (0.0, 2.0, 0.25)
ELL_RATIO_BIN_WIDTH = 0.05

CSV_FLOAT_FORMAT = '.17g'

# Трёхузловая проверка и траектории на ландшафте.
ORACLE_DELTA = 0.3
ORACLE_GAMMAS = (0.5, 0.2)
ORACLE_COUPLINGS = (1e-2, 1e-3, 1e-4)
ORACLE_LEAK_RATIO = 0.1
LANDSCAPE_STARTS = 4
LANDSCAPE_TRAJECTORY_EVERY = 10

SYSTEMS = ('ramp', 'disorder', 'file')
OUTPUT_CHOICES = ('pretty', 'file')
