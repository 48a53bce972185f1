import argparse
import json
import logging
import math
from dataclasses import asdict, dataclass, field, fields, replace
from logging.handlers import RotatingFileHandler
from pathlib import Path

from constants import (ALPHAS, BASE_DIR, GAMMA_L, HALF_BIAS, J_MAX,
                       LEARNING_RATE, MASTER_SEED, MAX_STEPS, MIN_STEPS,
                       N_REALIZATIONS, N_SITES, N_STARTS, OUTPUT_CHOICES,
                       RAMP_TOTAL_BIAS, SCAN_GRID_MAX, SCAN_GRID_MIN,
                       SCAN_GRID_POINTS, SCHEMA_VERSION, SYSTEMS)
from exceptions import ConfigError, EnaqtError
from model import ChainSpec, build_disordered, build_ramp
from optimizer import OptimizerConfig
from utils import log_grid

LOG_FORMAT = '"%(asctime)s - [%(levelname)s] - %(message)s"'
DT_FORMAT = '%d.%m.%Y %H:%M:%S'

# Ключи командной строки, которые не входят в RunConfig.
CLI_ONLY = ('config',)


class RunArgumentParser(argparse.ArgumentParser):
    """Парсер, сообщающий об ошибках аргументов через ConfigError."""

    def error(self, message):
        logging.error(f'Ошибка аргументов командной строки: {message}')
        raise ConfigError(message)


def configure_argument_parser(available_modes):
    """
    Конфигурирует аргументы командной строки симулятора.

    Аргументы:
        available_modes (list): Список доступных режимов работы.

    Возвращает:
        RunArgumentParser: Парсер с настроенными аргументами командной
                           строки. Необязательные аргументы по умолчанию
                           равны None, чтобы отличать явно заданные
                           значения от значений из файла.
    """
    parser = RunArgumentParser(
        description='Стационарный транспорт с локальной дефазировкой'
    )
    parser.add_argument(
        'mode',
        choices=available_modes,
        help='Режимы работы'
    )
    parser.add_argument(
        '--config',
        help='JSON-файл с параметрами запуска'
    )
    parser.add_argument(
        '--system',
        choices=SYSTEMS,
        help='Тип цепочки'
    )
    parser.add_argument(
        '--chain-file',
        help='JSON-файл цепочки для --system file'
    )
    parser.add_argument('--n-sites', type=int, help='Число узлов')
    parser.add_argument('--delta', type=float, help='Перепад энергии')
    parser.add_argument(
        '--alpha',
        dest='alphas',
        type=float,
        nargs='+',
        help='Показатели дальности туннелирования'
    )
    parser.add_argument('--gamma-l', type=float, help='Скорость захвата')
    parser.add_argument(
        '--j-max', type=float, help='Туннелирование ближайших соседей'
    )
    parser.add_argument('--seed', type=int, help='Главное зерно')
    parser.add_argument('--starts', type=int, help='Число стартов')
    parser.add_argument(
        '--realizations', type=int, help='Число реализаций беспорядка'
    )
    parser.add_argument(
        '--sizes', type=int, nargs='+', help='Размеры цепочек ансамбля'
    )
    parser.add_argument('--workers', type=int, help='Число процессов')
    parser.add_argument(
        '--grid-min', type=float, help='Начало сетки Gamma'
    )
    parser.add_argument(
        '--grid-max', type=float, help='Конец сетки Gamma'
    )
    parser.add_argument(
        '--grid-points', type=int, help='Число точек сетки Gamma'
    )
    parser.add_argument(
        '--max-steps', type=int, help='Максимум шагов оптимизатора'
    )
    parser.add_argument(
        '--learning-rate', type=float, help='Шаг Adamax'
    )
    parser.add_argument(
        '--trajectory-every',
        type=int,
        help='Период записи траектории оптимизатора'
    )
    parser.add_argument(
        '--strict-paper-stopping',
        action='store_true',
        default=None,
        help='Останавливаться при первом касании границы'
    )
    parser.add_argument(
        '--half-bias',
        action='store_true',
        default=None,
        help='Половинный перепад энергии рампы'
    )
    parser.add_argument('--out-dir', help='Директория результатов')
    parser.add_argument(
        '-o',
        '--output',
        choices=OUTPUT_CHOICES,
        help='Дополнительные способы вывода данных'
    )
    return parser


@dataclass
class RunConfig:
    """Все параметры запуска после слияния умолчаний, файла и флагов."""

    schema_version: int = SCHEMA_VERSION
    mode: str = None
    system: str = 'ramp'
    chain_file: str = None
    n_sites: int = N_SITES
    delta: float = None
    alphas: list = field(default_factory=lambda: list(ALPHAS))
    gamma_l: float = GAMMA_L
    j_max: float = J_MAX
    seed: int = MASTER_SEED
    starts: int = N_STARTS
    realizations: int = N_REALIZATIONS
    sizes: list = None
    workers: int = 1
    grid_min: float = SCAN_GRID_MIN
    grid_max: float = SCAN_GRID_MAX
    grid_points: int = SCAN_GRID_POINTS
    max_steps: int = MAX_STEPS
    learning_rate: float = LEARNING_RATE
    trajectory_every: int = 0
    strict_paper_stopping: bool = False
    half_bias: bool = False
    out_dir: str = None
    output: str = None

    def to_dict(self):
        return asdict(self)

    def ramp_delta(self, n_sites):
        """Перепад между соседними узлами: явный или (N delta) = 1."""
        if self.delta is not None:
            return self.delta
        bias = HALF_BIAS if self.half_bias else RAMP_TOTAL_BIAS
        return bias / n_sites

    def grid(self):
        return log_grid(self.grid_min, self.grid_max, self.grid_points)

    def optimizer_config(self):
        return OptimizerConfig(
            learning_rate=self.learning_rate,
            max_steps=self.max_steps,
            min_steps=min(MIN_STEPS, self.max_steps),
            strict_boundary_stop=self.strict_paper_stopping,
            trajectory_every=self.trajectory_every,
        )

    def chain(self, alpha):
        """
        Цепочка для заданного alpha в соответствии с полем system.

        Возвращает:
            ChainSpec: Рампа, реализация беспорядка с зерном seed или
                       цепочка из chain_file с подставленным alpha.
        """
        if self.system == 'ramp':
            return build_ramp(
                self.n_sites, self.ramp_delta(self.n_sites),
                alpha=alpha, j_max=self.j_max,
            )
        if self.system == 'disorder':
            return build_disordered(
                self.n_sites, self.seed, alpha=alpha, j_max=self.j_max
            )
        return load_chain(self.chain_file).with_alpha(alpha)


def load_chain(path):
    """
    Читает ChainSpec из JSON-файла.

    Исключения:
        ConfigError: Если файл недоступен или не описывает цепочку.
    """
    try:
        return ChainSpec.from_json(Path(path).read_text(encoding='utf-8'))
    except (OSError, ValueError, KeyError, TypeError, EnaqtError) as error:
        message = f'Не удалось прочитать цепочку из {path}: {error}'
        logging.error(message, stack_info=True)
        raise ConfigError(message) from error


def _fail(message):
    logging.error(message, stack_info=True)
    raise ConfigError(message)


def _read_config_file(path):
    try:
        data = json.loads(Path(path).read_text(encoding='utf-8'))
    except (OSError, ValueError) as error:
        _fail(f'Не удалось прочитать файл параметров {path}: {error}')
    if not isinstance(data, dict):
        _fail(f'Файл параметров {path} должен содержать JSON-объект')
    known = {item.name for item in fields(RunConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        _fail(f'Неизвестные ключи в файле параметров: {unknown}')
    version = data.get('schema_version', SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        _fail(
            f'Версия схемы {version} не поддерживается '
            f'(ожидается {SCHEMA_VERSION})'
        )
    return data


def _positive_int(config, name, minimum=1):
    value = getattr(config, name)
    if not isinstance(value, int) or value < minimum:
        _fail(f'{name} должно быть целым >= {minimum}: {value}')


def _finite(value):
    return isinstance(value, (int, float)) and math.isfinite(value)


def validate(config):
    """
    Проверяет предусловия всех модулей до первого решения.

    Исключения:
        ConfigError: Если какой-либо параметр недопустим.
    """
    if config.system not in SYSTEMS:
        _fail(f'Неизвестный тип цепочки: {config.system}')
    if config.system == 'file' and not config.chain_file:
        _fail('Для --system file нужен --chain-file')
    _positive_int(config, 'n_sites', 2)
    if config.delta is not None and not (
            _finite(config.delta) and config.delta > 0):
        _fail(f'delta должна быть > 0: {config.delta}')
    if not config.alphas or not all(
            _finite(alpha) and alpha >= 0 for alpha in config.alphas):
        _fail(f'alpha должны быть конечны и >= 0: {config.alphas}')
    if not (_finite(config.gamma_l) and config.gamma_l >= 0):
        _fail(f'gamma_l должна быть >= 0: {config.gamma_l}')
    if not (_finite(config.j_max) and config.j_max > 0):
        _fail(f'j_max должна быть > 0: {config.j_max}')
    if not isinstance(config.seed, int):
        _fail(f'Зерно должно быть целым: {config.seed}')
    for name in ('starts', 'realizations', 'workers', 'max_steps'):
        _positive_int(config, name)
    _positive_int(config, 'trajectory_every', 0)
    if config.sizes is not None and not all(
            isinstance(size, int) and size >= 3 for size in config.sizes):
        _fail(f'Размеры ансамбля должны быть целыми >= 3: {config.sizes}')
    if not isinstance(config.grid_points, int) or config.grid_points < 2:
        _fail(f'Сетка Gamma пуста или вырождена: {config.grid_points}')
    if not (_finite(config.grid_min) and _finite(config.grid_max)
            and 0 < config.grid_min < config.grid_max):
        _fail(
            f'Требуется 0 < grid_min < grid_max: '
            f'{config.grid_min}, {config.grid_max}'
        )
    if not (_finite(config.learning_rate) and config.learning_rate > 0):
        _fail(f'learning_rate должен быть > 0: {config.learning_rate}')
    if config.output is not None and config.output not in OUTPUT_CHOICES:
        _fail(f'Неизвестный способ вывода: {config.output}')


def build_run_config(args):
    """
    Собирает RunConfig: умолчания, затем JSON-файл из --config,
    затем явно заданные флаги.

    Аргументы:
        args (Namespace): Разобранные аргументы командной строки.

    Возвращает:
        RunConfig: Проверенная конфигурация запуска.

    Исключения:
        ConfigError: Если файл некорректен, содержит неизвестные ключи
                     или параметры нарушают предусловия.
    """
    values = {}
    if getattr(args, 'config', None):
        values.update(_read_config_file(args.config))
    values.update({
        name: value for name, value in vars(args).items()
        if value is not None and name not in CLI_ONLY
    })
    explicit_alphas = 'alphas' in values
    config = RunConfig(**values)
    if config.system == 'file' and config.chain_file:
        chain = load_chain(config.chain_file)
        config = replace(
            config,
            n_sites=chain.n_sites,
            j_max=chain.j_max,
            alphas=config.alphas if explicit_alphas else [chain.alpha],
        )
    config.alphas = [float(alpha) for alpha in config.alphas]
    validate(config)
    logging.info(f'Параметры запуска: {config.to_dict()}')
    return config


def configure_logging():
    """
    Конфигурирует логирование симулятора.

    Аргументы:
        None

    Возвращает:
        None
    """
    log_dir = BASE_DIR / 'logs'
    log_dir.mkdir(exist_ok=True)
    log_file = log_dir / 'enaqt.log'

    rotating_handler = RotatingFileHandler(
        log_file, maxBytes=10 ** 6, backupCount=5
    )

    logging.basicConfig(
        datefmt=DT_FORMAT,
        format=LOG_FORMAT,
        level=logging.INFO,
        handlers=(rotating_handler, logging.StreamHandler())
    )
