import csv
import datetime as dt
import json
import logging
from pathlib import Path

import numpy as np
from prettytable import PrettyTable

from constants import (BASE_DIR, CSV_FLOAT_FORMAT, DATETIME_FORMAT,
                       SCHEMA_VERSION)
from exceptions import ConfigError


def control_output(results, cli_args):
    """
    Контролирует способ вывода сводной таблицы на основе
    параметров запуска.

    Аргументы:
        results (list): Список строк; первая строка - заголовок.
        cli_args (RunConfig): Параметры запуска с полями output,
                              mode и out_dir.

    Возвращает:
        None

    Примечание:
        Вывод результатов может быть произведен в трех различных форматах:
        1. "pretty" - вывод в виде красиво оформленной таблицы.
        2. "file" - сохранение таблицы в CSV-файл директории запуска.
        3. По умолчанию - вывод в виде простого текста (строки через пробел).
    """
    output = cli_args.output
    if output == 'pretty':
        pretty_output(results)
    elif output == 'file':
        file_output(results, cli_args)
    else:
        default_output(results)


def _cell(value):
    if isinstance(value, (float, np.floating)):
        return format(float(value), CSV_FLOAT_FORMAT)
    return value


def default_output(results):
    """Выводит результаты в виде простого текста (строки через пробел)."""
    for row in results:
        print(*row)


def pretty_output(results):
    """Выводит результаты в виде красиво оформленной таблицы."""
    table = PrettyTable()
    table.field_names = results[0]
    table.align = 'l'
    table.float_format = '.6g'
    table.add_rows(results[1:])
    print(table)


def file_output(results, cli_args):
    """
    Сохраняет сводную таблицу в CSV-файл <режим>_<дата>.csv.

    Аргументы:
        results (list): Список результатов для сохранения.
        cli_args (RunConfig): Параметры запуска.

    Возвращает:
        Path: Путь к сохранённому файлу.
    """
    results_dir = run_directory(cli_args)
    now_formatted = dt.datetime.now().strftime(DATETIME_FORMAT)
    file_path = results_dir / f'{cli_args.mode}_{now_formatted}.csv'
    return write_csv(file_path, results[0], results[1:], cli_args)


def run_directory(config):
    """
    Директория результатов запуска: out_dir или
    BASE_DIR/results/<режим>_<дата>. Создаётся при необходимости.
    """
    out_dir = getattr(config, 'out_dir', None)
    if out_dir:
        path = Path(out_dir)
    else:
        now_formatted = dt.datetime.now().strftime(DATETIME_FORMAT)
        path = BASE_DIR / 'results' / f'{config.mode}_{now_formatted}'
    path.mkdir(parents=True, exist_ok=True)
    return path


def _header(config):
    return {
        'schema_version': SCHEMA_VERSION,
        'config': config.to_dict(),
        'seed': config.seed,
    }


def write_csv(path, header, rows, config):
    """
    Записывает таблицу в CSV с числами в 17 значащих цифр.

    Первая строка файла - комментарий `# config: {...}` с полной
    конфигурацией запуска.

    Аргументы:
        path (Path): Путь к файлу.
        header (list): Имена столбцов.
        rows (iterable): Строки таблицы.
        config (RunConfig): Конфигурация запуска.

    Возвращает:
        Path: Путь к файлу.
    """
    with open(path, 'w', encoding='utf-8', newline='') as f:
        f.write(f'# config: {json.dumps(_header(config))}\n')
        writer = csv.writer(f, dialect='unix')
        writer.writerow(header)
        writer.writerows([_cell(cell) for cell in row] for row in rows)
    logging.info(f'Файл с результатами был сохранён: {path}')
    return path


def read_csv(path):
    """
    Читает CSV, записанный write_csv.

    Возвращает:
        tuple: (заголовок конфигурации, имена столбцов, строки).
    """
    with open(path, encoding='utf-8', newline='') as f:
        first = f.readline()
        if not first.startswith('# config: '):
            message = f'В файле {path} нет заголовка конфигурации'
            logging.error(message, stack_info=True)
            raise ConfigError(message)
        header = json.loads(first[len('# config: '):])
        reader = csv.reader(f, dialect='unix')
        columns = next(reader)
        return header, columns, list(reader)


def write_json(path, payload, config):
    """Записывает JSON с ключами schema_version, config, seed и payload."""
    document = _header(config)
    document.update(payload)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(document, f, indent=2, ensure_ascii=False)
        f.write('\n')
    logging.info(f'Файл с результатами был сохранён: {path}')
    return path


def write_ndjson(path, records, config, kind='realization_records'):
    """
    Записывает записи построчно в JSON; первая строка - заголовок
    с версией схемы и конфигурацией.
    """
    with open(path, 'w', encoding='utf-8') as f:
        f.write(json.dumps({'kind': kind, **_header(config)}) + '\n')
        for record in records:
            f.write(json.dumps(record.to_dict()) + '\n')
    logging.info(f'Файл с результатами был сохранён: {path}')
    return path


def read_ndjson(path):
    """
    Читает файл write_ndjson.

    Возвращает:
        tuple: (заголовок, список словарей записей).

    Исключения:
        ConfigError: Если версия схемы не поддерживается.
    """
    with open(path, encoding='utf-8') as f:
        lines = [line for line in f.read().splitlines() if line]
    header = json.loads(lines[0])
    if header.get('schema_version') != SCHEMA_VERSION:
        message = (
            f'Версия схемы {header.get("schema_version")} в {path} '
            f'не поддерживается'
        )
        logging.error(message, stack_info=True)
        raise ConfigError(message)
    return header, [json.loads(line) for line in lines[1:]]


def write_matrix_csv(path, matrix, config):
    """Вещественная матрица N x N; NaN записывается как nan."""
    matrix = np.asarray(matrix, dtype=float)
    header = [f'col_{column + 1}' for column in range(matrix.shape[1])]
    return write_csv(path, header, matrix.tolist(), config)


def write_density_matrix_csv(path, rho, config):
    """
    Матрица плотности построчно: для каждого столбца пара
    (вещественная часть, мнимая часть).
    """
    values = rho.rho
    header = []
    for column in range(values.shape[1]):
        header.extend([f're_{column + 1}', f'im_{column + 1}'])
    rows = [
        [part for value in row for part in (value.real, value.imag)]
        for row in values
    ]
    return write_csv(path, header, rows, config)


def write_density_matrix_json(path, rho, config):
    return write_json(path, {'rho': rho.to_dict()}, config)
