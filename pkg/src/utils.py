import logging
from multiprocessing import Pool

import numpy as np
from tqdm import tqdm

from exceptions import InvalidArgumentError


# Проверка предусловий с записью в журнал.
def require(condition, message, error_class=InvalidArgumentError):
    """
    Проверяет предусловие и при его нарушении записывает сообщение
    в журнал и выбрасывает исключение.

    Аргументы:
        condition (bool): Проверяемое условие.
        message (str): Текст ошибки.
        error_class (type, optional): Класс исключения
                                      (по умолчанию InvalidArgumentError).

    Исключения:
        error_class: Возникает, если условие ложно.
    """
    if not condition:
        logging.error(message, stack_info=True)
        raise error_class(message)


def derive_rng(seed, *keys):
    """
    Возвращает генератор numpy, однозначно определяемый зерном и
    набором ключей. Потоки с разными ключами независимы, поэтому
    результат не зависит от порядка вычисления реализаций.

    Аргументы:
        seed (int): Главное зерно.
        *keys (int): Ключи дочернего потока (номер реализации, старта).

    Возвращает:
        numpy.random.Generator: Генератор PCG64.
    """
    sequence = np.random.SeedSequence(
        entropy=int(seed), spawn_key=tuple(int(key) for key in keys)
    )
    return np.random.Generator(np.random.PCG64(sequence))


def derive_seed(seed, *keys):
    """Целочисленное зерно дочернего потока (63 бита)."""
    sequence = np.random.SeedSequence(
        entropy=int(seed), spawn_key=tuple(int(key) for key in keys)
    )
    return int(sequence.generate_state(1, np.uint64)[0] >> np.uint64(1))


def log_grid(start, stop, points):
    """
    Строит логарифмическую сетку значений.

    Аргументы:
        start (float): Первое значение (> 0).
        stop (float): Последнее значение (> start).
        points (int): Число точек (>= 2).

    Возвращает:
        numpy.ndarray: Строго возрастающая сетка.
    """
    require(points >= 2, f'Сетка должна содержать минимум 2 точки: {points}')
    require(
        0 < start < stop,
        f'Границы сетки должны удовлетворять 0 < start < stop: '
        f'{start}, {stop}'
    )
    return np.logspace(np.log10(start), np.log10(stop), int(points))


def parallel_map(func, items, workers=1, desc=None):
    """
    Применяет функцию к элементам с сохранением порядка результатов.

    Аргументы:
        func (callable): Функция верхнего уровня модуля (должна
                         сериализоваться pickle).
        items (iterable): Аргументы.
        workers (int, optional): Число процессов; при workers <= 1
                                 вычисления идут в текущем процессе.
        desc (str, optional): Подпись индикатора tqdm.

    Возвращает:
        list: Результаты в порядке элементов.
    """
    items = list(items)
    if workers is None or workers <= 1 or len(items) <= 1:
        return [func(item) for item in tqdm(items, desc=desc)]
    with Pool(processes=int(workers)) as pool:
        return list(
            tqdm(pool.imap(func, items), total=len(items), desc=desc)
        )
