class EnaqtError(Exception):
    """Базовое исключение симулятора."""
    pass


class InvalidArgumentError(EnaqtError, ValueError):
    """Вызывается, когда аргумент нарушает предусловие операции."""
    pass


class DegenerateSteadyStateError(EnaqtError):
    """Вызывается, когда стационарное состояние не единственно."""
    pass


class SteadyStateSolverError(EnaqtError):
    """Вызывается, когда линейный решатель не дал допустимого состояния."""
    pass


class DegenerateInputError(EnaqtError):
    """Вызывается, когда аналитическая формула имеет нулевой знаменатель."""
    pass


class UndefinedCorrelationError(EnaqtError):
    """Вызывается, когда ранговая корреляция не определена."""
    pass


class OptimizationError(EnaqtError):
    """Вызывается при сбое оптимизации; хранит пройденную траекторию."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = list(trajectory or [])


class EnsembleError(EnaqtError):
    """Вызывается, когда не удалась ни одна из независимых задач."""
    pass


class ConfigError(EnaqtError):
    """Вызывается при некорректной конфигурации запуска."""
    pass
