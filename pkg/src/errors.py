class SimulationError(Exception):
    pass


class InvalidArgumentError(SimulationError, ValueError):
    pass


class RankDeficientError(SimulationError, ArithmeticError):
    pass


class ConfigError(SimulationError):
    pass


class ResultsIOError(SimulationError, OSError):
    pass
