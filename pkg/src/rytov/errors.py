"""Exception hierarchy mapped to CLI exit codes (2 config, 3 numerical, 4 data)."""


class RytovError(Exception):
    pass


class ConfigError(RytovError):
    """Bad configuration, geometry, or input file. Exit code 2."""


class NumericalError(RytovError):
    """Numerical failure (non-convergence, singular system). Exit code 3."""


class SolverConvergenceError(NumericalError):
    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class SeriesConvergenceError(NumericalError):
    def __init__(self, message, order=None):
        super().__init__(message)
        self.order = order


class SingularPointError(NumericalError):
    """Field or kernel requested at a source point."""


class DataMismatchError(RytovError):
    """Inconsistent layouts, hashes, or array shapes between artifacts. Exit code 4."""
