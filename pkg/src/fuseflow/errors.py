"""Exception types shared across the package."""


class SolverError(RuntimeError):
    """An iterative routine failed to converge or hit a numerical fault.

    Extra diagnostic state (best iterate, residual, objective trace) is
    attached as keyword attributes in ``info``.
    """

    def __init__(self, message, **info):
        super().__init__(message)
        self.info = dict(info)


class UndefinedMetricError(ValueError):
    """A stability metric is undefined (0/0 or x/0) for the given inputs."""
