"""Exception hierarchy shared by all fockswap modules."""


class FockSwapError(Exception):
    """Base class for every error raised by this package."""


class LayoutError(FockSwapError, ValueError):
    """States, operators or gates whose tensor layouts do not line up."""


class TruncationError(FockSwapError, ValueError):
    """Probability mass reaches the top of a truncated Fock basis."""


class PreconditionError(FockSwapError, ValueError):
    """A protocol was started from a state it does not accept."""


class NoiseRegimeError(FockSwapError, ValueError):
    """A first-order noise model was asked to leave its regime of validity."""


class FitError(FockSwapError, RuntimeError):
    """Least-squares fitting failed."""


class ConvergenceError(FitError):
    pass


class SingularJacobianError(FitError):
    pass


class ConfigError(FockSwapError, ValueError):
    """One or more problems found in an experiment config.

    ``problems`` holds every violation, not just the first one found.
    """

    def __init__(self, problems, source=None):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        self.source = source
        head = f"{source}: " if source else ""
        super().__init__(head + "; ".join(self.problems))
