"""Exception types raised across the package."""


class FiberscopeError(ValueError):
    """Base class for every error raised by fiberscope."""


class InvalidConfigError(FiberscopeError):
    pass


class GridMismatchError(FiberscopeError):
    """A translation amount does not land on the representation grid."""


class CrossSectionError(FiberscopeError):
    """A frequency outside the Plancherel cross-section (sigma == 0)."""


class ShapeError(FiberscopeError):
    pass


class InvalidResidueError(FiberscopeError):
    pass


class DecompositionInfeasibleError(FiberscopeError):
    """The target fibers do not lie in the range of the generator."""


class ConfigParseError(InvalidConfigError):
    """Collects every problem found while parsing a config file.

    Attributes:
        errors: list of human readable messages, each prefixed with the
            line number when one applies.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
