"""Exception types shared across the package."""


class SalfuseError(Exception):
    """Base class for package-specific errors."""


class FormatError(SalfuseError):
    """File is not a decodable PNG/JPEG image."""


class ContractError(SalfuseError, ValueError):
    """An argument violates an operation's contract (shape, length, range)."""


class EmptySeedError(SalfuseError):
    """Seed estimation produced no usable seeds."""


class SolverError(SalfuseError):
    """The ranking system could not be solved reliably."""


class UndefinedAucError(SalfuseError):
    """AUC is undefined because the ground truth contains a single class."""


class ConfigError(SalfuseError):
    """Configuration document failed validation."""
