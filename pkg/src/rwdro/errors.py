class ConfigError(ValueError):
    """Invalid configuration or parameter combination."""


class InfeasibleError(ValueError):
    """The regularized problem is not strictly feasible for the given reference coupling."""


class SizeError(ValueError):
    """Instance exceeds the size cap of a brute-force oracle."""
