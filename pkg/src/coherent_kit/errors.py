"""Exception and warning types shared across the toolkit."""


class ConfigurationError(ValueError):
    """Invalid construction parameters (grid size, truncation, resolution)."""


class UsageError(ValueError):
    """Arguments are individually valid but used together incorrectly."""


class BoundaryWarning(UserWarning):
    """A wavefunction has non-negligible amplitude at the grid edges.

    Spectral operators assume periodicity, so identities only hold for
    states that are contained well inside the domain.
    """
