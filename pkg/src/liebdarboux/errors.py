"""Exception hierarchy shared by all modules."""


class DarbouxError(Exception):
    """Base class for every error raised by the library."""


class SingularMatrix(DarbouxError, ValueError):
    def __init__(self, det, message=None):
        self.det = det
        super().__init__(message or f"matrix is singular (det={det!r})")


class SingularSeed(DarbouxError, ValueError):
    """Seed matrix fails the regularity threshold at ``x``."""

    def __init__(self, x, det, ratio=None):
        self.x = x
        self.det = det
        self.ratio = ratio
        super().__init__(
            f"seed matrix is singular at x={x!r} (det={det!r}, normalized={ratio!r})"
        )


class EnergyOutOfRange(DarbouxError, ValueError):
    pass


class DegenerateSeed(DarbouxError, ValueError):
    pass


class InconsistentLabels(DarbouxError, ValueError):
    pass


class InvalidParameters(DarbouxError, ValueError):
    pass


class AlgebraicDegeneracy(DarbouxError, ValueError):
    """Energy coincides with the (3,3) potential entry; psi_C cannot be eliminated."""

    def __init__(self, energy, x=None):
        self.energy = energy
        self.x = x
        where = "" if x is None else f" at x={x!r}"
        super().__init__(f"reduction is degenerate for E={energy!r}{where}")


class NonAsymptoticPotential(DarbouxError, ValueError):
    pass


class NoAsymptote(DarbouxError, ValueError):
    pass


class EvanescentEnergy(DarbouxError, ValueError):
    pass


class RegimeViolation(DarbouxError, ValueError):
    pass


class Unsupported(DarbouxError, NotImplementedError):
    pass
