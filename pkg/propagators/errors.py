# propagators/errors.py

"""Exception hierarchy shared by every module of the toolkit."""

from typing import Optional


class AscentError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatchError(AscentError, ValueError):
    pass


class DecompositionError(AscentError):
    """Eigendecomposition failed; message carries condition info."""


class NonCommutingFamilyError(AscentError, ValueError):
    def __init__(self, defect: float, tolerance: float):
        super().__init__(
            f"operators do not commute (relative commutator defect {defect:.3e} > {tolerance:.1e}); "
            "use the non-commutative series route (propagators.trotter)"
        )
        self.defect = defect
        self.tolerance = tolerance


class ParityMismatchError(AscentError, ValueError):
    pass


class QuadratureLevelError(AscentError, ValueError):
    def __init__(self, level: int, required: int):
        super().__init__(f"quadrature level {level} is below the series truncation order {required}")
        self.level = level
        self.required = required


class UnsupportedRuleError(AscentError, ValueError):
    pass


class OutsideRadiusError(AscentError):
    def __init__(self, t: float, radius: float):
        super().__init__(
            f"|t|={abs(t):g} is outside the certified radius {radius:g}; "
            "pass allow_outside_radius=True to refine empirically"
        )
        self.t = t
        self.radius = radius


class SeriesMemoryError(AscentError):
    pass


class FitResidualError(AscentError):
    def __init__(self, residual: float, tolerance: float, degree: int):
        super().__init__(
            f"polynomial fit of the time bracket has residual {residual:.3e} > {tolerance:.1e} "
            f"at degree {degree}; raise the degree or shorten t"
        )
        self.residual = residual
        self.tolerance = tolerance
        self.degree = degree


class GridError(AscentError, ValueError):
    pass


class FixtureError(AscentError, ValueError):
    def __init__(self, message: str, location: Optional[str] = None):
        where = f" at {location}" if location else ""
        super().__init__(f"bad fixture{where}: {message}")
        self.location = location
