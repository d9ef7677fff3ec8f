"""Domain errors raised across the laboratory"""

from typing import List, Optional, Sequence, Tuple


class ModelInvalidError(ValueError):
    """Force field violates evenness (E2) or positivity (E3)"""

    def __init__(self, message: str, witness: Optional[Tuple[int, ...]] = None):
        self.witness = witness
        if witness is not None:
            message = f"{message} (witness grid index {witness})"
        super().__init__(message)


class LatticeMismatchError(ValueError):
    """Two objects live on different lattices"""


class SingularModeError(ValueError):
    """Ω is not invertible at some grid points and no mask was requested"""

    def __init__(self, message: str, points: Sequence[Tuple[int, ...]] = ()):
        self.points: List[Tuple[int, ...]] = list(points)
        shown = ", ".join(str(p) for p in self.points[:10])
        if len(self.points) > 10:
            shown += f", ... ({len(self.points)} total)"
        super().__init__(f"{message}: singular grid points [{shown}]")


class WraparoundError(ValueError):
    """Light cone of the requested times wraps around the torus"""

    def __init__(self, message: str, required_N: int):
        self.required_N = required_N
        super().__init__(f"{message}; need N >= {required_N}")


class DivisibilityError(ValueError):
    """Torus side is not a multiple of the block side"""


class ProfileError(ValueError):
    """Slow profile fails I2/I3 at a sampled point"""

    def __init__(self, message: str, r=None, theta_index: Optional[Tuple[int, ...]] = None):
        self.r = r
        self.theta_index = theta_index
        super().__init__(f"{message} at r={r}, theta index {theta_index}")


class SpectrumError(ValueError):
    """Homogeneous spectrum is not Hermitian PSD or not real-field compatible"""


class InsufficientSamplesError(ValueError):
    """Estimator received too few samples"""


class WindowError(ValueError):
    """Wigner window exceeds the torus"""


class DegenerateProbeError(ValueError):
    """Probe has zero variance under the sample"""


class CFLError(ValueError):
    """CFL number outside (0, 0.9]"""


class SchemaMismatchError(ValueError):
    """Two report tables do not share a schema"""


class CrossCheckError(RuntimeError):
    """Two independent constructions of the same quantity disagree"""


class ResourceLimitError(RuntimeError):
    """Estimated memory of a run exceeds the configured cap"""

    def __init__(self, message: str, suggested_N: Optional[int] = None):
        self.suggested_N = suggested_N
        if suggested_N is not None:
            message = f"{message}; try N={suggested_N}"
        super().__init__(message)
