"""vml: a numerical laboratory for vector measure spaces on R^infinity.

Measures are consistent families of finite-dimensional laws sampled through
counter-based random streams; linear functionals are coefficient rules.  See
the submodules:

- :mod:`vml.measure`   product and circle-pushforward measures, sampling
- :mod:`vml.linfun`    measurable linear functionals, three-series test
- :mod:`vml.charfun`   characteristic functionals and Gram checks
- :mod:`vml.kernel_qi` Cameron-Martin shifts and quasi-invariance
- :mod:`vml.free_measure` the circle embedding and Fourier linearization
- :mod:`vml.spectral`  Bochner inversion and spectral models
"""
from .errors import (
    ConfigError,
    IndexWindowError,
    InvalidLawError,
    NotPositiveDefiniteError,
    ResolutionError,
    UnsupportedClosedFormError,
    UnsupportedMeasureError,
    VMLError,
)
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConfigError",
    "IndexWindowError",
    "InvalidLawError",
    "NotPositiveDefiniteError",
    "ResolutionError",
    "UnsupportedClosedFormError",
    "UnsupportedMeasureError",
    "VMLError",
    "__version__",
]
