"""Off-axis digital holography processing.

Frame ingestion, Fourier-domain off-axis term isolation, field
reconstruction, Hermite-Gaussian modal decomposition, auto-alignment,
transfer-matrix metrics, and a ground-truth frame simulator.

The handle-based surface in :mod:`holopipe.api` mirrors a C calling
convention (integer handles, ErrorCode returns, zero/None sentinels); the
:class:`holopipe.engine.Engine` class behind it can also be used directly.
"""

from . import api, constants
from .config import HoloConfig
from .engine import Engine, apply_wavelength_ordering
from .errors import ErrorCode, HoloError
from .geometry import max_resolvable_angle, max_window_radius, recommended_tilt
from .simulate import (SimulationSpec, simulate_frames, simulate_frames_simple,
                       simulator_destroy)

__all__ = [
    "api", "constants", "HoloConfig", "Engine", "apply_wavelength_ordering",
    "ErrorCode", "HoloError", "max_resolvable_angle", "max_window_radius",
    "recommended_tilt", "SimulationSpec", "simulate_frames",
    "simulate_frames_simple", "simulator_destroy",
]

__version__ = "0.1.0"
