"""Engine configuration: every setting addressable through the set/get surface.

Defaults are artifact choices (documented in the README); the worked geometry
of a 1565 nm source on 20 um pixels is used so a fresh handle is immediately
self-consistent: window radius and tilt follow the admissible-fraction rules
in :mod:`holopipe.geometry`.
"""

import copy
import os
from dataclasses import dataclass, field

from . import constants as C
from . import geometry

_DEFAULT_WAVELENGTH = 1565e-9
_DEFAULT_PIXEL = 20e-6


def _default_tilt():
    wmax = geometry.max_resolvable_angle(_DEFAULT_WAVELENGTH, _DEFAULT_PIXEL)
    wc = geometry.max_window_radius(wmax)
    tx, ty = geometry.recommended_tilt(wc, wmax)
    return [[tx, tx], [ty, ty]]  # [axis][pol]


def _default_radius():
    wmax = geometry.max_resolvable_angle(_DEFAULT_WAVELENGTH, _DEFAULT_PIXEL)
    return geometry.max_window_radius(wmax)


@dataclass
class HoloConfig:
    frameWidth: int = 320
    frameHeight: int = 256
    framePixelSize: float = _DEFAULT_PIXEL
    polCount: int = 1
    fftWindowSizeX: int = 128
    fftWindowSizeY: int = 128
    fourierWindowRadius: float = field(default_factory=_default_radius)  # degrees
    beamCentre: list = field(default_factory=lambda: [[0.0, 0.0], [0.0, 0.0]])  # [axis][pol], metres
    tilt: list = field(default_factory=_default_tilt)  # [axis][pol], degrees
    defocus: list = field(default_factory=lambda: [0.0, 0.0])  # [pol], dioptre
    basisWaist: list = field(default_factory=lambda: [4.2667e-4, 4.2667e-4])  # [pol], metres
    basisGroupCount: int = 0
    basisType: int = C.BASISTYPE_HG
    wavelengthCentre: float = _DEFAULT_WAVELENGTH
    wavelengths: list = field(default_factory=list)  # empty -> [wavelengthCentre]
    wavelengthOrdering: list = field(default_factory=lambda: [C.WAVELENGTHORDER_FAST,
                                                              C.WAVELENGTHORDER_FAST])  # [in, out]
    resolutionMode: int = 1  # 0 full fft dims, 1 windowed dims
    fillFactorCorrectionEnabled: int = 0
    polLockTilt: int = 0
    polLockDefocus: int = 0
    polLockBasisWaist: int = 0
    autoAlignTilt: int = 1
    autoAlignBeamCentre: int = 1
    autoAlignDefocus: int = 0
    autoAlignBasisWaist: int = 1
    autoAlignFourierWindowRadius: int = 0
    autoAlignTol: float = 0.0
    autoAlignMode: int = C.AUTOALIGNMODE_FULL
    autoAlignGoalIdx: int = C.METRIC_IL
    autoAlignPolIndependence: int = 0
    autoAlignBasisMulConjTrans: int = 0
    threadCount: int = field(default_factory=lambda: os.cpu_count() or 1)
    verbosity: int = 0
    batchCount: int = 1
    avgCount: int = 1
    avgMode: int = C.AVGMODE_SEQUENTIAL
    planMode: int = C.PLANMODE_ESTIMATE

    def wavelength_list(self):
        return list(self.wavelengths) if self.wavelengths else [self.wavelengthCentre]

    def wavelength_count(self):
        return len(self.wavelengths) if self.wavelengths else 1

    def snapshot(self):
        return copy.deepcopy(self)

    def restore(self, other):
        for name in self.__dataclass_fields__:
            setattr(self, name, copy.deepcopy(getattr(other, name)))


def floor_to_quanta(value):
    """Floor a pixel dimension to the nearest multiple of PIXEL_QUANTA."""
    return (int(value) // C.PIXEL_QUANTA) * C.PIXEL_QUANTA
