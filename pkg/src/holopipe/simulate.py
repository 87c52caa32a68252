"""Synthetic interference-frame generator with fully known ground truth.

Each frame records |S + R|^2 per polarisation region, where S is a
Hermite-Gaussian superposition (beamCoefs) and R a tilted, optionally
defocused and Gaussian-enveloped reference.  The reference phase is
exp(-i(k.x + quadratic)) so the recoverable cross term S*conj(R) sits at
positive Fourier bins for positive tilt, matching the reconstruction
convention; a pipeline configured with the exact spec parameters recovers
beamCoefs up to one global power constant.
"""

from dataclasses import dataclass, field

import numpy as np

from . import constants as C
from . import geometry, hgbasis
from .errors import ErrorCode, HoloError
from .pipeline import pol_region


@dataclass
class SimulationSpec:
    frameCount: int = 1
    frameWidth: int = 256
    frameHeight: int = 256
    pixelSize: float = 20e-6
    polCount: int = 1
    refTiltX: list = None      # per pol, degrees
    refTiltY: list = None
    refDefocus: list = None    # per pol, dioptre
    refWaist: list = None      # per pol, metres; <=0 means plane wave
    refBeamCentreX: list = None
    refBeamCentreY: list = None
    refAmplitude: list = None  # per pol, complex
    beamGroupCount: int = 0    # <=0: auto so modeCount >= frameCount
    beamWaist: list = None
    beamCoefs: np.ndarray = None  # (frameCount, polCount, modeCount)
    beamCentreX: list = None
    beamCentreY: list = None
    cameraPixelLevelCount: int = 16384
    fillFactorCorrection: int = 0
    wavelengths: list = field(default_factory=list)
    wavelengthOrdering: int = C.WAVELENGTHORDER_FAST

    def mode_count(self):
        return hgbasis.mode_count(self.beamGroupCount)


# Simulated buffers that simulator_destroy is allowed to release.
_LIVE_BUFFERS = {}


def _resolve(spec):
    s = SimulationSpec(**{k: getattr(spec, k) for k in spec.__dataclass_fields__})
    if s.frameCount < 1:
        raise HoloError(ErrorCode.INVALIDDIMENSION, "frameCount must be >= 1")
    s.frameWidth = max(C.PIXEL_QUANTA,
                       (int(s.frameWidth) // C.PIXEL_QUANTA) * C.PIXEL_QUANTA)
    s.frameHeight = max(C.PIXEL_QUANTA,
                        (int(s.frameHeight) // C.PIXEL_QUANTA) * C.PIXEL_QUANTA)
    if s.pixelSize is None or s.pixelSize <= 0:
        s.pixelSize = 20e-6
    s.polCount = min(max(int(s.polCount), 1), C.POLCOUNT_MAX)
    if not s.wavelengths:
        s.wavelengths = [1565e-9]
    if s.cameraPixelLevelCount is None or s.cameraPixelLevelCount < 2:
        s.cameraPixelLevelCount = 16384

    lam0 = s.wavelengths[0]
    wmax = geometry.max_resolvable_angle(lam0, s.pixelSize)
    wc = geometry.max_window_radius(wmax)
    tx, ty = geometry.recommended_tilt(wc, wmax)
    per_pol = lambda v, default: (  # noqa: E731
        [float(default(p)) for p in range(s.polCount)] if v is None
        else [float(v[min(p, len(v) - 1)]) for p in range(s.polCount)])
    s.refTiltX = per_pol(s.refTiltX, lambda p: tx)
    s.refTiltY = per_pol(s.refTiltY, lambda p: ty)
    s.refDefocus = per_pol(s.refDefocus, lambda p: 0.0)
    s.refWaist = per_pol(s.refWaist, lambda p: 0.0)
    if s.refAmplitude is None:
        s.refAmplitude = [1.0 + 0.0j] * s.polCount
    else:
        s.refAmplitude = [complex(s.refAmplitude[min(p, len(s.refAmplitude) - 1)])
                          for p in range(s.polCount)]

    if s.beamGroupCount is None or s.beamGroupCount <= 0:
        g = 1
        while hgbasis.mode_count(g) < s.frameCount:
            g += 1
        s.beamGroupCount = g

    def region_centre(p):
        x0, x1 = pol_region(p, s.polCount, s.frameWidth)
        return ((x0 + x1) / 2.0 - s.frameWidth / 2.0) * s.pixelSize

    s.beamCentreX = per_pol(s.beamCentreX, region_centre)
    s.beamCentreY = per_pol(s.beamCentreY, lambda p: 0.0)
    s.refBeamCentreX = per_pol(s.refBeamCentreX, lambda p: s.beamCentreX[p])
    s.refBeamCentreY = per_pol(s.refBeamCentreY, lambda p: s.beamCentreY[p])

    region_w = s.frameWidth // s.polCount
    default_waist = min(region_w, s.frameHeight) / 2.0 * s.pixelSize / 3.0
    s.beamWaist = per_pol(s.beamWaist, lambda p: default_waist)

    m = s.mode_count()
    if s.beamCoefs is None:
        coefs = np.zeros((s.frameCount, s.polCount, m), dtype=np.complex64)
        for f in range(s.frameCount):
            coefs[f, :, f % m] = 1.0
        s.beamCoefs = coefs
    else:
        s.beamCoefs = np.asarray(s.beamCoefs, dtype=np.complex64).reshape(
            s.frameCount, s.polCount, m)
    return s


def frame_wavelength(spec, frame_idx):
    lam_count = len(spec.wavelengths)
    if lam_count == 1:
        return spec.wavelengths[0]
    if spec.wavelengthOrdering == C.WAVELENGTHORDER_FAST:
        return spec.wavelengths[frame_idx % lam_count]
    block = (frame_idx * lam_count) // spec.frameCount
    return spec.wavelengths[min(block, lam_count - 1)]


def simulate_frames(spec, fname=None):
    """Generate frames; returns (float32 frames, uint16 frames, resolvedSpec).

    Float frames are the quantised levels rescaled to [0, 1], so the uint16
    copy carries exactly the same information
    (uint16 = float * (levelCount - 1)).
    """
    s = _resolve(spec)
    w, h, p = s.frameWidth, s.frameHeight, s.pixelSize
    x_full = (np.arange(w) - w // 2) * p
    y_axis = (np.arange(h) - h // 2) * p

    # Per-pol signal bases and reference grids on the pol's region.
    regions, signals, refs = [], [], []
    for pol in range(s.polCount):
        x0, x1 = pol_region(pol, s.polCount, w)
        regions.append((x0, x1))
        x_axis = x_full[x0:x1]
        hx = hgbasis.hg_profiles(s.beamGroupCount, x_axis,
                                 s.beamCentreX[pol], s.beamWaist[pol])
        hy = hgbasis.hg_profiles(s.beamGroupCount, y_axis,
                                 s.beamCentreY[pol], s.beamWaist[pol])
        modes = np.stack([np.outer(hy[n], hx[m])
                          for (m, n) in hgbasis.mode_indices(s.beamGroupCount)])
        signals.append(modes.astype(np.complex64))
        refs.append((x_axis, y_axis))

    frames = np.empty((s.frameCount, h, w), dtype=np.float64)
    total_sig = 0.0
    total_ref = 0.0
    fields_s = np.empty((s.frameCount, s.polCount), dtype=object)
    fields_r = np.empty_like(fields_s)
    for f in range(s.frameCount):
        lam = frame_wavelength(s, f)
        for pol in range(s.polCount):
            x_axis, y_ax = refs[pol]
            S = np.tensordot(s.beamCoefs[f, pol].astype(np.complex128),
                             signals[pol], axes=(0, 0))
            fx = np.sin(np.radians(s.refTiltX[pol])) / lam
            fy = np.sin(np.radians(s.refTiltY[pol])) / lam
            xr = x_axis - s.refBeamCentreX[pol]
            yr = y_ax - s.refBeamCentreY[pol]
            quad = (np.pi * s.refDefocus[pol] / lam) * (
                xr[None, :] ** 2 + yr[:, None] ** 2)
            phase = (2.0 * np.pi * (fx * x_axis[None, :] + fy * y_ax[:, None])
                     + quad)
            R = s.refAmplitude[pol] * np.exp(-1j * phase)
            if s.refWaist[pol] > 0:
                R = R * np.exp(-(xr[None, :] ** 2 + yr[:, None] ** 2)
                               / s.refWaist[pol] ** 2)
            fields_s[f, pol] = S
            fields_r[f, pol] = R
            total_sig += float(np.sum(np.abs(S) ** 2))
            total_ref += float(np.sum(np.abs(R) ** 2))

    # Default 1:1 signal:reference power, integrated over the batch, applied
    # as one global factor so relative frame powers survive.
    scale = np.sqrt(total_ref / total_sig) if total_sig > 0 else 1.0
    for f in range(s.frameCount):
        for pol in range(s.polCount):
            x0, x1 = regions[pol]
            combined = fields_s[f, pol] * scale + fields_r[f, pol]
            frames[f, :, x0:x1] = np.abs(combined) ** 2

    if s.fillFactorCorrection:
        fx = np.fft.fftfreq(w)
        fy = np.fft.fftfreq(h)
        env = np.sinc(fy)[:, None] * np.sinc(fx)[None, :]
        spec_f = np.fft.fft2(frames, axes=(-2, -1)) * env[None]
        frames = np.fft.ifft2(spec_f, axes=(-2, -1)).real
        np.maximum(frames, 0.0, out=frames)

    levels = s.cameraPixelLevelCount
    peak = frames.max()
    if peak <= 0:
        peak = 1.0
    q = np.clip(np.floor(frames / peak * (levels - 1) + 0.5), 0, levels - 1)
    u16 = q.astype(np.uint16)
    f32 = (q / float(levels - 1)).astype(np.float32)
    if fname:
        u16.astype("<u2").tofile(fname)
    _LIVE_BUFFERS[id(f32)] = (f32, u16, s)
    return f32, u16, s


def simulate_frames_simple(frame_count, frame_width, frame_height, pixel_size,
                           pol_count, wavelength, verbose=0):
    """Minimal-parameter generator; returns None on any invalid argument."""
    if (frame_count < 1 or frame_width < C.PIXEL_QUANTA
            or frame_height < C.PIXEL_QUANTA or pixel_size <= 0
            or not (1 <= pol_count <= C.POLCOUNT_MAX) or wavelength <= 0):
        return None
    spec = SimulationSpec(frameCount=frame_count, frameWidth=frame_width,
                          frameHeight=frame_height, pixelSize=pixel_size,
                          polCount=pol_count, wavelengths=[wavelength])
    f32, _, s = simulate_frames(spec)
    if verbose:
        print(f"simulated {s.frameCount} frames {s.frameWidth}x{s.frameHeight} "
              f"polCount={s.polCount} groupCount={s.beamGroupCount}")
    return f32


def simulator_destroy(frames):
    """Release a simulated buffer bundle; mirrors single-chunk ownership."""
    if frames is None:
        return ErrorCode.NULLPOINTER
    bundle = _LIVE_BUFFERS.pop(id(frames), None)
    if bundle is None:
        return ErrorCode.MEMORYALLOCATION
    return ErrorCode.SUCCESS
