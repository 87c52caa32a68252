"""Viewport rendering: RGB bitmaps of internal planes for diagnostics.

Complex planes map phase to hue and magnitude to value (HSV, full
saturation); magnitude-only planes render greyscale.  Batches are shown as
the summed intensity (magnitude modes) or the batch-mean field (complex
modes).  The dB mode floors at -60 dB below the peak.
"""

import struct

import numpy as np

from . import constants as C
from .errors import ErrorCode, HoloError

DB_FLOOR = -60.0


def _hsv_to_rgb(h, s, v):
    """Vectorised HSV -> RGB, all components in [0, 1]."""
    i = np.floor(h * 6.0).astype(int) % 6
    f = h * 6.0 - np.floor(h * 6.0)
    p = v * (1.0 - s)
    q = v * (1.0 - f * s)
    t = v * (1.0 - (1.0 - f) * s)
    r = np.choose(i, [v, q, p, p, t, v])
    g = np.choose(i, [t, v, v, q, p, p])
    b = np.choose(i, [p, p, t, v, v, q])
    return np.stack([r, g, b], axis=-1)


def complex_to_rgb(field):
    mag = np.abs(field)
    peak = mag.max()
    if peak <= 0:
        return np.zeros(field.shape + (3,), dtype=np.uint8)
    hue = (np.angle(field) + np.pi) / (2.0 * np.pi)
    rgb = _hsv_to_rgb(hue, np.ones_like(mag), mag / peak)
    return np.clip(rgb * 255.0 + 0.5, 0, 255).astype(np.uint8)


def magnitude_to_rgb(mag, db=False):
    peak = mag.max()
    if peak <= 0:
        return np.zeros(mag.shape + (3,), dtype=np.uint8)
    if db:
        with np.errstate(divide="ignore"):
            level = 20.0 * np.log10(np.where(mag > 0, mag / peak, 1e-30))
        value = np.clip((level - DB_FLOOR) / -DB_FLOOR, 0.0, 1.0)
    else:
        value = mag / peak
    grey = np.clip(value * 255.0 + 0.5, 0, 255).astype(np.uint8)
    return np.repeat(grey[..., None], 3, axis=-1)


def _pols_side_by_side(planes):
    """(P, h, w) complex or real -> single (h, P*w) plane."""
    return np.concatenate(list(planes), axis=-1)


def render(eng, display_mode, force_processing=0):
    """Render one display mode; returns (rgb, title) or None on bad input."""
    if not (0 <= display_mode < C.VIEWPORT_COUNT):
        raise HoloError(ErrorCode.INVALIDARGUMENT, "unknown display mode")
    if display_mode == C.VIEWPORT_NONE:
        return np.zeros((0, 0, 3), dtype=np.uint8), "viewport disabled"
    if force_processing or eng._field_r is None:
        eng.run_pipeline(0)
    cfg = eng.config
    b = eng._plan["batch"]

    if display_mode == C.VIEWPORT_CAMERAPLANE:
        frames = eng._staged
        rgb = magnitude_to_rgb(np.sqrt(np.maximum(frames, 0.0).sum(axis=0)))
    elif display_mode in (C.VIEWPORT_FOURIERPLANE, C.VIEWPORT_FOURIERPLANEDB):
        full = eng._fourier_full
        inten = (np.abs(full) ** 2).sum(axis=0)
        inten = np.fft.fftshift(inten, axes=-2)  # y axis only; x starts at DC
        rgb = magnitude_to_rgb(np.sqrt(_pols_side_by_side(inten)),
                               db=(display_mode == C.VIEWPORT_FOURIERPLANEDB))
    elif display_mode == C.VIEWPORT_FOURIERWINDOW:
        rgb = complex_to_rgb(_pols_side_by_side(eng._window.mean(axis=0)))
    elif display_mode == C.VIEWPORT_FOURIERWINDOWABS:
        inten = (np.abs(eng._window) ** 2).sum(axis=0)
        rgb = magnitude_to_rgb(np.sqrt(_pols_side_by_side(inten)))
    elif display_mode in (C.VIEWPORT_FIELDPLANE, C.VIEWPORT_FIELDPLANEABS):
        fields = eng.get_fields()[0]
        if display_mode == C.VIEWPORT_FIELDPLANE:
            rgb = complex_to_rgb(_pols_side_by_side(fields.mean(axis=0)))
        else:
            inten = (np.abs(fields) ** 2).sum(axis=0)
            rgb = magnitude_to_rgb(np.sqrt(_pols_side_by_side(inten)))
    else:  # VIEWPORT_FIELDPLANEMODE: resynthesis from the modal coefficients
        if eng._coefs is None or cfg.basisGroupCount < 1:
            raise HoloError(ErrorCode.NULLPOINTER, "no modal coefficients")
        planes = []
        m = eng._mode_count
        for pol in range(cfg.polCount):
            modes = eng._basis_for_pol(pol).materialise()
            coefs = eng._coefs[:, pol * m:(pol + 1) * m].mean(axis=0)
            planes.append(np.tensordot(coefs.astype(np.complex64), modes,
                                       axes=(0, 0)))
        rgb = complex_to_rgb(_pols_side_by_side(np.stack(planes)))

    title = (f"mode={display_mode} batch={b} pol={cfg.polCount} "
             f"plane={rgb.shape[1]}x{rgb.shape[0]}")
    eng.window_title = title[:C.VIEWPORT_NAMELENGTH]
    return rgb, eng.window_title


def write_bmp(path, rgb):
    """Uncompressed 24-bit bottom-up BMP."""
    height, width = rgb.shape[0], rgb.shape[1]
    row_size = (width * 3 + 3) & ~3
    image_size = row_size * height
    header = struct.pack("<2sIHHI", b"BM", 14 + 40 + image_size, 0, 0, 14 + 40)
    info = struct.pack("<IiiHHIIiiII", 40, width, height, 1, 24, 0,
                       image_size, 2835, 2835, 0, 0)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(info)
        pad = b"\x00" * (row_size - width * 3)
        for row in rgb[::-1]:
            fh.write(row[:, ::-1].tobytes())  # BGR order
            fh.write(pad)


def render_to_file(eng, display_mode, force_processing, path):
    rgb, _ = render(eng, display_mode, force_processing)
    try:
        if str(path).lower().endswith(".bmp"):
            write_bmp(path, rgb)
        else:
            with open(path, "wb") as fh:
                fh.write(rgb.tobytes())
    except OSError:
        raise HoloError(ErrorCode.FILENOTCREATED, str(path))
    return ErrorCode.SUCCESS
