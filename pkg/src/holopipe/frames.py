"""Frame-buffer sources and Reference-wave calibration state.

A float32 source is consumed directly (the engine keeps the caller's array
reference, so external updates are seen on the next run).  A uint16 source is
re-converted to a float32 staging buffer on every pipeline run, optionally
transposing each frame.  File sources are read once into an internally owned
uint16 buffer; dimensions are validated when processing starts.
"""

import os

import numpy as np

from .errors import ErrorCode, HoloError

SOURCE_NONE = 0
SOURCE_FLOAT32 = 1
SOURCE_UINT16 = 2
SOURCE_FILE = 3

CAL_NONE = 0
CAL_INTENSITY = 1
CAL_FIELD = 2

# Floor on normalised calibration intensity; keeps dark pixels from blowing
# up the applied 1/sqrt(I) correction.
CAL_INTENSITY_FLOOR = 1e-6


class FrameSource:
    """Holds whichever buffer was registered last and stages float32 views."""

    def __init__(self):
        self.kind = SOURCE_NONE
        self.f32 = None
        self.u16 = None
        self.transpose = 0
        self._staged = None

    def set_float32(self, buffer):
        if buffer is None:
            raise HoloError(ErrorCode.NULLPOINTER, "frame buffer is null")
        arr = np.asarray(buffer, dtype=np.float32)
        self.kind = SOURCE_FLOAT32
        self.f32 = arr
        self.u16 = None
        self._staged = None

    def set_uint16(self, buffer, transpose_mode=0):
        if buffer is None:
            raise HoloError(ErrorCode.NULLPOINTER, "frame buffer is null")
        arr = np.asarray(buffer)
        if arr.dtype != np.uint16:
            arr = arr.astype(np.uint16)
        self.kind = SOURCE_UINT16
        self.u16 = arr
        self.f32 = None
        self.transpose = 1 if transpose_mode else 0
        self._staged = None

    def set_from_file(self, path):
        if not path:
            raise HoloError(ErrorCode.NULLPOINTER, "filename is null")
        if not os.path.isfile(path):
            raise HoloError(ErrorCode.FILENOTFOUND, path)
        try:
            raw = np.fromfile(path, dtype="<u2")
        except MemoryError as exc:
            raise HoloError(ErrorCode.MEMORYALLOCATION, str(exc))
        self.kind = SOURCE_FILE
        self.u16 = raw
        self.f32 = None
        self.transpose = 0
        self._staged = None

    def staged_frames(self, frame_count, width, height):
        """Frames as float32 (frameCount, height, width); converts if needed.

        uint16 sources are reconverted on every call since the external
        buffer may have changed.
        """
        need = frame_count * width * height
        if self.kind == SOURCE_FLOAT32:
            flat = self.f32.reshape(-1)
            if flat.size < need:
                raise HoloError(ErrorCode.INVALIDDIMENSION,
                                f"frame buffer holds {flat.size} pixels, need {need}")
            return flat[:need].reshape(frame_count, height, width)
        if self.kind in (SOURCE_UINT16, SOURCE_FILE):
            flat = self.u16.reshape(-1)
            if flat.size < need:
                raise HoloError(ErrorCode.INVALIDDIMENSION,
                                f"frame buffer holds {flat.size} pixels, need {need}")
            if self.transpose:
                frames = flat[:need].reshape(frame_count, width, height)
                staged = np.ascontiguousarray(
                    np.transpose(frames, (0, 2, 1))).astype(np.float32)
            else:
                staged = flat[:need].reshape(frame_count, height, width).astype(np.float32)
            self._staged = staged
            return staged
        raise HoloError(ErrorCode.NULLPOINTER, "no frame source set")

    def float_buffer(self):
        """The float32 buffer a caller would see; staging copy in uint16 mode."""
        if self.kind == SOURCE_FLOAT32:
            return self.f32
        return self._staged


class RefCalibration:
    """Reference-wave calibration: raw frames plus the processed result."""

    def __init__(self):
        self.kind = CAL_NONE
        self.enabled = 0
        self.raw = None            # (wavelengthCount, height, width)
        self.wavelength_count = 0
        self.applied = None        # (wavelengthCount, polCount, h, w) complex64
        self.applied_axes = None   # (x, y)

    def set_intensity(self, cal, wavelength_count, width, height):
        if cal is None or width <= 0 or height <= 0 or wavelength_count <= 0:
            # Documented behaviour: invalid arguments disable calibration.
            self.disable()
            return False
        arr = np.asarray(cal).reshape(wavelength_count, height, width)
        self.kind = CAL_INTENSITY
        self.raw = arr.astype(np.float32).copy()
        self.wavelength_count = int(wavelength_count)
        self.enabled = 1
        self.applied = None
        return True

    def set_field(self, cal, wavelength_count, width, height):
        if cal is None or width <= 0 or height <= 0 or wavelength_count <= 0:
            self.disable()
            return False
        arr = np.asarray(cal, dtype=np.complex64).reshape(wavelength_count, height, width)
        self.kind = CAL_FIELD
        self.raw = arr.copy()
        self.wavelength_count = int(wavelength_count)
        self.enabled = 1
        self.applied = None
        return True

    def set_from_file(self, path, wavelength_count, width, height):
        """Load a calibration file; pixel size in bytes decides the format.

        2 bytes/pixel is a uint16 intensity, 8 bytes/pixel an interleaved
        float32 complex field.
        """
        if not path:
            raise HoloError(ErrorCode.NULLPOINTER, "filename is null")
        if not os.path.isfile(path):
            raise HoloError(ErrorCode.FILENOTFOUND, path)
        if width <= 0 or height <= 0 or wavelength_count <= 0:
            self.disable()
            return False
        count = wavelength_count * width * height
        size = os.path.getsize(path)
        if size == count * 2:
            raw = np.fromfile(path, dtype="<u2", count=count)
            return self.set_intensity(raw, wavelength_count, width, height)
        if size == count * 8:
            raw = np.fromfile(path, dtype="<f4", count=count * 2)
            cal = raw[0::2] + 1j * raw[1::2]
            return self.set_field(cal.astype(np.complex64),
                                  wavelength_count, width, height)
        raise HoloError(ErrorCode.INVALIDARGUMENT,
                        f"file size {size} matches neither intensity nor field layout")

    def disable(self):
        self.enabled = 0

    def normalised_intensity(self):
        """Raw intensity scaled so the global maximum equals 1."""
        if self.kind == CAL_INTENSITY:
            inten = self.raw.astype(np.float64)
        elif self.kind == CAL_FIELD:
            inten = np.abs(self.raw.astype(np.complex128)) ** 2
        else:
            return None
        peak = inten.max()
        if peak <= 0:
            return np.ones_like(inten)
        return inten / peak
