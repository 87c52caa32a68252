"""Handle-based API surface.

Mirrors a C-style calling convention: operations take an integer handle,
setters return an :class:`ErrorCode` int, getters return the value or a
zero/None sentinel when the handle (or an index) is invalid.  The same
surface backs the settings-file runner and the RPC boundary, so error codes
here are contractual.
"""

import numpy as np

from . import constants as C
from .config import floor_to_quanta
from .engine import Engine
from .errors import ErrorCode, HoloError

_registry = {}
_free_indices = []
_next_index = 0


def create_handle():
    """Create a default-configured engine; returns its handle index.

    Indices of destroyed handles may be reused; live indices never collide.
    A failed allocation returns -MEMORYALLOCATION.
    """
    global _next_index
    if _free_indices:
        idx = min(_free_indices)
        _free_indices.remove(idx)
    else:
        idx = _next_index
        _next_index += 1
    try:
        _registry[idx] = Engine()
    except MemoryError:
        _free_indices.append(idx)
        return -int(ErrorCode.MEMORYALLOCATION)
    return idx


def destroy_handle(handle):
    if handle not in _registry:
        return ErrorCode.INVALIDHANDLE
    del _registry[handle]
    _free_indices.append(handle)
    return ErrorCode.SUCCESS


def engine(handle):
    """The Engine behind a handle, or None."""
    return _registry.get(handle)


def live_handles():
    return sorted(_registry)


def reset_registry():
    """Drop every live handle and restart enumeration (test support)."""
    global _next_index
    _registry.clear()
    _free_indices.clear()
    _next_index = 0


def _code(func):
    """Run func(), translating HoloError into its error code."""
    try:
        func()
        return ErrorCode.SUCCESS
    except HoloError as err:
        return err.code


def _check_pol(eng, pol):
    if not (0 <= pol < eng.config.polCount):
        raise HoloError(ErrorCode.INVALIDPOLARISATION, f"pol {pol}")


def _check_axis(axis):
    if axis not in (0, 1):
        raise HoloError(ErrorCode.INVALIDAXIS, f"axis {axis}")


# ------------------------------------------------------------ frame buffer

def set_frame_buffer(handle, buffer):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    return _code(lambda: eng.source.set_float32(buffer))


def get_frame_buffer(handle):
    eng = engine(handle)
    if eng is None:
        return None
    return eng.source.float_buffer()


def set_frame_buffer_uint16(handle, buffer, transpose_mode=0):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    return _code(lambda: eng.source.set_uint16(buffer, transpose_mode))


def get_frame_buffer_uint16(handle):
    eng = engine(handle)
    if eng is None:
        return None, 0
    return eng.source.u16, eng.source.transpose


def set_frame_buffer_from_file(handle, fname):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    return _code(lambda: eng.source.set_from_file(fname))


def config_set_frame_dimensions(handle, width, height):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    if width < C.PIXEL_QUANTA or height < C.PIXEL_QUANTA:
        return ErrorCode.INVALIDDIMENSION
    eng.config.frameWidth = floor_to_quanta(width)
    eng.config.frameHeight = floor_to_quanta(height)
    return ErrorCode.SUCCESS


def config_get_frame_dimensions(handle):
    eng = engine(handle)
    if eng is None:
        return 0, 0
    return eng.config.frameWidth, eng.config.frameHeight


def config_set_frame_pixel_size(handle, pixel_size):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    if pixel_size <= 0:
        return ErrorCode.INVALIDDIMENSION
    eng.config.framePixelSize = float(pixel_size)
    return ErrorCode.SUCCESS


def config_get_frame_pixel_size(handle):
    eng = engine(handle)
    return 0.0 if eng is None else eng.config.framePixelSize


def config_set_pol_count(handle, pol_count):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    if pol_count not in (1, 2):
        return ErrorCode.INVALIDPOLARISATION
    eng.config.polCount = int(pol_count)
    return ErrorCode.SUCCESS


def config_get_pol_count(handle):
    eng = engine(handle)
    return 0 if eng is None else eng.config.polCount


# ------------------------------------------------------------ window sizes

def config_set_fft_window_size(handle, width, height):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    if width < C.PIXEL_QUANTA or height < C.PIXEL_QUANTA:
        return ErrorCode.INVALIDDIMENSION
    eng.config.fftWindowSizeX = floor_to_quanta(width)
    eng.config.fftWindowSizeY = floor_to_quanta(height)
    return ErrorCode.SUCCESS


def config_get_fft_window_size(handle):
    eng = engine(handle)
    if eng is None:
        return 0, 0
    return eng.config.fftWindowSizeX, eng.config.fftWindowSizeY


def config_set_fft_window_size_x(handle, width):
    """Returns the width actually set (floored to a multiple of 16), 0 on error."""
    eng = engine(handle)
    if eng is None or width < C.PIXEL_QUANTA:
        return 0
    eng.config.fftWindowSizeX = floor_to_quanta(width)
    return eng.config.fftWindowSizeX


def config_get_fft_window_size_x(handle):
    eng = engine(handle)
    return 0 if eng is None else eng.config.fftWindowSizeX


def config_set_fft_window_size_y(handle, height):
    eng = engine(handle)
    if eng is None or height < C.PIXEL_QUANTA:
        return 0
    eng.config.fftWindowSizeY = floor_to_quanta(height)
    return eng.config.fftWindowSizeY


def config_get_fft_window_size_y(handle):
    eng = engine(handle)
    return 0 if eng is None else eng.config.fftWindowSizeY


def config_set_fourier_window_radius(handle, radius_deg):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    eng.config.fourierWindowRadius = float(radius_deg)
    return ErrorCode.SUCCESS


def config_get_fourier_window_radius(handle):
    eng = engine(handle)
    return 0.0 if eng is None else eng.config.fourierWindowRadius


def config_set_ifft_resolution_mode(handle, mode):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    if mode not in (0, 1):
        return ErrorCode.INVALIDARGUMENT
    eng.config.resolutionMode = int(mode)
    return ErrorCode.SUCCESS


def config_get_ifft_resolution_mode(handle):
    eng = engine(handle)
    return 0 if eng is None else eng.config.resolutionMode


def config_set_fill_factor_correction_enabled(handle, enabled):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    eng.config.fillFactorCorrectionEnabled = 1 if enabled else 0
    return ErrorCode.SUCCESS


def config_get_fill_factor_correction_enabled(handle):
    eng = engine(handle)
    return 0 if eng is None else eng.config.fillFactorCorrectionEnabled


# -------------------------------------------------------------- wavelength

def config_set_wavelength_centre(handle, lambda0):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    if lambda0 <= 0:
        return ErrorCode.INVALIDARGUMENT
    eng.config.wavelengthCentre = float(lambda0)
    return ErrorCode.SUCCESS


def config_get_wavelength_centre(handle):
    eng = engine(handle)
    return 0.0 if eng is None else eng.config.wavelengthCentre


def config_set_wavelengths(handle, wavelengths, wavelength_count=None):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    if wavelengths is None:
        return ErrorCode.NULLPOINTER
    vals = [float(v) for v in np.asarray(wavelengths).reshape(-1)]
    if wavelength_count is not None:
        vals = vals[:wavelength_count]
    if len(vals) < 1 or (wavelength_count or len(vals)) > len(vals):
        return ErrorCode.INVALIDDIMENSION
    eng.config.wavelengths = vals
    return ErrorCode.SUCCESS


def config_set_wavelengths_linear_frequency(handle, start, stop, count):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    if count < 1 or start <= 0 or stop <= 0:
        return ErrorCode.INVALIDDIMENSION
    if count == 1:
        eng.config.wavelengths = [float(start)]
        return ErrorCode.SUCCESS
    f0, f1 = 1.0 / start, 1.0 / stop
    freqs = f0 + np.arange(count) * (f1 - f0) / (count - 1)
    eng.config.wavelengths = list(1.0 / freqs)
    return ErrorCode.SUCCESS


def config_get_wavelengths(handle):
    eng = engine(handle)
    if eng is None:
        return None, 0
    lams = eng.config.wavelength_list()
    return np.asarray(lams, dtype=np.float32), len(lams)


def config_set_wavelength_ordering(handle, inout_idx, ordering):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    if inout_idx not in (0, 1) or ordering not in (0, 1):
        return ErrorCode.INVALIDARGUMENT
    eng.config.wavelengthOrdering[inout_idx] = int(ordering)
    return ErrorCode.SUCCESS


def config_get_wavelength_ordering(handle, inout_idx):
    eng = engine(handle)
    if eng is None or inout_idx not in (0, 1):
        return 0
    return eng.config.wavelengthOrdering[inout_idx]


# --------------------------------------------------------------- alignment

def config_set_beam_centre(handle, axis, pol, centre):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE

    def do():
        _check_axis(axis)
        _check_pol(eng, pol)
        eng.config.beamCentre[axis][pol] = float(centre)
    return _code(do)


def config_get_beam_centre(handle, axis, pol):
    eng = engine(handle)
    if eng is None or axis not in (0, 1) or not (0 <= pol < eng.config.polCount):
        return 0.0
    return eng.config.beamCentre[axis][pol]


def config_set_tilt(handle, axis, pol, tilt):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE

    def do():
        _check_axis(axis)
        _check_pol(eng, pol)
        eng.config.tilt[axis][pol] = float(tilt)
    return _code(do)


def config_get_tilt(handle, axis, pol):
    eng = engine(handle)
    if eng is None or axis not in (0, 1) or not (0 <= pol < eng.config.polCount):
        return 0.0
    return eng.config.tilt[axis][pol]


def config_set_defocus(handle, pol, defocus):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE

    def do():
        _check_pol(eng, pol)
        eng.config.defocus[pol] = float(defocus)
    return _code(do)


def config_get_defocus(handle, pol):
    eng = engine(handle)
    if eng is None or not (0 <= pol < eng.config.polCount):
        return 0.0
    return eng.config.defocus[pol]


def _lock_setter(name):
    def setter(handle, pol_lock):
        eng = engine(handle)
        if eng is None:
            return ErrorCode.INVALIDHANDLE
        setattr(eng.config, name, 1 if pol_lock else 0)
        return ErrorCode.SUCCESS
    return setter


def _lock_getter(name):
    def getter(handle):
        eng = engine(handle)
        return 0 if eng is None else getattr(eng.config, name)
    return getter


config_set_pol_lock_tilt = _lock_setter("polLockTilt")
config_get_pol_lock_tilt = _lock_getter("polLockTilt")
config_set_pol_lock_defocus = _lock_setter("polLockDefocus")
config_get_pol_lock_defocus = _lock_getter("polLockDefocus")
config_set_pol_lock_basis_waist = _lock_setter("polLockBasisWaist")
config_get_pol_lock_basis_waist = _lock_getter("polLockBasisWaist")


# ------------------------------------------------------------------- basis

def config_set_basis_group_count(handle, group_count):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    if group_count < 0:
        return ErrorCode.INVALIDARGUMENT
    eng.config.basisGroupCount = int(group_count)
    return ErrorCode.SUCCESS


def config_get_basis_group_count(handle):
    eng = engine(handle)
    return 0 if eng is None else eng.config.basisGroupCount


def config_set_basis_waist(handle, pol, waist):
    # A single waist is shared by both polarisations; setting either pol
    # updates both.
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE

    def do():
        _check_pol(eng, pol)
        if waist <= 0:
            raise HoloError(ErrorCode.INVALIDDIMENSION, "waist must be positive")
        eng.config.basisWaist[0] = float(waist)
        eng.config.basisWaist[1] = float(waist)
    return _code(do)


def config_get_basis_waist(handle, pol):
    eng = engine(handle)
    if eng is None or not (0 <= pol < eng.config.polCount):
        return 0.0
    return eng.config.basisWaist[pol]


def config_set_basis_type(handle, basis_type):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    if basis_type not in (C.BASISTYPE_HG, C.BASISTYPE_LG, C.BASISTYPE_CUSTOM):
        return ErrorCode.INVALIDARGUMENT
    eng.config.basisType = int(basis_type)
    return ErrorCode.SUCCESS


def config_get_basis_type(handle):
    eng = engine(handle)
    return 0 if eng is None else eng.config.basisType


def config_set_basis_type_hg(handle):
    return config_set_basis_type(handle, C.BASISTYPE_HG)


def config_set_basis_type_lg(handle):
    return config_set_basis_type(handle, C.BASISTYPE_LG)


def config_set_basis_type_custom(handle, mode_count_in, mode_count_out, transform):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    if transform is None:
        return ErrorCode.NULLPOINTER
    if mode_count_in < 1 or mode_count_out < 1:
        return ErrorCode.INVALIDDIMENSION
    arr = np.asarray(transform, dtype=np.complex64)
    if arr.size < mode_count_in * mode_count_out:
        return ErrorCode.INVALIDDIMENSION
    eng.custom_transform = arr.reshape(mode_count_out, mode_count_in).copy()
    eng.config.basisType = C.BASISTYPE_CUSTOM
    return ErrorCode.SUCCESS


# -------------------------------------------------------------- auto-align

def _flag_setter(name):
    def setter(handle, enable):
        eng = engine(handle)
        if eng is None:
            return ErrorCode.INVALIDHANDLE
        setattr(eng.config, name, 1 if enable else 0)
        return ErrorCode.SUCCESS
    return setter


def _flag_getter(name):
    def getter(handle):
        eng = engine(handle)
        return 0 if eng is None else getattr(eng.config, name)
    return getter


config_set_auto_align_tilt = _flag_setter("autoAlignTilt")
config_get_auto_align_tilt = _flag_getter("autoAlignTilt")
config_set_auto_align_beam_centre = _flag_setter("autoAlignBeamCentre")
config_get_auto_align_beam_centre = _flag_getter("autoAlignBeamCentre")
config_set_auto_align_defocus = _flag_setter("autoAlignDefocus")
config_get_auto_align_defocus = _flag_getter("autoAlignDefocus")
config_set_auto_align_basis_waist = _flag_setter("autoAlignBasisWaist")
config_get_auto_align_basis_waist = _flag_getter("autoAlignBasisWaist")
config_set_auto_align_fourier_window_radius = _flag_setter("autoAlignFourierWindowRadius")
config_get_auto_align_fourier_window_radius = _flag_getter("autoAlignFourierWindowRadius")
config_set_auto_align_pol_independence = _flag_setter("autoAlignPolIndependence")
config_get_auto_align_pol_independence = _flag_getter("autoAlignPolIndependence")
config_set_auto_align_basis_mul_conj_trans = _flag_setter("autoAlignBasisMulConjTrans")
config_get_auto_align_basis_mul_conj_trans = _flag_getter("autoAlignBasisMulConjTrans")


def config_set_auto_align_tol(handle, tolerance):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    eng.config.autoAlignTol = float(tolerance)
    return ErrorCode.SUCCESS


def config_get_auto_align_tol(handle):
    eng = engine(handle)
    return 0.0 if eng is None else eng.config.autoAlignTol


def config_set_auto_align_mode(handle, align_mode):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    if align_mode not in (0, 1, 2):
        return ErrorCode.INVALIDARGUMENT
    eng.config.autoAlignMode = int(align_mode)
    return ErrorCode.SUCCESS


def config_get_auto_align_mode(handle):
    eng = engine(handle)
    return 0 if eng is None else eng.config.autoAlignMode


def config_set_auto_align_goal_idx(handle, goal_idx):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    if not (0 <= goal_idx < C.METRIC_COUNT):
        return ErrorCode.INVALIDARGUMENT
    eng.config.autoAlignGoalIdx = int(goal_idx)
    return ErrorCode.SUCCESS


def config_get_auto_align_goal_idx(handle):
    eng = engine(handle)
    return 0 if eng is None else eng.config.autoAlignGoalIdx


# ------------------------------------------------------- threads, verbosity

def config_set_thread_count(handle, thread_count):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    import os
    limit = 2 * (os.cpu_count() or 1)
    if thread_count < 1 or thread_count > limit:
        thread_count = os.cpu_count() or 1  # defaults, no error
    eng.config.threadCount = int(thread_count)
    return ErrorCode.SUCCESS


def config_get_thread_count(handle):
    eng = engine(handle)
    return 0 if eng is None else eng.config.threadCount


def config_set_verbosity(handle, verbosity):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    eng.config.verbosity = max(0, min(int(verbosity), C.VERBOSITY_MAX))
    return ErrorCode.SUCCESS


def config_get_verbosity(handle):
    eng = engine(handle)
    return 0 if eng is None else eng.config.verbosity


def config_set_plan_mode(handle, plan_mode):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    if plan_mode not in (0, 1, 2, 3):
        return ErrorCode.INVALIDARGUMENT
    eng.config.planMode = int(plan_mode)
    return ErrorCode.SUCCESS


def config_get_plan_mode(handle):
    eng = engine(handle)
    return 0 if eng is None else eng.config.planMode


# ----------------------------------------------------------- config backup

def config_backup_save(handle):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    eng.backup = eng.config.snapshot()
    return ErrorCode.SUCCESS


def config_backup_load(handle):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    if eng.backup is None:
        return ErrorCode.NULLPOINTER
    eng.config.restore(eng.backup)
    return ErrorCode.SUCCESS


# ------------------------------------------------------------- calibration

def config_set_ref_calibration_intensity(handle, cal, wavelength_count, width, height):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    eng.ref_cal.set_intensity(cal, wavelength_count, width, height)
    return ErrorCode.SUCCESS


def config_set_ref_calibration_field(handle, cal, wavelength_count, width, height):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    eng.ref_cal.set_field(cal, wavelength_count, width, height)
    return ErrorCode.SUCCESS


def config_set_ref_calibration_from_file(handle, fname, wavelength_count, width, height):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    return _code(lambda: eng.ref_cal.set_from_file(fname, wavelength_count,
                                                   width, height))


def config_set_ref_calibration_enabled(handle, enabled):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    eng.ref_cal.enabled = 1 if enabled else 0
    return ErrorCode.SUCCESS


def config_get_ref_calibration_enabled(handle):
    eng = engine(handle)
    return 0 if eng is None else eng.ref_cal.enabled


def config_get_ref_calibration_fields(handle):
    eng = engine(handle)
    if eng is None:
        return None
    return eng.get_ref_calibration_fields()


def config_set_batch_calibration(handle, cal, pol_count, batch_count):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    eng.set_batch_calibration(cal, pol_count, batch_count)
    return ErrorCode.SUCCESS


def config_set_batch_calibration_from_file(handle, fname, pol_count, batch_count):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    import os
    if not fname:
        return ErrorCode.NULLPOINTER
    if not os.path.isfile(fname):
        return ErrorCode.FILENOTFOUND
    if pol_count < 1 or batch_count < 1:
        eng.batch_cal_enabled = 0
        return ErrorCode.INVALIDARGUMENT
    raw = np.fromfile(fname, dtype="<f4")
    if raw.size < pol_count * batch_count * 2:
        return ErrorCode.INVALIDARGUMENT
    cal = (raw[0::2] + 1j * raw[1::2])[:pol_count * batch_count]
    eng.set_batch_calibration(cal.astype(np.complex64), pol_count, batch_count)
    return ErrorCode.SUCCESS


def config_set_batch_calibration_enabled(handle, enabled):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    eng.batch_cal_enabled = 1 if (enabled and eng.batch_cal is not None) else 0
    return ErrorCode.SUCCESS


def config_get_batch_calibration_enabled(handle):
    eng = engine(handle)
    return 0 if eng is None else eng.batch_cal_enabled


def config_get_batch_calibration(handle):
    eng = engine(handle)
    if eng is None or eng.batch_cal is None:
        return None, 0, 0
    return eng.batch_cal, eng.batch_cal.shape[0], eng.batch_cal.shape[1]


# ------------------------------------------------------------------- batch

def config_set_batch_count(handle, batch_count):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    eng.config.batchCount = max(1, int(batch_count))
    return ErrorCode.SUCCESS


def config_get_batch_count(handle):
    eng = engine(handle)
    return 0 if eng is None else eng.config.batchCount


def config_set_batch_avg_count(handle, avg_count):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    eng.config.avgCount = max(1, int(avg_count))
    return ErrorCode.SUCCESS


def config_get_batch_avg_count(handle):
    eng = engine(handle)
    return 0 if eng is None else eng.config.avgCount


def config_set_batch_avg_mode(handle, avg_mode):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    eng.config.avgMode = avg_mode if avg_mode in (0, 1, 2) else 0
    return ErrorCode.SUCCESS


def config_get_batch_avg_mode(handle):
    eng = engine(handle)
    return 0 if eng is None else eng.config.avgMode


def set_batch(handle, batch_count, frames):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE

    def do():
        eng.source.set_float32(frames)
        eng.config.batchCount = max(1, int(batch_count))
        eng.config.avgCount = 1
    return _code(do)


def set_batch_avg(handle, batch_count, frames, avg_count, avg_mode):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE

    def do():
        eng.source.set_float32(frames)
        eng.config.batchCount = max(1, int(batch_count))
        eng.config.avgCount = max(1, int(avg_count))
        eng.config.avgMode = avg_mode if avg_mode in (0, 1, 2) else 0
    return _code(do)


def set_batch_uint16(handle, batch_count, frames, transpose=0):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE

    def do():
        eng.source.set_uint16(frames, transpose)
        eng.config.batchCount = max(1, int(batch_count))
        eng.config.avgCount = 1
    return _code(do)


def set_batch_avg_uint16(handle, batch_count, frames, avg_count, avg_mode, transpose=0):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE

    def do():
        eng.source.set_uint16(frames, transpose)
        eng.config.batchCount = max(1, int(batch_count))
        eng.config.avgCount = max(1, int(avg_count))
        eng.config.avgMode = avg_mode if avg_mode in (0, 1, 2) else 0
    return _code(do)


# -------------------------------------------------------------- processing

def process_fft(handle):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    return _code(eng.process_fft)


def process_ifft(handle):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    return _code(eng.process_ifft)


def process_remove_tilt(handle):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    return _code(eng.process_remove_tilt)


def process_basis_extract_coefs(handle):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    return _code(eng.extract_coefs)


def process_batch(handle):
    eng = engine(handle)
    if eng is None:
        return None, 0, 0, 0
    try:
        return eng.process_batch()
    except HoloError:
        return None, 0, 0, 0


def process_batch_frequency_sweep_linear(handle, lambda_start, lambda_stop,
                                         lambda_count):
    eng = engine(handle)
    if eng is None:
        return None, 0, 0, 0
    try:
        return eng.process_batch_frequency_sweep_linear(lambda_start,
                                                        lambda_stop,
                                                        lambda_count)
    except HoloError:
        return None, 0, 0, 0


def process_batch_wavelength_sweep_arbitrary(handle, wavelengths, lambda_count):
    eng = engine(handle)
    if eng is None:
        return None, 0, 0, 0
    try:
        return eng.process_batch_wavelength_sweep_arbitrary(wavelengths,
                                                            lambda_count)
    except HoloError:
        return None, 0, 0, 0


# ----------------------------------------------------------------- getters

def get_fields(handle):
    eng = engine(handle)
    if eng is None:
        return None
    try:
        return eng.get_fields()
    except HoloError:
        return None


def get_fields16(handle):
    eng = engine(handle)
    if eng is None:
        return None
    try:
        return eng.get_fields16()
    except HoloError:
        return None


def basis_get_coefs(handle):
    eng = engine(handle)
    if eng is None:
        return None, 0, 0, 0
    return eng.coef_view()


def basis_get_fields(handle):
    eng = engine(handle)
    if eng is None:
        return None
    return eng.basis_get_fields()


def get_fourier_plane_full(handle):
    eng = engine(handle)
    if eng is None:
        return None
    return eng.get_fourier_plane_full()


def get_fourier_plane_window(handle):
    eng = engine(handle)
    if eng is None:
        return None
    return eng.get_fourier_plane_window()


def batch_get_summary(handle, plane_idx):
    """Returns (errorCode, summary-or-None)."""
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE, None
    try:
        return ErrorCode.SUCCESS, eng.batch_summary(plane_idx)
    except HoloError as err:
        return err.code, None


# ----------------------------------------------------------------- metrics

def auto_align(handle):
    eng = engine(handle)
    if eng is None:
        return 0.0
    from .align import auto_align as run
    return run(eng)


def auto_align_calc_metrics(handle):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    return _code(eng.calc_metrics)


def auto_align_get_metric(handle, metric_idx):
    eng = engine(handle)
    if eng is None or not (0 <= metric_idx < C.METRIC_COUNT):
        return 0.0
    return eng.metric(metric_idx)


def auto_align_get_metrics(handle, metric_idx):
    eng = engine(handle)
    if eng is None or not (0 <= metric_idx < C.METRIC_COUNT):
        return None
    return eng.metrics_array(metric_idx)


# ---------------------------------------------------------------- viewport

def get_viewport(handle, display_mode, force_processing=0):
    """(rgb, width, height, windowTitle) or None on invalid handle/mode."""
    eng = engine(handle)
    if eng is None:
        return None
    from .viewport import render
    try:
        rgb, title = render(eng, display_mode, force_processing)
    except HoloError:
        return None
    return rgb, rgb.shape[1], rgb.shape[0], title


def get_viewport_to_file(handle, display_mode, force_processing, filename):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    from .viewport import render_to_file
    return _code(lambda: render_to_file(eng, display_mode, force_processing,
                                        filename))


# --------------------------------------------------------------- benchmark

def benchmark(handle, goal_duration=1.0):
    """(batchesPerSecond, info[6]) or (0.0, None) on invalid handle."""
    eng = engine(handle)
    if eng is None:
        return 0.0, None
    from .bench import benchmark as run
    return run(eng, goal_duration)


def benchmark_estimate_thread_count_optimal(handle, goal_duration=1.0):
    eng = engine(handle)
    if eng is None:
        return ErrorCode.INVALIDHANDLE
    from .bench import estimate_thread_count_optimal as run
    return run(eng, goal_duration)
