"""Tab-delimited settings files: parsing, serialisation, the batch runner
and the binary/plain-text output writers.

One directive per line, key and values separated by tabs; keys are matched
case-insensitively and mirror the setter surface (multi-valued keys map to
per-polarisation arguments).  Unknown keys warn at verbosity >= 1 and are
skipped; an unparseable value aborts the run with the generic error code.
"""

import os

import numpy as np

from . import api
from . import constants as C
from .align import auto_align
from .console import log
from .errors import ErrorCode, HoloError
from .viewport import render_to_file


def parse_settings(path):
    """Ordered (key, values) directives from a tab-delimited text file."""
    if not path:
        raise HoloError(ErrorCode.NULLPOINTER, "settings path is null")
    if not os.path.isfile(path):
        raise HoloError(ErrorCode.FILENOTFOUND, path)
    directives = []
    with open(path, "r") as fh:
        for line in fh:
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = [p for p in line.split("\t") if p != ""]
            if len(parts) == 1:
                parts = line.split()  # tolerate space-delimited files
            directives.append((parts[0], parts[1:]))
    return directives


def _floats(values):
    return [float(v) for v in values]


def _f(values):
    return float(values[0])


def _i(values):
    return int(float(values[0]))


def _per_pol(handle, values, setter):
    # Values beyond the configured polCount are skipped, so per-pol lines
    # may precede the PolCount directive without aborting the run.
    for pol, v in enumerate(_floats(values)[:2]):
        code = setter(handle, pol, v)
        if code not in (ErrorCode.SUCCESS, ErrorCode.INVALIDPOLARISATION):
            return code
    return ErrorCode.SUCCESS


def _per_axis_pol(handle, axis, values, setter):
    for pol, v in enumerate(_floats(values)[:2]):
        code = setter(handle, axis, pol, v)
        if code not in (ErrorCode.SUCCESS, ErrorCode.INVALIDPOLARISATION):
            return code
    return ErrorCode.SUCCESS


# Canonical settings keys (compared lowercase).  Handlers return ErrorCode.
_CONFIG_KEYS = {
    "framewidth": lambda h, v: api.config_set_frame_dimensions(
        h, _i(v), api.config_get_frame_dimensions(h)[1]),
    "frameheight": lambda h, v: api.config_set_frame_dimensions(
        h, api.config_get_frame_dimensions(h)[0], _i(v)),
    "framedimensions": lambda h, v: api.config_set_frame_dimensions(
        h, _i(v), int(float(v[1]))),
    "framepixelsize": lambda h, v: api.config_set_frame_pixel_size(h, _f(v)),
    "polcount": lambda h, v: api.config_set_pol_count(h, _i(v)),
    "fftwindowsizex": lambda h, v: (
        ErrorCode.SUCCESS if api.config_set_fft_window_size_x(h, _i(v))
        else ErrorCode.INVALIDDIMENSION),
    "fftwindowsizey": lambda h, v: (
        ErrorCode.SUCCESS if api.config_set_fft_window_size_y(h, _i(v))
        else ErrorCode.INVALIDDIMENSION),
    "fftwindowsize": lambda h, v: api.config_set_fft_window_size(
        h, _i(v), int(float(v[1]))),
    "fourierwindowradius": lambda h, v: api.config_set_fourier_window_radius(h, _f(v)),
    "ifftresolutionmode": lambda h, v: api.config_set_ifft_resolution_mode(h, _i(v)),
    "resolutionmode": lambda h, v: api.config_set_ifft_resolution_mode(h, _i(v)),
    "fillfactorcorrectionenabled": lambda h, v: api.config_set_fill_factor_correction_enabled(h, _i(v)),
    "wavelengthcentre": lambda h, v: api.config_set_wavelength_centre(h, _f(v)),
    "wavelengths": lambda h, v: api.config_set_wavelengths(h, _floats(v)),
    "wavelengthslinearfrequency": lambda h, v: api.config_set_wavelengths_linear_frequency(
        h, _f(v), float(v[1]), int(float(v[2]))),
    "wavelengthorderingin": lambda h, v: api.config_set_wavelength_ordering(
        h, C.WAVELENGTHORDER_INPUT, _i(v)),
    "wavelengthorderingout": lambda h, v: api.config_set_wavelength_ordering(
        h, C.WAVELENGTHORDER_OUTPUT, _i(v)),
    "beamcentrex": lambda h, v: _per_axis_pol(h, 0, v, api.config_set_beam_centre),
    "beamcentrey": lambda h, v: _per_axis_pol(h, 1, v, api.config_set_beam_centre),
    "tiltx": lambda h, v: _per_axis_pol(h, 0, v, api.config_set_tilt),
    "tilty": lambda h, v: _per_axis_pol(h, 1, v, api.config_set_tilt),
    "defocus": lambda h, v: _per_pol(h, v, api.config_set_defocus),
    "basiswaist": lambda h, v: _per_pol(h, v, api.config_set_basis_waist),
    "pollocktilt": lambda h, v: api.config_set_pol_lock_tilt(h, _i(v)),
    "pollockdefocus": lambda h, v: api.config_set_pol_lock_defocus(h, _i(v)),
    "pollockbasiswaist": lambda h, v: api.config_set_pol_lock_basis_waist(h, _i(v)),
    "basisgroupcount": lambda h, v: api.config_set_basis_group_count(h, _i(v)),
    "basistype": lambda h, v: api.config_set_basis_type(h, _i(v)),
    "batchcount": lambda h, v: api.config_set_batch_count(h, _i(v)),
    "avgcount": lambda h, v: api.config_set_batch_avg_count(h, _i(v)),
    "batchavgcount": lambda h, v: api.config_set_batch_avg_count(h, _i(v)),
    "avgmode": lambda h, v: api.config_set_batch_avg_mode(h, _i(v)),
    "batchavgmode": lambda h, v: api.config_set_batch_avg_mode(h, _i(v)),
    "threadcount": lambda h, v: api.config_set_thread_count(h, _i(v)),
    "verbosity": lambda h, v: api.config_set_verbosity(h, _i(v)),
    "fftplanmode": lambda h, v: api.config_set_plan_mode(h, _i(v)),
    "autoaligntilt": lambda h, v: api.config_set_auto_align_tilt(h, _i(v)),
    "autoalignbeamcentre": lambda h, v: api.config_set_auto_align_beam_centre(h, _i(v)),
    "autoaligndefocus": lambda h, v: api.config_set_auto_align_defocus(h, _i(v)),
    "autoalignbasiswaist": lambda h, v: api.config_set_auto_align_basis_waist(h, _i(v)),
    "autoalignfourierwindowradius": lambda h, v: api.config_set_auto_align_fourier_window_radius(h, _i(v)),
    "autoaligntol": lambda h, v: api.config_set_auto_align_tol(h, _f(v)),
    "autoalignmode": lambda h, v: api.config_set_auto_align_mode(h, _i(v)),
    "autoaligngoalidx": lambda h, v: api.config_set_auto_align_goal_idx(h, _i(v)),
    "autoalignpolindependence": lambda h, v: api.config_set_auto_align_pol_independence(h, _i(v)),
    "autoalignbasismulconjtrans": lambda h, v: api.config_set_auto_align_basis_mul_conj_trans(h, _i(v)),
}

_SERIALISE_ORDER = [
    ("FrameDimensions", lambda h: list(api.config_get_frame_dimensions(h))),
    ("FramePixelSize", lambda h: [api.config_get_frame_pixel_size(h)]),
    ("PolCount", lambda h: [api.config_get_pol_count(h)]),
    ("fftWindowSize", lambda h: list(api.config_get_fft_window_size(h))),
    ("FourierWindowRadius", lambda h: [api.config_get_fourier_window_radius(h)]),
    ("IFFTResolutionMode", lambda h: [api.config_get_ifft_resolution_mode(h)]),
    ("FillFactorCorrectionEnabled", lambda h: [api.config_get_fill_factor_correction_enabled(h)]),
    ("WavelengthCentre", lambda h: [api.config_get_wavelength_centre(h)]),
    ("Wavelengths", lambda h: list(api.config_get_wavelengths(h)[0])),
    ("WavelengthOrderingIn", lambda h: [api.config_get_wavelength_ordering(h, 0)]),
    ("WavelengthOrderingOut", lambda h: [api.config_get_wavelength_ordering(h, 1)]),
    ("BeamCentreX", lambda h: [api.config_get_beam_centre(h, 0, p)
                               for p in range(api.config_get_pol_count(h))]),
    ("BeamCentreY", lambda h: [api.config_get_beam_centre(h, 1, p)
                               for p in range(api.config_get_pol_count(h))]),
    ("TiltX", lambda h: [api.config_get_tilt(h, 0, p)
                         for p in range(api.config_get_pol_count(h))]),
    ("TiltY", lambda h: [api.config_get_tilt(h, 1, p)
                         for p in range(api.config_get_pol_count(h))]),
    ("Defocus", lambda h: [api.config_get_defocus(h, p)
                           for p in range(api.config_get_pol_count(h))]),
    ("BasisWaist", lambda h: [api.config_get_basis_waist(h, p)
                              for p in range(api.config_get_pol_count(h))]),
    ("PolLockTilt", lambda h: [api.config_get_pol_lock_tilt(h)]),
    ("PolLockDefocus", lambda h: [api.config_get_pol_lock_defocus(h)]),
    ("PolLockBasisWaist", lambda h: [api.config_get_pol_lock_basis_waist(h)]),
    ("BasisGroupCount", lambda h: [api.config_get_basis_group_count(h)]),
    ("BasisType", lambda h: [api.config_get_basis_type(h)]),
    ("BatchCount", lambda h: [api.config_get_batch_count(h)]),
    ("AvgCount", lambda h: [api.config_get_batch_avg_count(h)]),
    ("AvgMode", lambda h: [api.config_get_batch_avg_mode(h)]),
    ("ThreadCount", lambda h: [api.config_get_thread_count(h)]),
    ("Verbosity", lambda h: [api.config_get_verbosity(h)]),
    ("FFTPlanMode", lambda h: [api.config_get_plan_mode(h)]),
    ("AutoAlignTilt", lambda h: [api.config_get_auto_align_tilt(h)]),
    ("AutoAlignBeamCentre", lambda h: [api.config_get_auto_align_beam_centre(h)]),
    ("AutoAlignDefocus", lambda h: [api.config_get_auto_align_defocus(h)]),
    ("AutoAlignBasisWaist", lambda h: [api.config_get_auto_align_basis_waist(h)]),
    ("AutoAlignFourierWindowRadius", lambda h: [api.config_get_auto_align_fourier_window_radius(h)]),
    ("AutoAlignTol", lambda h: [api.config_get_auto_align_tol(h)]),
    ("AutoAlignMode", lambda h: [api.config_get_auto_align_mode(h)]),
    ("AutoAlignGoalIdx", lambda h: [api.config_get_auto_align_goal_idx(h)]),
    ("AutoAlignPolIndependence", lambda h: [api.config_get_auto_align_pol_independence(h)]),
    ("AutoAlignBasisMulConjTrans", lambda h: [api.config_get_auto_align_basis_mul_conj_trans(h)]),
]


def _fmt(value):
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))  # full precision, round-trip safe


def serialise_settings(handle):
    """Current configuration as settings-file text (round-trip safe)."""
    lines = []
    for key, getter in _SERIALISE_ORDER:
        vals = getter(handle)
        lines.append("\t".join([key] + [_fmt(v) for v in vals]))
    return "\n".join(lines) + "\n"


def write_fields(handle, path):
    """Interleaved (re, im) float32 fields, batch-major then pol-major, with
    a plain-text sidecar '<path>.txt' describing the dimensions."""
    got = api.get_fields(handle)
    if got is None:
        raise HoloError(ErrorCode.NULLPOINTER, "no fields to write")
    fields, batch, pol, x_axis, y_axis, _, _ = got
    inter = np.empty(fields.shape + (2,), dtype="<f4")
    inter[..., 0] = fields.real
    inter[..., 1] = fields.imag
    try:
        inter.tofile(path)
        with open(str(path) + ".txt", "w") as fh:
            fh.write(f"batchCount\t{batch}\n")
            fh.write(f"polCount\t{pol}\n")
            fh.write(f"width\t{x_axis.size}\n")
            fh.write(f"height\t{y_axis.size}\n")
            fh.write(f"xSpacing\t{float(x_axis[1] - x_axis[0]) if x_axis.size > 1 else 0.0!r}\n")
            fh.write(f"ySpacing\t{float(y_axis[1] - y_axis[0]) if y_axis.size > 1 else 0.0!r}\n")
            fh.write("format\tfloat32 interleaved (re, im), "
                     "batch-major, pol-major, row-major\n")
    except OSError:
        raise HoloError(ErrorCode.FILENOTCREATED, str(path))
    return ErrorCode.SUCCESS


def read_fields(path):
    """Re-ingest a fields binary written by :func:`write_fields`."""
    meta = {}
    with open(str(path) + ".txt") as fh:
        for line in fh:
            parts = line.rstrip("\n").split("\t")
            if len(parts) == 2:
                meta[parts[0]] = parts[1]
    batch = int(meta["batchCount"])
    pol = int(meta["polCount"])
    width = int(meta["width"])
    height = int(meta["height"])
    raw = np.fromfile(path, dtype="<f4").reshape(batch, pol, height, width, 2)
    return (raw[..., 0] + 1j * raw[..., 1]).astype(np.complex64)


def write_coefs(handle, path):
    """Interleaved (re, im) float32 coefficients plus a sidecar."""
    coefs, batch, mode_count, pol = api.basis_get_coefs(handle)
    if coefs is None:
        raise HoloError(ErrorCode.NULLPOINTER, "no coefficients to write")
    inter = np.empty(coefs.shape + (2,), dtype="<f4")
    inter[..., 0] = coefs.real
    inter[..., 1] = coefs.imag
    try:
        inter.tofile(path)
        with open(str(path) + ".txt", "w") as fh:
            fh.write(f"batchCount\t{batch}\n")
            fh.write(f"modeCount\t{mode_count}\n")
            fh.write(f"polCount\t{pol}\n")
            fh.write("format\tfloat32 interleaved (re, im), batch-major, "
                     "pol-block-major (HH..VV)\n")
    except OSError:
        raise HoloError(ErrorCode.FILENOTCREATED, str(path))
    return ErrorCode.SUCCESS


def read_coefs(path):
    meta = {}
    with open(str(path) + ".txt") as fh:
        for line in fh:
            parts = line.rstrip("\n").split("\t")
            if len(parts) == 2:
                meta[parts[0]] = parts[1]
    batch = int(meta["batchCount"])
    mode_count = int(meta["modeCount"])
    pol = int(meta["polCount"])
    raw = np.fromfile(path, dtype="<f4").reshape(batch, pol * mode_count, 2)
    return (raw[..., 0] + 1j * raw[..., 1]).astype(np.complex64)


_METRIC_NAMES = ["IL", "MDL", "DIAG", "SNRAVG", "DIAGBEST", "DIAGWORST",
                 "SNRBEST", "SNRWORST", "SNRMG"]


def write_summary(handle, path):
    """Plain-text run summary: config dump plus one line per metric."""
    coefs, batch, mode_count, pol = api.basis_get_coefs(handle)
    try:
        with open(path, "w") as fh:
            fh.write(serialise_settings(handle))
            fh.write(f"ResultBatchCount\t{batch}\n")
            fh.write(f"ResultModeCount\t{mode_count}\n")
            fh.write(f"ResultPolCount\t{pol}\n")
            for idx, name in enumerate(_METRIC_NAMES):
                vals = api.auto_align_get_metrics(handle, idx)
                if vals is None:
                    continue
                fh.write("\t".join([f"Metric.{name}"]
                                   + [repr(float(v)) for v in vals]) + "\n")
    except OSError:
        raise HoloError(ErrorCode.FILENOTCREATED, str(path))
    return ErrorCode.SUCCESS


def apply_settings(handle, directives, verbosity=0):
    """Apply config directives; returns (ErrorCode, deferred-actions dict)."""
    deferred = {}
    for key, values in directives:
        lk = key.lower()
        try:
            if lk in _CONFIG_KEYS:
                code = _CONFIG_KEYS[lk](handle, values)
                if code != ErrorCode.SUCCESS:
                    log(verbosity, C.VERBOSITY_BASIC,
                        f"setting '{key}' failed with code {int(code)}")
                    return code, deferred
            elif lk == "framebuffer":
                deferred["frame_file"] = values[0]
            elif lk == "framebuffertranspose":
                deferred["frame_transpose"] = int(float(values[0]))
            elif lk == "refcalibrationfromfile":
                deferred["ref_cal"] = (values[0], int(float(values[1]))
                                       if len(values) > 1 else 1)
            elif lk == "batchcalibrationfromfile":
                deferred["batch_cal"] = (values[0], int(float(values[1])),
                                         int(float(values[2])))
            elif lk == "autoalign":
                deferred["auto_align"] = int(float(values[0]))
            elif lk == "outputfilesummary":
                deferred["summary"] = values[0]
            elif lk == "outputfilenamefields":
                deferred["fields"] = values[0]
            elif lk == "outputfilenamecoefs":
                deferred["coefs"] = values[0]
            elif lk == "outputfilenameviewport":
                deferred["viewport"] = values[0]
            elif lk == "viewportmode":
                deferred["viewport_mode"] = int(float(values[0]))
            else:
                log(verbosity, C.VERBOSITY_BASIC,
                    f"ignoring unrecognised settings key '{key}'")
        except (ValueError, IndexError):
            log(verbosity, C.VERBOSITY_BASIC,
                f"could not parse value for settings key '{key}'")
            return ErrorCode.ERROR, deferred
        if lk == "verbosity":
            verbosity = api.config_get_verbosity(handle)
    return ErrorCode.SUCCESS, deferred


def run_batch_from_config_file(path):
    """Load settings, run the batch (and AutoAlign if directed), write the
    requested outputs.  Returns the ErrorCode of the run."""
    try:
        directives = parse_settings(path)
    except HoloError as err:
        return err.code
    handle = api.create_handle()
    try:
        code, deferred = apply_settings(handle, directives)
        if code != ErrorCode.SUCCESS:
            return code
        verbosity = api.config_get_verbosity(handle)
        if "frame_file" in deferred:
            code = api.set_frame_buffer_from_file(handle, deferred["frame_file"])
            if code != ErrorCode.SUCCESS:
                return code
            if deferred.get("frame_transpose"):
                eng = api.engine(handle)
                eng.source.transpose = 1
        if "ref_cal" in deferred:
            fname, wl_count = deferred["ref_cal"]
            width, height = api.config_get_frame_dimensions(handle)
            code = api.config_set_ref_calibration_from_file(
                handle, fname, wl_count, width, height)
            if code != ErrorCode.SUCCESS:
                return code
        if "batch_cal" in deferred:
            fname, pol_c, batch_c = deferred["batch_cal"]
            code = api.config_set_batch_calibration_from_file(
                handle, fname, pol_c, batch_c)
            if code != ErrorCode.SUCCESS:
                return code
        try:
            if deferred.get("auto_align"):
                api.auto_align(handle)
            else:
                api.engine(handle).process_batch()
            if api.config_get_basis_group_count(handle) >= 1:
                api.auto_align_calc_metrics(handle)
        except HoloError as err:
            return err.code
        log(verbosity, C.VERBOSITY_BASIC,
            f"processed batch of {api.config_get_batch_count(handle)} frames")
        try:
            if "summary" in deferred:
                write_summary(handle, deferred["summary"])
            if "fields" in deferred:
                write_fields(handle, deferred["fields"])
            if "coefs" in deferred:
                write_coefs(handle, deferred["coefs"])
            if "viewport" in deferred:
                eng = api.engine(handle)
                render_to_file(eng, deferred.get("viewport_mode",
                                                 C.VIEWPORT_FIELDPLANEABS),
                               0, deferred["viewport"])
        except HoloError as err:
            return err.code
        return ErrorCode.SUCCESS
    except Exception:
        return ErrorCode.ERROR
    finally:
        api.destroy_handle(handle)
