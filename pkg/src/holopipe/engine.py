"""Engine: owns configuration, frame sources, stage buffers and the full
processing pipeline for one handle.

Stage products are kept between calls so the staged entry points
(process_fft / process_ifft / process_remove_tilt / extract_coefs) can be
re-run individually, e.g. when only Fourier-plane parameters changed.
"""

import numpy as np

from . import constants as C
from . import hgbasis, pipeline
from .analysis import analyse_plane, compute_metrics
from .config import HoloConfig
from .errors import ErrorCode, HoloError
from .frames import CAL_INTENSITY, FrameSource, RefCalibration
from .geometry import fourier_angle_axis

_CAL_EPS = 1e-6


def wavelength_reorder_indices(total, wavelength_count, ordering_in, ordering_out):
    """Permutation p with out[i] = data[p[i]] between fast/slow layouts."""
    if ordering_in == ordering_out or wavelength_count <= 1:
        return np.arange(total)
    if total % wavelength_count:
        raise HoloError(ErrorCode.INVALIDARGUMENT,
                        "element count does not factor into wavelengths")
    rest = total // wavelength_count
    idx = np.arange(total)
    if ordering_in == C.WAVELENGTHORDER_FAST:
        # fast: index = r*L + w  ->  slow: index = w*rest + r
        return idx.reshape(rest, wavelength_count).T.reshape(-1)
    return idx.reshape(wavelength_count, rest).T.reshape(-1)


def apply_wavelength_ordering(data, wavelength_count, ordering_in, ordering_out):
    """Permute the leading axis between wavelength-fast and -slow layouts."""
    data = np.asarray(data)
    perm = wavelength_reorder_indices(data.shape[0], wavelength_count,
                                      ordering_in, ordering_out)
    return data[perm]


class Engine:
    def __init__(self):
        self.config = HoloConfig()
        self.source = FrameSource()
        self.ref_cal = RefCalibration()
        self.batch_cal = None
        self.batch_cal_enabled = 0
        self.custom_transform = None
        self.backup = None
        self.window_title = ""
        self._clear_products()

    def _clear_products(self):
        self._plan = None
        self._staged = None
        self._fourier_full = None
        self._fourier_axes = None
        self._summary_fourier = None
        self._window = None
        self._window_meta = None
        self._ifft_fields = None
        self._field_axes = None
        self._field_r = None
        self._field_i = None
        self._field_scale = None
        self._summary_field = None
        self._coefs = None
        self._mode_count = 0
        self._basis = None
        self._metrics = None
        self._ref_applied = None

    # ---------------------------------------------------------------- plan

    def _effective(self):
        """Tilt/defocus/waist with the polarisation locks applied."""
        cfg = self.config
        tilt = [list(cfg.tilt[0]), list(cfg.tilt[1])]
        defocus = list(cfg.defocus)
        waist = list(cfg.basisWaist)
        if cfg.polLockTilt:
            tilt[0][1] = tilt[0][0]
            tilt[1][1] = tilt[1][0]
        if cfg.polLockDefocus:
            defocus[1] = defocus[0]
        if cfg.polLockBasisWaist:
            waist[1] = waist[0]
        return tilt, defocus, waist

    def _batch_plan(self):
        cfg = self.config
        b = max(1, cfg.batchCount)
        a = max(1, cfg.avgCount)
        mode = cfg.avgMode if cfg.avgMode in (0, 1, 2) else C.AVGMODE_SEQUENTIAL
        lambdas = cfg.wavelength_list()
        lam_count = len(lambdas)
        order_in = cfg.wavelengthOrdering[C.WAVELENGTHORDER_INPUT]
        if order_in == C.WAVELENGTHORDER_FAST or lam_count <= 1:
            wl_of_batch = np.arange(b) % lam_count
        else:
            wl_of_batch = np.minimum((np.arange(b) * lam_count) // b,
                                     lam_count - 1)
        members = np.empty((b, a), dtype=np.int64)
        for bi in range(b):
            if mode == C.AVGMODE_INTERLACED:
                members[bi] = bi + np.arange(a) * b
            elif mode == C.AVGMODE_SEQUENTIALSWEEP and lam_count > 1:
                i, w = bi // lam_count, bi % lam_count
                members[bi] = i * a * lam_count + np.arange(a) * lam_count + w
            else:
                members[bi] = bi * a + np.arange(a)
        return {
            "batch": b, "avg": a, "mode": mode,
            "lambdas": lambdas, "wl_of_batch": wl_of_batch,
            "members": members, "frame_count": b * a,
        }

    def output_permutation(self):
        plan = self._plan or self._batch_plan()
        cfg = self.config
        lam = len(plan["lambdas"])
        if lam <= 1 or plan["batch"] % lam:
            return np.arange(plan["batch"])
        return wavelength_reorder_indices(
            plan["batch"], lam,
            cfg.wavelengthOrdering[C.WAVELENGTHORDER_INPUT],
            cfg.wavelengthOrdering[C.WAVELENGTHORDER_OUTPUT])

    # --------------------------------------------------------------- stages

    def process_fft(self):
        cfg = self.config
        plan = self._batch_plan()
        frames = self.source.staged_frames(plan["frame_count"],
                                           cfg.frameWidth, cfg.frameHeight)
        nx, ny = cfg.fftWindowSizeX, cfg.fftWindowSizeY
        origins, xis = [], []
        for p in range(cfg.polCount):
            col0, row0 = pipeline.window_origin(
                cfg.beamCentre[0][p], cfg.beamCentre[1][p], p, cfg.polCount,
                cfg.frameWidth, cfg.frameHeight, nx, ny, cfg.framePixelSize)
            origins.append((col0, row0))
            xis.append((cfg.beamCentre[0][p] / cfg.framePixelSize
                        + cfg.frameWidth / 2.0 - col0,
                        cfg.beamCentre[1][p] / cfg.framePixelSize
                        + cfg.frameHeight / 2.0 - row0))
        windows = pipeline.extract_windows(frames, origins, nx, ny)
        self._fourier_full = pipeline.forward_fft(windows, workers=cfg.threadCount)
        self._staged = frames
        plan["origins"] = origins
        plan["xis"] = xis
        self._plan = plan
        lam0 = cfg.wavelengthCentre
        p = cfg.framePixelSize
        fx = fourier_angle_axis(np.arange(nx // 2 + 1), nx, p, lam0)
        fy = fourier_angle_axis(np.fft.fftfreq(ny) * ny, ny, p, lam0)
        self._fourier_axes = (fx.astype(np.float32), fy.astype(np.float32))
        self._summary_fourier = analyse_plane(self._fourier_full, fx, fy,
                                              C.PLANE_FOURIER)
        self._window = None
        self._ifft_fields = None
        self._field_r = None
        self._coefs = None
        return ErrorCode.SUCCESS

    def process_ifft(self):
        cfg = self.config
        if self._fourier_full is None or self._plan is None:
            raise HoloError(ErrorCode.NULLPOINTER, "FFT stage has not run")
        plan = self._plan
        nx, ny = cfg.fftWindowSizeX, cfg.fftWindowSizeY
        p = cfg.framePixelSize
        tilt, _, _ = self._effective()
        wh, ww, fr = pipeline.window_bin_dims(cfg.fourierWindowRadius, nx, ny,
                                              p, cfg.wavelengthCentre)
        mask = pipeline.window_mask(wh, ww, nx, ny, p, fr)
        b, pol_count = plan["batch"], cfg.polCount
        windows = np.zeros((b, pol_count, wh, ww), dtype=np.complex64)
        k0 = np.zeros((b, pol_count, 2), dtype=np.int64)
        lambdas = plan["lambdas"]
        for pol in range(pol_count):
            xi_x, xi_y = plan["xis"][pol]
            for w, lam in enumerate(lambdas):
                rows = np.nonzero(plan["wl_of_batch"] == w)[0]
                if rows.size == 0:
                    continue
                k0x = int(round(float(np.sin(np.radians(tilt[0][pol]))
                                      * nx * p / lam)))
                k0y = int(round(float(np.sin(np.radians(tilt[1][pol]))
                                      * ny * p / lam)))
                k0[rows, pol, 0] = k0x
                k0[rows, pol, 1] = k0y
                frame_idx = plan["members"][rows].reshape(-1)
                grabbed = pipeline.fill_window_r2c(
                    self._fourier_full[frame_idx, pol], k0x, k0y, wh, ww,
                    nx, ny, fill_factor=bool(cfg.fillFactorCorrectionEnabled))
                grabbed = grabbed.reshape(rows.size, plan["avg"], wh, ww)
                phase = pipeline.recentring_phase(k0x, k0y, wh, ww, nx, ny,
                                                  xi_x, xi_y)
                grabbed = grabbed * (mask * phase)[None, None]
                if plan["avg"] > 1:
                    windows[rows, pol] = _constructive_average_batched(grabbed)
                else:
                    windows[rows, pol] = grabbed[:, 0]
        self._window = windows
        self._window_meta = {"wh": wh, "ww": ww, "fr": fr, "k0": k0}
        self._ifft_fields = pipeline.inverse_fft(
            windows, cfg.resolutionMode, nx, ny, workers=cfg.threadCount)
        x_axis, y_axis = pipeline.field_axes(cfg.resolutionMode, nx, ny,
                                             wh, ww, p)
        self._field_axes = (x_axis, y_axis)
        if self.ref_cal.enabled and self.ref_cal.kind:
            self._process_ref_calibration(wh, ww, mask)
        self._field_r = None
        self._coefs = None
        return ErrorCode.SUCCESS

    def process_remove_tilt(self):
        cfg = self.config
        if self._ifft_fields is None or self._window_meta is None:
            raise HoloError(ErrorCode.NULLPOINTER, "IFFT stage has not run")
        plan = self._plan
        tilt, defocus, _ = self._effective()
        nx, ny = cfg.fftWindowSizeX, cfg.fftWindowSizeY
        p = cfg.framePixelSize
        x_axis, y_axis = self._field_axes
        b, pol_count = plan["batch"], cfg.polCount
        k0 = self._window_meta["k0"]
        fields = self._ifft_fields.copy()
        for pol in range(pol_count):
            for w, lam in enumerate(plan["lambdas"]):
                rows = np.nonzero(plan["wl_of_batch"] == w)[0]
                if rows.size == 0:
                    continue
                phase = pipeline.removal_phase(
                    x_axis, y_axis, tilt[0][pol], tilt[1][pol], defocus[pol],
                    lam, int(k0[rows[0], pol, 0]), int(k0[rows[0], pol, 1]),
                    nx, ny, p, cfg.beamCentre[0][pol], cfg.beamCentre[1][pol])
                fields[rows, pol] *= phase[None]
        if self.batch_cal_enabled and self.batch_cal is not None:
            cal = self.batch_cal
            for bi in range(b):
                for pol in range(pol_count):
                    cp = min(pol, cal.shape[0] - 1)
                    fields[bi, pol] *= cal[cp, bi % cal.shape[1]]
        if (self.ref_cal.enabled and self.ref_cal.kind
                and self._ref_applied is not None):
            applied = self._ref_applied
            for bi in range(b):
                wl = int(plan["wl_of_batch"][bi]) % applied.shape[0]
                fields[bi] *= applied[wl]
        summary = analyse_plane(fields, x_axis, y_axis, C.PLANE_FIELD)
        total = plan["frame_count"] + 1
        params = np.zeros((C.ANALYSIS_COUNT, pol_count, total), dtype=np.float32)
        params[:, :, :b] = summary.parameters[:, :, :b]
        params[:, :, b] = summary.parameters[:, :, b]
        summary.parameters = params
        self._summary_field = summary
        h, wfield = fields.shape[-2], fields.shape[-1]
        self._field_r = np.empty((b, pol_count, h, wfield), dtype=np.int16)
        self._field_i = np.empty_like(self._field_r)
        self._field_scale = np.empty((b, pol_count), dtype=np.float32)
        for bi in range(b):
            for pol in range(pol_count):
                fr_, fi_, sc = pipeline.quantise_int16(fields[bi, pol])
                self._field_r[bi, pol] = fr_
                self._field_i[bi, pol] = fi_
                self._field_scale[bi, pol] = sc
        self._coefs = None
        return ErrorCode.SUCCESS

    def _process_ref_calibration(self, wh, ww, mask):
        """Resample the raw calibration to reconstructed-field dimensions.

        Intensity calibrations ride through a DC-centred copy of the window
        path; field calibrations go through the full off-axis path including
        tilt removal.  The applied correction is the conjugate-phase,
        inverse-amplitude factor 1/processed (floored at |.|^2 = 1e-6).
        """
        cfg = self.config
        plan = self._plan
        cal = self.ref_cal
        nx, ny = cfg.fftWindowSizeX, cfg.fftWindowSizeY
        p = cfg.framePixelSize
        tilt, defocus, _ = self._effective()
        inten = cal.normalised_intensity()
        if inten is None:
            return
        if inten.shape[1] != cfg.frameHeight or inten.shape[2] != cfg.frameWidth:
            raise HoloError(ErrorCode.INVALIDARGUMENT,
                            "calibration dimensions do not match the frames")
        x_axis, y_axis = self._field_axes
        out = np.empty((cal.wavelength_count, cfg.polCount,
                        y_axis.size, x_axis.size), dtype=np.complex64)
        lambdas = plan["lambdas"]
        for ci in range(cal.wavelength_count):
            lam = lambdas[min(ci, len(lambdas) - 1)]
            for pol in range(cfg.polCount):
                col0, row0 = plan["origins"][pol]
                xi_x, xi_y = plan["xis"][pol]
                if cal.kind == CAL_INTENSITY:
                    amp = np.sqrt(inten[ci, row0:row0 + ny, col0:col0 + nx])
                    spec = pipeline.forward_fft(amp[None].astype(np.float32))[0]
                    grabbed = pipeline.fill_window_r2c(
                        spec, 0, 0, wh, ww, nx, ny,
                        fill_factor=bool(cfg.fillFactorCorrectionEnabled))
                    phase = pipeline.recentring_phase(0, 0, wh, ww, nx, ny,
                                                      xi_x, xi_y)
                    proc = pipeline.inverse_fft((grabbed * mask * phase)[None],
                                                cfg.resolutionMode, nx, ny)[0]
                else:
                    ref = np.conj(cal.raw[ci, row0:row0 + ny, col0:col0 + nx])
                    spec = np.fft.fft2(ref).astype(np.complex64)
                    k0x = int(round(float(np.sin(np.radians(tilt[0][pol]))
                                          * nx * p / lam)))
                    k0y = int(round(float(np.sin(np.radians(tilt[1][pol]))
                                          * ny * p / lam)))
                    grabbed = pipeline.fill_window_c2c(spec, k0x, k0y, wh, ww,
                                                       nx, ny)
                    phase = pipeline.recentring_phase(k0x, k0y, wh, ww, nx, ny,
                                                      xi_x, xi_y)
                    proc = pipeline.inverse_fft((grabbed * mask * phase)[None],
                                                cfg.resolutionMode, nx, ny)[0]
                    proc = proc * pipeline.removal_phase(
                        x_axis, y_axis, tilt[0][pol], tilt[1][pol],
                        defocus[pol], lam, k0x, k0y, nx, ny, p,
                        cfg.beamCentre[0][pol], cfg.beamCentre[1][pol])
                mag2 = np.maximum(np.abs(proc.astype(np.complex128)) ** 2,
                                  _CAL_EPS)
                out[ci, pol] = (np.conj(proc) / mag2).astype(np.complex64)
        self._ref_applied = out

    # ----------------------------------------------------------- basis step

    def _basis_for_pol(self, pol):
        cfg = self.config
        _, _, waist = self._effective()
        x_axis, y_axis = self._field_axes
        key = (cfg.basisGroupCount, float(waist[pol]),
               x_axis.size, y_axis.size,
               float(x_axis[0]), float(x_axis[-1]), float(y_axis[0]))
        if self._basis is None:
            self._basis = {}
        if key not in self._basis:
            self._basis[key] = hgbasis.BasisFields1D(
                cfg.basisGroupCount, x_axis, y_axis, 0.0, 0.0, waist[pol])
        return self._basis[key]

    def extract_coefs(self):
        cfg = self.config
        if cfg.basisGroupCount < 1:
            self._coefs = None
            self._mode_count = 0
            return ErrorCode.SUCCESS
        if self._field_r is None:
            raise HoloError(ErrorCode.NULLPOINTER, "tilt-removal stage has not run")
        plan = self._plan
        b, pol_count = plan["batch"], cfg.polCount
        hg_count = hgbasis.mode_count(cfg.basisGroupCount)
        hg = np.empty((b, pol_count, hg_count), dtype=np.complex64)
        for pol in range(pol_count):
            basis = self._basis_for_pol(pol)
            fields = ((self._field_r[:, pol].astype(np.float32)
                       + 1j * self._field_i[:, pol].astype(np.float32))
                      / self._field_scale[:, pol, None, None])
            hg[:, pol] = basis.extract(fields)
        transform = None
        if cfg.basisType == C.BASISTYPE_LG:
            transform = np.conj(hgbasis.hg_to_lg_transform(cfg.basisGroupCount))
        elif cfg.basisType == C.BASISTYPE_CUSTOM:
            transform = self.custom_transform  # None falls back to HG
        if transform is not None:
            use = min(hg_count, transform.shape[1])
            coefs = np.einsum("om,bpm->bpo", transform[:, :use],
                              hg[:, :, :use].astype(np.complex128))
            coefs = coefs.astype(np.complex64)
        else:
            coefs = hg
        self._mode_count = coefs.shape[-1]
        self._coefs = coefs.reshape(b, pol_count * self._mode_count)
        return ErrorCode.SUCCESS

    # ------------------------------------------------------------ top level

    def run_pipeline(self, from_stage=0):
        """Run stages from the given index (0 fft, 1 ifft, 2 tilt, 3 coefs).

        Later stages re-run automatically when their inputs are missing, so
        a caller that only changed a Fourier-plane parameter can restart at
        the IFFT and reuse the forward transforms.
        """
        if from_stage <= 0 or self._fourier_full is None:
            self.process_fft()
        if from_stage <= 1 or self._ifft_fields is None:
            self.process_ifft()
        if from_stage <= 2 or self._field_r is None:
            self.process_remove_tilt()
        self.extract_coefs()

    def process_batch(self):
        self.run_pipeline(0)
        return self.coef_view()

    def coef_view(self):
        """(coefs, batchCount, modeCount, polCount) in output ordering."""
        plan = self._plan
        if plan is None or self._coefs is None:
            if self.config.basisGroupCount < 1 and plan is not None:
                return None, plan["batch"], 0, self.config.polCount
            return None, 0, 0, 0
        perm = self.output_permutation()
        return (self._coefs[perm].copy(), plan["batch"], self._mode_count,
                self.config.polCount)

    def process_batch_frequency_sweep_linear(self, lambda_start, lambda_stop,
                                             lambda_count):
        if lambda_count < 1 or lambda_start <= 0 or lambda_stop <= 0:
            raise HoloError(ErrorCode.INVALIDDIMENSION,
                            "invalid wavelength sweep")
        if lambda_count == 1:
            lams = [float(lambda_start)]
        else:
            f0, f1 = 1.0 / lambda_start, 1.0 / lambda_stop
            freqs = f0 + np.arange(lambda_count) * (f1 - f0) / (lambda_count - 1)
            lams = list(1.0 / freqs)
        self.config.wavelengths = lams
        return self.process_batch()

    def process_batch_wavelength_sweep_arbitrary(self, wavelengths, lambda_count):
        if wavelengths is None:
            raise HoloError(ErrorCode.NULLPOINTER, "wavelengths is null")
        lams = [float(v) for v in np.asarray(wavelengths).reshape(-1)[:lambda_count]]
        if lambda_count < 1 or len(lams) < lambda_count:
            raise HoloError(ErrorCode.INVALIDDIMENSION, "invalid wavelength count")
        self.config.wavelengths = lams
        return self.process_batch()

    # -------------------------------------------------------------- getters

    def get_fields16(self):
        if self._field_r is None:
            raise HoloError(ErrorCode.NULLPOINTER, "no processed fields")
        perm = self.output_permutation()
        x_axis, y_axis = self._field_axes
        return (self._field_r[perm], self._field_i[perm],
                self._field_scale[perm], x_axis, y_axis,
                x_axis.size, y_axis.size,
                self._plan["batch"], self.config.polCount)

    def get_fields(self):
        (fr, fi, scale, x_axis, y_axis,
         width, height, b, pol) = self.get_fields16()
        fields = (fr.astype(np.float32) + 1j * fi.astype(np.float32))
        fields /= scale[:, :, None, None]
        return (fields.astype(np.complex64), b, pol, x_axis, y_axis,
                width, height)

    def get_fourier_plane_full(self):
        if self._fourier_full is None:
            return None
        return (self._fourier_full, self._plan["frame_count"],
                self.config.polCount,
                self._fourier_full.shape[-1], self._fourier_full.shape[-2])

    def get_fourier_plane_window(self):
        if self._window is None:
            return None
        return (self._window, self._plan["batch"], self.config.polCount,
                self._window.shape[-1], self._window.shape[-2])

    def batch_summary(self, plane_idx):
        if plane_idx not in (C.PLANE_FOURIER, C.PLANE_FIELD):
            raise HoloError(ErrorCode.INVALIDDIMENSION, "invalid plane index")
        summary = (self._summary_fourier if plane_idx == C.PLANE_FOURIER
                   else self._summary_field)
        if summary is None:
            raise HoloError(ErrorCode.NULLPOINTER, "plane has not been processed")
        return summary

    def get_ref_calibration_fields(self):
        if self._ref_applied is None:
            return None
        x_axis, y_axis = self._field_axes
        return (self._ref_applied, self.ref_cal.wavelength_count,
                self.config.polCount, x_axis, y_axis,
                x_axis.size, y_axis.size)

    def basis_get_fields(self):
        if self.config.basisGroupCount < 1 or self._field_axes is None:
            return None
        x_axis, y_axis = self._field_axes
        modes = []
        for pol in range(self.config.polCount):
            modes.append(self._basis_for_pol(pol).materialise())
        fields = np.stack(modes, axis=1)  # (modeCount, polCount, h, w)
        return (fields, fields.shape[0], self.config.polCount, x_axis, y_axis,
                x_axis.size, y_axis.size)

    def calc_metrics(self):
        if self._coefs is None:
            raise HoloError(ErrorCode.NULLPOINTER,
                            "no coefficients have been computed")
        cfg = self.config
        plan = self._plan
        groups = [hgbasis.mode_group_of_index(i) for i in range(self._mode_count)]
        self._metrics = compute_metrics(
            self._coefs, self._mode_count, cfg.polCount,
            plan["wl_of_batch"], len(plan["lambdas"]),
            cfg.autoAlignPolIndependence, cfg.autoAlignBasisMulConjTrans,
            group_of_mode=groups)
        return ErrorCode.SUCCESS

    def metric(self, metric_idx):
        if self._metrics is None:
            if 0 <= metric_idx < C.METRIC_COUNT:
                return C.METRIC_UNSET
            return 0.0
        return self._metrics.get(metric_idx)

    def metrics_array(self, metric_idx):
        if self._metrics is None:
            lam = self.config.wavelength_count()
            return np.full(lam + 1, C.METRIC_UNSET, dtype=np.float32)
        return self._metrics.get_all(metric_idx)

    # ---------------------------------------------------------- calibration

    def set_batch_calibration(self, cal, pol_count_cal, batch_count_cal):
        if cal is None or pol_count_cal < 1 or batch_count_cal < 1:
            self.batch_cal_enabled = 0
            return False
        arr = np.asarray(cal, dtype=np.complex64).reshape(pol_count_cal,
                                                          batch_count_cal)
        self.batch_cal = arr.copy()
        self.batch_cal_enabled = 1
        return True


def _constructive_average_batched(wins):
    """Phase-aligned mean over axis 1 of (R, A, wh, ww)."""
    acc = wins[:, 0].astype(np.complex128).copy()
    for k in range(1, wins.shape[1]):
        member = wins[:, k].astype(np.complex128)
        inner = np.sum(np.conj(acc) * member, axis=(-2, -1))
        rot = np.where(np.abs(inner) > 0,
                       np.exp(-1j * np.angle(inner)), 1.0)
        acc += member * rot[:, None, None]
    return (acc / wins.shape[1]).astype(np.complex64)
