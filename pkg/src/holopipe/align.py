"""Automatic alignment: a coarse "snap" estimator that locates the off-axis
term from scratch, and a fine "tweak" stage that polishes the enabled
parameters against the configured goal metric.

Tweak is cyclic coordinate descent with a three-point parabolic line fit per
parameter (steps: tilt 0.25 Fourier bins, beam centre 1 pixel, waist 5%,
defocus 0.05 dioptre), halving all steps after each full cycle and stopping
once a cycle improves the goal by less than the configured tolerance.
"""

import numpy as np

from . import constants as C
from . import geometry
from .errors import HoloError

MAX_TWEAK_CYCLES = 20


def _goal_direction(goal_idx):
    # MDL improves downwards; everything else upwards.
    return -1.0 if goal_idx == C.METRIC_MDL else 1.0


def _evaluate(eng, from_stage):
    eng.run_pipeline(from_stage)
    eng.calc_metrics()
    value = eng.metric(eng.config.autoAlignGoalIdx)
    return value * _goal_direction(eng.config.autoAlignGoalIdx)


def snap_estimate(eng):
    """Estimate tilt, window radius, beam centre, waist and |defocus|.

    Only parameters whose auto-align flag is enabled are replaced.  Tilt
    comes from the peak of the batch-summed Fourier intensity outside an
    exclusion zone of radius w_max/3 around DC (the autocorrelation terms),
    refined by a wrap-aware centroid.  Beam centre and waist then come from
    the centre of mass and Petermann-II area of a provisional
    reconstruction.
    """
    cfg = eng.config
    if eng._fourier_full is None:
        eng.process_fft()
    nx, ny = cfg.fftWindowSizeX, cfg.fftWindowSizeY
    p = cfg.framePixelSize
    lam = cfg.wavelengthCentre
    wmax = geometry.max_resolvable_angle(lam, p)
    theta_x, theta_y = eng._fourier_axes
    exclusion = (theta_x[None, :].astype(np.float64) ** 2
                 + theta_y[:, None].astype(np.float64) ** 2) < (wmax / 3.0) ** 2

    full = eng.get_fourier_plane_full()[0]
    for pol in range(cfg.polCount):
        inten = np.sum(np.abs(full[:, pol].astype(np.complex64)) ** 2, axis=0)
        if cfg.autoAlignTilt:
            masked = np.where(exclusion, 0.0, inten)
            flat = int(np.argmax(masked))
            row, col = divmod(flat, masked.shape[1])
            kx, ky = _refine_peak(masked, row, col, ny)
            tx = float(geometry.bin_to_tilt(kx, nx, p, lam))
            ty = float(geometry.bin_to_tilt(ky, ny, p, lam))
            cfg.tilt[0][pol] = tx
            cfg.tilt[1][pol] = ty
        if cfg.autoAlignFourierWindowRadius:
            _set_max_radius(eng, pol)

    if cfg.polLockTilt and cfg.polCount == 2:
        cfg.tilt[0][1] = cfg.tilt[0][0]
        cfg.tilt[1][1] = cfg.tilt[1][0]

    need_field = (cfg.autoAlignBeamCentre or cfg.autoAlignBasisWaist
                  or cfg.autoAlignDefocus)
    if not need_field:
        return
    eng.process_ifft()
    eng.process_remove_tilt()
    summary = eng.batch_summary(C.PLANE_FIELD)
    agg = eng._plan["batch"]  # aggregate slot of the field-plane summary
    for pol in range(cfg.polCount):
        if cfg.autoAlignBeamCentre:
            # Field axes are relative to the current beam centre.
            cfg.beamCentre[0][pol] += float(summary.parameters[C.ANALYSIS_COMX, pol, agg])
            cfg.beamCentre[1][pol] += float(summary.parameters[C.ANALYSIS_COMY, pol, agg])
        if cfg.autoAlignBasisWaist and cfg.basisGroupCount >= 1:
            aeff = float(summary.parameters[C.ANALYSIS_AEFF, pol, agg])
            if aeff > 0:
                mean_order = 2.0 * (cfg.basisGroupCount - 1) / 3.0
                waist = np.sqrt(aeff / np.pi) / np.sqrt(mean_order + 1.0)
                cfg.basisWaist[pol] = float(waist)
        if cfg.autoAlignDefocus:
            cfg.defocus[pol] = _estimate_defocus_magnitude(eng, pol)
    if cfg.polCount == 2:
        if cfg.polLockBasisWaist:
            cfg.basisWaist[1] = cfg.basisWaist[0]
        if cfg.polLockDefocus:
            cfg.defocus[1] = cfg.defocus[0]
    if cfg.autoAlignBeamCentre:
        eng.process_fft()  # window positions moved with the centres


def _refine_peak(inten, row, col, ny):
    """Wrap-aware intensity centroid in a +-2 bin neighbourhood of the peak."""
    acc_w = 0.0
    acc_dx = 0.0
    acc_dy = 0.0
    h, w = inten.shape
    for dy in range(-2, 3):
        r = (row + dy) % h  # y axis wraps in Fourier space
        for dx in range(-2, 3):
            c = col + dx
            if not (0 <= c < w):
                continue
            v = float(inten[r, c])
            acc_w += v
            acc_dx += v * dx
            acc_dy += v * dy
    if acc_w <= 0:
        return float(col), float(row if row <= ny // 2 else row - ny)
    kx = col + acc_dx / acc_w
    ky_row = row + acc_dy / acc_w
    ky = ky_row if ky_row <= ny / 2 else ky_row - ny
    return float(kx), float(ky)


def _set_max_radius(eng, pol):
    """Largest window radius admissible for the current tilt of one pol."""
    cfg = eng.config
    wmax = geometry.max_resolvable_angle(cfg.wavelengthCentre, cfg.framePixelSize)
    tx = abs(cfg.tilt[0][pol])
    ty = abs(cfg.tilt[1][pol])
    t = np.hypot(tx, ty)
    radius = min(t / 3.0, wmax - tx, wmax - ty)
    if radius > 0:
        cfg.fourierWindowRadius = float(radius)


def _second_moment_std(inten, axis_x, axis_y):
    """Per-axis intensity second-moment std, averaged over x and y."""
    total = inten.sum()
    if total <= 0:
        return 0.0
    px = inten.sum(axis=0)
    py = inten.sum(axis=1)
    mx = (px * axis_x).sum() / total
    my = (py * axis_y).sum() / total
    var = ((px * (axis_x - mx) ** 2).sum()
           + (py * (axis_y - my) ** 2).sum()) / (2.0 * total)
    return float(np.sqrt(var))


def _estimate_defocus_magnitude(eng, pol):
    """|defocus| from the Fourier-lobe spread in excess of the beam's own.

    A defocus D chirps the field, adding (D*sigma_x/lambda)^2 to the
    frequency variance.  The no-defocus floor follows the HG
    space-bandwidth product sigma_x*sigma_f = (mbar + 1/2)/(2*pi) with
    mbar the per-axis mean mode order of the configured group count, and
    sigma_x measured directly from the reconstructed intensity.
    """
    cfg = eng.config
    lam = cfg.wavelengthCentre
    fr_, fi_, scale = eng._field_r, eng._field_i, eng._field_scale
    if fr_ is None:
        return 0.0
    fields = ((fr_[:, pol].astype(np.float64) + 1j * fi_[:, pol])
              / scale[:, pol, None, None])
    x_axis, y_axis = eng._field_axes
    inten = np.sum(np.abs(fields) ** 2, axis=0)
    sigma_x = _second_moment_std(inten, x_axis.astype(np.float64),
                                 y_axis.astype(np.float64))
    if sigma_x <= 0:
        return 0.0
    window = eng.get_fourier_plane_window()
    if window is None:
        return 0.0
    win_inten = np.sum(np.abs(window[0][:, pol]) ** 2, axis=0).astype(np.float64)
    wh, ww = win_inten.shape
    nx, ny = cfg.fftWindowSizeX, cfg.fftWindowSizeY
    p = cfg.framePixelSize
    fx = (np.arange(ww) - ww // 2) / (nx * p)
    fy = (np.arange(wh) - wh // 2) / (ny * p)
    sigma_f = _second_moment_std(win_inten, fx, fy)
    mbar = max(cfg.basisGroupCount - 1, 0) / 3.0  # per-axis mean order
    floor = (mbar + 0.5) / (2.0 * np.pi * sigma_x)
    excess = sigma_f ** 2 - floor ** 2
    if excess <= 0:
        return 0.0
    return float(lam * np.sqrt(excess) / sigma_x)


class _Param:
    def __init__(self, name, get, set_, step, from_stage):
        self.name = name
        self.get = get
        self.set = set_
        self.step = step
        self.from_stage = from_stage


def _tweak_params(eng):
    cfg = eng.config
    p = cfg.framePixelSize
    bin_deg = geometry.bin_width_deg(cfg.fftWindowSizeX, p, cfg.wavelengthCentre)
    tilt_locked = cfg.polLockTilt or cfg.polCount == 1
    pols = 1 if tilt_locked else 2
    params = []
    if cfg.autoAlignTilt:
        for pol in range(pols):
            for axis in (0, 1):
                def set_tilt(v, a=axis, q=pol, locked=tilt_locked):
                    cfg.tilt[a][q] = v
                    if locked:
                        cfg.tilt[a][1] = cfg.tilt[a][0]
                params.append(_Param(
                    f"tilt{'xy'[axis]}[{pol}]",
                    lambda a=axis, q=pol: cfg.tilt[a][q],
                    set_tilt, 0.25 * bin_deg, 1))
    if cfg.autoAlignBeamCentre:
        for pol in range(1 if cfg.polCount == 1 else 2):
            for axis in (0, 1):
                params.append(_Param(
                    f"centre{'xy'[axis]}[{pol}]",
                    lambda a=axis, q=pol: cfg.beamCentre[a][q],
                    lambda v, a=axis, q=pol: cfg.beamCentre[a].__setitem__(q, v),
                    1.0 * p, 0))
    if cfg.autoAlignDefocus:
        defocus_locked = cfg.polLockDefocus or cfg.polCount == 1
        dpols = 1 if defocus_locked else 2
        for pol in range(dpols):
            def set_defocus(v, q=pol, locked=defocus_locked):
                cfg.defocus[q] = v
                if locked:
                    cfg.defocus[1] = cfg.defocus[0]
            params.append(_Param(
                f"defocus[{pol}]",
                lambda q=pol: cfg.defocus[q],
                set_defocus, 0.05, 2))
    if cfg.autoAlignBasisWaist and cfg.basisGroupCount >= 1:
        def set_waist(v):
            cfg.basisWaist[0] = v
            cfg.basisWaist[1] = v
        params.append(_Param("basisWaist", lambda: cfg.basisWaist[0],
                             set_waist, 0.05 * cfg.basisWaist[0], 3))
    return params


def tweak_optimise(eng):
    """Refine enabled parameters; returns the (signed) final goal value."""
    cfg = eng.config
    if cfg.basisGroupCount < 1:
        eng.tweak_cycles = 0
        return None
    params = _tweak_params(eng)
    eng.tweak_cycles = 0
    best = _evaluate(eng, 0)
    if not params:
        return best
    probed_defocus_sign = False
    for _ in range(MAX_TWEAK_CYCLES):
        cycle_start = best
        for par in params:
            x0 = par.get()
            step = par.step
            if (par.name.startswith("defocus") and not probed_defocus_sign
                    and x0 != 0.0):
                # The coarse estimator cannot sign the defocus; probe both.
                probed_defocus_sign = True
                par.set(-x0)
                v_neg = _evaluate(eng, par.from_stage)
                if v_neg > best:
                    best = v_neg
                    x0 = -x0
                else:
                    par.set(x0)
                    best = _evaluate(eng, par.from_stage)
            candidates = {}
            for x in (x0 - step, x0 + step):
                par.set(x)
                candidates[x] = _evaluate(eng, par.from_stage)
            v_minus = candidates[x0 - step]
            v_plus = candidates[x0 + step]
            denom = v_minus - 2.0 * best + v_plus
            if denom < 0:  # concave: parabola has a maximum
                vertex = x0 + 0.5 * step * (v_minus - v_plus) / denom
                vertex = min(max(vertex, x0 - 2 * step), x0 + 2 * step)
                par.set(vertex)
                candidates[vertex] = _evaluate(eng, par.from_stage)
            candidates[x0] = best
            x_best = max(candidates, key=candidates.get)
            par.set(x_best)
            # Re-run so the engine state matches the committed value.
            best = _evaluate(eng, par.from_stage)
        eng.tweak_cycles += 1
        for par in params:
            par.step *= 0.5
        if best - cycle_start < max(cfg.autoAlignTol, 0.0) + 1e-12:
            break
    return best


def auto_align(eng):
    """Run the configured alignment mode and return the final goal value."""
    cfg = eng.config
    eng.tweak_cycles = 0
    try:
        if cfg.autoAlignMode in (C.AUTOALIGNMODE_FULL, C.AUTOALIGNMODE_ESTIMATE):
            snap_estimate(eng)
        if (cfg.autoAlignMode in (C.AUTOALIGNMODE_FULL, C.AUTOALIGNMODE_TWEAK)
                and cfg.basisGroupCount >= 1):
            tweak_optimise(eng)
        else:
            eng.run_pipeline(0)
        if cfg.basisGroupCount >= 1:
            eng.calc_metrics()
            return eng.metric(cfg.autoAlignGoalIdx)
        return 0.0
    except HoloError:
        return 0.0
