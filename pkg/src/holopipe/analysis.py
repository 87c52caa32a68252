"""Per-plane analysis parameters and transfer-matrix quality metrics.

Metric formulas (all dB):
    IL        10*log10(mean over rows of row power)
    MDL       20*log10(sigma_max / sigma_min) over singular values
    DIAG      10*log10(sum |A_ii|^2 / diagonal length)
    SNRAVG    10*log10(diag power / off-diag power)
    DIAGBEST  max_i 10*log10(|A_ii|^2)      DIAGWORST analogous min
    SNRBEST   max_i 10*log10(|A_ii|^2 / off-diag power of row i), SNRWORST min
    SNRMG     SNRAVG with intra-mode-group coupling (same m+n, same pol)
              counted as signal

A diagonal is taken along min(rows, cols); rows beyond it count entirely as
off-diagonal.  Zero off-diagonal power is capped at +200 dB so SNR values
stay finite and orderable.
"""

import numpy as np

from . import constants as C
from .errors import ErrorCode, HoloError

SNR_CAP_DB = 200.0
_NEG_INF_DB = float(np.finfo(np.float32).min)


class AnalysisSummary:
    """Per-plane statistics: parameters (ANALYSIS_COUNT, polCount, totalCount),
    summed intensity and the plane axes."""

    def __init__(self, parameters, total_intensity, x_axis, y_axis, plane):
        self.parameters = parameters
        self.total_intensity = total_intensity
        self.x_axis = x_axis
        self.y_axis = y_axis
        self.plane = plane


def _analyse_single(intensity, abs_vals, x_axis, y_axis, out):
    """Fill one parameter column from an intensity plane (ny, nx)."""
    dx = float(abs(x_axis[1] - x_axis[0])) if x_axis.size > 1 else 1.0
    dy = float(abs(y_axis[1] - y_axis[0])) if y_axis.size > 1 else 1.0
    da = dx * dy
    total = float(intensity.sum())
    out[C.ANALYSIS_TOTALPOWER] = total * da
    if total > 0:
        out[C.ANALYSIS_COMX] = float((intensity.sum(axis=0) * x_axis).sum()) / total
        out[C.ANALYSIS_COMY] = float((intensity.sum(axis=1) * y_axis).sum()) / total
        out[C.ANALYSIS_AEFF] = (total * da) ** 2 / float((intensity ** 2).sum() * da)
        # Circular mean of y treating the axis extent as one period.
        span = dy * y_axis.size
        angles = 2.0 * np.pi * (y_axis - y_axis[0]) / span
        resultant = (intensity.sum(axis=1) * np.exp(1j * angles)).sum()
        theta = float(np.angle(resultant)) % (2.0 * np.pi)
        out[C.ANALYSIS_COMYWRAP] = y_axis[0] + theta * span / (2.0 * np.pi)
    else:
        out[C.ANALYSIS_COMX] = 0.0
        out[C.ANALYSIS_COMY] = 0.0
        out[C.ANALYSIS_AEFF] = 0.0
        out[C.ANALYSIS_COMYWRAP] = y_axis[0] if y_axis.size else 0.0
    flat_idx = int(np.argmax(abs_vals))
    out[C.ANALYSIS_MAXABS] = float(abs_vals.reshape(-1)[flat_idx])
    out[C.ANALYSIS_MAXABSIDX] = np.frombuffer(
        np.int32(flat_idx).tobytes(), dtype=np.float32)[0]
    return out


def analyse_plane(data, x_axis, y_axis, plane):
    """Analysis summary for complex plane data (count, polCount, ny, nx).

    The final slot aggregates the whole batch: computed from the summed
    intensity, with MAXABS taken as the peak of its square root.
    """
    data = np.asarray(data)
    if data.size == 0:
        raise HoloError(ErrorCode.INVALIDDIMENSION, "empty plane data")
    count, pol_count = data.shape[0], data.shape[1]
    x_axis = np.asarray(x_axis, dtype=np.float64)
    y_axis = np.asarray(y_axis, dtype=np.float64)
    params = np.zeros((C.ANALYSIS_COUNT, pol_count, count + 1), dtype=np.float32)
    abs_all = np.abs(data)
    inten_all = abs_all.astype(np.float64) ** 2
    for p in range(pol_count):
        for i in range(count):
            col = np.zeros(C.ANALYSIS_COUNT, dtype=np.float32)
            _analyse_single(inten_all[i, p], abs_all[i, p], x_axis, y_axis, col)
            params[:, p, i] = col
        total = inten_all[:, p].sum(axis=0)
        col = np.zeros(C.ANALYSIS_COUNT, dtype=np.float32)
        _analyse_single(total, np.sqrt(total), x_axis, y_axis, col)
        params[:, p, count] = col
    total_intensity = inten_all.sum(axis=(0, 1)).astype(np.float32)
    return AnalysisSummary(params, total_intensity, x_axis.astype(np.float32),
                           y_axis.astype(np.float32), plane)


def analysis_value(summary, param, pol, idx):
    v = summary.parameters[param, pol, idx]
    if param == C.ANALYSIS_MAXABSIDX:
        return int(np.frombuffer(np.float32(v).tobytes(), dtype=np.int32)[0])
    return float(v)


def build_transfer_matrix(coefs, mode_count, pol_count,
                          pol_independence=0, mul_conj_trans=0):
    """Transfer matrix from coefficients (batchCount, polCount*modeCount).

    pol_independence=1 treats every polarisation as a separate input: the
    matrix becomes (polCount*batchCount) x (polCount*modeCount), pol blocks
    stacked row-wise with cross-polarisation coupling zeroed.
    mul_conj_trans=1 returns A @ A^H instead of A.
    """
    if coefs is None or coefs.size == 0:
        raise HoloError(ErrorCode.NULLPOINTER, "no coefficients available")
    batch = coefs.shape[0]
    A = np.asarray(coefs, dtype=np.complex128).reshape(batch, pol_count * mode_count)
    if pol_independence and pol_count > 1:
        out = np.zeros((pol_count * batch, pol_count * mode_count), dtype=np.complex128)
        for p in range(pol_count):
            rows = slice(p * batch, (p + 1) * batch)
            cols = slice(p * mode_count, (p + 1) * mode_count)
            out[rows, cols] = A[:, cols]
        A = out
    if mul_conj_trans:
        A = A @ A.conj().T
    return A


def _db_power(x):
    if x <= 0:
        return _NEG_INF_DB
    return 10.0 * np.log10(x)


def _snr_db(signal, noise):
    if signal <= 0:
        return _NEG_INF_DB
    if noise <= 0:
        return SNR_CAP_DB
    return min(10.0 * np.log10(signal / noise), SNR_CAP_DB)


def compute_metrics_single(A, group_of_col=None):
    """The nine metrics of one transfer matrix; returns a length-9 array.

    group_of_col maps each column to a (pol, modeGroup) label for SNRMG;
    when absent SNRMG degenerates to SNRAVG.
    """
    A = np.asarray(A)
    vals = np.full(C.METRIC_COUNT, C.METRIC_UNSET, dtype=np.float64)
    if A.size == 0:
        return vals
    power = np.abs(A) ** 2
    rows, cols = A.shape
    ndiag = min(rows, cols)
    row_power = power.sum(axis=1)
    vals[C.METRIC_IL] = _db_power(float(row_power.mean()))
    if np.any(power > 0):
        sv = np.linalg.svd(A, compute_uv=False)
        smin = sv.min()
        if smin > 0:
            vals[C.METRIC_MDL] = 20.0 * np.log10(sv.max() / smin)
    diag = power[np.arange(ndiag), np.arange(ndiag)]
    diag_total = float(diag.sum())
    off_total = float(power.sum() - diag_total)
    vals[C.METRIC_DIAG] = _db_power(diag_total / ndiag)
    vals[C.METRIC_SNRAVG] = _snr_db(diag_total, off_total)
    with np.errstate(divide="ignore"):
        diag_db = np.where(diag > 0, 10.0 * np.log10(np.maximum(diag, 1e-300)),
                           _NEG_INF_DB)
    vals[C.METRIC_DIAGBEST] = float(diag_db.max())
    vals[C.METRIC_DIAGWORST] = float(diag_db.min())
    row_off = row_power[:ndiag] - diag
    snr_rows = np.array([_snr_db(float(diag[i]), float(row_off[i]))
                         for i in range(ndiag)])
    vals[C.METRIC_SNRBEST] = float(snr_rows.max()) if ndiag else C.METRIC_UNSET
    vals[C.METRIC_SNRWORST] = float(snr_rows.min()) if ndiag else C.METRIC_UNSET
    if group_of_col is not None:
        labels = list(group_of_col)
        signal = 0.0
        for i in range(ndiag):
            same = [j for j in range(cols) if labels[j] == labels[i]]
            signal += float(power[i, same].sum())
        noise = float(power.sum() - signal)
        vals[C.METRIC_SNRMG] = _snr_db(signal, noise)
    else:
        vals[C.METRIC_SNRMG] = vals[C.METRIC_SNRAVG]
    return vals


class MetricsReport:
    """values: (METRIC_COUNT, wavelengthCount+1) float32, unset = METRIC_UNSET.

    Slot wavelengthCount holds the across-wavelength average.
    """

    def __init__(self, wavelength_count=1):
        self.wavelength_count = int(wavelength_count)
        self.values = np.full((C.METRIC_COUNT, self.wavelength_count + 1),
                              C.METRIC_UNSET, dtype=np.float32)

    def get(self, metric_idx):
        if not (0 <= metric_idx < C.METRIC_COUNT):
            return 0.0
        return float(self.values[metric_idx, self.wavelength_count])

    def get_all(self, metric_idx):
        if not (0 <= metric_idx < C.METRIC_COUNT):
            return None
        return self.values[metric_idx].copy()


def compute_metrics(coefs, mode_count, pol_count, wavelength_of_batch,
                    wavelength_count, pol_independence=0, mul_conj_trans=0,
                    group_of_mode=None):
    """Per-wavelength metrics plus the average slot.

    wavelength_of_batch assigns each batch row to a wavelength index; rows of
    one wavelength form that wavelength's sub-matrix.
    """
    report = MetricsReport(wavelength_count)
    if coefs is None or coefs.size == 0:
        return report
    batch = coefs.shape[0]
    wl = np.asarray(wavelength_of_batch)
    group_labels = None
    if group_of_mode is not None:
        group_labels = []
        for p in range(pol_count):
            group_labels.extend((p, g) for g in group_of_mode)
    per_wl = np.full((C.METRIC_COUNT, wavelength_count), C.METRIC_UNSET,
                     dtype=np.float64)
    for w in range(wavelength_count):
        rows = np.nonzero(wl == w)[0]
        if rows.size == 0:
            continue
        A = build_transfer_matrix(coefs[rows], mode_count, pol_count,
                                  pol_independence, mul_conj_trans)
        labels = group_labels
        if mul_conj_trans:
            labels = None  # columns of A A^H are batch elements, not modes
        per_wl[:, w] = compute_metrics_single(A, labels)
    report.values[:, :wavelength_count] = per_wl.astype(np.float32)
    for m in range(C.METRIC_COUNT):
        valid = per_wl[m][per_wl[m] > C.METRIC_UNSET / 2]
        if valid.size:
            report.values[m, wavelength_count] = np.float32(valid.mean())
    return report
