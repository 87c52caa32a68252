"""Numerical kernels of the three-stage reconstruction.

Conventions (fixed for the whole artifact):
  * forward transforms are unnormalised; every inverse is scaled by
    1/(fftWindowSizeX*fftWindowSizeY) regardless of its own size, so a unit
    plane wave survives the FFT -> window -> IFFT round trip with unit
    magnitude and both resolution modes agree at common sample points;
  * the off-axis term of a reference tilted by +(tx, ty) sits at positive
    bin coordinates sin(t)*N*pixelSize/lambda;
  * the reconstructed field is anchored so array index N/2 sits exactly on
    the configured beam centre (fractional shifts are folded into the
    window phases), with axes in metres relative to that centre.
"""

import numpy as np
import scipy.fft

from .errors import ErrorCode, HoloError

SINC_FLOOR = 1e-3


def pol_region(pol, pol_count, frame_width):
    """Column span [start, stop) owned by a polarisation component."""
    if pol_count == 1:
        return 0, frame_width
    half = frame_width // 2
    return (0, half) if pol == 0 else (half, frame_width)


def window_origin(beam_centre_x, beam_centre_y, pol, pol_count,
                  frame_width, frame_height, nx, ny, pixel_size):
    """Clamped (col0, row0) of the camera-plane FFT window for one pol."""
    x0, x1 = pol_region(pol, pol_count, frame_width)
    if nx > (x1 - x0) or ny > frame_height:
        raise HoloError(ErrorCode.INVALIDDIMENSION,
                        "fft window does not fit the frame region")
    xc_pix = beam_centre_x / pixel_size + frame_width / 2.0
    yc_pix = beam_centre_y / pixel_size + frame_height / 2.0
    col0 = int(round(xc_pix)) - nx // 2
    row0 = int(round(yc_pix)) - ny // 2
    col0 = min(max(col0, x0), x1 - nx)
    row0 = min(max(row0, 0), frame_height - ny)
    return col0, row0


def extract_windows(frames, origins, nx, ny):
    """Stack per-pol windows: frames (F, H, W) -> (F, P, ny, nx) float32."""
    pol_count = len(origins)
    f = frames.shape[0]
    out = np.empty((f, pol_count, ny, nx), dtype=np.float32)
    for p, (col0, row0) in enumerate(origins):
        out[:, p] = frames[:, row0:row0 + ny, col0:col0 + nx]
    return out


def forward_fft(windows, workers=1):
    """Real-to-complex transform, unnormalised: (F, P, ny, nx/2+1)."""
    return scipy.fft.rfft2(windows, axes=(-2, -1), workers=workers).astype(np.complex64)


def window_bin_dims(radius_deg, nx, ny, pixel_size, wavelength):
    """Even bounding box (wh, ww) of the circular Fourier window."""
    fr = np.sin(np.radians(radius_deg)) / wavelength  # cycles/m
    rx = fr * nx * pixel_size
    ry = fr * ny * pixel_size
    ww = min(2 * (int(np.floor(rx)) + 1), nx)
    wh = min(2 * (int(np.floor(ry)) + 1), ny)
    return wh, ww, fr


def window_mask(wh, ww, nx, ny, pixel_size, fr):
    """Boolean circle in physical frequency units, centred on the box."""
    dfx = (np.arange(ww) - ww // 2) / (nx * pixel_size)
    dfy = (np.arange(wh) - wh // 2) / (ny * pixel_size)
    return (dfy[:, None] ** 2 + dfx[None, :] ** 2) <= fr * fr + 1e-30


def fill_window_r2c(full, k0x, k0y, wh, ww, nx, ny, fill_factor=False,
                    pixel_size=None):
    """Copy the window around bin (k0x, k0y) out of an r2c plane.

    ``full`` is (..., ny, nx//2+1).  Bins beyond the stored half-plane are
    fetched through Hermitian symmetry, bins beyond Nyquist wrap (alias).
    The output is in centred layout: array index ww//2 is the window centre.
    With fill_factor the copied bins are divided by the pixel-aperture sinc
    envelope evaluated at their physical (aliased) frequency.
    """
    tx = k0x + (np.arange(ww) - ww // 2)
    ty = k0y + (np.arange(wh) - wh // 2)
    txm = np.mod(tx, nx)
    tym = np.mod(ty, ny)
    direct = txm <= nx // 2  # stored half-plane; otherwise Hermitian partner
    sx = np.where(direct, txm, nx - txm)
    rows = np.where(direct[None, :], tym[:, None], np.mod(-ty, ny)[:, None])
    cols = np.broadcast_to(sx[None, :], (wh, ww))
    vals = full[..., rows, cols]
    out = np.where(direct[None, :], vals, np.conj(vals))
    if fill_factor:
        fy = np.where(tym > ny // 2, tym - ny, tym) / float(ny)
        env = np.sinc(fy)[:, None] * np.sinc(sx / float(nx))[None, :]
        env = np.where(np.abs(env) < SINC_FLOOR, SINC_FLOOR, env)
        out = out / env.astype(out.dtype)
    return out.astype(np.complex64)


def fill_window_c2c(full, k0x, k0y, wh, ww, nx, ny):
    """As :func:`fill_window_r2c` for a full complex spectrum (..., ny, nx)."""
    tx = np.mod(k0x + (np.arange(ww) - ww // 2), nx)
    ty = np.mod(k0y + (np.arange(wh) - wh // 2), ny)
    return full[..., ty[:, None], tx[None, :]].astype(np.complex64)


def recentring_phase(k0x, k0y, wh, ww, nx, ny, xi_x, xi_y):
    """Shift-theorem phase anchoring the output grid on the beam centre.

    xi_x/xi_y are the beam-centre coordinates in window pixels (fractional);
    the applied shift is Delta = xi - N/2 so that output index N2/2 lands on
    the centre exactly.
    """
    tx = k0x + (np.arange(ww) - ww // 2)
    ty = k0y + (np.arange(wh) - wh // 2)
    dx = xi_x - nx / 2.0
    dy = xi_y - ny / 2.0
    px = np.exp(2j * np.pi * tx * dx / nx)
    py = np.exp(2j * np.pi * ty * dy / ny)
    return (py[:, None] * px[None, :]).astype(np.complex64)


def inverse_fft(window_centred, resolution_mode, nx, ny, workers=1):
    """IFFT of a centred-layout window; normalisation is 1/(nx*ny).

    resolution_mode 1 transforms at the window's own dimensions, mode 0
    embeds the window in the full (ny, nx) plane first (band-limited
    interpolation of the same field).
    """
    wh, ww = window_centred.shape[-2], window_centred.shape[-1]
    if resolution_mode == 0 and (wh != ny or ww != nx):
        shape = window_centred.shape[:-2] + (ny, nx)
        spec = np.zeros(shape, dtype=np.complex64)
        r0 = ny // 2 - wh // 2
        c0 = nx // 2 - ww // 2
        spec[..., r0:r0 + wh, c0:c0 + ww] = window_centred
    else:
        spec = window_centred
    spec = np.fft.ifftshift(spec, axes=(-2, -1))
    field = scipy.fft.ifft2(spec, axes=(-2, -1), workers=workers)
    n2 = spec.shape[-2] * spec.shape[-1]
    return (field * (n2 / float(nx * ny))).astype(np.complex64)


def field_axes(resolution_mode, nx, ny, wh, ww, pixel_size):
    """Output-plane axes in metres, centred on the beam centre."""
    if resolution_mode == 0:
        x = (np.arange(nx) - nx // 2) * pixel_size
        y = (np.arange(ny) - ny // 2) * pixel_size
    else:
        x = (np.arange(ww) - ww // 2) * pixel_size * (nx / ww)
        y = (np.arange(wh) - wh // 2) * pixel_size * (ny / wh)
    return x.astype(np.float32), y.astype(np.float32)


def removal_phase(x_axis, y_axis, tilt_x_deg, tilt_y_deg, defocus,
                  wavelength, k0x, k0y, nx, ny, pixel_size,
                  beam_centre_x, beam_centre_y):
    """Residual reference phase to divide out after the inverse transform.

    The window offset already removed the integer-bin part of the tilt, so
    only the fractional remainder is removed here, together with the
    quadratic defocus phase and the constant phase the configured tilt
    accumulates at the beam centre.  Multiplying by the returned conjugate
    phase leaves a matched simulated signal exactly flat.
    """
    fx = np.sin(np.radians(tilt_x_deg)) / wavelength
    fy = np.sin(np.radians(tilt_y_deg)) / wavelength
    rx = fx - k0x / (nx * pixel_size)
    ry = fy - k0y / (ny * pixel_size)
    x = x_axis.astype(np.float64)
    y = y_axis.astype(np.float64)
    const = (2.0 * np.pi * (fx * beam_centre_x + fy * beam_centre_y)
             - np.pi * (k0x + k0y))
    px = 2.0 * np.pi * rx * x + (np.pi * defocus / wavelength) * x * x
    py = 2.0 * np.pi * ry * y + (np.pi * defocus / wavelength) * y * y
    phase = const + px[None, :] + py[:, None]
    return np.exp(-1j * phase).astype(np.complex64)


def quantise_int16(field):
    """Pack one complex field into int16 pairs plus its scale.

    scale = 32767 / max(|Re|, |Im|); rounding is to nearest, ties to even
    (numpy's default).
    """
    peak = max(float(np.max(np.abs(field.real))),
               float(np.max(np.abs(field.imag))))
    scale = np.float32(32767.0 / peak) if peak > 0 else np.float32(1.0)
    fr = np.rint(field.real * scale).astype(np.int16)
    fi = np.rint(field.imag * scale).astype(np.int16)
    return fr, fi, scale


def constructive_average(windows):
    """Phase-aligned mean over the leading axis.

    Each member is rotated so its inner product with the running sum is
    real-positive before being added; the first member defines the phase
    reference.
    """
    acc = windows[0].astype(np.complex128).copy()
    for k in range(1, windows.shape[0]):
        member = windows[k].astype(np.complex128)
        inner = np.vdot(acc, member)  # sum(conj(acc) * member)
        if abs(inner) > 0:
            member = member * np.exp(-1j * np.angle(inner))
        acc += member
    return (acc / windows.shape[0]).astype(np.complex64)
