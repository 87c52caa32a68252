"""Reference-angle and Fourier-window geometry.

The off-axis term must sit far enough from the autocorrelation terms (which
have twice its bandwidth) that a circular window of radius ``w_c`` around it
touches neither them nor the edge of resolvable Fourier space.  For a window
placed on the diagonal the admissible radius is

    w_c <= sqrt(2)/(3+sqrt(2)) * w_max = 0.320513 * w_max

and if the window is allowed to wrap around the Fourier-space edge the
fraction grows to the positive root of 8w^2 + 2w - 2 = 0, i.e.
(-2+sqrt(68))/16 ~= 0.3904.  ``w_max`` is the maximum resolvable angle set by
the pixel pitch, (lambda/(2*pixelSize)) in radians.
"""

import numpy as np

from .errors import ErrorCode, HoloError

# Non-wrapping admissible fraction, stored to the precision it is quoted at.
WINDOW_FRACTION = 0.320513

# Wrapping fraction kept in exact symbolic form.
WINDOW_FRACTION_WRAP = (-2.0 + np.sqrt(68.0)) / 16.0

DEG = 180.0 / np.pi


def max_resolvable_angle(wavelength, pixel_size):
    """Largest off-axis angle the pixel pitch can resolve, in degrees.

    w_max = (wavelength / (2 * pixelSize)) * (180/pi).
    """
    if wavelength <= 0 or pixel_size <= 0:
        raise HoloError(ErrorCode.INVALIDARGUMENT,
                        "wavelength and pixelSize must be positive")
    return (wavelength / (2.0 * pixel_size)) * DEG


def max_window_radius(w_max, allow_wrap=False):
    """Largest admissible Fourier-window radius for a given ``w_max`` (deg)."""
    if w_max <= 0:
        raise HoloError(ErrorCode.INVALIDARGUMENT, "w_max must be positive")
    frac = WINDOW_FRACTION_WRAP if allow_wrap else WINDOW_FRACTION
    return frac * w_max


def recommended_tilt(w_c, w_max, allow_wrap=False):
    """Reference tilt (x, y) in degrees that centres a window of radius w_c.

    Without wrapping both components are 3*w_c/sqrt(2) (window on the
    diagonal, three radii from DC).  With wrapping the window hugs the
    y-edge: (w_max - w_c, w_max).
    """
    # 0.5% slack admits radii quoted at printed precision (0.719, 0.3904).
    limit = max_window_radius(w_max, allow_wrap)
    if w_c <= 0 or w_c > limit * 1.005:
        raise HoloError(ErrorCode.INVALIDARGUMENT,
                        "window radius outside the admissible fraction")
    if allow_wrap:
        return (w_max - w_c, w_max)
    t = 3.0 * w_c / np.sqrt(2.0)
    return (t, t)


def tilt_to_bin(tilt_deg, axis_size, pixel_size, wavelength):
    """Continuous Fourier bin coordinate of a tilt angle.

    bin = sin(tilt) * N * pixelSize / wavelength.  The full sine is used so
    the mapping stays exact at large tilts.
    """
    return np.sin(np.asarray(tilt_deg) / DEG) * axis_size * pixel_size / wavelength


def bin_to_tilt(bin_idx, axis_size, pixel_size, wavelength):
    """Inverse of :func:`tilt_to_bin`; returns degrees."""
    s = np.asarray(bin_idx, dtype=np.float64) * wavelength / (axis_size * pixel_size)
    return np.arcsin(np.clip(s, -1.0, 1.0)) * DEG


def bin_width_deg(axis_size, pixel_size, wavelength):
    """Angular width of one Fourier bin near DC, in degrees."""
    return np.degrees(np.arcsin(min(1.0, wavelength / (axis_size * pixel_size))))


def fourier_angle_axis(bin_indices, axis_size, pixel_size, wavelength):
    """Angle (degrees) of each Fourier bin; exact arcsin mapping."""
    return bin_to_tilt(np.asarray(bin_indices, dtype=np.float64),
                       axis_size, pixel_size, wavelength)
