"""Hermite-Gaussian modal basis: separable 1D profiles, mode bookkeeping,
transforms to Laguerre-Gaussian or custom bases, and overlap extraction.

The 2D mode (m, n) is the outer product hx[m] (x) hy[n]; profiles are
orthonormalised under the discrete inner product sum(conj(a)*b)*dx so that
coefficients of grid-resident fields are exact.
"""

import math

import numpy as np

from . import constants as C
from .errors import ErrorCode, HoloError


def mode_indices(group_count):
    """(m, n) pairs included for a given group count, group-major.

    Mode (m, n) is included iff m + n < group_count; within a group m runs
    from the group order down to zero:  (0,0), (1,0), (0,1), (2,0), (1,1), ...
    """
    out = []
    for g in range(group_count):
        for m in range(g, -1, -1):
            out.append((m, g - m))
    return out


def mode_count(group_count):
    return group_count * (group_count + 1) // 2


def mode_group_of_index(idx):
    """Mode-group order (m+n) of the flat mode index."""
    g = 0
    while (g + 1) * (g + 2) // 2 <= idx:
        g += 1
    return g


def hg_profiles(order_count, axis, centre, waist):
    """Normalised 1D Hermite-Gaussian profiles, orders 0..order_count-1.

    Profile m is N_m * H_m(sqrt(2)(x-c)/w) * exp(-((x-c)/w)^2), evaluated
    through the normalised-Hermite recursion (no explicit factorials, so
    orders up to ~100 stay finite), then renormalised on the grid.

    Returns an array (order_count, len(axis)) in float64.
    """
    axis = np.asarray(axis, dtype=np.float64)
    if axis.size == 0 or waist <= 0 or order_count < 1:
        raise HoloError(ErrorCode.INVALIDDIMENSION,
                        "basis axes must be non-empty and waist positive")
    u = np.sqrt(2.0) * (axis - centre) / waist
    out = np.empty((order_count, axis.size), dtype=np.float64)
    h_prev = np.pi ** -0.25 * np.exp(-0.5 * u * u)
    out[0] = h_prev
    if order_count > 1:
        h_cur = np.sqrt(2.0) * u * h_prev
        out[1] = h_cur
        for k in range(2, order_count):
            h_next = np.sqrt(2.0 / k) * u * h_cur - np.sqrt((k - 1.0) / k) * h_prev
            out[k] = h_next
            h_prev, h_cur = h_cur, h_next
    dx = abs(axis[1] - axis[0]) if axis.size > 1 else 1.0
    norms = np.sqrt(np.sum(out * out, axis=1) * dx)
    norms[norms == 0] = 1.0
    out /= norms[:, None]
    return out


class BasisFields1D:
    """Separable basis storage: per-order 1D profiles held as int16 + scale."""

    def __init__(self, group_count, x_axis, y_axis, centre_x, centre_y, waist):
        self.group_count = int(group_count)
        self.x_axis = np.asarray(x_axis, dtype=np.float32)
        self.y_axis = np.asarray(y_axis, dtype=np.float32)
        self.waist = float(waist)
        self.centre = (float(centre_x), float(centre_y))
        hx = hg_profiles(group_count, x_axis, centre_x, waist)
        hy = hg_profiles(group_count, y_axis, centre_y, waist)
        self.scale_x = np.float32(32767.0) / np.max(np.abs(hx), axis=1).astype(np.float32)
        self.scale_y = np.float32(32767.0) / np.max(np.abs(hy), axis=1).astype(np.float32)
        self.hx16 = np.round(hx * self.scale_x[:, None]).astype(np.int16)
        self.hy16 = np.round(hy * self.scale_y[:, None]).astype(np.int16)

    def profiles_x(self):
        return self.hx16.astype(np.float32) / self.scale_x[:, None]

    def profiles_y(self):
        return self.hy16.astype(np.float32) / self.scale_y[:, None]

    def dx(self):
        return float(abs(self.x_axis[1] - self.x_axis[0])) if self.x_axis.size > 1 else 1.0

    def dy(self):
        return float(abs(self.y_axis[1] - self.y_axis[0])) if self.y_axis.size > 1 else 1.0

    def extract(self, fields):
        """Overlap coefficients of fields (..., ny, nx) with every mode.

        Computed separably: contract rows against hy, columns against hx,
        with the grid measure dx*dy included.  Returns (..., modeCount).
        """
        hx = self.profiles_x().astype(np.complex64)
        hy = self.profiles_y().astype(np.complex64)
        # (..., ny, nx) -> (..., orderY, orderX)
        t = np.tensordot(fields, hx.T, axes=([-1], [0]))          # (..., ny, ordX)
        t = np.moveaxis(np.tensordot(hy, t, axes=([1], [-2])), 0, -2)  # (..., ordY, ordX)
        t = t * np.complex64(self.dx() * self.dy())
        idx = mode_indices(self.group_count)
        cols = np.array([m for (m, n) in idx])
        rows = np.array([n for (m, n) in idx])
        return t[..., rows, cols]

    def materialise(self):
        """Full 2D complex modes (modeCount, ny, nx), built on demand."""
        hx = self.profiles_x()
        hy = self.profiles_y()
        modes = [np.outer(hy[n], hx[m]) for (m, n) in mode_indices(self.group_count)]
        return np.asarray(modes, dtype=np.complex64)


def hg_to_lg_transform(group_count):
    """Unitary block-diagonal matrix mapping HG coefficients to LG.

    Within group N the HG modes are ordered (N,0),(N-1,1),...,(0,N) and the
    LG rows carry l = N, N-2, ..., -N (p = min of the two indices).  Row
    entries follow the standard beam-splitter relation

        LG row (n,m) = sum_k  i^k * b(n,m,k) * HG(N-k, k),
        b(n,m,k) = sqrt((N-k)! k! / (2^N n! m!)) * [t^k] (1-t)^n (1+t)^m,

    evaluated in exact integer arithmetic before the square root, so the
    blocks are unitary to float64 round-off for any admissible group count.
    """
    if group_count > C.LG_GROUP_MAX:
        raise HoloError(ErrorCode.INVALIDARGUMENT,
                        f"LG basis supports at most {C.LG_GROUP_MAX} groups")
    total = mode_count(group_count)
    T = np.zeros((total, total), dtype=np.complex128)
    offset = 0
    for g in range(group_count):
        size = g + 1
        block = _lg_block(g)
        T[offset:offset + size, offset:offset + size] = block
        offset += size
    return T


def _poly_coef(n, m, k):
    """Coefficient of t^k in (1-t)^n (1+t)^m, exact integer."""
    total = 0
    for j in range(max(0, k - m), min(n, k) + 1):
        total += (-1) ** j * math.comb(n, j) * math.comb(m, k - j)
    return total


def _lg_block(N):
    # Row ordering l = N, N-2, ..., -N with l > 0 carrying exp(+i*l*phi);
    # under that convention row l corresponds to (n, m) = ((N-l)/2 + 0, ...)
    # i.e. n = row, m = N - row.
    block = np.zeros((N + 1, N + 1), dtype=np.complex128)
    for row in range(N + 1):
        n = row
        m = N - row
        sign = (-1.0) ** min(n, m)  # aligns radial phase with L_p^|l| fields
        denom = math.factorial(n) * math.factorial(m) * (2 ** N)
        for k in range(N + 1):
            num = math.factorial(N - k) * math.factorial(k)
            b = math.sqrt(num / denom) * _poly_coef(n, m, k)
            block[row, k] = sign * (1j ** k) * b
    return block
