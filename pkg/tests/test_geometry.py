import numpy as np
import pytest
from hypothesis import given, strategies as st

from holopipe import geometry
from holopipe.errors import ErrorCode, HoloError


def test_max_resolvable_angle_worked_example():
    # 1565 nm on 20 um pixels resolves 2.24 degrees.
    assert geometry.max_resolvable_angle(1565e-9, 20e-6) == pytest.approx(2.24, abs=0.005)


def test_max_resolvable_angle_direct_oracle():
    lam, p = 1550e-9, 8e-6
    expected = (lam / (2 * p)) * 180.0 / np.pi  # independent arithmetic
    assert geometry.max_resolvable_angle(lam, p) == pytest.approx(expected, rel=1e-12)


def test_max_resolvable_angle_pixel_doubling_halves():
    a = geometry.max_resolvable_angle(1565e-9, 10e-6)
    b = geometry.max_resolvable_angle(1565e-9, 20e-6)
    assert a == pytest.approx(2 * b, rel=1e-12)


@given(st.floats(min_value=1e-7, max_value=1e-5),
       st.floats(min_value=1e-6, max_value=1e-4))
def test_max_resolvable_angle_scale_invariance(lam, p):
    assert geometry.max_resolvable_angle(lam, p) == pytest.approx(
        geometry.max_resolvable_angle(2 * lam, 2 * p), rel=1e-9)


@pytest.mark.parametrize("lam,p", [(0.0, 1e-6), (1e-6, 0.0), (-1e-6, 1e-6)])
def test_max_resolvable_angle_rejects_nonpositive(lam, p):
    with pytest.raises(HoloError) as err:
        geometry.max_resolvable_angle(lam, p)
    assert err.value.code == ErrorCode.INVALIDARGUMENT


def test_max_window_radius_worked_example():
    wmax = geometry.max_resolvable_angle(1565e-9, 20e-6)
    assert geometry.max_window_radius(wmax) == pytest.approx(0.719, abs=0.001)


def test_wrap_fraction_exact_form():
    assert geometry.WINDOW_FRACTION_WRAP == pytest.approx((-2 + np.sqrt(68)) / 16,
                                                          abs=1e-15)
    assert geometry.WINDOW_FRACTION_WRAP == pytest.approx(0.3904, abs=1e-4)
    assert geometry.max_window_radius(1.0, allow_wrap=True) == pytest.approx(
        0.39039, abs=1e-5)


def test_max_window_radius_homogeneous_in_wmax():
    small = geometry.max_window_radius(1e-9)
    assert small == pytest.approx(0.320513e-9, rel=1e-9)
    with pytest.raises(HoloError):
        geometry.max_window_radius(0.0)


def test_recommended_tilt_worked_example():
    tx, ty = geometry.recommended_tilt(0.719, 2.24)
    assert tx == pytest.approx(1.525, abs=0.001)
    assert ty == pytest.approx(1.525, abs=0.001)


def test_recommended_tilt_magnitude_is_three_radii():
    wmax = 2.24
    for wc in (0.1, 0.3, 0.719):
        tx, ty = geometry.recommended_tilt(wc, wmax)
        assert np.hypot(tx, ty) == pytest.approx(3 * wc, rel=1e-12)


def test_recommended_tilt_wrapping_form():
    tx, ty = geometry.recommended_tilt(0.3904, 1.0, allow_wrap=True)
    assert tx == pytest.approx(1.0 - 0.3904, rel=1e-12)
    assert ty == pytest.approx(1.0, rel=1e-12)


def test_recommended_tilt_zero_limit():
    tx, ty = geometry.recommended_tilt(1e-12, 2.24)
    assert abs(tx) < 1e-11 and abs(ty) < 1e-11


def test_recommended_tilt_rejects_oversized_window():
    with pytest.raises(HoloError) as err:
        geometry.recommended_tilt(1.0, 2.24)  # > 0.320513 * 2.24
    assert err.value.code == ErrorCode.INVALIDARGUMENT


def test_tilt_bin_round_trip():
    lam, p, n = 1565e-9, 20e-6, 256
    for tilt in (0.3, 1.0, 1.525, 2.0):
        b = geometry.tilt_to_bin(tilt, n, p, lam)
        assert float(geometry.bin_to_tilt(b, n, p, lam)) == pytest.approx(tilt,
                                                                          rel=1e-12)


def test_tilt_to_bin_uses_full_sine():
    # At large angles the sine mapping departs from the linear one.
    lam, p, n = 1565e-9, 1e-6, 64
    linear = np.radians(30.0) * n * p / lam
    exact = float(geometry.tilt_to_bin(30.0, n, p, lam))
    assert exact == pytest.approx(np.sin(np.radians(30.0)) * n * p / lam, rel=1e-12)
    assert exact < linear
