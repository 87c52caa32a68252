import numpy as np
import pytest

from holopipe import pipeline
from holopipe.engine import Engine
from holopipe.errors import ErrorCode, HoloError
from holopipe.geometry import max_resolvable_angle, max_window_radius
from holopipe.simulate import SimulationSpec, simulate_frames

from util import engine_for, normalised_matrix


def _plain_engine(frames, nx=None, ny=None, **overrides):
    eng = Engine()
    cfg = eng.config
    cfg.frameWidth = frames.shape[2]
    cfg.frameHeight = frames.shape[1]
    cfg.fftWindowSizeX = nx or frames.shape[2]
    cfg.fftWindowSizeY = ny or frames.shape[1]
    cfg.batchCount = frames.shape[0]
    for key, value in overrides.items():
        setattr(cfg, key, value)
    eng.source.set_float32(frames.astype(np.float32))
    return eng


def test_constant_frame_is_dc_only():
    c = 0.7
    eng = _plain_engine(np.full((1, 64, 64), c, dtype=np.float32))
    eng.process_fft()
    full = eng._fourier_full[0, 0]
    assert full[0, 0] == pytest.approx(c * 64 * 64, rel=1e-5)
    rest = np.abs(full).sum() - abs(full[0, 0])
    assert rest < 1e-2 * abs(full[0, 0])


def test_impulse_has_flat_spectrum():
    frames = np.zeros((1, 64, 64), dtype=np.float32)
    frames[0, 10, 20] = 1.0
    eng = _plain_engine(frames)
    eng.process_fft()
    mags = np.abs(eng._fourier_full[0, 0])
    assert mags.max() == pytest.approx(1.0, rel=1e-5)
    assert mags.min() == pytest.approx(1.0, rel=1e-5)


def test_cosine_fringe_peaks_at_expected_bin():
    n, p, lam = 128, 20e-6, 1565e-9
    tilt = 1.2  # degrees
    k_expected = np.sin(np.radians(tilt)) * n * p / lam
    x = (np.arange(n) - n // 2) * p
    fringe = 1.0 + np.cos(2 * np.pi * np.sin(np.radians(tilt)) / lam * x)
    frames = np.tile(fringe[None, None, :], (1, n, 1)).astype(np.float32)
    eng = _plain_engine(frames, framePixelSize=p, wavelengthCentre=lam)
    eng.process_fft()
    row0 = np.abs(eng._fourier_full[0, 0][0])  # ky = 0 row
    row0[0] = 0.0  # ignore DC
    assert int(np.argmax(row0)) == int(round(k_expected))


def test_parseval_with_hermitian_folding(rng):
    n = 64
    frames = rng.random((1, n, n)).astype(np.float32)
    eng = _plain_engine(frames)
    eng.process_fft()
    full = eng._fourier_full[0, 0].astype(np.complex128)
    spatial = float(np.sum(frames[0].astype(np.float64) ** 2))
    power = np.abs(full) ** 2
    # Columns 1..n/2-1 represent both +-kx; DC and Nyquist columns are unique.
    spectral = power[:, 0].sum() + power[:, -1].sum() + 2 * power[:, 1:-1].sum()
    assert spectral / (n * n) == pytest.approx(spatial, rel=1e-4)


def test_window_circularity():
    wh, ww = 20, 20
    nx = ny = 128
    p = 20e-6
    fr = 9.5 / (nx * p)  # 9.5-bin radius
    mask = pipeline.window_mask(wh, ww, nx, ny, p, fr)
    for iy in range(wh):
        for ix in range(ww):
            dist2 = ((ix - ww // 2) / (nx * p)) ** 2 + ((iy - wh // 2) / (ny * p)) ** 2
            assert mask[iy, ix] == (dist2 <= fr * fr + 1e-30)


def test_reconstruction_stage_getters_before_stage():
    eng = _plain_engine(np.zeros((1, 64, 64), dtype=np.float32))
    assert eng.get_fourier_plane_full() is None
    assert eng.get_fourier_plane_window() is None
    with pytest.raises(HoloError) as err:
        eng.process_ifft()
    assert err.value.code == ErrorCode.NULLPOINTER
    with pytest.raises(HoloError):
        eng.process_remove_tilt()


def test_fourier_plane_full_width_is_half_plus_one():
    eng = _plain_engine(np.zeros((1, 64, 96), dtype=np.float32), nx=96, ny=64)
    eng.process_fft()
    data, frames, pol, width, height = eng.get_fourier_plane_full()
    assert width == 96 // 2 + 1
    assert height == 64


def test_window_energy_bounded_by_full_plane(rng):
    frames = rng.random((1, 128, 128)).astype(np.float32)
    eng = _plain_engine(frames, framePixelSize=20e-6)
    eng.process_fft()
    eng.process_ifft()
    full = eng._fourier_full
    window = eng._window
    # Full-plane energy over the true spectrum (account for folding).
    power = np.abs(full[0, 0].astype(np.complex128)) ** 2
    full_energy = power[:, 0].sum() + power[:, -1].sum() + 2 * power[:, 1:-1].sum()
    win_energy = float(np.sum(np.abs(window[0, 0].astype(np.complex128)) ** 2))
    assert win_energy <= full_energy * (1 + 1e-6)


def _closure_spec(**kw):
    base = dict(frameCount=6, frameWidth=256, frameHeight=256, polCount=1,
                beamGroupCount=3, beamWaist=[128 * 20e-6 / 6])
    base.update(kw)
    return SimulationSpec(**base)


def test_tilt_removal_leaves_matched_signal_flat():
    # Fundamental-only signal; phase std after removal is quantisation-level.
    coefs = np.zeros((1, 1, 1), dtype=np.complex64)
    coefs[0, 0, 0] = 1.0
    spec = _closure_spec(frameCount=1, beamGroupCount=1, beamCoefs=coefs)
    f32, _, s = simulate_frames(spec)
    eng = engine_for(s, fftWindowSizeX=128, fftWindowSizeY=128)
    eng.source.set_float32(f32)
    eng.run_pipeline()
    fields, _, _, x_axis, y_axis, _, _ = eng.get_fields()
    field = fields[0, 0]
    w = s.beamWaist[0]
    core = (np.abs(x_axis[None, :]) < w) & (np.abs(y_axis[:, None]) < w)
    phases = np.angle(field[core])
    resultant = np.abs(np.mean(np.exp(1j * phases)))
    circ_std = np.sqrt(max(0.0, -2.0 * np.log(resultant)))
    assert circ_std < 1e-3


def test_zero_tilt_zero_defocus_is_identity_phase(rng):
    frames = rng.random((1, 64, 64)).astype(np.float32)
    eng = _plain_engine(frames, framePixelSize=20e-6)
    eng.config.tilt = [[0.0, 0.0], [0.0, 0.0]]
    eng.config.defocus = [0.0, 0.0]
    eng.config.fourierWindowRadius = 0.3
    eng.process_fft()
    eng.process_ifft()
    before = eng._ifft_fields.copy()
    eng.process_remove_tilt()
    after = (eng._field_r[0, 0].astype(np.float32)
             + 1j * eng._field_i[0, 0]) / eng._field_scale[0, 0]
    peak = np.abs(before[0, 0]).max()
    assert np.max(np.abs(after - before[0, 0])) <= peak / 32767 * 2.5


def test_field_scale_and_quantisation_bound(rng):
    field = (rng.standard_normal((32, 32)) + 1j * rng.standard_normal((32, 32)))
    field = field.astype(np.complex64)
    fr, fi, scale = pipeline.quantise_int16(field)
    m = max(np.abs(field.real).max(), np.abs(field.imag).max())
    assert scale == pytest.approx(32767.0 / m, rel=1e-6)
    assert max(np.abs(fr).max(), np.abs(fi).max()) <= 32767
    restored = (fr.astype(np.float32) + 1j * fi.astype(np.float32)) / scale
    assert np.max(np.abs(restored - field)) <= m / 32767


def test_get_fields_matches_manual_dequantisation():
    spec = _closure_spec(frameCount=2)
    f32, _, s = simulate_frames(spec)
    eng = engine_for(s, fftWindowSizeX=128, fftWindowSizeY=128)
    eng.source.set_float32(f32)
    eng.run_pipeline()
    fields, b, pol, x_axis, y_axis, width, height = eng.get_fields()
    fr, fi, scale, _, _, _, _, _, _ = eng.get_fields16()
    manual = (fr.astype(np.float32) + 1j * fi.astype(np.float32))
    manual /= scale[:, :, None, None]
    assert np.array_equal(fields, manual.astype(np.complex64))


def test_field_axis_spacing_windowed_mode():
    spec = _closure_spec(frameCount=1)
    f32, _, s = simulate_frames(spec)
    eng = engine_for(s, fftWindowSizeX=128, fftWindowSizeY=128, resolutionMode=1)
    eng.source.set_float32(f32)
    eng.run_pipeline()
    x_axis = eng.get_fields()[3]
    ww = x_axis.size
    expected = s.pixelSize * (128 / ww)  # sampling-theory decimation pitch
    assert x_axis[1] - x_axis[0] == pytest.approx(expected, rel=1e-6)


def test_resolution_mode_zero_is_bandlimited_interpolation():
    spec = _closure_spec(frameCount=1)
    f32, _, s = simulate_frames(spec)
    eng0 = engine_for(s, fftWindowSizeX=128, fftWindowSizeY=128, resolutionMode=0)
    eng0.source.set_float32(f32)
    eng0.process_fft()
    eng0.process_ifft()
    f0 = eng0._ifft_fields[0, 0]
    eng1 = engine_for(s, fftWindowSizeX=128, fftWindowSizeY=128, resolutionMode=1)
    eng1.source.set_float32(f32)
    eng1.process_fft()
    eng1.process_ifft()
    # Zero-pad the mode-1 window spectrum to the full size: the mode-0 field
    # must match that interpolation at its own sample points (oracle).
    win = eng1._window[0, 0]
    wh, ww = win.shape
    spec_full = np.zeros((128, 128), dtype=np.complex64)
    spec_full[64 - wh // 2:64 + wh - wh // 2, 64 - ww // 2:64 + ww - ww // 2] = win
    oracle = np.fft.ifft2(np.fft.ifftshift(spec_full))  # ifft2 divides by N1
    assert np.max(np.abs(oracle - f0)) <= np.abs(oracle).max() * 1e-3


def test_fill_factor_divides_by_sinc_envelope(rng):
    frames = rng.random((1, 128, 128)).astype(np.float32)
    base = _plain_engine(frames, framePixelSize=20e-6)
    base.config.fillFactorCorrectionEnabled = 0
    base.process_fft()
    base.process_ifft()
    corr = _plain_engine(frames, framePixelSize=20e-6)
    corr.config.fillFactorCorrectionEnabled = 1
    corr.process_fft()
    corr.process_ifft()
    w_off = base._window[0, 0]
    w_on = corr._window[0, 0]
    k0 = base._window_meta["k0"][0, 0]
    wh, ww = w_off.shape
    nx = ny = 128
    for iy in range(0, wh, 3):
        for ix in range(0, ww, 3):
            if w_off[iy, ix] == 0:
                continue
            tx = (int(k0[0]) + ix - ww // 2) % nx
            ty = (int(k0[1]) + iy - wh // 2) % ny
            fx = (tx if tx <= nx // 2 else nx - tx) / nx
            fy = (ty if ty <= ny // 2 else ty - ny) / ny
            env = np.sinc(fx) * np.sinc(fy)
            assert w_on[iy, ix] == pytest.approx(w_off[iy, ix] / env, rel=1e-4)


def test_end_to_end_linearity():
    spec = _closure_spec(frameCount=2)
    f32, _, s = simulate_frames(spec)
    eng1 = engine_for(s, fftWindowSizeX=128, fftWindowSizeY=128)
    eng1.source.set_float32(f32)
    eng1.run_pipeline()
    fields1 = eng1.get_fields()[0]
    eng2 = engine_for(s, fftWindowSizeX=128, fftWindowSizeY=128)
    eng2.source.set_float32(3.0 * f32)
    eng2.run_pipeline()
    fields2 = eng2.get_fields()[0]
    ratio = np.abs(fields2).sum() / np.abs(fields1).sum()
    assert ratio == pytest.approx(3.0, rel=1e-3)
    peak = np.abs(fields2).max()
    assert np.max(np.abs(fields2 - 3.0 * fields1)) <= peak * 3e-4


def test_wraparound_window_at_nyquist_edge_still_reconstructs():
    # Wrap-mode geometry: tilt (wmax-wc, wmax) with the larger wrap fraction,
    # so the window wraps around the +-ky edge of Fourier space.
    lam, p = 1565e-9, 20e-6
    wmax = max_resolvable_angle(lam, p)
    wc = max_window_radius(wmax, allow_wrap=True) * 0.98
    spec = _closure_spec(frameCount=6,
                         refTiltX=[wmax - wc], refTiltY=[wmax],
                         beamWaist=[128 * 20e-6 / 5])
    f32, _, s = simulate_frames(spec)
    eng = engine_for(s, fftWindowSizeX=128, fftWindowSizeY=128,
                     fourierWindowRadius=wc)
    eng.source.set_float32(f32)
    coefs, b, m, pol = eng.process_batch()
    an = normalised_matrix(coefs)
    diag = np.abs(np.diag(an)) ** 2
    off = np.sum(np.abs(an) ** 2, axis=1) - diag
    assert diag.min() > 0.9
    assert off.max() < 0.1


def test_dual_pol_window_origins_sit_in_their_halves():
    col0_a, _ = pipeline.window_origin(-1.6e-3, 0.0, 0, 2, 320, 256, 128, 128, 20e-6)
    col0_b, _ = pipeline.window_origin(1.6e-3, 0.0, 1, 2, 320, 256, 128, 128, 20e-6)
    assert 0 <= col0_a <= 160 - 128
    assert 160 <= col0_b <= 320 - 128
    with pytest.raises(HoloError) as err:
        pipeline.window_origin(0.0, 0.0, 0, 2, 192, 256, 128, 128, 20e-6)
    assert err.value.code == ErrorCode.INVALIDDIMENSION
