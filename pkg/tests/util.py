"""Shared helpers: engines configured against simulator ground truth."""

import numpy as np

from holopipe.engine import Engine


def engine_for(spec, batch_count=None, **overrides):
    """Engine whose config matches a resolved SimulationSpec exactly."""
    eng = Engine()
    cfg = eng.config
    cfg.frameWidth = spec.frameWidth
    cfg.frameHeight = spec.frameHeight
    cfg.framePixelSize = spec.pixelSize
    cfg.polCount = spec.polCount
    cfg.fftWindowSizeX = spec.frameWidth // spec.polCount
    cfg.fftWindowSizeY = spec.frameHeight
    cfg.wavelengthCentre = spec.wavelengths[0]
    if len(spec.wavelengths) > 1:
        cfg.wavelengths = list(spec.wavelengths)
    pad = lambda vals: list(vals) + [vals[-1]] * (2 - len(vals))  # noqa: E731
    cfg.tilt = [pad(spec.refTiltX), pad(spec.refTiltY)]
    cfg.beamCentre = [pad(spec.beamCentreX), pad(spec.beamCentreY)]
    cfg.defocus = pad(spec.refDefocus)
    cfg.basisWaist = pad(spec.beamWaist)
    cfg.basisGroupCount = spec.beamGroupCount
    cfg.batchCount = batch_count if batch_count is not None else spec.frameCount
    for key, value in overrides.items():
        setattr(cfg, key, value)
    return eng


def normalised_matrix(coefs):
    """Transfer matrix with the RMS row power scaled to one."""
    a = np.asarray(coefs, dtype=np.complex128)
    scale = np.sqrt(np.mean(np.sum(np.abs(a) ** 2, axis=1)))
    return a / scale


def global_scale(measured, truth):
    """Least-squares complex factor alpha with measured ~= alpha * truth."""
    t = np.asarray(truth, dtype=np.complex128).reshape(-1)
    m = np.asarray(measured, dtype=np.complex128).reshape(-1)
    return np.vdot(t, m) / np.vdot(t, t)
