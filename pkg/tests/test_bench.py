import os

import numpy as np

from holopipe import constants as C
from holopipe.bench import benchmark, estimate_thread_count_optimal
from holopipe.simulate import SimulationSpec, simulate_frames

from util import engine_for


def _bench_engine():
    spec = SimulationSpec(frameCount=4, frameWidth=128, frameHeight=128,
                          polCount=1, beamGroupCount=2, beamWaist=[3e-4])
    f32, _, s = simulate_frames(spec)
    eng = engine_for(s, fftWindowSizeX=64, fftWindowSizeY=64)
    eng.source.set_float32(f32)
    return eng


def test_benchmark_rates_positive_and_total_bounded():
    eng = _bench_engine()
    rate, info = benchmark(eng, goal_duration=0.6)
    assert info.shape == (C.BENCHMARK_COUNT,)
    assert np.all(info > 0)
    assert rate == info[C.BENCHMARK_TOTAL]
    assert info[C.BENCHMARK_TOTAL] <= info.min() * 1.10


def test_thread_estimator_in_range():
    eng = _bench_engine()
    original = eng.config.threadCount
    best = estimate_thread_count_optimal(eng, goal_duration=0.3)
    assert 1 <= best <= 2 * (os.cpu_count() or 1)
    assert eng.config.threadCount == original  # restored afterwards
