"""Benchmark harness: per-stage throughput and a thread-count estimator.

Rates are whole-batch stage calls per second; TOTAL is full pipeline runs
per second.  Absolute values are hardware-specific by nature, the contract
is only that all rates are positive and TOTAL cannot beat the slowest stage.
"""

import os
import time

import numpy as np

from . import constants as C
from .errors import ErrorCode, HoloError


def _rate(func, budget):
    """Calls/second of func measured for roughly ``budget`` seconds."""
    func()  # warm-up outside the timed region
    calls = 0
    start = time.perf_counter()
    while True:
        func()
        calls += 1
        elapsed = time.perf_counter() - start
        if elapsed >= budget and calls >= 2:
            return calls / elapsed


def benchmark(eng, goal_duration=1.0):
    """(batchesPerSecond, info[6]) for the current settings."""
    if goal_duration <= 0:
        goal_duration = 1.0
    eng.run_pipeline(0)  # plans, buffers and caches in place
    budget = goal_duration / C.BENCHMARK_COUNT

    def regenerate_basis():
        if eng.config.basisGroupCount >= 1:
            eng._basis = None
            for pol in range(eng.config.polCount):
                eng._basis_for_pol(pol)

    stages = {
        C.BENCHMARK_FFT: eng.process_fft,
        C.BENCHMARK_IFFT: eng.process_ifft,
        C.BENCHMARK_APPLYTILT: eng.process_remove_tilt,
        C.BENCHMARK_BASIS: regenerate_basis,
        C.BENCHMARK_OVERLAP: eng.extract_coefs,
        C.BENCHMARK_TOTAL: lambda: eng.run_pipeline(0),
    }
    info = np.zeros(C.BENCHMARK_COUNT, dtype=np.float32)
    for idx, func in stages.items():
        info[idx] = _rate(func, budget)
    return float(info[C.BENCHMARK_TOTAL]), info


def estimate_thread_count_optimal(eng, goal_duration=1.0):
    """Sweep thread counts and return the fastest; config is restored."""
    max_threads = 2 * (os.cpu_count() or 1)
    original = eng.config.threadCount
    budget = max(goal_duration, 0.1) / max_threads
    best_count, best_rate = 1, 0.0
    try:
        for count in range(1, max_threads + 1):
            eng.config.threadCount = count
            rate = _rate(lambda: eng.run_pipeline(0), budget)
            if rate > best_rate:
                best_rate, best_count = rate, count
    except HoloError:
        return ErrorCode.INVALIDHANDLE
    finally:
        eng.config.threadCount = original
    return best_count
