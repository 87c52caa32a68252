"""Public integer constants: enumerations, quanta and sentinels.

Kept as plain module-level ints so they read the same from Python, the
settings files and across the RPC boundary.
"""

import numpy as np

# Frame and FFT window dimensions must be multiples of this.
PIXEL_QUANTA = 16

# Maximum polarisation components per frame.
POLCOUNT_MAX = 2

# Units: lengths in metres, externally visible angles in degrees.
UNIT_PIXEL = 1.0
UNIT_LAMBDA = 1.0
UNIT_ANGLE = np.pi / 180.0  # degrees -> radians

# Modal basis types.
BASISTYPE_HG = 0
BASISTYPE_LG = 1
BASISTYPE_CUSTOM = 2

# LG basis supported up to this many mode groups.
LG_GROUP_MAX = 100

# Averaging modes: how frames of one averaging group sit in the buffer.
AVGMODE_SEQUENTIAL = 0      # [A A A B B B C C C]
AVGMODE_INTERLACED = 1      # [A B C A B C A B C]
AVGMODE_SEQUENTIALSWEEP = 2  # [{A} {A} {A} {B} {B} {B}] where {A} is a sweep
AVGMODE_COUNT = 3

# Wavelength ordering selectors.
WAVELENGTHORDER_INPUT = 0
WAVELENGTHORDER_OUTPUT = 1
WAVELENGTHORDER_FAST = 0   # wavelength is the adjacent-in-memory axis
WAVELENGTHORDER_SLOW = 1   # wavelength blocks are contiguous

# Auto-alignment operation modes.
AUTOALIGNMODE_FULL = 0
AUTOALIGNMODE_TWEAK = 1
AUTOALIGNMODE_ESTIMATE = 2
AUTOALIGNMODE_COUNT = 3

# Transfer-matrix quality metrics.
METRIC_IL = 0        # insertion loss
METRIC_MDL = 1       # mode dependent loss (condition number)
METRIC_DIAG = 2      # total power along the diagonal
METRIC_SNRAVG = 3    # diagonal power / off-diagonal power
METRIC_DIAGBEST = 4  # strongest diagonal element
METRIC_DIAGWORST = 5  # weakest diagonal element
METRIC_SNRBEST = 6   # best per-row diagonal/off-diagonal
METRIC_SNRWORST = 7  # worst per-row diagonal/off-diagonal
METRIC_SNRMG = 8     # as SNRAVG with intra-mode-group coupling as signal
METRIC_COUNT = 9

# Value marking a metric slot that has never been computed.
METRIC_UNSET = float(np.finfo(np.float32).min)

# Per-plane analysis parameters.
ANALYSIS_TOTALPOWER = 0
ANALYSIS_COMX = 1
ANALYSIS_COMY = 2
ANALYSIS_MAXABS = 3
ANALYSIS_MAXABSIDX = 4  # int32 bits stored in the float32 slot
ANALYSIS_AEFF = 5       # effective area (Petermann II)
ANALYSIS_COMYWRAP = 6   # circular centre of mass along y
ANALYSIS_COUNT = 7

# Analysis planes.
PLANE_FOURIER = 0
PLANE_FIELD = 1

# Viewport display modes.
VIEWPORT_NONE = 0
VIEWPORT_CAMERAPLANE = 1
VIEWPORT_FOURIERPLANE = 2
VIEWPORT_FOURIERPLANEDB = 3
VIEWPORT_FOURIERWINDOW = 4
VIEWPORT_FOURIERWINDOWABS = 5
VIEWPORT_FIELDPLANE = 6
VIEWPORT_FIELDPLANEABS = 7
VIEWPORT_FIELDPLANEMODE = 8
VIEWPORT_COUNT = 9
VIEWPORT_NAMELENGTH = 1024

# Console verbosity levels.
VERBOSITY_OFF = 0
VERBOSITY_BASIC = 1
VERBOSITY_DEBUG = 2
VERBOSITY_COOKED = 3
VERBOSITY_MAX = 3

# Benchmark info slots (Hz per stage).
BENCHMARK_FFT = 0
BENCHMARK_IFFT = 1
BENCHMARK_APPLYTILT = 2
BENCHMARK_BASIS = 3
BENCHMARK_OVERLAP = 4
BENCHMARK_TOTAL = 5
BENCHMARK_COUNT = 6

# Abstract transform-planning effort knob (0 cheapest .. 3 most thorough).
PLANMODE_ESTIMATE = 0
PLANMODE_MEASURE = 1
PLANMODE_PATIENT = 2
PLANMODE_EXHAUSTIVE = 3
