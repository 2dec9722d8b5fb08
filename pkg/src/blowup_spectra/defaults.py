"""Default numerical parameters, collected in one place.

Every configurable tolerance used by the library and the CLI is defined here so
that reports can echo them and changes show up in a single diff.
"""

# Frobenius seeds and shooting
SERIES_ORDER = 30
SEED_OFFSET = 0.05
MATCH_POINT = 0.5
ODE_RTOL = 1e-10
ODE_ATOL = 1e-12
RESONANCE_EXCLUSION_RADIUS = 1e-6

# root finding
SECANT_MAX_ITER = 50
SECANT_STEP_TOL = 1e-10
SECANT_RESIDUAL_TOL = 1e-8
SECANT_PERTURBATION = 1e-3
NEWTON_FD_STEP = 1e-7
SCAN_WINDOW = (-1.0, 1.6, -10.0, 10.0)

# argument principle
CONTOUR_MIN_SAMPLES = 400
CONTOUR_MAX_SAMPLES = 20000
CONTOUR_PHASE_JUMP = 0.5 * 3.141592653589793
CONTOUR_MIN_ABS = 1e-6
CANDIDATE_MERGE_TOL = 1e-6

# half-line problem
JOST_X_MIN = 1e-2
JOST_X_SEED = 3.0
JOST_X_MATCH = 1.0
JOST_SERIES_ORDER = 80
REGULAR_SERIES_ORDER = 24
MU_MIN_ABS = 1e-3

# discretized generator
GRID_MIN, GRID_MAX = 16, 512
GRAM_MIN_EIG = 1e-12
RELIABILITY_DRIFT = 1e-3
RIESZ_CENTER = 1.0
RIESZ_RADIUS = 1.0 / 3.0
RIESZ_POINTS = 64
RIESZ_RANK_TOL = 1e-6
DISSIPATIVITY_TOL = 1e-8

# time evolution
CFL = 0.4
INSTABILITY_EXPONENT = 5.0
RATE_WINDOW = (2.0, 10.0)
BLOWUP_TIME = 1.0
