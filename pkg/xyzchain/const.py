"""Constants for the xyzchain package."""

DOMAIN = "xyzchain"

# Theta series truncation
SERIES_TOL = 1e-16          # relative, per term
SERIES_MAX_TERMS = 64       # hard cap on the symmetric window half-width
SERIES_MIN_TERMS = 16       # lower bound accepted for EllipticParams.max_terms
SERIES_STOP_RUN = 3         # consecutive negligible terms before stopping

# Region-sign canonicalization
SIGN_REGION_ATOL = 1e-13    # |Im(gamma)| below this counts as zero

# Model construction
MAX_DENSE_SITES = 14
HERMITICITY_TOL = 1e-10
REALNESS_TOL = 1e-12

# Spectrum
DEGENERACY_RTOL = 1e-9
PHASE_FIX_ATOL = 1e-8
PROBE_POINT = 0.1234 + 0.0567j
EIGEN_RESIDUAL_TOL = 1e-9
LAMBDA_RESIDUAL_TOL = 1e-6  # relative to |t(u)| estimate
FLIP_IMAGE_RTOL = 1e-8  # Lambda(u0) = +-Lambda_ground(u0): same zero set as the ground

# Zero search
ZERO_GRID_FACTOR = 40       # samples per side = ZERO_GRID_FACTOR * sqrt(N)
ZERO_GRID_PAD = 0.08        # fraction of each period added around the domain
ZERO_GRID_REFINEMENTS = 2
ZERO_BATCH = 256            # spectral points per transfer-matrix sweep
CAUCHY_RADIUS = 1e-4
NEWTON_TOL = 1e-9           # |Lambda| / |Lambda'| accepted as converged
NEWTON_POLISH = 1e-12       # step size at which polishing stops
NEWTON_MAX_ITER = 60
SNAP_TOL = 1e-9
DEDUPE_TOL = 1e-8
WINDING_TOL = 0.25
WINDING_MAX_STEP = 0.5      # radians of phase change allowed between samples
PATTERN_TOL = 0.05
STRING_MAX_LENGTH = 2       # longest conjugate-pair string label tried
SUM_RULE_TOL = 1e-6
PARTNER_TOL = 1e-6
ENERGY_IMAG_TOL = 1e-7

# Thermodynamic-limit series
THERMO_TERM_TOL = 1e-14
THERMO_KMAX_CAP = 100_000
THERMO_REAL_TOL = 1e-10
BAND_EDGE_ATOL = 1e-9
ACCELERATION_TERMS = 80     # partial sums handed to the Shanks transform
QUADRATURE_POINTS = 4096
BOUNDARY_CONTINUITY_TOL = 1e-8
ENV_KMAX_CAP = "EV_KMAX_CAP"

# Zero density reconstruction
DENSITY_KMAX = 200
DENSITY_SINGULAR_ATOL = 1e-12

# Bethe ansatz
BAE_TOL = 1e-12             # converged log residual
BAE_ACCEPT_TOL = 1e-10      # accepted when Newton stalls below this
BAE_MAX_ITER = 200
BAE_MAX_HALVINGS = 20
BAE_COALESCE_TOL = 1e-8
BAE_ROOT_ZERO_TOL = 1e-8
BAE_POLE_PROBE = 1e-6
BAE_POLE_SCALE = 1e3
BAE_MAX_SITES = 8
SELECTION_TOL = 1e-10
BAE_STRING_SHRINK = 0.02    # seeded string spacing is (1 - shrink) * eta
BAE_SINGULAR_COND = 1e13
BAE_PROBES = 20
BAE_MATCH_RTOL = 1e-6
BAE_MAX_SEEDS = 64

# Serialization
ROUND_DIGITS = 12

# Run configuration keys
CONF_COMMAND = "command"
CONF_TAU = "tau_im"
CONF_ETA = "eta"
CONF_N_SITES = "n_sites"
CONF_SIZES = "sizes"
CONF_TWIST = "twist"
CONF_STATE = "state"
CONF_KMAX = "kmax"
CONF_OUT = "out_path"
CONF_FORMAT = "format"
CONF_REGIME = "regime"
CONF_ETA_SWEEP = "eta_sweep"
CONF_TAU_SWEEP = "tau_sweep"
CONF_WORKERS = "workers"
CONF_L = "L"
CONF_K = "K"
CONF_N1 = "n1"

COMMANDS = ("spectrum", "zeros", "thermo", "compare", "bae", "identities")
OUTPUT_FORMATS = ("json", "csv", "dat")
DEFAULT_TAU = 0.6
DEFAULT_ETA = "0.7"
DEFAULT_N_SITES = 6

# Exit codes
EXIT_OK = 0
EXIT_CERTIFICATION = 1
EXIT_USAGE = 2

# Certification
ENERGY_CERT_TOL = 1e-8      # |E_zeros - E_diag|, relative above |E| = 1
COMPARE_RTOL = 1e-2         # extrapolated slope against the energy density
DEFAULT_SIZES = (4, 6, 8, 10)
BAE_REPORT_LEVELS = 4
FULL_SPECTRUM_SITES = 10
SPARSE_LEVELS = 6
