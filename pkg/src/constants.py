"""Project constants."""

# Activations supported by MlpNetwork. ``cosine`` is cos(2*pi*z) and only exists to
# build networks whose derivatives are trigonometric polynomials.
ACTIVATIONS = ("relu", "tanh", "sigmoid", "cosine")

# A hidden unit whose output range over the probe grid is at or below this is dead.
DEAD_RANGE_TOL = 1e-10

# Numerical rank threshold is RANK_REL_TOL * sigma_max * max(M, N).
RANK_REL_TOL = 1e-10

# Canonical systems with a condition number above this carry an ill-conditioning flag.
CONDITION_FLAG_THRESHOLD = 1e8

# Square (N == T) systems are refused as singular below this sigma_min / sigma_max.
SINGULAR_RCOND = 1e-13

# Hermitian symmetry tolerance for coefficients of real-valued functions.
HERMITIAN_TOL = 1e-10

# Minimum pairwise distance between generated training inputs.
MIN_SAMPLE_SEPARATION = 1e-6

# Midpoint-convexity slack used by convexity_probe.
CONVEXITY_SLACK = 1e-9

# Grid points per dimension for the default truncation rule: G = 4 * N_j + 4.
GRID_FACTOR = 4
GRID_OFFSET = 4

# Default monitor cadence (steps) for rank monitoring along SGD runs.
DEFAULT_MONITOR_CADENCE = 50

# Flat weights are written with this many significant digits.
FLOAT_FORMAT = "%.17g"

TRACE_COLUMNS = [
    "step",
    "epoch",
    "minibatch_loss",
    "full_loss",
    "grad_norm_literal",
    "grad_norm_canonical",
    "rank",
    "sigma_ratio",
    "chain_residual",
]

CENSUS_COLUMNS = [
    "seed",
    "status",
    "numerical_rank",
    "n_columns",
    "full_rank",
    "sigma_ratio",
    "disparity_norm",
    "dead_neurons",
    "duplicated_pairs",
    "error",
]

# Seed-split component indices (appended to the config seed).
SEED_COMPONENT_DATA = 0
SEED_COMPONENT_INIT = 1
SEED_COMPONENT_SHUFFLE = 2
SEED_COMPONENT_CENSUS = 3
