"""Global constants for the double-rank toolkit."""

WORLD_LABEL = "WORLD"

# Percentile grid
DEFAULT_GRID = (1.0, 2.0, 4.0, 7.0, 12.0, 20.0, 35.0, 60.0, 100.0)

# Fit hygiene
DEFAULT_EXCLUDE = (100.0,)
DEFAULT_MIN_COUNT = 10
DEFAULT_METHODS = ("lr",)
DEFAULT_PERCENTILE = 0.01
COMPARE_SCENARIOS = ((), (100.0,), (100.0, 60.0))

# Levenberg-Marquardt
LM_LAMBDA0 = 1e-3
LM_LAMBDA_FACTOR = 10.0
LM_TOL = 1e-10
LM_MAX_ITER = 200

# Single-distribution analysis
HISTOGRAM_LIMITS = (20, 50)
CSS_DEPTH = 3
TAIL_WINDOW = (50, 400)
TAIL_MIN_POINTS = 5

# Synthetic setup: (label, mu, sigma, n_papers); the background joins the world only.
SYNTH_LOCALS = (("s1", 2.4, 1.1, 500), ("s7", 1.5, 0.9, 500))
SYNTH_BACKGROUND = (1.7, 1.1, 150_000)
DEFAULT_SEED = 20180101

# Output
TABLE_DIGITS = 4
RESULTS_FILE = "results.json"
TABLES_FILE = "tables.txt"
LOG_FILE = "run.log"
PLOT_DIR = "plots"
