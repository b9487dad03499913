"""Constants used throughout the pipeline."""

# Catalog
CATALOG_VERSION = "core-26/1"
AGGREGATES = ("mean", "min", "max", "m1", "m2", "m3", "m4")
COLUMN_SEPARATOR = "__"

# Shortest-path sampling
EXACT_MAX_NODES = 5000
SAMPLE_SOURCES = 512
DISTANCE_CHUNK = 256  # BFS sources per csgraph call

# Iterative spectral measures
ITERATION_TOLERANCE = 1e-10  # L-infinity change
ITERATION_CAP = 10_000
PAGERANK_DAMPING = 0.85

# Budgets (configuration defaults)
DEFAULT_WALL_TIME = 60.0  # seconds
DEFAULT_MEMORY = 2 * 1024**3  # bytes

# Dataset policies
NETWORK_MISSING_MAX = 0.20
FEATURE_MISSING_MAX_PER_DOMAIN = 0.20
CONSTANT_FRACTION = 0.80
MIN_DOMAIN_SIZE = 10
MIN_IMPUTATION_VALUES = 4
CONSTANT_SIGNIFICANT_DIGITS = 12
OTHER_DOMAIN = "other"
# file stems the filter and select stages use for their own summaries
RESERVED_DOMAIN_NAMES = ("summary", "dropped")

# Correlation filter
CORRELATION_THRESHOLD = 0.9

# Forest
N_TREES = 100
MAX_DEPTH = 3
MIN_SAMPLES_LEAF = 1
CV_FOLDS = 5
CV_REPEATS = 3

# Selection
TOP_K = 15
MAX_COMBO_SIZE = 3
CONSISTENCY_PAIRS = 10
CONSISTENCY_TRIPLETS = 130

# Reporting
PLOT_TOP_N = 100
SEPARABILITY_THRESHOLD = 0.7

# Embedding
EMBED_DIMS = 2
EMBED_CAP = 500

# Output
STAGES_DIR = ".stages"
