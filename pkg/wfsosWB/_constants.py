# derivation budget
DEFAULT_MAX_STATES = 10000
DEFAULT_MAX_DEPTH = 64

# bounded searches and oracles
DEFAULT_ROW_COLUMN_ROUNDS = 3
DEFAULT_BRUTE_FORCE_LIMIT = 8

# randomized suites
DEFAULT_SEED = 0
DEFAULT_TRIALS = 200
DEFAULT_SAMPLE_DEPTH = 3
DEFAULT_POOL_SIZE = 6
MULTIADDITIVITY_SAMPLES = 1000
LAW_SAMPLES = 10000

# labels
TAU = "tau"

# DOT rendering of the two-step picture x -a-> rho -w-> y
DOT_STATE_SHAPE = "ellipse"
DOT_FN_SHAPE = "point"
