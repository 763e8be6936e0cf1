CHECKPOINT_FORMAT_VERSION = "shapeshift-ckpt/1"
LATENT_FORMAT_VERSION = "shapeshift-latent/1"
RAWGRID_MAGIC = b"RGRD"
RAWGRID_VERSION = 1

# Model Constants
LEAKY_SLOPE = 0.02
ISO_LEVEL = 0.5
BOUNDARY_WEIGHT = 2.0
MAX_POINTS_PER_SHAPE = 4096
SURFACE_SAMPLE_COUNT = 2048
PGM_THRESHOLD = 128

# Direction names
DIRECTION_1TO2 = "1to2"
DIRECTION_2TO1 = "2to1"
DIRECTIONS = (DIRECTION_1TO2, DIRECTION_2TO1)
DOMAIN_NAMES = ("domain1", "domain2")

CRITIC_SIGN_CONVENTION = "critic minimizes mean(D(fake)) - mean(D(real)) + GP; generator minimizes -mean(D(fake))"
COORDINATE_CONVENTION = "p[i] indexes array axis i; cell centers at (i+0.5)/n"

EVAL_MEMORY_ENV = "SHAPESHIFT_EVAL_MEMORY_MB"
DEFAULT_EVAL_MEMORY_MB = 2048
DEBUG_GRAPH_ENV = "SHAPESHIFT_DEBUG_GRAPH"

# CLI exit codes
EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NUMERIC = 4
