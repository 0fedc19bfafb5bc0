from pathlib import Path

PROJECT_ROOT = Path(__file__).resolve().parent

DEFAULT_OUTPUT_DIR = str(PROJECT_ROOT / "results")

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 10_000

DEFAULT_WINDOW = 50
DEFAULT_BURN_IN = 50
DEFAULT_GRID_SIZE = 100
DEFAULT_GRID_MIN_RATIO = 1e-3

DEFAULT_FORGETTING = 0.95
DEFAULT_STEP_FRACTION = 0.05
DEFAULT_FLOOR_FRACTION = 1e-6

DEFAULT_REPLICATES = 20
DEFAULT_SEED = 12345
