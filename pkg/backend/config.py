import os
from pathlib import Path

from dotenv import load_dotenv

# Base directory
BASE_DIR = Path(__file__).resolve().parent

load_dotenv(BASE_DIR.parent / '.env')


def _env(name, default, cast=str):
    """Read a GCLAB_* override from the environment, falling back to default."""
    value = os.getenv(f'GCLAB_{name}')
    if value is None or value == '':
        return default
    return cast(value)


# Data directories
DATA_DIR = Path(_env('DATA_DIR', str(BASE_DIR.parent / 'data')))
# bare input names are also looked up here
CORPUS_DIR = DATA_DIR / 'corpus'

# Logging
LOG_LEVEL = _env('LOG_LEVEL', 'INFO')
LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'

# Numeric tolerances
ABS_TOL = _env('ABS_TOL', 1e-6, float)

# Re-Pair: stop when the working string is first below 16n/log_sigma(n)
REPAIR_THRESHOLD_CONSTANT = 16
REPAIR_MAX_LENGTH = 2 ** 26

# Greedy: stop when ||S',G|| is first below 64n/log_sigma(n)
GREEDY_THRESHOLD_CONSTANT = 64
GREEDY_ITERATION_EXPONENT = _env('GREEDY_ITERATION_EXPONENT', 0.5, float)
GREEDY_MAX_LENGTH = 2 ** 24

# Irreducible grammars: ||S,G|| <= 64n/log_sigma(n)
IRREDUCIBLE_SIZE_CONSTANT = 64

# |S|H_k^cyc <= |S|H_k + k log|S| + CYCLIC_ENTROPY_CONSTANT * k
CYCLIC_ENTROPY_CONSTANT = 8

# Measured slack constant allowed on the de Bruijn entropy window
DEBRUIJN_SLACK_CAP = 4.0
DEBRUIJN_MAX_LENGTH = 2 ** 20

# Incremental encoding of the worst-case family: total >= 3/4 |S| log|S| - c|S|
WORST_CASE_LINEAR_SLACK = 6

# Per-symbol slack of the grammar encoding bounds, keyed by encoding name
ENCODING_SLACK = {
    'fully_naive': 2,
    'naive': 9,
    'entropy': 10,
    'incremental': 12,
}

# Harness defaults
WORKERS = _env('WORKERS', 1, int)
DEFAULT_K = (0, 1, 2)
DEFAULT_OFFSET_LENGTHS = (2, 4, 8)
DEFAULT_ENCODINGS = ('fully_naive', 'naive', 'entropy', 'incremental')
