# Settings for the Homodyne Super-Resolution Simulator

import os
import logging
from dotenv import load_dotenv

# Load environment variables from .env file next to main.py
load_dotenv(dotenv_path=os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), '.env'))

OUTPUT_DIR = os.environ.get("HOMODYNE_OUTPUT_DIR", "output")
LOG_LEVEL = os.environ.get("HOMODYNE_LOG_LEVEL", "INFO")
LOG_FILE = os.environ.get("HOMODYNE_LOG_FILE", "homodyne.log")
SHOW_PROGRESS = os.environ.get("HOMODYNE_PROGRESS", "1") != "0"

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

# Vacuum quadrature variance under the hbar = 2 convention
VACUUM_VARIANCE = 1.0

# Quadrature defaults
QUAD_ABS_TOL = 1e-13
QUAD_REL_TOL = 1e-12
QUAD_MAX_SUBDIVISIONS = 200

# Mode integrands are truncated at +/- this many beam widths
TRUNCATION_WIDTHS = 6.0

# Hermite order guard
MAX_MODE_ORDER = 30

# Monte Carlo acceptance
Z_SCORE_THRESHOLD = 4.0
LOW_POWER_SHOTS = 1000

DEFAULT_SEED = 20230518


def configure_logging(level=None, output_dir=None):
    """Configure root logging with a file handler in the output dir and a stream handler

    Args:
        level: Log level name, defaults to HOMODYNE_LOG_LEVEL
        output_dir: Directory for the log file, defaults to HOMODYNE_OUTPUT_DIR

    Returns:
        Path of the log file
    """
    output_dir = output_dir or OUTPUT_DIR
    os.makedirs(output_dir, exist_ok=True)
    log_path = os.path.join(output_dir, LOG_FILE)

    logging.basicConfig(
        level=getattr(logging, (level or LOG_LEVEL).upper(), logging.INFO),
        format=LOG_FORMAT,
        handlers=[
            logging.FileHandler(log_path),
            logging.StreamHandler()
        ],
        force=True
    )
    return log_path
