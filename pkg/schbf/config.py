# schbf configuration

import os

from dotenv import load_dotenv

load_dotenv()

# System Settings (desk scale; the 64x64 setup lives in the snr_full preset)
DEFAULT_N_TX = 16
DEFAULT_N_RX = 16
DEFAULT_N_RF = 2
DEFAULT_N_STREAMS = 2
DEFAULT_BLOCK_LENGTH = 64
DEFAULT_CP_LENGTH = 16

# Channel Settings
DEFAULT_N_CLUSTERS = 5
DEFAULT_N_RAYS = 10
DEFAULT_ANGLE_SPREAD_DEG = 10.0

# Solver Settings
DEFAULT_MAX_ITERS = 50
DEFAULT_REL_TOL = 1e-4

# Link Settings
DEFAULT_QAM_ORDER = 4
SUPPORTED_QAM_ORDERS = [4, 16, 64]
DEFAULT_MIN_ERRORS = 100
DEFAULT_MAX_BLOCKS = 200

# Numeric Settings
SINGULAR_CONDITION_LIMIT = 1e12

# Output Settings
CSV_SCHEMA_VERSION = 1
CSV_COLUMNS = [
    "scheme", "snr_db", "n_rf", "blocks", "bits", "errors",
    "ber", "mse", "papr_p50_db", "papr_p99_db",
]
OUTPUT_DIRECTORY = os.getenv("SCHBF_OUTPUT_DIR", "results")

# Database Settings
DATABASE_URL = os.getenv("SCHBF_DATABASE_URL")

# Logging Settings
LOG_LEVEL = os.getenv("SCHBF_LOG_LEVEL", "INFO")
LOG_JSON = os.getenv("SCHBF_LOG_JSON", "false").lower() in ("1", "true", "yes")
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
