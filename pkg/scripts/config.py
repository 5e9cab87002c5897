"""
Configuration for the flocking front-tracking simulator.
"""
import os
import pathlib
from dotenv import load_dotenv

# Load environment variables from .env file (in project root)
PROJECT_ROOT = pathlib.Path(__file__).parent.parent
load_dotenv(PROJECT_ROOT / ".env")

# Data paths
SCRIPTS_DIR = PROJECT_ROOT / "scripts"
DATA_DIR = PROJECT_ROOT / "data"
RUNS_DIR = pathlib.Path(os.getenv("FLOCK_RUNS_DIR", str(DATA_DIR / "runs")))
DATASETS_DIR = SCRIPTS_DIR / "datasets"

# Ensure directories exist
DATA_DIR.mkdir(exist_ok=True)

# Output file names inside a run directory
DIAG_FILE = "diag.csv"
FRAMES_FILE = "frames.jsonl"
REPORT_FILE = "report.json"

# Physical defaults
DEFAULT_ALPHA = float(os.getenv("FLOCK_ALPHA", "1.0"))  # sound speed, p = alpha^2 * rho

# Refinement defaults: dt = DT_SCALE / 2^nu, eta = ETA_SCALE / 2^nu
DEFAULT_NU = int(os.getenv("FLOCK_NU", "5"))
DT_SCALE = float(os.getenv("FLOCK_DT_SCALE", "0.5"))
ETA_SCALE = float(os.getenv("FLOCK_ETA_SCALE", "1.0"))

# Run defaults
DEFAULT_T_END = float(os.getenv("FLOCK_T_END", "10.0"))
DEFAULT_SAMPLE_DT = float(os.getenv("FLOCK_SAMPLE_DT", "0.05"))
DEFAULT_KMAX = int(os.getenv("FLOCK_KMAX", "32"))
DEFAULT_EVENT_CAP = int(os.getenv("FLOCK_EVENT_CAP", "2000000"))
DEFAULT_SWEEP_WORKERS = int(os.getenv("FLOCK_SWEEP_WORKERS", "1"))

# Simultaneity jitter: delta = PERTURB_SCALE * eta
PERTURB_SCALE = float(os.getenv("FLOCK_PERTURB_SCALE", "1e-9"))

LOG_LEVEL = os.getenv("FLOCK_LOG_LEVEL", "INFO")

# Numerical tolerances
ZERO_WAVE = 1e-14           # |eps| below this is "no wave"
RIEMANN_TOL = 1e-13         # residual target for the strength equations
SIMULTANEITY_TOL = 1e-12    # events closer than this count as simultaneous
CONSISTENCY_TOL = 1e-9      # states vs strengths after every event
INVARIANT_SLACK = 1e-12     # slack on monotonicity / identity checks
RAREFACTION_SLACK = 1e-9    # relative slack on the eta cap

# Outgoing rarefactions above eta: "guard" aborts, "split" re-splits the fan
RAREFACTION_POLICIES = ("guard", "split")
DEFAULT_RAREFACTION_POLICY = os.getenv("FLOCK_RAREFACTION_POLICY", "guard")
