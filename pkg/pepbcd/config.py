import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables from a .env file if it exists
load_dotenv()

# BASE_DIR resolves to the root of the project (the folder containing setup.py)
BASE_DIR = Path(__file__).resolve().parent.parent
DATA_DIR = Path(os.getenv("PEPBCD_DATA_DIR", BASE_DIR / "data"))

# Reports, SDPA exports and the run ledger all live here
DATA_DIR.mkdir(parents=True, exist_ok=True)


class Config:
    # Metadata
    APP_NAME = "pepbcd"
    VERSION = "0.3.0"

    # Paths
    DATA_DIR = DATA_DIR
    EXPORT_DIR = DATA_DIR / "sdpa"

    # Run ledger (SQLite inside the data folder)
    DB_NAME = os.getenv("DB_NAME", "pepbcd.db")
    DB_URL = f"sqlite:///{DATA_DIR}/{DB_NAME}"

    # Conic solver
    # CLARABEL handles PSD cones at interior-point accuracy; SCS is the fallback configuration
    SOLVER = os.getenv("PEPBCD_SOLVER", "CLARABEL")
    SOLVER_TOL = float(os.getenv("PEPBCD_SOLVER_TOL", "1e-8"))
    # Inaccurate solves are retried at relaxed tolerances, then with SCS
    SOLVER_RETRY = os.getenv("PEPBCD_SOLVER_RETRY", "1") != "0"

    # Largest number of deterministic sequences racd-compare will enumerate
    RACD_CAP = int(os.getenv("PEPBCD_RACD_CAP", "81"))

    # Logging
    LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")


# Export as a singleton instance
settings = Config()
