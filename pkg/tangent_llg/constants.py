import math
import os

# Allow override via environment variable for sweeps/testing
OUTPUT_ROOT = os.path.expanduser(os.environ.get("TANGENT_LLG_OUTPUT_DIR", "out"))
MAX_WORKERS = int(os.environ.get("TANGENT_LLG_THREADS", "0") or 0) or None

EVENTS_FILENAME = "events.log"
SERIES_FILENAME = "series.csv"
FINAL_VTK_FILENAME = "final.vtk"
SUMMARY_FILENAME = "summary.json"
CONFIG_FILENAME = "config.cfg"
SWEEP_FILENAME = "sweep.json"

# Exit codes, stable for harness scripting.
EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
EXIT_IO = 3

MESH_MAGIC = "tetmesh 1"

DEFAULT_SOLVER_TOL = 1e-10
DEFAULT_ANGLE_TOL = 1e-12
PROJECTION_MIN_NORM = 1e-12
FRAME_MIN_NORM = 0.5
DENSE_LIMIT = 200
K_OVER_H_WARN = 0.1

MU0 = 4.0e-7 * math.pi
GAMMA0 = 2.21e5

CSV_HEADER = "t,E_total,E_exchange,E_dmi,mx,my,mz,v_l2,constraint_l1,stability_ok"


def worker_count():
    """Sweep worker cap; TANGENT_LLG_THREADS wins when set."""
    env = os.environ.get("TANGENT_LLG_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return MAX_WORKERS or os.cpu_count() or 1
