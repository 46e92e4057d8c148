import os

from dotenv import load_dotenv

# Sliding-window ROI size and stride (vessel datasets / road profile)
DEFAULT_WINDOW = 32
DEFAULT_STRIDE = 30
ROAD_WINDOW = 48
ROAD_STRIDE = 45

DEFAULT_P_THRESH = 0.5  # maximum average path cost accepted by SkeletonDijkstra
DEFAULT_THRESH = 0.5  # segmentation probability threshold
DEFAULT_TOL = 5  # centerline tolerance in pixels
DEFAULT_PATCH = 64  # tile size for topological errors

# Loss hyperparameters
DEFAULT_LAMBDA_CLASS = 0.2
DEFAULT_LAMBDA_COORD = 0.5
DEFAULT_ALPHA = 0.6
ROAD_ALPHA = 0.75
DEFAULT_GAMMA = 2.0
PROB_EPS = 1e-7  # clamp before any log


class Config:
    """
    Process-wide settings read once from the environment (.env supported).

    TUBEMORPH_WORKERS   parallelism degree (default 1)
    TUBEMORPH_EXECUTOR  "serial" or "process" (default: serial for 1 worker)
    """

    config = None

    @classmethod
    def initialize(cls, workers: int | None = None, executor: str | None = None) -> None:
        if cls.config is None:
            load_dotenv()
            env_workers = int(os.environ.get("TUBEMORPH_WORKERS", "1"))
            resolved = workers if workers is not None else env_workers
            cls.config = {
                "workers": max(1, resolved),
                "executor": executor or os.environ.get("TUBEMORPH_EXECUTOR"),
            }

    @classmethod
    def reset(cls) -> None:
        cls.config = None

    def __init__(self, workers: int | None = None, executor: str | None = None) -> None:
        Config.initialize(workers, executor)

    @property
    def workers(self) -> int:
        return self.config["workers"]

    @property
    def executor(self) -> str | None:
        return self.config["executor"]
