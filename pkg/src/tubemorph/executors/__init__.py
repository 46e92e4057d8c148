from ..config import Config
from .base import BaseExecutor
from .process import ProcessExecutor
from .serial import SerialExecutor

__all__ = [
    "BaseExecutor",
    "ProcessExecutor",
    "SerialExecutor",
    "get_executor",
]


def get_executor(workers: int | None = None, kind: str | None = None) -> BaseExecutor:
    """
    Return the execution backend for the requested parallelism.

    Args:
        workers: parallelism degree (None: TUBEMORPH_WORKERS via Config)
        kind: "serial" or "process" (None: TUBEMORPH_EXECUTOR, else chosen by workers)

    Returns:
        BaseExecutor: serial for one worker, a process pool otherwise

    Raises:
        ValueError: unknown executor kind
    """
    config = Config()
    if workers is None:
        workers = config.workers
    kind = (kind or config.executor or ("serial" if workers <= 1 else "process")).lower()

    if kind == "serial":
        return SerialExecutor()
    elif kind == "process":
        return ProcessExecutor(workers)
    else:
        raise ValueError(f"Unknown executor: {kind}. Supported executors: serial, process")
