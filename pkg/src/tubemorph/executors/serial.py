from collections.abc import Callable, Iterable
from typing import Any

from .base import BaseExecutor


class SerialExecutor(BaseExecutor):
    """In-process, one item at a time"""

    def __init__(self) -> None:
        self.workers = 1

    def map(self, fn: Callable[..., Any], items: Iterable[Any]) -> list[Any]:
        return [fn(item) for item in items]
