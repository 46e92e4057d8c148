from abc import ABC, abstractmethod
from collections.abc import Callable, Iterable
from typing import Any


class BaseExecutor(ABC):
    """Base class for the backends that run independent work items"""

    workers: int = 1

    @abstractmethod
    def map(self, fn: Callable[..., Any], items: Iterable[Any]) -> list[Any]:
        """
        Apply `fn` to every item.

        Returns:
            list: results in the same order as `items`, whatever the backend
        """
        pass
