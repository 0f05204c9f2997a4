"""
Retry-with-refinement helper

Re-runs a mesh-dependent computation on a finer mesh when it fails.
"""

import functools
import logging
from typing import Callable

from src.utils.errors import NumericalError

logger = logging.getLogger(__name__)


def retry_with_refinement(max_retries: int = 2, factor: float = 0.5, h_arg: str = "h"):
    """
    Decorator that retries on ``NumericalError`` with the mesh size shrunk.

    Args:
        max_retries (int): number of retries after the first attempt
        factor (float): multiplier applied to the mesh size on every retry
        h_arg (str): name of the keyword argument holding the mesh size

    A ``config`` keyword carrying ``fem.max_refine_retries`` overrides max_retries.

    Note:
        The wrapped function must receive the mesh size as a keyword argument.
        The original exception is re-raised once every retry has failed.

    Example:
        >>> @retry_with_refinement(max_retries=1)
        ... def solve(data, *, h): ...
    """
    def decorator(func: Callable) -> Callable:
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            if h_arg not in kwargs:
                raise TypeError(f"{func.__name__} must be called with {h_arg}= as a keyword")

            last_exception = None
            h = kwargs[h_arg]
            config = kwargs.get("config")
            retries = config.fem.max_refine_retries if config is not None else max_retries

            for attempt in range(retries + 1):
                try:
                    return func(*args, **{**kwargs, h_arg: h})
                except NumericalError as e:
                    last_exception = e

                    if attempt == retries:
                        break

                    logger.warning("⚠️ %s failed (attempt %d/%d): %s",
                                   func.__name__, attempt + 1, retries + 1, e)
                    h *= factor
                    logger.warning("🔄 retrying with %s=%.6g", h_arg, h)

            raise last_exception

        return wrapper
    return decorator
