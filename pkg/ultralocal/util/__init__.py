import dataclasses
import logging
import time
import typing
from functools import wraps
from typing import Callable, Dict, TypeVar

import numpy as np

logger = logging.getLogger(__name__)

T = TypeVar('T')


def round_floats(_cls=None, *, precision: int = 6):
    """
    Dataclass decorator: round float fields (and floats inside List/Tuple fields) after __init__.

    Only for report rows; certificate values are stored unrounded.
    """
    def _round(e):
        if isinstance(e, (float, np.floating)):
            return round(float(e), precision)
        return e

    def wrap(cls):
        orig__post_init__ = getattr(cls, '__post_init__', None)

        def __post_init__(self, *initvars):
            if orig__post_init__:
                orig__post_init__(self, *initvars)
            for field in dataclasses.fields(cls):
                value = getattr(self, field.name)
                origin = getattr(field.type, '__origin__', None)
                if isinstance(value, (float, np.floating)):
                    object.__setattr__(self, field.name, _round(value))
                elif origin in (tuple, typing.Tuple):
                    object.__setattr__(self, field.name, tuple(_round(e) for e in value))
                elif origin in (list, typing.List):
                    object.__setattr__(self, field.name, [_round(e) for e in value])

        setattr(cls, '__post_init__', __post_init__)
        return cls

    if _cls is None:
        return wrap
    return wrap(_cls)


def validate_fields(a):
    __init__ = a.__init__

    @wraps(__init__)
    def _check_init(self, *args, **kwargs):
        __init__(self, *args, **kwargs)
        for f in dataclasses.fields(self):
            if not hasattr(self, f.name):
                raise AttributeError(f"Construction of dataclass '{self.__class__.__qualname__}' incomplete: field '{f.name}' not defined")

    a.__init__ = _check_init
    return a


def timed(timings: Dict[str, float], name: str) -> Callable[[Callable[..., T]], Callable[..., T]]:
    """Record the wall time (seconds) of each call under `timings[name]`, accumulating over repeated calls."""
    def decorator(func: Callable[..., T]) -> Callable[..., T]:
        @wraps(func)
        def timed_func(*args, **kwargs) -> T:
            t0 = time.time()
            try:
                return func(*args, **kwargs)
            finally:
                timings[name] = timings.get(name, 0.) + (time.time() - t0)
        return timed_func
    return decorator
