from typing import TYPE_CHECKING

try:
    import tomllib
except ImportError:
    if TYPE_CHECKING:
        import tomllib
    else:
        # python < 3.11
        import tomli as tomllib

__all__ = ['tomllib']
