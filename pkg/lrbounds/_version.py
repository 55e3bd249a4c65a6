"""Installed version of lrbounds, or a placeholder when run from a source tree."""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("lrbounds")
except PackageNotFoundError:
    __version__ = "0.0.0"
