from .base import Detector, FrameContext
from .registry import available, create, register
from . import classic, neural  # noqa: F401  (registers the built-in detectors)

__all__ = ["Detector", "FrameContext", "available", "create", "register"]
