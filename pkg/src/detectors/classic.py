import numpy as np

from ..emnl import md_detect
from .base import Detector, FrameContext
from .registry import register


@register
class CoarseMlDetector(Detector):
    name = "coarse_ml"

    def detect(self, ctx: FrameContext) -> np.ndarray:
        return ctx.coarse.labels.copy()


@register
class ModelDrivenDetector(Detector):
    name = "model_driven"

    def detect(self, ctx: FrameContext) -> np.ndarray:
        return md_detect(ctx.signals, ctx.md_params(), ctx.book)
