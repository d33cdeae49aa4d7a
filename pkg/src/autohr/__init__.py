"""End-to-end remote heart-rate measurement with temporal difference convolution
and differentiable backbone search."""

from autohr.signals import (
    MetricsReport,
    PSDVector,
    PulseSignal,
    VideoClip,
    clip_average_hr,
    compute_metrics,
    compute_psd,
    estimate_hr,
)
from autohr.tdc import TDCParams, TDConv3d, tdc_forward, tdc_forward_reparam

__version__ = "0.1.0"
