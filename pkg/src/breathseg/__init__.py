"""Unsupervised breath-phase segmentation of mouth-recorded breath sounds."""

from .dp import SegmentationResult, boundaries_to_track, candidate_range, segment
from .metrics import EvalReport, compute_report, match_boundaries, overlap_rate
from .pipeline import PipelineConfig, run_pipeline
from .preprocess import (
    EnergySignal,
    FilterCascade,
    design_butterworth_lowpass,
    downsample_energy,
    filter_signal,
    short_time_energy,
)
from .rate import RateEstimate, estimate_rate, magnitude_spectrum
from .signal_io import AudioBuffer, LabelTrack, Phase, read_labels, read_wav, write_labels, write_wav
from .triangle import TriangleFit, fit_triangle, triangle_template

__version__ = "0.1.0"
