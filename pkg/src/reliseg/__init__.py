"""Minimal-path segmentation with reliability-driven, spatially varying regularization."""

__version__ = "0.1.0"

from .imagegrid import GradientPair, ImageGrid, gaussian_blur, gradient, load_image, save_image
from .reliability import (ReliabilityBundle, SpectralWindow, edge_evidence, noise_map,
                          reliability_bundle, spectral_flatness)
from .graphseg import (ContourPath, PixelGraph, edge_cost, external_map, segment_adaptive,
                       segment_fixed, shortest_path)
from .layered import LayeredGraph, WeightedContour, bimodality_histogram, layered_shortest_path
from .synth import GroundTruth, SyntheticSpec, add_ramped_noise, boundary_curve, corpus, render
from .metrics import (SweepResult, TrialRecord, benchmark, fixed_weight_sweep, hausdorff,
                      paired_sign_test)
