"""Unsupervised stereo disparity and motion features via synchrony
autoencoders, with depth-map estimation, norm-threshold interest points,
and a bag-of-features activity-recognition pipeline."""

__version__ = "0.1.0"

from . import (  # noqa: F401
    corpus,
    depth,
    interest,
    kernels,
    pgm,
    recognition,
    sae,
    synth,
    tensorio,
    video,
    whitening,
)
