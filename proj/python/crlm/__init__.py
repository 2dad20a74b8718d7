"""Clustering by robust loss minimisation (C++ core)."""

from ._crlm import *  # noqa: F401,F403
from ._crlm import (  # noqa: F401
    ClusteringResult,
    GmmubSpec,
    LossConfig,
    crlm,
    default_experiment_spec,
    sample_gmmub,
)

__version__ = "0.1.0"
