"""Privacy, utility and practicality evaluation for image anonymization methods."""

from .model import (
    AttributeScoreTable,
    BBox,
    Detection,
    DetectionSet,
    EmbeddingSet,
    GroundTruth,
    GroundTruthSet,
    LoadError,
    PrivlensError,
    RasterImage,
    RegionMask,
    TimingLog,
    UndefinedMetricError,
)

__version__ = "0.1.0"
