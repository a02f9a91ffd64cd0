"""ReWAP: package-based resource management for mobile web apps.

Analyzes visit traces to find stable resources, predicts how long they stay
unchanged, selects the benefit-maximizing resource package, and quantifies
the redundant-transfer savings against a plain browser cache.
"""

__version__ = "0.1.0"

from .normalize import NormalizedResource, NormalizedSet, Status, normalize_step
from .package import (
    Decision,
    PackagingPolicy,
    ResourcePackage,
    UserDistribution,
    select_package,
)
from .patterns import UrlPattern, infer_pattern
from .predict import PredictorConfig, predict_update_time, prune
from .simulate import CachePolicyConfig, simulate_baseline, simulate_rewap
from .trace import ConcreteResource, VisitSnapshot, VisitTrace, parse_trace, synthesize_trace

__all__ = [
    "CachePolicyConfig",
    "ConcreteResource",
    "Decision",
    "NormalizedResource",
    "NormalizedSet",
    "PackagingPolicy",
    "PredictorConfig",
    "ResourcePackage",
    "Status",
    "UrlPattern",
    "UserDistribution",
    "VisitSnapshot",
    "VisitTrace",
    "infer_pattern",
    "normalize_step",
    "parse_trace",
    "predict_update_time",
    "prune",
    "select_package",
    "simulate_baseline",
    "simulate_rewap",
    "synthesize_trace",
]
