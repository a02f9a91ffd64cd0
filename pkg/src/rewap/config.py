"""Pipeline configuration: one declarative JSON file, flag overrides on top.

Every tunable the algorithms expose lives here and is echoed into report
headers, so a report always records the parameters that produced it.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .package import PackagingPolicy, UserDistribution
from .predict import PredictorConfig
from .simulate import CachePolicyConfig

OUTPUT_DIR_ENV = "REWAP_OUTPUT_DIR"

DEFAULT_REVISIT_INTERVALS_S = tuple(range(1800, 86_401, 1800))


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    traces: tuple[str, ...] = ()
    output_dir: str = "out"
    seed: int = 0
    revisit_intervals_s: tuple[int, ...] = DEFAULT_REVISIT_INTERVALS_S
    predictor: PredictorConfig = field(default_factory=PredictorConfig)
    policy: PackagingPolicy = field(default_factory=PackagingPolicy)
    cache: CachePolicyConfig = field(default_factory=CachePolicyConfig)
    user_distribution: UserDistribution | None = None  # None: uniform over the intervals

    def __post_init__(self):
        for interval in self.revisit_intervals_s:
            if interval <= 0:
                raise ConfigError("revisit intervals must be positive")
        if not self.revisit_intervals_s:
            raise ConfigError("at least one revisit interval is required")

    def packaging_distribution(self) -> UserDistribution:
        if self.user_distribution is not None:
            return self.user_distribution
        share = 1.0 / len(self.revisit_intervals_s)
        return UserDistribution({i: share for i in self.revisit_intervals_s})

    def echo(self) -> dict[str, object]:
        """Flat key=value view for report headers."""
        return {
            "seed": self.seed,
            "revisit_intervals_s": ",".join(str(i) for i in self.revisit_intervals_s),
            "predictor.learning_rate": self.predictor.learning_rate,
            "predictor.initial_estimate_s": self.predictor.initial_estimate_s,
            "predictor.modest_decay": self.predictor.modest_decay,
            "packaging.replace_threshold": self.policy.replace_threshold,
            "cache.heuristic_duration_s": self.cache.heuristic_duration_s,
            "cache.validation_cost_bytes": self.cache.validation_cost_bytes,
            "cache.cache_capacity_bytes": self.cache.cache_capacity_bytes,
        }


def _build(data: dict, base_dir: Path) -> PipelineConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    known = {
        "traces",
        "output_dir",
        "seed",
        "revisit_intervals_s",
        "predictor",
        "packaging",
        "cache",
    }
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        traces = tuple(str(base_dir / t) for t in data.get("traces", []))
        predictor = PredictorConfig(**data.get("predictor", {}))
        packaging = dict(data.get("packaging", {}))
        distribution_raw = packaging.pop("user_distribution", None)
        policy = PackagingPolicy(**packaging)
        distribution = (
            None
            if distribution_raw is None
            else UserDistribution({int(k): float(v) for k, v in distribution_raw.items()})
        )
        cache = CachePolicyConfig(**data.get("cache", {}))
        intervals = tuple(int(i) for i in data.get("revisit_intervals_s", DEFAULT_REVISIT_INTERVALS_S))
        return PipelineConfig(
            traces=traces,
            output_dir=str(data.get("output_dir", "out")),
            seed=int(data.get("seed", 0)),
            revisit_intervals_s=intervals,
            predictor=predictor,
            policy=policy,
            cache=cache,
            user_distribution=distribution,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path, output_dir_override: str | None = None) -> PipelineConfig:
    """Load the JSON config; the output directory can be overridden by flag
    or by the REWAP_OUTPUT_DIR environment variable (flag wins)."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    cfg = _build(data, path.parent)
    override = output_dir_override or os.environ.get(OUTPUT_DIR_ENV)
    if override:
        cfg = PipelineConfig(
            traces=cfg.traces,
            output_dir=override,
            seed=cfg.seed,
            revisit_intervals_s=cfg.revisit_intervals_s,
            predictor=cfg.predictor,
            policy=cfg.policy,
            cache=cfg.cache,
            user_distribution=cfg.user_distribution,
        )
    return cfg
