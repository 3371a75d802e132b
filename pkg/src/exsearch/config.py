"""Pipeline configuration: TOML file, environment, and flag overrides."""

from __future__ import annotations

import os
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .analytics.metrics import MetricsConfig
from .crf.features import FeatureConfig
from .crf.train import TrainConfig
from .logs import FilterConfig

OUTPUT_DIR_ENV = "EXSEARCH_OUTPUT_DIR"


class ConfigError(ValueError):
    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


@dataclass
class InputsConfig:
    training: str = ""
    analysis: str = ""
    format: str = "jsonl"
    annotated: str = ""
    annotated_b: str = ""


@dataclass
class LabelingConfig:
    rules: str = ""
    denylist: str = ""
    negatives_ratio: float = 1.0


@dataclass
class SplitConfig:
    holdout_fraction: float = 0.2


@dataclass
class PipelineConfig:
    inputs: InputsConfig = field(default_factory=InputsConfig)
    filter: dict = field(default_factory=dict)
    labeling: LabelingConfig = field(default_factory=LabelingConfig)
    gazetteers: dict = field(default_factory=dict)
    features: dict = field(default_factory=dict)
    train: dict = field(default_factory=dict)
    split: SplitConfig = field(default_factory=SplitConfig)
    metrics: dict = field(default_factory=dict)
    output_dir: str = "out"
    seed: int = 0
    workers: int = 0
    verbosity: str = "info"
    base_dir: str = "."

    # typed views -------------------------------------------------------

    def filter_config(self) -> FilterConfig:
        kw = dict(self.filter)
        for k in ("allowed_locales", "allowed_regions", "trigger_keywords"):
            if k in kw:
                kw[k] = frozenset(kw[k])
        return FilterConfig(**kw)

    def feature_config(self) -> FeatureConfig:
        paths = {k: self.resolve(v) for k, v in self.gazetteers.items() if v}
        return FeatureConfig(**{**self.features, "gazetteer_paths": paths})

    def train_config(self) -> TrainConfig:
        return TrainConfig(**{"seed": self.seed, **self.train})

    def metrics_config(self) -> MetricsConfig:
        return MetricsConfig(**self.metrics)

    def resolve(self, p: str) -> str:
        if not p:
            return ""
        path = Path(p)
        return str(path if path.is_absolute() else Path(self.base_dir) / path)

    @property
    def out(self) -> Path:
        return Path(self.resolve(self.output_dir))

    def n_workers(self) -> int:
        return self.workers if self.workers > 0 else (os.cpu_count() or 1)

    def snapshot(self) -> dict:
        d = asdict(self)
        d.pop("base_dir")
        return d

    # validation --------------------------------------------------------

    def validate(self, stage: str | None = None) -> None:
        problems = []
        for name, build in (("filter", self.filter_config), ("features", self.feature_config),
                            ("train", self.train_config), ("metrics", self.metrics_config)):
            try:
                build()
            except (TypeError, ValueError) as exc:
                problems.append(f"[{name}] {exc}")
        if self.inputs.format not in ("jsonl", "tsv"):
            problems.append(f"[inputs] format must be jsonl or tsv, got {self.inputs.format!r}")
        if not 0 < self.split.holdout_fraction < 1:
            problems.append("[split] holdout_fraction must be in (0, 1)")
        if self.labeling.negatives_ratio < 0:
            problems.append("[labeling] negatives_ratio must be >= 0")
        if self.workers < 0:
            problems.append("workers must be >= 0")
        for section, key, value in self._paths():
            if value and not Path(self.resolve(value)).exists():
                problems.append(f"[{section}] {key}: no such file {value!r}")
        for lang in self.gazetteers:
            if lang not in ("java", "csharp", "python"):
                problems.append(f"[gazetteers] unknown language {lang!r}")
        needs = {"filter": "training", "tag": "analysis"}
        if stage in needs and not getattr(self.inputs, needs[stage]):
            problems.append(f"[inputs] {needs[stage]} is required for stage {stage!r}")
        if problems:
            raise ConfigError(problems)

    def _paths(self):
        for k in ("training", "analysis", "annotated", "annotated_b"):
            yield "inputs", k, getattr(self.inputs, k)
        yield "labeling", "rules", self.labeling.rules
        yield "labeling", "denylist", self.labeling.denylist
        for k, v in self.gazetteers.items():
            yield "gazetteers", k, v


_SECTIONS = {"inputs": InputsConfig, "labeling": LabelingConfig, "split": SplitConfig}
_DICT_SECTIONS = ("filter", "gazetteers", "features", "train", "metrics")
_SCALARS = ("output_dir", "seed", "workers", "verbosity")


def _apply(cfg: PipelineConfig, data: dict, problems: list[str]) -> None:
    for key, value in data.items():
        if key in _SECTIONS:
            if not isinstance(value, dict):
                problems.append(f"[{key}] must be a table")
                continue
            section = getattr(cfg, key)
            names = {f.name for f in fields(section)}
            for k, v in value.items():
                if k not in names:
                    problems.append(f"[{key}] unknown key {k!r}")
                else:
                    setattr(section, k, v)
        elif key in _DICT_SECTIONS:
            if not isinstance(value, dict):
                problems.append(f"[{key}] must be a table")
                continue
            getattr(cfg, key).update(value)
        elif key in _SCALARS:
            setattr(cfg, key, value)
        else:
            problems.append(f"unknown top-level key {key!r}")


def _parse_value(text: str):
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def load_config(path: str | Path | None = None, overrides: dict | None = None,
                sets: list[str] | None = None) -> PipelineConfig:
    """Build a config from an optional TOML file, the output-dir environment
    variable, ``--set section.key=value`` strings, and explicit overrides
    (in increasing precedence)."""
    cfg = PipelineConfig()
    problems: list[str] = []
    if path is not None:
        try:
            data = tomllib.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError([f"config file not found: {path}"]) from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError([f"malformed config: {exc}"]) from None
        cfg.base_dir = str(Path(path).resolve().parent)
        _apply(cfg, data, problems)
    if os.environ.get(OUTPUT_DIR_ENV):
        cfg.output_dir = str(Path(os.environ[OUTPUT_DIR_ENV]).resolve())
    for item in sets or []:
        if "=" not in item:
            problems.append(f"--set expects key=value, got {item!r}")
            continue
        dotted, raw = item.split("=", 1)
        value = _parse_value(raw)
        parts = dotted.strip().split(".")
        if len(parts) == 1:
            _apply(cfg, {parts[0]: value}, problems)
        elif len(parts) == 2:
            _apply(cfg, {parts[0]: {parts[1]: value}}, problems)
        else:
            problems.append(f"--set key too deep: {dotted!r}")
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if "." in key:
            sec, k = key.split(".", 1)
            _apply(cfg, {sec: {k: value}}, problems)
        else:
            _apply(cfg, {key: value}, problems)
    if problems:
        raise ConfigError(problems)
    return cfg
