"""CRF parameters, prediction, and the single-file model format."""

from __future__ import annotations

import base64
import hashlib
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .features import FeatureConfig, TokenSequence, extract_features
from .inference import forward_backward, viterbi

DEFAULT_LABELS = ("O", "B-EXID", "I-EXID", "B-EXNAME", "I-EXNAME")
MODEL_FORMAT = "exsearch-crf"
MODEL_VERSION = 1


class ModelFormatError(ValueError):
    pass


@dataclass(frozen=True)
class LabelSet:
    labels: tuple[str, ...] = DEFAULT_LABELS

    def __post_init__(self):
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("labels must be unique")

    def __len__(self):
        return len(self.labels)

    def index(self, label: str) -> int:
        return self.labels.index(label)


@dataclass(eq=False)
class CrfModel:
    """Weights over (attribute, label) state features and (label, label) transitions.

    ``weights`` is laid out as the row-major ``A x L`` state block followed by
    the row-major ``L x L`` transition block (``[prev, cur]``).
    """

    label_set: LabelSet
    attributes: tuple[str, ...]
    weights: np.ndarray
    feature_config: FeatureConfig = field(default_factory=FeatureConfig)
    train_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        if self.weights.shape != (self.n_features,):
            raise ValueError(f"expected {self.n_features} weights, got {self.weights.shape}")
        if not np.all(np.isfinite(self.weights)):
            raise ValueError("weights must be finite")

    @classmethod
    def zeros(cls, labels: Sequence[str], attributes: Sequence[str], **kw) -> "CrfModel":
        ls = labels if isinstance(labels, LabelSet) else LabelSet(tuple(labels))
        n = len(attributes) * len(ls) + len(ls) ** 2
        return cls(ls, tuple(attributes), np.zeros(n), **kw)

    @property
    def labels(self) -> tuple[str, ...]:
        return self.label_set.labels

    @property
    def n_labels(self) -> int:
        return len(self.label_set)

    @property
    def n_features(self) -> int:
        L = len(self.label_set)
        return len(self.attributes) * L + L * L

    @property
    def state_weights(self) -> np.ndarray:
        L = self.n_labels
        return self.weights[: len(self.attributes) * L].reshape(len(self.attributes), L)

    @property
    def transition_weights(self) -> np.ndarray:
        L = self.n_labels
        return self.weights[len(self.attributes) * L:].reshape(L, L)

    @cached_property
    def attribute_index(self) -> dict[str, int]:
        return {a: i for i, a in enumerate(self.attributes)}

    @property
    def feature_index(self) -> dict[str, int]:
        """Feature name -> weight position for every state and transition feature."""
        idx = {}
        k = 0
        for a in self.attributes:
            for y in self.labels:
                idx[f"{a}|{y}"] = k
                k += 1
        for p in self.labels:
            for y in self.labels:
                idx[f"trans:{p}->{y}"] = k
                k += 1
        return idx

    def attribute_ids(self, features: Sequence[Sequence[str]]) -> list[list[int]]:
        index = self.attribute_index
        return [[index[f] for f in feats if f in index] for feats in features]

    def emissions(self, seq: TokenSequence) -> np.ndarray:
        W = self.state_weights
        out = np.zeros((len(seq), self.n_labels))
        for t, ids in enumerate(self.attribute_ids(seq.features)):
            if ids:
                out[t] = W[ids].sum(axis=0)
        return out

    # -- inference ---------------------------------------------------------

    def marginals(self, seq: TokenSequence):
        return forward_backward(self.emissions(seq), self.transition_weights)

    def viterbi(self, seq: TokenSequence) -> tuple[list[str], float]:
        path, score = viterbi(self.emissions(seq), self.transition_weights)
        return [self.labels[i] for i in path], score

    def predict_tokens(self, tokens: Sequence[str]) -> list[str]:
        if not tokens:
            return []
        return self.viterbi(extract_features(tokens, self.feature_config))[0]

    # -- persistence -------------------------------------------------------

    def _payload(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "labels": list(self.labels),
            "attributes": list(self.attributes),
            "weights": base64.b64encode(self.weights.astype("<f8").tobytes()).decode("ascii"),
            "feature_config": self.feature_config.to_dict(),
            "train_meta": self.train_meta,
        }

    def dumps(self) -> str:
        payload = self._payload()
        payload["checksum"] = _checksum(payload)
        return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n"

    def save(self, path: str | Path) -> str:
        """Write the model file; returns its checksum."""
        text = self.dumps()
        Path(path).write_text(text, encoding="utf-8")
        return json.loads(text)["checksum"]

    @classmethod
    def loads(cls, text: str) -> "CrfModel":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"not a model file: {exc}") from None
        if payload.get("format") != MODEL_FORMAT:
            raise ModelFormatError("not an exsearch CRF model")
        if payload.get("version") != MODEL_VERSION:
            raise ModelFormatError(f"unsupported model version {payload.get('version')}")
        checksum = payload.pop("checksum", None)
        if checksum != _checksum(payload):
            raise ModelFormatError("model checksum mismatch")
        weights = np.frombuffer(base64.b64decode(payload["weights"]), dtype="<f8").astype(np.float64)
        return cls(
            LabelSet(tuple(payload["labels"])),
            tuple(payload["attributes"]),
            weights,
            FeatureConfig(**payload["feature_config"]),
            payload["train_meta"],
        )

    @classmethod
    def load(cls, path: str | Path) -> "CrfModel":
        return cls.loads(Path(path).read_text(encoding="utf-8"))


def _checksum(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return "sha256:" + hashlib.sha256(blob.encode("utf-8")).hexdigest()
