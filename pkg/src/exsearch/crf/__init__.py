from .entities import Entity, decode_entities
from .features import FeatureConfig, FeatureExtractor, TokenSequence, coarse_pos, extract_features, shape
from .inference import forward_backward, path_score, viterbi
from .model import DEFAULT_LABELS, CrfModel, LabelSet, ModelFormatError
from .optimize import NonFiniteObjective, owlqn
from .train import CorpusMatrices, TrainConfig, objective_and_gradient, train


def log_partition_and_marginals(model: CrfModel, seq: TokenSequence):
    return model.marginals(seq)


__all__ = [
    "CorpusMatrices", "CrfModel", "DEFAULT_LABELS", "Entity", "FeatureConfig", "FeatureExtractor",
    "LabelSet", "ModelFormatError", "NonFiniteObjective", "TokenSequence", "TrainConfig",
    "coarse_pos", "decode_entities", "extract_features", "forward_backward",
    "log_partition_and_marginals", "objective_and_gradient", "owlqn", "path_score", "shape",
    "train", "viterbi",
]
