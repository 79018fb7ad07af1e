from .crf import bio_constraints, crf_log_partition, crf_neg_log_likelihood, path_score, viterbi_decode
from .model import (TaggerError, TaggerParams, TrainConfig, encode_chars, encode_sentence,
                    init_params, loss_and_grads, tag)
from .serialize import ModelFormatError, load_model, save_model
from .train import label_set, train_tagger

__all__ = [
    "bio_constraints", "crf_log_partition", "crf_neg_log_likelihood", "path_score",
    "viterbi_decode", "TaggerError", "TaggerParams", "TrainConfig", "encode_chars",
    "encode_sentence", "init_params", "loss_and_grads", "tag", "ModelFormatError",
    "load_model", "save_model", "label_set", "train_tagger",
]
