# Copyright 2026 The haca Authors. Apache 2.0 License.
"""Hierarchically aligned cross-modal attention captioning engine."""

from ._haca import (
    BOS,
    EOS,
    PAD,
    UNK,
    VARIANTS,
    ConfigError,
    DataError,
    Dataset,
    Model,
    Sample,
    SynthDataset,
    SynthSpec,
    Trainer,
    TrainingError,
    Vocabulary,
    bleu4,
    config,
    gradcheck,
    load_dataset,
    micro_config,
    synth_dataset,
)

__all__ = [
    "BOS",
    "EOS",
    "PAD",
    "UNK",
    "VARIANTS",
    "ConfigError",
    "DataError",
    "Dataset",
    "Model",
    "Sample",
    "SynthDataset",
    "SynthSpec",
    "Trainer",
    "TrainingError",
    "Vocabulary",
    "bleu4",
    "config",
    "gradcheck",
    "load_dataset",
    "micro_config",
    "synth_dataset",
]
