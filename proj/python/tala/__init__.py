"""Tagging, parsing, NER and text categorization pipelines.

    >>> import tala
    >>> nlp = tala.load("models/tl_tala_md")
    >>> doc = nlp("Ako si Juan de la Cruz.")
    >>> doc["upos"], doc["ents"]
"""

import json
import os

from . import _tala
from ._tala import (
    ConfigError,
    DataError,
    Error,
    ParseError,
    TrainingError,
    aggregate_trials,
    biluo_to_spans,
    cohen_kappa,
    convert,
    pairwise_f1_no_o,
    span_prf,
    spans_to_biluo,
    tokenize,
    write_toy_corpus,
)

__version__ = _tala.__version__


def hash32(key, seed):
    if isinstance(key, str):
        key = key.encode("utf-8")
    return _tala.hash32(key, seed)


def _config_text(config):
    if os.path.exists(str(config)):
        with open(config, encoding="utf-8") as f:
            return f.read()
    return config


def train(config):
    """Train from a config path or config text; returns the training report."""
    return json.loads(_tala.train(_config_text(config)))


def benchmark(config):
    return json.loads(_tala.benchmark(_config_text(config)))


def iaa_report(annotations):
    return json.loads(_tala.iaa_report(annotations))


def normalize_config(config):
    return _tala.normalize_config(_config_text(config))


class Pipeline:
    def __init__(self, native):
        self._native = native

    @property
    def components(self):
        return list(self._native.components)

    def __call__(self, text):
        return json.loads(self._native.apply(text))

    def pipe(self, texts):
        for text in texts:
            yield self(text)

    def save(self, path):
        self._native.save(str(path))

    @property
    def meta(self):
        return json.loads(self._native.meta())

    def evaluate(self, treebank="", ner="", textcat="", exclude_punct=False):
        return json.loads(self._native.evaluate(str(treebank), str(ner), str(textcat), exclude_punct))


def load(name, models_dir=""):
    return Pipeline(_tala.load(str(name), str(models_dir)))
