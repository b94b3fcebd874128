"""Python access to the newshub core: ingestion, labeling, models and evaluation."""

import json as _json
import os as _os

from . import _core
from ._core import (
    Model as _Model,
    NewshubError,
    contains_pii,
    extract_snippet,
    model_kinds,
    parse_verdict,
    scrub_pii,
    split_sentences,
    tokenize,
)

__all__ = [
    "NewshubError",
    "Model",
    "assign_reviews",
    "benchmark",
    "cohen_kappa",
    "contains_pii",
    "extract_snippet",
    "ingest",
    "metrics",
    "model_kinds",
    "parse_verdict",
    "read_corpus",
    "scrub_pii",
    "split_sentences",
    "synthetic_corpus",
    "tokenize",
    "write_corpus",
]


def ingest(config, benchmark=None, offline=False, timeout_ms=30000):
    """Run feed ingestion. Returns {"corpus": [...], "feeds": [...]}."""
    bench = None if benchmark is None else _os.fspath(benchmark)
    return _json.loads(_core.ingest(_os.fspath(config), bench, offline, timeout_ms))


def read_corpus(path):
    return _json.loads(_core.read_corpus(_os.fspath(path)))


def write_corpus(path, records):
    _core.write_corpus(_os.fspath(path), _json.dumps(list(records)))


def synthetic_corpus(n_documents=400, seed=11):
    return _json.loads(_core.synthetic_corpus(n_documents, seed))


def cohen_kappa(a, b, gate=0.80):
    return _json.loads(_core.cohen_kappa(list(a), list(b), gate))


def assign_reviews(record_ids, annotator_ids, seed=7):
    return [
        {"id": i, "record_id": r, "annotator_id": a}
        for i, r, a in _core.assign_reviews(list(record_ids), list(annotator_ids), seed)
    ]


def metrics(y_true, y_pred, model_name="model"):
    return _json.loads(_core.metrics(list(y_true), list(y_pred), model_name))


def benchmark(records, seed=7, models=(), external=(), overrides=None):
    """Split, train and score. Returns (summary dict, markdown report)."""
    summary, markdown = _core.benchmark(
        _json.dumps(list(records)),
        seed,
        list(models),
        [_os.fspath(p) for p in external],
        _json.dumps(overrides or {}),
    )
    return _json.loads(summary), markdown


class Model:
    """A trained classifier carrying its own vocabulary."""

    def __init__(self, native):
        self._native = native

    @classmethod
    def train(cls, kind, records, seed=7, hyperparameters=None, min_df=2, upsample=True):
        native = _Model.train(kind, _json.dumps(list(records)), seed, _json.dumps(hyperparameters or {}), min_df,
                              upsample)
        return cls(native)

    @classmethod
    def load(cls, path):
        return cls(_Model.load(_os.fspath(path)))

    def save(self, path):
        self._native.save(_os.fspath(path))

    def predict(self, records):
        """Returns {record_id: label}."""
        return dict(self._native.predict(_json.dumps(list(records))))

    @property
    def kind(self):
        return self._native.kind

    @property
    def n_features(self):
        return self._native.n_features

    @property
    def n_train(self):
        return self._native.n_train
