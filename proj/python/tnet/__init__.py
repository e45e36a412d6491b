"""Python access to the tnet targeted sentiment toolkit.

Training, evaluation and prediction run in the C++ core and return the same
JSON documents as the ``tnet`` command-line tool, decoded into dicts.
"""

import json as _json

from . import _tnet
from ._tnet import TNetError, UsageError, accuracy, macro_f1, position_relevance, variants

__all__ = [
    "TNetError",
    "UsageError",
    "accuracy",
    "evaluate",
    "gradcheck",
    "macro_f1",
    "paired_t_test",
    "position_relevance",
    "predict",
    "train",
    "variants",
]


def _path(p):
    return None if p is None else str(p)


def paired_t_test(a, b):
    """Two-sided paired t-test; returns dict with t, p, df and mean_difference."""
    return _json.loads(_tnet.paired_t_test(list(a), list(b)))


def train(train_file, out, *, test_file=None, valid_file=None, embeddings=None, config=None,
          variant=None, dataset="laptop", seed=None, epochs=None, runs=1):
    """Train and write checkpoints under ``out``; returns the run summary."""
    return _json.loads(_tnet.train(
        _path(train_file), _path(out), _path(test_file), _path(valid_file), _path(embeddings),
        _path(config), variant, dataset, seed, epochs, runs))


def evaluate(checkpoints, test_file, *, ttest=False):
    """Evaluate checkpoint files or train output directories on ``test_file``."""
    if isinstance(checkpoints, (str, bytes)) or hasattr(checkpoints, "__fspath__"):
        checkpoints = [checkpoints]
    return _json.loads(_tnet.evaluate([str(c) for c in checkpoints], str(test_file), ttest))


def predict(checkpoint, sentence, target, *, occurrence=None):
    """Label, class probabilities and the most informative n-gram for one target."""
    return _json.loads(_tnet.predict(str(checkpoint), sentence, target, occurrence))


def gradcheck(variant=None, seed=1):
    """Finite-difference check of every parameter gradient on a tiny model."""
    return _json.loads(_tnet.gradcheck(variant, seed))
