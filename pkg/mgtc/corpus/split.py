"""
Document-level train/test splits and k-fold partitions.
"""
import math
from dataclasses import dataclass

import numpy as np

from mgtc import exceptions as exc


@dataclass(frozen=True)
class SplitSpec():
    """
    ``mode`` is ``ratio`` (8:2 train/test) or ``kfold`` with ``folds`` parts.
    """
    mode: str = "ratio"
    seed: int = 0
    folds: int = 5
    train_ratio: float = 0.8


def split(documents, spec):
    """
    Split a corpus by documents, so that no document contributes sentences \
            to both sides.

    :param documents: A list of documents (at least two).
    :param spec: A :class:`SplitSpec`.
    :returns: A ``(train, test)`` tuple in ``ratio`` mode, the list of \
            folds in ``kfold`` mode. Folds are disjoint and cover the corpus.
    """
    if len(documents) < 2:
        raise exc.InvalidParameterError(
            "Need at least two documents to split, got %d." % len(documents))
    order = np.random.default_rng(spec.seed).permutation(len(documents))
    shuffled = [documents[i] for i in order]
    if spec.mode == "ratio":
        n_train = int(round(len(documents) * spec.train_ratio))
        n_train = min(max(n_train, 1), len(documents) - 1)
        return shuffled[:n_train], shuffled[n_train:]
    if spec.mode == "kfold":
        if not 2 <= spec.folds <= len(documents):
            raise exc.InvalidParameterError(
                "Cannot make %d folds out of %d documents." % (
                    spec.folds, len(documents)))
        return [list(fold) for fold in _chunks(shuffled, spec.folds)]
    raise exc.InvalidParameterError("Unknown split mode '%s'." % spec.mode)


def _chunks(items, n):
    """
    Cut ``items`` into ``n`` contiguous parts whose sizes differ by at \
            most one.
    """
    start = 0
    for i in range(n):
        size = int(math.ceil((len(items) - start) / (n - i)))
        yield items[start:start + size]
        start += size


def fold_split(folds, test_index):
    """
    :returns: The ``(train, test)`` documents when fold ``test_index`` is \
            held out.
    """
    train = [doc for i, fold in enumerate(folds) if i != test_index
             for doc in fold]
    return train, list(folds[test_index])
