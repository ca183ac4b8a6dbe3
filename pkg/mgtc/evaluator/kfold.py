"""
N-fold cross validation over documents.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import pandas as pd

from mgtc import exceptions as exc
from mgtc.corpus.split import SplitSpec, fold_split, split
from mgtc.model import Pipeline
from mgtc.trainer import TrainConfig, evaluate, train_coarse, train_fine

logger = logging.getLogger(__name__)

COARSE_TO_FINE = "coarse-to-fine"
SINGLE_STAGE = "single-stage"
SUBTASKS = ("st1", "st2", "st3")


def fold_seed(base_seed, fold, repeat=0):
    """
    Deterministic seed of one fold.
    """
    return base_seed + repeat * 1000 + fold


class TrainRecipe():
    """
    Train a fresh two-phase model on some documents.

    :param hp: The :class:`mgtc.model.HyperParams`.
    :param transfer: Start the word-level phase from the coarse model \
            (coarse-to-fine learning). When ``False`` it starts from random \
            shared parameters (single-stage learning).
    :param freeze_shared: Freeze the shared parameters in the fine phase.
    """
    def __init__(self, hp, transfer=True, freeze_shared=False):
        self.hp = hp
        self.transfer = transfer
        self.freeze_shared = freeze_shared

    @property
    def mode(self):
        return COARSE_TO_FINE if self.transfer else SINGLE_STAGE

    def __call__(self, documents, seed):
        hp = replace(self.hp, seed=seed)
        coarse = train_coarse(documents, TrainConfig(hp=hp)).best
        fine = train_fine(documents, coarse,
                          TrainConfig(hp=hp, phase="fine",
                                      transfer=self.transfer,
                                      freeze_shared=self.freeze_shared),
                          vocab=coarse.vocab).best
        return Pipeline(coarse, fine)


def _run_fold(args):
    folds, index, train_fn, seed = args
    train, test = fold_split(folds, index)
    predictor = train_fn(train, seed)
    scores = evaluate(test, predictor, subtasks=SUBTASKS)
    logger.info("Fold %d/%d: ST1 %s, ST2 %s, ST3 %s", index + 1, len(folds),
                scores.st1, scores.st2, scores.st3)
    return scores


def kfold_evaluate(documents, n_folds, train_fn, seed=0, jobs=1):
    """
    Cross-validate a training procedure.

    :param documents: The labeled documents.
    :param n_folds: Number of folds, between 2 and the number of documents.
    :param train_fn: A callable ``train_fn(train_documents, seed)`` \
            returning a predictor for :func:`mgtc.trainer.evaluate`. It \
            must be picklable when ``jobs > 1``.
    :param seed: Base seed of the fold assignment and of every fold.
    :param jobs: Number of worker processes.
    :returns: A ``pandas.DataFrame`` with one row per fold and the columns \
            ``n``, ``fold``, ``st1``, ``st2`` and ``st3`` (percentages).
    """
    if not 2 <= n_folds <= len(documents):
        raise exc.InvalidParameterError(
            "Cannot run %d-fold validation on %d documents." % (
                n_folds, len(documents)))
    folds = split(documents, SplitSpec(mode="kfold", seed=seed,
                                       folds=n_folds))
    tasks = [(folds, index, train_fn, fold_seed(seed, index))
             for index in range(n_folds)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_fold, tasks))
    else:
        results = [_run_fold(task) for task in tasks]
    return pd.DataFrame([
        {"n": n_folds, "fold": index,
         **{task: _percent(getattr(scores, task)) for task in SUBTASKS}}
        for index, scores in enumerate(results)]).astype(
            {task: float for task in SUBTASKS})


def _percent(value):
    return None if value is None else 100.0 * value


def summarize(frame):
    """
    Mean and standard deviation per subtask.

    :param frame: Rows as returned by :func:`kfold_evaluate`, possibly for \
            several ``n`` and a ``mode`` column.
    :returns: A ``pandas.DataFrame`` indexed by the grouping columns, with \
            ``<subtask>_mean`` and ``<subtask>_std`` columns.
    """
    keys = [column for column in ("mode", "n") if column in frame.columns]
    grouped = frame.groupby(keys)[list(SUBTASKS)]
    means = grouped.mean().add_suffix("_mean")
    stds = grouped.std(ddof=0).add_suffix("_std")
    return means.join(stds)[[
        "%s_%s" % (task, stat) for task in SUBTASKS
        for stat in ("mean", "std")]]


def compare_learning(documents, hp, n_range=range(2, 21), seed=0, jobs=1,
                     modes=(COARSE_TO_FINE, SINGLE_STAGE)):
    """
    Cross-validate coarse-to-fine and single-stage learning for several \
            numbers of folds.

    :param documents: The labeled documents.
    :param hp: The :class:`mgtc.model.HyperParams`.
    :param n_range: The numbers of folds. Values above the number of \
            documents are skipped.
    :param seed: Base seed.
    :param jobs: Number of worker processes per run.
    :param modes: The learning modes to run.
    :returns: A ``pandas.DataFrame`` of per-fold rows with a ``mode`` \
            column.
    """
    frames = []
    for n_folds in n_range:
        if n_folds > len(documents):
            logger.warning("Skipping %d folds: only %d documents", n_folds,
                           len(documents))
            continue
        for mode in modes:
            recipe = TrainRecipe(hp, transfer=(mode == COARSE_TO_FINE))
            frame = kfold_evaluate(documents, n_folds, recipe, seed=seed,
                                   jobs=jobs)
            frame.insert(0, "mode", mode)
            frames.append(frame)
    if not frames:
        raise exc.InvalidParameterError("No valid number of folds to run.")
    return pd.concat(frames, ignore_index=True)
