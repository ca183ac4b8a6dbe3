"""
Two-tailed paired t-test.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from mgtc import exceptions as exc


@dataclass(frozen=True)
class TTestResult():
    """
    ``tie`` is set when the differences have zero variance: the statistic \
            is then 0 (identical lists, ``p = 1``) or infinite (constant \
            nonzero difference, ``p = 0``).
    """
    statistic: float
    p_value: float
    n: int
    tie: bool = False


def paired_t_test(scores_a, scores_b):
    """
    Compare two paired samples, e.g. per-fold accuracies of two systems.

    :param scores_a: A sequence of scores.
    :param scores_b: The paired scores, same length (at least 2).
    :returns: A :class:`TTestResult`.

    >>> paired_t_test([1, 2, 3, 4, 5], [1, 2, 3, 4, 5]).p_value
    1.0
    """
    a = np.asarray(scores_a, dtype=np.float64)
    b = np.asarray(scores_b, dtype=np.float64)
    if a.ndim != 1 or a.shape != b.shape:
        raise exc.InvalidParameterError(
            "Paired samples must be flat and of equal length, got %s and %s."
            % (a.shape, b.shape))
    if a.size < 2:
        raise exc.InvalidParameterError(
            "A paired t-test needs at least two pairs.")
    diff = a - b
    if np.all(diff == diff[0]):
        if diff[0] == 0:
            return TTestResult(0.0, 1.0, a.size, tie=True)
        return TTestResult(math.copysign(math.inf, diff[0]), 0.0, a.size,
                           tie=True)
    result = stats.ttest_rel(a, b)
    return TTestResult(float(result.statistic), float(result.pvalue), a.size)


def read_scores(path):
    """
    Read one score per line, blank lines ignored.
    """
    scores = []
    with open(path, encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                scores.append(float(line))
            except ValueError:
                raise exc.InvalidParameterError(
                    "%s line %d: not a number: %r" % (path, line_number,
                                                      line.strip()))
    return scores
