"""
Finite-difference verification of analytic gradients.
"""
import logging

import numpy as np
import pandas as pd

from mgtc import constants
from mgtc import exceptions as exc
from mgtc.nn.tensor import Tape

logger = logging.getLogger(__name__)

# Denominator floor of the relative error, so that coordinates with a
# vanishing gradient are judged on their absolute error.
REL_ERR_FLOOR = 1e-3


class GradcheckReport():
    """
    Maximum relative error per parameter.
    """
    def __init__(self, threshold):
        self.threshold = threshold
        self.rows = []

    def add(self, name, max_rel_err, status):
        self.rows.append((name, max_rel_err, status))

    @property
    def max_rel_err(self):
        errors = [err for _, err, status in self.rows if status != "skipped"]
        return max(errors) if errors else 0.0

    @property
    def passed(self):
        return all(status != "fail" for _, _, status in self.rows)

    def status_of(self, name):
        for row_name, _, status in self.rows:
            if row_name == name:
                return status
        raise exc.InvalidParameterError("No report row for '%s'." % name)

    def to_frame(self):
        return pd.DataFrame(self.rows,
                            columns=["param_name", "max_rel_err", "status"])

    def to_tsv(self, path=None):
        """
        :param path: Destination path (optional).
        :returns: The TSV text if no ``path`` was given.
        """
        return self.to_frame().to_csv(path, sep="\t", index=False,
                                      float_format="%.3e")


def finite_diff_check(store, loss_fn, eps=1e-5, coords=None, threshold=1e-4,
                      seed=0):
    """
    Compare the gradients of ``loss_fn`` from the tape with central \
            differences, on a ``float64`` copy of ``store``.

    :param store: A :class:`mgtc.nn.params.ParamStore`. It is not modified.
    :param loss_fn: A deterministic callable ``loss_fn(store, tape)`` \
            returning a scalar :class:`mgtc.nn.tensor.Tensor`. ``tape`` is \
            ``None`` for evaluations that do not need gradients.
    :param eps: Finite-difference step.
    :param coords: Number of coordinates sampled per parameter (all of \
            them if the parameter is smaller). Defaults to 32.
    :param threshold: Relative error above which a parameter fails.
    :param seed: Seed of the coordinate sampler.
    :returns: A :class:`GradcheckReport`. Frozen parameters are reported \
            as ``skipped``.
    """
    if coords is None:
        coords = constants.GRADCHECK_COORDS
    work = store.copy(dtype=np.float64)
    rng = np.random.default_rng(seed)

    tape = Tape()
    loss = loss_fn(work, tape)
    work.clear_grads()
    tape.backward(loss)

    def evaluate():
        return loss_fn(work, None).item()

    reference = evaluate()
    if evaluate() != reference:
        raise exc.NumericalError(
            "Loss function is not deterministic: two evaluations differ.")

    report = GradcheckReport(threshold)
    for param in work:
        if not param.trainable:
            report.add(param.name, 0.0, "skipped")
            continue
        analytic = (param.grad if param.grad is not None
                    else np.zeros_like(param.value))
        flat = param.value.reshape(-1)
        picked = rng.choice(flat.size, size=min(coords, flat.size),
                            replace=False)
        worst = 0.0
        for index in picked:
            saved = flat[index]
            flat[index] = saved + eps
            plus = evaluate()
            flat[index] = saved - eps
            minus = evaluate()
            flat[index] = saved
            numeric = (plus - minus) / (2 * eps)
            exact = analytic.reshape(-1)[index]
            denom = max(abs(numeric), abs(exact), REL_ERR_FLOOR)
            worst = max(worst, abs(numeric - exact) / denom)
        status = "ok" if worst < threshold else "fail"
        if status == "fail":
            logger.warning("Gradient check failed for %s: %.3e",
                           param.name, worst)
        report.add(param.name, worst, status)
    return report
