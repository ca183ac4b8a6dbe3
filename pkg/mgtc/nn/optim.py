"""
The Adam optimizer.
"""
import numpy as np

from mgtc import constants
from mgtc import exceptions as exc


class AdamState():
    """
    Per-parameter moments and the step counter of Adam.
    """
    def __init__(self, lr=1e-4, beta1=constants.ADAM_BETA1,
                 beta2=constants.ADAM_BETA2, epsilon=constants.ADAM_EPSILON):
        if lr <= 0:
            raise exc.InvalidParameterError("Learning rate must be positive.")
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.step = 0
        self.first = {}
        self.second = {}


def adam_step(store, state):
    """
    Apply one bias-corrected Adam update to every trainable parameter of \
            ``store``. Parameters that a backward pass did not reach count \
            as having a zero gradient. Frozen parameters never move.

    :param store: A :class:`mgtc.nn.params.ParamStore` with gradients.
    :param state: The :class:`AdamState`, updated in place.
    """
    trainable = [p for p in store if p.trainable]
    if trainable and all(p.grad is None for p in trainable):
        raise exc.TapeError(
            "adam_step called without gradients: run backward first.")
    state.step += 1
    correction1 = 1.0 - state.beta1 ** state.step
    correction2 = 1.0 - state.beta2 ** state.step
    for param in trainable:
        if param.grad is None:
            grad = np.zeros(param.shape, dtype=np.float64)
        else:
            if param.grad.shape != param.shape:
                raise exc.DimensionError(
                    "Gradient of '%s' has shape %s, expected %s." % (
                        param.name, param.grad.shape, param.shape))
            grad = param.grad.astype(np.float64)
        first = state.first.get(param.name)
        if first is None:
            first = np.zeros(param.shape, dtype=np.float64)
            state.second[param.name] = np.zeros(param.shape, dtype=np.float64)
        second = state.second[param.name]
        first = state.beta1 * first + (1 - state.beta1) * grad
        second = state.beta2 * second + (1 - state.beta2) * grad * grad
        state.first[param.name] = first
        state.second[param.name] = second
        update = state.lr * (first / correction1) / (
            np.sqrt(second / correction2) + state.epsilon)
        param.value = (param.value.astype(np.float64) - update).astype(
            param.value.dtype)
