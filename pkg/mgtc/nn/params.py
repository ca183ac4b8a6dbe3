"""
Named parameters and the ordered store holding them.
"""
import copy
import logging

import numpy as np

from mgtc import exceptions as exc
from mgtc.nn import tensor as T

logger = logging.getLogger(__name__)


class Parameter():
    """
    A named, optionally trainable array and its accumulated gradient.

    ``grad`` is ``None`` until a backward pass reaches the parameter (or
    :meth:`zero_grad` is called).
    """
    def __init__(self, name, value, trainable=True):
        self.name = name
        self.value = value
        self.grad = None
        self.trainable = trainable

    @property
    def shape(self):
        return self.value.shape

    def zero_grad(self):
        self.grad = np.zeros_like(self.value)

    def __repr__(self):
        return "Parameter(%s, shape=%s, trainable=%s)" % (
            self.name, self.shape, self.trainable)


class ParamStore():
    """
    An ordered map from names to :class:`Parameter` objects, plus the seed \
            of the generator used to initialize them.

    Names are dotted paths such as ``encoder.fwd.W_i``; prefixes partition
    the store into components that can be frozen together.
    """
    def __init__(self, rng_seed=0, dtype=np.float32):
        """
        Build an empty :class:`ParamStore`.

        :param rng_seed: Seed of the initialization generator.
        :param dtype: Storage dtype of the parameters.
        """
        self.params = {}
        self.rng_seed = int(rng_seed)
        self.dtype = np.dtype(dtype)
        self.rng = np.random.default_rng(self.rng_seed)

    def __getitem__(self, name):
        try:
            return self.params[name]
        except KeyError:
            raise exc.InvalidParameterError("No parameter named '%s'." % name)

    def __contains__(self, name):
        return name in self.params

    def __iter__(self):
        return iter(self.params.values())

    def __len__(self):
        return len(self.params)

    def names(self):
        return list(self.params.keys())

    def reseed(self, stream):
        """
        Switch the initialization generator to an independent stream \
                derived from the store seed, so that parameters added later \
                do not depend on how many were drawn before.

        :param stream: A non-negative integer naming the stream.
        """
        self.rng = np.random.default_rng([self.rng_seed, int(stream)])

    ##################
    # Initialization #
    ##################
    def add(self, name, value, trainable=True):
        """
        Add a parameter.

        :param name: Unique name.
        :param value: Initial value, converted to the store dtype.
        :param trainable: Whether optimizers may update it.
        :returns: The new :class:`Parameter`.
        """
        if name in self.params:
            raise exc.InvalidParameterError(
                "Parameter '%s' already exists." % name)
        value = np.array(value, dtype=self.dtype)
        param = Parameter(name, value, trainable=trainable)
        self.params[name] = param
        return param

    def glorot(self, name, shape, trainable=True):
        """
        Add a weight drawn from ``U(-a, a)`` with \
                ``a = sqrt(6 / (fan_in + fan_out))``.
        """
        fan_in, fan_out = shape[0], shape[-1]
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        value = self.rng.uniform(-bound, bound, size=shape)
        return self.add(name, value, trainable=trainable)

    def fill(self, name, shape, value=0.0, trainable=True):
        """
        Add a parameter with every entry equal to ``value``.
        """
        return self.add(name, np.full(shape, value), trainable=trainable)

    ##############
    # Components #
    ##############
    def with_prefix(self, prefix):
        """
        :returns: The parameters whose name starts with ``prefix``.
        """
        return [p for p in self.params.values() if p.name.startswith(prefix)]

    def set_trainable(self, prefix, trainable):
        """
        Freeze or unfreeze every parameter under ``prefix``.

        :returns: The number of parameters affected.
        """
        params = self.with_prefix(prefix)
        for param in params:
            param.trainable = trainable
        logger.debug("%s %d parameters under '%s'",
                     "Unfroze" if trainable else "Froze", len(params), prefix)
        return len(params)

    def clear_grads(self):
        for param in self.params.values():
            param.grad = None

    def zero_grad(self):
        for param in self.params.values():
            param.zero_grad()

    def copy(self, dtype=None):
        """
        Deep copy of the store, optionally cast to another dtype (the \
                gradient checker works on a ``float64`` copy).
        """
        dtype = self.dtype if dtype is None else np.dtype(dtype)
        clone = ParamStore(self.rng_seed, dtype=dtype)
        clone.rng = copy.deepcopy(self.rng)
        for param in self.params.values():
            clone.add(param.name, param.value, trainable=param.trainable)
        return clone

    def size(self):
        """
        :returns: The total number of scalar coordinates.
        """
        return int(sum(p.value.size for p in self.params.values()))


class Binding():
    """
    The parameters of a store as tensors, watched on one tape (or as \
            constants for inference when ``tape`` is ``None``).
    """
    def __init__(self, store, tape=None):
        self.store = store
        self.tape = tape

    def __getitem__(self, name):
        param = self.store[name]
        if self.tape is None:
            return T.Tensor(param.value)
        return self.tape.watch(param)

    def zeros(self, shape):
        """
        :returns: A constant zero tensor in the store dtype.
        """
        return T.Tensor(np.zeros(shape, dtype=self.store.dtype))

    def constant(self, data):
        """
        :returns: A constant tensor in the store dtype.
        """
        return T.constant(data, dtype=self.store.dtype)
