"""
Dense tensors and the gradient tape.

Every operation of the fixed MGTC layer set is a function of this module (or
a fused operation in :mod:`mgtc.layers`) taking :class:`Tensor` objects and
returning new ones. When at least one input is attached to a :class:`Tape`,
the operation records a closure computing the gradients of its inputs from
the gradients of its outputs. :meth:`Tape.backward` replays these closures in
reverse order.

Tensors not attached to a tape are constants: operations on constants only
compute values, which is what inference uses.
"""
import numpy as np
from scipy import special

from mgtc import constants
from mgtc import exceptions as exc


ACTIVATIONS = ("sigmoid", "tanh", "relu")


class Tensor():
    """
    A dense array, optionally attached to a gradient tape.
    """
    __slots__ = ("data", "grad", "tape", "param")

    def __init__(self, data, tape=None, param=None):
        """
        Build a :class:`Tensor`.

        :param data: A ``numpy`` array.
        :param tape: The :class:`Tape` recording operations on this tensor \
                (optional). ``None`` for constants.
        :param param: The :class:`mgtc.nn.params.Parameter` this tensor \
                reads from, for leaves watched on a tape (optional).
        """
        self.data = data
        self.grad = None
        self.tape = tape
        self.param = param

    @property
    def shape(self):
        return self.data.shape

    @property
    def requires_grad(self):
        return self.tape is not None

    def item(self):
        """
        :returns: The value of a single-element tensor as a Python float.
        """
        return float(self.data.reshape(-1)[0])

    def __repr__(self):
        return "Tensor(shape=%s, requires_grad=%s)" % (self.shape,
                                                       self.requires_grad)


class Tape():
    """
    Records the forward pass of one loss computation.

    A tape is used once: after :meth:`backward`, build a new one for the
    next step.
    """
    def __init__(self):
        self._entries = []
        self._watched = {}
        self._consumed = False

    def __len__(self):
        return len(self._entries)

    def watch(self, param):
        """
        Get the leaf tensor reading from ``param`` on this tape.

        Frozen parameters are returned as constants, so that nothing is
        recorded for them.

        :param param: A :class:`mgtc.nn.params.Parameter`.
        :returns: A :class:`Tensor`. Watching the same parameter twice \
                returns the same tensor.
        """
        if not param.trainable:
            return Tensor(param.value)
        leaf = self._watched.get(param.name)
        if leaf is None:
            leaf = Tensor(param.value, tape=self, param=param)
            self._watched[param.name] = leaf
        return leaf

    def record(self, inputs, outputs, backward):
        """
        Record an operation.

        :param inputs: The input tensors of the operation.
        :param outputs: The output tensors of the operation.
        :param backward: A callable taking one gradient array per output \
                and returning one gradient array (or ``None``) per input.
        """
        if self._consumed:
            raise exc.TapeError("Tape was already used for a backward pass.")
        self._entries.append((inputs, outputs, backward))

    def backward(self, loss):
        """
        Back-propagate from a scalar loss and accumulate the gradients of \
                every trainable parameter reachable from it into \
                ``Parameter.grad``.

        :param loss: A single-element :class:`Tensor` recorded on this tape.
        """
        if len(self._entries) == 0:
            raise exc.TapeError(
                "backward called before any forward operation was recorded.")
        if self._consumed:
            raise exc.TapeError("Tape was already used for a backward pass.")
        if loss.tape is not self:
            raise exc.TapeError("Loss was not recorded on this tape.")
        if loss.data.size != 1:
            raise exc.DimensionError(
                "backward needs a scalar loss, got shape %s." % (loss.shape,))
        self._consumed = True

        loss.grad = np.ones_like(loss.data)
        for inputs, outputs, backward in reversed(self._entries):
            if all(out.grad is None for out in outputs):
                continue
            out_grads = [out.grad if out.grad is not None
                         else np.zeros_like(out.data)
                         for out in outputs]
            in_grads = backward(*out_grads)
            for tensor, grad in zip(inputs, in_grads):
                if grad is None or tensor.tape is None:
                    continue
                if tensor.grad is None:
                    tensor.grad = grad
                else:
                    tensor.grad = tensor.grad + grad

        for leaf in self._watched.values():
            if leaf.grad is None:
                continue
            _check_finite(leaf.grad, "gradient of " + leaf.param.name)
            param = leaf.param
            grad = leaf.grad.astype(param.value.dtype, copy=False)
            if param.grad is None:
                param.grad = grad.copy()
            else:
                param.grad = param.grad + grad


###########
# Helpers #
###########
def constant(data, dtype=None):
    """
    Wrap an array-like as a constant :class:`Tensor`.

    :param data: An array-like.
    :param dtype: The ``numpy`` dtype to use (optional). Defaults to the \
            dtype of ``data`` if it is a floating-point array, ``float32`` \
            otherwise.
    """
    if isinstance(data, Tensor):
        return data
    array = np.asarray(data)
    if dtype is None:
        dtype = array.dtype if array.dtype.kind == "f" else np.float32
    return Tensor(array.astype(dtype, copy=False))


def tape_of(*tensors):
    """
    :returns: The tape of the first attached tensor, ``None`` if all of \
            them are constants.
    """
    for tensor in tensors:
        if tensor.tape is not None:
            return tensor.tape
    return None


def make_output(data, inputs, backward, op):
    """
    Build the output of an operation and record it if needed.

    :param data: The output array.
    :param inputs: The input tensors.
    :param backward: The backward closure (see :meth:`Tape.record`).
    :param op: Name of the operation, for error messages.
    :returns: The output :class:`Tensor`.
    """
    _check_finite(data, op)
    tape = tape_of(*inputs)
    out = Tensor(data, tape=tape)
    if tape is not None:
        tape.record(inputs, (out,), backward)
    return out


def _check_finite(data, op):
    if not np.all(np.isfinite(data)):
        raise exc.NumericalError("Non-finite value produced by %s." % op)


def _unbroadcast(grad, shape):
    """
    Sum a gradient back to the shape of a broadcast operand.
    """
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


##############
# Operations #
##############
def matmul(a, b):
    """
    Matrix product.

    :param a: A :class:`Tensor` of shape ``[m, k]`` or ``[k]``.
    :param b: A :class:`Tensor` of shape ``[k, n]``.
    :returns: A :class:`Tensor` of shape ``[m, n]`` (or ``[n]``).

    >>> matmul(constant([[1, 2], [3, 4]]), constant([[5], [6]])).data
    array([[17.], [39.]], dtype=float32)
    """
    a, b = constant(a), constant(b)
    if b.data.ndim != 2 or a.data.ndim not in (1, 2):
        raise exc.DimensionError(
            "matmul expects [m, k] x [k, n], got %s x %s." % (a.shape,
                                                               b.shape))
    if a.shape[-1] != b.shape[0]:
        raise exc.DimensionError(
            "matmul inner dimensions differ: %s x %s." % (a.shape, b.shape))

    def backward(grad):
        grad_a = grad @ b.data.T
        if a.data.ndim == 1:
            grad_b = np.outer(a.data, grad)
        else:
            grad_b = a.data.T @ grad
        return (grad_a, grad_b)

    return make_output(a.data @ b.data, (a, b), backward, "matmul")


def add(a, b):
    """
    Elementwise sum, ``b`` may be broadcast against ``a`` (e.g. a bias \
            vector added to every row of a matrix).
    """
    a, b = constant(a), constant(b)
    try:
        data = a.data + b.data
    except ValueError:
        raise exc.DimensionError(
            "Cannot add shapes %s and %s." % (a.shape, b.shape))
    if data.shape != a.shape:
        raise exc.DimensionError(
            "Cannot add shapes %s and %s." % (a.shape, b.shape))

    def backward(grad):
        return (grad, _unbroadcast(grad, b.shape))

    return make_output(data, (a, b), backward, "add")


def mul(a, b):
    """
    Elementwise product of two tensors of the same shape.
    """
    a, b = constant(a), constant(b)
    if a.shape != b.shape:
        raise exc.DimensionError(
            "Cannot multiply shapes %s and %s." % (a.shape, b.shape))

    def backward(grad):
        return (grad * b.data, grad * a.data)

    return make_output(a.data * b.data, (a, b), backward, "mul")


def scale(x, factor):
    """
    Multiply a tensor by a Python scalar.
    """
    x = constant(x)
    factor = float(factor)

    def backward(grad):
        return (grad * factor,)

    return make_output((x.data * factor).astype(x.data.dtype), (x,),
                       backward, "scale")


def activation(x, kind):
    """
    Elementwise nonlinearity.

    :param x: A :class:`Tensor`.
    :param kind: One of ``sigmoid``, ``tanh`` or ``relu``.

    >>> activation(constant([0.]), "sigmoid").data
    array([0.5], dtype=float32)
    """
    x = constant(x)
    if kind == "sigmoid":
        out = special.expit(x.data)

        def backward(grad):
            return (grad * out * (1 - out),)
    elif kind == "tanh":
        out = np.tanh(x.data)

        def backward(grad):
            return (grad * (1 - out * out),)
    elif kind == "relu":
        out = np.maximum(x.data, 0)

        def backward(grad):
            return (grad * (x.data > 0),)
    else:
        raise exc.InvalidParameterError(
            "Unknown activation '%s', expected one of %s." % (kind,
                                                               ACTIVATIONS))
    return make_output(out.astype(x.data.dtype, copy=False), (x,), backward,
                       kind)


def concat(tensors, axis=-1):
    """
    Concatenate tensors along ``axis``.
    """
    tensors = [constant(t) for t in tensors]
    if len(tensors) == 0:
        raise exc.DimensionError("Cannot concatenate an empty list.")
    try:
        data = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError as err:
        raise exc.DimensionError("Cannot concatenate: %s" % err)
    sizes = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def backward(grad):
        return tuple(np.split(grad, sizes, axis=axis))

    return make_output(data, tuple(tensors), backward, "concat")


def stack(tensors):
    """
    Stack vectors of the same size as the rows of a matrix.
    """
    tensors = [constant(t) for t in tensors]
    if len(tensors) == 0:
        raise exc.DimensionError("Cannot stack an empty list.")
    try:
        data = np.stack([t.data for t in tensors])
    except ValueError as err:
        raise exc.DimensionError("Cannot stack: %s" % err)

    def backward(grad):
        return tuple(grad[i] for i in range(grad.shape[0]))

    return make_output(data, tuple(tensors), backward, "stack")


def row(x, index):
    """
    Take row ``index`` of a matrix.
    """
    x = constant(x)

    def backward(grad):
        full = np.zeros_like(x.data)
        full[index] = grad
        return (full,)

    return make_output(x.data[index], (x,), backward, "row")


def tile_rows(v, n):
    """
    Repeat a vector as the ``n`` rows of a matrix.
    """
    v = constant(v)

    def backward(grad):
        return (grad.sum(axis=0),)

    return make_output(np.tile(v.data, (n, 1)), (v,), backward, "tile_rows")


def mean_rows(x):
    """
    Average the rows of a matrix (f64 accumulation).
    """
    x = constant(x)
    n = x.shape[0]
    data = x.data.mean(axis=0, dtype=np.float64).astype(x.data.dtype)

    def backward(grad):
        return (np.tile(grad / n, (n, 1)).astype(x.data.dtype),)

    return make_output(data, (x,), backward, "mean_rows")


def total(tensors):
    """
    Sum a list of scalar tensors (f64 accumulation).
    """
    tensors = [constant(t) for t in tensors]
    if len(tensors) == 0:
        raise exc.DimensionError("Cannot sum an empty list.")
    dtype = tensors[0].data.dtype
    value = np.sum([t.data.sum(dtype=np.float64) for t in tensors],
                   dtype=np.float64)
    data = np.asarray(value, dtype=dtype)

    def backward(grad):
        return tuple(np.full_like(t.data, grad) for t in tensors)

    return make_output(data, tuple(tensors), backward, "total")


def softmax(logits):
    """
    Numerically stable softmax over the last axis.

    :param logits: A :class:`Tensor` of shape ``[T]`` (or ``[n, T]``).
    :returns: A :class:`Tensor` of probabilities of the same shape.

    >>> softmax(constant([1000., 0.])).data
    array([1., 0.], dtype=float32)
    """
    logits = constant(logits)
    if logits.data.size == 0 or logits.shape[-1] == 0:
        raise exc.DimensionError("softmax of an empty tensor.")
    probs = special.softmax(logits.data.astype(np.float64), axis=-1)
    probs = probs.astype(logits.data.dtype)

    def backward(grad):
        inner = (grad * probs).sum(axis=-1, keepdims=True)
        return (probs * (grad - inner),)

    return make_output(probs, (logits,), backward, "softmax")


def cross_entropy(probs, y_onehot):
    """
    Cross-entropy ``-sum(y * log(p))`` between a distribution and a one-hot \
            target, with ``p`` floored at ``1e-12`` inside the log.

    :param probs: A :class:`Tensor` of shape ``[T]``.
    :param y_onehot: An array-like one-hot vector of shape ``[T]``.
    :returns: A scalar :class:`Tensor`.

    >>> cross_entropy(constant([0.9, 0.1]), [1, 0]).item()
    0.1053...
    """
    probs = constant(probs)
    target = np.asarray(y_onehot, dtype=np.float64)
    if target.shape != probs.shape:
        raise exc.DimensionError(
            "Target shape %s does not match %s." % (target.shape,
                                                    probs.shape))
    if (not np.all((target == 0) | (target == 1)) or
            target.sum() != 1):
        raise exc.InvalidParameterError("Target is not one-hot.")
    floored = np.maximum(probs.data.astype(np.float64), constants.LOG_FLOOR)
    value = -np.sum(target * np.log(floored))
    data = np.asarray(value, dtype=probs.data.dtype)

    def backward(grad):
        local = np.where(probs.data > constants.LOG_FLOOR,
                         -target / floored, 0.0)
        return ((grad * local).astype(probs.data.dtype),)

    return make_output(data, (probs,), backward, "cross_entropy")


def softmax_cross_entropy(logits, targets):
    """
    Fused softmax and cross-entropy against class indices, summed over \
            rows. Equivalent to ``cross_entropy(softmax(logits), onehot)`` \
            with a simpler gradient ``p - y``.

    :param logits: A :class:`Tensor` of shape ``[T]`` or ``[n, T]``.
    :param targets: A class index, or a sequence of ``n`` class indices.
    :returns: A scalar :class:`Tensor`.
    """
    logits = constant(logits)
    matrix = np.atleast_2d(logits.data).astype(np.float64)
    targets = np.atleast_1d(np.asarray(targets, dtype=np.int64))
    if targets.shape[0] != matrix.shape[0]:
        raise exc.DimensionError(
            "%d targets for %d rows of logits." % (targets.shape[0],
                                                   matrix.shape[0]))
    if np.any(targets < 0) or np.any(targets >= matrix.shape[1]):
        raise exc.InvalidParameterError("Target class out of range.")
    log_probs = special.log_softmax(matrix, axis=-1)
    rows = np.arange(matrix.shape[0])
    picked = np.maximum(np.exp(log_probs[rows, targets]), constants.LOG_FLOOR)
    data = np.asarray(-np.log(picked).sum(), dtype=logits.data.dtype)

    def backward(grad):
        local = np.exp(log_probs)
        local[rows, targets] -= 1.0
        local = (grad * local).astype(logits.data.dtype)
        return (local.reshape(logits.shape),)

    return make_output(data, (logits,), backward, "softmax_cross_entropy")
