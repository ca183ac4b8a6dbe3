"""
Neural building blocks of the classifier: embedding lookup, LSTM cell, \
        bidirectional encoder, multiscale n-gram convolution with \
        max-pooling, gate-attention and MLP heads.

Each block is a small description object (parameter name prefix and sizes).
``init`` adds its parameters to a :class:`mgtc.nn.params.ParamStore`, the
forward methods read them through a :class:`mgtc.nn.params.Binding`, so the
same block runs with or without a gradient tape.
"""
import logging

import numpy as np
from scipy import special

from mgtc import constants
from mgtc import exceptions as exc
from mgtc.nn import tensor as T

logger = logging.getLogger(__name__)

GATES = ("i", "f", "o", "c")


#############
# Embedding #
#############
class EmbeddingTable():
    """
    Token-index to vector lookup.
    """
    def __init__(self, prefix, vocab_size, dim=100, trainable=True,
                 oov_index=constants.OOV_INDEX):
        if vocab_size <= oov_index:
            raise exc.InvalidParameterError(
                "Vocabulary of size %d has no OOV row." % vocab_size)
        self.prefix = prefix
        self.vocab_size = vocab_size
        self.dim = dim
        self.trainable = trainable
        self.oov_index = oov_index

    @property
    def name(self):
        return self.prefix + ".matrix"

    def init(self, store, matrix=None):
        """
        Add the table to ``store``, either randomly initialized or from a \
                pretrained ``[vocab_size, dim]`` matrix.
        """
        if matrix is None:
            store.glorot(self.name, (self.vocab_size, self.dim),
                         trainable=self.trainable)
        else:
            if matrix.shape != (self.vocab_size, self.dim):
                raise exc.DimensionError(
                    "Pretrained matrix has shape %s, expected %s." % (
                        matrix.shape, (self.vocab_size, self.dim)))
            store.add(self.name, matrix, trainable=self.trainable)

    def embed(self, bound, tokens):
        """
        Look up a sentence.

        :param bound: A :class:`mgtc.nn.params.Binding`.
        :param tokens: A list of token indices. Out-of-range indices are \
                read as the OOV row.
        :returns: A :class:`Tensor` of shape ``[n, dim]``.
        """
        matrix = bound[self.name]
        indices = np.asarray(tokens, dtype=np.int64).reshape(-1)
        indices = np.where((indices < 0) | (indices >= self.vocab_size),
                           self.oov_index, indices)

        def backward(grad):
            full = np.zeros_like(matrix.data)
            np.add.at(full, indices, grad)
            return (full,)

        return T.make_output(matrix.data[indices], (matrix,), backward,
                             "embed")


def load_pretrained(path, vocab, dim, rng):
    """
    Read static word vectors in the whitespace text format \
            ``token v1 ... vdim`` (one token per line, with an optional \
            ``count dim`` header line).

    :param path: Path to the vectors file.
    :param vocab: The :class:`mgtc.corpus.vocab.Vocab` to build rows for.
    :param dim: Expected vector size.
    :param rng: A ``numpy.random.Generator`` for vocabulary tokens missing \
            from the file.
    :returns: A ``float32`` matrix of shape ``[len(vocab), dim]``. The pad \
            row is zero, the OOV row is the mean of the loaded vectors.
    """
    bound = np.sqrt(6.0 / (len(vocab) + dim))
    matrix = rng.uniform(-bound, bound, size=(len(vocab), dim))
    found = np.zeros(len(vocab), dtype=bool)
    loaded = []
    with open(path, encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            parts = line.rstrip().split()
            if not parts:
                continue
            if line_number == 1 and len(parts) == 2 and all(
                    p.isdigit() for p in parts):
                # Header line
                continue
            if len(parts) != dim + 1:
                raise exc.InvalidParameterError(
                    "%s line %d: expected %d values, got %d." % (
                        path, line_number, dim, len(parts) - 1))
            vector = np.asarray(parts[1:], dtype=np.float64)
            loaded.append(vector)
            index = vocab.index.get(parts[0])
            if index is not None and index > constants.OOV_INDEX:
                matrix[index] = vector
                found[index] = True
    matrix[constants.PAD_INDEX] = 0.0
    if loaded:
        matrix[constants.OOV_INDEX] = np.mean(loaded, axis=0)
    logger.info("Pretrained vectors cover %d of %d vocabulary entries",
                int(found.sum()), len(vocab) - 2)
    return matrix.astype(np.float32)


########
# LSTM #
########
class LstmCell():
    """
    One direction of an LSTM: input weights ``U_*`` of shape \
            ``[dim, hid]``, recurrent weights ``W_*`` of shape \
            ``[hid, hid]`` and biases ``b_*`` for the input, forget, output \
            and candidate gates.
    """
    def __init__(self, prefix, input_dim, hid):
        self.prefix = prefix
        self.input_dim = input_dim
        self.hid = hid

    def names(self):
        return ([self.prefix + ".U_" + g for g in GATES] +
                [self.prefix + ".W_" + g for g in GATES] +
                [self.prefix + ".b_" + g for g in GATES])

    def init(self, store):
        for gate in GATES:
            store.glorot(self.prefix + ".U_" + gate,
                         (self.input_dim, self.hid))
        for gate in GATES:
            store.glorot(self.prefix + ".W_" + gate, (self.hid, self.hid))
        for gate in GATES:
            fill = constants.FORGET_BIAS if gate == "f" else 0.0
            store.fill(self.prefix + ".b_" + gate, (self.hid,), fill)

    def step(self, bound, x_t, h_prev, c_prev):
        """
        :returns: The ``(h_t, c_t)`` tensors after reading ``x_t``.
        """
        return lstm_step(x_t, h_prev, c_prev,
                         [bound[name] for name in self.names()])


def lstm_step(x_t, h_prev, c_prev, params):
    """
    One LSTM step, recorded as a single operation::

        i = sigmoid(U_i x + W_i h_prev + b_i)      (f, o alike)
        c = f * c_prev + i * tanh(U_c x + W_c h_prev + b_c)
        h = o * tanh(c)

    :param x_t: Input :class:`Tensor` of shape ``[dim]``.
    :param h_prev: Previous hidden state, shape ``[hid]``.
    :param c_prev: Previous cell state, shape ``[hid]``.
    :param params: The twelve tensors ``U_i, U_f, U_o, U_c, W_i, W_f, W_o, \
            W_c, b_i, b_f, b_o, b_c``.
    :returns: A tuple ``(h_t, c_t)``.
    """
    x_t, h_prev, c_prev = T.constant(x_t), T.constant(h_prev), \
        T.constant(c_prev)
    us, ws, bs = params[0:4], params[4:8], params[8:12]
    hid = ws[0].shape[0]
    if x_t.shape != (us[0].shape[0],):
        raise exc.DimensionError(
            "LSTM input has shape %s, expected (%d,)." % (x_t.shape,
                                                          us[0].shape[0]))
    if h_prev.shape != (hid,) or c_prev.shape != (hid,):
        raise exc.DimensionError(
            "LSTM state has shape %s/%s, expected (%d,)." % (
                h_prev.shape, c_prev.shape, hid))

    pre = [x_t.data @ u.data + h_prev.data @ w.data + b.data
           for u, w, b in zip(us, ws, bs)]
    i = special.expit(pre[0])
    f = special.expit(pre[1])
    o = special.expit(pre[2])
    g = np.tanh(pre[3])
    c = f * c_prev.data + i * g
    tanh_c = np.tanh(c)
    h = o * tanh_c
    T._check_finite(h, "lstm_step")

    def backward(grad_h, grad_c):
        d_o = grad_h * tanh_c
        d_c = grad_c + grad_h * o * (1 - tanh_c * tanh_c)
        d_pre = [d_c * g * i * (1 - i),
                 d_c * c_prev.data * f * (1 - f),
                 d_o * o * (1 - o),
                 d_c * i * (1 - g * g)]
        d_x = sum(d @ u.data.T for d, u in zip(d_pre, us))
        d_h = sum(d @ w.data.T for d, w in zip(d_pre, ws))
        d_us = [np.outer(x_t.data, d) for d in d_pre]
        d_ws = [np.outer(h_prev.data, d) for d in d_pre]
        return tuple([d_x, d_h, d_c * f] + d_us + d_ws + list(d_pre))

    inputs = (x_t, h_prev, c_prev) + tuple(params)
    tape = T.tape_of(*inputs)
    h_out = T.Tensor(h.astype(x_t.data.dtype, copy=False), tape=tape)
    c_out = T.Tensor(c.astype(x_t.data.dtype, copy=False), tape=tape)
    if tape is not None:
        tape.record(inputs, (h_out, c_out), backward)
    return h_out, c_out


class BiLstmEncoder():
    """
    Forward and backward LSTM passes over a sentence, concatenated per \
            position.
    """
    def __init__(self, prefix, input_dim, hid):
        self.prefix = prefix
        self.hid = hid
        self.forward_cell = LstmCell(prefix + ".fwd", input_dim, hid)
        self.backward_cell = LstmCell(prefix + ".bwd", input_dim, hid)

    @property
    def output_dim(self):
        return 2 * self.hid

    def init(self, store):
        self.forward_cell.init(store)
        self.backward_cell.init(store)

    def run(self, bound, cell, seq, order):
        """
        Run one direction over the rows of ``seq`` visited in ``order``.

        :returns: The hidden states, indexed by sentence position.
        """
        h = bound.zeros((self.hid,))
        c = bound.zeros((self.hid,))
        states = [None] * len(order)
        for position in order:
            h, c = cell.step(bound, T.row(seq, position), h, c)
            states[position] = h
        return states

    def encode(self, bound, seq, summary="final"):
        """
        Encode a sentence.

        :param bound: A :class:`mgtc.nn.params.Binding`.
        :param seq: A :class:`Tensor` of shape ``[n, dim]``.
        :param summary: ``final`` to summarize the sentence as the \
                concatenated final states of both directions, ``mean`` to \
                average the per-position states.
        :returns: A tuple ``(states, summary_vector)``, ``states`` of shape \
                ``[n, 2 * hid]``.
        """
        n = seq.shape[0]
        if n == 0:
            raise exc.InvalidParameterError("Cannot encode an empty sequence.")
        forward = self.run(bound, self.forward_cell, seq, range(n))
        backward = self.run(bound, self.backward_cell, seq,
                            range(n - 1, -1, -1))
        states = T.concat([T.stack(forward), T.stack(backward)], axis=1)
        if summary == "final":
            vector = T.concat([forward[-1], backward[0]])
        elif summary == "mean":
            vector = T.mean_rows(states)
        else:
            raise exc.InvalidParameterError(
                "Unknown summary '%s', expected final or mean." % summary)
        return states, vector


###############
# Convolution #
###############
class ConvFilterBank():
    """
    Filters over windows of ``h`` consecutive word vectors, for every \
            ``h`` in ``window_sizes``, each followed by max-pooling over \
            the sentence.
    """
    def __init__(self, prefix, window_sizes=(1, 2, 3), filters_per_size=32,
                 input_dim=100):
        if len(window_sizes) == 0 or min(window_sizes) < 1:
            raise exc.InvalidParameterError(
                "Window sizes must be positive, got %s." % (window_sizes,))
        self.prefix = prefix
        self.window_sizes = tuple(sorted(set(window_sizes)))
        self.filters_per_size = filters_per_size
        self.input_dim = input_dim

    @property
    def output_dim(self):
        return self.filters_per_size * len(self.window_sizes)

    def init(self, store):
        for size in self.window_sizes:
            store.glorot("%s.w%d" % (self.prefix, size),
                         (size * self.input_dim, self.filters_per_size))
            store.fill("%s.b%d" % (self.prefix, size),
                       (self.filters_per_size,))

    def feature_maps(self, bound, seq):
        """
        :returns: One pooled :class:`Tensor` of shape \
                ``[filters_per_size]`` per window size.
        """
        return [ngram_max_pool(seq,
                               bound["%s.w%d" % (self.prefix, size)],
                               bound["%s.b%d" % (self.prefix, size)],
                               size)
                for size in self.window_sizes]

    def forward(self, bound, seq):
        """
        :returns: The pooled features of every window size, concatenated.
        """
        return T.concat(self.feature_maps(bound, seq))


def conv_ngram(bound, seq, bank):
    """
    Apply a :class:`ConvFilterBank` to a sentence.

    :returns: A :class:`Tensor` of shape ``[filters * len(window_sizes)]``.
    """
    return bank.forward(bound, seq)


def ngram_max_pool(seq, weight, bias, size):
    """
    ``max_j sigmoid(w . [x_j, ..., x_{j+size-1}] + b)`` for every filter, \
            recorded as a single operation. Sentences shorter than \
            ``size`` are right-padded with zero vectors.

    :param seq: A :class:`Tensor` of shape ``[n, k]``.
    :param weight: Filters, shape ``[size * k, filters]``.
    :param bias: One bias per filter, shape ``[filters]``.
    :param size: The window size.
    :returns: A :class:`Tensor` of shape ``[filters]``.
    """
    seq = T.constant(seq)
    n, k = seq.shape
    if weight.shape[0] != size * k:
        raise exc.DimensionError(
            "Filters of shape %s do not fit windows of %d x %d." % (
                weight.shape, size, k))
    padded = seq.data
    if n < size:
        padded = np.concatenate(
            [padded, np.zeros((size - n, k), dtype=padded.dtype)])
    windows = padded.shape[0] - size + 1
    stacked = np.concatenate([padded[j:j + windows] for j in range(size)],
                             axis=1)
    act = special.expit(stacked @ weight.data + bias.data)
    best = np.argmax(act, axis=0)
    columns = np.arange(act.shape[1])
    pooled = act[best, columns]

    def backward(grad):
        d_act = np.zeros_like(act)
        d_act[best, columns] = grad * pooled * (1 - pooled)
        d_weight = stacked.T @ d_act
        d_bias = d_act.sum(axis=0)
        d_stacked = d_act @ weight.data.T
        d_padded = np.zeros_like(padded)
        for j in range(size):
            d_padded[j:j + windows] += d_stacked[:, j * k:(j + 1) * k]
        return (d_padded[:n], d_weight, d_bias)

    return T.make_output(pooled.astype(seq.data.dtype, copy=False),
                         (seq, weight, bias), backward, "ngram_max_pool")


##################
# Gate attention #
##################
class GateFusion():
    """
    Elementwise soft feature selection ``sigmoid(z W + b) * z``.
    """
    def __init__(self, prefix, dim):
        self.prefix = prefix
        self.dim = dim

    def init(self, store):
        store.glorot(self.prefix + ".W", (self.dim, self.dim))
        store.fill(self.prefix + ".b", (self.dim,))

    def forward(self, bound, z):
        return gate_attention(z, bound[self.prefix + ".W"],
                              bound[self.prefix + ".b"])


def gate_attention(z, weight, bias):
    """
    Gate a representation: ``g = sigmoid(z W + b)``, returns ``g * z``. \
            The caller concatenates the result with its other features.

    :param z: A :class:`Tensor` of shape ``[d]`` (or ``[n, d]`` to gate \
            every row).
    :param weight: ``[d, d]`` gate weights.
    :param bias: ``[d]`` gate bias.
    """
    z = T.constant(z)
    if weight.shape != (z.shape[-1], z.shape[-1]):
        raise exc.DimensionError(
            "Gate of shape %s cannot gate a vector of size %d." % (
                weight.shape, z.shape[-1]))
    gate = T.activation(T.add(T.matmul(z, weight), bias), "sigmoid")
    return T.mul(gate, z)


#############
# MLP heads #
#############
class MlpHead():
    """
    Fully connected layers with ReLU between them. With ``layers = 2`` it \
            computes ``W_2 relu(W_1 v + b_1) + b_2``.
    """
    def __init__(self, prefix, input_dim, out_classes, layers=2, hidden=64,
                 zero_output=False):
        if layers < 1:
            raise exc.InvalidParameterError("An MLP needs at least one layer.")
        if out_classes < 2:
            raise exc.InvalidParameterError(
                "An MLP head needs at least two output classes.")
        self.prefix = prefix
        self.layer_dims = [input_dim] + [hidden] * (layers - 1) + [out_classes]
        self.out_classes = out_classes
        self.zero_output = zero_output

    @property
    def hidden_dim(self):
        """
        Size of the input of the output layer.
        """
        return self.layer_dims[-2]

    def init(self, store):
        """
        Add the parameters to ``store``. With ``zero_output`` the output \
                layer starts at zero, so the head first predicts the uniform \
                distribution whatever its input.
        """
        last = len(self.layer_dims) - 1
        for layer, (fan_in, fan_out) in enumerate(
                zip(self.layer_dims[:-1], self.layer_dims[1:]), start=1):
            name = "%s.W_%d" % (self.prefix, layer)
            if self.zero_output and layer == last:
                store.fill(name, (fan_in, fan_out))
            else:
                store.glorot(name, (fan_in, fan_out))
            store.fill("%s.b_%d" % (self.prefix, layer), (fan_out,))

    def forward(self, bound, v):
        """
        :param v: Input :class:`Tensor` of shape ``[d]`` or ``[n, d]``.
        :returns: A tuple ``(logits, last_hidden)`` where ``last_hidden`` \
                is the input of the output layer.
        """
        return mlp_forward(v, self.parameters(bound))

    def parameters(self, bound):
        layers = len(self.layer_dims) - 1
        return [(bound["%s.W_%d" % (self.prefix, layer)],
                 bound["%s.b_%d" % (self.prefix, layer)])
                for layer in range(1, layers + 1)]


def mlp_forward(v, layers):
    """
    :param v: Input :class:`Tensor`.
    :param layers: A list of ``(W, b)`` tensor pairs.
    :returns: A tuple ``(logits, last_hidden)``.
    """
    hidden = T.constant(v)
    for weight, bias in layers[:-1]:
        hidden = T.activation(T.add(T.matmul(hidden, weight), bias), "relu")
    weight, bias = layers[-1]
    return T.add(T.matmul(hidden, weight), bias), hidden
