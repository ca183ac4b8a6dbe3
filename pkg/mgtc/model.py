"""
The multi-grained text classifier.

The coarse model shares one sentence encoder between two heads::

    z_c  = [ BiLSTM(x) , gate_1(conv_1(x)), ..., gate_H(conv_H(x)) ]
    ST1  = MLP_1(z_c)                       (ACTION / STATEMENT)
    z_s  = last hidden layer of MLP_1
    ST2  = MLP_2([z_c, gate(z_s) * z_s])    (5 control semantics)

The fine model adds a word-level head fed by the transferred sentence-level
features::

    ST3  = MLP_3([z_s, gate(z_w) * z_w])    (one of 4 roles per word)

where ``z_w`` is the embedding row of the word (or its Bi-LSTM state).
"""
import copy
import json
import logging
from dataclasses import asdict, dataclass, fields

import numpy as np

from mgtc import constants
from mgtc import exceptions as exc
from mgtc import layers
from mgtc.corpus.model import (SENTENCE_SEMANTICS, SENTENCE_TYPES, WORD_TAGS,
                               Sentence, WordTag, action, statement)
from mgtc.corpus.vocab import Vocab
from mgtc.nn import checkpoint
from mgtc.nn import gradcheck
from mgtc.nn import tensor as T
from mgtc.nn.params import Binding, ParamStore

logger = logging.getLogger(__name__)

SUMMARIES = ("final", "mean")
WORD_REPRS = ("embedding", "bilstm")

# Parameter groups, by name prefix
SHARED_PREFIXES = ("embedding.", "encoder.", "conv.", "fusion.", "st1_head.")
COARSE_ONLY_PREFIXES = ("st1_to_st2_gate.", "st2_head.")
FINE_PREFIXES = ("word_gate.", "st3_head.")

# Hyperparameters fixed by the sentence-level checkpoint
SHARED_ARCHITECTURE = ("embed_dim", "hid", "window_sizes", "filters_per_size",
                       "mlp_layers", "mlp_hidden", "summary", "use_gate")

_DEFAULTS = constants.DEFAULT_HYPERPARAMS


@dataclass(frozen=True)
class HyperParams():
    """
    Model and training hyperparameters. Validated at construction.
    """
    embed_dim: int = _DEFAULTS["embed_dim"]
    hid: int = _DEFAULTS["hid"]
    window_sizes: tuple = _DEFAULTS["window_sizes"]
    filters_per_size: int = _DEFAULTS["filters_per_size"]
    mlp_layers: int = _DEFAULTS["mlp_layers"]
    mlp_hidden: int = _DEFAULTS["mlp_hidden"]
    lambda1: float = _DEFAULTS["lambda1"]
    lambda2: float = _DEFAULTS["lambda2"]
    batch: int = _DEFAULTS["batch"]
    lr: float = _DEFAULTS["lr"]
    iterations: int = _DEFAULTS["iterations"]
    seed: int = _DEFAULTS["seed"]
    summary: str = _DEFAULTS["summary"]
    word_repr: str = _DEFAULTS["word_repr"]
    use_gate: bool = _DEFAULTS["use_gate"]

    def __post_init__(self):
        object.__setattr__(self, "window_sizes",
                           tuple(int(size) for size in self.window_sizes))
        for name in ("embed_dim", "hid", "filters_per_size", "mlp_layers",
                     "mlp_hidden", "batch", "iterations"):
            if getattr(self, name) < 1:
                raise exc.InvalidParameterError(
                    "%s must be at least 1, got %s." % (name,
                                                        getattr(self, name)))
        if not self.window_sizes or min(self.window_sizes) < 1:
            raise exc.InvalidParameterError(
                "Window sizes must be positive, got %s." % (
                    self.window_sizes,))
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise exc.InvalidParameterError("Loss weights must be >= 0.")
        if abs(self.lambda1 + self.lambda2 - 1.0) > 1e-9:
            raise exc.InvalidParameterError(
                "Loss weights must sum to 1, got %s + %s." % (self.lambda1,
                                                              self.lambda2))
        if self.lr <= 0:
            raise exc.InvalidParameterError("Learning rate must be positive.")
        if self.summary not in SUMMARIES:
            raise exc.InvalidParameterError(
                "Unknown summary '%s', expected one of %s." % (self.summary,
                                                               SUMMARIES))
        if self.word_repr not in WORD_REPRS:
            raise exc.InvalidParameterError(
                "Unknown word representation '%s', expected one of %s." % (
                    self.word_repr, WORD_REPRS))

    def to_dict(self):
        obj = asdict(self)
        obj["window_sizes"] = list(self.window_sizes)
        return obj

    @classmethod
    def from_dict(cls, obj):
        unknown = set(obj) - {f.name for f in fields(cls)}
        if unknown:
            raise exc.InvalidParameterError(
                "Unknown hyperparameters: %s." % ", ".join(sorted(unknown)))
        return cls(**obj)


class Encoding():
    """
    Shared features of one sentence, read by every head.

    :param bound: The :class:`mgtc.nn.params.Binding` used to compute them.
    :param seq: Embedded words, ``[n, embed_dim]``.
    :param states: Bi-LSTM states, ``[n, 2 * hid]``.
    :param z_c: Fused sentence representation.
    """
    def __init__(self, bound, seq, states, z_c):
        self.bound = bound
        self.seq = seq
        self.states = states
        self.z_c = z_c


def _tokens_of(sentence):
    if isinstance(sentence, Sentence):
        return sentence.tokens
    return tuple(sentence)


class CoarseModel():
    """
    Sentence-level model: ST1 and ST2 heads on a shared encoder.
    """
    phase = "coarse"

    def __init__(self, hp, vocab, store=None, embeddings=None,
                 freeze_embedding=False):
        """
        Build a model.

        :param hp: The :class:`HyperParams`.
        :param vocab: The :class:`mgtc.corpus.vocab.Vocab` of the corpus.
        :param store: An existing :class:`ParamStore` (optional). A fresh \
                one seeded with ``hp.seed`` is initialized otherwise.
        :param embeddings: A pretrained ``[len(vocab), embed_dim]`` matrix \
                (optional).
        :param freeze_embedding: Keep the embedding table constant.
        """
        self.hp = hp
        self.vocab = vocab
        self.freeze_embedding = freeze_embedding
        self._build()
        if store is None:
            store = ParamStore(hp.seed)
            self._init_params(store, embeddings)
        self.store = store

    def _build(self):
        hp = self.hp
        self.embedding = layers.EmbeddingTable(
            "embedding", len(self.vocab), hp.embed_dim,
            trainable=not self.freeze_embedding)
        self.encoder = layers.BiLstmEncoder("encoder", hp.embed_dim, hp.hid)
        self.conv = layers.ConvFilterBank("conv", hp.window_sizes,
                                          hp.filters_per_size, hp.embed_dim)
        self.fusions = [layers.GateFusion("fusion.conv%d" % size,
                                          hp.filters_per_size)
                        for size in self.conv.window_sizes]
        self.z_dim = self.encoder.output_dim + self.conv.output_dim
        self.st1_head = layers.MlpHead("st1_head", self.z_dim,
                                       len(SENTENCE_TYPES), hp.mlp_layers,
                                       hp.mlp_hidden)
        self.zs_dim = self.st1_head.hidden_dim
        self.st1_to_st2_gate = layers.GateFusion("st1_to_st2_gate",
                                                 self.zs_dim)
        self.st2_head = layers.MlpHead("st2_head", self.z_dim + self.zs_dim,
                                       len(SENTENCE_SEMANTICS), hp.mlp_layers,
                                       hp.mlp_hidden)

    def _init_params(self, store, embeddings=None):
        self.embedding.init(store, embeddings)
        self.encoder.init(store)
        self.conv.init(store)
        if self.hp.use_gate:
            for fusion in self.fusions:
                fusion.init(store)
        self.st1_head.init(store)
        if self.hp.use_gate:
            self.st1_to_st2_gate.init(store)
        self.st2_head.init(store)
        logger.debug("Initialized %d coarse parameters (%d coordinates)",
                     len(store), store.size())

    def using(self, store):
        """
        :returns: The same model reading its parameters from ``store``.
        """
        clone = copy.copy(self)
        clone.store = store
        return clone

    ###########
    # Forward #
    ###########
    def encode(self, sentence, tape=None):
        """
        Compute the shared features of a sentence.

        :param sentence: A :class:`Sentence` or a list of tokens.
        :param tape: A :class:`mgtc.nn.tensor.Tape` to record on \
                (optional).
        :returns: An :class:`Encoding`.
        """
        tokens = _tokens_of(sentence)
        if len(tokens) == 0:
            raise exc.InvalidParameterError(
                "Cannot classify an empty sentence.")
        bound = Binding(self.store, tape)
        seq = self.embedding.embed(bound, self.vocab.encode(tokens))
        states, z_t = self.encoder.encode(bound, seq, self.hp.summary)
        parts = [z_t]
        for fusion, feature in zip(self.fusions,
                                   self.conv.feature_maps(bound, seq)):
            parts.append(fusion.forward(bound, feature) if self.hp.use_gate
                         else feature)
        return Encoding(bound, seq, states, T.concat(parts))

    def _encoding(self, sentence):
        if isinstance(sentence, Encoding):
            return sentence
        return self.encode(sentence)

    def forward_st1(self, sentence):
        """
        :param sentence: An :class:`Encoding`, a :class:`Sentence` or a \
                list of tokens.
        :returns: A tuple ``(logits, z_s)``: logits over ACTION/STATEMENT \
                and the last hidden features of the ST1 head.
        """
        encoding = self._encoding(sentence)
        return self.st1_head.forward(encoding.bound, encoding.z_c)

    def forward_st2(self, sentence, st1_hidden):
        """
        :param sentence: An :class:`Encoding`, a :class:`Sentence` or a \
                list of tokens.
        :param st1_hidden: ``z_s`` of the same sentence.
        :returns: Logits over the five control semantics.
        """
        encoding = self._encoding(sentence)
        st1_hidden = T.constant(st1_hidden)
        if st1_hidden.shape != (self.zs_dim,):
            raise exc.DimensionError(
                "ST1 hidden features have shape %s, expected (%d,)." % (
                    st1_hidden.shape, self.zs_dim))
        if self.hp.use_gate:
            st1_hidden = self.st1_to_st2_gate.forward(encoding.bound,
                                                      st1_hidden)
        logits, _ = self.st2_head.forward(
            encoding.bound, T.concat([encoding.z_c, st1_hidden]))
        return logits

    ##########
    # Losses #
    ##########
    def coarse_loss(self, batch, tape=None, lambdas=None):
        """
        ``lambda1 * sum CE(ST1) + lambda2 * sum CE(ST2)``, the ST2 terms \
                taken over STATEMENT sentences only.

        :param batch: A list of labeled :class:`Sentence`.
        :param tape: A tape to record on (optional).
        :param lambdas: A ``(lambda1, lambda2)`` pair overriding the \
                hyperparameters (optional).
        :returns: A scalar :class:`mgtc.nn.tensor.Tensor`.
        """
        if len(batch) == 0:
            raise exc.InvalidParameterError("Cannot compute a loss on an "
                                            "empty batch.")
        lambda1, lambda2 = lambdas or (self.hp.lambda1, self.hp.lambda2)
        terms = []
        for sentence in batch:
            encoding = self.encode(sentence, tape)
            logits, z_s = self.forward_st1(encoding)
            if lambda1 > 0:
                terms.append(T.scale(T.softmax_cross_entropy(
                    logits, SENTENCE_TYPES.index(sentence.s_type)), lambda1))
            if lambda2 > 0 and not sentence.is_action:
                terms.append(T.scale(T.softmax_cross_entropy(
                    self.forward_st2(encoding, z_s),
                    SENTENCE_SEMANTICS.index(sentence.s_semantic)), lambda2))
        if not terms:
            return Binding(self.store).constant(0.0)
        return T.total(terms)

    ###############
    # Predictions #
    ###############
    def predict_type(self, sentence):
        logits, _ = self.forward_st1(sentence)
        return SENTENCE_TYPES[int(np.argmax(logits.data))]

    def predict_semantic(self, sentence):
        encoding = self._encoding(sentence)
        _, z_s = self.forward_st1(encoding)
        logits = self.forward_st2(encoding, z_s)
        return SENTENCE_SEMANTICS[int(np.argmax(logits.data))]


class FineModel(CoarseModel):
    """
    The coarse model plus the word-level ST3 head.
    """
    phase = "fine"

    def _build(self):
        super()._build()
        if self.hp.word_repr == "embedding":
            self.zw_dim = self.hp.embed_dim
        else:
            self.zw_dim = self.encoder.output_dim
        self.word_gate = layers.GateFusion("word_gate", self.zw_dim)
        self.st3_head = layers.MlpHead("st3_head", self.zs_dim + self.zw_dim,
                                       len(WORD_TAGS), self.hp.mlp_layers,
                                       self.hp.mlp_hidden,
                                       zero_output=True)

    def _init_params(self, store, embeddings=None):
        super()._init_params(store, embeddings)
        self.add_word_level(store)

    def add_word_level(self, store):
        """
        Add freshly initialized word-level parameters to ``store`` and \
                freeze the ST2 side.

        The word-level parameters come from their own generator stream, so
        they do not depend on how the sentence-level ones were obtained. The
        ST3 output layer starts at zero: the first word-level loss is
        ``ln 4`` per word with or without transfer.
        """
        store.reseed(1)
        if self.hp.use_gate:
            self.word_gate.init(store)
        self.st3_head.init(store)
        for prefix in COARSE_ONLY_PREFIXES:
            store.set_trainable(prefix, False)

    def forward_st3(self, sentence, z_s):
        """
        :param sentence: An :class:`Encoding`, a :class:`Sentence` or a \
                list of tokens.
        :param z_s: ST1 hidden features of the same sentence.
        :returns: Per-word logits, ``[n, 4]``.
        """
        encoding = self._encoding(sentence)
        z_s = T.constant(z_s)
        if z_s.shape != (self.zs_dim,):
            raise exc.DimensionError(
                "ST1 hidden features have shape %s, expected (%d,)." % (
                    z_s.shape, self.zs_dim))
        words = (encoding.seq if self.hp.word_repr == "embedding"
                 else encoding.states)
        if self.hp.use_gate:
            words = self.word_gate.forward(encoding.bound, words)
        features = T.concat([T.tile_rows(z_s, words.shape[0]), words], axis=1)
        logits, _ = self.st3_head.forward(encoding.bound, features)
        return logits

    def fine_loss(self, batch, tape=None):
        """
        Sum over every word of the cross-entropy of its role.

        :param batch: A list of ACTION :class:`Sentence` with word tags.
        :param tape: A tape to record on (optional).
        :returns: A scalar :class:`mgtc.nn.tensor.Tensor`.
        """
        if len(batch) == 0:
            raise exc.InvalidParameterError("Cannot compute a loss on an "
                                            "empty batch.")
        terms = []
        for sentence in batch:
            if (not sentence.is_action or
                    len(sentence.word_tags) != len(sentence.tokens)):
                raise exc.InvalidParameterError(
                    "Word-level loss needs tagged ACTION sentences, got '%s'."
                    % sentence.text)
            encoding = self.encode(sentence, tape)
            _, z_s = self.forward_st1(encoding)
            terms.append(T.softmax_cross_entropy(
                self.forward_st3(encoding, z_s),
                [WORD_TAGS.index(tag) for tag in sentence.word_tags]))
        return T.total(terms)

    def predict_tags(self, sentence):
        encoding = self._encoding(sentence)
        _, z_s = self.forward_st1(encoding)
        logits = self.forward_st3(encoding, z_s)
        return tuple(WORD_TAGS[int(i)] for i in np.argmax(logits.data, axis=1))


def transfer_and_freeze(coarse, freeze_shared=False, hp=None):
    """
    Start the word-level phase from a trained coarse model.

    Sentence-level parameters are copied with their values intact. The ST2
    side is frozen, the shared encoder and the ST1 head stay trainable
    unless ``freeze_shared`` is set. The word gate and the ST3 head are
    freshly initialized.

    :param coarse: A :class:`CoarseModel`.
    :param freeze_shared: Also freeze the shared parameters.
    :param hp: The :class:`HyperParams` of the fine phase (optional). \
            Word-level and training options may differ from the coarse \
            model's, the fields of ``SHARED_ARCHITECTURE`` may not.
    :returns: A :class:`FineModel` on a new store.
    """
    if coarse.st1_head.prefix + ".W_1" not in coarse.store:
        raise exc.InvalidParameterError(
            "Coarse model has no initialized parameters.")
    if hp is None:
        hp = coarse.hp
    conflicts = [name for name in SHARED_ARCHITECTURE
                 if getattr(hp, name) != getattr(coarse.hp, name)]
    if conflicts:
        raise exc.InvalidParameterError(
            "Cannot change %s of a trained coarse model." %
            ", ".join(conflicts))
    store = coarse.store.copy()
    fine = FineModel(hp, coarse.vocab, store=store,
                     freeze_embedding=coarse.freeze_embedding)
    fine.add_word_level(store)
    if freeze_shared:
        for prefix in SHARED_PREFIXES:
            store.set_trainable(prefix, False)
    logger.info("Transferred %d sentence-level parameters, %d trainable",
                len(coarse.store), sum(1 for p in store if p.trainable))
    return fine


class Pipeline():
    """
    Conditional inference chain: ST1 on every sentence, then ST2 for \
            statements or ST3 for actions.
    """
    def __init__(self, coarse, fine=None):
        self.coarse = coarse
        self.fine = fine

    @property
    def can_tag(self):
        return self.fine is not None

    def predict_type(self, sentence):
        return self.coarse.predict_type(sentence)

    def predict_semantic(self, sentence):
        return self.coarse.predict_semantic(sentence)

    def predict_tags(self, sentence):
        if self.fine is None:
            raise exc.InvalidParameterError(
                "Predicting word roles needs a fine model.")
        return self.fine.predict_tags(sentence)


###############
# Persistence #
###############
def save_model(model, path):
    """
    Write the parameters of ``model`` to ``path`` and its configuration \
            (phase, hyperparameters, vocabulary and its hash) to \
            ``path + ".json"``.
    """
    checkpoint.save_checkpoint(model.store, path)
    config = {
        "phase": model.phase,
        "hyperparams": model.hp.to_dict(),
        "freeze_embedding": model.freeze_embedding,
        "vocab": model.vocab.tokens,
        "vocab_hash": model.vocab.hash,
    }
    with open(path + ".json", "w", encoding="utf-8") as fh:
        json.dump(config, fh, indent=2, ensure_ascii=False)


def load_model(path, vocab=None, phase=None):
    """
    Read a model written by :func:`save_model`.

    :param path: Checkpoint path.
    :param vocab: The vocabulary the caller will feed the model \
            (optional). Its hash must match the stored one.
    :param phase: Expected phase, ``coarse`` or ``fine`` (optional).
    :returns: A :class:`CoarseModel` or :class:`FineModel`.
    """
    try:
        with open(path + ".json", encoding="utf-8") as fh:
            config = json.load(fh)
        stored_vocab = Vocab(config["vocab"])
        hp = HyperParams.from_dict(config["hyperparams"])
        stored_phase = config["phase"]
    except FileNotFoundError:
        raise exc.ConfigMismatchError(
            "%s: no model configuration next to the checkpoint." % path)
    except (ValueError, KeyError, TypeError) as err:
        raise exc.ConfigMismatchError(
            "%s.json: unreadable model configuration (%s)." % (path, err))
    if stored_vocab.hash != config.get("vocab_hash"):
        raise exc.ConfigMismatchError(
            "%s.json: vocabulary does not match its hash." % path)
    if vocab is not None and vocab.hash != stored_vocab.hash:
        raise exc.ConfigMismatchError(
            "Vocabulary does not match the one %s was trained with." % path)
    if phase is not None and phase != stored_phase:
        raise exc.ConfigMismatchError(
            "%s holds a %s model, expected a %s one." % (path, stored_phase,
                                                         phase))
    cls = FineModel if stored_phase == "fine" else CoarseModel
    skeleton = cls(hp, stored_vocab,
                   freeze_embedding=config.get("freeze_embedding", False))
    store = checkpoint.load_checkpoint(path, like=skeleton.store)
    return skeleton.using(store)


def gradcheck_model(seed=0, eps=1e-5, coords=None, threshold=1e-3):
    """
    Check the gradients of the whole model (every head, every parameter \
            unfrozen) on a tiny two-sentence batch.

    :returns: A :class:`mgtc.nn.gradcheck.GradcheckReport`.
    """
    tokens = ("you are required to finish two steps chill the mixture "
              "for about minutes").split()
    vocab = Vocab([constants.PAD_TOKEN, constants.OOV_TOKEN] + tokens)
    hp = HyperParams(embed_dim=6, hid=4, window_sizes=(1, 2),
                     filters_per_size=3, mlp_layers=2, mlp_hidden=5,
                     seed=seed)
    model = FineModel(hp, vocab)
    model.store.set_trainable("", True)
    # Zero output weights would hide the gradients of the layers below
    rng = np.random.default_rng([seed, 2])
    for name in ("st3_head.W_%d" % hp.mlp_layers,
                 "st3_head.b_%d" % hp.mlp_layers):
        param = model.store[name]
        param.value = rng.normal(0.0, 0.5, param.shape).astype(
            param.value.dtype)
    statement_sentence = statement(tokens[:7], "CONCURRENT")
    action_sentence = action(
        tokens[7:], [WordTag.ACTION_NAME, WordTag.OTHER, WordTag.OBJECT,
                     WordTag.OTHER, WordTag.OTHER, WordTag.OTHER])

    def loss_fn(store, tape):
        work = model.using(store)
        return T.add(
            work.coarse_loss([statement_sentence, action_sentence], tape),
            work.fine_loss([action_sentence], tape))

    return gradcheck.finite_diff_check(model.store, loss_fn, eps=eps,
                                       coords=coords, threshold=threshold,
                                       seed=seed)
