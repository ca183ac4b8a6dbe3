"""
Coarse-to-fine training: the sentence-level phase first, then the word-level
phase starting from what the first one learned.
"""
import logging
import time
from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd

from mgtc import constants
from mgtc import exceptions as exc
from mgtc import layers
from mgtc import tools
from mgtc.assembler.parser import parse_labels
from mgtc.corpus.model import (SENTENCE_SEMANTICS, SENTENCE_TYPES, WORD_TAGS,
                               Document, SentenceType, action, statement)
from mgtc.corpus.vocab import build_vocab
from mgtc.evaluator.profile import behavior_similarity
from mgtc.model import (CoarseModel, FineModel, HyperParams, load_model,
                        save_model, transfer_and_freeze)
from mgtc.nn.optim import AdamState, adam_step
from mgtc.nn.tensor import Tape

logger = logging.getLogger(__name__)

PHASES = ("coarse", "fine")

# Independent generator streams derived from the run seed
_DEV_STREAM = 2
_COARSE_BATCH_STREAM = 3
_FINE_BATCH_STREAM = 4


@dataclass
class TrainConfig():
    """
    Settings of one training phase.

    :param hp: The :class:`mgtc.model.HyperParams`.
    :param phase: ``coarse`` or ``fine``.
    :param checkpoint: Where to save the final model (optional).
    :param best_checkpoint: Where to save the best model on the dev \
            slice (optional).
    :param coarse_checkpoint: The coarse model a fine phase starts from.
    :param eval_every: Evaluate on the dev slice every that many steps.
    :param dev_fraction: Fraction of the training documents held out for \
            best-model selection.
    :param freeze_shared: Freeze the shared encoder and the ST1 head during \
            the fine phase.
    :param transfer: Start the fine phase from the coarse model. When \
            ``False``, shared parameters are freshly initialized.
    :param embeddings: Path to pretrained word vectors (optional).
    :param freeze_embedding: Keep the embedding table constant.
    :param min_freq: Minimum token frequency to enter the vocabulary.
    """
    hp: HyperParams = field(default_factory=HyperParams)
    phase: str = "coarse"
    checkpoint: str = None
    best_checkpoint: str = None
    coarse_checkpoint: str = None
    eval_every: int = 100
    dev_fraction: float = constants.DEV_FRACTION
    freeze_shared: bool = False
    transfer: bool = True
    embeddings: str = None
    freeze_embedding: bool = False
    min_freq: int = 1

    def __post_init__(self):
        if self.phase not in PHASES:
            raise exc.InvalidParameterError(
                "Unknown phase '%s', expected one of %s." % (self.phase,
                                                             PHASES))
        if self.eval_every < 1:
            raise exc.InvalidParameterError("eval_every must be at least 1.")
        if not 0 <= self.dev_fraction < 1:
            raise exc.InvalidParameterError(
                "dev_fraction must be in [0, 1), got %s." % self.dev_fraction)


class TrainLog():
    """
    One row per training step, with dev accuracies on evaluation steps.
    """
    COLUMNS = ["iteration", "phase", "loss", "st1_acc", "st2_acc",
               "st3_acc", "millis"]

    def __init__(self, rows=None):
        self.rows = list(rows or [])

    def __len__(self):
        return len(self.rows)

    def add(self, iteration, phase, loss, accuracy=None, millis=0.0):
        if self.rows and self.rows[-1][1] == phase and \
                iteration <= self.rows[-1][0]:
            raise exc.InvalidParameterError(
                "Iteration %d logged after %d." % (iteration,
                                                   self.rows[-1][0]))
        st1 = st2 = st3 = None
        if accuracy is not None:
            st1, st2, st3 = accuracy.st1, accuracy.st2, accuracy.st3
        self.rows.append((iteration, phase, loss, st1, st2, st3, millis))

    def losses(self, phase=None):
        return [row[2] for row in self.rows
                if phase is None or row[1] == phase]

    def extend(self, other):
        self.rows.extend(other.rows)

    def to_frame(self):
        return pd.DataFrame(self.rows, columns=self.COLUMNS)

    def to_csv(self, path=None):
        """
        :param path: Destination path (optional).
        :returns: The CSV text if no ``path`` was given.
        """
        return self.to_frame().to_csv(path, index=False)

    @classmethod
    def from_csv(cls, path):
        frame = pd.read_csv(path)
        missing = set(cls.COLUMNS) - set(frame.columns)
        if missing:
            raise exc.InvalidParameterError(
                "%s: not a training log, missing %s." % (
                    path, ", ".join(sorted(missing))))
        frame = frame[cls.COLUMNS]
        frame = frame.astype(object).where(frame.notna(), None)
        return cls(tuple(row) for row in frame.itertuples(index=False))


@dataclass
class TrainResult():
    """
    The final model, the best one on the dev slice (the final one when \
            there is no dev slice) and the log of the phase.
    """
    model: CoarseModel
    best: CoarseModel
    log: TrainLog


@dataclass(frozen=True)
class Accuracy():
    """
    Accuracies in ``[0, 1]``, ``None`` when a subtask has nothing to score.

    ``st1`` is over every sentence, ``st2`` over gold STATEMENT sentences,
    ``st3`` over the words of gold ACTION sentences and ``pme`` the mean
    behavior similarity of extracted and gold models per document.
    """
    st1: float = None
    st2: float = None
    st3: float = None
    pme: float = None
    sentences: int = 0
    statements: int = 0
    words: int = 0

    def subtasks(self):
        return {"ST1": self.st1, "ST2": self.st2, "ST3": self.st3,
                "PME": self.pme}


def accuracy(predictions, gold):
    """
    :returns: The fraction of equal pairs, ``None`` for empty inputs.
    """
    if len(predictions) != len(gold):
        raise exc.DimensionError("%d predictions for %d gold labels." % (
            len(predictions), len(gold)))
    if len(gold) == 0:
        return None
    return sum(p == g for p, g in zip(predictions, gold)) / len(gold)


def _training_split(documents, config):
    """
    Carve the dev slice out of the training documents.
    """
    n_dev = int(round(len(documents) * config.dev_fraction))
    if n_dev == 0 or n_dev >= len(documents):
        return list(documents), []
    rng = np.random.default_rng([config.hp.seed, _DEV_STREAM])
    order = rng.permutation(len(documents))
    dev = [documents[i] for i in sorted(order[:n_dev])]
    train = [documents[i] for i in sorted(order[n_dev:])]
    return train, dev


def _dev_score(scores, phase):
    if phase == "coarse":
        values = [scores.st1, scores.st2]
    else:
        values = [scores.st3]
    values = [v for v in values if v is not None]
    return sum(values) / len(values) if values else None


def _run_phase(model, sentences, loss_fn, config, dev, phase, stream):
    """
    The training loop shared by both phases.
    """
    hp = config.hp
    state = AdamState(lr=hp.lr)
    batches = tools.cycle_batches(
        sentences, hp.batch, np.random.default_rng([hp.seed, stream]))
    log = TrainLog()
    best_store, best_score = None, None
    subtasks = ("st1", "st2") if phase == "coarse" else ("st3",)
    started = time.perf_counter()
    for iteration in range(1, hp.iterations + 1):
        tape = Tape()
        loss = loss_fn(model, next(batches), tape)
        model.store.clear_grads()
        if loss.requires_grad:
            tape.backward(loss)
            adam_step(model.store, state)
        dev_accuracy = None
        if dev and (iteration % config.eval_every == 0 or
                    iteration == hp.iterations):
            dev_accuracy = evaluate(dev, model, subtasks=subtasks)
            score = _dev_score(dev_accuracy, phase)
            if score is not None and (best_score is None or
                                      score > best_score):
                best_score, best_store = score, model.store.copy()
            logger.info("%s step %d: loss %.4f, dev score %s", phase,
                        iteration, loss.item(), score)
        elif iteration % config.eval_every == 0:
            logger.info("%s step %d: loss %.4f", phase, iteration,
                        loss.item())
        log.add(iteration, phase, loss.item(), dev_accuracy,
                1000.0 * (time.perf_counter() - started))
    best = model if best_store is None else model.using(best_store)
    if config.checkpoint:
        save_model(model, config.checkpoint)
    if config.best_checkpoint:
        save_model(best, config.best_checkpoint)
    return TrainResult(model=model, best=best, log=log)


def _coarse_step_loss(model, batch, tape):
    return model.coarse_loss(batch, tape)


def _fine_step_loss(model, batch, tape):
    return model.fine_loss(batch, tape)


def train_coarse(documents, config, vocab=None):
    """
    Train the sentence-level tasks.

    :param documents: The training documents.
    :param config: A :class:`TrainConfig`.
    :param vocab: The vocabulary (optional). Built from the documents \
            left after the dev slice by default.
    :returns: A :class:`TrainResult` holding :class:`mgtc.model.CoarseModel` \
            objects.
    """
    sentences = [s for document in documents for s in document.sentences]
    if not sentences:
        raise exc.InvalidParameterError("Cannot train on an empty corpus.")
    hp = config.hp
    train, dev = _training_split(documents, config)
    if vocab is None:
        vocab = build_vocab(train, config.min_freq)
    embeddings = None
    if config.embeddings:
        embeddings = layers.load_pretrained(config.embeddings, vocab,
                                            hp.embed_dim,
                                            np.random.default_rng(hp.seed))
    model = CoarseModel(hp, vocab, embeddings=embeddings,
                        freeze_embedding=config.freeze_embedding)
    logger.info("Coarse phase: %d training and %d dev documents, "
                "vocabulary of %d", len(train), len(dev), len(vocab))
    return _run_phase(model,
                      [s for document in train for s in document.sentences],
                      _coarse_step_loss, config, dev, "coarse",
                      _COARSE_BATCH_STREAM)


def train_fine(documents, coarse, config, vocab=None):
    """
    Train the word-level task.

    :param documents: The training documents.
    :param coarse: The trained :class:`mgtc.model.CoarseModel`, or the path \
            of its checkpoint. Required unless ``config.transfer`` is off.
    :param config: A :class:`TrainConfig`.
    :param vocab: The vocabulary (optional). It must match the coarse \
            model's.
    :returns: A :class:`TrainResult` holding :class:`mgtc.model.FineModel` \
            objects.
    """
    if coarse is None:
        coarse = config.coarse_checkpoint
    if isinstance(coarse, str):
        coarse = load_model(coarse, vocab=vocab, phase="coarse")
    if coarse is not None and vocab is not None and \
            coarse.vocab.hash != vocab.hash:
        raise exc.ConfigMismatchError(
            "Vocabulary does not match the coarse model's.")

    train, dev = _training_split(documents, config)
    if config.transfer:
        if coarse is None:
            raise exc.InvalidParameterError(
                "The fine phase needs a trained coarse model.")
        model = transfer_and_freeze(coarse, config.freeze_shared, config.hp)
    else:
        if coarse is not None:
            vocab = coarse.vocab
        elif vocab is None:
            vocab = build_vocab(train, config.min_freq)
        model = FineModel(config.hp, vocab)
        logger.info("Fine phase without transfer: shared parameters "
                    "freshly initialized")

    sentences = [s for document in train for s in document.sentences
                 if s.is_action and s.word_tags]
    if not sentences:
        raise exc.InvalidParameterError(
            "No tagged ACTION sentence to train the word-level task on.")
    return _run_phase(model, sentences, _fine_step_loss, config, dev, "fine",
                      _FINE_BATCH_STREAM)


##############
# Evaluation #
##############
def _can_tag(predictor):
    return callable(getattr(predictor, "predict_tags", None)) and \
        getattr(predictor, "can_tag", True)


def evaluate(documents, predictor, subtasks=None, pme=False):
    """
    Score a predictor on labeled documents.

    :param documents: Gold documents.
    :param predictor: Any object with ``predict_type``, \
            ``predict_semantic`` and (for ST3) ``predict_tags`` methods, \
            such as a :class:`mgtc.model.Pipeline`.
    :param subtasks: The subtasks to score among ``st1``, ``st2`` and \
            ``st3`` (optional). Defaults to all the predictor supports.
    :param pme: Also compute the mean behavior similarity of extracted and \
            gold process models.
    :returns: An :class:`Accuracy`.
    """
    if subtasks is None:
        subtasks = ("st1", "st2") + (("st3",) if _can_tag(predictor) else ())
    sentences = [s for document in documents for s in document.sentences]
    statements = [s for s in sentences if not s.is_action]
    actions = [s for s in sentences if s.is_action]
    scores = {}
    if "st1" in subtasks:
        scores["st1"] = accuracy(
            [predictor.predict_type(s) for s in sentences],
            [s.s_type for s in sentences])
    if "st2" in subtasks:
        scores["st2"] = accuracy(
            [predictor.predict_semantic(s) for s in statements],
            [s.s_semantic for s in statements])
    if "st3" in subtasks:
        predicted, gold = [], []
        for sentence in actions:
            predicted.extend(predictor.predict_tags(sentence))
            gold.extend(sentence.word_tags)
        scores["st3"] = accuracy(predicted, gold)
    if pme:
        similarities = [
            behavior_similarity(
                parse_labels(predict_document(document, predictor))[0],
                parse_labels(document)[0]).value
            for document in documents]
        scores["pme"] = (sum(similarities) / len(similarities)
                         if similarities else None)
    return Accuracy(sentences=len(sentences), statements=len(statements),
                    words=sum(len(s.tokens) for s in actions), **scores)


def predict_sentence(sentence, predictor):
    """
    Label a sentence through the conditional chain: sentence type first, \
            then the control semantic of a statement or the word roles of \
            an action.

    :returns: A new :class:`mgtc.corpus.model.Sentence`.
    """
    if predictor.predict_type(sentence) is SentenceType.STATEMENT:
        return statement(sentence.tokens, predictor.predict_semantic(sentence),
                         text=sentence.text)
    return action(sentence.tokens, predictor.predict_tags(sentence),
                  text=sentence.text)


def predict_document(document, predictor):
    """
    :returns: A copy of ``document`` with predicted labels.
    """
    return Document(id=document.id, domain=document.domain,
                    sentences=tuple(predict_sentence(s, predictor)
                                    for s in document.sentences))


class MajorityPredictor():
    """
    Predicts the most frequent label of the training data, for reference.
    """
    def __init__(self, documents):
        sentences = [s for document in documents for s in document.sentences]
        self.s_type = _most_common([s.s_type for s in sentences],
                                   SENTENCE_TYPES)
        self.s_semantic = _most_common(
            [s.s_semantic for s in sentences if not s.is_action],
            SENTENCE_SEMANTICS)
        self.word_tag = _most_common(
            [tag for s in sentences for tag in s.word_tags], WORD_TAGS)

    def predict_type(self, sentence):
        return self.s_type

    def predict_semantic(self, sentence):
        return self.s_semantic

    def predict_tags(self, sentence):
        return (self.word_tag,) * len(sentence.tokens)


def _most_common(values, order):
    """
    Most frequent value, ties broken by class order.
    """
    if not values:
        return order[0]
    return max(order, key=lambda value: (values.count(value),
                                         -order.index(value)))


def majority_baseline(train_documents, test_documents, pme=False):
    """
    :returns: The :class:`Accuracy` of :class:`MajorityPredictor` trained \
            on ``train_documents``.
    """
    return evaluate(test_documents, MajorityPredictor(train_documents),
                    pme=pme)


###################
# Transfer effect #
###################
@dataclass(frozen=True)
class TransferBenefit():
    """
    Initial word-level loss per seed, with and without transfer.
    """
    transferred: tuple
    random: tuple

    @property
    def median_transferred(self):
        return float(np.median(self.transferred))

    @property
    def median_random(self):
        return float(np.median(self.random))


def transfer_benefit(documents, hp, seeds=(0, 1, 2, 3, 4)):
    """
    Compare the word-level loss at the start of the fine phase when it \
            starts from a trained coarse model and when it starts from \
            random shared parameters, over several seeds.

    :param documents: The training documents.
    :param hp: The :class:`mgtc.model.HyperParams` of the coarse phase.
    :param seeds: The seeds to run.
    :returns: A :class:`TransferBenefit`.
    """
    vocab = build_vocab(documents)
    actions = [s for document in documents for s in document.sentences
               if s.is_action and s.word_tags]
    if not actions:
        raise exc.InvalidParameterError(
            "No tagged ACTION sentence to measure the word-level loss on.")
    transferred, random = [], []
    for seed in seeds:
        seeded = replace(hp, seed=seed)
        coarse = train_coarse(documents, TrainConfig(hp=seeded,
                                                     dev_fraction=0.0),
                              vocab=vocab).model
        transferred.append(transfer_and_freeze(coarse).fine_loss(actions)
                           .item())
        random.append(FineModel(seeded, vocab).fine_loss(actions).item())
        logger.info("Seed %d: initial fine loss %.4f with transfer, %.4f "
                    "without", seed, transferred[-1], random[-1])
    return TransferBenefit(tuple(transferred), tuple(random))
