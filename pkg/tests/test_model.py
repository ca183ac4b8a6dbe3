import numpy as np
import pytest

from mgtc import exceptions as exc
from mgtc.corpus.model import SentenceSemantic, SentenceType, WordTag
from mgtc.corpus.vocab import build_vocab
from mgtc.model import (COARSE_ONLY_PREFIXES, CoarseModel, FineModel,
                        HyperParams, Pipeline, gradcheck_model, load_model,
                        save_model, transfer_and_freeze)
from mgtc.nn import tensor as T

from conftest import crust_sentences


@pytest.fixture
def vocab(toy_documents):
    return build_vocab(toy_documents)


###################
# Hyperparameters #
###################
@pytest.mark.parametrize("kwargs", [
    {"lambda1": 0.7, "lambda2": 0.7},
    {"lambda1": -0.5, "lambda2": 1.5},
    {"hid": 0},
    {"window_sizes": ()},
    {"window_sizes": (0, 2)},
    {"lr": 0},
    {"summary": "max"},
    {"word_repr": "chars"},
])
def test_invalid_hyperparams(kwargs):
    with pytest.raises(exc.InvalidParameterError):
        HyperParams(**kwargs)


def test_hyperparams_dict_round_trip(tiny_hp):
    assert HyperParams.from_dict(tiny_hp.to_dict()) == tiny_hp
    assert tiny_hp.to_dict()["window_sizes"] == [1, 2]


def test_hyperparams_unknown_key(tiny_hp):
    with pytest.raises(exc.InvalidParameterError):
        HyperParams.from_dict(dict(tiny_hp.to_dict(), dropout=0.5))


###########
# Forward #
###########
def test_forward_shapes(tiny_hp, vocab):
    model = FineModel(tiny_hp, vocab)
    sentence = crust_sentences()[2]
    encoding = model.encode(sentence)
    # Bi-LSTM summary plus one gated feature per window size
    assert encoding.z_c.shape == (2 * 6 + 2 * 4,)
    logits, z_s = model.forward_st1(encoding)
    assert logits.shape == (2,)
    assert z_s.shape == (8,)
    assert model.forward_st2(encoding, z_s).shape == (5,)
    assert model.forward_st3(encoding, z_s).shape == (len(sentence.tokens), 4)


def test_predictions_are_labels(tiny_hp, vocab):
    model = FineModel(tiny_hp, vocab)
    sentence = crust_sentences()[0]
    assert isinstance(model.predict_type(sentence), SentenceType)
    assert isinstance(model.predict_semantic(sentence), SentenceSemantic)
    tags = model.predict_tags(sentence)
    assert len(tags) == len(sentence.tokens)
    assert all(isinstance(tag, WordTag) for tag in tags)


def test_unknown_tokens_are_accepted(tiny_hp, vocab):
    model = CoarseModel(tiny_hp, vocab)
    assert isinstance(model.predict_type(["zzz", "qqq"]), SentenceType)


def test_empty_sentence(tiny_hp, vocab):
    with pytest.raises(exc.InvalidParameterError):
        CoarseModel(tiny_hp, vocab).encode([])


def test_st2_rejects_wrong_hidden_features(tiny_hp, vocab):
    model = CoarseModel(tiny_hp, vocab)
    with pytest.raises(exc.DimensionError):
        model.forward_st2(["fry", "the", "onions"], np.zeros(3))


def test_without_gates(tiny_hp, vocab):
    hp = HyperParams(**dict(tiny_hp.to_dict(), use_gate=False))
    model = FineModel(hp, vocab)
    assert not any(name.startswith("fusion.") for name in model.store.names())
    assert model.forward_st3(["fry", "the", "onions"],
                             np.zeros(8)).shape == (3, 4)


def test_bilstm_word_representation(tiny_hp, vocab):
    hp = HyperParams(**dict(tiny_hp.to_dict(), word_repr="bilstm"))
    model = FineModel(hp, vocab)
    assert model.zw_dim == 12
    assert len(model.predict_tags(["fry", "the", "onions"])) == 3


##########
# Losses #
##########
def test_st2_loss_only_counts_statements(tiny_hp, vocab, toy_documents):
    model = CoarseModel(tiny_hp, vocab)
    sentences = toy_documents[0].sentences
    actions = [s for s in sentences if s.is_action]
    statements = [s for s in sentences if not s.is_action]
    assert model.coarse_loss(actions, lambdas=(0.0, 1.0)).item() == 0.0
    both = model.coarse_loss(sentences, lambdas=(0.0, 1.0)).item()
    assert both == pytest.approx(
        model.coarse_loss(statements, lambdas=(0.0, 1.0)).item(), rel=1e-5)


def test_coarse_loss_is_weighted_sum(tiny_hp, vocab, toy_documents):
    model = CoarseModel(tiny_hp, vocab)
    batch = toy_documents[1].sentences
    st1 = model.coarse_loss(batch, lambdas=(1.0, 0.0)).item()
    st2 = model.coarse_loss(batch, lambdas=(0.0, 1.0)).item()
    mixed = model.coarse_loss(batch).item()
    assert mixed == pytest.approx(0.5 * st1 + 0.5 * st2, rel=1e-5)


def _zero_output(model, prefix):
    layer = model.hp.mlp_layers
    for name in ("%s.W_%d" % (prefix, layer), "%s.b_%d" % (prefix, layer)):
        model.store[name].value[...] = 0.0


def test_coarse_loss_worked_value(tiny_hp, vocab, toy_documents):
    model = CoarseModel(tiny_hp, vocab)
    _zero_output(model, "st1_head")
    _zero_output(model, "st2_head")
    # cor-2: six sentences, two of them statements
    batch = toy_documents[1].sentences
    loss = model.coarse_loss(batch, lambdas=(0.3, 0.7)).item()
    assert loss == pytest.approx(0.3 * 6 * np.log(2) + 0.7 * 2 * np.log(5),
                                 rel=1e-5)


def test_fresh_fine_loss_is_uniform(tiny_hp, vocab, toy_documents):
    actions = [s for d in toy_documents for s in d.sentences if s.is_action]
    words = sum(len(s.tokens) for s in actions)
    loss = FineModel(tiny_hp, vocab).fine_loss(actions).item()
    assert loss == pytest.approx(words * np.log(4), rel=1e-5)


def test_empty_batch(tiny_hp, vocab):
    with pytest.raises(exc.InvalidParameterError):
        CoarseModel(tiny_hp, vocab).coarse_loss([])


def test_fine_loss_needs_tagged_actions(tiny_hp, vocab, toy_documents):
    model = FineModel(tiny_hp, vocab)
    with pytest.raises(exc.InvalidParameterError):
        model.fine_loss([toy_documents[0].sentences[1]])


def test_coarse_loss_gradients_reach_both_heads(tiny_hp, vocab,
                                                toy_documents):
    model = CoarseModel(tiny_hp, vocab)
    tape = T.Tape()
    tape.backward(model.coarse_loss(toy_documents[1].sentences, tape))
    assert model.store["st1_head.W_1"].grad is not None
    assert model.store["st2_head.W_1"].grad is not None
    assert np.any(model.store["encoder.fwd.U_i"].grad != 0)


############
# Transfer #
############
def test_transfer_copies_sentence_level_parameters(tiny_hp, vocab):
    coarse = CoarseModel(tiny_hp, vocab)
    fine = transfer_and_freeze(coarse)
    for name in coarse.store.names():
        np.testing.assert_array_equal(fine.store[name].value,
                                      coarse.store[name].value)
    for prefix in COARSE_ONLY_PREFIXES:
        assert not any(p.trainable for p in fine.store.with_prefix(prefix))
    assert fine.store["st3_head.W_1"].trainable
    assert fine.store["embedding.matrix"].trainable
    # The coarse model keeps its own store
    assert coarse.store["st2_head.W_1"].trainable


def test_transfer_freeze_shared(tiny_hp, vocab):
    fine = transfer_and_freeze(CoarseModel(tiny_hp, vocab),
                               freeze_shared=True)
    assert not fine.store["embedding.matrix"].trainable
    assert not fine.store["st1_head.W_1"].trainable
    assert fine.store["word_gate.W"].trainable


def test_word_level_init_does_not_depend_on_coarse_values(tiny_hp, vocab):
    coarse = CoarseModel(tiny_hp, vocab)
    coarse.store["st1_head.W_1"].value[:] = 0.25
    fine = transfer_and_freeze(coarse)
    fresh = FineModel(tiny_hp, vocab)
    np.testing.assert_array_equal(fine.store["st3_head.W_1"].value,
                                  fresh.store["st3_head.W_1"].value)


def test_transfer_with_word_level_options(tiny_hp, vocab):
    hp = HyperParams(**dict(tiny_hp.to_dict(), word_repr="bilstm"))
    fine = transfer_and_freeze(CoarseModel(tiny_hp, vocab), hp=hp)
    assert fine.hp.word_repr == "bilstm"
    assert fine.zw_dim == 12


@pytest.mark.parametrize("field, value", [("hid", 5), ("mlp_hidden", 4),
                                          ("use_gate", False)])
def test_transfer_keeps_the_shared_architecture(tiny_hp, vocab, field,
                                                value):
    hp = HyperParams(**dict(tiny_hp.to_dict(), **{field: value}))
    with pytest.raises(exc.InvalidParameterError):
        transfer_and_freeze(CoarseModel(tiny_hp, vocab), hp=hp)


###############
# Persistence #
###############
def test_save_and_load(tmp_path, tiny_hp, vocab):
    model = transfer_and_freeze(CoarseModel(tiny_hp, vocab))
    path = str(tmp_path / "fine.ckpt")
    save_model(model, path)
    loaded = load_model(path, vocab=vocab, phase="fine")
    assert isinstance(loaded, FineModel)
    assert loaded.hp == tiny_hp
    sentence = crust_sentences()[3]
    assert loaded.predict_tags(sentence) == model.predict_tags(sentence)
    assert not loaded.store["st2_head.W_1"].trainable


def test_load_with_wrong_phase(tmp_path, tiny_hp, vocab):
    path = str(tmp_path / "coarse.ckpt")
    save_model(CoarseModel(tiny_hp, vocab), path)
    with pytest.raises(exc.ConfigMismatchError):
        load_model(path, phase="fine")


def test_load_with_another_vocabulary(tmp_path, tiny_hp, vocab,
                                      toy_documents):
    path = str(tmp_path / "coarse.ckpt")
    save_model(CoarseModel(tiny_hp, vocab), path)
    with pytest.raises(exc.ConfigMismatchError):
        load_model(path, vocab=build_vocab(toy_documents[:1]))


def test_load_without_configuration(tmp_path, tiny_hp, vocab):
    path = str(tmp_path / "coarse.ckpt")
    save_model(CoarseModel(tiny_hp, vocab), path)
    (tmp_path / "coarse.ckpt.json").unlink()
    with pytest.raises(exc.ConfigMismatchError):
        load_model(path)


############
# Pipeline #
############
def test_pipeline_without_fine_model(tiny_hp, vocab):
    pipeline = Pipeline(CoarseModel(tiny_hp, vocab))
    assert not pipeline.can_tag
    assert isinstance(pipeline.predict_type(["bake"]), SentenceType)
    with pytest.raises(exc.InvalidParameterError):
        pipeline.predict_tags(["bake"])


##################
# Gradient check #
##################
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_model_gradients(seed):
    report = gradcheck_model(seed=seed)
    assert report.passed, report.to_tsv()
