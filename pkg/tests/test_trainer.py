from dataclasses import replace

import numpy as np
import pytest

from mgtc import exceptions as exc
from mgtc.corpus.model import SentenceSemantic, SentenceType, WordTag
from mgtc.corpus.vocab import build_vocab
from mgtc.model import (COARSE_ONLY_PREFIXES, CoarseModel, FineModel,
                        HyperParams, Pipeline, save_model)
from mgtc.trainer import (Accuracy, MajorityPredictor, TrainConfig, TrainLog,
                          accuracy, evaluate, majority_baseline,
                          predict_document, train_coarse, train_fine,
                          transfer_benefit)

from conftest import toy_corpus


class GoldPredictor():
    """
    Reads the answers off the sentences themselves.
    """
    def predict_type(self, sentence):
        return sentence.s_type

    def predict_semantic(self, sentence):
        return sentence.s_semantic

    def predict_tags(self, sentence):
        return sentence.word_tags


@pytest.fixture(scope="module")
def overfit_hp():
    return HyperParams(embed_dim=16, hid=8, window_sizes=(1, 2),
                       filters_per_size=4, mlp_layers=2, mlp_hidden=16,
                       batch=8, lr=1e-2, iterations=300, seed=0)


@pytest.fixture(scope="module")
def overfit_models(overfit_hp):
    documents = toy_corpus()
    coarse = train_coarse(documents, TrainConfig(hp=overfit_hp,
                                                 dev_fraction=0.0))
    fine = train_fine(documents, coarse.model,
                      TrainConfig(hp=overfit_hp, phase="fine",
                                  dev_fraction=0.0))
    return coarse, fine


#######
# Log #
#######
def test_train_log_rejects_going_back():
    log = TrainLog()
    log.add(1, "coarse", 2.0)
    log.add(2, "coarse", 1.5)
    log.add(1, "fine", 3.0)
    with pytest.raises(exc.InvalidParameterError):
        log.add(1, "fine", 2.0)
    assert log.losses("coarse") == [2.0, 1.5]


def test_train_log_csv(tmp_path):
    log = TrainLog()
    log.add(1, "coarse", 2.0, millis=3.5)
    log.add(2, "coarse", 1.25, Accuracy(st1=0.5, st2=0.75), millis=7.0)
    path = str(tmp_path / "log.csv")
    log.to_csv(path)
    loaded = TrainLog.from_csv(path)
    assert len(loaded) == 2
    assert [row[0] for row in loaded.rows] == [1, 2]
    assert loaded.losses() == pytest.approx([2.0, 1.25])
    assert loaded.rows[0][3] is None
    assert loaded.rows[1][3] == pytest.approx(0.5)
    assert loaded.rows[1][5] is None


def test_train_log_csv_needs_columns(tmp_path):
    path = tmp_path / "log.csv"
    path.write_text("iteration,loss\n1,2.0\n", encoding="utf-8")
    with pytest.raises(exc.InvalidParameterError):
        TrainLog.from_csv(str(path))


##########
# Config #
##########
@pytest.mark.parametrize("kwargs", [{"phase": "middle"},
                                    {"eval_every": 0},
                                    {"dev_fraction": 1.0}])
def test_invalid_config(kwargs):
    with pytest.raises(exc.InvalidParameterError):
        TrainConfig(**kwargs)


############
# Training #
############
def test_train_coarse(toy_documents, tiny_hp):
    result = train_coarse(toy_documents, TrainConfig(hp=tiny_hp))
    assert isinstance(result.model, CoarseModel)
    assert len(result.log) == tiny_hp.iterations
    assert set(result.log.to_frame()["phase"]) == {"coarse"}
    # Four documents leave no dev slice: the best model is the final one
    assert result.best is result.model


def test_train_coarse_with_dev_slice(toy_documents, tiny_hp):
    result = train_coarse(toy_documents,
                          TrainConfig(hp=tiny_hp, dev_fraction=0.25,
                                      eval_every=5))
    frame = result.log.to_frame()
    assert list(frame.dropna(subset=["st1_acc"])["iteration"]) == [
        5, 10, 15, 20]
    assert frame["st3_acc"].isna().all()
    assert isinstance(result.best, CoarseModel)


def test_vocabulary_leaves_out_the_dev_slice(toy_documents, tiny_hp):
    # Every toy document has words of its own
    result = train_coarse(toy_documents,
                          TrainConfig(hp=replace(tiny_hp, iterations=2),
                                      dev_fraction=0.25))
    full = build_vocab(toy_documents)
    assert len(result.model.vocab) < len(full)
    assert set(result.model.vocab.tokens) < set(full.tokens)


def test_train_on_empty_corpus(tiny_hp):
    with pytest.raises(exc.InvalidParameterError):
        train_coarse([], TrainConfig(hp=tiny_hp))


def test_fine_phase_keeps_st2_frozen(toy_documents, tiny_hp):
    coarse = train_coarse(toy_documents, TrainConfig(hp=tiny_hp)).model
    fine = train_fine(toy_documents, coarse,
                      TrainConfig(hp=tiny_hp, phase="fine")).model
    assert isinstance(fine, FineModel)
    for name in coarse.store.names():
        if name.startswith(("st2_head.", "st1_to_st2_gate.")):
            np.testing.assert_array_equal(fine.store[name].value,
                                          coarse.store[name].value)
    assert not np.array_equal(fine.store["st1_head.W_1"].value,
                              coarse.store["st1_head.W_1"].value)


def test_fine_phase_freeze_shared(toy_documents, tiny_hp):
    coarse = train_coarse(toy_documents, TrainConfig(hp=tiny_hp)).model
    fine = train_fine(toy_documents, coarse,
                      TrainConfig(hp=tiny_hp, phase="fine",
                                  freeze_shared=True)).model
    for name in coarse.store.names():
        np.testing.assert_array_equal(fine.store[name].value,
                                      coarse.store[name].value)


def test_fine_phase_from_checkpoint(tmp_path, toy_documents, tiny_hp):
    coarse = train_coarse(toy_documents, TrainConfig(hp=tiny_hp)).model
    path = str(tmp_path / "coarse.ckpt")
    save_model(coarse, path)
    result = train_fine(toy_documents, None,
                        TrainConfig(hp=tiny_hp, phase="fine",
                                    coarse_checkpoint=path))
    assert len(result.log.losses("fine")) == tiny_hp.iterations


def test_fine_phase_needs_a_coarse_model(toy_documents, tiny_hp):
    with pytest.raises(exc.InvalidParameterError):
        train_fine(toy_documents, None, TrainConfig(hp=tiny_hp,
                                                    phase="fine"))


def test_fine_phase_without_transfer(toy_documents, tiny_hp):
    result = train_fine(toy_documents, None,
                        TrainConfig(hp=tiny_hp, phase="fine",
                                    transfer=False))
    assert isinstance(result.model, FineModel)
    assert result.model.store["st1_head.W_1"].trainable


def test_fine_phase_vocabulary_mismatch(toy_documents, tiny_hp):
    coarse = CoarseModel(tiny_hp, build_vocab(toy_documents))
    with pytest.raises(exc.ConfigMismatchError):
        train_fine(toy_documents, coarse,
                   TrainConfig(hp=tiny_hp, phase="fine"),
                   vocab=build_vocab(toy_documents[:1]))


def test_training_is_deterministic(tmp_path, toy_documents, tiny_hp):
    hp = replace(tiny_hp, iterations=5)
    paths = []
    for run in ("a", "b"):
        path = str(tmp_path / ("%s.ckpt" % run))
        train_coarse(toy_documents, TrainConfig(hp=hp, checkpoint=path))
        paths.append(path)
    with open(paths[0], "rb") as fh_a, open(paths[1], "rb") as fh_b:
        assert fh_a.read() == fh_b.read()


def test_models_fit_the_toy_corpus(overfit_models, toy_documents):
    coarse, fine = overfit_models
    losses = coarse.log.losses()
    assert np.mean(losses[-10:]) < np.mean(losses[:10])
    scores = evaluate(toy_documents, Pipeline(coarse.model, fine.model))
    assert (scores.st1, scores.st2, scores.st3) == (1.0, 1.0, 1.0)


@pytest.mark.parametrize("phase", ["coarse", "fine"])
def test_loss_does_not_climb_between_windows(overfit_models, phase):
    coarse, fine = overfit_models
    losses = (coarse if phase == "coarse" else fine).log.losses()
    means = [np.mean(losses[start:start + 100])
             for start in range(0, len(losses), 100)]
    for earlier, later in zip(means, means[1:]):
        assert later <= earlier + 0.05


def test_crust_recipe_is_memorized(overfit_hp, crust_document):
    config = TrainConfig(hp=overfit_hp, dev_fraction=0.0)
    coarse = train_coarse([crust_document], config).model
    fine = train_fine([crust_document], coarse,
                      replace(config, phase="fine")).model
    sentences = crust_document.sentences
    assert coarse.predict_semantic(sentences[1]) is (
        SentenceSemantic.CONCURRENT)
    assert fine.predict_tags(sentences[2]) == sentences[2].word_tags


def test_st2_stays_put_without_its_loss(toy_documents, tiny_hp):
    hp = replace(tiny_hp, lambda1=1.0, lambda2=0.0)
    vocab = build_vocab(toy_documents)
    trained = train_coarse(toy_documents, TrainConfig(hp=hp),
                           vocab=vocab).model
    fresh = CoarseModel(hp, vocab)
    for prefix in COARSE_ONLY_PREFIXES:
        for param in trained.store.with_prefix(prefix):
            np.testing.assert_array_equal(param.value,
                                          fresh.store[param.name].value)
            assert param.grad is None or not np.any(param.grad)
    assert not np.array_equal(trained.store["st1_head.W_1"].value,
                              fresh.store["st1_head.W_1"].value)


##############
# Evaluation #
##############
def test_evaluate_gold_predictor(toy_documents):
    scores = evaluate(toy_documents, GoldPredictor(), pme=True)
    assert (scores.st1, scores.st2, scores.st3, scores.pme) == (1.0, 1.0,
                                                                1.0, 1.0)
    assert scores.sentences == 32
    assert scores.statements == 16
    assert scores.words == 56


def test_evaluate_subtask_selection(toy_documents, tiny_hp):
    pipeline = Pipeline(CoarseModel(tiny_hp, build_vocab(toy_documents)))
    scores = evaluate(toy_documents, pipeline)
    assert scores.st3 is None
    assert 0.0 <= scores.st1 <= 1.0
    assert evaluate(toy_documents, pipeline, subtasks=("st2",)).st1 is None


def test_evaluate_pme_with_a_model(overfit_models, toy_documents):
    coarse, fine = overfit_models
    scores = evaluate(toy_documents, Pipeline(coarse.model, fine.model),
                      pme=True)
    assert 0.0 <= scores.pme <= 1.0


def test_predict_document_with_gold_labels(toy_documents):
    assert predict_document(toy_documents[2],
                            GoldPredictor()) == toy_documents[2]


def test_accuracy_helper():
    assert accuracy([1, 2, 3], [1, 2, 4]) == pytest.approx(2 / 3)
    assert accuracy([], []) is None
    with pytest.raises(exc.DimensionError):
        accuracy([1], [])


def test_majority_baseline(toy_documents):
    predictor = MajorityPredictor(toy_documents)
    # Sixteen of each sentence type: ties go to the first class
    assert predictor.s_type is SentenceType.ACTION
    assert predictor.s_semantic is SentenceSemantic.BLOCK_BEGIN
    assert predictor.word_tag is WordTag.OTHER
    scores = majority_baseline(toy_documents, toy_documents)
    assert scores.st1 == pytest.approx(0.5)
    assert scores.st2 == pytest.approx(0.25)
    assert scores.st3 == pytest.approx(20 / 56)


def test_transfer_benefit_runs(toy_documents, tiny_hp):
    benefit = transfer_benefit(toy_documents, replace(tiny_hp, iterations=5),
                               seeds=(0, 1))
    assert len(benefit.transferred) == len(benefit.random) == 2
    assert all(loss > 0 for loss in benefit.transferred + benefit.random)
    assert benefit.median_random == pytest.approx(np.median(benefit.random))
    assert benefit.median_transferred <= benefit.median_random
