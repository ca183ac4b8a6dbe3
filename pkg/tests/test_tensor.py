import numpy as np
import pytest

from mgtc import exceptions as exc
from mgtc.nn import tensor as T
from mgtc.nn.params import Binding, ParamStore


def _store():
    store = ParamStore(0, dtype=np.float64)
    store.add("w", [[1.0, 2.0], [3.0, 4.0]])
    store.add("b", [0.5, -0.5])
    return store


def test_matmul_values():
    out = T.matmul(T.constant([[1.0, 2.0], [3.0, 4.0]]),
                   T.constant([[5.0], [6.0]]))
    np.testing.assert_allclose(out.data, [[17.0], [39.0]])
    assert not out.requires_grad


def test_matmul_rejects_bad_shapes():
    with pytest.raises(exc.DimensionError):
        T.matmul(T.constant([[1.0, 2.0]]), T.constant([[1.0, 2.0]]))


def test_add_broadcasts_bias_and_sums_its_gradient():
    store = _store()
    tape = T.Tape()
    bound = Binding(store, tape)
    out = T.add(bound["w"], bound["b"])
    loss = T.total([T.mean_rows(out)])
    tape.backward(loss)
    np.testing.assert_allclose(store["b"].grad, [1.0, 1.0])
    np.testing.assert_allclose(store["w"].grad, np.full((2, 2), 0.5))


def test_add_rejects_growing_shapes():
    with pytest.raises(exc.DimensionError):
        T.add(T.constant([1.0, 2.0]), T.constant([[1.0, 2.0], [3.0, 4.0]]))


def test_softmax_is_stable():
    probs = T.softmax(T.constant([1000.0, 0.0]))
    np.testing.assert_allclose(probs.data, [1.0, 0.0])


def test_softmax_of_empty_tensor():
    with pytest.raises(exc.DimensionError):
        T.softmax(T.constant(np.zeros(0)))


def test_cross_entropy_value():
    loss = T.cross_entropy(T.constant(np.array([0.9, 0.1])), [1, 0])
    assert loss.item() == pytest.approx(-np.log(0.9))


def test_cross_entropy_floors_zero_probability():
    loss = T.cross_entropy(T.constant(np.array([0.0, 1.0])), [1, 0])
    assert loss.item() == pytest.approx(-np.log(1e-12))


def test_cross_entropy_needs_one_hot_target():
    with pytest.raises(exc.InvalidParameterError):
        T.cross_entropy(T.constant(np.array([0.5, 0.5])), [0.5, 0.5])


def test_fused_cross_entropy_matches_composition():
    logits = np.array([[0.3, -1.2, 2.0], [1.0, 0.0, -1.0]])
    fused = T.softmax_cross_entropy(T.constant(logits), [2, 0]).item()
    composed = sum(
        T.cross_entropy(T.softmax(T.constant(row)), np.eye(3)[target]).item()
        for row, target in zip(logits, [2, 0]))
    assert fused == pytest.approx(composed)


def test_fused_cross_entropy_gradient_is_p_minus_y():
    store = ParamStore(0, dtype=np.float64)
    store.add("logits", [0.2, 0.1, -0.3])
    tape = T.Tape()
    loss = T.softmax_cross_entropy(Binding(store, tape)["logits"], 1)
    tape.backward(loss)
    probs = np.exp([0.2, 0.1, -0.3]) / np.exp([0.2, 0.1, -0.3]).sum()
    np.testing.assert_allclose(store["logits"].grad, probs - [0, 1, 0])


def test_fused_cross_entropy_target_out_of_range():
    with pytest.raises(exc.InvalidParameterError):
        T.softmax_cross_entropy(T.constant(np.zeros(3)), 3)


def test_activation_unknown():
    with pytest.raises(exc.InvalidParameterError):
        T.activation(T.constant([0.0]), "gelu")


def test_non_finite_values_raise():
    with pytest.raises(exc.NumericalError):
        T.scale(T.constant(np.array([1e38], dtype=np.float32)), 1e10)


def test_tape_is_single_use():
    store = _store()
    tape = T.Tape()
    loss = T.total([T.mean_rows(Binding(store, tape)["w"])])
    tape.backward(loss)
    with pytest.raises(exc.TapeError):
        tape.backward(loss)


def test_backward_on_empty_tape():
    with pytest.raises(exc.TapeError):
        T.Tape().backward(T.constant(1.0))


def test_backward_needs_scalar():
    store = _store()
    tape = T.Tape()
    out = T.scale(Binding(store, tape)["w"], 2.0)
    with pytest.raises(exc.DimensionError):
        tape.backward(out)


def test_frozen_parameter_gets_no_gradient():
    store = _store()
    store.set_trainable("b", False)
    tape = T.Tape()
    bound = Binding(store, tape)
    loss = T.total([T.mean_rows(T.add(bound["w"], bound["b"]))])
    tape.backward(loss)
    assert store["b"].grad is None
    assert store["w"].grad is not None


def test_shared_leaf_accumulates():
    store = _store()
    tape = T.Tape()
    bound = Binding(store, tape)
    loss = T.total([T.mean_rows(bound["w"]), T.mean_rows(bound["w"])])
    tape.backward(loss)
    np.testing.assert_allclose(store["w"].grad, np.ones((2, 2)))
