import itertools

import numpy as np
import pytest

from mgtc.assembler import pst as P
from mgtc.assembler.parser import parse_labels
from mgtc.evaluator.profile import (Relation, behavior_similarity,
                                    behavioral_profile)

from conftest import crust_sentences, random_tree


def _leaf(name):
    return P.Leaf(P.ActionNode(name, "", name, "", 0))


A, B, C, D = (_leaf(name) for name in "abcd")


def _interleavings(first, second):
    if not first:
        return [second]
    if not second:
        return [first]
    return ([(first[0],) + rest
             for rest in _interleavings(first[1:], second)] +
            [(second[0],) + rest
             for rest in _interleavings(first, second[1:])])


def traces(node):
    """
    Every action sequence the tree allows.
    """
    if isinstance(node, P.Leaf):
        return {(node.action.key,)}
    if isinstance(node, P.Seq):
        result = {()}
        for child in node.children:
            result = {left + right for left in result
                      for right in traces(child)}
        return result
    if isinstance(node, P.Xor):
        return set().union(*(traces(branch) for branch in node.branches))
    result = {()}
    for branch in node.branches:
        result = {mixed for left in result for right in traces(branch)
                  for mixed in _interleavings(left, right)}
    return result


def relation_from_traces(all_traces, a, b):
    def before(x, y):
        return any(x in trace and y in trace and
                   trace.index(x) < trace.index(y) for trace in all_traces)

    forward, backward = before(a, b), before(b, a)
    if forward and backward:
        return Relation.INTERLEAVING
    if forward:
        return Relation.STRICT_ORDER
    if backward:
        return Relation.REVERSE_ORDER
    return Relation.EXCLUSIVE


@pytest.mark.parametrize("seed", range(40))
def test_profile_agrees_with_traces(seed):
    rng = np.random.default_rng(seed)
    tree = random_tree(rng)
    while len(P.leaves(tree)) > 6:
        tree = random_tree(rng)
    profile = behavioral_profile(tree)
    all_traces = traces(tree)
    for a, b in itertools.combinations(profile.actions, 2):
        assert profile.relation(a, b) is relation_from_traces(all_traces,
                                                              a, b)


def test_running_example_profile():
    pst, _ = parse_labels(crust_sentences())
    profile = behavioral_profile(pst)
    assert profile.actions == ("preheat oven", "chill mixture",
                               "bake crust")
    assert profile.relation("preheat oven", "bake crust") is \
        Relation.STRICT_ORDER
    assert profile.relation("bake crust", "preheat oven") is \
        Relation.REVERSE_ORDER
    assert profile.relation("chill mixture", "bake crust") is \
        Relation.INTERLEAVING


def test_exclusive_relation():
    profile = behavioral_profile(P.Seq((P.Xor((A, B)), C)))
    assert profile.relation("a", "b") is Relation.EXCLUSIVE
    assert profile.facts() == {("exclusive", "a", "b"), ("order", "a", "c"),
                               ("order", "b", "c")}


def test_repeated_actions_are_numbered():
    profile = behavioral_profile(P.Seq((A, B, A)))
    assert profile.actions == ("a", "b", "a#2")
    assert profile.relation("a", "a#2") is Relation.STRICT_ORDER


##############
# Similarity #
##############
def test_similarity_is_reflexive(toy_documents):
    for document in toy_documents:
        pst, _ = parse_labels(document)
        assert behavior_similarity(pst, pst).value == 1.0


@pytest.mark.parametrize("seed", range(10))
def test_similarity_is_symmetric(seed):
    rng = np.random.default_rng(seed)
    first, second = random_tree(rng), random_tree(rng)
    assert behavior_similarity(first, second).value == pytest.approx(
        behavior_similarity(second, first).value)


def test_missing_action():
    score = behavior_similarity(P.Seq((A, C)), P.Seq((A, B, C)))
    assert score.value == pytest.approx(0.5)
    assert score.precision == 1.0
    assert score.recall == pytest.approx(1 / 3)
    assert score.matched_actions == 2


def test_wrong_gateway_kind():
    assert behavior_similarity(P.Xor((A, B)), P.And((A, B))).value == 0.0


def test_partial_agreement():
    ours = P.Seq((A, P.And((B, C)), D))
    gold = P.Seq((A, B, C, D))
    # Five of the six order facts agree, b || c replaces b -> c
    assert behavior_similarity(ours, gold).value == pytest.approx(10 / 12)


def test_single_actions():
    assert behavior_similarity(P.Seq((A,)), P.Seq((A,))).value == 1.0
    assert behavior_similarity(P.Seq((A,)), P.Seq((B,))).value == 0.0
    assert behavior_similarity(P.Seq(()), P.Seq(())).value == 1.0
