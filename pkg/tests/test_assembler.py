import json

import numpy as np
import pytest

import mgtc
from mgtc import exceptions as exc
from mgtc.assembler import pst as P
from mgtc.assembler.dot import to_dot
from mgtc.assembler.graph import Node, check_sound, pst_to_graph
from mgtc.assembler.parser import (Diagnostics, Severity, emit_labels,
                                   extract_args, parse_labels)
from mgtc.corpus.model import action, statement

from conftest import crust_sentences, numbered_leaf as _leaf, random_tree


def _names(node):
    return [a.name for a in P.leaves(node)]


#############
# Arguments #
#############
def test_extract_args():
    node = extract_args(action("the chef chills the mixture".split(),
                               ["OTHER", "ROLE", "ACTION_NAME", "OTHER",
                                "OBJECT"]), index=4)
    assert (node.role, node.name, node.object) == ("chef", "chills",
                                                   "mixture")
    assert node.id == "a4"
    assert node.label == "chef: chills mixture"


def test_extract_args_takes_the_first_run():
    diagnostics = Diagnostics()
    node = extract_args(action("mix flour and the sugar".split(),
                               ["ACTION_NAME", "OBJECT", "OTHER", "OTHER",
                                "OBJECT"]), diagnostics=diagnostics)
    assert node.object == "flour"
    assert len(diagnostics.warnings) == 1


def test_extract_args_without_name():
    _, diagnostics = parse_labels([action(["the", "oven"],
                                          ["OTHER", "OBJECT"])])
    assert len(diagnostics.errors) == 1


###########
# Parsing #
###########
def test_running_example():
    pst, diagnostics = parse_labels(crust_sentences())
    assert len(diagnostics) == 0
    assert isinstance(pst, P.Seq)
    first, gateway = pst.children
    assert first.action.name == "preheat"
    assert isinstance(gateway, P.And)
    assert _names(gateway) == ["chill", "bake"]
    chill = gateway.branches[0].action
    assert (chill.role, chill.name, chill.object) == ("", "chill", "mixture")


def test_explicit_blocks(toy_documents):
    pst, diagnostics = parse_labels(toy_documents[0])
    assert len(diagnostics) == 0
    assert P.canonical(pst) == (
        "seq", (("leaf", "preheat oven"),
                ("xor", (("leaf", "fry onions"), ("leaf", "boil onions"))),
                ("leaf", "chef: serves soup")))


def test_implicit_branches_stop_at_the_first_statement(toy_documents):
    pst, _ = parse_labels(toy_documents[1])
    assert P.canonical(pst) == (
        "seq", (("leaf", "chop carrots"),
                ("and", (("leaf", "stir sauce"), ("leaf", "bake bread"))),
                ("leaf", "cool bread")))


def test_every_toy_document_is_sound(toy_documents):
    for document in toy_documents:
        pst, diagnostics = parse_labels(document, strict=True)
        assert check_sound(pst_to_graph(pst)) == []


def test_single_branch_gateway_collapses():
    sentences = [statement(["choose"], "OPTIONAL"),
                 statement(["begin"], "BLOCK_BEGIN"),
                 action(["mix"], ["ACTION_NAME"]),
                 action(["bake"], ["ACTION_NAME"]),
                 statement(["end"], "BLOCK_END")]
    pst, diagnostics = parse_labels(sentences)
    assert P.canonical(pst) == ("seq", (("leaf", "mix"), ("leaf", "bake")))
    assert [d.severity for d in diagnostics] == [Severity.WARNING]


def test_gateway_without_branches():
    pst, diagnostics = parse_labels([statement(["choose"], "OPTIONAL")])
    assert pst == P.Seq(())
    assert len(diagnostics.errors) == 1


def test_unmatched_block_end():
    sentences = [action(["mix"], ["ACTION_NAME"]),
                 statement(["end"], "BLOCK_END"),
                 action(["bake"], ["ACTION_NAME"])]
    pst, diagnostics = parse_labels(sentences)
    assert _names(pst) == ["mix", "bake"]
    assert diagnostics.errors[0].sentence == 1
    with pytest.raises(exc.ParseError) as err:
        parse_labels(sentences, strict=True)
    assert len(err.value.diagnostics) == 1


def test_unclosed_block():
    sentences = [statement(["both"], "CONCURRENT"),
                 statement(["begin"], "BLOCK_BEGIN"),
                 action(["mix"], ["ACTION_NAME"]),
                 statement(["begin"], "BLOCK_BEGIN"),
                 action(["bake"], ["ACTION_NAME"])]
    pst, diagnostics = parse_labels(sentences)
    assert _names(pst) == ["mix", "bake"]
    assert diagnostics.errors


def test_block_without_gateway_is_sequential():
    sentences = [statement(["begin"], "BLOCK_BEGIN"),
                 action(["mix"], ["ACTION_NAME"]),
                 statement(["end"], "BLOCK_END")]
    pst, diagnostics = parse_labels(sentences)
    assert _names(pst) == ["mix"]
    assert len(diagnostics.warnings) == 1
    assert not diagnostics.errors


def test_empty_document():
    pst, diagnostics = parse_labels([])
    assert pst == P.Seq(())
    assert check_sound(pst_to_graph(pst)) == []


##################
# Label emission #
##################
@pytest.mark.parametrize("seed", range(200))
def test_emitted_labels_assemble_back(seed):
    rng = np.random.default_rng(seed)
    tree = random_tree(rng)
    for emit_rng in (None, rng):
        pst, diagnostics = parse_labels(emit_labels(tree, emit_rng),
                                        strict=True)
        assert P.canonical(pst) == P.canonical(tree)
        assert not diagnostics.errors


def test_emit_running_example():
    pst, _ = parse_labels(crust_sentences())
    again, _ = parse_labels(emit_labels(pst))
    assert P.canonical(again) == P.canonical(pst)


#########
# Trees #
#########
def test_canonical_flattens_sequences():
    a, b, c = _leaf(1), _leaf(2), _leaf(3)
    assert P.canonical(P.Seq((a, P.Seq((b, c))))) == P.canonical(
        P.Seq((a, b, c)))
    assert P.canonical(P.Seq((a,))) == P.canonical(a)
    assert P.canonical(P.Xor((a, b))) != P.canonical(P.And((a, b)))


def test_tree_dict_round_trip():
    tree = random_tree(np.random.default_rng(7))
    restored = P.from_dict(json.loads(json.dumps(P.to_dict(tree))))
    assert restored == tree


def test_unknown_node_type():
    with pytest.raises(exc.InvalidParameterError):
        P.from_dict({"type": "loop", "children": []})


##########
# Graphs #
##########
def test_running_example_graph():
    pst, _ = parse_labels(crust_sentences())
    model = pst_to_graph(pst)
    assert [n.kind for n in model.nodes] == [
        "start", "action", "and_split", "action", "action", "and_join",
        "end"]
    assert set(model.successors("g1_split")) == {"a2", "a3"}
    assert set(model.predecessors("g1_join")) == {"a2", "a3"}
    assert check_sound(model) == []


@pytest.mark.parametrize("seed", range(20))
def test_random_graphs_are_sound(seed):
    tree = random_tree(np.random.default_rng(seed))
    model = pst_to_graph(tree)
    assert check_sound(model) == []
    assert len(model.actions()) == len(P.leaves(tree))


def test_check_sound_finds_dangling_nodes():
    model = pst_to_graph(P.Seq((_leaf(1),)))
    model.add_node(Node("a9", "action", "lost"))
    problems = check_sound(model)
    assert any("a9" in problem for problem in problems)


#######
# DOT #
#######
def test_dot_output():
    pst, _ = parse_labels(crust_sentences())
    dot = to_dot(pst_to_graph(pst), "crust")
    assert dot.startswith('digraph "crust" {')
    assert dot.endswith("}\n")
    assert dot.count('shape=diamond, label="+"') == 2
    assert '"start" -> "a0";' in dot
    assert '"g1_join" -> "end";' in dot
    assert '"a2" [shape=box, label="chill mixture"];' in dot


def test_dot_is_deterministic(toy_documents):
    pst, _ = parse_labels(toy_documents[2])
    assert to_dot(pst_to_graph(pst)) == to_dot(pst_to_graph(pst))


def test_dot_quotes_labels():
    tree = P.Seq((P.Leaf(P.ActionNode("a0", "", 'say "hi"', "", 0)),))
    assert r'label="say \"hi\""' in to_dot(pst_to_graph(tree))


def test_extract_helper(crust_document):
    pst, dot = mgtc.extract(crust_document)
    assert isinstance(pst.children[1], P.And)
    assert dot.count("shape=diamond") == 2
