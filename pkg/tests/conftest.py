import pytest

from mgtc.assembler import pst as P
from mgtc.corpus.model import Document, Domain, action, statement
from mgtc.model import HyperParams

BEGIN = ("option", "begins")
END = ("option", "ends")
THEN = ("after", "that")
CHOOSE = ("choose", "one", "of", "the", "following")
BOTH = ("do", "these", "at", "once")


def _act(text, tags):
    """
    ``tags`` is a string of one letter per token: R(ole), N(ame), \
            O(bject) or ``.`` for other.
    """
    names = {"R": "ROLE", "N": "ACTION_NAME", "O": "OBJECT", ".": "OTHER"}
    tokens = text.split()
    assert len(tokens) == len(tags)
    return action(tokens, [names[letter] for letter in tags])


def crust_sentences():
    return (
        _act("preheat the oven to 350 degrees", "N.O..."),
        statement("you are required to finish two steps".split(),
                  "CONCURRENT"),
        _act("chill the mixture for about 20 minutes until it thickens",
             "N.O......."),
        _act("bake the crust for 10 minutes", "N.O..."),
    )


def toy_corpus():
    return [
        Document("cor-1", Domain.COR, (
            _act("preheat the oven", "N.O"),
            statement(CHOOSE, "OPTIONAL"),
            statement(BEGIN, "BLOCK_BEGIN"),
            _act("fry the onions", "N.O"),
            statement(END, "BLOCK_END"),
            statement(BEGIN, "BLOCK_BEGIN"),
            _act("boil the onions", "N.O"),
            statement(END, "BLOCK_END"),
            statement(THEN, "SUCCESSIVE"),
            _act("the chef serves the soup", ".RN.O"),
        )),
        Document("cor-2", Domain.COR, (
            _act("chop the carrots", "N.O"),
            statement(BOTH, "CONCURRENT"),
            _act("stir the sauce", "N.O"),
            _act("bake the bread", "N.O"),
            statement(THEN, "SUCCESSIVE"),
            _act("cool the bread", "N.O"),
        )),
        Document("mam-1", Domain.MAM, (
            _act("the operator loads the part", ".RN.O"),
            statement(THEN, "SUCCESSIVE"),
            _act("drill the hole", "N.O"),
            statement(BOTH, "CONCURRENT"),
            statement(BEGIN, "BLOCK_BEGIN"),
            _act("clean the surface", "N.O"),
            statement(END, "BLOCK_END"),
            statement(BEGIN, "BLOCK_BEGIN"),
            _act("the robot paints the frame", ".RN.O"),
            statement(END, "BLOCK_END"),
        )),
        Document("mam-2", Domain.MAM, (
            _act("inspect the weld", "N.O"),
            statement(CHOOSE, "OPTIONAL"),
            _act("repair the weld", "N.O"),
            _act("scrap the part", "N.O"),
            statement(THEN, "SUCCESSIVE"),
            _act("the operator ships the frame", ".RN.O"),
        )),
    ]


@pytest.fixture
def crust_document():
    return Document("crust", Domain.COR, crust_sentences())


@pytest.fixture
def toy_documents():
    return toy_corpus()


@pytest.fixture
def tiny_hp():
    return HyperParams(embed_dim=8, hid=6, window_sizes=(1, 2),
                       filters_per_size=4, mlp_layers=2, mlp_hidden=8,
                       batch=8, lr=1e-2, iterations=20, seed=0)


@pytest.fixture
def corpus_file(tmp_path, toy_documents):
    from mgtc.corpus.io import dump_corpus
    path = str(tmp_path / "toy.jsonl")
    dump_corpus(toy_documents, path)
    return path


def numbered_leaf(n, role="", obj=""):
    return P.Leaf(P.ActionNode("a%d" % n, role, "act%d" % n, obj, n))


def random_tree(rng, depth=0, counter=None):
    """
    A random tree without empty or single-branch gateways.
    """
    if counter is None:
        counter = [0]
    if depth >= 3 or rng.random() < 0.35:
        counter[0] += 1
        n = counter[0]
        return numbered_leaf(n, role=str(rng.choice(["", "chef"])),
                             obj=str(rng.choice(["", "obj%d" % n])))
    kind = str(rng.choice(["seq", "xor", "and"]))
    children = tuple(random_tree(rng, depth + 1, counter)
                     for _ in range(rng.integers(2, 4)))
    return {"seq": P.Seq, "xor": P.Xor, "and": P.And}[kind](children)
