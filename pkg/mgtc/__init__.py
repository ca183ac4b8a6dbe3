"""
The :mod:`mgtc` module labels procedural texts at the sentence and word
levels and assembles the labels into process models.
"""
from mgtc.assembler.dot import to_dot
from mgtc.assembler.graph import pst_to_graph
from mgtc.assembler.parser import parse_labels
from mgtc.model import HyperParams, Pipeline
from mgtc.trainer import TrainConfig, evaluate, train_coarse, train_fine

__all__ = ["HyperParams", "Pipeline", "TrainConfig", "evaluate", "extract",
           "train_coarse", "train_fine"]


def extract(sentences, strict=False):
    """
    Helper function for one-liner extraction from labeled sentences:

    >>> pst, dot = mgtc.extract(document)

    :param sentences: Labeled sentences or a document.
    :param strict: Fail on the first label error.
    :returns: The process structure tree and its DOT rendering.
    """
    pst, _ = parse_labels(sentences, strict=strict)
    return pst, to_dot(pst_to_graph(pst))
