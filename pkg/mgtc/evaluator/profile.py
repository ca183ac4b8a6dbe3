"""
Behavioral profiles of process structure trees and the similarity of two
models derived from them.

Every pair of distinct actions stands in exactly one relation: strict order
when a common sequence puts one before the other, exclusiveness when they
sit in different branches of a choice, interleaving when they sit in
different branches of a parallel block.
"""
import enum
from dataclasses import dataclass

from mgtc import exceptions as exc
from mgtc.assembler.pst import And, Leaf, Seq, Xor, parts


class Relation(enum.Enum):
    STRICT_ORDER = "->"
    REVERSE_ORDER = "<-"
    EXCLUSIVE = "+"
    INTERLEAVING = "||"


class BehavioralProfile():
    """
    :param actions: Action keys in document order. Repeated keys are \
            numbered (``"mix flour"``, ``"mix flour#2"``).
    :param relations: Map from ``(a, b)`` pairs of keys, ``a`` before \
            ``b`` in document order, to a :class:`Relation`.
    """
    def __init__(self, actions, relations):
        self.actions = tuple(actions)
        self.relations = relations

    def relation(self, a, b):
        """
        :returns: The :class:`Relation` of ``a`` to ``b``.
        """
        if (a, b) in self.relations:
            return self.relations[(a, b)]
        relation = self.relations[(b, a)]
        if relation is Relation.STRICT_ORDER:
            return Relation.REVERSE_ORDER
        if relation is Relation.REVERSE_ORDER:
            return Relation.STRICT_ORDER
        return relation

    def facts(self):
        """
        :returns: The set of relations as order-independent tuples: \
                ``("order", first, second)``, or ``("exclusive", a, b)`` \
                and ``("interleaving", a, b)`` with sorted ``a, b``.
        """
        found = set()
        for (a, b), relation in self.relations.items():
            if relation is Relation.STRICT_ORDER:
                found.add(("order", a, b))
            elif relation is Relation.REVERSE_ORDER:
                found.add(("order", b, a))
            elif relation is Relation.EXCLUSIVE:
                found.add(("exclusive",) + tuple(sorted((a, b))))
            else:
                found.add(("interleaving",) + tuple(sorted((a, b))))
        return found


def behavioral_profile(pst):
    """
    Compute the behavioral profile of a tree from the lowest common \
            ancestor of every pair of leaves.

    :param pst: A process structure tree.
    :returns: A :class:`BehavioralProfile`.
    """
    paths = []
    _collect(pst, [], paths)

    keys = []
    seen = {}
    for action, _ in paths:
        base = action.key
        seen[base] = seen.get(base, 0) + 1
        keys.append(base if seen[base] == 1 else "%s#%d" % (base, seen[base]))

    relations = {}
    for i in range(len(paths)):
        for j in range(i + 1, len(paths)):
            relations[(keys[i], keys[j])] = _relate(paths[i][1], paths[j][1])
    return BehavioralProfile(keys, relations)


def _collect(node, path, out):
    """
    Gather ``(action, path)`` pairs, ``path`` listing ``(ancestor, \
            child position)`` from the root down.
    """
    if isinstance(node, Leaf):
        out.append((node.action, list(path)))
        return
    for position, child in enumerate(parts(node)):
        path.append((node, position))
        _collect(child, path, out)
        path.pop()


def _relate(first, second):
    """
    Relation of the leaf at path ``first`` to the leaf at path ``second``, \
            the first one coming earlier in document order.
    """
    for (node, i), (_, j) in zip(first, second):
        if i == j:
            continue
        if isinstance(node, Seq):
            return Relation.STRICT_ORDER if i < j else Relation.REVERSE_ORDER
        if isinstance(node, Xor):
            return Relation.EXCLUSIVE
        if isinstance(node, And):
            return Relation.INTERLEAVING
    raise exc.InvalidParameterError("Two distinct leaves share a path.")


@dataclass(frozen=True)
class SimilarityScore():
    """
    F1 agreement of two behavioral profiles, with its components.
    """
    value: float
    matched_relations: int
    extracted_relations: int
    gold_relations: int
    matched_actions: int
    extracted_actions: int
    gold_actions: int

    @property
    def precision(self):
        if self.extracted_relations == 0:
            return float(self.gold_relations == 0)
        return self.matched_relations / self.extracted_relations

    @property
    def recall(self):
        if self.gold_relations == 0:
            return float(self.extracted_relations == 0)
        return self.matched_relations / self.gold_relations


def behavior_similarity(extracted, gold):
    """
    Compare two models through their behavioral profiles.

    Actions are matched on their normalized name and object. A relation
    counts as matched when it holds between the same two actions with the
    same label in both models. The score is the F1 of matched relations.
    When neither model relates any pair (at most one action each), the
    score is 1 if the action sets are equal and 0 otherwise.

    :param extracted: The extracted process structure tree.
    :param gold: The gold process structure tree.
    :returns: A :class:`SimilarityScore`.
    """
    ours = behavioral_profile(extracted)
    theirs = behavioral_profile(gold)
    ours_facts, their_facts = ours.facts(), theirs.facts()
    matched = len(ours_facts & their_facts)
    total = len(ours_facts) + len(their_facts)
    if total == 0:
        value = 1.0 if set(ours.actions) == set(theirs.actions) else 0.0
    else:
        value = 2.0 * matched / total
    return SimilarityScore(
        value=value,
        matched_relations=matched,
        extracted_relations=len(ours_facts),
        gold_relations=len(their_facts),
        matched_actions=len(set(ours.actions) & set(theirs.actions)),
        extracted_actions=len(ours.actions),
        gold_actions=len(theirs.actions),
    )
