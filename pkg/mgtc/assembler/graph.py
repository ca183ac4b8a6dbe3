"""
Process model graphs: actions, gateways and the sequence flows between them.
"""
from dataclasses import dataclass

from mgtc.assembler.pst import Leaf, Seq, Xor

START = "start"
END = "end"


@dataclass(frozen=True)
class Node():
    """
    A graph node. ``kind`` is one of ``start``, ``end``, ``action``, \
            ``xor_split``, ``xor_join``, ``and_split`` or ``and_join``.
    """
    id: str
    kind: str
    label: str = ""

    @property
    def is_split(self):
        return self.kind.endswith("_split")

    @property
    def is_join(self):
        return self.kind.endswith("_join")


class ProcessModel():
    """
    Nodes in creation order and directed sequence flows, without duplicates.
    """
    def __init__(self):
        self.nodes = []
        self.edges = []
        self._ids = {}
        self._edge_set = set()

    def add_node(self, node):
        self.nodes.append(node)
        self._ids[node.id] = node
        return node.id

    def add_edge(self, source, target):
        if (source, target) not in self._edge_set:
            self._edge_set.add((source, target))
            self.edges.append((source, target))

    def node(self, node_id):
        return self._ids[node_id]

    def successors(self, node_id):
        return [target for source, target in self.edges if source == node_id]

    def predecessors(self, node_id):
        return [source for source, target in self.edges if target == node_id]

    def actions(self):
        return [node for node in self.nodes if node.kind == "action"]


def pst_to_graph(pst):
    """
    Build the process model of a tree: sequences become chains, gateways \
            a split node, one sub-graph per branch and a join node, between \
            a start and an end node.

    :param pst: A process structure tree.
    :returns: A :class:`ProcessModel`.
    """
    model = ProcessModel()
    model.add_node(Node(START, "start", "start"))
    counter = [0]
    last = _wire(pst, START, model, counter)
    model.add_node(Node(END, "end", "end"))
    model.add_edge(last, END)
    return model


def _wire(node, source, model, counter):
    """
    Add ``node`` after ``source``.

    :returns: The id of the node the next element connects from.
    """
    if isinstance(node, Leaf):
        action = node.action
        model.add_node(Node(action.id, "action", action.label))
        model.add_edge(source, action.id)
        return action.id
    if isinstance(node, Seq):
        for child in node.children:
            source = _wire(child, source, model, counter)
        return source
    counter[0] += 1
    kind = "xor" if isinstance(node, Xor) else "and"
    symbol = "×" if isinstance(node, Xor) else "+"
    split = model.add_node(Node("g%d_split" % counter[0], kind + "_split",
                                symbol))
    model.add_edge(source, split)
    ends = [_wire(branch, split, model, counter) for branch in node.branches]
    join = model.add_node(Node("g%d_join" % counter[0], kind + "_join",
                               symbol))
    for end in ends:
        model.add_edge(end, join)
    return join


def check_sound(model):
    """
    Check the structure of a process model: a single start and end, every \
            split matched by a join of the same kind, no cycle, and every \
            node on a path from start to end.

    :returns: A list of problems, empty for a sound model.
    """
    problems = []
    starts = [n for n in model.nodes if n.kind == "start"]
    ends = [n for n in model.nodes if n.kind == "end"]
    if len(starts) != 1 or len(ends) != 1:
        problems.append("expected one start and one end, got %d and %d" % (
            len(starts), len(ends)))
        return problems

    ids = {node.id for node in model.nodes}
    for node in model.nodes:
        if node.is_split:
            join = node.id[:-len("split")] + "join"
            if join not in ids or model.node(join).kind != \
                    node.kind.replace("split", "join"):
                problems.append("split %s has no matching join" % node.id)

    # Kahn's algorithm
    indegree = {node.id: 0 for node in model.nodes}
    for _, target in model.edges:
        indegree[target] += 1
    queue = [node_id for node_id, degree in indegree.items() if degree == 0]
    visited = 0
    while queue:
        current = queue.pop()
        visited += 1
        for target in model.successors(current):
            indegree[target] -= 1
            if indegree[target] == 0:
                queue.append(target)
    if visited != len(model.nodes):
        problems.append("graph has a cycle")

    forward = _reachable(starts[0].id, model.successors)
    backward = _reachable(ends[0].id, model.predecessors)
    for node in model.nodes:
        if node.id not in forward or node.id not in backward:
            problems.append("node %s is not on a path from start to end"
                            % node.id)
    return problems


def _reachable(origin, neighbours):
    seen = {origin}
    stack = [origin]
    while stack:
        for other in neighbours(stack.pop()):
            if other not in seen:
                seen.add(other)
                stack.append(other)
    return seen
