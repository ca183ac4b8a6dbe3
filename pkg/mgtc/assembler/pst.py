"""
Process structure trees: block-structured trees of sequences, exclusive
choices and parallel blocks over action leaves.
"""
import re
from dataclasses import dataclass

from mgtc import exceptions as exc


@dataclass(frozen=True)
class ActionNode():
    """
    An extracted action: its executor, name and direct object, any of which \
            but the name may be empty.
    """
    id: str
    role: str
    name: str
    object: str
    sentence: int

    @property
    def label(self):
        """
        ``"role: name object"``, empty parts left out.
        """
        text = " ".join(part for part in (self.name, self.object) if part)
        if self.role:
            return "%s: %s" % (self.role, text)
        return text

    @property
    def key(self):
        """
        Normalized ``name object`` string actions are matched on.
        """
        return normalize(" ".join((self.name, self.object)))

    def to_dict(self):
        return {"id": self.id, "role": self.role, "name": self.name,
                "object": self.object, "sentence": self.sentence}

    @classmethod
    def from_dict(cls, obj):
        return cls(id=obj["id"], role=obj.get("role", ""), name=obj["name"],
                   object=obj.get("object", ""),
                   sentence=int(obj.get("sentence", -1)))


def normalize(text):
    """
    Lowercase and collapse whitespace.

    >>> normalize("  Chill   The mixture ")
    'chill the mixture'
    """
    return re.sub(r"\s+", " ", text).strip().lower()


@dataclass(frozen=True)
class Leaf():
    action: ActionNode


@dataclass(frozen=True)
class Seq():
    children: tuple = ()


@dataclass(frozen=True)
class Xor():
    branches: tuple = ()


@dataclass(frozen=True)
class And():
    branches: tuple = ()


GATEWAYS = (Xor, And)


def parts(node):
    """
    :returns: The sub-trees of ``node`` (children or branches).
    """
    if isinstance(node, Seq):
        return node.children
    if isinstance(node, GATEWAYS):
        return node.branches
    return ()


def leaves(node):
    """
    :returns: The action nodes of a tree, in document order.
    """
    if isinstance(node, Leaf):
        return [node.action]
    return [action for child in parts(node) for action in leaves(child)]


def canonical(node):
    """
    A hashable form of a tree, equal for isomorphic trees: nested \
            sequences are flattened and one-element sequences unwrapped. \
            Leaves are compared on their label.
    """
    if isinstance(node, Leaf):
        return ("leaf", node.action.label)
    if isinstance(node, Seq):
        flat = []
        for child in node.children:
            form = canonical(child)
            if form[0] == "seq":
                flat.extend(form[1])
            else:
                flat.append(form)
        if len(flat) == 1:
            return flat[0]
        return ("seq", tuple(flat))
    kind = "xor" if isinstance(node, Xor) else "and"
    return (kind, tuple(canonical(branch) for branch in node.branches))


def to_dict(node):
    """
    Serialize a tree to nested JSON-compatible dicts.
    """
    if isinstance(node, Leaf):
        return {"type": "leaf", "action": node.action.to_dict()}
    if isinstance(node, Seq):
        return {"type": "seq", "children": [to_dict(c) for c in node.children]}
    return {"type": "xor" if isinstance(node, Xor) else "and",
            "branches": [to_dict(b) for b in node.branches]}


def from_dict(obj):
    """
    Read back a tree written by :func:`to_dict`.
    """
    kind = obj.get("type")
    if kind == "leaf":
        return Leaf(ActionNode.from_dict(obj["action"]))
    if kind == "seq":
        return Seq(tuple(from_dict(c) for c in obj["children"]))
    if kind in ("xor", "and"):
        cls = Xor if kind == "xor" else And
        return cls(tuple(from_dict(b) for b in obj["branches"]))
    raise exc.InvalidParameterError("Unknown tree node type '%s'." % kind)
