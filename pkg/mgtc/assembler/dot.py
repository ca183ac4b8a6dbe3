"""
Graphviz DOT rendering of process models.
"""

_SHAPES = {
    "start": "circle",
    "end": "doublecircle",
    "action": "box",
    "xor_split": "diamond",
    "xor_join": "diamond",
    "and_split": "diamond",
    "and_join": "diamond",
}


def _gvquote(text):
    return '"{}"'.format(text.replace("\\", "\\\\").replace('"', r'\"'))


def dot_lines(model, name="process"):
    """
    Generate the lines of the DOT description of ``model``, nodes in \
            creation (document) order, then edges.
    """
    yield "digraph {} {{".format(_gvquote(name))
    yield "  rankdir=LR;"
    for node in model.nodes:
        yield "  {} [shape={}, label={}];".format(
            _gvquote(node.id), _SHAPES[node.kind], _gvquote(node.label))
    for source, target in model.edges:
        yield "  {} -> {};".format(_gvquote(source), _gvquote(target))
    yield "}"


def to_dot(model, name="process"):
    """
    Render a :class:`mgtc.assembler.graph.ProcessModel` as DOT text. The \
            output only depends on the model: rendering twice gives the \
            same bytes.
    """
    return "\n".join(dot_lines(model, name)) + "\n"
