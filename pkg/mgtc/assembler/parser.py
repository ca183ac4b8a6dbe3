"""
Assemble the label stream of a document into a process structure tree.

Grammar over the sentence labels::

    Process := Elem*
    Elem    := Action | Gateway | •
    Gateway := (× | +) Branch+
    Branch  := ▷ Elem* ◁

When no ▷ follows a gateway statement, each action of the run of actions
right after it is a branch of its own.
"""
import enum
import logging
from dataclasses import dataclass

from mgtc import exceptions as exc
from mgtc.assembler.pst import ActionNode, And, Leaf, Seq, Xor
from mgtc.corpus.model import SentenceSemantic, WordTag, action, statement

logger = logging.getLogger(__name__)


class Severity(enum.Enum):
    WARNING = "WARNING"
    ERROR = "ERROR"


@dataclass(frozen=True)
class Diagnostic():
    sentence: int
    severity: Severity
    message: str

    def __str__(self):
        return "sentence %d: %s: %s" % (self.sentence, self.severity.value,
                                         self.message)


class Diagnostics():
    """
    Problems found while assembling a document. In strict mode, the first \
            error aborts with a :class:`mgtc.exceptions.ParseError`.
    """
    def __init__(self, strict=False):
        self.strict = strict
        self.items = []

    def __iter__(self):
        return iter(self.items)

    def __len__(self):
        return len(self.items)

    def add(self, sentence, severity, message):
        diagnostic = Diagnostic(sentence, severity, message)
        self.items.append(diagnostic)
        logger.warning("%s", diagnostic)
        if self.strict and severity is Severity.ERROR:
            raise exc.ParseError(str(diagnostic), diagnostics=self.items)

    def warning(self, sentence, message):
        self.add(sentence, Severity.WARNING, message)

    def error(self, sentence, message):
        self.add(sentence, Severity.ERROR, message)

    @property
    def errors(self):
        return [d for d in self.items if d.severity is Severity.ERROR]

    @property
    def warnings(self):
        return [d for d in self.items if d.severity is Severity.WARNING]


def extract_args(sentence, index=0, diagnostics=None):
    """
    Read the role, name and object of an action sentence from its word tags.

    Each field is the first run of contiguous tokens carrying the matching
    tag, joined with single spaces. Missing runs give empty fields.

    :param sentence: An ACTION :class:`mgtc.corpus.model.Sentence`.
    :param index: Position of the sentence in its document.
    :param diagnostics: A :class:`Diagnostics` to report to (optional).
    :returns: An :class:`ActionNode`.
    """
    if diagnostics is None:
        diagnostics = Diagnostics()
    runs = {tag: [] for tag in WordTag}
    previous = None
    for token, tag in zip(sentence.tokens, sentence.word_tags):
        if tag is not previous:
            runs[tag].append([])
        runs[tag][-1].append(token)
        previous = tag

    fields = {}
    for tag in (WordTag.ROLE, WordTag.ACTION_NAME, WordTag.OBJECT):
        if len(runs[tag]) > 1:
            diagnostics.warning(index, "%d separate %s runs, first one taken"
                                % (len(runs[tag]), tag.value))
        fields[tag] = " ".join(runs[tag][0]) if runs[tag] else ""
    if not fields[WordTag.ACTION_NAME]:
        diagnostics.error(index, "action without name: '%s'" % sentence.text)
    return ActionNode(id="a%d" % index, role=fields[WordTag.ROLE],
                      name=fields[WordTag.ACTION_NAME],
                      object=fields[WordTag.OBJECT], sentence=index)


class _Parser():
    """
    Recursive descent over the sentences of one document.
    """
    def __init__(self, sentences, diagnostics):
        self.sentences = list(sentences)
        self.diagnostics = diagnostics
        self.pos = 0

    def peek(self):
        if self.pos < len(self.sentences):
            return self.sentences[self.pos]
        return None

    def peek_semantic(self):
        sentence = self.peek()
        if sentence is None or sentence.is_action:
            return None
        return sentence.s_semantic

    def parse(self):
        return Seq(tuple(self.elements(depth=0)))

    def elements(self, depth):
        """
        Parse elements until the end of input, or the ◁ closing the \
                current block (left unconsumed).
        """
        children = []
        while self.peek() is not None:
            index, sentence = self.pos, self.peek()
            if sentence.is_action:
                children.append(self.leaf())
                continue
            semantic = sentence.s_semantic
            if semantic is SentenceSemantic.BLOCK_END:
                if depth > 0:
                    return children
                self.diagnostics.error(index, "unmatched ◁")
                self.pos += 1
            elif semantic is SentenceSemantic.BLOCK_BEGIN:
                self.diagnostics.warning(
                    index, "▷ without a preceding gateway, read as a "
                    "sequential block")
                children.extend(self.block())
            elif semantic in (SentenceSemantic.OPTIONAL,
                              SentenceSemantic.CONCURRENT):
                self.pos += 1
                children.extend(self.gateway(index, semantic))
            else:
                # Successive: order is the default
                self.pos += 1
        return children

    def leaf(self):
        index = self.pos
        self.pos += 1
        return Leaf(extract_args(self.sentences[index], index,
                                 self.diagnostics))

    def block(self):
        """
        Parse ``▷ Elem* ◁`` starting at the ▷.
        """
        opened = self.pos
        self.pos += 1
        children = self.elements(depth=1)
        if self.peek_semantic() is SentenceSemantic.BLOCK_END:
            self.pos += 1
        else:
            self.diagnostics.error(opened, "▷ never closed")
        return children

    def gateway(self, index, semantic):
        """
        Parse the branches following a gateway statement.

        :returns: The list of nodes replacing the gateway in its parent.
        """
        branches = []
        if self.peek_semantic() is SentenceSemantic.BLOCK_BEGIN:
            while self.peek_semantic() is SentenceSemantic.BLOCK_BEGIN:
                children = self.block()
                branches.append(children[0] if len(children) == 1
                                else Seq(tuple(children)))
        else:
            while self.peek() is not None and self.peek().is_action:
                branches.append(self.leaf())
        if not branches:
            self.diagnostics.error(index, "%s gateway without branches"
                                   % semantic.symbol)
            return []
        if len(branches) == 1:
            self.diagnostics.warning(index, "%s gateway with a single branch, "
                                     "read as a sequence" % semantic.symbol)
            branch = branches[0]
            return list(branch.children) if isinstance(branch, Seq) \
                else [branch]
        cls = Xor if semantic is SentenceSemantic.OPTIONAL else And
        return [cls(tuple(branches))]


def parse_labels(sentences, strict=False):
    """
    Build the process structure tree of a labeled document.

    :param sentences: The labeled sentences (gold or predicted), or a \
            :class:`mgtc.corpus.model.Document`.
    :param strict: Abort on the first error with a \
            :class:`mgtc.exceptions.ParseError`. Lenient mode (default) \
            recovers from every problem and only reports it.
    :returns: A tuple ``(pst, diagnostics)``. The root is always a \
            :class:`Seq`.
    """
    sentences = getattr(sentences, "sentences", sentences)
    diagnostics = Diagnostics(strict=strict)
    pst = _Parser(sentences, diagnostics).parse()
    return pst, diagnostics


def emit_labels(pst, rng=None):
    """
    Write a tree back as a labeled sentence stream that assembles into an \
            isomorphic tree.

    :param pst: A process structure tree.
    :param rng: A ``numpy.random.Generator`` (optional). When given, •
            statements are sprinkled between elements and gateways whose
            branches are single actions are sometimes written without ▷ ◁.
    :returns: A list of :class:`mgtc.corpus.model.Sentence`.
    """
    out = []
    _emit(pst, out, rng, followed_by_action=False)
    return out


def _emit(node, out, rng, followed_by_action):
    if isinstance(node, Leaf):
        out.append(_action_sentence(node.action))
    elif isinstance(node, Seq):
        for i, child in enumerate(node.children):
            if rng is not None and rng.random() < 0.2:
                out.append(statement(("then",), SentenceSemantic.SUCCESSIVE))
            if i + 1 < len(node.children):
                next_is_action = _starts_with_action(node.children[i + 1])
            else:
                next_is_action = followed_by_action
            _emit(child, out, rng, next_is_action)
    else:
        semantic = (SentenceSemantic.OPTIONAL if isinstance(node, Xor)
                    else SentenceSemantic.CONCURRENT)
        out.append(statement(("choose", "one") if isinstance(node, Xor)
                             else ("do", "both"), semantic))
        implicit = (rng is not None and not followed_by_action and
                    all(isinstance(b, Leaf) for b in node.branches) and
                    rng.random() < 0.5)
        for branch in node.branches:
            if implicit:
                out.append(_action_sentence(branch.action))
                continue
            out.append(statement(("begin",), SentenceSemantic.BLOCK_BEGIN))
            _emit(branch, out, rng, followed_by_action=False)
            out.append(statement(("end",), SentenceSemantic.BLOCK_END))


def _starts_with_action(node):
    if isinstance(node, Leaf):
        return True
    if isinstance(node, Seq):
        # An empty sequence emits nothing, so whatever follows comes next
        return not node.children or _starts_with_action(node.children[0])
    return False


def _action_sentence(node):
    tokens, tags = [], []
    for text, tag in ((node.role, WordTag.ROLE),
                      (node.name, WordTag.ACTION_NAME)):
        for token in text.split():
            tokens.append(token)
            tags.append(tag)
    if node.object:
        tokens.append("the")
        tags.append(WordTag.OTHER)
        for token in node.object.split():
            tokens.append(token)
            tags.append(WordTag.OBJECT)
    return action(tokens, tags)
