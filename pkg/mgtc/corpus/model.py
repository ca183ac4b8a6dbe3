"""
Data model of multi-grained labeled process texts.

A :class:`Document` is an ordered list of :class:`Sentence` objects. Every
sentence carries its labels: a sentence type, then either a control
semantic (statements) or one role tag per token (actions).
"""
import enum
from dataclasses import dataclass, field

from mgtc import exceptions as exc


class SentenceType(enum.Enum):
    ACTION = "ACTION"
    STATEMENT = "STATEMENT"


class SentenceSemantic(enum.Enum):
    """
    Control semantics of a statement sentence.
    """
    BLOCK_BEGIN = "BLOCK_BEGIN"
    BLOCK_END = "BLOCK_END"
    SUCCESSIVE = "SUCCESSIVE"
    OPTIONAL = "OPTIONAL"
    CONCURRENT = "CONCURRENT"

    @property
    def symbol(self):
        return SEMANTIC_SYMBOLS[self]

    @classmethod
    def parse(cls, value):
        """
        Read a semantic from its name or its symbol (``▷ ◁ • × +``).
        """
        if isinstance(value, cls):
            return value
        for semantic, symbol in SEMANTIC_SYMBOLS.items():
            if value == symbol:
                return semantic
        try:
            return cls[value]
        except KeyError:
            raise exc.InvalidParameterError(
                "Unknown sentence semantic '%s'." % value)


SEMANTIC_SYMBOLS = {
    SentenceSemantic.BLOCK_BEGIN: "▷",
    SentenceSemantic.BLOCK_END: "◁",
    SentenceSemantic.SUCCESSIVE: "•",
    SentenceSemantic.OPTIONAL: "×",
    SentenceSemantic.CONCURRENT: "+",
}


class WordTag(enum.Enum):
    """
    Word-level semantic roles of an action sentence.
    """
    ROLE = "ROLE"
    ACTION_NAME = "ACTION_NAME"
    OBJECT = "OBJECT"
    OTHER = "OTHER"


class Domain(enum.Enum):
    COR = "COR"
    MAM = "MAM"
    OTHER = "other"

    @classmethod
    def parse(cls, value):
        for domain in cls:
            if domain.value == value or domain.name == value:
                return domain
        return cls.OTHER


# Class order of the three classification subtasks
SENTENCE_TYPES = list(SentenceType)
SENTENCE_SEMANTICS = list(SentenceSemantic)
WORD_TAGS = list(WordTag)


@dataclass(frozen=True)
class Sentence():
    """
    A tokenized sentence with its labels.

    Actions have ``s_semantic = None`` and one tag per token; statements have
    a semantic and no tags.
    """
    text: str
    tokens: tuple
    s_type: SentenceType
    s_semantic: SentenceSemantic = None
    word_tags: tuple = ()

    def problems(self):
        """
        :returns: A list of ``(field, message)`` invariant violations.
        """
        found = []
        if len(self.tokens) == 0:
            found.append(("tokens", "sentence has no tokens"))
        if self.s_type is SentenceType.ACTION:
            if self.s_semantic is not None:
                found.append(("s_semantic",
                              "ACTION sentence carries a semantic"))
            if len(self.word_tags) != len(self.tokens):
                found.append(("word_tags",
                              "ACTION sentence has %d tags for %d tokens" % (
                                  len(self.word_tags), len(self.tokens))))
        else:
            if self.word_tags:
                found.append(("word_tags",
                              "STATEMENT sentence carries word_tags"))
            if self.s_semantic is None:
                found.append(("s_semantic",
                              "STATEMENT sentence has no semantic"))
        return found

    @property
    def is_action(self):
        return self.s_type is SentenceType.ACTION

    def to_dict(self):
        return {
            "text": self.text,
            "tokens": list(self.tokens),
            "s_type": self.s_type.value,
            "s_semantic": (self.s_semantic.value
                           if self.s_semantic is not None else None),
            "word_tags": [tag.value for tag in self.word_tags],
        }

    @classmethod
    def from_dict(cls, obj):
        """
        Build a sentence from its JSON object. Invariants are not checked \
                here, see :meth:`problems`.
        """
        try:
            tokens = tuple(obj["tokens"])
            s_type = SentenceType(obj["s_type"])
            semantic = obj.get("s_semantic")
            semantic = (SentenceSemantic.parse(semantic)
                        if semantic not in (None, "") else None)
            tags = tuple(WordTag(tag) for tag in obj.get("word_tags") or ())
        except KeyError as err:
            raise exc.CorpusValidationError("missing field %s" % err,
                                            field=str(err))
        except ValueError as err:
            raise exc.CorpusValidationError(str(err))
        return cls(text=obj.get("text") or " ".join(tokens), tokens=tokens,
                   s_type=s_type, s_semantic=semantic, word_tags=tags)


@dataclass(frozen=True)
class Document():
    """
    An ordered list of sentences. Order carries the process semantics.
    """
    id: str
    domain: Domain
    sentences: tuple = field(default_factory=tuple)

    def to_dict(self):
        return {"id": self.id,
                "domain": self.domain.value,
                "sentences": [s.to_dict() for s in self.sentences]}

    @classmethod
    def from_dict(cls, obj):
        try:
            return cls(id=str(obj["id"]),
                       domain=Domain.parse(obj.get("domain", "other")),
                       sentences=tuple(Sentence.from_dict(s)
                                       for s in obj["sentences"]))
        except KeyError as err:
            raise exc.CorpusValidationError("missing field %s" % err,
                                            field=str(err))


def action(tokens, tags, text=None):
    """
    Shorthand to build an action sentence from token and tag names.
    """
    tokens = tuple(tokens)
    return Sentence(text=text or " ".join(tokens), tokens=tokens,
                    s_type=SentenceType.ACTION,
                    word_tags=tuple(WordTag[t] if isinstance(t, str) else t
                                    for t in tags))


def statement(tokens, semantic, text=None):
    """
    Shorthand to build a statement sentence.
    """
    tokens = tuple(tokens)
    return Sentence(text=text or " ".join(tokens), tokens=tokens,
                    s_type=SentenceType.STATEMENT,
                    s_semantic=SentenceSemantic.parse(semantic))
