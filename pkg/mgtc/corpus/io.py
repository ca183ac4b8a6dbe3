"""
Reading and writing corpora.

The canonical format is JSON-lines, UTF-8, one document object per line::

    {"id": "cor-001", "domain": "COR", "sentences": [
        {"text": "...", "tokens": ["chill", "the", "mixture"],
         "s_type": "ACTION", "s_semantic": null,
         "word_tags": ["ACTION_NAME", "OTHER", "OBJECT"]}, ...]}

Files are pre-tokenized: loading never re-tokenizes.
"""
import json
import logging
import os
import re

from mgtc import exceptions as exc
from mgtc.corpus.model import (Document, Domain, Sentence, SentenceSemantic,
                               SentenceType, WordTag)

logger = logging.getLogger(__name__)

_TOKEN_RE = re.compile(r"\w+(?:[-']\w+)*|[^\w\s]")


def tokenize(text):
    """
    Fallback tokenizer for raw text: words (with inner hyphens or \
            apostrophes) and single punctuation marks.

    >>> tokenize("Chill the mixture, then bake.")
    ['Chill', 'the', 'mixture', ',', 'then', 'bake', '.']
    """
    return _TOKEN_RE.findall(text)


def load_corpus(path, strict=True):
    """
    Load a JSON-lines corpus and validate every sentence.

    :param path: Path to the corpus file.
    :param strict: Raise on the first invalid document (default). In \
            lenient mode, invalid documents are skipped with a warning.
    :returns: A list of :class:`Document`.
    """
    documents = []
    with open(path, encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                documents.append(_parse_line(line, line_number))
            except exc.CorpusValidationError as err:
                if strict:
                    raise
                logger.warning("%s: skipping document (%s)", path, err)
    logger.info("Loaded %d documents from %s", len(documents), path)
    return documents


def _parse_line(line, line_number):
    try:
        obj = json.loads(line)
    except ValueError as err:
        raise exc.CorpusValidationError("malformed JSON (%s)" % err,
                                        line=line_number)
    if not isinstance(obj, dict):
        raise exc.CorpusValidationError(
            "expected a JSON object, got %s" % type(obj).__name__,
            line=line_number)
    try:
        document = Document.from_dict(obj)
    except exc.CorpusValidationError as err:
        raise exc.CorpusValidationError(str(err), line=line_number,
                                        field=err.field)
    except (exc.InvalidParameterError, TypeError, AttributeError) as err:
        raise exc.CorpusValidationError(str(err), line=line_number)
    if len(document.sentences) == 0:
        raise exc.CorpusValidationError(
            "document '%s' has no sentences" % document.id,
            line=line_number, field="sentences")
    for index, sentence in enumerate(document.sentences):
        for field, message in sentence.problems():
            raise exc.CorpusValidationError(
                "document '%s' sentence %d: %s (field '%s')" % (
                    document.id, index, message, field),
                line=line_number, field=field)
    return document


def dump_corpus(documents, path):
    """
    Write documents in the canonical JSON-lines format.
    """
    with open(path, "w", encoding="utf-8") as fh:
        for document in documents:
            fh.write(json.dumps(document.to_dict(), ensure_ascii=False))
            fh.write("\n")
    logger.info("Wrote %d documents to %s", len(documents), path)


##########################
# Released dataset dumps #
##########################
def load_mapping(path):
    """
    Load a label mapping table for :func:`convert_dump`::

        {"sentence_labels": {"<raw>": {"s_type": "STATEMENT",
                                       "s_semantic": "CONCURRENT"}, ...},
         "word_tags": {"<raw>": "ACTION_NAME", ...}}

    Raw sentence labels mapped to ``null`` are dropped (e.g. ingredient \
            or tool lists when no control semantic fits them).
    """
    with open(path, encoding="utf-8") as fh:
        mapping = json.load(fh)
    if "sentence_labels" not in mapping or "word_tags" not in mapping:
        raise exc.InvalidParameterError(
            "Mapping table needs 'sentence_labels' and 'word_tags'.")
    return mapping


def convert_dump(path, mapping, domain="other"):
    """
    Convert a dataset dump to documents.

    The dump is a text file (or a directory of ``*.txt`` files) where a
    line ``### <id>`` starts a document, a line ``# <raw label>`` starts a
    sentence, and the following ``token<TAB>raw tag`` lines (tag optional
    for statements) hold its tokens. Blank lines are ignored.

    :param path: A dump file or directory.
    :param mapping: A mapping table (see :func:`load_mapping`).
    :param domain: Domain of the documents.
    :returns: A list of :class:`Document`.
    """
    if os.path.isdir(path):
        files = sorted(os.path.join(path, name) for name in os.listdir(path)
                       if name.endswith(".txt"))
    else:
        files = [path]
    documents = []
    for filename in files:
        documents.extend(_convert_file(filename, mapping,
                                       Domain.parse(domain)))
    return documents


def _convert_file(filename, mapping, domain):
    documents = []
    doc_id, sentences, current = None, [], None

    def close_sentence():
        if current is not None:
            sentence = _map_sentence(current, mapping, filename)
            if sentence is not None:
                sentences.append(sentence)

    def close_document():
        if doc_id is not None and sentences:
            documents.append(Document(id=doc_id, domain=domain,
                                      sentences=tuple(sentences)))

    with open(filename, encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if line.startswith("### "):
                close_sentence()
                close_document()
                doc_id, sentences, current = line[4:].strip(), [], None
            elif line.startswith("# "):
                close_sentence()
                if doc_id is None:
                    doc_id = os.path.splitext(os.path.basename(filename))[0]
                current = {"label": line[2:].strip(), "tokens": [],
                           "tags": [], "line": line_number}
            else:
                if current is None:
                    raise exc.CorpusValidationError(
                        "%s: token outside of a sentence" % filename,
                        line=line_number)
                parts = line.split("\t")
                current["tokens"].append(parts[0])
                if len(parts) > 1 and parts[1]:
                    current["tags"].append(parts[1])
    close_sentence()
    close_document()
    return documents


def _map_sentence(raw, mapping, filename):
    label = raw["label"]
    if label not in mapping["sentence_labels"]:
        raise exc.CorpusValidationError(
            "%s: raw sentence label '%s' missing from the mapping table" % (
                filename, label), line=raw["line"], field="s_type")
    target = mapping["sentence_labels"][label]
    if target is None:
        return None
    s_type = SentenceType(target["s_type"])
    tokens = tuple(raw["tokens"])
    if s_type is SentenceType.ACTION:
        try:
            tags = tuple(WordTag(mapping["word_tags"][tag])
                         for tag in raw["tags"])
        except KeyError as err:
            raise exc.CorpusValidationError(
                "%s: raw word tag %s missing from the mapping table" % (
                    filename, err), line=raw["line"], field="word_tags")
        sentence = Sentence(text=" ".join(tokens), tokens=tokens,
                            s_type=s_type, word_tags=tags)
    else:
        sentence = Sentence(
            text=" ".join(tokens), tokens=tokens, s_type=s_type,
            s_semantic=SentenceSemantic.parse(target["s_semantic"]))
    for field, message in sentence.problems():
        raise exc.CorpusValidationError("%s: %s" % (filename, message),
                                        line=raw["line"], field=field)
    return sentence
