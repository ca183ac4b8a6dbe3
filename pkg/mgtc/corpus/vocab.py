"""
Token vocabulary.
"""
import collections

from mgtc import constants
from mgtc import tools


class Vocab():
    """
    Token to index mapping. Index 0 is the padding token, index 1 the \
            out-of-vocabulary token.
    """
    def __init__(self, tokens):
        """
        :param tokens: The full token list, starting with the pad and OOV \
                tokens.
        """
        self.tokens = list(tokens)
        self.index = {token: i for i, token in enumerate(self.tokens)}

    def __len__(self):
        return len(self.tokens)

    def __contains__(self, token):
        return token in self.index

    def encode(self, tokens):
        """
        :returns: The list of indices of ``tokens``, unknown ones mapped to \
                the OOV index.
        """
        return [self.index.get(token, constants.OOV_INDEX) for token in tokens]

    @property
    def hash(self):
        return tools.sha256_of_lines(self.tokens)


def build_vocab(documents, min_freq=1):
    """
    Build a vocabulary ordered by decreasing frequency, ties broken \
            lexicographically.

    :param documents: A list of :class:`mgtc.corpus.model.Document`.
    :param min_freq: Tokens seen fewer times are left out (read as OOV).
    :returns: A :class:`Vocab`.
    """
    counts = collections.Counter(token
                                 for document in documents
                                 for sentence in document.sentences
                                 for token in sentence.tokens)
    kept = sorted((token for token, count in counts.items()
                   if count >= min_freq and
                   token not in (constants.PAD_TOKEN, constants.OOV_TOKEN)),
                  key=lambda token: (-counts[token], token))
    return Vocab([constants.PAD_TOKEN, constants.OOV_TOKEN] + kept)
