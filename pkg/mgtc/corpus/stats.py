"""
Dataset statistics, reported as the rows of a table with one column per \
        dataset.
"""
from dataclasses import dataclass

import pandas as pd


@dataclass(frozen=True)
class CorpusStats():
    documents: int
    sentences: int
    labeled_words: int
    tokens: int
    sentence_categories: int
    word_categories: int


def corpus_stats(documents):
    """
    Count sentences and words over a corpus.

    Labeled words are the tokens of sentences carrying word tags (action
    sentences); ``tokens`` counts every token. Categories are the distinct
    sentence semantics and word tags that occur.

    :param documents: A list of documents.
    :returns: A :class:`CorpusStats`.
    """
    sentences = [s for document in documents for s in document.sentences]
    return CorpusStats(
        documents=len(documents),
        sentences=len(sentences),
        labeled_words=sum(len(s.word_tags) for s in sentences),
        tokens=sum(len(s.tokens) for s in sentences),
        sentence_categories=len({s.s_semantic for s in sentences
                                 if s.s_semantic is not None}),
        word_categories=len({tag for s in sentences for tag in s.word_tags}),
    )


def stats_table(named_stats):
    """
    :param named_stats: An ordered dict mapping dataset names to \
            :class:`CorpusStats`.
    :returns: A ``pandas.DataFrame`` with one row per statistic.
    """
    rows = [
        ("# Documents", "documents"),
        ("# Labeled Sentences", "sentences"),
        ("# Labeled Words", "labeled_words"),
        ("# Tokens", "tokens"),
        ("# Sentence-Level Categories", "sentence_categories"),
        ("# Word-Level Categories", "word_categories"),
    ]
    return pd.DataFrame(
        {name: [getattr(stats, attr) for _, attr in rows]
         for name, stats in named_stats.items()},
        index=[label for label, _ in rows])


def format_table(frame):
    """
    Render a table as aligned text, thousands separated by commas.
    """
    return frame.to_string(formatters={
        column: "{:,}".format for column in frame.columns})
