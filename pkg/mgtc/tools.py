"""
This file contains various utility functions.
"""
import hashlib
from itertools import islice, chain


def batch(iterable, size):
    """
    Get items from a sequence a batch at a time.

    .. note:

        All batches must be exhausted immediately.

    :params iterable: An iterable to get batches from.
    :params size: Size of the batches.
    :returns: A new batch of the given size at each time.

    >>> [list(i) for i in batch([1, 2, 3, 4, 5], 2)]
    [[1, 2], [3, 4], [5]]
    """
    item = iter(iterable)
    while True:
        batch_iterator = islice(item, size)
        try:
            yield chain([next(batch_iterator)], batch_iterator)
        except StopIteration:
            return


def cycle_batches(items, size, rng):
    """
    Endless stream of mini-batches over ``items``, reshuffled with ``rng`` \
            at the start of every epoch.

    :param items: A list of items.
    :param size: Size of the batches. The last batch of an epoch may be \
            smaller.
    :param rng: A ``numpy.random.Generator``.
    :returns: A generator of lists.
    """
    if len(items) == 0:
        return
    while True:
        order = rng.permutation(len(items))
        for chunk in batch(order, size):
            yield [items[i] for i in chunk]


def sha256_of_lines(lines):
    """
    Hash a sequence of strings, one per line.

    :param lines: An iterable of strings.
    :returns: The hex digest.
    """
    digest = hashlib.sha256()
    for line in lines:
        digest.update(line.encode("utf-8"))
        digest.update(b"\n")
    return digest.hexdigest()
