"""
Binary checkpoints of a :class:`mgtc.nn.params.ParamStore`.

Layout (all integers little-endian)::

    b"MGTC" | version: u32 | manifest length: u32 | manifest (UTF-8 JSON)
    | raw parameter payloads, in manifest order

The manifest holds the store seed and, per parameter, its name, dtype
(``<f4`` or ``<f8``), shape and trainable flag.
"""
import json
import logging
import struct

import numpy as np

from mgtc import constants
from mgtc import exceptions as exc
from mgtc.nn.params import ParamStore

logger = logging.getLogger(__name__)

_HEADER = struct.Struct("<4sII")
_DTYPES = {"<f4": np.float32, "<f8": np.float64}


def save_checkpoint(store, path):
    """
    Write ``store`` to ``path``.

    :param store: A :class:`ParamStore`.
    :param path: Destination file path.
    """
    dtype = np.dtype(store.dtype).newbyteorder("<")
    manifest = {
        "rng_seed": store.rng_seed,
        "dtype": dtype.str,
        "params": [
            {"name": p.name,
             "dtype": dtype.str,
             "shape": list(p.shape),
             "trainable": bool(p.trainable)}
            for p in store
        ],
    }
    manifest_bytes = json.dumps(manifest, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(constants.CHECKPOINT_MAGIC,
                              constants.CHECKPOINT_VERSION,
                              len(manifest_bytes)))
        fh.write(manifest_bytes)
        for param in store:
            fh.write(np.ascontiguousarray(param.value, dtype=dtype).tobytes())
    logger.info("Saved %d parameters to %s", len(store), path)


def load_checkpoint(path, like=None):
    """
    Read a checkpoint back.

    :param path: Checkpoint file path.
    :param like: An optional :class:`ParamStore` the checkpoint must match \
            (same names and shapes), e.g. a freshly built model.
    :returns: The loaded :class:`ParamStore`.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER.size:
        raise exc.CheckpointFormatError("%s: truncated header." % path)
    magic, version, manifest_len = _HEADER.unpack_from(blob, 0)
    if magic != constants.CHECKPOINT_MAGIC:
        raise exc.CheckpointFormatError("%s: not an MGTC checkpoint." % path)
    if version != constants.CHECKPOINT_VERSION:
        raise exc.CheckpointFormatError(
            "%s: unsupported checkpoint version %d." % (path, version))
    offset = _HEADER.size
    if len(blob) < offset + manifest_len:
        raise exc.CheckpointFormatError("%s: truncated manifest." % path)
    try:
        manifest = json.loads(blob[offset:offset + manifest_len]
                              .decode("utf-8"))
        entries = manifest["params"]
        store_dtype = _DTYPES[manifest["dtype"]]
    except (ValueError, KeyError) as err:
        raise exc.CheckpointFormatError(
            "%s: corrupted manifest (%s)." % (path, err))
    offset += manifest_len

    store = ParamStore(manifest["rng_seed"], dtype=store_dtype)
    for entry in entries:
        dtype = np.dtype(entry["dtype"])
        shape = tuple(entry["shape"])
        nbytes = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
        if len(blob) < offset + nbytes:
            raise exc.CheckpointFormatError(
                "%s: truncated payload for '%s'." % (path, entry["name"]))
        value = np.frombuffer(blob, dtype=dtype,
                              count=nbytes // dtype.itemsize,
                              offset=offset).reshape(shape)
        offset += nbytes
        store.add(entry["name"], value, trainable=entry["trainable"])
    if offset != len(blob):
        raise exc.CheckpointFormatError(
            "%s: %d trailing bytes." % (path, len(blob) - offset))

    if like is not None:
        check_compatible(store, like)
    logger.info("Loaded %d parameters from %s", len(store), path)
    return store


def check_compatible(store, like):
    """
    Check that ``store`` has exactly the parameters of ``like``, with the \
            same shapes.
    """
    for param in like:
        if param.name not in store:
            raise exc.CheckpointFormatError(
                "Checkpoint lacks parameter '%s'." % param.name)
        if store[param.name].shape != param.shape:
            raise exc.CheckpointFormatError(
                "Shape mismatch for '%s': checkpoint has %s, model "
                "expects %s." % (param.name, store[param.name].shape,
                                 param.shape))
    extra = [name for name in store.names() if name not in like]
    if extra:
        raise exc.CheckpointFormatError(
            "Checkpoint has unexpected parameters: %s." % ", ".join(extra))
