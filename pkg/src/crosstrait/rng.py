"""Splittable random-number streams.

Every stochastic routine in the toolkit derives its generator from a master
seed through :func:`substream`.  The derivation is

    SeedSequence([master_seed, crc32(stream_label), replicate_index])

so that (a) identical ``(master_seed, label, index)`` always yields a
bit-identical stream, (b) distinct labels or indices yield statistically
independent streams, and (c) parallel replicates can be generated in any
order without affecting each other.  ``crc32`` is used instead of ``hash``
because Python's string hash is salted per process.
"""

from __future__ import annotations

import zlib

import numpy as np

__all__ = ["substream", "label_entropy"]


def label_entropy(label: str) -> int:
    """Stable 32-bit entropy word for a stream label."""
    return zlib.crc32(label.encode("utf-8"))


def substream(master_seed: int, label: str, index: int = 0) -> np.random.Generator:
    """Return the generator for (master seed, stream label, replicate index).

    Parameters
    ----------
    master_seed : int
        Non-negative master seed recorded in the run manifest.
    label : str
        Name of the logical stream, e.g. ``"cohorts/maf"`` or
        ``"fig2|phi=0.9"``.
    index : int
        Replicate index (or any other per-draw counter), >= 0.
    """
    if master_seed < 0:
        raise ValueError("master_seed must be non-negative")
    if index < 0:
        raise ValueError("index must be non-negative")
    seq = np.random.SeedSequence([int(master_seed), label_entropy(label), int(index)])
    return np.random.default_rng(seq)
