"""Reproducible random number generation.

All randomness in the library flows from integer seeds.  Work that fans out
over replicates derives one child seed per replicate index with
:func:`derive_seed`, so results are identical no matter how the replicates
are scheduled (sequentially, in worker pools of any size, or resumed).

Derivation combines the parent seed with a splitmix64 hash of the index and
then rehashes, so nested derivations never cancel and sibling streams are
uncorrelated.
"""

from __future__ import annotations

import secrets

import numpy as np

_MASK64 = (1 << 64) - 1


def splitmix64(value: int) -> int:
    """One round of the splitmix64 hash, a 64-bit integer permutation."""
    z = (value + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def derive_seed(seed: int, *indices: int) -> int:
    """Derive a child seed from ``seed`` and one or more stream indices.

    ``derive_seed(s, a, b)`` is shorthand for
    ``derive_seed(derive_seed(s, a), b)``.
    """
    child = seed & _MASK64
    for index in indices:
        child = splitmix64(child ^ splitmix64(index & _MASK64))
    return child


def generator(seed: int) -> np.random.Generator:
    """A fresh PCG64 generator for the given seed."""
    return np.random.default_rng(seed & _MASK64)


def entropy_seed() -> int:
    """A fresh seed from OS entropy, for callers that did not supply one."""
    return secrets.randbits(63)
