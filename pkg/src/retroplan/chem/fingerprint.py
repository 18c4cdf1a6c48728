"""Circular (Morgan-style) fingerprints.

Hashes of iteratively grown atom environments set bits in a fixed-width
vector. Hashing uses blake2b so fingerprints are stable across processes
(Python's builtin hash is salted per run).
"""

from __future__ import annotations

import hashlib
import struct

import numpy as np

from .mol import Molecule


def _stable_hash(parts: tuple) -> int:
    h = hashlib.blake2b(repr(parts).encode(), digest_size=8)
    return struct.unpack("<Q", h.digest())[0]


def morgan_fingerprint(mol: Molecule, radius: int = 2, nbits: int = 1024) -> np.ndarray:
    """Boolean bit vector of hashed circular environments.

    Invariant under atom reordering: neighbor contributions are sorted
    before hashing at every iteration.
    """
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if nbits <= 0 or nbits & (nbits - 1):
        raise ValueError("nbits must be a power of two")

    ids = [
        _stable_hash((a.element, a.charge, a.explicit_h, a.aromatic, mol.degree(i)))
        for i, a in enumerate(mol.atoms)
    ]
    bits = np.zeros(nbits, dtype=bool)
    for i in ids:
        bits[i % nbits] = True

    for _ in range(radius):
        new_ids = []
        for i in range(mol.num_atoms):
            env = sorted(
                (mol.bonds[bi].order.value, ids[j]) for j, bi in mol.neighbors(i)
            )
            new_ids.append(_stable_hash((ids[i], tuple(env))))
        ids = new_ids
        for i in ids:
            bits[i % nbits] = True
    return bits
