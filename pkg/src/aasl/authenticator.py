"""Hash primitives: partial and element authenticators.

The byte layout fed to the hash is fixed-width and therefore injective::

    index (8 bytes, big-endian) || level (1 byte) || datum || predecessor

Every element, odd ones included, gets the outer hash over its
concatenated partial authenticators.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from typing import Sequence

from .skiplist import MAX_LEVEL, check_index, max_level

_HEADER = struct.Struct(">QB")


@dataclass(frozen=True)
class HashConfig:
    """A named hash function with a stable numeric id for file preambles."""

    name: str
    algorithm_id: int
    digest_size: int

    def digest(self, data: bytes) -> bytes:
        return hashlib.new(self.name, data).digest()


SHA256 = HashConfig("sha256", 1, 32)
SHA3_256 = HashConfig("sha3_256", 2, 32)
SHA512 = HashConfig("sha512", 3, 64)
BLAKE2B = HashConfig("blake2b", 4, 64)

HASHES = {cfg.name: cfg for cfg in (SHA256, SHA3_256, SHA512, BLAKE2B)}
HASHES_BY_ID = {cfg.algorithm_id: cfg for cfg in HASHES.values()}
DEFAULT_HASH = SHA256


def get_hash(name_or_id: str | int) -> HashConfig:
    table = HASHES_BY_ID if isinstance(name_or_id, int) else HASHES
    try:
        return table[name_or_id]
    except KeyError:
        raise ValueError(f"unknown hash algorithm {name_or_id!r}") from None


def encode_hash_input(i: int, l: int, d: bytes, t: bytes) -> bytes:
    check_index(i)
    if not 0 <= l <= MAX_LEVEL:
        raise ValueError(f"level {l} outside [0, {MAX_LEVEL}]")
    return _HEADER.pack(i, l) + bytes(d) + bytes(t)


def _check_digest(t: bytes, hash: HashConfig) -> None:
    if len(t) != hash.digest_size:
        raise ValueError(
            f"digest has {len(t)} bytes, {hash.name} produces {hash.digest_size}"
        )


def partial_authenticator(
    i: int, l: int, d: bytes, pred: bytes, hash: HashConfig = DEFAULT_HASH
) -> bytes:
    """Bind element ``i`` to its level-``l`` predecessor authenticator."""
    if l > max_level(i):
        raise ValueError(f"element {i} does not appear on level {l}")
    _check_digest(pred, hash)
    return hash.digest(encode_hash_input(i, l, d, pred))


def element_authenticator(
    i: int, d: bytes, preds: Sequence[bytes], hash: HashConfig = DEFAULT_HASH
) -> bytes:
    """Authenticator of element ``i``.

    ``preds[l]`` is the authenticator of element ``i - 2**l``; exactly
    ``max_level(i) + 1`` of them are required, in level order.
    """
    expected = max_level(i) + 1
    if len(preds) != expected:
        raise ValueError(
            f"element {i} needs {expected} predecessor digests, got {len(preds)}"
        )
    partials = b"".join(
        partial_authenticator(i, l, d, pred, hash) for l, pred in enumerate(preds)
    )
    return hash.digest(partials)


def genesis_digest(hash: HashConfig = DEFAULT_HASH, override: bytes | None = None) -> bytes:
    """The agreed authenticator of sentinel element 0 (all zeros by default)."""
    if override is None:
        return bytes(hash.digest_size)
    _check_digest(override, hash)
    return bytes(override)
