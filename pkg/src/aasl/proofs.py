"""Proof components, membership/advancement proofs and their wire format.

Wire format (big-endian)::

    component := datum || predecessor count (1 byte) || predecessors
    proof     := component count (2 bytes) || components

Datum length and digest width are not on the wire; both sides know them
from the log configuration.  Indices travel beside the proof.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Iterator

_COUNT = struct.Struct(">H")


class ProofFormatError(ValueError):
    """Raised when proof bytes cannot be parsed."""

    reason = "component-malformed"


@dataclass(frozen=True)
class ProofComponent:
    """Element datum plus its predecessor authenticators in level order."""

    datum: bytes
    predecessors: tuple[bytes, ...]

    def __post_init__(self):
        object.__setattr__(self, "datum", bytes(self.datum))
        object.__setattr__(self, "predecessors", tuple(bytes(p) for p in self.predecessors))

    def to_bytes(self) -> bytes:
        if len(self.predecessors) > 255:
            raise ValueError("too many predecessors for one component")
        return self.datum + bytes([len(self.predecessors)]) + b"".join(self.predecessors)


@dataclass(frozen=True)
class _Proof:
    components: tuple[ProofComponent, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    def __len__(self) -> int:
        return len(self.components)

    def __iter__(self) -> Iterator[ProofComponent]:
        return iter(self.components)

    def __getitem__(self, k: int) -> ProofComponent:
        return self.components[k]

    def to_bytes(self) -> bytes:
        if len(self.components) > 0xFFFF:
            raise ValueError("too many components for the wire format")
        return _COUNT.pack(len(self.components)) + b"".join(
            c.to_bytes() for c in self.components
        )

    @classmethod
    def from_bytes(cls, data: bytes, datum_length: int, digest_size: int):
        return cls(decode_components(data, datum_length, digest_size))


class MembershipProof(_Proof):
    """One component per element of the traversal, source element first."""


class AdvancementProof(_Proof):
    """One component per traversal element after the source."""


def decode_components(
    data: bytes, datum_length: int, digest_size: int
) -> tuple[ProofComponent, ...]:
    data = memoryview(bytes(data))
    if len(data) < _COUNT.size:
        raise ProofFormatError("proof shorter than its count header")
    (count,) = _COUNT.unpack_from(data)
    pos = _COUNT.size
    components = []
    for k in range(count):
        end = pos + datum_length + 1
        if end > len(data):
            raise ProofFormatError(f"component {k} truncated")
        datum = bytes(data[pos : pos + datum_length])
        npreds = data[pos + datum_length]
        pos = end
        preds = []
        for _ in range(npreds):
            if pos + digest_size > len(data):
                raise ProofFormatError(f"component {k} predecessor truncated")
            preds.append(bytes(data[pos : pos + digest_size]))
            pos += digest_size
        components.append(ProofComponent(datum, tuple(preds)))
    if pos != len(data):
        raise ProofFormatError(f"{len(data) - pos} trailing bytes after proof")
    return tuple(components)
