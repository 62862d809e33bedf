"""Verifier side: membership checks, basis tracking and advancement checks.

A verifier that follows a remote log keeps only a :class:`VerifierState`:
the latest size, the latest digest and a basis of reusable authenticators.
The basis is what stops a maintainer from presenting different histories
to the same verifier across versions.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass, field
from typing import Sequence

from .authenticator import DEFAULT_HASH, HashConfig, element_authenticator, genesis_digest
from .proofs import AdvancementProof, MembershipProof, ProofComponent
from .skiplist import MAX_INDEX, MAX_LEVEL, max_level, traversal_path

COUNT_MISMATCH = "count-mismatch"
CONTINUITY_BREAK = "continuity-break"
ANCHOR_MISMATCH = "anchor-mismatch"
COMPONENT_MALFORMED = "component-malformed"
BASIS_CONFLICT = "basis-conflict"
CLAIM_MALFORMED = "claim-malformed"
SIZE_REGRESSION = "size-regression"


class VerificationError(ValueError):
    """Base class for rejected proofs; ``reason`` is a stable short code."""

    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        self.detail = detail
        super().__init__(f"{reason}: {detail}" if detail else reason)


class ComponentInvalid(VerificationError):
    pass


class ProofInvalid(VerificationError):
    pass


class AdvancementInvalid(VerificationError):
    pass


class EquivocationDetected(VerificationError):
    pass


@dataclass(frozen=True)
class MembershipClaim:
    """Datum ``datum`` sits at ``position`` of the log whose ``anchor``-th digest is known."""

    position: int
    anchor: int
    datum: bytes


@dataclass(frozen=True)
class Basis:
    """Sparse vector of reusable authenticators, slot ``p`` for list level ``p``.

    Slot ``p`` is filled exactly when bit ``p`` of the tracked index is set.
    Trailing empty slots are dropped so equal bases compare equal.
    """

    slots: tuple[bytes | None, ...] = ()

    def __post_init__(self):
        slots = list(self.slots)
        while slots and slots[-1] is None:
            slots.pop()
        object.__setattr__(self, "slots", tuple(slots))

    def __getitem__(self, p: int) -> bytes | None:
        return self.slots[p] if p < len(self.slots) else None

    def __len__(self) -> int:
        return len(self.slots)

    @property
    def populated(self) -> list[int]:
        return [p for p, v in enumerate(self.slots) if v is not None]

    def matches(self, index: int) -> bool:
        return len(self.slots) == index.bit_length() and all(
            (v is not None) == bool(index >> p & 1) for p, v in enumerate(self.slots)
        )


@dataclass(frozen=True)
class VerifierState:
    size: int
    digest: bytes
    basis: Basis = field(default_factory=Basis)

    @classmethod
    def initial(cls, hash: HashConfig = DEFAULT_HASH, genesis: bytes | None = None):
        return cls(0, genesis_digest(hash, genesis), Basis())

    def to_bytes(self) -> bytes:
        """size (8) || digest || slot count (1) || LSB-first bitmap || filled slots."""
        slots = self.basis.slots
        bitmap = bytearray((len(slots) + 7) // 8)
        for p in self.basis.populated:
            bitmap[p // 8] |= 1 << (p % 8)
        return (
            struct.pack(">Q", self.size)
            + self.digest
            + bytes([len(slots)])
            + bytes(bitmap)
            + b"".join(v for v in slots if v is not None)
        )

    @classmethod
    def from_bytes(cls, data: bytes, digest_size: int = DEFAULT_HASH.digest_size):
        data = bytes(data)
        head = 8 + digest_size + 1
        if len(data) < head:
            raise ValueError("verifier state truncated")
        (size,) = struct.unpack_from(">Q", data)
        digest = data[8 : 8 + digest_size]
        nslots = data[8 + digest_size]
        nbitmap = (nslots + 7) // 8
        bitmap = data[head : head + nbitmap]
        if len(bitmap) != nbitmap:
            raise ValueError("verifier state bitmap truncated")
        pos = head + nbitmap
        slots: list[bytes | None] = []
        for p in range(nslots):
            if bitmap[p // 8] >> (p % 8) & 1:
                value = data[pos : pos + digest_size]
                if len(value) != digest_size:
                    raise ValueError("verifier state slot truncated")
                slots.append(value)
                pos += digest_size
            else:
                slots.append(None)
        if pos != len(data):
            raise ValueError("trailing bytes in verifier state")
        if size > MAX_INDEX:
            raise ValueError("verifier state size out of range")
        state = cls(size, digest, Basis(tuple(slots)))
        if len(state.basis) != nslots or not state.basis.matches(size):
            raise ValueError("basis does not match the binary form of the size")
        return state


def _check_component_shape(j: int, c: ProofComponent, hash: HashConfig, cls=ComponentInvalid):
    if not isinstance(c, ProofComponent):
        raise cls(COMPONENT_MALFORMED, f"component for element {j} is not a ProofComponent")
    expected = max_level(j) + 1
    if len(c.predecessors) != expected:
        raise cls(
            COMPONENT_MALFORMED,
            f"element {j} needs {expected} predecessors, component has {len(c.predecessors)}",
        )
    for t in c.predecessors:
        if len(t) != hash.digest_size:
            raise cls(COMPONENT_MALFORMED, f"predecessor of element {j} has wrong width")


def process_component(j: int, c: ProofComponent, hash: HashConfig = DEFAULT_HASH) -> bytes:
    """Authenticator of element ``j`` implied by component ``c``."""
    if not isinstance(j, int) or not 1 <= j <= MAX_INDEX:
        raise ComponentInvalid(COMPONENT_MALFORMED, f"no component exists for element {j}")
    _check_component_shape(j, c, hash)
    return element_authenticator(j, c.datum, c.predecessors, hash)


def _check_claim(claim: MembershipClaim) -> None:
    for name in ("position", "anchor"):
        v = getattr(claim, name)
        if isinstance(v, bool) or not isinstance(v, int) or not 0 <= v <= MAX_INDEX:
            raise ProofInvalid(CLAIM_MALFORMED, f"{name} {v!r} is not a valid index")
    if not 1 <= claim.position <= claim.anchor:
        raise ProofInvalid(CLAIM_MALFORMED, "claim needs 1 <= position <= anchor")


def verify_membership(
    claim: MembershipClaim,
    anchor_digest: bytes,
    proof: MembershipProof | Sequence[ProofComponent],
    hash: HashConfig = DEFAULT_HASH,
    datum_length: int | None = None,
) -> bool:
    """Check ``proof`` for ``claim`` against the anchor's digest.

    Returns True if the proof authenticates ``claim.datum`` at its position,
    False if it is a valid proof for a different datum, and raises
    :class:`ProofInvalid` if it proves nothing.
    """
    _check_claim(claim)
    components = tuple(proof)
    path = traversal_path(claim.position, claim.anchor)
    if len(components) != len(path) + 1:
        raise ProofInvalid(
            COUNT_MISMATCH, f"expected {len(path) + 1} components, got {len(components)}"
        )
    if datum_length is None:
        datum_length = len(components[0].datum) if isinstance(components[0], ProofComponent) else 0
    try:
        for c in components:
            if isinstance(c, ProofComponent) and len(c.datum) != datum_length:
                raise ComponentInvalid(COMPONENT_MALFORMED, "datum length differs between components")
        t_prev = process_component(claim.position, components[0], hash)
        for hop, c in zip(path, components[1:]):
            t_cur = process_component(hop.destination, c, hash)
            if c.predecessors[hop.level] != t_prev:
                raise ProofInvalid(
                    CONTINUITY_BREAK,
                    f"element {hop.destination} disagrees on authenticator {hop.source}",
                )
            t_prev = t_cur
    except ComponentInvalid as e:
        raise ProofInvalid(e.reason, e.detail) from None
    if t_prev != bytes(anchor_digest):
        raise ProofInvalid(ANCHOR_MISMATCH, f"proof does not lead to the digest of {claim.anchor}")
    return components[0].datum == bytes(claim.datum)


def process_advancement_component(
    j: int,
    t: bytes,
    basis: Basis,
    c: ProofComponent,
    l: int,
    hash: HashConfig = DEFAULT_HASH,
) -> Basis:
    """Basis for element ``j + 2**l`` after a level-``l`` hop from ``j``.

    Works like binary addition of ``2**l``.  Every basis slot cleared by the
    carry must agree with the authenticator the component reports for the
    same element; a disagreement means the maintainer equivocated.
    """
    if not 0 <= l <= MAX_LEVEL or j % (1 << l) or j + (1 << l) > MAX_INDEX:
        raise AdvancementInvalid(COMPONENT_MALFORMED, f"no level-{l} hop leaves element {j}")
    if not basis.matches(j):
        raise AdvancementInvalid(BASIS_CONFLICT, f"basis does not describe element {j}")
    dest = j + (1 << l)
    _check_component_shape(dest, c, hash, AdvancementInvalid)
    slots = list(basis.slots) + [None] * (l + 2 - len(basis.slots))
    if slots[l] is None:
        slots[l] = bytes(t)
        return Basis(tuple(slots))
    p = l
    while slots[p] is not None:
        if slots[p] != c.predecessors[p + 1]:
            raise AdvancementInvalid(
                BASIS_CONFLICT,
                f"slot {p}: remembered authenticator of element {dest - (1 << (p + 1))} "
                "differs from the one in this proof",
            )
        carry = slots[p]
        slots[p] = None
        p += 1
        if p == len(slots):
            slots.append(None)
    slots[p] = carry
    return Basis(tuple(slots))


def verify_advancement(
    state: VerifierState,
    new_size: int,
    new_digest: bytes,
    proof: AdvancementProof | Sequence[ProofComponent],
    hash: HashConfig = DEFAULT_HASH,
) -> VerifierState:
    """Check that ``new_digest`` extends the history ``state`` already trusts.

    Returns the state for ``new_size``; ``state`` itself is never modified.
    """
    if isinstance(new_size, bool) or not isinstance(new_size, int) or new_size > MAX_INDEX:
        raise AdvancementInvalid(CLAIM_MALFORMED, f"bad target size {new_size!r}")
    if new_size <= state.size:
        raise AdvancementInvalid(
            SIZE_REGRESSION, f"target size {new_size} does not exceed {state.size}"
        )
    if len(new_digest) != hash.digest_size:
        raise AdvancementInvalid(ANCHOR_MISMATCH, "new digest has the wrong width")
    components = tuple(proof)
    path = traversal_path(state.size, new_size)
    if len(components) != len(path):
        raise AdvancementInvalid(
            COUNT_MISMATCH, f"expected {len(path)} components, got {len(components)}"
        )
    t_prev = state.digest
    basis = state.basis
    for hop, c in zip(path, components):
        basis = process_advancement_component(hop.source, t_prev, basis, c, hop.level, hash)
        try:
            t_cur = process_component(hop.destination, c, hash)
        except ComponentInvalid as e:
            raise AdvancementInvalid(e.reason, e.detail) from None
        if c.predecessors[hop.level] != t_prev:
            raise AdvancementInvalid(
                CONTINUITY_BREAK,
                f"element {hop.destination} disagrees on authenticator {hop.source}",
            )
        t_prev = t_cur
    if t_prev != bytes(new_digest):
        raise AdvancementInvalid(ANCHOR_MISMATCH, f"proof does not lead to the new digest")
    return VerifierState(new_size, bytes(new_digest), basis)


class Ordering(enum.Enum):
    A_BEFORE_B = "A-committed-before-B"
    NO_ORDER = "no-order-established"


def check_temporal_order(
    claim_a: MembershipClaim,
    proof_a: MembershipProof,
    digest_a: bytes,
    claim_b: MembershipClaim,
    proof_b: MembershipProof,
    digest_b: bytes,
    hash: HashConfig = DEFAULT_HASH,
) -> Ordering:
    """Decide whether datum A was committed before datum B was appended.

    If A is proven under the digest of ``claim_a.anchor`` and B sits at a
    position no earlier than that anchor, A existed before B.
    """
    ok_a = verify_membership(claim_a, digest_a, proof_a, hash)
    ok_b = verify_membership(claim_b, digest_b, proof_b, hash)
    if ok_a and ok_b and claim_a.anchor <= claim_b.position:
        return Ordering.A_BEFORE_B
    return Ordering.NO_ORDER


class Verifier:
    """Follows one remote log: advances its state and checks claims at the head.

    Every claim accepted is remembered; accepting two different data for the
    same position would raise :class:`EquivocationDetected`.
    """

    def __init__(self, state: VerifierState | None = None, hash: HashConfig = DEFAULT_HASH):
        self.hash = hash
        self.state = state if state is not None else VerifierState.initial(hash)
        self.accepted: dict[int, bytes] = {}

    def advance(self, new_size: int, new_digest: bytes, proof: AdvancementProof) -> VerifierState:
        self.state = verify_advancement(self.state, new_size, new_digest, proof, self.hash)
        return self.state

    def check(self, claim: MembershipClaim, proof: MembershipProof) -> bool:
        if claim.anchor != self.state.size:
            raise ProofInvalid(
                ANCHOR_MISMATCH, f"claim anchored at {claim.anchor}, verifier is at {self.state.size}"
            )
        ok = verify_membership(claim, self.state.digest, proof, self.hash)
        if ok:
            seen = self.accepted.setdefault(claim.position, bytes(claim.datum))
            if seen != bytes(claim.datum):
                raise EquivocationDetected(
                    "equivocation", f"two different data accepted at position {claim.position}"
                )
        return ok
