"""Attack scenarios against the verifier.

The centrepiece is the cross-version equivocation a maintainer can pull off
against a verifier that forgets reusable authenticators: two versions of
the log that each prove a different datum at position 8.  Forged values are
built straight from the hash primitives, not through :class:`Log.append`.
"""

from __future__ import annotations

import hashlib
import os
import random
import tempfile
from dataclasses import dataclass, field
from typing import Callable

from .authenticator import element_authenticator
from .log import Log, LogConfig, create_log
from .proofs import AdvancementProof, MembershipProof, ProofComponent, ProofFormatError
from .skiplist import traversal_path
from .storage import PREAMBLE, audit_file, open_or_create, record_size
from .verifier import (
    MembershipClaim,
    VerificationError,
    Verifier,
    VerifierState,
    process_component,
    verify_advancement,
    verify_membership,
)


@dataclass(frozen=True)
class ForgeryKit:
    prefix: Log
    d8: bytes
    d8_alt: bytes
    d9: bytes
    d10: bytes
    t8: bytes
    t8_alt: bytes
    t9: bytes
    t10: bytes
    a_0_9: AdvancementProof
    a_9_10: AdvancementProof
    e_8_9: MembershipProof
    e_8_10: MembershipProof


def build_forgery(prefix: Log, d8: bytes, d8_alt: bytes, d9: bytes, d10: bytes) -> ForgeryKit:
    """Two versions of one log that disagree about element 8.

    Version 1 (size 9) commits to ``d8_alt`` at position 8; version 2
    (size 10) mixes in the authenticator of ``d8`` at level 1.
    """
    if prefix.size != 7:
        raise ValueError(f"forgery needs a 7-element prefix, got {prefix.size}")
    n = prefix.config.sensitive_length
    for name, d in (("d8", d8), ("d8_alt", d8_alt), ("d9", d9), ("d10", d10)):
        if len(d) != n:
            raise ValueError(f"{name} must be {n} bytes")
    hash = prefix.config.hash
    preds8 = tuple(prefix.digest_at(k) for k in (7, 6, 4, 0))
    t8 = element_authenticator(8, d8, preds8, hash)
    t8_alt = element_authenticator(8, d8_alt, preds8, hash)
    t9 = element_authenticator(9, d9, (t8_alt,), hash)
    t10 = element_authenticator(10, d10, (t9, t8), hash)
    c8 = ProofComponent(d8, preds8)
    c8_alt = ProofComponent(d8_alt, preds8)
    c9 = ProofComponent(d9, (t8_alt,))
    c10 = ProofComponent(d10, (t9, t8))
    return ForgeryKit(
        prefix, bytes(d8), bytes(d8_alt), bytes(d9), bytes(d10),
        t8, t8_alt, t9, t10,
        a_0_9=AdvancementProof((c8_alt, c9)),
        a_9_10=AdvancementProof((c10,)),
        e_8_9=MembershipProof((c8_alt, c9)),
        e_8_10=MembershipProof((c8, c10)),
    )


def advance_without_basis(state: VerifierState, new_size: int, new_digest: bytes, proof, hash) -> VerifierState:
    """A careless verifier: chain and anchor checks only, no basis.

    Exists to show what the basis prevents; never use it for real checks.
    """
    t_prev = state.digest
    path = traversal_path(state.size, new_size)
    if len(proof) != len(path):
        raise VerificationError("count-mismatch")
    for hop, c in zip(path, proof):
        t_cur = process_component(hop.destination, c, hash)
        if c.predecessors[hop.level] != t_prev:
            raise VerificationError("continuity-break")
        t_prev = t_cur
    if t_prev != new_digest:
        raise VerificationError("anchor-mismatch")
    return VerifierState(new_size, new_digest, state.basis)


@dataclass
class Step:
    scenario: str
    step: int
    action: str
    outcome: str
    reason: str
    expected: str

    @property
    def ok(self) -> bool:
        return self.outcome == self.expected

    def line(self) -> str:
        text = f"{self.outcome}: {self.reason}" if self.reason else self.outcome
        tail = "" if self.ok else f" (expected {self.expected})"
        return f"{self.scenario} | {self.step} | {self.action} | {text}{tail}"


@dataclass
class ScenarioReport:
    scenario: str
    steps: list[Step] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return bool(self.steps) and all(s.ok for s in self.steps)

    def record(self, action: str, expected: str, fn: Callable[[], object]) -> Step:
        """Run ``fn`` and file its outcome; exceptions from verification are rejections."""
        try:
            result = fn()
        except (VerificationError, ProofFormatError) as e:
            outcome, reason = "rejected", getattr(e, "reason", "malformed")
        else:
            if result is True:
                outcome, reason = "true", ""
            elif result is False:
                outcome, reason = "false", ""
            elif isinstance(result, tuple):
                outcome, reason = result
            else:
                outcome, reason = "accepted", ""
        step = Step(self.scenario, len(self.steps) + 1, action, outcome, reason, expected)
        self.steps.append(step)
        return step

    def lines(self) -> list[str]:
        return [s.line() for s in self.steps]

    def __str__(self) -> str:
        return "\n".join(self.lines())


def _datum(tag: str, k: int, length: int = 32) -> bytes:
    out = b""
    counter = 0
    while len(out) < length:
        out += hashlib.sha256(f"{tag}/{k}/{counter}".encode()).digest()
        counter += 1
    return out[:length]


def _honest_log(tag: str, size: int, config: LogConfig | None = None) -> Log:
    log = create_log(config or LogConfig(32))
    for k in range(1, size + 1):
        log.append(_datum(tag, k, log.config.sensitive_length))
    return log


def _flip(data: bytes, bit: int) -> bytes:
    buf = bytearray(data)
    buf[bit // 8] ^= 1 << (bit % 8)
    return bytes(buf)


def need_for_bases() -> ScenarioReport:
    report = ScenarioReport("need-for-bases")
    prefix = _honest_log("need-for-bases", 7)
    kit = build_forgery(
        prefix,
        _datum("need-for-bases", 8),
        _datum("need-for-bases-alt", 8),
        _datum("need-for-bases", 9),
        _datum("need-for-bases", 10),
    )
    hash = prefix.config.hash
    report.record(
        "stateless verify <8,9,d8'> against T9", "true",
        lambda: verify_membership(MembershipClaim(8, 9, kit.d8_alt), kit.t9, kit.e_8_9, hash),
    )
    report.record(
        "stateless verify <8,10,d8> against T10", "true",
        lambda: verify_membership(MembershipClaim(8, 10, kit.d8), kit.t10, kit.e_8_10, hash),
    )

    careless = [VerifierState.initial(hash, prefix.config.genesis)]

    def careless_advance(n, t, proof):
        careless[0] = advance_without_basis(careless[0], n, t, proof, hash)

    report.record("advance 0->9 without basis", "accepted", lambda: careless_advance(9, kit.t9, kit.a_0_9))
    report.record("advance 9->10 without basis", "accepted", lambda: careless_advance(10, kit.t10, kit.a_9_10))

    verifier = Verifier(VerifierState.initial(hash, prefix.config.genesis), hash)
    report.record("advance 0->9 with basis", "accepted", lambda: verifier.advance(9, kit.t9, kit.a_0_9))
    report.record(
        "verify <8,9,d8'> at head", "true",
        lambda: verifier.check(MembershipClaim(8, 9, kit.d8_alt), kit.e_8_9),
    )
    report.record("advance 9->10 with basis", "rejected", lambda: verifier.advance(10, kit.t10, kit.a_9_10))
    report.record(
        "verify <8,10,d8> at head", "rejected",
        lambda: verifier.check(MembershipClaim(8, 10, kit.d8), kit.e_8_10),
    )
    return report


def bit_flip_proof(flips: int = 24, seed: int = 7) -> ScenarioReport:
    report = ScenarioReport("bit-flip-proof")
    log = _honest_log("bit-flip-proof", 16)
    cfg = log.config
    rng = random.Random(seed)
    claim = MembershipClaim(3, 13, log.entry(3).sensitive)
    proof = log.build_membership_proof(3, 13).to_bytes()
    digest = log.digest_at(13)

    def check(raw):
        decoded = MembershipProof.from_bytes(raw, cfg.sensitive_length, cfg.digest_size)
        return verify_membership(claim, digest, decoded, cfg.hash)

    report.record("verify honest E(3,13)", "true", lambda: check(proof))
    for _ in range(flips):
        bit = rng.randrange(len(proof) * 8)
        report.record(f"verify E(3,13) with bit {bit} flipped", "rejected", lambda: check(_flip(proof, bit)))

    adv = log.build_advancement_proof(5, 16).to_bytes()
    start = Verifier(VerifierState.initial(cfg.hash), cfg.hash)
    start.advance(5, log.digest_at(5), log.build_advancement_proof(0, 5))

    def advance(raw):
        decoded = AdvancementProof.from_bytes(raw, cfg.sensitive_length, cfg.digest_size)
        return verify_advancement(start.state, 16, log.digest_at(16), decoded, cfg.hash)

    report.record("advance 5->16 honest", "accepted", lambda: advance(adv))
    for _ in range(flips):
        bit = rng.randrange(len(adv) * 8)
        report.record(f"advance 5->16 with bit {bit} flipped", "rejected", lambda: advance(_flip(adv, bit)))
    return report


def bit_flip_store(seed: int = 11) -> ScenarioReport:
    report = ScenarioReport("bit-flip-store")
    rng = random.Random(seed)
    config = LogConfig(32, 8)
    stride = record_size(config)
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "scenario.aasl")
        with open_or_create(path, config) as log:
            for k in range(1, 17):
                log.append(_datum("bit-flip-store", k), k.to_bytes(8, "big"))
            honest_digest = log.digest

        def audit():
            with open_or_create(path, config, readonly=True) as log:
                r = audit_file(log, config.genesis)
            return ("clean", "") if r.clean else ("flagged", f"entry {r.first_bad}")

        def poke(offset, bit):
            with open(path, "r+b") as fh:
                fh.seek(offset)
                b = fh.read(1)
                fh.seek(offset)
                fh.write(bytes([b[0] ^ (1 << bit)]))

        report.record("audit untouched file", "clean", audit)
        for label, field_offset, field_len, expected in (
            ("sensitive", 0, 32, "flagged"),
            ("authenticator", 40, 32, "flagged"),
            ("insensitive", 32, 8, "clean"),
        ):
            k = rng.randrange(1, 17)
            offset = PREAMBLE.size + k * stride + field_offset + rng.randrange(field_len)
            bit = rng.randrange(8)
            poke(offset, bit)
            report.record(f"audit after flipping {label} bit of entry {k}", expected, audit)
            if label == "sensitive":
                def stale_proof(k=k):
                    with open_or_create(path, config, readonly=True) as log:
                        claim = MembershipClaim(k, 16, log.entry(k).sensitive)
                        return verify_membership(claim, honest_digest, log.build_membership_proof(k, 16))

                report.record(f"verify tampered entry {k} against published digest", "rejected", stale_proof)
            poke(offset, bit)
        report.record("audit after restoring", "clean", audit)
    return report


def wrong_count() -> ScenarioReport:
    report = ScenarioReport("wrong-count")
    log = _honest_log("wrong-count", 16)
    hash = log.config.hash
    claim = MembershipClaim(3, 13, log.entry(3).sensitive)
    proof = log.build_membership_proof(3, 13)
    extra = log.build_component(14)
    digest = log.digest_at(13)
    report.record("verify E(3,13) missing last component", "rejected",
                  lambda: verify_membership(claim, digest, proof.components[:-1], hash))
    report.record("verify E(3,13) with extra component", "rejected",
                  lambda: verify_membership(claim, digest, proof.components + (extra,), hash))
    report.record("verify empty proof", "rejected", lambda: verify_membership(claim, digest, (), hash))

    verifier = Verifier(hash=hash)
    verifier.advance(5, log.digest_at(5), log.build_advancement_proof(0, 5))
    adv = log.build_advancement_proof(5, 13)
    report.record("advance 5->13 missing a component", "rejected",
                  lambda: verifier.advance(13, log.digest_at(13), adv.components[1:]))
    report.record("advance 5->13 with extra component", "rejected",
                  lambda: verifier.advance(13, log.digest_at(13), adv.components + (extra,)))
    report.record("advance 5->13 honest", "accepted",
                  lambda: verifier.advance(13, log.digest_at(13), adv))
    return report


def replay_stale_digest() -> ScenarioReport:
    report = ScenarioReport("replay-stale-digest")
    log = _honest_log("replay-stale-digest", 12)
    hash = log.config.hash
    claim = MembershipClaim(5, 9, log.entry(5).sensitive)
    proof = log.build_membership_proof(5, 9)
    report.record("verify E(5,9) against T9", "true",
                  lambda: verify_membership(claim, log.digest_at(9), proof, hash))
    report.record("verify E(5,9) against newest T12", "rejected",
                  lambda: verify_membership(claim, log.digest_at(12), proof, hash))
    verifier = Verifier(hash=hash)
    report.record("advance 0->12", "accepted",
                  lambda: verifier.advance(12, log.digest_at(12), log.build_advancement_proof(0, 12)))
    report.record("replay advance 0->9", "rejected",
                  lambda: verifier.advance(9, log.digest_at(9), log.build_advancement_proof(0, 9)))
    report.record("verify stale claim <5,9> at head", "rejected", lambda: verifier.check(claim, proof))
    return report


SCENARIOS: dict[str, Callable[[], ScenarioReport]] = {
    "need-for-bases": need_for_bases,
    "bit-flip-proof": bit_flip_proof,
    "bit-flip-store": bit_flip_store,
    "wrong-count": wrong_count,
    "replay-stale-digest": replay_stale_digest,
}


def run_scenario(name: str) -> ScenarioReport:
    try:
        scenario = SCENARIOS[name]
    except KeyError:
        raise ValueError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}") from None
    return scenario()
