import threading

import pytest

from aasl import LogConfig, MembershipClaim, create_log, verify_membership
from aasl.authenticator import element_authenticator, genesis_digest
from aasl.log import recompute_authenticators
from aasl.proofs import ProofComponent
from helpers import datum, honest_log
from reference import authenticator_column


def test_create_log():
    log = create_log(LogConfig(32))
    assert log.size == 0
    assert log.digest == genesis_digest()
    assert log.digest_at(0) == bytes(32)
    other = create_log(LogConfig(32))
    assert other.config == log.config
    log.append(datum(1))
    assert log.size == 1


@pytest.mark.parametrize("kwargs", [dict(sensitive_length=0), dict(sensitive_length=4, insensitive_length=-1)])
def test_invalid_config(kwargs):
    with pytest.raises(ValueError):
        LogConfig(**kwargs)


def test_append_matches_reference_column(log64):
    data = [log64.entry(k).sensitive for k in range(1, 65)]
    assert [log64.digest_at(k) for k in range(65)] == authenticator_column(data)


def test_first_append():
    log = create_log(LogConfig(32))
    index, t1 = log.append(datum(1))
    assert index == 1
    assert t1 == element_authenticator(1, datum(1), [genesis_digest()])
    assert log.digest == t1


def test_append_length_checks():
    log = create_log(LogConfig(4, 2))
    with pytest.raises(ValueError):
        log.append(b"abc")
    with pytest.raises(ValueError):
        log.append(b"abcd", b"x")
    log.append(b"abcd")
    assert log.entry(1).insensitive == b"\x00\x00"


def test_digest_at_range(log16):
    assert log16.digest_at(16) == log16.digest
    with pytest.raises(IndexError):
        log16.digest_at(17)


def test_insensitive_data_does_not_affect_authenticators():
    a = create_log(LogConfig(8, 4))
    b = create_log(LogConfig(8, 4))
    for k in range(1, 10):
        a.append(datum(k, 8), b"aaaa")
        b.append(datum(k, 8), k.to_bytes(4, "big"))
    assert a.digest == b.digest
    a.set_insensitive(3, b"zzzz")
    assert a.entry(3).insensitive == b"zzzz"
    assert recompute_authenticators(a) == [a.digest_at(k) for k in range(10)]


def test_build_component_shapes(log16):
    t = log16.digest_at
    assert log16.build_component(8) == ProofComponent(log16.entry(8).sensitive, (t(7), t(6), t(4), t(0)))
    assert log16.build_component(9) == ProofComponent(log16.entry(9).sensitive, (t(8),))
    assert log16.build_component(10).predecessors == (t(9), t(8))
    with pytest.raises(IndexError):
        log16.build_component(0)
    with pytest.raises(IndexError):
        log16.build_component(17)


def test_membership_proof_shapes(log16):
    assert [c.datum for c in log16.build_membership_proof(3, 7)] == [log16.entry(j).sensitive for j in (3, 4, 6, 7)]
    assert len(log16.build_membership_proof(8, 9)) == 2
    assert log16.build_membership_proof(5, 5).components == (log16.build_component(5),)
    for bad in [(0, 5), (6, 5), (3, 17)]:
        with pytest.raises((IndexError, ValueError)):
            log16.build_membership_proof(*bad)


def test_advancement_proof_shapes(log16):
    t = log16.digest_at
    a = log16.build_advancement_proof(0, 9)
    assert [len(c.predecessors) for c in a] == [4, 1]
    assert a[0].predecessors == (t(7), t(6), t(4), t(0))
    assert log16.build_advancement_proof(9, 10).components == (log16.build_component(10),)
    assert log16.build_advancement_proof(4, 8).components == (log16.build_component(8),)
    for bad in [(5, 5), (6, 5), (3, 17)]:
        with pytest.raises((IndexError, ValueError)):
            log16.build_advancement_proof(*bad)


def test_advancement_is_membership_minus_first(log64):
    for n in range(2, 65):
        for i in range(1, n):
            assert log64.build_advancement_proof(i, n).components == log64.build_membership_proof(i, n).components[1:]


def test_entries_are_stable_across_appends():
    log = honest_log(20)
    before = [log.entry(k) for k in range(21)]
    for k in range(21, 60):
        log.append(datum(k))
    assert [log.entry(k) for k in range(21)] == before


def test_concurrent_readers_see_consistent_prefix():
    log = honest_log(4)
    errors = []
    done = threading.Event()

    def reader():
        while not done.is_set():
            n = log.size
            if n >= 2:
                proof = log.build_membership_proof(1, n)
                try:
                    assert verify_membership(MembershipClaim(1, n, log.entry(1).sensitive), log.digest_at(n), proof)
                except Exception as e:  # pragma: no cover - reported below
                    errors.append(e)

    threads = [threading.Thread(target=reader) for _ in range(3)]
    for th in threads:
        th.start()
    for k in range(5, 300):
        log.append(datum(k))
    done.set()
    for th in threads:
        th.join()
    assert not errors
