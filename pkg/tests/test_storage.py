import json
import os
from pathlib import Path

import pytest

from aasl import LogConfig, MembershipClaim, audit_file, open_or_create, verify_membership
from aasl.authenticator import SHA512
from aasl.log import ElementEntry
from aasl.storage import PREAMBLE, StorageError, append_record, read_record, record_size
from helpers import datum
from reference import authenticator_column

FIXTURES = Path(__file__).parent / "fixtures"
CONFIG = LogConfig(32, 8)


@pytest.fixture
def path(tmp_path):
    return tmp_path / "log.aasl"


def fill(path, n, config=CONFIG):
    with open_or_create(path, config) as log:
        for k in range(1, n + 1):
            log.append(datum(k, config.sensitive_length), k.to_bytes(config.insensitive_length, "big"))
        return [log.digest_at(k) for k in range(n + 1)]


def test_create(path):
    with open_or_create(path, CONFIG) as log:
        assert log.size == 0
        sentinel = read_record(log, 0)
        assert sentinel.authenticator == CONFIG.genesis
        assert sentinel.sensitive == bytes(32) and sentinel.insensitive == bytes(8)
    assert path.stat().st_size == PREAMBLE.size + record_size(CONFIG)
    raw = path.read_bytes()[: PREAMBLE.size]
    assert raw == b"AASL" + bytes.fromhex("0001 0001 0020 00000020 00000008 0000000000000000")


def test_file_size_grows_by_stride(path):
    fill(path, 13)
    assert path.stat().st_size == PREAMBLE.size + 14 * record_size(CONFIG)


def test_reopen_preserves_everything(path):
    digests = fill(path, 21)
    with open_or_create(path) as log:
        assert log.size == 21
        assert [log.digest_at(k) for k in range(22)] == digests
        assert log.config == CONFIG
        proof = log.build_membership_proof(3, 21)
        assert verify_membership(MembershipClaim(3, 21, datum(3)), digests[21], proof)
        log.append(datum(22), bytes(8))
    with open_or_create(path, CONFIG) as log:
        assert log.size == 22
        assert read_record(log, 22).sensitive == datum(22)


def test_matches_reference(path):
    digests = fill(path, 30)
    assert digests == authenticator_column([datum(k) for k in range(1, 31)])


@pytest.mark.parametrize(
    "other",
    [LogConfig(16, 8), LogConfig(32, 0), LogConfig(32, 8, SHA512), LogConfig(32, 8, genesis=b"\x01" * 32)],
)
def test_config_mismatch(path, other):
    fill(path, 2)
    with pytest.raises(StorageError):
        open_or_create(path, other)


def test_read_record_range(path):
    fill(path, 5)
    with open_or_create(path, readonly=True) as log:
        assert read_record(log, 5).sensitive == datum(5)
        with pytest.raises(IndexError):
            read_record(log, 6)


def test_crash_before_commit_keeps_old_size(path):
    digests = fill(path, 6)
    with open_or_create(path) as log:
        store = log.store
        # write the next entry but never bump last-index
        entry = ElementEntry(7, datum(7), bytes(8), b"\x77" * 32)
        os.pwrite(store._fh.fileno(), entry.sensitive + entry.insensitive + entry.authenticator, store._offset(7))
    assert path.stat().st_size == PREAMBLE.size + 8 * record_size(CONFIG)
    with open_or_create(path, readonly=True) as log:
        assert log.size == 6
        assert log.digest == digests[6]
        assert audit_file(log).clean
    with open_or_create(path) as log:
        assert log.size == 6
        log.append(datum(7), bytes(8))
        assert audit_file(log).clean
    assert path.stat().st_size == PREAMBLE.size + 8 * record_size(CONFIG)


def test_append_record_checks(path):
    with open_or_create(path, CONFIG) as log:
        with pytest.raises(StorageError):
            append_record(log, ElementEntry(1, b"short", bytes(8), bytes(32)))
        with pytest.raises(StorageError):
            append_record(log, ElementEntry(2, datum(1), bytes(8), bytes(32)))


def test_truncated_file(path):
    fill(path, 4)
    with open(path, "r+b") as fh:
        fh.truncate(path.stat().st_size - 10)
    with pytest.raises(StorageError):
        open_or_create(path)


@pytest.mark.parametrize("offset, value", [(0, b"XXXX"), (4, b"\x00\x09"), (6, b"\x00\x63"), (8, b"\x00\x10")])
def test_corrupt_preamble(path, offset, value):
    fill(path, 1)
    with open(path, "r+b") as fh:
        fh.seek(offset)
        fh.write(value)
    with pytest.raises(StorageError):
        open_or_create(path)


def test_single_writer_lock(path):
    fill(path, 1)
    with open_or_create(path):
        with pytest.raises(StorageError):
            open_or_create(path)
        with open_or_create(path, readonly=True) as reader:
            assert reader.size == 1


def test_reader_refresh(path):
    fill(path, 3)
    with open_or_create(path) as writer, open_or_create(path, readonly=True) as reader:
        writer.append(datum(4), bytes(8))
        assert reader.size == 3
        assert reader.store.refresh() == 4
        assert reader.digest == writer.digest
        with pytest.raises(StorageError):
            reader.append(datum(5), bytes(8))


def test_missing_file(path):
    with pytest.raises(StorageError):
        open_or_create(path)
    with pytest.raises(StorageError):
        open_or_create(path, readonly=True)


def _flip_byte(path, offset, mask):
    with open(path, "r+b") as fh:
        fh.seek(offset)
        b = fh.read(1)[0]
        fh.seek(offset)
        fh.write(bytes([b ^ mask]))


@pytest.mark.parametrize("k", [1, 8, 15])
def test_audit_flags_data_flip(path, k):
    fill(path, 16)
    _flip_byte(path, PREAMBLE.size + k * record_size(CONFIG) + 5, 0x10)
    with open_or_create(path, readonly=True) as log:
        report = audit_file(log)
    assert report.first_bad == k
    assert not report.clean and str(report) == f"corrupt: first mismatch at entry {k}"


def test_audit_ignores_insensitive_flip(path):
    fill(path, 16)
    _flip_byte(path, PREAMBLE.size + 4 * record_size(CONFIG) + 33, 0x01)
    with open_or_create(path) as log:
        assert audit_file(log).clean
        log.set_insensitive(4, b"changed!")
        assert audit_file(log).clean


def test_audit_with_agreed_genesis(path):
    fill(path, 4)
    _flip_byte(path, PREAMBLE.size + 40, 0x01)
    with open_or_create(path, readonly=True) as log:
        assert audit_file(log).first_bad == 1
        assert audit_file(log, CONFIG.genesis).first_bad == 0


def test_conformance_fixture():
    expected = json.loads((FIXTURES / "conformance10.json").read_text())
    with open_or_create(FIXTURES / "conformance10.aasl", readonly=True) as log:
        assert log.size == 10
        assert log.config.sensitive_length == 32 and log.config.insensitive_length == 4
        assert [log.digest_at(k).hex() for k in range(11)] == expected["digests"]
        assert [log.entry(k).sensitive.hex() for k in range(1, 11)] == expected["data"]
        assert audit_file(log, bytes(32)).clean
    oracle = authenticator_column([bytes.fromhex(d) for d in expected["data"]])
    assert [t.hex() for t in oracle] == expected["digests"]
