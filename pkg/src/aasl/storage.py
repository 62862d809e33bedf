"""On-disk layout: one fixed-size preamble followed by fixed-size entries.

Preamble (big-endian, 26 bytes)::

    magic "AASL" | format version u16 | hash id u16 | digest width u16 |
    sensitive length u32 | insensitive length u32 | last index u64

Entry ``k`` (``k = 0`` is the genesis sentinel) lives at
``PREAMBLE.size + k * record_size`` and holds
``sensitive || insensitive || authenticator``.  An append writes and syncs
the entry before bumping ``last index``, so a crash in between leaves the
old, consistent log; anything past ``last index`` is ignored.
"""

from __future__ import annotations

import fcntl
import os
import struct
from dataclasses import dataclass
from pathlib import Path

from .authenticator import get_hash
from .log import ElementEntry, Log, LogConfig, recompute_authenticators

MAGIC = b"AASL"
FORMAT_VERSION = 1
PREAMBLE = struct.Struct(">4sHHHIIQ")
_LAST_INDEX_OFFSET = PREAMBLE.size - 8


class StorageError(Exception):
    pass


def record_size(config: LogConfig) -> int:
    return config.sensitive_length + config.insensitive_length + config.digest_size


def encode_preamble(config: LogConfig, last_index: int) -> bytes:
    return PREAMBLE.pack(
        MAGIC,
        FORMAT_VERSION,
        config.hash.algorithm_id,
        config.digest_size,
        config.sensitive_length,
        config.insensitive_length,
        last_index,
    )


def decode_preamble(data: bytes) -> tuple[LogConfig, int]:
    """Parse a preamble; the genesis value is filled in from entry 0 later."""
    if len(data) < PREAMBLE.size:
        raise StorageError("file too short for a preamble")
    magic, version, hash_id, width, slen, ilen, last = PREAMBLE.unpack_from(data)
    if magic != MAGIC:
        raise StorageError(f"bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise StorageError(f"unsupported format version {version}")
    try:
        hash = get_hash(hash_id)
    except ValueError as e:
        raise StorageError(str(e)) from None
    if width != hash.digest_size:
        raise StorageError(f"digest width {width} does not match {hash.name}")
    try:
        config = LogConfig(slen, ilen, hash)
    except ValueError as e:
        raise StorageError(str(e)) from None
    return config, last


class FileStore:
    """Fixed-stride entry file.  One writer (flock-ed), any number of readers."""

    def __init__(self, path: Path, config: LogConfig, fh, last_index: int, readonly: bool):
        self.path = path
        self.config = config
        self._fh = fh
        self._last = last_index
        self.readonly = readonly
        self._stride = record_size(config)
        self._slen = config.sensitive_length
        self._ilen = config.insensitive_length

    @property
    def last_index(self) -> int:
        return self._last

    def _offset(self, j: int) -> int:
        return PREAMBLE.size + j * self._stride

    def _read(self, offset: int, n: int) -> bytes:
        data = os.pread(self._fh.fileno(), n, offset)
        if len(data) != n:
            raise StorageError(f"{self.path}: truncated at offset {offset}")
        return data

    def read_record(self, j: int) -> ElementEntry:
        if not 0 <= j <= self._last:
            raise IndexError(f"entry {j} outside [0, {self._last}]")
        raw = self._read(self._offset(j), self._stride)
        s, i = self._slen, self._slen + self._ilen
        return ElementEntry(j, raw[:s], raw[s:i], raw[i:])

    def authenticator(self, j: int) -> bytes:
        return self._read(self._offset(j) + self._slen + self._ilen, self.config.digest_size)

    def sensitive(self, j: int) -> bytes:
        return self._read(self._offset(j), self._slen)

    def _require_writable(self):
        if self.readonly:
            raise StorageError(f"{self.path} is open read-only")

    def append_record(self, entry: ElementEntry) -> None:
        self._require_writable()
        if (
            len(entry.sensitive) != self._slen
            or len(entry.insensitive) != self._ilen
            or len(entry.authenticator) != self.config.digest_size
        ):
            raise StorageError("entry fields do not match the preamble lengths")
        if entry.index != self._last + 1:
            raise StorageError(f"entry {entry.index} is not the next index {self._last + 1}")
        fd = self._fh.fileno()
        os.pwrite(fd, entry.sensitive + entry.insensitive + entry.authenticator, self._offset(entry.index))
        os.fsync(fd)
        self.commit(entry.index)

    def commit(self, last_index: int) -> None:
        """Publish ``last_index`` in the preamble; the commit point of an append."""
        fd = self._fh.fileno()
        os.pwrite(fd, struct.pack(">Q", last_index), _LAST_INDEX_OFFSET)
        os.fsync(fd)
        self._last = last_index

    def write_insensitive(self, j: int, data: bytes) -> None:
        self._require_writable()
        os.pwrite(self._fh.fileno(), data, self._offset(j) + self._slen)
        os.fsync(self._fh.fileno())

    def refresh(self) -> int:
        """Re-read the committed last index (for read-only handles)."""
        config, last = decode_preamble(self._read(0, PREAMBLE.size))
        self._check_length(last)
        self._last = last
        return last

    def _check_length(self, last: int) -> None:
        needed = self._offset(last + 1)
        if os.fstat(self._fh.fileno()).st_size < needed:
            raise StorageError(f"{self.path}: file truncated, {last} entries committed")

    def close(self) -> None:
        if not self._fh.closed:
            self._fh.close()


def _lock(fh, path) -> None:
    try:
        fcntl.flock(fh.fileno(), fcntl.LOCK_EX | fcntl.LOCK_NB)
    except BlockingIOError:
        fh.close()
        raise StorageError(f"{path} is locked by another writer") from None


def _same_config(a: LogConfig, b: LogConfig) -> bool:
    return (
        a.sensitive_length == b.sensitive_length
        and a.insensitive_length == b.insensitive_length
        and a.hash == b.hash
        and a.genesis == b.genesis
    )


def open_or_create(
    path: str | os.PathLike,
    config: LogConfig | None = None,
    readonly: bool = False,
    create: bool = True,
) -> Log:
    """Open the log file at ``path``, creating it from ``config`` if missing.

    When the file exists and ``config`` is given, they must agree.
    """
    path = Path(path)
    if not path.exists():
        if not create or readonly:
            raise StorageError(f"{path} does not exist")
        if config is None:
            raise StorageError("a LogConfig is needed to create a new log")
        fh = open(path, "x+b")
        _lock(fh, path)
        sentinel = bytes(config.sensitive_length + config.insensitive_length) + config.genesis
        fh.write(encode_preamble(config, 0) + sentinel)
        fh.flush()
        os.fsync(fh.fileno())
        return Log(config, FileStore(path, config, fh, 0, readonly=False))

    fh = open(path, "rb" if readonly else "r+b")
    if not readonly:
        _lock(fh, path)
    try:
        stored, last = decode_preamble(os.pread(fh.fileno(), PREAMBLE.size, 0))
        store = FileStore(path, stored, fh, last, readonly)
        store._check_length(last)
        genesis = store.authenticator(0)
        stored = LogConfig(stored.sensitive_length, stored.insensitive_length, stored.hash, genesis)
        store.config = stored
        if config is not None and not _same_config(config, stored):
            raise StorageError(f"{path}: configuration does not match the existing log")
        if not readonly:
            # drop a torn tail left by an uncommitted append
            fh.truncate(store._offset(last + 1))
    except BaseException:
        fh.close()
        raise
    return Log(stored, store)


def read_record(log: Log, j: int) -> ElementEntry:
    return log.entry(j)


def append_record(log: Log, entry: ElementEntry) -> None:
    """Low-level append of a pre-computed entry; no authenticator is computed."""
    log.store.append_record(entry)


@dataclass(frozen=True)
class AuditReport:
    checked: int
    first_bad: int | None

    @property
    def clean(self) -> bool:
        return self.first_bad is None

    def __str__(self) -> str:
        if self.clean:
            return f"clean: {self.checked} entries verified"
        return f"corrupt: first mismatch at entry {self.first_bad}"


def audit_file(log: Log, genesis: bytes | None = None) -> AuditReport:
    """Recompute every authenticator from the data column and compare.

    Pass the agreed ``genesis`` to also check the sentinel entry; by default
    the file's own entry 0 is trusted.
    """
    column = recompute_authenticators(log, genesis)
    for j, expected in enumerate(column):
        if log.store.authenticator(j) != expected:
            return AuditReport(log.size, j)
    return AuditReport(log.size, None)
