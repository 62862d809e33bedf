"""Maintainer side: the append-only element sequence and proof construction."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

from .authenticator import DEFAULT_HASH, HashConfig, element_authenticator, genesis_digest
from .proofs import AdvancementProof, MembershipProof, ProofComponent
from .skiplist import MAX_INDEX, check_index, max_level, path_elements, traversal_path


@dataclass(frozen=True)
class LogConfig:
    sensitive_length: int
    insensitive_length: int = 0
    hash: HashConfig = DEFAULT_HASH
    genesis: bytes | None = None

    def __post_init__(self):
        if not isinstance(self.sensitive_length, int) or self.sensitive_length < 1:
            raise ValueError("sensitive_length must be a positive integer")
        if not isinstance(self.insensitive_length, int) or self.insensitive_length < 0:
            raise ValueError("insensitive_length must be a non-negative integer")
        object.__setattr__(self, "genesis", genesis_digest(self.hash, self.genesis))

    @property
    def digest_size(self) -> int:
        return self.hash.digest_size


@dataclass(frozen=True)
class ElementEntry:
    index: int
    sensitive: bytes
    insensitive: bytes
    authenticator: bytes


class MemoryStore:
    """Entries kept in Python lists; index 0 holds the genesis sentinel."""

    def __init__(self, config: LogConfig):
        self.config = config
        self._sensitive = [bytes(config.sensitive_length)]
        self._insensitive = [bytes(config.insensitive_length)]
        self._auth = [config.genesis]

    @property
    def last_index(self) -> int:
        return len(self._auth) - 1

    def read_record(self, j: int) -> ElementEntry:
        return ElementEntry(j, self._sensitive[j], self._insensitive[j], self._auth[j])

    def authenticator(self, j: int) -> bytes:
        return self._auth[j]

    def sensitive(self, j: int) -> bytes:
        return self._sensitive[j]

    def append_record(self, entry: ElementEntry) -> None:
        self._sensitive.append(entry.sensitive)
        self._insensitive.append(entry.insensitive)
        # published last so readers never see a partial entry
        self._auth.append(entry.authenticator)

    def write_insensitive(self, j: int, data: bytes) -> None:
        self._insensitive[j] = data

    def close(self) -> None:
        pass


@dataclass
class Log:
    """An authenticated append-only skip list held by its maintainer.

    Use :func:`create_log` for an in-memory log or
    :func:`aasl.storage.open_or_create` for a file-backed one.
    """

    config: LogConfig
    store: MemoryStore = None
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __post_init__(self):
        if self.store is None:
            self.store = MemoryStore(self.config)

    @property
    def size(self) -> int:
        return self.store.last_index

    @property
    def digest(self) -> bytes:
        return self.store.authenticator(self.store.last_index)

    def _check_range(self, j: int, low: int = 0, name: str = "index") -> int:
        check_index(j, name)
        if not low <= j <= self.size:
            raise IndexError(f"{name} {j} outside [{low}, {self.size}]")
        return j

    def append(self, sensitive: bytes, insensitive: bytes | None = None) -> tuple[int, bytes]:
        sensitive = bytes(sensitive)
        if insensitive is None:
            insensitive = bytes(self.config.insensitive_length)
        insensitive = bytes(insensitive)
        if len(sensitive) != self.config.sensitive_length:
            raise ValueError(
                f"sensitive datum has {len(sensitive)} bytes, "
                f"log expects {self.config.sensitive_length}"
            )
        if len(insensitive) != self.config.insensitive_length:
            raise ValueError(
                f"insensitive datum has {len(insensitive)} bytes, "
                f"log expects {self.config.insensitive_length}"
            )
        with self._lock:
            i = self.size + 1
            if i > MAX_INDEX:
                raise OverflowError("log is full")
            preds = [self.store.authenticator(i - (1 << l)) for l in range(max_level(i) + 1)]
            auth = element_authenticator(i, sensitive, preds, self.config.hash)
            self.store.append_record(ElementEntry(i, sensitive, insensitive, auth))
        return i, auth

    def digest_at(self, n: int) -> bytes:
        return self.store.authenticator(self._check_range(n))

    def entry(self, j: int) -> ElementEntry:
        return self.store.read_record(self._check_range(j))

    def set_insensitive(self, j: int, data: bytes) -> None:
        """Overwrite the unauthenticated part of entry ``j``."""
        self._check_range(j, 1)
        data = bytes(data)
        if len(data) != self.config.insensitive_length:
            raise ValueError("insensitive datum length mismatch")
        self.store.write_insensitive(j, data)

    def build_component(self, j: int) -> ProofComponent:
        self._check_range(j, 1)
        preds = tuple(self.store.authenticator(j - (1 << l)) for l in range(max_level(j) + 1))
        return ProofComponent(self.store.sensitive(j), preds)

    def build_membership_proof(self, i: int, n: int) -> MembershipProof:
        self._check_range(n, 1, "anchor")
        self._check_range(i, 1, "position")
        if i > n:
            raise ValueError(f"position {i} is after anchor {n}")
        return MembershipProof(tuple(self.build_component(j) for j in path_elements(i, n)))

    def build_advancement_proof(self, i: int, n: int) -> AdvancementProof:
        self._check_range(n, 1, "target")
        self._check_range(i, 0, "source")
        if i >= n:
            raise ValueError(f"advancement needs source < target, got {i} >= {n}")
        return AdvancementProof(
            tuple(self.build_component(hop.destination) for hop in traversal_path(i, n))
        )

    def close(self) -> None:
        self.store.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def create_log(config: LogConfig) -> Log:
    return Log(config)


def recompute_authenticators(log: Log, genesis: bytes | None = None) -> list[bytes]:
    """Rebuild the whole authenticator column from genesis and the data column."""
    hash = log.config.hash
    column = [log.config.genesis if genesis is None else bytes(genesis)]
    for i in range(1, log.size + 1):
        preds = [column[i - (1 << l)] for l in range(max_level(i) + 1)]
        column.append(element_authenticator(i, log.store.sensitive(i), preds, hash))
    return column
