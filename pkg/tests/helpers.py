import hashlib

from aasl import LogConfig, create_log


def datum(k, length=32, tag="test"):
    out = b""
    counter = 0
    while len(out) < length:
        out += hashlib.sha256(f"{tag}/{k}/{counter}".encode()).digest()
        counter += 1
    return out[:length]


def honest_log(size, config=None, tag="test"):
    log = create_log(config or LogConfig(32))
    for k in range(1, size + 1):
        log.append(datum(k, log.config.sensitive_length, tag))
    return log
