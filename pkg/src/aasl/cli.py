"""Command-line interface.

Exit codes: 0 success or TRUE, 2 a valid proof of a FALSE claim,
1 anything invalid or any error.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from pathlib import Path

from .adversary import SCENARIOS, run_scenario
from .authenticator import DEFAULT_HASH, HASHES, get_hash
from .log import LogConfig
from .proofs import AdvancementProof, MembershipProof, ProofFormatError
from .storage import StorageError, audit_file, open_or_create
from .verifier import MembershipClaim, VerificationError, VerifierState, verify_advancement, verify_membership


class CliError(Exception):
    pass


def _hex(value: str, what: str) -> bytes:
    try:
        return bytes.fromhex(value)
    except ValueError:
        raise CliError(f"{what} is not valid hex") from None


def _datum(value: str, length: int | None, what: str = "datum") -> bytes:
    if value.startswith("@"):
        try:
            data = Path(value[1:]).read_bytes()
        except OSError as e:
            raise CliError(f"cannot read {what} file: {e}") from None
    else:
        data = _hex(value, what)
    if length is not None and len(data) != length:
        raise CliError(f"{what} has {len(data)} bytes, expected {length}")
    return data


def _index(value: str, what: str) -> int:
    try:
        i = int(value, 10)
    except ValueError:
        raise CliError(f"{what} must be a decimal integer") from None
    if i < 0:
        raise CliError(f"{what} must be non-negative")
    return i


def _write_atomic(path: Path, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def cmd_init(args) -> int:
    path = Path(args.log)
    if path.exists():
        raise CliError(f"{path} already exists")
    hash = get_hash(args.hash)
    genesis = _hex(args.genesis, "genesis") if args.genesis else None
    try:
        config = LogConfig(args.sensitive_len, args.insensitive_len, hash, genesis)
    except ValueError as e:
        raise CliError(str(e)) from None
    with open_or_create(path, config) as log:
        print(log.digest_at(0).hex())
    return 0


def cmd_append(args) -> int:
    with open_or_create(args.log, create=False) as log:
        cfg = log.config
        sensitive = _datum(args.data, cfg.sensitive_length)
        insensitive = None
        if args.insensitive is not None:
            insensitive = _datum(args.insensitive, cfg.insensitive_length, "insensitive datum")
        index, digest = log.append(sensitive, insensitive)
    print(f"{index} {digest.hex()}")
    return 0


def cmd_digest(args) -> int:
    with open_or_create(args.log, readonly=True) as log:
        n = log.size if args.at is None else args.at
        try:
            print(f"{n} {log.digest_at(n).hex()}")
        except IndexError as e:
            raise CliError(str(e)) from None
    return 0


def cmd_prove(args) -> int:
    with open_or_create(args.log, readonly=True) as log:
        try:
            proof = log.build_membership_proof(args.member, args.anchor)
        except (IndexError, ValueError) as e:
            raise CliError(str(e)) from None
    _write_atomic(Path(args.out), proof.to_bytes())
    print(len(proof))
    return 0


def cmd_advance(args) -> int:
    with open_or_create(args.log, readonly=True) as log:
        try:
            proof = log.build_advancement_proof(args.source, args.target)
        except (IndexError, ValueError) as e:
            raise CliError(str(e)) from None
    _write_atomic(Path(args.out), proof.to_bytes())
    print(len(proof))
    return 0


def cmd_verify(args) -> int:
    hash = get_hash(args.hash)
    parts = args.claim.split(",", 2)
    if len(parts) != 3:
        raise CliError("claim must look like i,n,datum")
    position, anchor = _index(parts[0], "position"), _index(parts[1], "anchor")
    datum = _datum(parts[2], None)
    digest = _hex(args.digest, "digest")
    raw = _read(args.proof)
    try:
        proof = MembershipProof.from_bytes(raw, len(datum), hash.digest_size)
        ok = verify_membership(MembershipClaim(position, anchor, datum), digest, proof, hash)
    except ProofFormatError:
        print("INVALID:component-malformed")
        return 1
    except VerificationError as e:
        print(f"INVALID:{e.reason}")
        return 1
    print("TRUE" if ok else "FALSE")
    return 0 if ok else 2


def cmd_advance_verify(args) -> int:
    hash = get_hash(args.hash)
    state_path = Path(args.state)
    if state_path.exists():
        try:
            state = VerifierState.from_bytes(state_path.read_bytes(), hash.digest_size)
        except ValueError as e:
            raise CliError(f"bad verifier state: {e}") from None
    else:
        genesis = _hex(args.genesis, "genesis") if args.genesis else None
        state = VerifierState.initial(hash, genesis)
    digest = _hex(args.digest, "digest")
    raw = _read(args.proof)
    try:
        proof = AdvancementProof.from_bytes(raw, args.sensitive_len, hash.digest_size)
        new_state = verify_advancement(state, args.to, digest, proof, hash)
    except ProofFormatError:
        print("INVALID:component-malformed")
        return 1
    except VerificationError as e:
        print(f"INVALID:{e.reason}")
        return 1
    _write_atomic(state_path, new_state.to_bytes())
    print(f"ACCEPTED {new_state.size} {new_state.digest.hex()}")
    return 0


def cmd_audit(args) -> int:
    genesis = _hex(args.genesis, "genesis") if args.genesis else None
    with open_or_create(args.log, readonly=True) as log:
        report = audit_file(log, genesis)
    print(report)
    return 0 if report.clean else 1


def cmd_scenario(args) -> int:
    report = run_scenario(args.name)
    print(report)
    print(f"{args.name}: {'as expected' if report.ok else 'UNEXPECTED OUTCOME'}")
    return 0 if report.ok else 1


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as e:
        raise CliError(f"cannot read proof: {e}") from None


class _Parser(argparse.ArgumentParser):
    # exit status 2 is reserved for FALSE claims
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="aasl", description="Authenticated append-only skip list logs")
    sub = parser.add_subparsers(dest="command", required=True)
    hashes = sorted(HASHES)

    p = sub.add_parser("init", help="create a new log file")
    p.add_argument("log")
    p.add_argument("--sensitive-len", type=int, required=True)
    p.add_argument("--insensitive-len", type=int, default=0)
    p.add_argument("--genesis", help="genesis digest as hex (default all zeros)")
    p.add_argument("--hash", choices=hashes, default=DEFAULT_HASH.name)
    p.set_defaults(func=cmd_init)

    p = sub.add_parser("append", help="append one element")
    p.add_argument("log")
    p.add_argument("--data", required=True, help="sensitive datum as hex or @file")
    p.add_argument("--insensitive", help="insensitive datum as hex or @file")
    p.set_defaults(func=cmd_append)

    p = sub.add_parser("digest", help="print the digest of the log (or of element --at)")
    p.add_argument("log")
    p.add_argument("--at", type=int)
    p.set_defaults(func=cmd_digest)

    p = sub.add_parser("prove", help="write a membership proof")
    p.add_argument("log")
    p.add_argument("--member", type=int, required=True)
    p.add_argument("--anchor", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("advance", help="write an advancement proof")
    p.add_argument("log")
    p.add_argument("--from", dest="source", type=int, required=True)
    p.add_argument("--to", dest="target", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_advance)

    p = sub.add_parser("verify", help="check a membership proof")
    p.add_argument("proof")
    p.add_argument("--claim", required=True, help="i,n,datum with datum as hex or @file")
    p.add_argument("--digest", required=True, help="digest of element n as hex")
    p.add_argument("--hash", choices=hashes, default=DEFAULT_HASH.name)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("advance-verify", help="check an advancement and update verifier state")
    p.add_argument("proof")
    p.add_argument("--state", required=True, help="verifier state file (created if missing)")
    p.add_argument("--to", type=int, required=True)
    p.add_argument("--digest", required=True)
    p.add_argument("--sensitive-len", type=int, required=True)
    p.add_argument("--genesis", help="genesis digest for a new state file")
    p.add_argument("--hash", choices=hashes, default=DEFAULT_HASH.name)
    p.set_defaults(func=cmd_advance_verify)

    p = sub.add_parser("audit", help="recompute and check every authenticator")
    p.add_argument("log")
    p.add_argument("--genesis", help="agreed genesis digest to check entry 0 against")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("scenario", help="run an attack scenario")
    p.add_argument("name", help=", ".join(sorted(SCENARIOS)))
    p.set_defaults(func=cmd_scenario)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, StorageError, ValueError, IndexError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
