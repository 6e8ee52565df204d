"""``v2xcms`` command line.

Exit status: 0 success, 1 verification or protocol failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import os
import string
import sys
from pathlib import Path
from typing import List, Optional

from . import bench
from .codec import decode_signed_data, encode_signed_data, hashed_id8
from .crypto import PROFILES, HashAlg, get_profile
from .errors import DecodeError, V2XError
from .flows.actors import bootstrap_end_entity
from .flows.bus import MessageBus
from .flows.runner import authorize, enroll, run_lifecycle, sign_bsm
from .messages import verify_signed_data
from .model import Certificate, SignerKind
from .rng import SEED_ENV, SeededRng
from .store import StateError, Store, command_rng

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

_HEX = set(string.hexdigits + "\r\n ")


class UsageError(Exception):
    pass


def read_blob(path) -> bytes:
    """Encoded object from a binary file; hex text is accepted too."""
    data = Path(path).read_bytes()
    try:
        text = data.decode("ascii")
    except UnicodeDecodeError:
        return data
    if text.strip() and set(text) <= _HEX:
        return bytes.fromhex("".join(text.split()))
    return data


def write_blob(path, data: bytes) -> None:
    Path(path).write_bytes(data)


def _seed(arg: Optional[str]) -> Optional[str]:
    if arg is not None:
        return arg
    env = os.environ.get(SEED_ENV)
    return env or None


def _dump_transcript(args, bus: MessageBus, mark: int) -> None:
    if getattr(args, "transcript", None):
        bus.dump(args.transcript, bus.since(mark))


# -- lifecycle commands ------------------------------------------------------------------


def cmd_init(args) -> int:
    store = Store(args.dir)
    pki = store.init(args.profile, _seed(args.seed))
    print(f"initialized {pki.profile.name.value} PKI in {store.dir}: "
          f"root {hashed_id8(pki.profile, pki.root).hex()}, "
          f"authorities {', '.join(r.value for r in pki.authorities)}")
    return EXIT_OK


def cmd_bootstrap(args) -> int:
    store = Store(args.dir)
    store.device_dir(args.name)
    pki = store.load_pki(f"bootstrap/{args.name}")
    if store.device_dir(args.name).exists():
        raise UsageError(f"device {args.name!r} already exists")
    ee = bootstrap_end_entity(pki, args.name, command_rng(store.seed, f"bootstrap/{args.name}/device"))
    store.save_pki(pki)
    store.save_device(ee)
    print(f"bootstrapped {ee.label} {args.name}: canonical key registered")
    return EXIT_OK


def cmd_enroll(args) -> int:
    store = Store(args.dir)
    bus = MessageBus()
    pki = store.load_pki(f"enroll/{args.name}", bus)
    ee = store.load_device(pki, args.name, "enroll")
    try:
        cert = enroll(pki, ee)
    finally:
        _dump_transcript(args, bus, 0)
    store.save_pki(pki)
    store.save_device(ee)
    kind = "explicit" if cert.is_explicit else "implicit"
    print(f"enrolled {args.name}: {kind} enrollment certificate {hashed_id8(pki.profile, cert).hex()}")
    return EXIT_OK


def cmd_authorize(args) -> int:
    store = Store(args.dir)
    bus = MessageBus()
    pki = store.load_pki(f"authorize/{args.name}", bus)
    ee = store.load_device(pki, args.name, "authorize")
    if ee.enrollment_cert is None:
        raise UsageError(f"device {args.name!r} is not enrolled (run enroll first)")
    try:
        creds = authorize(pki, ee, args.batch)
    finally:
        _dump_transcript(args, bus, 0)
    store.save_pki(pki)
    store.save_device(ee)
    kind = "explicit" if creds[0][0].is_explicit else "implicit"
    print(f"authorized {args.name}: {len(creds)} {kind} authorization certificate(s)")
    return EXIT_OK


def cmd_sign(args) -> int:
    store = Store(args.dir)
    pki = store.load_pki(f"sign/{args.name}")
    ee = store.load_device(pki, args.name, "sign")
    if not ee.authorization_credentials:
        raise UsageError(f"device {args.name!r} holds no authorization certificate (run authorize first)")
    if not 0 <= args.index < len(ee.authorization_credentials):
        raise UsageError(f"--index must lie in [0, {len(ee.authorization_credentials) - 1}]")
    payload = Path(args.payload).read_bytes()
    mode = SignerKind.CERTIFICATE if args.signer == "cert" else SignerKind.DIGEST
    hash_id = HashAlg.SHA_256 if args.hash_id == "sha256" else None
    msg = sign_bsm(pki, ee, payload, args.index, signer_mode=mode, hash_id=hash_id)
    write_blob(args.out, encode_signed_data(msg))
    print(f"signed {len(payload)}-byte payload -> {args.out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    store = Store(args.dir)
    pki = store.load_pki("verify")
    profile = pki.profile
    try:
        msg = decode_signed_data(read_blob(args.msg))
    except DecodeError as exc:
        print(f"FAIL decode {exc}")
        return EXIT_FAIL
    signer = msg.signer if isinstance(msg.signer, Certificate) else pki.resolve(msg.signer)
    chain = []
    if signer is not None and signer.issuer is not None:
        for role, auth in pki.authorities.items():
            if auth.cert_id == signer.issuer:
                chain = pki.issuer_chain(role)
    outcome = verify_signed_data(profile, msg, pki.resolve, chain, pki.now, allow_sha256=True)
    if outcome.accepted:
        print(f"OK {outcome.path.value}")
        return EXIT_OK
    detail = f" ({outcome.chain})" if outcome.chain is not None and not outcome.chain.ok else ""
    print(f"FAIL {outcome.reason.value}{detail}")
    return EXIT_FAIL


# -- bench ------------------------------------------------------------------------------


def _emit(args, reports) -> None:
    data = bench.emit_report(reports, args.format)
    verdicts = bench.format_verdicts(bench.ordering_verdicts(reports))
    if args.out:
        Path(args.out).write_bytes(data)
        sys.stdout.write(verdicts)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
        sys.stderr.write(verdicts)


def cmd_bench_crypto(args) -> int:
    rng = SeededRng(_seed(None)) if _seed(None) else None
    progress = (lambda s: print(f"bench {s.target.value} {s.algorithm}", file=sys.stderr)) if args.verbose else None
    reports = bench.run_crypto_suite(args.iters, args.warmup, rng=rng, progress=progress)
    _emit(args, reports)
    return EXIT_OK


def cmd_bench_e2e(args) -> int:
    names = list(PROFILES) if args.profile == "all" else [args.profile]
    seed = _seed(None) or "bench-e2e"
    reports = []
    for name in names:
        profile = get_profile(name)
        context = run_lifecycle(profile, SeededRng(f"{seed}/{profile.name.value}"), batch_size=1)
        for op in ("generate", "verify"):
            if args.verbose:
                print(f"bench e2e {profile.name.value} {op}", file=sys.stderr)
            reports.append(bench.run_e2e_bench(profile, op, args.iters, context, warmup=args.warmup))
    _emit(args, reports)
    return EXIT_OK


# -- fixtures ---------------------------------------------------------------------------


def cmd_fixtures(args) -> int:
    from .fixtures import diff_fixtures, generate_fixtures, write_fixtures

    files = generate_fixtures()
    if args.regen:
        write_fixtures(args.dir, files)
        print(f"wrote {len(files)} fixture files to {args.dir}")
        return EXIT_OK
    changed = diff_fixtures(args.dir, files)
    for rel in changed:
        print(f"differs: {rel}")
    print("fixtures up to date" if not changed else f"{len(changed)} fixture file(s) differ")
    return EXIT_FAIL if changed else EXIT_OK


# -- parser -----------------------------------------------------------------------------


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _iterations(text: str) -> int:
    v = _positive(text)
    if v < bench.MIN_ITERATIONS:
        raise argparse.ArgumentTypeError(f"at least {bench.MIN_ITERATIONS} iterations")
    return v


def build_parser() -> argparse.ArgumentParser:
    profiles = [p.lower() for p in PROFILES]
    p = argparse.ArgumentParser(prog="v2xcms", description="V2X credential management: SCMS, CCMS and C-SCMS.")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    s = sub.add_parser("init", help="create a root CA and the profile's authorities")
    s.add_argument("--profile", required=True, choices=profiles)
    s.add_argument("--dir", required=True)
    s.add_argument("--seed", help=f"deterministic run (default: ${SEED_ENV})")
    s.set_defaults(func=cmd_init)

    s = sub.add_parser("bootstrap", help="provision a device and register its canonical key")
    s.add_argument("--dir", required=True)
    s.add_argument("--name", required=True)
    s.set_defaults(func=cmd_bootstrap)

    s = sub.add_parser("enroll", help="obtain an enrollment certificate")
    s.add_argument("--dir", required=True)
    s.add_argument("--name", required=True)
    s.add_argument("--transcript", help="write the exchanged messages to this file")
    s.set_defaults(func=cmd_enroll)

    s = sub.add_parser("authorize", help="obtain authorization certificates")
    s.add_argument("--dir", required=True)
    s.add_argument("--name", required=True)
    s.add_argument("--batch", type=_positive, default=20, help="butterfly batch size (SCMS, C-SCMS)")
    s.add_argument("--transcript", help="write the exchanged messages to this file")
    s.set_defaults(func=cmd_authorize)

    s = sub.add_parser("sign", help="sign a payload as a BSM")
    s.add_argument("--dir", required=True)
    s.add_argument("--name", required=True)
    s.add_argument("--payload", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--signer", choices=("cert", "digest"), default="cert")
    s.add_argument("--hash-id", choices=("profile", "sha256"), default="profile")
    s.add_argument("--index", type=int, default=0, help="which authorization certificate to use")
    s.set_defaults(func=cmd_sign)

    s = sub.add_parser("verify", help="verify a signed message against the state directory's PKI")
    s.add_argument("--dir", required=True)
    s.add_argument("--msg", required=True)
    s.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="timing benchmarks")
    bsub = b.add_subparsers(dest="bench_command", required=True, metavar="SUITE")
    for name, func, default_iters in (("crypto", cmd_bench_crypto, bench.DEFAULT_MICRO_ITERATIONS),
                                      ("e2e", cmd_bench_e2e, bench.DEFAULT_E2E_ITERATIONS)):
        s = bsub.add_parser(name)
        s.add_argument("--iters", type=_iterations, default=default_iters)
        s.add_argument("--warmup", type=int, default=bench.DEFAULT_WARMUP)
        s.add_argument("--format", choices=("json", "csv"), default="json")
        s.add_argument("--out")
        s.add_argument("-v", "--verbose", action="store_true")
        if name == "e2e":
            s.add_argument("--profile", choices=["all", *profiles], default="all")
        s.set_defaults(func=func)

    s = sub.add_parser("fixtures", help="check (or with --regen, rewrite) the golden fixtures")
    s.add_argument("--regen", action="store_true")
    s.add_argument("--dir", default="fixtures")
    s.set_defaults(func=cmd_fixtures)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, StateError) as exc:
        print(f"v2xcms: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (V2XError, ValueError) as exc:
        print(f"v2xcms: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
