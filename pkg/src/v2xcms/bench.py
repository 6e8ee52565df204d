"""Micro and end-to-end timing harness.

Each run prepares all per-iteration inputs up front, then times one call per
iteration into a preallocated sample buffer.  The clock is injectable so the
statistics can be checked against a deterministic fake.
"""

from __future__ import annotations

import csv
import io
import json
import math
import platform
import statistics
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence

from .crypto import (
    PROFILES,
    CryptoProfile,
    HashAlg,
    SymAlg,
    aead_decrypt,
    aead_encrypt,
    generate_keypair,
    get_profile,
    hash_bytes,
    kem_decapsulate,
    kem_encapsulate,
    profile_for_curve,
    sign,
    verify,
)
from .crypto.curves import CurveId, scalar_mult_count
from .errors import MissingPkiState, UnknownTarget
from .messages import ChainCache, sign_data, verify_signed_data
from .model import PSID_BSM
from .rng import SystemRng

MIN_ITERATIONS = 30
DEFAULT_MICRO_ITERATIONS = 3000
DEFAULT_E2E_ITERATIONS = 1000
DEFAULT_WARMUP = 100
E2E_PAYLOAD = 200
BULK_PAYLOAD = 1024

Clock = Callable[[], int]  # nanoseconds


class BenchTarget(str, Enum):
    KEYGEN = "keygen"
    SIGN = "sign"
    VERIFY = "verify"
    KEM_KEYGEN = "kem_keygen"
    KEM_ENCAP = "kem_encap"
    KEM_DECAP = "kem_decap"
    HASH = "hash"
    SYM_ENCRYPT = "sym_encrypt"
    SYM_DECRYPT = "sym_decrypt"
    E2E_SIGN = "e2e_sign"
    E2E_VERIFY = "e2e_verify"


_CURVE_TARGETS = {BenchTarget.KEYGEN, BenchTarget.SIGN, BenchTarget.VERIFY,
                  BenchTarget.KEM_KEYGEN, BenchTarget.KEM_ENCAP, BenchTarget.KEM_DECAP}
_BULK_TARGETS = {BenchTarget.HASH, BenchTarget.SYM_ENCRYPT, BenchTarget.SYM_DECRYPT}
_E2E_TARGETS = {BenchTarget.E2E_SIGN, BenchTarget.E2E_VERIFY}


@dataclass(frozen=True)
class BenchSpec:
    target: BenchTarget
    algorithm: str  # curve, hash, cipher or profile name depending on target
    iterations: Optional[int] = None
    warmup: int = DEFAULT_WARMUP
    payload_bytes: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "target", BenchTarget(self.target))
        e2e = self.target in _E2E_TARGETS
        if self.iterations is None:
            object.__setattr__(self, "iterations", DEFAULT_E2E_ITERATIONS if e2e else DEFAULT_MICRO_ITERATIONS)
        if self.payload_bytes is None:
            object.__setattr__(self, "payload_bytes", E2E_PAYLOAD if e2e else BULK_PAYLOAD)
        if self.iterations < MIN_ITERATIONS:
            raise ValueError(f"at least {MIN_ITERATIONS} iterations are needed for stable percentiles")
        if self.warmup < 0 or self.payload_bytes <= 0:
            raise ValueError("warmup must be >= 0 and payload_bytes > 0")


@dataclass(frozen=True)
class BenchReport:
    spec: BenchSpec
    samples: int
    min_us: float
    median_us: float
    mean_us: float
    p95_us: float
    host: str
    raw_us: Sequence[float] = field(repr=False, compare=False, default=())
    scalar_mults_per_op: Optional[float] = None


def host_descriptor() -> str:
    return f"{platform.machine()} {platform.system()} {platform.release()}; " \
           f"{platform.python_implementation()} {platform.python_version()}"


def percentile_nearest_rank(sorted_values: Sequence[float], pct: float) -> float:
    rank = max(1, math.ceil(pct / 100 * len(sorted_values)))
    return sorted_values[rank - 1]


def summarize(spec: BenchSpec, samples_us: Sequence[float], host: Optional[str] = None,
              scalar_mults: Optional[float] = None) -> BenchReport:
    ordered = sorted(samples_us)
    return BenchReport(
        spec=spec,
        samples=len(ordered),
        min_us=ordered[0],
        median_us=statistics.median(ordered),
        mean_us=statistics.fmean(ordered),
        p95_us=percentile_nearest_rank(ordered, 95),
        host=host_descriptor() if host is None else host,
        raw_us=tuple(samples_us),
        scalar_mults_per_op=scalar_mults,
    )


# counts sample-buffer allocations; a run must make exactly one
_buffers_allocated = 0


def buffers_allocated() -> int:
    return _buffers_allocated


def _timed(ops: Sequence[Callable[[], object]], warmup: Sequence[Callable[[], object]], clock: Clock) -> List[float]:
    global _buffers_allocated
    for op in warmup:
        op()
    n = len(ops)
    samples = [0.0] * n
    _buffers_allocated += 1
    for i in range(n):
        op = ops[i]
        t0 = clock()
        op()
        t1 = clock()
        samples[i] = (t1 - t0) / 1000.0
    return samples


# -- micro benchmarks --------------------------------------------------------------------


def _curve_profile(name: str) -> CryptoProfile:
    try:
        return profile_for_curve(CurveId[name])
    except KeyError:
        raise UnknownTarget(f"unknown curve {name!r}; expected one of {[c.name for c in CurveId]}") from None


def _prepare_micro(spec: BenchSpec, n: int, rng) -> List[Callable[[], object]]:
    """``n`` zero-argument closures, each with its own fresh input."""
    t = spec.target
    size = spec.payload_bytes
    if t in _CURVE_TARGETS:
        profile = _curve_profile(spec.algorithm)
        if t in (BenchTarget.KEYGEN, BenchTarget.KEM_KEYGEN):
            return [lambda: generate_keypair(profile, rng)] * n
        key = generate_keypair(profile, rng)
        msgs = [rng.randbytes(32) for _ in range(n)]
        if t is BenchTarget.SIGN:
            return [lambda m=m: sign(profile, key, m, rng) for m in msgs]
        if t is BenchTarget.VERIFY:
            sigs = [sign(profile, key, m, rng) for m in msgs]
            return [lambda m=m, s=s: verify(profile, key.public_point, m, s) for m, s in zip(msgs, sigs)]
        wrapped = [m[:16] for m in msgs]
        if t is BenchTarget.KEM_ENCAP:
            return [lambda k=k: kem_encapsulate(profile, key.public_point, k, rng) for k in wrapped]
        cts = [kem_encapsulate(profile, key.public_point, k, rng) for k in wrapped]
        return [lambda c=c: kem_decapsulate(profile, key, c) for c in cts]
    if t is BenchTarget.HASH:
        try:
            alg = HashAlg[spec.algorithm]
        except KeyError:
            raise UnknownTarget(f"unknown hash {spec.algorithm!r}") from None
        data = [rng.randbytes(size) for _ in range(n)]
        return [lambda d=d: hash_bytes(alg, d) for d in data]
    if t in (BenchTarget.SYM_ENCRYPT, BenchTarget.SYM_DECRYPT):
        try:
            alg = SymAlg[spec.algorithm]
        except KeyError:
            raise UnknownTarget(f"unknown cipher {spec.algorithm!r}") from None
        profile = next(p for p in PROFILES.values() if p.symmetric is alg)
        key = rng.randbytes(16)
        nonces = [rng.randbytes(12) for _ in range(n)]
        data = [rng.randbytes(size) for _ in range(n)]
        if t is BenchTarget.SYM_ENCRYPT:
            return [lambda nn=nn, d=d: aead_encrypt(profile, key, nn, d) for nn, d in zip(nonces, data)]
        cts = [aead_encrypt(profile, key, nn, d) for nn, d in zip(nonces, data)]
        return [lambda nn=nn, c=c: aead_decrypt(profile, key, nn, c) for nn, c in zip(nonces, cts)]
    raise UnknownTarget(f"{t.value} is not a micro-benchmark target")


def run_micro_bench(spec: BenchSpec, clock: Clock = time.perf_counter_ns, rng=None) -> BenchReport:
    """Warm up, then time ``spec.iterations`` calls of one primitive."""
    rng = rng or SystemRng()
    ops = _prepare_micro(spec, spec.iterations + spec.warmup, rng)
    samples = _timed(ops[spec.warmup:], ops[:spec.warmup], clock)
    return summarize(spec, samples)


# -- end-to-end --------------------------------------------------------------------------


def run_e2e_bench(profile, operation: str, iterations: int = DEFAULT_E2E_ITERATIONS, context=None, *,
                  warmup: int = DEFAULT_WARMUP, clock: Clock = time.perf_counter_ns, rng=None) -> BenchReport:
    """Time signing or verifying a 200-byte BSM under an authorization credential.

    ``context`` is a completed lifecycle (anything with ``pki`` and ``ee``
    whose device holds authorization credentials).  Verification uses a warm
    chain cache with the certificate carried inline, so the per-message cost is
    key extraction plus one signature check.
    """
    from .flows.runner import authorization_role

    if isinstance(profile, str):
        profile = get_profile(profile)
    target = {"generate": BenchTarget.E2E_SIGN, "verify": BenchTarget.E2E_VERIFY}.get(operation)
    if target is None:
        raise UnknownTarget(f"unknown e2e operation {operation!r}; expected generate or verify")
    spec = BenchSpec(target, profile.name.value, iterations, warmup, E2E_PAYLOAD)
    if context is None or not getattr(context.ee, "authorization_credentials", None):
        raise MissingPkiState("end-to-end benchmarks need an enrolled and authorized device")
    pki, ee = context.pki, context.ee
    if pki.profile is not profile:
        raise MissingPkiState("PKI state belongs to another profile")
    rng = rng or SystemRng()
    cert, d = ee.authorization_credentials[0]
    chain = pki.issuer_chain(authorization_role(profile))
    issuer_public = None if cert.is_explicit else chain[0].tbs.key_point
    n = iterations + warmup
    payloads = [rng.randbytes(E2E_PAYLOAD) for _ in range(n)]

    def signer(p):
        return sign_data(profile, p, PSID_BSM, cert, d, time=pki.now64, rng=rng, issuer_public=issuer_public)

    if target is BenchTarget.E2E_SIGN:
        ops = [lambda p=p: signer(p) for p in payloads]
    else:
        cache = ChainCache()
        msgs = [signer(p) for p in payloads]
        if not verify_signed_data(profile, msgs[0], None, chain, pki.now, cache=cache).accepted:
            raise MissingPkiState("benchmark credential does not verify")

        def check(m):
            if not verify_signed_data(profile, m, None, chain, pki.now, cache=cache).accepted:
                raise AssertionError("benchmark message rejected")

        ops = [lambda m=m: check(m) for m in msgs]
    before = scalar_mult_count()
    samples = _timed(ops[warmup:], ops[:warmup], clock)
    mults = (scalar_mult_count() - before) / n
    return summarize(spec, samples, scalar_mults=mults)


# -- reporting ---------------------------------------------------------------------------

CSV_COLUMNS = ("target", "algorithm", "samples", "min_us", "median_us", "mean_us", "p95_us")


def _row(r: BenchReport) -> Dict[str, object]:
    return {
        "target": r.spec.target.value,
        "algorithm": r.spec.algorithm,
        "samples": r.samples,
        "min_us": round(r.min_us, 3),
        "median_us": round(r.median_us, 3),
        "mean_us": round(r.mean_us, 3),
        "p95_us": round(r.p95_us, 3),
    }


def emit_report(reports: Sequence[BenchReport], fmt: str = "json") -> bytes:
    if not reports:
        raise ValueError("no reports to emit")
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in reports:
            w.writerow(_row(r))
        return buf.getvalue().encode("utf-8")
    if fmt == "json":
        rows = []
        for r in reports:
            row = _row(r)
            row.update(iterations=r.spec.iterations, warmup=r.spec.warmup,
                       payload_bytes=r.spec.payload_bytes, host=r.host)
            if r.scalar_mults_per_op is not None:
                row["scalar_mults_per_op"] = r.scalar_mults_per_op
            rows.append(row)
        return (json.dumps(rows, indent=2) + "\n").encode("utf-8")
    raise ValueError(f"unknown report format {fmt!r}")


# -- ordering verdicts -------------------------------------------------------------------


@dataclass(frozen=True)
class OrderingClaim:
    claim: str
    description: str
    expected_ordering_held: bool
    detail: str
    asserted: bool = False  # only structurally guaranteed claims are enforced


def _within(a: float, b: float, tolerance: float) -> bool:
    return abs(a - b) <= tolerance * min(a, b)


def _find(reports, target, algorithm) -> Optional[BenchReport]:
    for r in reports:
        if r.spec.target is target and r.spec.algorithm == algorithm:
            return r
    return None


def ordering_verdicts(reports: Sequence[BenchReport]) -> List[OrderingClaim]:
    """Check the expected orderings for whichever pairs are present in ``reports``."""
    out = []

    def pair(target, a, b):
        return _find(reports, target, a), _find(reports, target, b)

    sm2, p256 = pair(BenchTarget.SIGN, "SM2_256", "NIST_P256")
    if sm2 and p256:
        out.append(OrderingClaim("a", "SM2 sign median >= ECDSA P-256 sign median",
                                 sm2.median_us >= p256.median_us,
                                 f"SM2 {sm2.median_us:.1f} us vs P-256 {p256.median_us:.1f} us"))
    sm2, p256 = pair(BenchTarget.VERIFY, "SM2_256", "NIST_P256")
    if sm2 and p256:
        out.append(OrderingClaim("b", "SM2 and ECDSA verify medians within 25%",
                                 _within(sm2.median_us, p256.median_us, 0.25),
                                 f"SM2 {sm2.median_us:.1f} us vs P-256 {p256.median_us:.1f} us"))
    for target in (BenchTarget.KEM_ENCAP, BenchTarget.KEM_DECAP):
        sm2, p256 = pair(target, "SM2_256", "NIST_P256")
        if sm2 and p256:
            out.append(OrderingClaim("c", f"{target.value} medians for P-256 and SM2-256 within 25%",
                                     _within(sm2.median_us, p256.median_us, 0.25),
                                     f"SM2 {sm2.median_us:.1f} us vs P-256 {p256.median_us:.1f} us"))
    scms, ccms = pair(BenchTarget.E2E_VERIFY, "SCMS", "CCMS")
    if scms and ccms:
        held = scms.median_us >= ccms.median_us
        detail = f"SCMS {scms.median_us:.1f} us vs CCMS {ccms.median_us:.1f} us"
        if scms.scalar_mults_per_op is not None and ccms.scalar_mults_per_op is not None:
            detail += f"; scalar mults/op {scms.scalar_mults_per_op:g} vs {ccms.scalar_mults_per_op:g}"
        out.append(OrderingClaim("d", "e2e verify median SCMS (implicit) >= CCMS (explicit)", held, detail,
                                 asserted=True))
    cs, sc = pair(BenchTarget.E2E_SIGN, "CSCMS", "SCMS")
    if cs and sc:
        out.append(OrderingClaim("e2e-sign", "e2e generate median C-SCMS >= SCMS",
                                 cs.median_us >= sc.median_us,
                                 f"C-SCMS {cs.median_us:.1f} us vs SCMS {sc.median_us:.1f} us"))
    sm3, sha = pair(BenchTarget.HASH, "SM3_256", "SHA_256")
    if sm3 and sha:
        out.append(OrderingClaim("hash", "SM3 median <= SHA-256 median (report only)",
                                 sm3.median_us <= sha.median_us,
                                 f"SM3 {sm3.median_us:.2f} us vs SHA-256 {sha.median_us:.2f} us"))
    return out


def format_verdicts(claims: Sequence[OrderingClaim]) -> str:
    lines = ["verdicts:"]
    for c in claims:
        lines.append(f"  - claim: {c.claim}")
        lines.append(f"    description: {c.description}")
        lines.append(f"    expected_ordering_held: {'true' if c.expected_ordering_held else 'false'}")
        lines.append(f"    detail: {c.detail}")
    return "\n".join(lines) + "\n"


# -- standard suites ---------------------------------------------------------------------

CRYPTO_SUITE = (
    [(t, c) for t in (BenchTarget.KEYGEN, BenchTarget.SIGN, BenchTarget.VERIFY)
     for c in ("NIST_P256", "BRAINPOOL_P256", "SM2_256")]
    + [(t, c) for t in (BenchTarget.KEM_KEYGEN, BenchTarget.KEM_ENCAP, BenchTarget.KEM_DECAP)
       for c in ("NIST_P256", "SM2_256")]
    + [(BenchTarget.HASH, "SHA_256"), (BenchTarget.HASH, "SM3_256")]
    + [(t, c) for t in (BenchTarget.SYM_ENCRYPT, BenchTarget.SYM_DECRYPT) for c in ("AES_128", "SM4_128")]
)


def run_crypto_suite(iterations: int = DEFAULT_MICRO_ITERATIONS, warmup: int = DEFAULT_WARMUP,
                     rng=None, progress: Optional[Callable[[BenchSpec], None]] = None) -> List[BenchReport]:
    reports = []
    for target, alg in CRYPTO_SUITE:
        spec = BenchSpec(target, alg, iterations, warmup)
        if progress:
            progress(spec)
        reports.append(run_micro_bench(spec, rng=rng))
    return reports


__all__ = [
    "BenchTarget", "BenchSpec", "BenchReport", "run_micro_bench", "run_e2e_bench", "emit_report",
    "ordering_verdicts", "format_verdicts", "OrderingClaim", "summarize", "percentile_nearest_rank",
    "run_crypto_suite", "CRYPTO_SUITE", "buffers_allocated", "host_descriptor",
]
