"""Certificate issuance (explicit and ECQV implicit) and chain validation."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

from .codec import encode_certificate, encode_tbs, hashed_id8
from .crypto import CryptoProfile, HashAlg, KeyPair, digest, generate_keypair, hash_bytes, sign, verify
from .crypto.curves import Point
from .errors import IssuerExpired, MalformedPoint, OutOfRange, WrongCertType
from .model import (
    Certificate,
    CertKind,
    CertType,
    KeyIndicator,
    ToBeSignedCertificate,
)

Validity = Tuple[int, int]  # (Time32 start, duration in seconds)


def signature_input(profile: CryptoProfile, content: bytes, signer_bytes: bytes,
                    hash_alg: Optional[HashAlg] = None) -> bytes:
    """``H(content) || H(signer)``; the signature algorithm applies the outer hash."""
    alg = profile.hash if hash_alg is None else hash_alg
    return hash_bytes(alg, content) + hash_bytes(alg, signer_bytes)


def _tbs(profile, name, validity, kind, indicator, point) -> ToBeSignedCertificate:
    perms = kind.app_permissions if kind is not None else ()
    return ToBeSignedCertificate(name, validity[0], validity[1], perms, indicator, profile.curve_id, point)


def _check_issuer(issuer_cert: Certificate, now: int) -> None:
    if not issuer_cert.is_explicit:
        raise WrongCertType("issuing certificates must be explicit")
    if not issuer_cert.tbs.valid_at(now):
        raise IssuerExpired(f"issuer {issuer_cert.tbs.id!r} is not valid at {now}")


def self_sign_root(profile: CryptoProfile, name: str, validity: Validity, rng=None) -> Tuple[Certificate, KeyPair]:
    key = generate_keypair(profile, rng)
    tbs = _tbs(profile, name, validity, None, KeyIndicator.VERIFICATION_KEY, key.public_point)
    sig = sign(profile, key, signature_input(profile, encode_tbs(tbs), b""), rng)
    return Certificate(CertType.EXPLICIT, None, tbs, sig), key


def issue_explicit(profile: CryptoProfile, issuer_cert: Certificate, issuer_key: KeyPair,
                   subject_public: Point, kind: Optional[CertKind], name: str,
                   validity: Validity, rng=None, now: Optional[int] = None) -> Certificate:
    """Explicit certificate over ``subject_public``.

    ``kind`` of None issues an authority certificate with no application
    permissions.  Issuer validity is checked at ``now`` (default: the start
    of the new certificate's validity).
    """
    _check_issuer(issuer_cert, validity[0] if now is None else now)
    if not profile.curve.contains(subject_public):
        raise MalformedPoint("subject key is not on the profile curve")
    tbs = _tbs(profile, name, validity, kind, KeyIndicator.VERIFICATION_KEY, subject_public)
    sig = sign(profile, issuer_key,
               signature_input(profile, encode_tbs(tbs), encode_certificate(issuer_cert)), rng)
    return Certificate(CertType.EXPLICIT, hashed_id8(profile, issuer_cert), tbs, sig)


# -- ECQV -------------------------------------------------------------------


@dataclass(frozen=True)
class EcqvIssuance:
    certificate: Certificate
    private_key_contribution: int


def cert_hash_scalar(profile: CryptoProfile, cert: Certificate) -> int:
    """``e = H(cert) mod n``, with 0 mapped to 1."""
    e = int.from_bytes(digest(profile, encode_certificate(cert)), "big") % profile.curve.n
    return e or 1


def ecqv_issue(profile: CryptoProfile, issuer_cert: Certificate, issuer_key: KeyPair,
               request_public: Point, kind: Optional[CertKind], name: str,
               validity: Validity, rng=None, now: Optional[int] = None) -> EcqvIssuance:
    curve = profile.curve
    if not curve.contains(request_public):
        raise MalformedPoint("request key is not on the profile curve")
    _check_issuer(issuer_cert, validity[0] if now is None else now)
    issuer_id = hashed_id8(profile, issuer_cert)
    while True:
        k = generate_keypair(profile, rng)
        recon = curve.add(request_public, k.public_point)
        if recon is not None:
            break
    tbs = _tbs(profile, name, validity, kind, KeyIndicator.RECONSTRUCTION_VALUE, recon)
    cert = Certificate(CertType.IMPLICIT, issuer_id, tbs)
    e = cert_hash_scalar(profile, cert)
    r = (e * k.private_scalar + issuer_key.private_scalar) % curve.n
    return EcqvIssuance(cert, r)


def ecqv_reconstruct_public(profile: CryptoProfile, implicit_cert: Certificate, issuer_public: Point) -> Point:
    """``e * P_u + Q_issuer``."""
    if implicit_cert.cert_type is not CertType.IMPLICIT:
        raise WrongCertType("reconstruction applies to implicit certificates only")
    curve = profile.curve
    e = cert_hash_scalar(profile, implicit_cert)
    return curve.add(curve.mul(e, implicit_cert.tbs.key_point), issuer_public)


def ecqv_derive_private(profile: CryptoProfile, implicit_cert: Certificate, request_private: int,
                        contribution: int) -> int:
    n = profile.curve.n
    if not 0 <= request_private < n or not 0 <= contribution < n:
        raise OutOfRange("ECQV inputs must lie in [0, n-1]")
    if implicit_cert.cert_type is not CertType.IMPLICIT:
        raise WrongCertType("derivation applies to implicit certificates only")
    return (cert_hash_scalar(profile, implicit_cert) * request_private + contribution) % n


def public_key_of(profile: CryptoProfile, cert: Certificate, issuer_public: Optional[Point] = None) -> Point:
    """Contained key for explicit certificates, reconstructed key for implicit ones."""
    if cert.tbs.curve_id != profile.curve_id:
        raise WrongCertType("certificate key is on a different curve")
    if cert.is_explicit:
        return cert.tbs.key_point
    if issuer_public is None:
        raise ValueError("implicit certificate needs the issuer public key")
    return ecqv_reconstruct_public(profile, cert, issuer_public)


# -- chain validation ---------------------------------------------------------


class ChainFailure(str, Enum):
    EXPIRED = "Expired"
    UNKNOWN_ISSUER = "UnknownIssuer"
    BAD_SIGNATURE = "BadSignature"
    BAD_RECONSTRUCTION = "BadReconstruction"


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    link: Optional[int] = None  # 0 = leaf
    reason: Optional[ChainFailure] = None
    leaf_public: Optional[Point] = None

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        return "OK" if self.ok else f"FAIL {self.link} {self.reason.value}"


def validate_chain(profile: CryptoProfile, leaf: Certificate, intermediates: Sequence[Certificate],
                   root: Certificate, at_time: int) -> ValidationReport:
    """Check issuer linkage, validity windows and signatures from ``leaf`` up to ``root``.

    ``intermediates`` are ordered leaf-side first.  Explicit links must carry
    a signature that verifies under the issuer key; implicit links must
    reconstruct to a valid point.
    """
    chain = [leaf, *intermediates, root]
    if not intermediates and leaf == root:
        chain = [root]
    top = len(chain) - 1

    def fail(i, reason):
        return ValidationReport(False, i, reason)

    if not root.is_self_signed or not root.is_explicit:
        return fail(top, ChainFailure.UNKNOWN_ISSUER)

    # keys resolved top-down; None marks a link whose key could not be obtained
    keys: list = [None] * len(chain)
    for j in range(top, -1, -1):
        cert = chain[j]
        if cert.tbs.curve_id != profile.curve_id:
            continue
        if cert.is_explicit:
            keys[j] = cert.tbs.key_point
        elif j < top and keys[j + 1] is not None:
            keys[j] = ecqv_reconstruct_public(profile, cert, keys[j + 1])

    for i, cert in enumerate(chain):
        if not cert.tbs.valid_at(at_time):
            return fail(i, ChainFailure.EXPIRED)
        if i == top:
            issuer_cert, issuer_bytes = cert, b""
        else:
            issuer_cert = chain[i + 1]
            if cert.issuer is None or cert.issuer != hashed_id8(profile, issuer_cert):
                return fail(i, ChainFailure.UNKNOWN_ISSUER)
            issuer_bytes = encode_certificate(issuer_cert)
        if cert.is_explicit:
            issuer_key = keys[i] if i == top else keys[i + 1]
            ok = issuer_key is not None and verify(
                profile, issuer_key, signature_input(profile, encode_tbs(cert.tbs), issuer_bytes), cert.signature)
            if not ok:
                return fail(i, ChainFailure.BAD_SIGNATURE)
        elif keys[i] is None:
            return fail(i, ChainFailure.BAD_RECONSTRUCTION)
    return ValidationReport(True, leaf_public=keys[0])
