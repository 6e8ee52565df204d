"""Signed and signed-then-encrypted envelopes.

Signatures cover ``H(H(tbsData) || H(signer certificate))``.  For messages
signed directly by a bare key (certificate requests, proofs of possession)
the signer field carries the key's 8-byte id and the certificate hash input
is the empty string, as for self-signed roots.
"""

from __future__ import annotations

import hmac
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable, Mapping, Optional, Sequence, Union

from .certs import ValidationReport, ecqv_reconstruct_public, public_key_of, signature_input, validate_chain
from .codec import decode_signed_data, encode_certificate, encode_signed_data, encode_tbs_data, hashed_id8
from .crypto import (
    CryptoProfile,
    HashAlg,
    KeyPair,
    aead_decrypt,
    aead_encrypt,
    digest,
    kem_decapsulate,
    kem_encapsulate,
    sign,
    verify,
)
from .crypto.curves import Point
from .errors import KeyCertMismatch, TagMismatch, WrongCertType
from .model import Certificate, HeaderInfo, SignedData, SignedEncryptedData, SignerKind, now_time64
from .rng import SystemRng

Resolver = Union[Mapping[bytes, Certificate], Callable[[bytes], Optional[Certificate]]]


def key_id8(profile: CryptoProfile, public: Point) -> bytes:
    return digest(profile, profile.curve.compress(public))[-8:]


@lru_cache(maxsize=256)
def _own_public(profile: CryptoProfile, cert: Certificate, issuer_public) -> Point:
    return public_key_of(profile, cert, issuer_public)


def sign_data(profile: CryptoProfile, payload: bytes, app_id: int, signer_cert: Certificate,
              signer_private: int, signer_mode: SignerKind = SignerKind.CERTIFICATE,
              time: Optional[int] = None, *, rng=None, issuer_public: Optional[Point] = None,
              hash_id: Optional[HashAlg] = None) -> SignedData:
    """Sign ``payload`` under an authorization (or any end-entity) certificate.

    Implicit certificates need ``issuer_public`` so the key/certificate
    correspondence can be checked before the message is released.
    ``hash_id=HashAlg.SHA_256`` under C-SCMS reproduces the literal hashId
    wording for BSMs instead of the suite default.
    """
    hash_id = profile.hash if hash_id is None else hash_id
    header = HeaderInfo(app_id, now_time64() if time is None else time)
    try:
        own = _own_public(profile, signer_cert, issuer_public)
    except (WrongCertType, ValueError) as exc:
        raise KeyCertMismatch(str(exc)) from None
    if profile.curve.mul_base(signer_private) != own:
        raise KeyCertMismatch("private key does not match the signer certificate")
    tbs = encode_tbs_data(header, payload)
    key = KeyPair(signer_private, own)
    sig = sign(profile, key, signature_input(profile, tbs, encode_certificate(signer_cert), hash_id), rng)
    signer = signer_cert if signer_mode is SignerKind.CERTIFICATE else hashed_id8(profile, signer_cert)
    return SignedData(hash_id, header, payload, signer, sig)


def sign_with_key(profile: CryptoProfile, payload: bytes, app_id: int, key: KeyPair,
                  time: Optional[int] = None, *, rng=None) -> SignedData:
    header = HeaderInfo(app_id, now_time64() if time is None else time)
    tbs = encode_tbs_data(header, payload)
    sig = sign(profile, key, signature_input(profile, tbs, b""), rng)
    return SignedData(profile.hash, header, payload, key_id8(profile, key.public_point), sig)


def verify_with_key(profile: CryptoProfile, msg: SignedData, public: Point) -> bool:
    if msg.hash_id is not profile.hash or msg.signer_kind is not SignerKind.DIGEST:
        return False
    if not profile.curve.contains(public) or msg.signer != key_id8(profile, public):
        return False
    tbs = encode_tbs_data(msg.header, msg.payload)
    return verify(profile, public, signature_input(profile, tbs, b""), msg.signature)


# -- verification ---------------------------------------------------------------


class VerifyFailure(str, Enum):
    UNRESOLVED_SIGNER = "UnresolvedSigner"
    CHAIN_INVALID = "ChainInvalid"
    BAD_SIGNATURE = "BadSignature"


class KeyPath(str, Enum):
    CONTAINED = "contained-key"
    RECONSTRUCTED = "reconstructed"


@dataclass(frozen=True)
class VerifyOutcome:
    accepted: bool
    reason: Optional[VerifyFailure] = None
    path: Optional[KeyPath] = None
    chain: Optional[ValidationReport] = None
    signer: Optional[Certificate] = None

    def __bool__(self) -> bool:
        return self.accepted


class ChainCache:
    """Remembers signer certificates whose chain already validated.

    A receiver that has validated a sender's certificate skips the chain walk
    on later messages; key extraction and the message signature are still
    checked every time.
    """

    def __init__(self):
        self._ok: dict = {}

    def lookup(self, cert_id: bytes, at_time: int) -> bool:
        window = self._ok.get(cert_id)
        return window is not None and window[0] <= at_time <= window[1]

    def remember(self, cert_id: bytes, chain: Sequence[Certificate]) -> None:
        start = max(c.tbs.validity_start for c in chain)
        end = min(c.tbs.validity_end for c in chain)
        self._ok[cert_id] = (start, end)


def _resolve(resolver: Optional[Resolver], cert_id: bytes) -> Optional[Certificate]:
    if resolver is None:
        return None
    if callable(resolver):
        return resolver(cert_id)
    return resolver.get(cert_id)


def verify_signed_data(profile: CryptoProfile, msg: SignedData, resolver: Optional[Resolver],
                       issuer_chain: Sequence[Certificate], at_time: Optional[int] = None, *,
                       cache: Optional[ChainCache] = None, allow_sha256: bool = False) -> VerifyOutcome:
    """Accept ``msg`` iff its signer resolves, chains to the root and signed it.

    ``issuer_chain`` runs from the signer's issuer up to and including the
    self-signed root.  ``at_time`` (Time32) defaults to the message's
    generation time.
    """
    if at_time is None:
        at_time = msg.header.generation_time // 1_000_000
    hash_ok = msg.hash_id is profile.hash or (allow_sha256 and msg.hash_id is HashAlg.SHA_256)

    if isinstance(msg.signer, Certificate):
        leaf = msg.signer
    else:
        leaf = _resolve(resolver, msg.signer)
        if leaf is None:
            return VerifyOutcome(False, VerifyFailure.UNRESOLVED_SIGNER)
    if not issuer_chain:
        return VerifyOutcome(False, VerifyFailure.CHAIN_INVALID, signer=leaf)

    report = None
    leaf_id = hashed_id8(profile, leaf)
    if cache is None or not cache.lookup(leaf_id, at_time):
        report = validate_chain(profile, leaf, issuer_chain[:-1], issuer_chain[-1], at_time)
        if not report.ok:
            return VerifyOutcome(False, VerifyFailure.CHAIN_INVALID, chain=report, signer=leaf)
        if cache is not None:
            cache.remember(leaf_id, [leaf, *issuer_chain])

    issuer = issuer_chain[0]
    if leaf.is_explicit:
        path = KeyPath.CONTAINED
        public = leaf.tbs.key_point
    else:
        path = KeyPath.RECONSTRUCTED
        public = ecqv_reconstruct_public(profile, leaf, issuer.tbs.key_point)
    if not hash_ok or public is None:
        return VerifyOutcome(False, VerifyFailure.BAD_SIGNATURE, path, report, leaf)
    tbs = encode_tbs_data(msg.header, msg.payload)
    sig_input = signature_input(profile, tbs, encode_certificate(leaf), msg.hash_id)
    if not verify(profile, public, sig_input, msg.signature):
        return VerifyOutcome(False, VerifyFailure.BAD_SIGNATURE, path, report, leaf)
    return VerifyOutcome(True, None, path, report, leaf)


# -- encryption -------------------------------------------------------------------


def _envelope_header(recipient_id: bytes, ephemeral: bytes) -> bytes:
    # KEM secrets use only the x coordinate, so the sign of the ephemeral
    # point must be authenticated separately; the recipient id rides along.
    return recipient_id + ephemeral


def encrypt_to_key(profile: CryptoProfile, inner: SignedData, recipient_public: Point,
                   recipient_id: bytes, rng=None) -> SignedEncryptedData:
    rng = rng or SystemRng()
    session_key = rng.randbytes(16)
    kem = kem_encapsulate(profile, recipient_public, session_key, rng)
    nonce = rng.randbytes(12)
    plaintext = _envelope_header(recipient_id, kem.ephemeral_point) + encode_signed_data(inner)
    ct = aead_encrypt(profile, session_key, nonce, plaintext)
    return SignedEncryptedData(recipient_id, kem, nonce, ct)


def encrypt_signed(profile: CryptoProfile, inner: SignedData, recipient_cert: Certificate, rng=None,
                   issuer_public: Optional[Point] = None) -> SignedEncryptedData:
    public = public_key_of(profile, recipient_cert, issuer_public)
    return encrypt_to_key(profile, inner, public, hashed_id8(profile, recipient_cert), rng)


def decrypt_signed(profile: CryptoProfile, msg: SignedEncryptedData, recipient: KeyPair) -> SignedData:
    session_key = kem_decapsulate(profile, recipient, msg.kem)
    plaintext = aead_decrypt(profile, session_key, msg.nonce, msg.ciphertext)
    header = _envelope_header(msg.recipient, msg.kem.ephemeral_point)
    if not hmac.compare_digest(plaintext[:len(header)], header):
        raise TagMismatch("envelope header does not match the authenticated copy")
    return decode_signed_data(plaintext[len(header):])
