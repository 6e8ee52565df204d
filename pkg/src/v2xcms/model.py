"""Data model shared by the codec, certificate and message layers."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone
from enum import IntEnum
from typing import Optional, Tuple, Union

from .crypto import CurveId, HashAlg, KemCiphertext, Signature

CERT_VERSION = 3
PROTOCOL_VERSION = 3
MAX_ID_BYTES = 64

# application identifiers (PSID in IEEE terms, AID in YD/T 3957)
PSID_BSM = 0x20
PSID_CERT_MGMT = 0x23

EPOCH_2004 = datetime(2004, 1, 1, tzinfo=timezone.utc)


def time32(dt: datetime) -> int:
    """Seconds since 2004-01-01T00:00:00Z."""
    return int((dt - EPOCH_2004).total_seconds())


def time64(dt: datetime) -> int:
    """Microseconds since 2004-01-01T00:00:00Z."""
    delta = dt - EPOCH_2004
    return (delta.days * 86400 + delta.seconds) * 1_000_000 + delta.microseconds


def now_time32() -> int:
    return time32(datetime.now(timezone.utc))


def now_time64() -> int:
    return time64(datetime.now(timezone.utc))


class CertType(IntEnum):
    EXPLICIT = 0
    IMPLICIT = 1


class KeyIndicator(IntEnum):
    VERIFICATION_KEY = 0
    RECONSTRUCTION_VALUE = 1


class CertKind(IntEnum):
    ENROLLMENT = PSID_CERT_MGMT
    AUTHORIZATION = PSID_BSM

    @property
    def app_permissions(self) -> Tuple[int, ...]:
        return (int(self),)


class SignerKind(IntEnum):
    DIGEST = 0
    CERTIFICATE = 1


@dataclass(frozen=True)
class ToBeSignedCertificate:
    id: str
    validity_start: int
    validity_duration: int
    app_permissions: Tuple[int, ...]
    key_indicator: KeyIndicator
    curve_id: CurveId
    key_point: Tuple[int, int]

    def __post_init__(self):
        if len(self.id.encode("utf-8")) > MAX_ID_BYTES:
            raise ValueError("certificate id longer than 64 bytes")
        if not (0 <= self.validity_start < 2**32 and 0 <= self.validity_duration < 2**32):
            raise ValueError("validity fields are 32-bit unsigned")
        if any(not 0 <= a < 2**32 for a in self.app_permissions):
            raise ValueError("application identifiers are 32-bit unsigned")

    @property
    def validity_end(self) -> int:
        return self.validity_start + self.validity_duration

    def valid_at(self, t: int) -> bool:
        return self.validity_start <= t <= self.validity_end


@dataclass(frozen=True)
class Certificate:
    cert_type: CertType
    issuer: Optional[bytes]  # HashedId8 of the issuer, None when self-signed
    tbs: ToBeSignedCertificate
    signature: Optional[Signature] = None
    version: int = CERT_VERSION

    def __post_init__(self):
        explicit = self.cert_type is CertType.EXPLICIT
        if explicit != (self.signature is not None):
            raise ValueError("explicit certificates carry a signature, implicit ones never do")
        want = KeyIndicator.VERIFICATION_KEY if explicit else KeyIndicator.RECONSTRUCTION_VALUE
        if self.tbs.key_indicator is not want:
            raise ValueError("verify-key indicator does not match the certificate type")
        if self.issuer is None and not explicit:
            raise ValueError("a self-signed certificate must be explicit")
        if self.issuer is not None and len(self.issuer) != 8:
            raise ValueError("issuer must be a HashedId8")
        if self.version != CERT_VERSION:
            raise ValueError("unsupported certificate version")

    @property
    def is_explicit(self) -> bool:
        return self.cert_type is CertType.EXPLICIT

    @property
    def is_self_signed(self) -> bool:
        return self.issuer is None

    @property
    def kind(self) -> Optional[CertKind]:
        perms = set(self.tbs.app_permissions)
        if perms == {PSID_CERT_MGMT}:
            return CertKind.ENROLLMENT
        if perms == {PSID_BSM}:
            return CertKind.AUTHORIZATION
        return None


@dataclass(frozen=True)
class HeaderInfo:
    app_id: int
    generation_time: int


Signer = Union[bytes, Certificate]


@dataclass(frozen=True)
class SignedData:
    hash_id: HashAlg
    header: HeaderInfo
    payload: bytes
    signer: Signer  # HashedId8 (digest mode) or the full certificate
    signature: Signature

    @property
    def signer_kind(self) -> SignerKind:
        return SignerKind.CERTIFICATE if isinstance(self.signer, Certificate) else SignerKind.DIGEST


@dataclass(frozen=True)
class SignedEncryptedData:
    recipient: bytes  # HashedId8
    kem: KemCiphertext
    nonce: bytes
    ciphertext: bytes
