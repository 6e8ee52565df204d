"""Canonical binary codec for certificates and secured messages.

Rules: big-endian integers, 2-byte length prefixes, 1-byte enums and
presence flags, 33-byte compressed points, 64-byte ``r || s`` signatures,
fields concatenated in declaration order.  Every value has exactly one
encoding and decoders reject anything else.
"""

from __future__ import annotations

import struct
from enum import IntEnum
from typing import Callable, List, Type, TypeVar

from .crypto import CURVES, CryptoProfile, CurveId, HashAlg, KemCiphertext, Signature, digest
from .errors import DecodeError, MalformedPoint, TrailingBytes, Truncated, UnknownEnum
from .model import (
    CERT_VERSION,
    PROTOCOL_VERSION,
    Certificate,
    CertType,
    HeaderInfo,
    KeyIndicator,
    SignedData,
    SignedEncryptedData,
    SignerKind,
    ToBeSignedCertificate,
)

E = TypeVar("E", bound=IntEnum)
MAX_LEN = 0xFFFF


class Writer:
    def __init__(self):
        self.buf = bytearray()

    def u8(self, v: int) -> "Writer":
        self.buf += struct.pack(">B", v)
        return self

    def u16(self, v: int) -> "Writer":
        self.buf += struct.pack(">H", v)
        return self

    def u32(self, v: int) -> "Writer":
        self.buf += struct.pack(">I", v)
        return self

    def u64(self, v: int) -> "Writer":
        self.buf += struct.pack(">Q", v)
        return self

    def raw(self, data: bytes) -> "Writer":
        self.buf += data
        return self

    def lp(self, data: bytes) -> "Writer":
        if len(data) > MAX_LEN:
            raise ValueError(f"field of {len(data)} bytes exceeds the 65535-byte bound")
        return self.u16(len(data)).raw(data)

    def seq(self, items: List[bytes]) -> "Writer":
        """Count followed by length-prefixed entries."""
        self.u16(len(items))
        for item in items:
            self.lp(item)
        return self

    def getvalue(self) -> bytes:
        return bytes(self.buf)


class Reader:
    def __init__(self, data: bytes):
        self.data = memoryview(bytes(data))
        self.pos = 0

    def raw(self, n: int) -> bytes:
        end = self.pos + n
        if end > len(self.data):
            raise Truncated(f"need {n} bytes at offset {self.pos}, have {len(self.data) - self.pos}")
        out = bytes(self.data[self.pos:end])
        self.pos = end
        return out

    def u8(self) -> int:
        return self.raw(1)[0]

    def u16(self) -> int:
        return struct.unpack(">H", self.raw(2))[0]

    def u32(self) -> int:
        return struct.unpack(">I", self.raw(4))[0]

    def u64(self) -> int:
        return struct.unpack(">Q", self.raw(8))[0]

    def lp(self) -> bytes:
        return self.raw(self.u16())

    def seq(self) -> List[bytes]:
        return [self.lp() for _ in range(self.u16())]

    def enum(self, cls: Type[E]) -> E:
        v = self.u8()
        try:
            return cls(v)
        except ValueError:
            raise UnknownEnum(f"{v} is not a valid {cls.__name__}") from None

    def flag(self) -> bool:
        v = self.u8()
        if v not in (0, 1):
            raise UnknownEnum(f"presence flag must be 0 or 1, got {v}")
        return bool(v)

    def done(self) -> None:
        if self.pos != len(self.data):
            raise TrailingBytes(f"{len(self.data) - self.pos} unexpected trailing bytes")


def decode_all(data: bytes, fn: Callable[[Reader], object]):
    r = Reader(data)
    value = fn(r)
    r.done()
    return value


# -- certificates -------------------------------------------------------------


def write_tbs(w: Writer, tbs: ToBeSignedCertificate) -> None:
    w.lp(tbs.id.encode("utf-8"))
    w.u32(tbs.validity_start).u32(tbs.validity_duration)
    w.u16(len(tbs.app_permissions))
    for aid in tbs.app_permissions:
        w.u32(aid)
    w.u8(tbs.key_indicator).u8(tbs.curve_id)
    w.raw(CURVES[tbs.curve_id].compress(tbs.key_point))


def read_tbs(r: Reader) -> ToBeSignedCertificate:
    raw_id = r.lp()
    try:
        name = raw_id.decode("utf-8")
    except UnicodeDecodeError:
        raise DecodeError("certificate id is not UTF-8") from None
    start, duration = r.u32(), r.u32()
    perms = tuple(r.u32() for _ in range(r.u16()))
    indicator = r.enum(KeyIndicator)
    curve_id = r.enum(CurveId)
    point = CURVES[curve_id].decompress(r.raw(33))
    try:
        return ToBeSignedCertificate(name, start, duration, perms, indicator, curve_id, point)
    except ValueError as exc:
        raise DecodeError(str(exc)) from None


def encode_tbs(tbs: ToBeSignedCertificate) -> bytes:
    w = Writer()
    write_tbs(w, tbs)
    return w.getvalue()


def write_certificate(w: Writer, cert: Certificate) -> None:
    w.u8(cert.version).u8(cert.cert_type)
    if cert.issuer is None:
        w.u8(0)
    else:
        w.u8(1).raw(cert.issuer)
    write_tbs(w, cert.tbs)
    if cert.signature is None:
        w.u8(0)
    else:
        w.u8(1).raw(cert.signature.to_bytes())


def read_certificate(r: Reader) -> Certificate:
    version = r.u8()
    if version != CERT_VERSION:
        raise UnknownEnum(f"unsupported certificate version {version}")
    cert_type = r.enum(CertType)
    issuer = r.raw(8) if r.flag() else None
    tbs = read_tbs(r)
    sig = Signature.from_bytes(r.raw(64)) if r.flag() else None
    try:
        return Certificate(cert_type, issuer, tbs, sig)
    except ValueError as exc:
        raise DecodeError(str(exc)) from None


def encode_certificate(cert: Certificate) -> bytes:
    w = Writer()
    write_certificate(w, cert)
    return w.getvalue()


def decode_certificate(data: bytes) -> Certificate:
    return decode_all(data, read_certificate)


def hashed_id8(profile: CryptoProfile, cert: Certificate) -> bytes:
    """Low-order 8 bytes of the certificate's digest under ``profile``."""
    return digest(profile, encode_certificate(cert))[-8:]


# -- signed data --------------------------------------------------------------


def encode_tbs_data(header: HeaderInfo, payload: bytes) -> bytes:
    return Writer().u32(header.app_id).u64(header.generation_time).lp(payload).getvalue()


def write_signed_data(w: Writer, msg: SignedData) -> None:
    w.u8(PROTOCOL_VERSION).u8(msg.hash_id)
    w.raw(encode_tbs_data(msg.header, msg.payload))
    if isinstance(msg.signer, Certificate):
        w.u8(SignerKind.CERTIFICATE)
        write_certificate(w, msg.signer)
    else:
        if len(msg.signer) != 8:
            raise ValueError("digest signer must be a HashedId8")
        w.u8(SignerKind.DIGEST).raw(msg.signer)
    w.raw(msg.signature.to_bytes())


def read_signed_data(r: Reader) -> SignedData:
    version = r.u8()
    if version != PROTOCOL_VERSION:
        raise UnknownEnum(f"unsupported protocol version {version}")
    hash_id = r.enum(HashAlg)
    header = HeaderInfo(r.u32(), r.u64())
    payload = r.lp()
    kind = r.enum(SignerKind)
    signer = read_certificate(r) if kind is SignerKind.CERTIFICATE else r.raw(8)
    sig = Signature.from_bytes(r.raw(64))
    return SignedData(hash_id, header, payload, signer, sig)


def encode_signed_data(msg: SignedData) -> bytes:
    w = Writer()
    write_signed_data(w, msg)
    return w.getvalue()


def decode_signed_data(data: bytes) -> SignedData:
    return decode_all(data, read_signed_data)


# -- signed and encrypted data ------------------------------------------------


def encode_signed_encrypted(msg: SignedEncryptedData) -> bytes:
    if len(msg.recipient) != 8 or len(msg.nonce) != 12:
        raise ValueError("recipient is 8 bytes and nonce is 12 bytes")
    return (Writer().u8(PROTOCOL_VERSION).raw(msg.recipient).raw(msg.kem.to_bytes())
            .raw(msg.nonce).lp(msg.ciphertext).getvalue())


def read_signed_encrypted(r: Reader) -> SignedEncryptedData:
    version = r.u8()
    if version != PROTOCOL_VERSION:
        raise UnknownEnum(f"unsupported protocol version {version}")
    recipient = r.raw(8)
    eph = r.raw(33)
    if eph[0] not in (2, 3):
        raise MalformedPoint("ephemeral key is not a compressed point")
    kem = KemCiphertext(eph, r.raw(16), r.raw(16))
    return SignedEncryptedData(recipient, kem, r.raw(12), r.lp())


def decode_signed_encrypted(data: bytes) -> SignedEncryptedData:
    return decode_all(data, read_signed_encrypted)
