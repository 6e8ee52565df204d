"""Pieces shared by the enrollment and authorization flows."""

from __future__ import annotations

from contextlib import contextmanager
from enum import IntEnum
from typing import Optional, Sequence, Type

from ..codec import Reader, decode_signed_data, decode_signed_encrypted, hashed_id8
from ..crypto import CryptoProfile, KeyPair, digest
from ..errors import ChannelAuthFailure, FlowError, V2XError
from ..messages import decrypt_signed, verify_signed_data
from ..model import Certificate, SignedData
from .bus import MessageBus


class MsgType(IntEnum):
    """Leading byte of every flow payload, so one message cannot stand in for another."""

    EE_ECA_CERT_REQUEST = 1
    ECA_EE_CERT_RESPONSE = 2
    ENROLMENT_POP = 3
    ENROLMENT_REQUEST = 4
    ENROLMENT_RESPONSE = 5
    EE_RA_CERT_REQUEST = 6
    RA_EE_CERT_ACK = 7
    RA_ACA_CERT_REQUEST = 8
    ACA_RA_CERT_RESPONSE = 9
    EE_RA_DOWNLOAD_REQUEST = 10
    RA_EE_DOWNLOAD_BUNDLE = 11
    EC_SIGNATURE = 12
    AUTHORIZATION_REQUEST = 13
    AUTHORIZATION_VALIDATION_REQUEST = 14
    AUTHORIZATION_VALIDATION_RESPONSE = 15
    AUTHORIZATION_RESPONSE = 16


STATUS_OK = 0
STATUS_REJECTED = 1


def request_hash(profile: CryptoProfile, data: bytes) -> bytes:
    return digest(profile, data)[-8:]


@contextmanager
def rejecting(error: Type[FlowError], what: str):
    """Re-raise decode/crypto failures while handling ``what`` as ``error``."""
    try:
        yield
    except FlowError as exc:
        if type(exc) is not FlowError:
            raise
        raise error(f"{what}: {exc}") from exc
    except (V2XError, ValueError) as exc:
        raise error(f"{what}: {exc}") from exc


def payload_reader(msg: SignedData, expected: MsgType) -> Reader:
    r = Reader(msg.payload)
    kind = r.u8()
    if kind != expected:
        raise FlowError(f"expected {expected.name}, got message type {kind}")
    return r


def open_encrypted(profile: CryptoProfile, data: bytes, recipient_id: bytes, key: KeyPair) -> SignedData:
    enc = decode_signed_encrypted(data)
    if enc.recipient != recipient_id:
        raise FlowError("encrypted message is addressed to someone else")
    return decrypt_signed(profile, enc, key)


def open_signed(data: bytes) -> SignedData:
    return decode_signed_data(data)


def check_signed_by(profile: CryptoProfile, msg: SignedData, expected: Certificate,
                    chain_above: Sequence[Certificate], at_time: int, error: Type[FlowError]) -> None:
    """``msg`` must carry ``expected`` inline and verify under it."""
    outcome = verify_signed_data(profile, msg, None, chain_above, at_time)
    if not outcome.accepted:
        raise error(f"signature check failed: {outcome.reason.value}")
    if hashed_id8(profile, outcome.signer) != hashed_id8(profile, expected):
        raise error("message signed by an unexpected certificate")


class DirectLink:
    """Device talks to the authority directly."""

    def __init__(self, bus: MessageBus, ee_label: str):
        self.bus = bus
        self.ee = ee_label

    def up(self, dst: str, name: str, data: bytes) -> bytes:
        return self.bus.deliver(self.ee, dst, name, data, "request")

    def down(self, src: str, name: str, data: bytes) -> bytes:
        return self.bus.deliver(src, self.ee, name, data, "response")


class GbaLink:
    """Device traffic tunnelled through the GBA authentication system's channel."""

    def __init__(self, bus: MessageBus, ee_label: str, ee_channel, as_name: str, as_channel):
        self.bus = bus
        self.ee = ee_label
        self.ee_channel = ee_channel
        self.as_name = as_name
        self.as_channel = as_channel

    def up(self, dst: str, name: str, data: bytes) -> bytes:
        frame = self.bus.deliver(self.ee, self.as_name, name, self.ee_channel.seal(data), "request")
        inner = self.as_channel.open(frame)
        return self.bus.deliver(self.as_name, dst, name, inner, "request")

    def down(self, src: str, name: str, data: bytes) -> bytes:
        got = self.bus.deliver(src, self.as_name, name, data, "response")
        frame = self.bus.deliver(self.as_name, self.ee, name, self.as_channel.seal(got), "response")
        return self.ee_channel.open(frame)


def gba_link(ee, as_) -> GbaLink:
    as_channel = as_.channels.get(ee.name)
    if ee.channel is None or as_channel is None:
        raise ChannelAuthFailure("no GBA channel established for this device")
    return GbaLink(as_.pki.bus, ee.label, ee.channel, as_.name, as_channel)


def optional_scalar(r: Reader) -> Optional[int]:
    return int.from_bytes(r.raw(32), "big") if r.flag() else None
