"""GBA-style bootstrap: one challenge-response over a pre-shared secret,
then an AEAD channel with per-direction counters."""

from __future__ import annotations

import hmac
from dataclasses import dataclass

from ..crypto import CryptoProfile, aead_decrypt, aead_encrypt, digest
from ..errors import BadAuthResponse, ChannelAuthFailure, TagMismatch, UnknownSubscriber
from .actors import AuthorityState, EndEntityState

TO_AS = 0x01
TO_EE = 0x02


@dataclass(eq=False)
class SecureChannel:
    profile: CryptoProfile
    session_key: bytes
    outbound: int  # direction byte for frames this side sends
    send_counter: int = 0
    recv_counter: int = 0

    def __repr__(self) -> str:
        return f"SecureChannel(outbound={self.outbound}, send={self.send_counter}, recv={self.recv_counter})"

    @staticmethod
    def _nonce(direction: int, counter: int) -> bytes:
        return bytes([direction, 0, 0, 0]) + counter.to_bytes(8, "big")

    def seal(self, data: bytes) -> bytes:
        self.send_counter += 1
        ctr = self.send_counter
        body = aead_encrypt(self.profile, self.session_key, self._nonce(self.outbound, ctr), data)
        return ctr.to_bytes(8, "big") + body

    def open(self, frame: bytes) -> bytes:
        if len(frame) < 8 + 16:
            raise ChannelAuthFailure("short channel frame")
        ctr = int.from_bytes(frame[:8], "big")
        if ctr <= self.recv_counter:
            raise ChannelAuthFailure(f"replayed or reordered frame (counter {ctr})")
        inbound = TO_EE if self.outbound == TO_AS else TO_AS
        try:
            data = aead_decrypt(self.profile, self.session_key, self._nonce(inbound, ctr), frame[8:])
        except TagMismatch:
            raise ChannelAuthFailure("channel frame failed authentication") from None
        self.recv_counter = ctr
        return data


def _response(profile, secret, challenge):
    return digest(profile, secret + challenge)


def _session_key(profile, secret, challenge):
    return digest(profile, secret + challenge + b"\x01")[:16]


def establish_gba_channel(ee: EndEntityState, as_: AuthorityState, rng=None) -> SecureChannel:
    """Authenticate ``ee`` to the AS and install matching channels on both sides."""
    pki = as_.pki
    bus = pki.bus
    profile = ee.profile
    rng = rng or as_.rng

    got = bus.deliver(ee.label, as_.name, "AuthenticationRequest", ee.name.encode("utf-8"))
    try:
        claimed = got.decode("utf-8")
    except UnicodeDecodeError:
        raise UnknownSubscriber("subscriber name is not UTF-8") from None
    with as_.lock:
        secret = as_.subscriber_secrets.get(claimed)
    if secret is None:
        raise UnknownSubscriber(f"no subscriber secret for {claimed!r}")
    challenge = rng.randbytes(16)
    got_challenge = bus.deliver(as_.name, ee.label, "AuthenticationChallenge", challenge, "response")

    if ee.gba_secret is None or len(got_challenge) != 16:
        raise BadAuthResponse("device cannot answer the challenge")
    answer = _response(profile, ee.gba_secret, got_challenge)
    got_answer = bus.deliver(ee.label, as_.name, "AuthenticationResponse", answer)
    if not hmac.compare_digest(got_answer, _response(profile, secret, challenge)):
        raise BadAuthResponse(f"authentication response for {claimed!r} does not match")

    as_side = SecureChannel(profile, _session_key(profile, secret, challenge), TO_EE)
    ee_side = SecureChannel(profile, _session_key(profile, ee.gba_secret, got_challenge), TO_AS)
    with as_.lock:
        as_.channels[claimed] = as_side
    ee.channel = ee_side
    return ee_side
