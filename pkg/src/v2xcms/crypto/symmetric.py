"""Block-cipher cores (AES-128, SM4-128) and CCM built on top of them.

The raw ciphers and the CBC/CTR passes come from ``cryptography``; CCM
formatting (SP 800-38C, 12-byte nonce, 16-byte tag, no associated data) is
assembled here so both ciphers share one mode implementation.
"""

from __future__ import annotations

import hmac
from enum import IntEnum

from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

from ..errors import TagMismatch

NONCE_LEN = 12
TAG_LEN = 16
_Q = 15 - NONCE_LEN  # bytes in the CCM length/counter field


class SymAlg(IntEnum):
    AES_128 = 0
    SM4_128 = 1


_ALGS = {SymAlg.AES_128: algorithms.AES, SymAlg.SM4_128: algorithms.SM4}


def _check_key(key: bytes) -> None:
    if len(key) != 16:
        raise ValueError("symmetric keys are 16 bytes")


def encrypt_block(alg: SymAlg, key: bytes, block: bytes) -> bytes:
    _check_key(key)
    if len(block) != 16:
        raise ValueError("block must be 16 bytes")
    enc = Cipher(_ALGS[alg](key), modes.ECB()).encryptor()
    return enc.update(block) + enc.finalize()


def _cbc_mac(alg, key, nonce, plaintext):
    flags = ((TAG_LEN - 2) // 2) << 3 | (_Q - 1)
    b0 = bytes([flags]) + nonce + len(plaintext).to_bytes(_Q, "big")
    padded = plaintext + b"\x00" * (-len(plaintext) % 16)
    enc = Cipher(_ALGS[alg](key), modes.CBC(bytes(16))).encryptor()
    out = enc.update(b0 + padded)
    return out[-16:]


def _ctr(alg, key, nonce, counter, data):
    a0 = bytes([_Q - 1]) + nonce + counter.to_bytes(_Q, "big")
    enc = Cipher(_ALGS[alg](key), modes.CTR(a0)).encryptor()
    return enc.update(data) + enc.finalize()


def ccm_encrypt(alg: SymAlg, key: bytes, nonce: bytes, plaintext: bytes) -> bytes:
    _check_key(key)
    if len(nonce) != NONCE_LEN:
        raise ValueError("CCM nonce must be 12 bytes")
    if len(plaintext) >= 1 << (8 * _Q):
        raise ValueError("plaintext too long for a 12-byte CCM nonce")
    mac = _cbc_mac(alg, key, nonce, plaintext)
    # one CTR pass: block 0 masks the tag, blocks 1.. encrypt the payload
    stream = _ctr(alg, key, nonce, 0, mac + b"\x00" * (-TAG_LEN % 16) + plaintext)
    return stream[16:] + stream[:TAG_LEN]


def ccm_decrypt(alg: SymAlg, key: bytes, nonce: bytes, data: bytes) -> bytes:
    _check_key(key)
    if len(nonce) != NONCE_LEN:
        raise ValueError("CCM nonce must be 12 bytes")
    if len(data) < TAG_LEN:
        raise TagMismatch("ciphertext shorter than the tag")
    body, tag = data[:-TAG_LEN], data[-TAG_LEN:]
    stream = _ctr(alg, key, nonce, 0, tag + body)
    mac, plaintext = stream[:TAG_LEN], stream[16:]
    if not hmac.compare_digest(mac, _cbc_mac(alg, key, nonce, plaintext)):
        raise TagMismatch("CCM authentication failed")
    return plaintext
