"""One interface over the three default cryptography suites.

==========  ===============  =======  ========
profile     curve            hash     cipher
==========  ===============  =======  ========
SCMS        NIST P-256       SHA-256  AES-128
CCMS        brainpoolP256r1  SHA-256  AES-128
CSCMS       SM2-256          SM3-256  SM4-128
==========  ===============  =======  ========

Signing is ECDSA on the NIST and Brainpool curves and SM2 (with the Z_A
identity prefix) on SM2-256.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass
from enum import Enum, IntEnum
from pathlib import Path

from ..errors import MalformedPoint, OutOfRange, TagMismatch
from ..rng import SystemRng
from . import symmetric
from .curves import CURVES, Curve, CurveId, Point
from .sm3 import sm3 as _sm3_py
from .symmetric import SymAlg

SM2_DEFAULT_ID = b"1234567812345678"


class HashAlg(IntEnum):
    SHA_256 = 0
    SM3_256 = 1


class ProfileName(str, Enum):
    SCMS = "SCMS"
    CCMS = "CCMS"
    CSCMS = "CSCMS"


@dataclass(frozen=True)
class CryptoProfile:
    name: ProfileName
    curve_id: CurveId
    hash: HashAlg
    symmetric: SymAlg

    @property
    def curve(self) -> Curve:
        return CURVES[self.curve_id]

    @property
    def uses_sm2(self) -> bool:
        return self.curve_id is CurveId.SM2_256

    def __str__(self) -> str:
        return self.name.value


SCMS = CryptoProfile(ProfileName.SCMS, CurveId.NIST_P256, HashAlg.SHA_256, SymAlg.AES_128)
CCMS = CryptoProfile(ProfileName.CCMS, CurveId.BRAINPOOL_P256, HashAlg.SHA_256, SymAlg.AES_128)
CSCMS = CryptoProfile(ProfileName.CSCMS, CurveId.SM2_256, HashAlg.SM3_256, SymAlg.SM4_128)
PROFILES = {p.name: p for p in (SCMS, CCMS, CSCMS)}


def get_profile(name: str) -> CryptoProfile:
    key = name.upper().replace("-", "")
    try:
        return PROFILES[ProfileName(key)]
    except ValueError:
        raise ValueError(f"unknown profile {name!r}") from None


def profile_for_curve(curve_id: CurveId) -> CryptoProfile:
    return next(p for p in PROFILES.values() if p.curve_id == curve_id)


# -- hashing ------------------------------------------------------------------

try:
    hashlib.new("sm3")
    _HAVE_OPENSSL_SM3 = True
except ValueError:  # pragma: no cover - depends on the linked OpenSSL
    _HAVE_OPENSSL_SM3 = False


def hash_bytes(alg: HashAlg, data: bytes) -> bytes:
    if alg is HashAlg.SHA_256:
        return hashlib.sha256(data).digest()
    if _HAVE_OPENSSL_SM3:
        return hashlib.new("sm3", data).digest()
    return _sm3_py(data)  # pragma: no cover


def digest(profile: CryptoProfile, data: bytes) -> bytes:
    return hash_bytes(profile.hash, data)


# -- keys and signatures ------------------------------------------------------


@dataclass(frozen=True)
class KeyPair:
    private_scalar: int
    public_point: tuple

    def __repr__(self) -> str:
        return f"KeyPair(public_point={self.public_point!r})"


@dataclass(frozen=True)
class Signature:
    r: int
    s: int

    def to_bytes(self) -> bytes:
        return self.r.to_bytes(32, "big") + self.s.to_bytes(32, "big")

    @classmethod
    def from_bytes(cls, data: bytes) -> "Signature":
        if len(data) != 64:
            raise ValueError("signature must be 64 bytes")
        return cls(int.from_bytes(data[:32], "big"), int.from_bytes(data[32:], "big"))


def random_scalar(curve: Curve, rng) -> int:
    """Uniform scalar in [1, n-1] by rejection sampling 32-byte draws."""
    while True:
        k = int.from_bytes(rng.randbytes(32), "big")
        if 1 <= k < curve.n:
            return k


def generate_keypair(profile: CryptoProfile, rng=None) -> KeyPair:
    rng = rng or SystemRng()
    curve = profile.curve
    d = random_scalar(curve, rng)
    return KeyPair(d, curve.mul_base(d))


def keypair_from_scalar(profile: CryptoProfile, d: int) -> KeyPair:
    curve = profile.curve
    if not 1 <= d < curve.n:
        raise OutOfRange("private scalar outside [1, n-1]")
    return KeyPair(d, curve.mul_base(d))


def sm2_za(public: Point, curve: Curve, user_id: bytes = SM2_DEFAULT_ID) -> bytes:
    entl = (len(user_id) * 8).to_bytes(2, "big")
    parts = [entl, user_id] + [v.to_bytes(32, "big") for v in
                               (curve.a, curve.b, curve.gx, curve.gy, public[0], public[1])]
    return hash_bytes(HashAlg.SM3_256, b"".join(parts))


def _message_scalar(profile: CryptoProfile, public: Point, message: bytes) -> int:
    if profile.uses_sm2:
        # the extra hash: Z_A over the identity and curve parameters
        return int.from_bytes(hash_bytes(HashAlg.SM3_256, sm2_za(public, profile.curve) + message), "big")
    return int.from_bytes(digest(profile, message), "big")


def sign(profile: CryptoProfile, key: KeyPair, message: bytes, rng=None) -> Signature:
    rng = rng or SystemRng()
    curve = profile.curve
    n = curve.n
    d = key.private_scalar
    e = _message_scalar(profile, key.public_point, message)
    while True:
        k = random_scalar(curve, rng)
        x1 = curve.mul_base(k)[0]
        if profile.uses_sm2:
            r = (e + x1) % n
            if r == 0 or r + k == n:
                continue
            s = pow(1 + d, -1, n) * (k - r * d) % n
        else:
            r = x1 % n
            if r == 0:
                continue
            s = pow(k, -1, n) * (e + r * d) % n
        if s != 0:
            return Signature(r, s)


def verify(profile: CryptoProfile, public: Point, message: bytes, sig: Signature) -> bool:
    curve = profile.curve
    n = curve.n
    if not curve.contains(public):
        return False
    r, s = sig.r, sig.s
    if not (1 <= r < n and 1 <= s < n):
        return False
    e = _message_scalar(profile, public, message)
    if profile.uses_sm2:
        t = (r + s) % n
        if t == 0:
            return False
        R = curve.add(curve.mul_base(s), curve.mul(t, public))
        return R is not None and (e + R[0]) % n == r
    w = pow(s, -1, n)
    R = curve.add(curve.mul_base(e * w % n), curve.mul(r * w % n, public))
    return R is not None and R[0] % n == r


# -- key encapsulation -------------------------------------------------------


@dataclass(frozen=True)
class KemCiphertext:
    ephemeral_point: bytes  # 33-byte compressed
    wrapped_key: bytes
    tag: bytes

    def to_bytes(self) -> bytes:
        return self.ephemeral_point + self.wrapped_key + self.tag

    @classmethod
    def from_bytes(cls, data: bytes) -> "KemCiphertext":
        if len(data) != 65:
            raise ValueError("KEM ciphertext must be 65 bytes")
        return cls(data[:33], data[33:49], data[49:])


def _kem_keys(profile, shared_x: int):
    shared = shared_x.to_bytes(32, "big")
    k_enc = digest(profile, shared + b"\x00\x00\x00\x01")[:16]
    k_mac = digest(profile, shared + b"\x00\x00\x00\x02")
    return k_enc, k_mac


def kem_encapsulate(profile: CryptoProfile, recipient_public: Point, key_to_wrap: bytes,
                    rng=None) -> KemCiphertext:
    if len(key_to_wrap) != 16:
        raise ValueError("wrapped key must be 16 bytes")
    curve = profile.curve
    if not curve.contains(recipient_public):
        raise MalformedPoint("recipient key is not on the profile curve")
    eph = generate_keypair(profile, rng)
    shared = curve.mul(eph.private_scalar, recipient_public)
    k_enc, k_mac = _kem_keys(profile, shared[0])
    wrapped = bytes(a ^ b for a, b in zip(key_to_wrap, k_enc))
    tag = digest(profile, k_mac + wrapped)[:16]
    return KemCiphertext(curve.compress(eph.public_point), wrapped, tag)


def kem_decapsulate(profile: CryptoProfile, recipient: KeyPair, ct: KemCiphertext) -> bytes:
    curve = profile.curve
    eph = curve.decompress(ct.ephemeral_point)
    shared = curve.mul(recipient.private_scalar, eph)
    if shared is None:
        raise TagMismatch("degenerate shared point")
    k_enc, k_mac = _kem_keys(profile, shared[0])
    if not hmac.compare_digest(digest(profile, k_mac + ct.wrapped_key)[:16], ct.tag):
        raise TagMismatch("KEM tag mismatch")
    return bytes(a ^ b for a, b in zip(ct.wrapped_key, k_enc))


# -- authenticated symmetric encryption ---------------------------------------


def aead_encrypt(profile: CryptoProfile, key: bytes, nonce: bytes, plaintext: bytes) -> bytes:
    return symmetric.ccm_encrypt(profile.symmetric, key, nonce, plaintext)


def aead_decrypt(profile: CryptoProfile, key: bytes, nonce: bytes, ciphertext_and_tag: bytes) -> bytes:
    return symmetric.ccm_decrypt(profile.symmetric, key, nonce, ciphertext_and_tag)


# -- key files ---------------------------------------------------------------


def write_private_key(path, key: KeyPair) -> None:
    Path(path).write_text(f"{key.private_scalar:064x}\n")


def read_private_key(path, profile: CryptoProfile) -> KeyPair:
    return keypair_from_scalar(profile, int(Path(path).read_text().strip(), 16))


def write_public_key(path, profile: CryptoProfile, public: Point) -> None:
    Path(path).write_text(profile.curve.compress(public).hex() + "\n")


def read_public_key(path, profile: CryptoProfile) -> tuple:
    return profile.curve.decompress(bytes.fromhex(Path(path).read_text().strip()))
