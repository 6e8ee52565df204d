"""Caterpillar -> cocoon key expansion.

The RA expands cocoon public keys ``B_i = A + f(i)*G`` from the caterpillar
public key ``A`` and a per-batch expansion key; only the device, which holds
``a``, can compute ``b_i = a + f(i)``.  ``f`` encrypts the index as a single
block under the profile's block cipher.
"""

from __future__ import annotations

from dataclasses import dataclass

from .crypto import CryptoProfile, KeyPair, encrypt_block, generate_keypair
from .crypto.curves import Point
from .errors import MalformedPoint, OutOfRange

DEFAULT_BATCH_SIZE = 20
MAX_BATCH_SIZE = 100


@dataclass(frozen=True)
class CaterpillarKey:
    keypair: KeyPair
    expansion_key: bytes

    def __repr__(self) -> str:
        return f"CaterpillarKey(public={self.keypair.public_point!r})"


@dataclass(frozen=True)
class CocoonPublic:
    index: int
    point: Point


def new_caterpillar(profile: CryptoProfile, rng) -> CaterpillarKey:
    return CaterpillarKey(generate_keypair(profile, rng), rng.randbytes(16))


def prf_f(profile: CryptoProfile, expansion_key: bytes, index: int) -> int:
    if not 0 <= index < 2**32:
        raise OutOfRange("cocoon index is a 32-bit unsigned integer")
    block = encrypt_block(profile.symmetric, expansion_key, index.to_bytes(16, "big"))
    return int.from_bytes(block, "big") % profile.curve.n or 1


def expand_cocoon_public(profile: CryptoProfile, caterpillar_public: Point, expansion_key: bytes,
                         index: int) -> CocoonPublic:
    curve = profile.curve
    if not curve.contains(caterpillar_public):
        raise MalformedPoint("caterpillar key is not on the profile curve")
    f = prf_f(profile, expansion_key, index)
    return CocoonPublic(index, curve.add(caterpillar_public, curve.mul_base(f)))


def expand_cocoon_private(profile: CryptoProfile, caterpillar_private: int, expansion_key: bytes,
                          index: int) -> int:
    n = profile.curve.n
    if not 1 <= caterpillar_private < n:
        raise OutOfRange("caterpillar scalar outside [1, n-1]")
    return (caterpillar_private + prf_f(profile, expansion_key, index)) % n
