from .curves import BRAINPOOL_P256, CURVES, NIST_P256, SM2_256, Curve, CurveId, scalar_mult_count
from .suite import (
    CCMS,
    CSCMS,
    PROFILES,
    SCMS,
    CryptoProfile,
    HashAlg,
    KemCiphertext,
    KeyPair,
    ProfileName,
    Signature,
    aead_decrypt,
    aead_encrypt,
    digest,
    generate_keypair,
    get_profile,
    hash_bytes,
    kem_decapsulate,
    kem_encapsulate,
    keypair_from_scalar,
    profile_for_curve,
    random_scalar,
    read_private_key,
    read_public_key,
    sign,
    verify,
    write_private_key,
    write_public_key,
)
from .symmetric import SymAlg, encrypt_block

__all__ = [
    "BRAINPOOL_P256", "CCMS", "CSCMS", "CURVES", "NIST_P256", "PROFILES", "SCMS", "SM2_256",
    "Curve", "CurveId", "CryptoProfile", "HashAlg", "KemCiphertext", "KeyPair", "ProfileName",
    "Signature", "SymAlg", "aead_decrypt", "aead_encrypt", "digest", "encrypt_block",
    "generate_keypair", "get_profile", "hash_bytes", "kem_decapsulate", "kem_encapsulate",
    "keypair_from_scalar", "profile_for_curve", "random_scalar", "read_private_key", "read_public_key",
    "scalar_mult_count", "sign", "verify", "write_private_key", "write_public_key",
]
