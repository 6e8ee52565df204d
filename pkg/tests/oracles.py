"""Independent reference computations used to check the package.

Nothing here imports from v2xcms: curve constants are typed in from the
published domain parameters, scalar multiplication is plain affine
double-and-add, and block ciphers / signatures come from third-party
libraries.
"""

from __future__ import annotations

from dataclasses import dataclass

from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.asymmetric import ec
from cryptography.hazmat.primitives.asymmetric.utils import decode_dss_signature, encode_dss_signature
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes
from Cryptodome.Cipher import AES as CryptodomeAES
from gmssl import sm2 as gm_sm2
from gmssl import sm3 as gm_sm3
from gmssl import sm4 as gm_sm4


@dataclass(frozen=True)
class RefCurve:
    name: str
    p: int
    a: int
    b: int
    gx: int
    gy: int
    n: int

    @property
    def g(self):
        return (self.gx, self.gy)


REF_P256 = RefCurve(
    "P-256",
    p=0xFFFFFFFF00000001000000000000000000000000FFFFFFFFFFFFFFFFFFFFFFFF,
    a=0xFFFFFFFF00000001000000000000000000000000FFFFFFFFFFFFFFFFFFFFFFFC,
    b=0x5AC635D8AA3A93E7B3EBBD55769886BC651D06B0CC53B0F63BCE3C3E27D2604B,
    gx=0x6B17D1F2E12C4247F8BCE6E563A440F277037D812DEB33A0F4A13945D898C296,
    gy=0x4FE342E2FE1A7F9B8EE7EB4A7C0F9E162BCE33576B315ECECBB6406837BF51F5,
    n=0xFFFFFFFF00000000FFFFFFFFFFFFFFFFBCE6FAADA7179E84F3B9CAC2FC632551,
)
REF_BRAINPOOL = RefCurve(
    "brainpoolP256r1",
    p=0xA9FB57DBA1EEA9BC3E660A909D838D726E3BF623D52620282013481D1F6E5377,
    a=0x7D5A0975FC2C3057EEF67530417AFFE7FB8055C126DC5C6CE94A4B44F330B5D9,
    b=0x26DC5C6CE94A4B44F330B5D9BBD77CBF958416295CF7E1CE6BCCDC18FF8C07B6,
    gx=0x8BD2AEB9CB7E57CB2C4B482FFC81B7AFB9DE27E1E3BD23C23A4453BD9ACE3262,
    gy=0x547EF835C3DAC4FD97F8461A14611DC9C27745132DED8E545C1D54C72F046997,
    n=0xA9FB57DBA1EEA9BC3E660A909D838D718C397AA3B561A6F7901E0E82974856A7,
)
REF_SM2 = RefCurve(
    "SM2",
    p=0xFFFFFFFEFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFF00000000FFFFFFFFFFFFFFFF,
    a=0xFFFFFFFEFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFF00000000FFFFFFFFFFFFFFFC,
    b=0x28E9FA9E9D9F5E344D5A9E4BCF6509A7F39789F515AB8F92DDBCBD414D940E93,
    gx=0x32C4AE2C1F1981195F9904466A39C9948FE30BBFF2660BE1715A4589334C74C7,
    gy=0xBC3736A2F4F6779C59BDCEE36B692153D0A9877CC62A474002DF32E52139F0A0,
    n=0xFFFFFFFEFFFFFFFFFFFFFFFFFFFFFFFF7203DF6B21C6052B53BBF40939D54123,
)

# keyed by the package's curve names so tests can look them up by id name
REF_CURVES = {"NIST_P256": REF_P256, "BRAINPOOL_P256": REF_BRAINPOOL, "SM2_256": REF_SM2}


def ref_on_curve(c: RefCurve, pt) -> bool:
    if pt is None:
        return False
    x, y = pt
    return (y * y - (x * x * x + c.a * x + c.b)) % c.p == 0


def ref_add(c: RefCurve, P, Q):
    if P is None:
        return Q
    if Q is None:
        return P
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2 and (y1 + y2) % c.p == 0:
        return None
    if P == Q:
        lam = (3 * x1 * x1 + c.a) * pow(2 * y1, -1, c.p) % c.p
    else:
        lam = (y2 - y1) * pow(x2 - x1, -1, c.p) % c.p
    x3 = (lam * lam - x1 - x2) % c.p
    return x3, (lam * (x1 - x3) - y1) % c.p


def ref_mul(c: RefCurve, k: int, P=None):
    """Left-to-right double-and-add; ``P`` defaults to the base point."""
    P = c.g if P is None else P
    k %= c.n
    R = None
    for bit in bin(k)[2:] if k else "":
        R = ref_add(c, R, R)
        if bit == "1":
            R = ref_add(c, R, P)
    return R


_OPENSSL_CURVES = {"NIST_P256": ec.SECP256R1, "BRAINPOOL_P256": ec.BrainpoolP256R1}


def openssl_public(curve_name: str, d: int):
    """d*G through OpenSSL (P-256 and brainpool only)."""
    key = ec.derive_private_key(d, _OPENSSL_CURVES[curve_name]())
    nums = key.public_key().public_numbers()
    return nums.x, nums.y


def openssl_ecdsa_verify(curve_name: str, public, message: bytes, r: int, s: int) -> bool:
    """ECDSA-SHA256 over ``message`` (OpenSSL hashes it)."""
    pub = ec.EllipticCurvePublicNumbers(public[0], public[1], _OPENSSL_CURVES[curve_name]()).public_key()
    try:
        pub.verify(encode_dss_signature(r, s), message, ec.ECDSA(hashes.SHA256()))
        return True
    except Exception:
        return False


def openssl_ecdsa_sign(curve_name: str, d: int, message: bytes):
    key = ec.derive_private_key(d, _OPENSSL_CURVES[curve_name]())
    return decode_dss_signature(key.sign(message, ec.ECDSA(hashes.SHA256())))


def _gm_sm2(d: int, public):
    pub_hex = "%064x%064x" % public
    return gm_sm2.CryptSM2(private_key="%064x" % d if d else "", public_key=pub_hex)


def gmssl_sm2_verify(public, message: bytes, r: int, s: int) -> bool:
    """SM2 with the default user id, Z_A prefix included (gmssl's *_with_sm3 API)."""
    return bool(_gm_sm2(0, public).verify_with_sm3("%064x%064x" % (r, s), message))


def gmssl_sm2_sign(d: int, public, message: bytes, k_hex: str):
    sig = _gm_sm2(d, public).sign_with_sm3(message, k_hex)
    return int(sig[:64], 16), int(sig[64:], 16)


def sm3_ref(data: bytes) -> bytes:
    """gmssl's SM3, independent of both hashlib and the package's fallback."""
    return bytes.fromhex(gm_sm3.sm3_hash(list(data)))


def aes_block_ref(key: bytes, block: bytes) -> bytes:
    """AES through PyCryptodome, a second implementation alongside OpenSSL."""
    return CryptodomeAES.new(key, CryptodomeAES.MODE_ECB).encrypt(block)


def sm4_block_ref(key: bytes, block: bytes) -> bytes:
    c = gm_sm4.CryptSM4()
    c.set_key(key, gm_sm4.SM4_ENCRYPT)
    return bytes(c.crypt_ecb(block))[:16]  # gmssl pads; first block is the cipher output


def openssl_aes_block(key: bytes, block: bytes) -> bytes:
    enc = Cipher(algorithms.AES(key), modes.ECB()).encryptor()
    return enc.update(block) + enc.finalize()


def ccm_ref(block_encrypt, key: bytes, nonce: bytes, plaintext: bytes, tag_len: int = 16) -> bytes:
    """Textbook CCM (no associated data) over an arbitrary 128-bit block cipher."""
    q = 15 - len(nonce)
    flags = ((tag_len - 2) // 2) << 3 | (q - 1)
    b0 = bytes([flags]) + nonce + len(plaintext).to_bytes(q, "big")
    mac = block_encrypt(key, b0)
    padded = plaintext + bytes(-len(plaintext) % 16)
    for i in range(0, len(padded), 16):
        mac = block_encrypt(key, bytes(x ^ y for x, y in zip(mac, padded[i:i + 16])))

    def ctr_block(i):
        return block_encrypt(key, bytes([q - 1]) + nonce + i.to_bytes(q, "big"))

    out = bytearray()
    for j in range(0, len(plaintext), 16):
        ks = ctr_block(j // 16 + 1)
        out += bytes(x ^ y for x, y in zip(plaintext[j:j + 16], ks))
    tag = bytes(x ^ y for x, y in zip(mac, ctr_block(0)))[:tag_len]
    return bytes(out) + tag
