"""Short-Weierstrass arithmetic for the three 256-bit curves used by the suites.

Points are affine ``(x, y)`` tuples of ints; the identity is ``None``.
Internally multiplication runs in Jacobian coordinates.  Every call to
:meth:`Curve.mul` or :meth:`Curve.mul_base` bumps a process-wide counter so
callers can compare how many scalar multiplications a code path performs.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from enum import IntEnum
from functools import cached_property
from typing import Optional, Tuple

from ..errors import MalformedPoint

Point = Optional[Tuple[int, int]]

_INF = (1, 1, 0)
_WNAF_WIDTH = 5

_probe_lock = threading.Lock()
_scalar_mults = 0


def scalar_mult_count() -> int:
    """Total scalar multiplications performed so far in this process."""
    return _scalar_mults


def _bump() -> None:
    global _scalar_mults
    with _probe_lock:
        _scalar_mults += 1


class CurveId(IntEnum):
    NIST_P256 = 0
    BRAINPOOL_P256 = 1
    SM2_256 = 2


# -- Jacobian primitives ------------------------------------------------------


def _jdouble(P, p, a, a_is_minus3):
    X1, Y1, Z1 = P
    if Z1 == 0 or Y1 == 0:
        return _INF
    YY = Y1 * Y1 % p
    S = 4 * X1 * YY % p
    ZZ = Z1 * Z1 % p
    if a_is_minus3:
        M = 3 * (X1 - ZZ) * (X1 + ZZ) % p
    else:
        M = (3 * X1 * X1 + a * ZZ * ZZ) % p
    X3 = (M * M - 2 * S) % p
    Y3 = (M * (S - X3) - 8 * YY * YY) % p
    Z3 = 2 * Y1 * Z1 % p
    return (X3, Y3, Z3)


def _jadd_affine(P, x2, y2, p, a, a_is_minus3):
    """Jacobian ``P`` plus affine ``(x2, y2)``."""
    X1, Y1, Z1 = P
    if Z1 == 0:
        return (x2, y2, 1)
    Z1Z1 = Z1 * Z1 % p
    U2 = x2 * Z1Z1 % p
    S2 = y2 * Z1 * Z1Z1 % p
    H = (U2 - X1) % p
    R = (S2 - Y1) % p
    if H == 0:
        if R == 0:
            return _jdouble(P, p, a, a_is_minus3)
        return _INF
    HH = H * H % p
    HHH = H * HH % p
    V = X1 * HH % p
    X3 = (R * R - HHH - 2 * V) % p
    Y3 = (R * (V - X3) - Y1 * HHH) % p
    Z3 = Z1 * H % p
    return (X3, Y3, Z3)


def _jadd(P, Q, p, a, a_is_minus3):
    X1, Y1, Z1 = P
    X2, Y2, Z2 = Q
    if Z1 == 0:
        return Q
    if Z2 == 0:
        return P
    Z1Z1 = Z1 * Z1 % p
    Z2Z2 = Z2 * Z2 % p
    U1 = X1 * Z2Z2 % p
    U2 = X2 * Z1Z1 % p
    S1 = Y1 * Z2 * Z2Z2 % p
    S2 = Y2 * Z1 * Z1Z1 % p
    H = (U2 - U1) % p
    R = (S2 - S1) % p
    if H == 0:
        if R == 0:
            return _jdouble(P, p, a, a_is_minus3)
        return _INF
    HH = H * H % p
    HHH = H * HH % p
    V = U1 * HH % p
    X3 = (R * R - HHH - 2 * V) % p
    Y3 = (R * (V - X3) - S1 * HHH) % p
    Z3 = Z1 * Z2 * H % p
    return (X3, Y3, Z3)


def _normalize_many(points, p):
    """Batch conversion to affine with a single field inversion."""
    live = [(i, P) for i, P in enumerate(points) if P[2] != 0]
    out: list = [None] * len(points)
    if not live:
        return out
    prefix = []
    acc = 1
    for _, P in live:
        prefix.append(acc)
        acc = acc * P[2] % p
    inv = pow(acc, -1, p)
    for k in range(len(live) - 1, -1, -1):
        i, (X, Y, Z) = live[k]
        zinv = inv * prefix[k] % p
        inv = inv * Z % p
        zz = zinv * zinv % p
        out[i] = (X * zz % p, Y * zz * zinv % p)
    return out


def _wnaf(k: int, w: int) -> list:
    digits = []
    half = 1 << (w - 1)
    full = 1 << w
    while k:
        if k & 1:
            d = k & (full - 1)
            if d >= half:
                d -= full
            k -= d
        else:
            d = 0
        digits.append(d)
        k >>= 1
    return digits


@dataclass(frozen=True)
class Curve:
    id: CurveId
    name: str
    p: int
    a: int
    b: int
    n: int
    gx: int
    gy: int

    @property
    def g(self) -> Tuple[int, int]:
        return (self.gx, self.gy)

    @cached_property
    def _a_is_minus3(self) -> bool:
        return self.a == self.p - 3

    def contains(self, pt: Point) -> bool:
        if pt is None:
            return False
        x, y = pt
        if not (0 <= x < self.p and 0 <= y < self.p):
            return False
        return (y * y - (x * x * x + self.a * x + self.b)) % self.p == 0

    def neg(self, pt: Point) -> Point:
        if pt is None:
            return None
        return (pt[0], (-pt[1]) % self.p)

    def _to_affine(self, P) -> Point:
        X, Y, Z = P
        if Z == 0:
            return None
        p = self.p
        zinv = pow(Z, -1, p)
        zz = zinv * zinv % p
        return (X * zz % p, Y * zz * zinv % p)

    def add(self, P: Point, Q: Point) -> Point:
        if P is None:
            return Q
        if Q is None:
            return P
        J = _jadd_affine((P[0], P[1], 1), Q[0], Q[1], self.p, self.a, self._a_is_minus3)
        return self._to_affine(J)

    def mul(self, k: int, P: Point) -> Point:
        """Variable-base scalar multiplication (width-5 wNAF)."""
        _bump()
        k %= self.n
        if k == 0 or P is None:
            return None
        p, a, m3 = self.p, self.a, self._a_is_minus3
        # odd multiples P, 3P, 5P, ... in affine form
        twoP = _jdouble((P[0], P[1], 1), p, a, m3)
        odd = [(P[0], P[1], 1)]
        for _ in range((1 << (_WNAF_WIDTH - 2)) - 1):
            odd.append(_jadd(odd[-1], twoP, p, a, m3))
        table = _normalize_many(odd, p)
        R = _INF
        for d in reversed(_wnaf(k, _WNAF_WIDTH)):
            R = _jdouble(R, p, a, m3)
            if d > 0:
                x, y = table[d >> 1]
                R = _jadd_affine(R, x, y, p, a, m3)
            elif d < 0:
                x, y = table[(-d) >> 1]
                R = _jadd_affine(R, x, p - y, p, a, m3)
        return self._to_affine(R)

    @cached_property
    def _base_table(self):
        # row j holds d * 256**j * G for d = 1..255
        p, a, m3 = self.p, self.a, self._a_is_minus3
        rows = []
        base = (self.gx, self.gy, 1)
        for _ in range(32):
            row = [base]
            for _ in range(254):
                row.append(_jadd(row[-1], base, p, a, m3))
            rows.append(row)
            nxt = row[127]
            base = _jdouble(nxt, p, a, m3)  # 256 * previous base
        flat = _normalize_many([P for row in rows for P in row], p)
        return [flat[j * 255:(j + 1) * 255] for j in range(32)]

    def mul_base(self, k: int) -> Point:
        """``k * G`` using a precomputed 8-bit fixed-window table."""
        _bump()
        k %= self.n
        if k == 0:
            return None
        p, a, m3 = self.p, self.a, self._a_is_minus3
        table = self._base_table
        R = _INF
        j = 0
        while k:
            d = k & 0xFF
            if d:
                x, y = table[j][d - 1]
                R = _jadd_affine(R, x, y, p, a, m3)
            k >>= 8
            j += 1
        return self._to_affine(R)

    def compress(self, pt: Point) -> bytes:
        if pt is None:
            raise MalformedPoint("cannot encode the point at infinity")
        x, y = pt
        return bytes([2 | (y & 1)]) + x.to_bytes(32, "big")

    def decompress(self, data: bytes) -> Tuple[int, int]:
        if len(data) != 33 or data[0] not in (2, 3):
            raise MalformedPoint("expected a 33-byte compressed point")
        x = int.from_bytes(data[1:], "big")
        p = self.p
        if x >= p:
            raise MalformedPoint("x coordinate out of range")
        rhs = (x * x * x + self.a * x + self.b) % p
        y = pow(rhs, (p + 1) // 4, p)
        if y * y % p != rhs:
            raise MalformedPoint("x is not on the curve")
        if (y & 1) != (data[0] & 1):
            y = p - y
        return (x, y)


NIST_P256 = Curve(
    CurveId.NIST_P256,
    "NIST P-256",
    p=0xFFFFFFFF00000001000000000000000000000000FFFFFFFFFFFFFFFFFFFFFFFF,
    a=0xFFFFFFFF00000001000000000000000000000000FFFFFFFFFFFFFFFFFFFFFFFC,
    b=0x5AC635D8AA3A93E7B3EBBD55769886BC651D06B0CC53B0F63BCE3C3E27D2604B,
    n=0xFFFFFFFF00000000FFFFFFFFFFFFFFFFBCE6FAADA7179E84F3B9CAC2FC632551,
    gx=0x6B17D1F2E12C4247F8BCE6E563A440F277037D812DEB33A0F4A13945D898C296,
    gy=0x4FE342E2FE1A7F9B8EE7EB4A7C0F9E162BCE33576B315ECECBB6406837BF51F5,
)

BRAINPOOL_P256 = Curve(
    CurveId.BRAINPOOL_P256,
    "brainpoolP256r1",
    p=0xA9FB57DBA1EEA9BC3E660A909D838D726E3BF623D52620282013481D1F6E5377,
    a=0x7D5A0975FC2C3057EEF67530417AFFE7FB8055C126DC5C6CE94A4B44F330B5D9,
    b=0x26DC5C6CE94A4B44F330B5D9BBD77CBF958416295CF7E1CE6BCCDC18FF8C07B6,
    n=0xA9FB57DBA1EEA9BC3E660A909D838D718C397AA3B561A6F7901E0E82974856A7,
    gx=0x8BD2AEB9CB7E57CB2C4B482FFC81B7AFB9DE27E1E3BD23C23A4453BD9ACE3262,
    gy=0x547EF835C3DAC4FD97F8461A14611DC9C27745132DED8E545C1D54C72F046997,
)

SM2_256 = Curve(
    CurveId.SM2_256,
    "SM2-256",
    p=0xFFFFFFFEFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFF00000000FFFFFFFFFFFFFFFF,
    a=0xFFFFFFFEFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFF00000000FFFFFFFFFFFFFFFC,
    b=0x28E9FA9E9D9F5E344D5A9E4BCF6509A7F39789F515AB8F92DDBCBD414D940E93,
    n=0xFFFFFFFEFFFFFFFFFFFFFFFFFFFFFFFF7203DF6B21C6052B53BBF40939D54123,
    gx=0x32C4AE2C1F1981195F9904466A39C9948FE30BBFF2660BE1715A4589334C74C7,
    gy=0xBC3736A2F4F6779C59BDCEE36B692153D0A9877CC62A474002DF32E52139F0A0,
)

CURVES = {c.id: c for c in (NIST_P256, BRAINPOOL_P256, SM2_256)}
