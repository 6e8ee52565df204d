import pytest

import oracles
from conftest import FIXTURE_DIR
from v2xcms.butterfly import (
    DEFAULT_BATCH_SIZE,
    expand_cocoon_private,
    expand_cocoon_public,
    new_caterpillar,
    prf_f,
)
from v2xcms.crypto import CCMS, CSCMS, SCMS
from v2xcms.crypto.symmetric import SymAlg
from v2xcms.errors import MalformedPoint, OutOfRange
from v2xcms.rng import SeededRng

TAGS = {"scms": SCMS, "ccms": CCMS, "cscms": CSCMS}


def f_oracle(profile, key, index):
    block_fn = oracles.aes_block_ref if profile.symmetric is SymAlg.AES_128 else oracles.sm4_block_ref
    n = oracles.REF_CURVES[profile.curve_id.name].n
    return int.from_bytes(block_fn(key, index.to_bytes(16, "big")), "big") % n or 1


class TestPrf:
    def test_deterministic(self, profile, rng):
        key = rng.randbytes(16)
        assert prf_f(profile, key, 7) == prf_f(profile, key, 7)

    def test_no_collisions(self, profile, rng):
        key = rng.randbytes(16)
        values = {prf_f(profile, key, i) for i in range(10_000)}
        assert len(values) == 10_000
        assert all(1 <= v < profile.curve.n for v in values)

    def test_matches_second_block_cipher(self, profile, rng):
        for _ in range(20):
            key = rng.randbytes(16)
            i = int.from_bytes(rng.randbytes(4), "big")
            assert prf_f(profile, key, i) == f_oracle(profile, key, i)

    def test_index_range(self, profile):
        with pytest.raises(OutOfRange):
            prf_f(profile, b"\x00" * 16, -1)
        with pytest.raises(OutOfRange):
            prf_f(profile, b"\x00" * 16, 2**32)


class TestExpansion:
    def test_identity_100_indices(self, profile, rng):
        cat = new_caterpillar(profile, rng)
        curve = profile.curve
        for i in range(100):
            B = expand_cocoon_public(profile, cat.keypair.public_point, cat.expansion_key, i)
            b = expand_cocoon_private(profile, cat.keypair.private_scalar, cat.expansion_key, i)
            assert B.index == i
            assert curve.mul_base(b) == B.point

    def test_identity_against_oracle(self, profile, rng):
        ref = oracles.REF_CURVES[profile.curve_id.name]
        cat = new_caterpillar(profile, rng)
        for i in (0, 1, 19, 99):
            b = expand_cocoon_private(profile, cat.keypair.private_scalar, cat.expansion_key, i)
            assert b == (cat.keypair.private_scalar + f_oracle(profile, cat.expansion_key, i)) % ref.n
            B = expand_cocoon_public(profile, cat.keypair.public_point, cat.expansion_key, i)
            assert B.point == oracles.ref_mul(ref, b)

    def test_zero_caterpillar_disallowed(self, profile):
        with pytest.raises(OutOfRange):
            expand_cocoon_private(profile, 0, b"\x00" * 16, 0)
        with pytest.raises(OutOfRange):
            expand_cocoon_private(profile, profile.curve.n, b"\x00" * 16, 0)

    def test_wraps_modulo_n(self, profile, rng):
        n = profile.curve.n
        key = rng.randbytes(16)
        b = expand_cocoon_private(profile, n - 1, key, 3)
        assert b == (prf_f(profile, key, 3) - 1) % n
        A = profile.curve.mul_base(n - 1)
        assert profile.curve.mul_base(b) == expand_cocoon_public(profile, A, key, 3).point

    def test_off_curve_caterpillar(self, profile, rng):
        x, y = new_caterpillar(profile, rng).keypair.public_point
        with pytest.raises(MalformedPoint):
            expand_cocoon_public(profile, (x, y + 1), b"\x00" * 16, 0)

    def test_different_keys_unlinkable_points(self, profile, rng):
        cat = new_caterpillar(profile, rng)
        other = rng.randbytes(16)
        a = expand_cocoon_public(profile, cat.keypair.public_point, cat.expansion_key, 0)
        b = expand_cocoon_public(profile, cat.keypair.public_point, other, 0)
        assert a.point != b.point


@pytest.mark.parametrize("tag", sorted(TAGS))
def test_golden_batch(tag):
    """Committed point list equals an independent recomputation."""
    profile = TAGS[tag]
    ref = oracles.REF_CURVES[profile.curve_id.name]
    lines = (FIXTURE_DIR / tag / "butterfly.txt").read_text().splitlines()
    A = profile.curve.decompress(bytes.fromhex(lines[0].split()[1]))
    key = bytes.fromhex(lines[1].split()[1])
    points = [line.split() for line in lines[2:]]
    assert len(points) == DEFAULT_BATCH_SIZE
    for idx, hexpt in points:
        i = int(idx)
        expected = oracles.ref_add(ref, A, oracles.ref_mul(ref, f_oracle(profile, key, i)))
        assert profile.curve.decompress(bytes.fromhex(hexpt)) == expected
        assert expand_cocoon_public(profile, A, key, i).point == expected


def test_seeded_caterpillar_deterministic():
    assert new_caterpillar(SCMS, SeededRng("c")) == new_caterpillar(SCMS, SeededRng("c"))
