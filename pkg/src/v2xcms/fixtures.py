"""Golden artifacts derived from a fixed seed.

Regenerating must reproduce the committed files byte for byte; any codec or
derivation change shows up as a diff.
"""

from __future__ import annotations

from pathlib import Path
from typing import Dict, List

from .butterfly import DEFAULT_BATCH_SIZE, expand_cocoon_public, new_caterpillar
from .codec import encode_certificate, encode_signed_data, encode_signed_encrypted, hashed_id8
from .crypto import PROFILES
from .flows.actors import Role
from .flows.bus import MessageBus
from .flows.runner import run_lifecycle
from .messages import encrypt_signed
from .rng import SeededRng

FIXTURE_SEED = "v2xcms-golden-1"
TRANSCRIPT_BATCH = 2


def generate_fixtures(seed: str = FIXTURE_SEED) -> Dict[str, bytes]:
    """Relative path -> file content."""
    out: Dict[str, object] = {}
    for profile in PROFILES.values():
        tag = profile.name.value.lower()
        rng = SeededRng(f"{seed}/{tag}")
        bus = MessageBus()
        lc = run_lifecycle(profile, rng.fork("pki"), batch_size=TRANSCRIPT_BATCH,
                           payload=rng.fork("bsm").randbytes(200), bus=bus)
        pki, ee = lc.pki, lc.ee
        out[f"{tag}/root.cert"] = encode_certificate(pki.root)
        out[f"{tag}/bsm.msg"] = encode_signed_data(lc.message)
        enroller = ee.authority_certs.get(Role.ECA) or ee.authority_certs[Role.EA]
        issuer_public = None if ee.enrollment_cert.is_explicit else enroller.tbs.key_point
        enc = encrypt_signed(profile, lc.message, ee.enrollment_cert, rng.fork("enc"), issuer_public)
        out[f"{tag}/bsm_encrypted.msg"] = encode_signed_encrypted(enc)

        ids: List[str] = []
        for role, auth in pki.authorities.items():
            ids.append(f"{role.value} {hashed_id8(profile, auth.certificate).hex()}")
        ids.append(f"root {hashed_id8(profile, pki.root).hex()}")
        ids.append(f"enrollment {hashed_id8(profile, ee.enrollment_cert).hex()}")
        for i, (cert, _) in enumerate(ee.authorization_credentials):
            ids.append(f"authorization/{i} {hashed_id8(profile, cert).hex()}")
        out[f"{tag}/hashed_ids.txt"] = "".join(line + "\n" for line in ids)

        cat = new_caterpillar(profile, rng.fork("butterfly"))
        lines = [f"caterpillar {profile.curve.compress(cat.keypair.public_point).hex()}",
                 f"expansion_key {cat.expansion_key.hex()}"]
        for i in range(DEFAULT_BATCH_SIZE):
            b = expand_cocoon_public(profile, cat.keypair.public_point, cat.expansion_key, i)
            lines.append(f"{i} {profile.curve.compress(b.point).hex()}")
        out[f"{tag}/butterfly.txt"] = "".join(line + "\n" for line in lines)
        out[f"{tag}/transcript.txt"] = "".join(e.line() + "\n" for e in bus.transcript)
    return {k: v if isinstance(v, bytes) else v.encode("utf-8") for k, v in sorted(out.items())}


def write_fixtures(directory, files: Dict[str, bytes]) -> None:
    root = Path(directory)
    for rel, data in files.items():
        path = root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)


def diff_fixtures(directory, files: Dict[str, bytes]) -> List[str]:
    """Relative paths whose stored content differs from ``files``."""
    root = Path(directory)
    return [rel for rel, data in files.items()
            if not (root / rel).is_file() or (root / rel).read_bytes() != data]
