"""On-disk PKI state used by the command line.

Layout of a state directory::

    state.json                       profile, seed, clock, registries
    root.cert  root.sk
    authorities/<ROLE>.cert  .sk
    devices/<name>/canonical.sk  canonical.pk  enrollment.sk  [enrollment.cert]
    devices/<name>/authorization/<NNN>.cert  <NNN>.sk

Everything a command needs is read back from here, so the directory is
self-contained.  Under a seed, every file is a pure function of the seed
and the command sequence.
"""

from __future__ import annotations

import json
import re
import shutil
from pathlib import Path
from typing import Optional

from .codec import decode_certificate, encode_certificate
from .crypto import get_profile, keypair_from_scalar, read_private_key, write_private_key, write_public_key
from .flows.actors import AuthorityState, EndEntityState, Pki, Role, create_pki
from .flows.bus import MessageBus
from .model import now_time32
from .rng import SeededRng, SystemRng

STATE_FILE = "state.json"
_DEVICE_NAME = re.compile(r"[A-Za-z0-9_-][A-Za-z0-9._-]{0,63}")


class StateError(Exception):
    """Missing or inconsistent state directory."""


def _write_cert(path: Path, cert) -> None:
    path.write_bytes(encode_certificate(cert))


def _read_cert(path: Path):
    return decode_certificate(path.read_bytes())


def command_rng(seed: Optional[str], label: str):
    return SystemRng() if seed is None else SeededRng(f"{seed}/{label}")


class Store:
    def __init__(self, directory):
        self.dir = Path(directory)

    # -- state.json -----------------------------------------------------------

    def _state(self) -> dict:
        path = self.dir / STATE_FILE
        if not path.is_file():
            raise StateError(f"{self.dir} holds no PKI state (run init first)")
        return json.loads(path.read_text())

    def _write_state(self, state: dict) -> None:
        (self.dir / STATE_FILE).write_text(json.dumps(state, indent=2, sort_keys=True) + "\n")

    @property
    def seed(self) -> Optional[str]:
        return self._state()["seed"]

    # -- PKI ------------------------------------------------------------------

    def init(self, profile_name: str, seed: Optional[str]) -> Pki:
        profile = get_profile(profile_name)
        if self.dir.exists():
            # only ever wipe something that is already a state directory
            if not (self.dir / STATE_FILE).is_file() and any(self.dir.iterdir()):
                raise StateError(f"{self.dir} exists and is not a PKI state directory")
            shutil.rmtree(self.dir)
        self.dir.mkdir(parents=True)
        rng = command_rng(seed, "init")
        pki = create_pki(profile, rng)
        state = {
            "profile": profile.name.value,
            "seed": seed,
            "time32": pki.now if seed is not None else None,
            "authorities": {},
            "devices": [],
        }
        self._write_state(state)
        self.save_pki(pki)
        return pki

    def load_pki(self, label: str, bus: Optional[MessageBus] = None) -> Pki:
        state = self._state()
        profile = get_profile(state["profile"])
        rng = command_rng(state["seed"], label)
        now = state["time32"] if state["time32"] is not None else now_time32()
        root = _read_cert(self.dir / "root.cert")
        root_key = read_private_key(self.dir / "root.sk", profile)
        authorities = {}
        for role_name, rec in state["authorities"].items():
            role = Role(role_name)
            base = self.dir / "authorities" / role.value
            auth = AuthorityState(
                role, profile, read_private_key(base.with_suffix(".sk"), profile),
                _read_cert(base.with_suffix(".cert")),
                rng=rng.fork(role.value) if isinstance(rng, SeededRng) else rng,
            )
            for hexpt in rec["canonical"]:
                auth.register_canonical(profile.curve.decompress(bytes.fromhex(hexpt)))
            for hexcert in rec["issued"]:
                auth.record_issued(decode_certificate(bytes.fromhex(hexcert)))
            auth.subscriber_secrets = {k: bytes.fromhex(v) for k, v in rec["subscribers"].items()}
            authorities[role] = auth
        pki = Pki(profile, root, root_key, authorities, now, bus or MessageBus())
        for auth in authorities.values():
            auth.pki = pki
        return pki

    def save_pki(self, pki: Pki) -> None:
        state = self._state()
        _write_cert(self.dir / "root.cert", pki.root)
        write_private_key(self.dir / "root.sk", pki.root_key)
        adir = self.dir / "authorities"
        adir.mkdir(exist_ok=True)
        records = {}
        for role, auth in pki.authorities.items():
            _write_cert(adir / f"{role.value}.cert", auth.certificate)
            write_private_key(adir / f"{role.value}.sk", auth.keypair)
            records[role.value] = {
                "canonical": sorted(pki.profile.curve.compress(p).hex() for p in auth.canonical_registry.values()),
                "issued": [encode_certificate(auth.issued[cid]).hex() for cid in auth.issued_log],
                "subscribers": {k: v.hex() for k, v in sorted(auth.subscriber_secrets.items())},
            }
        state["authorities"] = records
        self._write_state(state)

    # -- devices ----------------------------------------------------------------

    def device_dir(self, name: str) -> Path:
        if not _DEVICE_NAME.fullmatch(name):
            raise StateError(f"device name {name!r} must be 1-64 characters of [A-Za-z0-9._-]")
        return self.dir / "devices" / name

    def save_device(self, ee: EndEntityState) -> None:
        d = self.device_dir(ee.name)
        d.mkdir(parents=True, exist_ok=True)
        profile = ee.profile
        write_private_key(d / "canonical.sk", ee.canonical)
        write_public_key(d / "canonical.pk", profile, ee.canonical.public_point)
        write_private_key(d / "enrollment.sk", ee.enrollment_key)
        if ee.enrollment_cert is not None:
            _write_cert(d / "enrollment.cert", ee.enrollment_cert)
        if ee.gba_secret is not None:
            (d / "gba.secret").write_text(ee.gba_secret.hex() + "\n")
        adir = d / "authorization"
        if ee.authorization_credentials:
            if adir.exists():
                shutil.rmtree(adir)
            adir.mkdir()
            for i, (cert, scalar) in enumerate(ee.authorization_credentials):
                _write_cert(adir / f"{i:03d}.cert", cert)
                write_private_key(adir / f"{i:03d}.sk", keypair_from_scalar(profile, scalar))
        state = self._state()
        if ee.name not in state["devices"]:
            state["devices"] = sorted([*state["devices"], ee.name])
            self._write_state(state)

    def load_device(self, pki: Pki, name: str, label: str) -> EndEntityState:
        d = self.device_dir(name)
        if not d.is_dir():
            raise StateError(f"no device named {name!r} (run bootstrap first)")
        profile = pki.profile
        ee = EndEntityState(
            name=name,
            profile=profile,
            canonical=read_private_key(d / "canonical.sk", profile),
            enrollment_key=read_private_key(d / "enrollment.sk", profile),
            root=pki.root,
            authority_certs={role: a.certificate for role, a in pki.authorities.items()},
            rng=command_rng(self.seed, f"{label}/{name}"),
        )
        if (d / "enrollment.cert").is_file():
            ee.enrollment_cert = _read_cert(d / "enrollment.cert")
        if (d / "gba.secret").is_file():
            ee.gba_secret = bytes.fromhex((d / "gba.secret").read_text().strip())
        adir = d / "authorization"
        if adir.is_dir():
            for cert_path in sorted(adir.glob("*.cert")):
                key = read_private_key(cert_path.with_suffix(".sk"), profile)
                ee.authorization_credentials.append((_read_cert(cert_path), key.private_scalar))
        return ee


