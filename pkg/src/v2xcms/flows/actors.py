"""Protocol actors and PKI bootstrap."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Dict, List, Optional, Tuple

from ..butterfly import CaterpillarKey
from ..certs import issue_explicit, self_sign_root
from ..codec import hashed_id8
from ..crypto import CCMS, CSCMS, SCMS, CryptoProfile, KeyPair, generate_keypair
from ..crypto.curves import Point
from ..messages import key_id8
from ..model import Certificate, now_time32, time32
from ..rng import SeededRng, SystemRng
from .bus import MessageBus

YEAR = 365 * 86400
ROOT_LIFETIME = 20 * YEAR
AUTHORITY_LIFETIME = 10 * YEAR
ENROLLMENT_LIFETIME = 3 * YEAR
AUTHORIZATION_LIFETIME = 7 * 86400

# fixed clock for seeded, replayable runs
FIXED_TIME32 = time32(datetime(2025, 1, 1, tzinfo=timezone.utc))


class Role(str, Enum):
    ECA = "ECA"
    EA = "EA"
    RA = "RA"
    PRA = "PRA"
    ACA = "ACA"
    AA = "AA"
    GBA_AS = "GBA-AS"


PROFILE_ROLES = {
    SCMS.name: (Role.ECA, Role.RA, Role.ACA),
    CCMS.name: (Role.EA, Role.AA),
    CSCMS.name: (Role.ECA, Role.PRA, Role.ACA, Role.GBA_AS),
}


def uses_implicit_certs(profile: CryptoProfile) -> bool:
    """IEEE SCMS defaults to implicit certificates; CCMS and C-SCMS to explicit."""
    return profile.name is SCMS.name


def end_entity_label(profile: CryptoProfile) -> str:
    return "ITS-S" if profile.name is CCMS.name else "EE"


@dataclass(eq=False)
class AuthorityState:
    role: Role
    profile: CryptoProfile
    keypair: KeyPair
    certificate: Certificate
    canonical_registry: Dict[bytes, Point] = field(default_factory=dict)  # key id -> key
    issued_log: List[bytes] = field(default_factory=list)
    issued: Dict[bytes, Certificate] = field(default_factory=dict)
    subscriber_secrets: Dict[str, bytes] = field(default_factory=dict)
    channels: Dict[str, object] = field(default_factory=dict)
    batches: Dict[bytes, dict] = field(default_factory=dict)
    rng: object = field(default_factory=SystemRng, repr=False)
    pki: Optional["Pki"] = field(default=None, repr=False)
    lock: threading.RLock = field(default_factory=threading.RLock, repr=False)

    @property
    def name(self) -> str:
        return self.role.value

    @property
    def cert_id(self) -> bytes:
        return hashed_id8(self.profile, self.certificate)

    def register_canonical(self, public: Point) -> bytes:
        kid = key_id8(self.profile, public)
        with self.lock:
            self.canonical_registry[kid] = public
        return kid

    def record_issued(self, cert: Certificate) -> bytes:
        cid = hashed_id8(self.profile, cert)
        with self.lock:
            self.issued_log.append(cid)
            self.issued[cid] = cert
        return cid


@dataclass(eq=False)
class Pki:
    profile: CryptoProfile
    root: Certificate
    root_key: KeyPair
    authorities: Dict[Role, AuthorityState]
    now: int  # Time32
    bus: MessageBus = field(default_factory=MessageBus)

    @property
    def now64(self) -> int:
        return self.now * 1_000_000

    def authority(self, role: Role) -> AuthorityState:
        return self.authorities[role]

    def issuer_chain(self, role: Role) -> List[Certificate]:
        return [self.authorities[role].certificate, self.root]

    def resolve(self, cert_id: bytes) -> Optional[Certificate]:
        for auth in self.authorities.values():
            if auth.cert_id == cert_id:
                return auth.certificate
            cert = auth.issued.get(cert_id)
            if cert is not None:
                return cert
        return None


@dataclass(eq=False)
class EndEntityState:
    name: str
    profile: CryptoProfile
    canonical: KeyPair
    enrollment_key: KeyPair
    root: Certificate
    authority_certs: Dict[Role, Certificate]
    enrollment_cert: Optional[Certificate] = None
    caterpillar: Optional[CaterpillarKey] = None
    authorization_credentials: List[Tuple[Certificate, int]] = field(default_factory=list)
    gba_secret: Optional[bytes] = None
    channel: Optional[object] = None
    pending_batch: Optional[bytes] = None
    rng: object = field(default_factory=SystemRng, repr=False)

    @property
    def label(self) -> str:
        return end_entity_label(self.profile)

    def issuer_chain(self, role: Role) -> List[Certificate]:
        return [self.authority_certs[role], self.root]


def _fork(rng, label):
    return rng.fork(label) if isinstance(rng, SeededRng) else rng


def create_pki(profile: CryptoProfile, rng=None, now: Optional[int] = None,
               bus: Optional[MessageBus] = None) -> Pki:
    """Root CA plus the role authorities the profile's system defines."""
    rng = rng or SystemRng()
    if now is None:
        now = FIXED_TIME32 if isinstance(rng, SeededRng) else now_time32()
    root_rng = _fork(rng, "root")
    root, root_key = self_sign_root(profile, f"{profile.name.value} Root CA", (now, ROOT_LIFETIME), root_rng)
    authorities = {}
    for role in PROFILE_ROLES[profile.name]:
        arng = _fork(rng, role.value)
        key = generate_keypair(profile, arng)
        cert = issue_explicit(profile, root, root_key, key.public_point, None,
                              f"{profile.name.value} {role.value}", (now, AUTHORITY_LIFETIME), root_rng)
        authorities[role] = AuthorityState(role, profile, key, cert, rng=arng)
    pki = Pki(profile, root, root_key, authorities, now, bus or MessageBus())
    for auth in authorities.values():
        auth.pki = pki
    return pki


def bootstrap_end_entity(pki: Pki, name: str, rng=None) -> EndEntityState:
    """Provision a device: canonical key registered with the enrollment
    authority, trust anchors installed, GBA subscriber secret where used."""
    enroller = pki.authorities.get(Role.ECA) or pki.authorities[Role.EA]
    rng = rng or _fork(enroller.rng, f"ee/{name}")
    profile = pki.profile
    canonical = generate_keypair(profile, rng)
    ee = EndEntityState(
        name=name,
        profile=profile,
        canonical=canonical,
        enrollment_key=generate_keypair(profile, rng),
        root=pki.root,
        authority_certs={role: a.certificate for role, a in pki.authorities.items()},
        rng=rng,
    )
    enroller.register_canonical(canonical.public_point)
    gba = pki.authorities.get(Role.GBA_AS)
    if gba is not None:
        secret = rng.randbytes(16)
        with gba.lock:
            gba.subscriber_secrets[name] = secret
        ee.gba_secret = secret
    return ee
